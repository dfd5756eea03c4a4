#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "kinemotion/packing.hpp"
#include "kinemotion/skeleton.hpp"

// The attentive hierarchical motion-recurrent network.
//
// Encoder: the packed input frames are rescaled by spatial attention
// (velocity- and acceleration-softmaxes over joints), projected into
// per-frame hidden states with a shared input map, and refined for N
// recurrent steps. Each step updates every frame state from its window of
// neighbors and the global state (six sigmoid gates plus a tanh candidate),
// and in parallel updates the global state from a temporal-attention summary
// of the frame states (Jacobi-style: both updates read the previous step's
// states). Cells start at 1, the global state at the mean of the initial
// frame states.
//
// Decoder: two GRU layers unrolled autoregressively. Layer 1 starts from the
// final global state, layer 2 from (last frame state + global state); the
// first input is the raw packed last observed frame, every later input is
// the previous output. A linear head maps layer-2 states to packed poses.
//
// All gradients are hand-derived reverse-mode passes over the caches the
// forward pass records; there is no autodiff machinery anywhere.

namespace kinemotion {

struct HyperParams {
    int hidden = 16;
    int recurrent_steps = 5;  // encoder refinement steps N
    int context_window = 3;   // neighborhood width w ∈ {1, 3, 5, 7}
    int input_frames = 50;    // t (≥ 3: spatial attention differences)
    int output_frames = 10;   // T
    Representation rep = Representation::Stiefel;

    void validate() const;
};

// Numerically stable softmax (max-shifted, hence exactly shift-invariant).
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

// ---- Flat parameter storage -------------------------------------------------

struct TensorInfo {
    std::string name;
    int offset = 0;  // element offset into the flat vector
    int rows = 0;
    int cols = 0;
};

// All parameters live in one flat vector; named matrix views are mapped into
// it. The manifest order is fixed at construction, which makes the Adam
// state, finite-difference probes, and checkpoints trivially aligned.
class ParamStore {
  public:
    void add(const std::string& name, int rows, int cols);
    void freeze();  // allocates storage; no more adds

    bool frozen() const { return frozen_; }
    int size() const { return total_; }
    const std::vector<TensorInfo>& manifest() const { return manifest_; }
    const TensorInfo& info(const std::string& name) const;

    Eigen::Map<Eigen::MatrixXd> mat(const std::string& name);
    Eigen::Map<const Eigen::MatrixXd> mat(const std::string& name) const;

    Eigen::VectorXd& flat() { return data_; }
    const Eigen::VectorXd& flat() const { return data_; }

    void set_zero() { data_.setZero(); }

    // Same manifest, zero-initialized storage (gradient buffers).
    ParamStore like() const;

  private:
    std::vector<TensorInfo> manifest_;
    std::unordered_map<std::string, int> index_;
    Eigen::VectorXd data_;
    int total_ = 0;
    bool frozen_ = false;
};

// ---- Forward caches ---------------------------------------------------------

struct SpatialAttention {
    Eigen::MatrixXd attended;  // D × t packed inputs, blocks scaled by β+γ
    Eigen::MatrixXd beta;      // J × t
    Eigen::MatrixXd gamma;     // J × t
};

struct EncodeCache {
    Eigen::MatrixXd x;  // D × t attended inputs
    // Index n = 0..N; h[n], c[n] are H × t, g[n], cg[n] are H.
    std::vector<Eigen::MatrixXd> h, c;
    std::vector<Eigen::VectorXd> g, cg;
    // Per refinement step (index n−1):
    std::vector<std::vector<Eigen::MatrixXd>> gates;  // window gates..., q, i, o, candidate
    std::vector<Eigen::MatrixXd> tanh_c;              // tanh of the new cells
    std::vector<Eigen::VectorXd> alpha;               // temporal attention, length t
    std::vector<Eigen::VectorXd> gbar;                // attention summary ḡ
    std::vector<Eigen::MatrixXd> fbar;                // per-frame keep gates, H × t
    std::vector<Eigen::VectorXd> fg, og, tanh_cg;     // global gates and tanh cell
};

struct DecodeCache {
    std::vector<Eigen::VectorXd> x;                    // inputs per step
    std::vector<Eigen::VectorXd> z1, r1, cc1, h1;      // layer-1 gates/states
    std::vector<Eigen::VectorXd> z2, r2, cc2, h2;      // layer-2 gates/states
    std::vector<Eigen::VectorXd> y;                    // packed outputs
    Eigen::VectorXd h1_init, h2_init;
};

struct ForwardCache {
    EncodeCache enc;
    DecodeCache dec;
};

// ---- The model --------------------------------------------------------------

class AhmrModel {
  public:
    AhmrModel(const SkeletonSpec& skel, const HyperParams& hyper);

    const SkeletonSpec& skeleton() const { return packing_.skeleton(); }
    const HyperParams& hyper() const { return hyper_; }
    const Packing& packing() const { return packing_; }
    int input_dim() const { return packing_.dim(); }

    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    // Scaled-uniform init (±1/√fan_in); the cell-mixing gate biases start at
    // +1 so early training retains state.
    void init_params(std::uint64_t seed);

    // Eq.-7 style input preprocessing; positions come from FK (or are the
    // packed values themselves for Coords). No parameters involved.
    SpatialAttention spatial_attention(const std::vector<PoseFrame>& input) const;

    // Temporal attention over frame states (columns of h); `alpha` sums to 1
    // and `summary` = h · alpha. Exposed for the invariance tests.
    struct TemporalAttention {
        Eigen::VectorXd alpha;
        Eigen::VectorXd summary;
    };
    static TemporalAttention temporal_attention(const Eigen::MatrixXd& h);

    // Runs the encoder on any number of frames ≥ 3.
    EncodeCache encode(const std::vector<PoseFrame>& input) const;

    // Runs the encoder on already-packed (and attention-scaled) columns,
    // one frame per column. Works for any t ≥ 1, which the per-step update
    // tests use to probe single- and two-frame corner cases directly.
    EncodeCache encode_packed(const Eigen::MatrixXd& x) const;

    // Encoder + autoregressive decoder; returns `steps` packed outputs
    // (default hyper.output_frames). The cache, if given, is filled for
    // backward().
    std::vector<Eigen::VectorXd> forward(const std::vector<PoseFrame>& input,
                                         ForwardCache* cache = nullptr, int steps = -1) const;

    // Accumulates ∂L/∂params into `grad` given ∂L/∂y per output frame.
    void backward(const ForwardCache& cache, const std::vector<Eigen::VectorXd>& ybar,
                  ParamStore& grad) const;

    // Full prediction: pose frames carrying the last observed translation.
    std::vector<PoseFrame> predict(const std::vector<PoseFrame>& input, int steps = -1) const;

  private:
    void decode(const Eigen::VectorXd& x0, const Eigen::VectorXd& h1_init,
                const Eigen::VectorXd& h2_init, int steps, DecodeCache& cache) const;

    HyperParams hyper_;
    Packing packing_;
    ParamStore params_;
    std::vector<std::string> window_gate_names_;  // by offset, −k..+k
};

// ---- Checkpoints ------------------------------------------------------------

// Binary format: [u64 little-endian header length][header JSON][raw f64
// little-endian payload in manifest order]. The header carries the format
// version, hyperparameters, skeleton, and tensor manifest, so a model can be
// reconstructed from the file alone. Round trips are bit-exact.
void save_checkpoint(const std::string& path, const AhmrModel& model);
AhmrModel load_checkpoint(const std::string& path);

}  // namespace kinemotion
