#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "kinemotion/ahmr.hpp"
#include "kinemotion/losses.hpp"
#include "kinemotion/skeleton.hpp"

// The optimization loop: Adam with bias correction, a stepped learning-rate
// schedule, global-norm gradient clipping, uniform window sampling, and
// best-checkpoint tracking. Deterministic for a fixed seed regardless of the
// worker count (per-item gradients are reduced in a fixed order).

namespace kinemotion {

struct TrainConfig {
    int max_iters = 2000;
    int batch = 16;
    double lr0 = 1e-3;
    double decay = 0.95;      // multiplicative, every `decay_every` iterations
    int decay_every = 5000;
    double clip_norm = 5.0;
    LossKind loss = LossKind::Geodesic;
    std::uint64_t seed = 0;
    int log_every = 100;      // history granularity for the loss curve
    int threads = 0;          // 0 → KINEMOTION_THREADS or hardware default

    void validate() const;
};

// lr0 · decay^⌊iter/decay_every⌋ — a non-increasing step function.
double lr_at(const TrainConfig& cfg, int iter);

// Global-norm clip: if ‖g‖₂ > threshold, scale g by threshold/‖g‖₂ in place.
// Returns the pre-clip norm.
double clip_gradients(Eigen::VectorXd& grads, double threshold);

// Standard Adam moments over the flat parameter vector.
struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    int step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(int n) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

// One bias-corrected update of `params` from `grads` at learning rate `lr`.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state,
               double lr);

// Mid-loop probe: invoked every iteration; return false to stop early (the
// tests use this to assert schedule/clip behavior and to bound runtimes).
struct IterStats {
    int iter = 0;          // 1-based
    double loss = 0.0;
    double lr = 0.0;
    double grad_norm = 0.0;     // pre-clip global norm
    double clipped_norm = 0.0;  // post-clip global norm
};
using TrainProbe = std::function<bool(const IterStats&)>;

struct TrainResult {
    Eigen::VectorXd final_params;
    Eigen::VectorXd best_params;
    double best_loss = 0.0;
    int best_iter = 0;
    int iterations_run = 0;
    std::vector<IterStats> history;  // every `log_every` iterations + the last
};

// A training window: `input` feeds the encoder, `target` is compared against
// the decoder outputs.
struct Window {
    std::vector<PoseFrame> input;
    std::vector<PoseFrame> target;
};

// Cuts every valid (input, target) window at the given stride.
std::vector<Window> make_windows(const std::vector<PoseSequence>& sequences, int t, int T,
                                 int stride = 1);

// Closed-form window count for one sequence of length L.
long window_count(long L, int t, int T, int stride = 1);

// Runs the loop over uniformly sampled windows. The model's parameters are
// updated in place; the result carries both the final and the best-loss
// snapshots. Throws NonFiniteLoss if the batch loss leaves ℝ and EmptyDataset
// when `windows` is empty.
TrainResult train(AhmrModel& model, const std::vector<Window>& windows, const TrainConfig& cfg,
                  const TrainProbe& probe = nullptr);

}  // namespace kinemotion
