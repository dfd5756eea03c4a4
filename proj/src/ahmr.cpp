#include "kinemotion/ahmr.hpp"

#include <cmath>
#include <random>

#include "kinemotion/errors.hpp"

namespace kinemotion {

namespace {

// [0, 1) with explicitly fixed bit mapping, so init is reproducible across
// platforms independent of distribution implementations.
double unit_uniform(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53;
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
    return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

Eigen::VectorXd sigmoid_v(const Eigen::VectorXd& x) {
    return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

}  // namespace

void HyperParams::validate() const {
    if (hidden < 1) throw ConfigError("hidden must be >= 1");
    if (recurrent_steps < 1) throw ConfigError("recurrent_steps must be >= 1");
    if (context_window != 1 && context_window != 3 && context_window != 5 &&
        context_window != 7) {
        throw ConfigError("context_window must be one of 1, 3, 5, 7");
    }
    if (input_frames < 3) throw ConfigError("input_frames must be >= 3");
    if (output_frames < 1) throw ConfigError("output_frames must be >= 1");
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    Eigen::ArrayXd shifted = logits.array() - logits.maxCoeff();
    Eigen::ArrayXd e = shifted.exp();
    return (e / e.sum()).matrix();
}

// ---- ParamStore -------------------------------------------------------------

void ParamStore::add(const std::string& name, int rows, int cols) {
    if (frozen_) throw Error("ParamStore: add after freeze");
    if (index_.count(name)) throw Error("ParamStore: duplicate tensor " + name);
    index_[name] = static_cast<int>(manifest_.size());
    manifest_.push_back({name, total_, rows, cols});
    total_ += rows * cols;
}

void ParamStore::freeze() {
    if (frozen_) return;
    data_ = Eigen::VectorXd::Zero(total_);
    frozen_ = true;
}

const TensorInfo& ParamStore::info(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("ParamStore: unknown tensor " + name);
    return manifest_[it->second];
}

Eigen::Map<Eigen::MatrixXd> ParamStore::mat(const std::string& name) {
    const TensorInfo& ti = info(name);
    return Eigen::Map<Eigen::MatrixXd>(data_.data() + ti.offset, ti.rows, ti.cols);
}

Eigen::Map<const Eigen::MatrixXd> ParamStore::mat(const std::string& name) const {
    const TensorInfo& ti = info(name);
    return Eigen::Map<const Eigen::MatrixXd>(data_.data() + ti.offset, ti.rows, ti.cols);
}

ParamStore ParamStore::like() const {
    ParamStore out;
    out.manifest_ = manifest_;
    out.index_ = index_;
    out.total_ = total_;
    out.freeze();
    return out;
}

// ---- Model setup ------------------------------------------------------------

namespace {

std::string window_gate_name(int delta) {
    if (delta == 0) return "f";
    std::string base = delta < 0 ? "l" : "r";
    int mag = std::abs(delta);
    return mag == 1 ? base : base + std::to_string(mag);
}

}  // namespace

AhmrModel::AhmrModel(const SkeletonSpec& skel, const HyperParams& hyper)
    : hyper_(hyper), packing_(skel, hyper.rep) {
    hyper_.validate();
    const int H = hyper_.hidden;
    const int D = packing_.dim();
    const int w = hyper_.context_window;
    const int k = (w - 1) / 2;

    params_.add("in.W", H, D);
    params_.add("in.b", H, 1);

    for (int delta = -k; delta <= k; ++delta) {
        window_gate_names_.push_back(window_gate_name(delta));
    }
    std::vector<std::string> gate_names = window_gate_names_;
    gate_names.insert(gate_names.end(), {"q", "i", "o", "cand"});
    for (const std::string& g : gate_names) {
        params_.add("enc." + g + ".U", H, D);
        params_.add("enc." + g + ".W", H, w * H);
        params_.add("enc." + g + ".Z", H, H);
        params_.add("enc." + g + ".b", H, 1);
    }
    for (std::string g : {"f", "g", "o"}) {
        params_.add(std::string("glob.") + g + ".W", H, H);
        params_.add(std::string("glob.") + g + ".Z", H, H);
        params_.add(std::string("glob.") + g + ".b", H, 1);
    }
    for (std::string layer : {"dec1", "dec2"}) {
        const int in_dim = layer == "dec1" ? D : H;
        for (std::string g : {"z", "r", "c"}) {
            params_.add(layer + "." + g + ".W", H, in_dim);
            params_.add(layer + "." + g + ".U", H, H);
            params_.add(layer + "." + g + ".b", H, 1);
        }
    }
    params_.add("out.W", D, H);
    params_.add("out.b", D, 1);
    params_.freeze();
}

void AhmrModel::init_params(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    params_.set_zero();
    for (const TensorInfo& ti : params_.manifest()) {
        bool is_bias = ti.cols == 1 && ti.name.size() > 2 &&
                       ti.name.compare(ti.name.size() - 2, 2, ".b") == 0;
        if (is_bias) continue;
        double bound = 1.0 / std::sqrt(double(ti.cols));
        auto m = params_.mat(ti.name);
        for (int c = 0; c < ti.cols; ++c) {
            for (int r = 0; r < ti.rows; ++r) {
                m(r, c) = (2.0 * unit_uniform(rng) - 1.0) * bound;
            }
        }
    }
    // Cell-mixing gates open at the start so state survives early training.
    for (const std::string& g : window_gate_names_) {
        params_.mat("enc." + g + ".b").setConstant(1.0);
    }
    params_.mat("enc.q.b").setConstant(1.0);
    params_.mat("glob.f.b").setConstant(1.0);
    params_.mat("glob.g.b").setConstant(1.0);
}

// ---- Attention ---------------------------------------------------------------

SpatialAttention AhmrModel::spatial_attention(const std::vector<PoseFrame>& input) const {
    const int t = static_cast<int>(input.size());
    if (t < 3) {
        throw TooFewFrames(
            "spatial_attention: need at least 3 frames (velocity and "
            "acceleration differences)");
    }
    const SkeletonSpec& skel = packing_.skeleton();
    const int J = skel.bone_count();

    // Bone-end positions per frame, translation ignored.
    std::vector<std::vector<Eigen::Vector3d>> pos(t);
    for (int j = 0; j < t; ++j) {
        PoseFrame at_origin = input[j];
        at_origin.root_t.setZero();
        pos[j] = forward_kinematics(skel, at_origin);
    }

    SpatialAttention att;
    att.beta.resize(J, t);
    att.gamma.resize(J, t);
    att.attended.resize(packing_.dim(), t);
    for (int j = 0; j < t; ++j) {
        const int jm1 = std::max(j - 1, 0);
        const int jm2 = std::max(j - 2, 0);
        Eigen::VectorXd vel(J), acc(J);
        for (int b = 0; b < J; ++b) {
            vel[b] = (pos[j][b] - pos[jm1][b]).norm();
            acc[b] = (pos[j][b] - 2.0 * pos[jm1][b] + pos[jm2][b]).norm();
        }
        att.beta.col(j) = softmax(vel);
        att.gamma.col(j) = softmax(acc);
        Eigen::VectorXd packed = packing_.pack(input[j]);
        for (const PackedBlock& blk : packing_.blocks()) {
            double s = att.beta(blk.bone, j) + att.gamma(blk.bone, j);
            packed.segment(blk.offset, blk.width) *= s;
        }
        att.attended.col(j) = packed;
    }
    return att;
}

AhmrModel::TemporalAttention AhmrModel::temporal_attention(const Eigen::MatrixXd& h) {
    const int t = static_cast<int>(h.cols());
    Eigen::VectorXd logits = h.transpose() * h.col(t - 1);
    TemporalAttention out;
    out.alpha = softmax(logits);
    out.summary = h * out.alpha;
    return out;
}

// ---- Encoder -----------------------------------------------------------------

namespace {

// Column j of the result block for offset δ holds h.col(j+δ), or zero when
// j+δ falls outside [0, t).
Eigen::MatrixXd window_concat(const Eigen::MatrixXd& h, int w) {
    const int H = static_cast<int>(h.rows());
    const int t = static_cast<int>(h.cols());
    const int k = (w - 1) / 2;
    Eigen::MatrixXd cat = Eigen::MatrixXd::Zero(w * H, t);
    for (int d = -k; d <= k; ++d) {
        const int row = (d + k) * H;
        for (int j = 0; j < t; ++j) {
            const int src = j + d;
            if (src >= 0 && src < t) cat.block(row, j, H, 1) = h.col(src);
        }
    }
    return cat;
}

// Column j shifted by δ (same padding convention as window_concat).
Eigen::MatrixXd shifted(const Eigen::MatrixXd& m, int d) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), m.cols());
    for (int j = 0; j < m.cols(); ++j) {
        const int src = j + d;
        if (src >= 0 && src < m.cols()) out.col(j) = m.col(src);
    }
    return out;
}

// Adjoint of `shifted`: contributions scatter back to the source columns.
void scatter_shifted(Eigen::MatrixXd& acc, const Eigen::MatrixXd& grad, int d) {
    for (int j = 0; j < grad.cols(); ++j) {
        const int src = j + d;
        if (src >= 0 && src < grad.cols()) acc.col(src) += grad.col(j);
    }
}

}  // namespace

EncodeCache AhmrModel::encode(const std::vector<PoseFrame>& input) const {
    return encode_packed(spatial_attention(input).attended);
}

EncodeCache AhmrModel::encode_packed(const Eigen::MatrixXd& x) const {
    const int t = static_cast<int>(x.cols());
    if (t < 1) throw DimensionMismatch("encode: empty input");
    if (x.rows() != packing_.dim())
        throw DimensionMismatch("encode: packed row count " + std::to_string(x.rows()) +
                                " does not match input dimension " +
                                std::to_string(packing_.dim()));
    const int H = hyper_.hidden;
    const int N = hyper_.recurrent_steps;
    const int w = hyper_.context_window;
    const int k = (w - 1) / 2;
    const ParamStore& P = params_;

    EncodeCache cache;
    cache.x = x;
    const Eigen::MatrixXd& X = cache.x;

    cache.h.resize(N + 1);
    cache.c.resize(N + 1);
    cache.g.resize(N + 1);
    cache.cg.resize(N + 1);
    cache.gates.resize(N);
    cache.tanh_c.resize(N);
    cache.alpha.resize(N);
    cache.gbar.resize(N);
    cache.fbar.resize(N);
    cache.fg.resize(N);
    cache.og.resize(N);
    cache.tanh_cg.resize(N);

    cache.h[0] = P.mat("in.W") * X;
    cache.h[0].colwise() += Eigen::VectorXd(P.mat("in.b"));
    cache.g[0] = cache.h[0].rowwise().mean();
    cache.c[0] = Eigen::MatrixXd::Ones(H, t);
    cache.cg[0] = Eigen::VectorXd::Ones(H);

    const int n_window = static_cast<int>(window_gate_names_.size());
    std::vector<std::string> gate_names = window_gate_names_;
    gate_names.insert(gate_names.end(), {"q", "i", "o", "cand"});

    for (int n = 1; n <= N; ++n) {
        const Eigen::MatrixXd& Hp = cache.h[n - 1];
        const Eigen::MatrixXd& Cp = cache.c[n - 1];
        const Eigen::VectorXd& gp = cache.g[n - 1];
        const Eigen::VectorXd& cgp = cache.cg[n - 1];
        Eigen::MatrixXd Hcat = window_concat(Hp, w);

        std::vector<Eigen::MatrixXd>& gates = cache.gates[n - 1];
        gates.reserve(gate_names.size());
        for (const std::string& gname : gate_names) {
            Eigen::MatrixXd pre = P.mat("enc." + gname + ".U") * X +
                                  P.mat("enc." + gname + ".W") * Hcat;
            Eigen::VectorXd bias =
                P.mat("enc." + gname + ".Z") * gp + Eigen::VectorXd(P.mat("enc." + gname + ".b"));
            pre.colwise() += bias;
            gates.push_back(gname == "cand" ? Eigen::MatrixXd(pre.array().tanh().matrix())
                                            : sigmoid(pre));
        }

        Eigen::MatrixXd Cn = Eigen::MatrixXd::Zero(H, t);
        for (int d = -k; d <= k; ++d) {
            Cn += gates[d + k].cwiseProduct(shifted(Cp, d));
        }
        const Eigen::MatrixXd& q = gates[n_window];
        const Eigen::MatrixXd& i_gate = gates[n_window + 1];
        const Eigen::MatrixXd& o_gate = gates[n_window + 2];
        const Eigen::MatrixXd& cand = gates[n_window + 3];
        Cn += q.cwiseProduct(cgp.replicate(1, t));
        Cn += i_gate.cwiseProduct(cand);
        cache.tanh_c[n - 1] = Cn.array().tanh().matrix();
        cache.c[n] = Cn;
        cache.h[n] = o_gate.cwiseProduct(cache.tanh_c[n - 1]);

        // Global update, reading the step-(n−1) states in parallel.
        TemporalAttention ta = temporal_attention(Hp);
        cache.alpha[n - 1] = ta.alpha;
        cache.gbar[n - 1] = ta.summary;
        Eigen::MatrixXd fpre = P.mat("glob.f.W") * Hp;
        Eigen::VectorXd fbias = P.mat("glob.f.Z") * gp + Eigen::VectorXd(P.mat("glob.f.b"));
        fpre.colwise() += fbias;
        cache.fbar[n - 1] = sigmoid(fpre);
        cache.fg[n - 1] = sigmoid_v(P.mat("glob.g.W") * ta.summary + P.mat("glob.g.Z") * gp +
                                    Eigen::VectorXd(P.mat("glob.g.b")));
        cache.og[n - 1] = sigmoid_v(P.mat("glob.o.W") * ta.summary + P.mat("glob.o.Z") * gp +
                                    Eigen::VectorXd(P.mat("glob.o.b")));
        Eigen::VectorXd cgn = cache.fbar[n - 1].cwiseProduct(Cp).rowwise().sum();
        cgn += cache.fg[n - 1].cwiseProduct(cgp);
        cache.cg[n] = cgn;
        cache.tanh_cg[n - 1] = cgn.array().tanh().matrix();
        cache.g[n] = cache.og[n - 1].cwiseProduct(cache.tanh_cg[n - 1]);
    }
    return cache;
}

// ---- Decoder -----------------------------------------------------------------

void AhmrModel::decode(const Eigen::VectorXd& x0, const Eigen::VectorXd& h1_init,
                       const Eigen::VectorXd& h2_init, int steps, DecodeCache& cache) const {
    const ParamStore& P = params_;
    cache.h1_init = h1_init;
    cache.h2_init = h2_init;
    Eigen::VectorXd h1 = h1_init, h2 = h2_init;
    Eigen::VectorXd x = x0;
    for (int i = 0; i < steps; ++i) {
        cache.x.push_back(x);
        // Layer 1.
        Eigen::VectorXd z1 = sigmoid_v(P.mat("dec1.z.W") * x + P.mat("dec1.z.U") * h1 +
                                       Eigen::VectorXd(P.mat("dec1.z.b")));
        Eigen::VectorXd r1 = sigmoid_v(P.mat("dec1.r.W") * x + P.mat("dec1.r.U") * h1 +
                                       Eigen::VectorXd(P.mat("dec1.r.b")));
        Eigen::VectorXd cc1 = (P.mat("dec1.c.W") * x + P.mat("dec1.c.U") * r1.cwiseProduct(h1) +
                               Eigen::VectorXd(P.mat("dec1.c.b")))
                                  .array()
                                  .tanh()
                                  .matrix();
        Eigen::VectorXd h1n = z1.cwiseProduct(h1) +
                              (Eigen::VectorXd::Ones(h1.size()) - z1).cwiseProduct(cc1);
        // Layer 2 reads layer 1's new state.
        Eigen::VectorXd z2 = sigmoid_v(P.mat("dec2.z.W") * h1n + P.mat("dec2.z.U") * h2 +
                                       Eigen::VectorXd(P.mat("dec2.z.b")));
        Eigen::VectorXd r2 = sigmoid_v(P.mat("dec2.r.W") * h1n + P.mat("dec2.r.U") * h2 +
                                       Eigen::VectorXd(P.mat("dec2.r.b")));
        Eigen::VectorXd cc2 = (P.mat("dec2.c.W") * h1n + P.mat("dec2.c.U") * r2.cwiseProduct(h2) +
                               Eigen::VectorXd(P.mat("dec2.c.b")))
                                  .array()
                                  .tanh()
                                  .matrix();
        Eigen::VectorXd h2n = z2.cwiseProduct(h2) +
                              (Eigen::VectorXd::Ones(h2.size()) - z2).cwiseProduct(cc2);
        Eigen::VectorXd y = P.mat("out.W") * h2n + Eigen::VectorXd(P.mat("out.b"));

        cache.z1.push_back(z1);
        cache.r1.push_back(r1);
        cache.cc1.push_back(cc1);
        cache.h1.push_back(h1n);
        cache.z2.push_back(z2);
        cache.r2.push_back(r2);
        cache.cc2.push_back(cc2);
        cache.h2.push_back(h2n);
        cache.y.push_back(y);
        h1 = h1n;
        h2 = h2n;
        x = y;
    }
}

std::vector<Eigen::VectorXd> AhmrModel::forward(const std::vector<PoseFrame>& input,
                                                ForwardCache* cache, int steps) const {
    if (steps < 0) steps = hyper_.output_frames;
    if (steps < 1) throw DimensionMismatch("forward: need at least one output step");
    ForwardCache local;
    ForwardCache& fc = cache ? *cache : local;
    fc.enc = encode(input);
    const int t = static_cast<int>(input.size());
    const int N = hyper_.recurrent_steps;
    Eigen::VectorXd x0 = packing_.pack(input.back());
    Eigen::VectorXd h1_init = fc.enc.g[N];
    Eigen::VectorXd h2_init = fc.enc.h[N].col(t - 1) + fc.enc.g[N];
    decode(x0, h1_init, h2_init, steps, fc.dec);
    return fc.dec.y;
}

std::vector<PoseFrame> AhmrModel::predict(const std::vector<PoseFrame>& input, int steps) const {
    std::vector<Eigen::VectorXd> ys = forward(input, nullptr, steps);
    std::vector<PoseFrame> out;
    out.reserve(ys.size());
    for (const Eigen::VectorXd& y : ys) {
        out.push_back(packing_.unpack_frame(y, input.back().root_t));
    }
    return out;
}

// ---- Backward ----------------------------------------------------------------

namespace {

struct GruBack {
    Eigen::VectorXd dx;
    Eigen::VectorXd dh_prev;
};

GruBack gru_backward(const ParamStore& P, ParamStore& G, const std::string& layer,
                     const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                     const Eigen::VectorXd& z, const Eigen::VectorXd& r,
                     const Eigen::VectorXd& cc, const Eigen::VectorXd& dh) {
    // h' = z⊙h + (1−z)⊙c̃.
    Eigen::VectorXd dz = dh.cwiseProduct(h_prev - cc);
    Eigen::VectorXd dcc = dh.cwiseProduct(Eigen::VectorXd::Ones(z.size()) - z);
    Eigen::VectorXd dh_prev = dh.cwiseProduct(z);
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(x.size());

    // Candidate: c̃ = tanh(Wc·x + Uc·(r⊙h) + bc).
    Eigen::VectorXd dpre_c = dcc.cwiseProduct(
        (Eigen::VectorXd::Ones(cc.size()) - cc.cwiseProduct(cc)));
    G.mat(layer + ".c.W") += dpre_c * x.transpose();
    G.mat(layer + ".c.U") += dpre_c * (r.cwiseProduct(h_prev)).transpose();
    G.mat(layer + ".c.b") += dpre_c;
    dx += P.mat(layer + ".c.W").transpose() * dpre_c;
    Eigen::VectorXd drh = P.mat(layer + ".c.U").transpose() * dpre_c;
    Eigen::VectorXd dr = drh.cwiseProduct(h_prev);
    dh_prev += drh.cwiseProduct(r);

    // Update gate.
    Eigen::VectorXd dpre_z = dz.cwiseProduct(z).cwiseProduct(Eigen::VectorXd::Ones(z.size()) - z);
    G.mat(layer + ".z.W") += dpre_z * x.transpose();
    G.mat(layer + ".z.U") += dpre_z * h_prev.transpose();
    G.mat(layer + ".z.b") += dpre_z;
    dx += P.mat(layer + ".z.W").transpose() * dpre_z;
    dh_prev += P.mat(layer + ".z.U").transpose() * dpre_z;

    // Reset gate.
    Eigen::VectorXd dpre_r = dr.cwiseProduct(r).cwiseProduct(Eigen::VectorXd::Ones(r.size()) - r);
    G.mat(layer + ".r.W") += dpre_r * x.transpose();
    G.mat(layer + ".r.U") += dpre_r * h_prev.transpose();
    G.mat(layer + ".r.b") += dpre_r;
    dx += P.mat(layer + ".r.W").transpose() * dpre_r;
    dh_prev += P.mat(layer + ".r.U").transpose() * dpre_r;

    return {dx, dh_prev};
}

}  // namespace

void AhmrModel::backward(const ForwardCache& cache, const std::vector<Eigen::VectorXd>& ybar,
                         ParamStore& grad) const {
    const ParamStore& P = params_;
    const int H = hyper_.hidden;
    const int N = hyper_.recurrent_steps;
    const int w = hyper_.context_window;
    const int k = (w - 1) / 2;
    const int t = static_cast<int>(cache.enc.x.cols());
    const int steps = static_cast<int>(cache.dec.y.size());
    if (static_cast<int>(ybar.size()) != steps) {
        throw DimensionMismatch("backward: ybar count mismatch");
    }

    // --- Decoder, last step first, feeding dx into the previous output. ---
    Eigen::VectorXd dh1_next = Eigen::VectorXd::Zero(H);
    Eigen::VectorXd dh2_next = Eigen::VectorXd::Zero(H);
    Eigen::VectorXd dx_next = Eigen::VectorXd::Zero(packing_.dim());
    for (int i = steps - 1; i >= 0; --i) {
        Eigen::VectorXd dy = ybar[i] + dx_next;
        const Eigen::VectorXd& h2 = cache.dec.h2[i];
        grad.mat("out.W") += dy * h2.transpose();
        grad.mat("out.b") += dy;
        Eigen::VectorXd dh2 = P.mat("out.W").transpose() * dy + dh2_next;

        const Eigen::VectorXd& h2_prev = i == 0 ? cache.dec.h2_init : cache.dec.h2[i - 1];
        GruBack b2 = gru_backward(P, grad, "dec2", cache.dec.h1[i], h2_prev, cache.dec.z2[i],
                                  cache.dec.r2[i], cache.dec.cc2[i], dh2);
        Eigen::VectorXd dh1 = b2.dx + dh1_next;
        dh2_next = b2.dh_prev;

        const Eigen::VectorXd& h1_prev = i == 0 ? cache.dec.h1_init : cache.dec.h1[i - 1];
        GruBack b1 = gru_backward(P, grad, "dec1", cache.dec.x[i], h1_prev, cache.dec.z1[i],
                                  cache.dec.r1[i], cache.dec.cc1[i], dh1);
        dh1_next = b1.dh_prev;
        dx_next = i > 0 ? b1.dx : Eigen::VectorXd::Zero(packing_.dim());
    }
    // h1_init = g^N; h2_init = h^N[:, t−1] + g^N.
    Eigen::MatrixXd dH = Eigen::MatrixXd::Zero(H, t);
    Eigen::MatrixXd dC = Eigen::MatrixXd::Zero(H, t);
    Eigen::VectorXd dg = dh1_next + dh2_next;
    Eigen::VectorXd dcg = Eigen::VectorXd::Zero(H);
    dH.col(t - 1) += dh2_next;

    // --- Encoder, step N down to 1. ---
    const int n_window = static_cast<int>(window_gate_names_.size());
    std::vector<std::string> gate_names = window_gate_names_;
    gate_names.insert(gate_names.end(), {"q", "i", "o", "cand"});
    const Eigen::MatrixXd& X = cache.enc.x;

    for (int n = N; n >= 1; --n) {
        const Eigen::MatrixXd& Hp = cache.enc.h[n - 1];
        const Eigen::MatrixXd& Cp = cache.enc.c[n - 1];
        const Eigen::VectorXd& gp = cache.enc.g[n - 1];
        const Eigen::VectorXd& cgp = cache.enc.cg[n - 1];
        const std::vector<Eigen::MatrixXd>& gates = cache.enc.gates[n - 1];

        Eigen::MatrixXd dHp = Eigen::MatrixXd::Zero(H, t);
        Eigen::MatrixXd dCp = Eigen::MatrixXd::Zero(H, t);
        Eigen::VectorXd dgp = Eigen::VectorXd::Zero(H);
        Eigen::VectorXd dcgp = Eigen::VectorXd::Zero(H);

        // Global branch: g^n = ō⊙tanh(c_g^n).
        const Eigen::VectorXd& og = cache.enc.og[n - 1];
        const Eigen::VectorXd& fg = cache.enc.fg[n - 1];
        const Eigen::MatrixXd& fbar = cache.enc.fbar[n - 1];
        const Eigen::VectorXd& tcg = cache.enc.tanh_cg[n - 1];
        const Eigen::VectorXd& gbar = cache.enc.gbar[n - 1];
        const Eigen::VectorXd& alpha = cache.enc.alpha[n - 1];

        Eigen::VectorXd dog = dg.cwiseProduct(tcg);
        Eigen::VectorXd dcg_total =
            dcg + dg.cwiseProduct(og).cwiseProduct(
                      (Eigen::VectorXd::Ones(H) - tcg.cwiseProduct(tcg)));
        Eigen::VectorXd dgbar = Eigen::VectorXd::Zero(H);

        Eigen::VectorXd dpre_og =
            dog.cwiseProduct(og).cwiseProduct(Eigen::VectorXd::Ones(H) - og);
        grad.mat("glob.o.W") += dpre_og * gbar.transpose();
        grad.mat("glob.o.Z") += dpre_og * gp.transpose();
        grad.mat("glob.o.b") += dpre_og;
        dgbar += P.mat("glob.o.W").transpose() * dpre_og;
        dgp += P.mat("glob.o.Z").transpose() * dpre_og;

        // c_g^n = Σ_j f̄_j⊙c_j^{n−1} + f̄_g⊙c_g^{n−1}.
        Eigen::MatrixXd dFbar = Cp.array().colwise() * dcg_total.array();
        dCp += (fbar.array().colwise() * dcg_total.array()).matrix();
        Eigen::VectorXd dfg = dcg_total.cwiseProduct(cgp);
        dcgp += dcg_total.cwiseProduct(fg);

        Eigen::VectorXd dpre_fg =
            dfg.cwiseProduct(fg).cwiseProduct(Eigen::VectorXd::Ones(H) - fg);
        grad.mat("glob.g.W") += dpre_fg * gbar.transpose();
        grad.mat("glob.g.Z") += dpre_fg * gp.transpose();
        grad.mat("glob.g.b") += dpre_fg;
        dgbar += P.mat("glob.g.W").transpose() * dpre_fg;
        dgp += P.mat("glob.g.Z").transpose() * dpre_fg;

        Eigen::MatrixXd dpre_fbar =
            dFbar.cwiseProduct(fbar).cwiseProduct(Eigen::MatrixXd::Ones(H, t) - fbar);
        grad.mat("glob.f.W") += dpre_fbar * Hp.transpose();
        Eigen::VectorXd rows_fbar = dpre_fbar.rowwise().sum();
        grad.mat("glob.f.Z") += rows_fbar * gp.transpose();
        grad.mat("glob.f.b") += rows_fbar;
        dHp += P.mat("glob.f.W").transpose() * dpre_fbar;
        dgp += P.mat("glob.f.Z").transpose() * rows_fbar;

        // ḡ = Hp·α with α = softmax(Hpᵀ·h_t).
        Eigen::VectorXd dalpha = Hp.transpose() * dgbar;
        dHp += dgbar * alpha.transpose();
        Eigen::VectorXd ds = alpha.cwiseProduct(dalpha -
                                                Eigen::VectorXd::Constant(t, alpha.dot(dalpha)));
        // s_j = h_j·h_t.
        dHp += Hp.col(t - 1) * ds.transpose();
        dHp.col(t - 1) += Hp * ds;

        // Frame branch: h^n = o⊙tanh(c^n).
        const Eigen::MatrixXd& o_gate = gates[n_window + 2];
        const Eigen::MatrixXd& i_gate = gates[n_window + 1];
        const Eigen::MatrixXd& q_gate = gates[n_window];
        const Eigen::MatrixXd& cand = gates[n_window + 3];
        const Eigen::MatrixXd& tc = cache.enc.tanh_c[n - 1];

        Eigen::MatrixXd dO = dH.cwiseProduct(tc);
        Eigen::MatrixXd dC_total =
            dC + dH.cwiseProduct(o_gate).cwiseProduct(Eigen::MatrixXd::Ones(H, t) -
                                                      tc.cwiseProduct(tc));

        // Accumulated per-gate pre-activation gradients.
        std::vector<Eigen::MatrixXd> dgate(gate_names.size());
        for (int d = -k; d <= k; ++d) {
            dgate[d + k] = dC_total.cwiseProduct(shifted(Cp, d));
            scatter_shifted(dCp, dC_total.cwiseProduct(gates[d + k]), d);
        }
        dgate[n_window] = dC_total.cwiseProduct(cgp.replicate(1, t));
        dcgp += dC_total.cwiseProduct(q_gate).rowwise().sum();
        dgate[n_window + 1] = dC_total.cwiseProduct(cand);
        dgate[n_window + 2] = dO;
        dgate[n_window + 3] = dC_total.cwiseProduct(i_gate);

        Eigen::MatrixXd Hcat = window_concat(Hp, w);
        Eigen::MatrixXd dHcat = Eigen::MatrixXd::Zero(w * H, t);
        for (size_t gi = 0; gi < gate_names.size(); ++gi) {
            const Eigen::MatrixXd& act = gates[gi];
            Eigen::MatrixXd dpre;
            if (gate_names[gi] == "cand") {
                dpre = dgate[gi].cwiseProduct(Eigen::MatrixXd::Ones(H, t) -
                                              act.cwiseProduct(act));
            } else {
                dpre = dgate[gi].cwiseProduct(act).cwiseProduct(Eigen::MatrixXd::Ones(H, t) - act);
            }
            const std::string& gname = gate_names[gi];
            grad.mat("enc." + gname + ".U") += dpre * X.transpose();
            grad.mat("enc." + gname + ".W") += dpre * Hcat.transpose();
            Eigen::VectorXd rows = dpre.rowwise().sum();
            grad.mat("enc." + gname + ".Z") += rows * gp.transpose();
            grad.mat("enc." + gname + ".b") += rows;
            dHcat += P.mat("enc." + gname + ".W").transpose() * dpre;
            dgp += P.mat("enc." + gname + ".Z").transpose() * rows;
        }
        // Scatter the window rows back to their source frames.
        for (int d = -k; d <= k; ++d) {
            scatter_shifted(dHp, dHcat.middleRows((d + k) * H, H), d);
        }

        dH = dHp;
        dC = dCp;
        dg = dgp;
        dcg = dcgp;
    }

    // Init: h^0 = W_in·x + b_in (per frame), g^0 = mean_j h_j^0.
    dH += (dg / double(t)).replicate(1, t);
    grad.mat("in.W") += dH * X.transpose();
    grad.mat("in.b") += dH.rowwise().sum();
}

}  // namespace kinemotion
