#include "kinemotion/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <random>
#include <thread>

#include "kinemotion/errors.hpp"

namespace kinemotion {

void TrainConfig::validate() const {
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
    if (batch < 1) throw ConfigError("batch must be >= 1");
    if (lr0 <= 0) throw ConfigError("lr0 must be positive");
    if (decay <= 0) throw ConfigError("decay must be positive");
    if (decay_every < 1) throw ConfigError("decay_every must be >= 1");
    if (clip_norm <= 0) throw ConfigError("clip_norm must be positive");
    if (log_every < 1) throw ConfigError("log_every must be >= 1");
    if (threads < 0) throw ConfigError("threads must be >= 0");
}

double lr_at(const TrainConfig& cfg, int iter) {
    if (iter < 0) iter = 0;
    return cfg.lr0 * std::pow(cfg.decay, double(iter / cfg.decay_every));
}

double clip_gradients(Eigen::VectorXd& grads, double threshold) {
    double norm = grads.norm();
    if (norm > threshold) {
        grads *= threshold / norm;
    }
    return norm;
}


void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state,
               double lr) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw ShapeMismatch("adam_step: parameter/gradient/moment sizes differ");
    }
    state.step += 1;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
    state.v = state.beta2 * state.v.array().matrix() +
              (1.0 - state.beta2) * grads.array().square().matrix();
    const double bc1 = 1.0 - std::pow(state.beta1, state.step);
    const double bc2 = 1.0 - std::pow(state.beta2, state.step);
    Eigen::ArrayXd mhat = state.m.array() / bc1;
    Eigen::ArrayXd vhat = state.v.array() / bc2;
    params.array() -= lr * mhat / (vhat.sqrt() + state.eps);
}

long window_count(long L, int t, int T, int stride) {
    if (stride < 1) throw ConfigError("stride must be >= 1");
    const long need = long(t) + long(T);
    if (L < need) return 0;
    return (L - need) / stride + 1;
}

std::vector<Window> make_windows(const std::vector<PoseSequence>& sequences, int t, int T,
                                 int stride) {
    if (t < 1 || T < 1) throw ConfigError("window sizes must be >= 1");
    if (stride < 1) throw ConfigError("stride must be >= 1");
    std::vector<Window> out;
    for (const PoseSequence& seq : sequences) {
        const long L = static_cast<long>(seq.frames.size());
        const long n = window_count(L, t, T, stride);
        for (long w = 0; w < n; ++w) {
            const long s = w * stride;
            Window win;
            win.input.assign(seq.frames.begin() + s, seq.frames.begin() + s + t);
            win.target.assign(seq.frames.begin() + s + t, seq.frames.begin() + s + t + T);
            out.push_back(std::move(win));
        }
    }
    return out;
}

namespace {

int resolve_threads(int requested, int batch) {
    int n = requested;
    if (n == 0) {
        if (const char* env = std::getenv("KINEMOTION_THREADS")) {
            n = std::atoi(env);
        }
    }
    if (n <= 0) {
        n = static_cast<int>(std::thread::hardware_concurrency());
    }
    return std::clamp(n, 1, std::max(1, batch));
}

struct ItemResult {
    double loss = 0.0;
    Eigen::VectorXd grad;
};

}  // namespace

TrainResult train(AhmrModel& model, const std::vector<Window>& windows, const TrainConfig& cfg,
                  const TrainProbe& probe) {
    cfg.validate();
    if (windows.empty()) throw EmptyDataset("train: no windows to sample from");
    if (!loss_compatible(cfg.loss, model.hyper().rep)) {
        throw ConfigError("loss '" + to_string(cfg.loss) + "' is incompatible with the " +
                          to_string(model.hyper().rep) + " representation");
    }

    const int P = model.params().size();
    const int T = model.hyper().output_frames;
    AdamState adam(P);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<size_t> pick(0, windows.size() - 1);

    const int workers = resolve_threads(cfg.threads, cfg.batch);

    TrainResult result;
    result.best_loss = std::numeric_limits<double>::infinity();

    // Evaluates loss + parameter gradient of one sampled window.
    auto eval_item = [&](size_t widx) {
        const Window& w = windows[widx];
        ForwardCache cache;
        std::vector<Eigen::VectorXd> pred = model.forward(w.input, &cache, T);
        LossResult lr = eval_loss(cfg.loss, model.packing(), pred, w.target, true);
        ItemResult item;
        item.loss = lr.loss.value;
        ParamStore g = model.params().like();
        model.backward(cache, lr.grad, g);
        item.grad = std::move(g.flat());
        return item;
    };

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        // Sample the whole batch up-front so the RNG stream (and therefore
        // the run) does not depend on the worker count.
        std::vector<size_t> batch_idx(cfg.batch);
        for (int b = 0; b < cfg.batch; ++b) batch_idx[b] = pick(rng);

        std::vector<ItemResult> items(cfg.batch);
        if (workers <= 1) {
            for (int b = 0; b < cfg.batch; ++b) items[b] = eval_item(batch_idx[b]);
        } else {
            std::vector<std::future<void>> futs;
            futs.reserve(workers);
            for (int wkr = 0; wkr < workers; ++wkr) {
                futs.push_back(std::async(std::launch::async, [&, wkr] {
                    for (int b = wkr; b < cfg.batch; b += workers) {
                        items[b] = eval_item(batch_idx[b]);
                    }
                }));
            }
            for (auto& f : futs) f.get();
        }

        // Fixed-order reduction: identical floating-point result for any
        // worker count.
        double loss = 0.0;
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(P);
        for (int b = 0; b < cfg.batch; ++b) {
            loss += items[b].loss;
            grad += items[b].grad;
        }
        loss /= double(cfg.batch);
        grad /= double(cfg.batch);

        if (!std::isfinite(loss)) throw NonFiniteLoss(iter);

        const double lr = lr_at(cfg, iter);
        IterStats stats;
        stats.iter = iter;
        stats.loss = loss;
        stats.lr = lr;
        stats.grad_norm = clip_gradients(grad, cfg.clip_norm);
        stats.clipped_norm = grad.norm();

        // The snapshot that achieved this loss is the pre-update one.
        result.iterations_run = iter;
        if (loss < result.best_loss) {
            result.best_loss = loss;
            result.best_iter = iter;
            result.best_params = model.params().flat();
        }

        adam_step(model.params().flat(), grad, adam, lr);

        bool stop = probe && !probe(stats);
        if (iter % cfg.log_every == 0 || iter == cfg.max_iters || stop) {
            result.history.push_back(stats);
        }
        if (stop) break;
    }

    result.final_params = model.params().flat();
    if (result.best_params.size() == 0) result.best_params = result.final_params;
    return result;
}

}  // namespace kinemotion
