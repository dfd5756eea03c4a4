#include "kinemotion/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "kinemotion/ahmr.hpp"
#include "kinemotion/data.hpp"
#include "kinemotion/errors.hpp"
#include "kinemotion/losses.hpp"
#include "kinemotion/training.hpp"

namespace kinemotion {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void echo_config(const CLI::App& sub) {
    std::cout << "# effective config [" << sub.get_name() << "]\n";
    std::string body = const_cast<CLI::App&>(sub).config_to_str(true, false);
    std::istringstream lines(body);
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty()) std::cout << "#   " << line << "\n";
    }
}

SkeletonSpec resolve_skeleton(const std::string& path, const std::string& preset,
                              const char* ctx) {
    if (!path.empty() && !preset.empty()) {
        throw ConfigError(std::string(ctx) + ": pass either --skeleton or --preset, not both");
    }
    if (!path.empty()) return load_skeleton(path);
    if (!preset.empty()) return make_preset(preset);
    throw ConfigError(std::string(ctx) + ": --skeleton or --preset is required");
}

// ---- train ------------------------------------------------------------------

struct TrainOpts {
    std::string data, skeleton, preset, synthetic;
    std::string out_dir = ".";
    std::string rep = "stiefel", loss = "geodesic";
    int hidden = 64, steps = 5, window = 3, input_frames = 50, output_frames = 10;
    int iters = 2000, batch = 16, decay_every = 5000, log_every = 100, stride = 1, threads = 0;
    double lr0 = 1e-3, decay = 0.95, clip = 5.0, fps = 25.0;
    std::uint64_t seed = 1;
    int synth_bones = 4, synth_frames = 500;
    double synth_freq = 0.5, synth_amplitude = 0.8;
    std::uint64_t synth_seed = 1;
};

void write_loss_csv(const std::string& path, const std::vector<IterStats>& history) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << "iter,loss,lr\n";
    for (const IterStats& s : history) {
        out << s.iter << ',' << num(s.loss) << ',' << num(s.lr) << '\n';
    }
}

int do_train(const TrainOpts& o) {
    MotionDataset ds;
    if (!o.synthetic.empty()) {
        if (o.synthetic != "pendulum") {
            throw ConfigError("--synthetic: unknown generator '" + o.synthetic +
                              "' (only 'pendulum')");
        }
        ds = synth_pendulum(o.synth_bones, o.synth_frames, o.synth_freq, o.synth_amplitude,
                            o.synth_seed, o.fps);
    } else {
        if (o.data.empty()) {
            throw ConfigError("--data is required (or use --synthetic pendulum)");
        }
        ds = load_expmap_csv(o.data, resolve_skeleton(o.skeleton, o.preset, "train"), o.fps);
    }

    HyperParams hyper;
    hyper.hidden = o.hidden;
    hyper.recurrent_steps = o.steps;
    hyper.context_window = o.window;
    hyper.input_frames = o.input_frames;
    hyper.output_frames = o.output_frames;
    hyper.rep = representation_from_string(o.rep);

    TrainConfig cfg;
    cfg.max_iters = o.iters;
    cfg.batch = o.batch;
    cfg.lr0 = o.lr0;
    cfg.decay = o.decay;
    cfg.decay_every = o.decay_every;
    cfg.clip_norm = o.clip;
    cfg.loss = loss_from_string(o.loss);
    cfg.seed = o.seed;
    cfg.log_every = o.log_every;
    cfg.threads = o.threads;

    AhmrModel model(ds.skeleton, hyper);
    model.init_params(o.seed);

    std::vector<Window> windows = make_windows(ds.sequences, hyper.input_frames,
                                               hyper.output_frames, o.stride);
    std::cout << "training on " << windows.size() << " windows, " << model.params().size()
              << " parameters\n";

    TrainResult result = train(model, windows, cfg);

    fs::create_directories(o.out_dir);
    const std::string final_path = (fs::path(o.out_dir) / "final.ckpt").string();
    const std::string best_path = (fs::path(o.out_dir) / "best.ckpt").string();
    const std::string curve_path = (fs::path(o.out_dir) / "loss.csv").string();

    save_checkpoint(final_path, model);
    Eigen::VectorXd final_params = model.params().flat();
    model.params().flat() = result.best_params;
    save_checkpoint(best_path, model);
    model.params().flat() = final_params;
    write_loss_csv(curve_path, result.history);

    std::cout << "best loss " << num(result.best_loss) << " at iteration " << result.best_iter
              << " (" << result.iterations_run << " run)\n"
              << "wrote " << final_path << ", " << best_path << ", " << curve_path << "\n";
    return 0;
}

// ---- predict ----------------------------------------------------------------

struct PredictOpts {
    std::string checkpoint, input, output;
    int frames = -1;  // -1 → the checkpoint's output_frames
    double fps = 25.0;
};

int do_predict(const PredictOpts& o) {
    AhmrModel model = load_checkpoint(o.checkpoint);
    if (model.hyper().rep == Representation::Coords) {
        throw ConfigError(
            "predict: coordinate-representation checkpoints cannot emit "
            "exponential-map rows (positions are not invertible to rotations)");
    }
    const int T = o.frames > 0 ? o.frames : model.hyper().output_frames;

    MotionDataset ds = load_expmap_csv(o.input, model.skeleton(), o.fps);
    const PoseSequence& seq = ds.sequences.back();
    const int t = model.hyper().input_frames;
    const int have = static_cast<int>(seq.frames.size());
    if (have < 3) throw TooFewFrames("predict: need at least 3 input frames");
    const int use = std::min(have, t);
    std::vector<PoseFrame> input(seq.frames.end() - use, seq.frames.end());

    MotionDataset out;
    out.skeleton = model.skeleton();
    out.frame_rate = o.fps;
    PoseSequence pred;
    pred.frames = model.predict(input, T);
    out.sequences.push_back(std::move(pred));
    save_expmap_csv(o.output, out);
    std::cout << "wrote " << T << " predicted frames to " << o.output << "\n";
    return 0;
}

// ---- eval ---------------------------------------------------------------------

struct EvalOpts {
    std::string checkpoint, data, skeleton, preset, out_csv, action;
    std::vector<std::string> metrics{"mae"};
    std::vector<double> horizons{80, 160, 320, 400};
    double fps = 25.0;
    int input_frames = 50, output_frames = 10, stride = 1;
    bool summed = false, include_root = false;
};

struct EvalRow {
    std::string predictor, metric;
    double horizon_ms = 0.0;
    double value = 0.0;
};

int do_eval(const EvalOpts& o) {
    std::unique_ptr<AhmrModel> model;
    SkeletonSpec skel;
    int t = o.input_frames, T = o.output_frames;
    if (!o.checkpoint.empty()) {
        model = std::make_unique<AhmrModel>(load_checkpoint(o.checkpoint));
        if (model->hyper().rep == Representation::Coords) {
            throw ConfigError(
                "eval: coordinate-representation checkpoints do not yield pose "
                "rotations; evaluate an expmap/quat/stiefel model instead");
        }
        skel = model->skeleton();
        t = model->hyper().input_frames;
        T = model->hyper().output_frames;
    } else {
        skel = resolve_skeleton(o.skeleton, o.preset, "eval");
    }

    for (const std::string& m : o.metrics) {
        if (m != "mae" && m != "mpe") {
            throw ConfigError("eval: unknown metric '" + m + "' (mae, mpe)");
        }
    }

    MotionDataset ds = load_expmap_csv(o.data, skel, o.fps);
    std::vector<Window> windows = make_windows(ds.sequences, t, T, o.stride);
    if (windows.empty()) {
        throw EmptyDataset("eval: no (" + std::to_string(t) + "+" + std::to_string(T) +
                           ")-frame windows in the dataset");
    }

    MaeProtocol protocol;
    protocol.summed = o.summed;
    protocol.include_root = o.include_root;

    // Mean metric per prediction frame, over all windows.
    std::map<std::string, std::vector<double>> per_frame;  // "predictor/metric"
    auto accumulate = [&](const std::string& key, const std::vector<double>& vals) {
        auto& acc = per_frame[key];
        if (acc.empty()) acc.assign(vals.size(), 0.0);
        for (size_t i = 0; i < vals.size(); ++i) acc[i] += vals[i];
    };

    for (const Window& w : windows) {
        PoseSequence target;
        target.frames = w.target;
        PoseSequence input;
        input.frames = w.input;

        PoseSequence zv = zero_velocity(input, T);
        for (const std::string& m : o.metrics) {
            accumulate("zero_velocity/" + m,
                       m == "mae" ? mae(skel, zv, target, protocol) : mpe(skel, zv, target));
        }
        if (model) {
            PoseSequence pred;
            pred.frames = model->predict(w.input, T);
            for (const std::string& m : o.metrics) {
                accumulate("model/" + m, m == "mae" ? mae(skel, pred, target, protocol)
                                                    : mpe(skel, pred, target));
            }
        }
    }
    for (auto& [key, acc] : per_frame) {
        for (double& v : acc) v /= double(windows.size());
    }

    std::vector<double> horizons;
    for (double ms : o.horizons) {
        const int frame = horizon_frame(ms, ds.frame_rate);
        if (frame < 1 || frame > T) {
            std::cerr << "note: horizon " << ms << " ms is frame " << frame << ", outside the "
                      << T << "-frame prediction; skipped\n";
            continue;
        }
        horizons.push_back(ms);
    }

    std::vector<EvalRow> rows;
    for (const auto& [key, acc] : per_frame) {
        const auto slash = key.find('/');
        for (double ms : horizons) {
            EvalRow row;
            row.predictor = key.substr(0, slash);
            row.metric = key.substr(slash + 1);
            row.horizon_ms = ms;
            row.value = acc[horizon_frame(ms, ds.frame_rate) - 1];
            rows.push_back(row);
        }
    }

    const std::string action = o.action.empty() ? fs::path(o.data).stem().string() : o.action;

    // Aligned table.
    std::cout << "action: " << action << " (" << windows.size() << " windows, " << t << "+" << T
              << " frames @ " << ds.frame_rate << " fps)\n";
    std::printf("%-14s %-6s %10s %12s\n", "predictor", "metric", "horizon_ms", "value");
    for (const EvalRow& r : rows) {
        std::printf("%-14s %-6s %10g %12.5f\n", r.predictor.c_str(), r.metric.c_str(),
                    r.horizon_ms, r.value);
    }

    if (!o.out_csv.empty()) {
        std::ofstream out(o.out_csv);
        if (!out) throw Error("cannot write '" + o.out_csv + "'");
        out << "action,predictor,metric,horizon_ms,value\n";
        for (const EvalRow& r : rows) {
            out << action << ',' << r.predictor << ',' << r.metric << ',' << num(r.horizon_ms)
                << ',' << num(r.value) << '\n';
        }
        std::cout << "wrote " << o.out_csv << "\n";
    }
    return 0;
}

// ---- convert ------------------------------------------------------------------

struct ConvertOpts {
    std::string input, output, from, to, skeleton, preset;
};

int do_convert(const ConvertOpts& o) {
    const Representation from = representation_from_string(o.from);
    const Representation to = representation_from_string(o.to);
    if (from == Representation::Coords) {
        throw ConfigError(
            "convert: raw coordinates cannot be converted to a rotational "
            "representation (underdetermined)");
    }

    SkeletonSpec skel;
    bool have_skel = !o.skeleton.empty() || !o.preset.empty();
    if (have_skel) skel = resolve_skeleton(o.skeleton, o.preset, "convert");
    if (to == Representation::Coords && !have_skel) {
        throw ConfigError("convert: --to coords requires --skeleton or --preset (offsets "
                          "are needed for forward kinematics)");
    }

    const int fw = full_block_width(from);
    std::vector<int> row_lines;
    std::vector<std::vector<double>> rows = load_numeric_csv(o.input, &row_lines);
    if (rows.empty()) throw EmptyDataset("'" + o.input + "' holds no frames");

    std::ofstream out(o.output);
    if (!out) throw Error("cannot write '" + o.output + "'");

    int last_line = 0;
    for (size_t r = 0; r < rows.size(); ++r) {
        const std::vector<double>& row = rows[r];
        if (static_cast<long>(row.size()) < 3 + fw ||
            (static_cast<long>(row.size()) - 3) % fw != 0) {
            throw DimensionMismatch("convert: line " + std::to_string(row_lines[r]) + " has " +
                                    std::to_string(row.size()) + " fields, not 3 + " +
                                    std::to_string(fw) + "·bones");
        }
        const int m = static_cast<int>((row.size() - 3) / fw);
        if (have_skel && m != skel.bone_count()) {
            throw TopologyMismatch("convert: line " + std::to_string(row_lines[r]) + " poses " +
                                   std::to_string(m) + " bones, skeleton has " +
                                   std::to_string(skel.bone_count()));
        }

        // Preserve (single) blank separators between sequences.
        if (r > 0 && row_lines[r] > last_line + 1) out << '\n';
        last_line = row_lines[r];

        std::vector<Rotation> rot(m);
        for (int k = 0; k < m; ++k) {
            const double* p = row.data() + 3 + fw * k;
            switch (from) {
                case Representation::AxisAngle:
                    rot[k] = matrix_from_axis_angle(AxisAngle(p[0], p[1], p[2]));
                    break;
                case Representation::Quaternion:
                    rot[k] = matrix_from_quat(Quaternion(p[0], p[1], p[2], p[3]));
                    break;
                case Representation::Stiefel: {
                    Eigen::Matrix<double, 6, 1> s;
                    for (int i = 0; i < 6; ++i) s[i] = p[i];
                    rot[k] = matrix_from_stiefel(StiefelRot(s));
                    break;
                }
                case Representation::Coords: break;  // rejected above
            }
        }

        std::vector<double> outrow(row.begin(), row.begin() + 3);
        if (to == Representation::Coords) {
            PoseFrame frame;
            frame.root_t.setZero();
            frame.rot = rot;
            for (const Eigen::Vector3d& j : forward_kinematics(skel, frame)) {
                outrow.push_back(j.x());
                outrow.push_back(j.y());
                outrow.push_back(j.z());
            }
        } else {
            for (int k = 0; k < m; ++k) {
                switch (to) {
                    case Representation::AxisAngle: {
                        AxisAngle aa = axis_angle_from_matrix(rot[k]);
                        for (int i = 0; i < 3; ++i) outrow.push_back(aa.w[i]);
                        break;
                    }
                    case Representation::Quaternion: {
                        Quaternion q = quat_from_matrix(rot[k]);
                        for (int i = 0; i < 4; ++i) outrow.push_back(q.q[i]);
                        break;
                    }
                    case Representation::Stiefel: {
                        StiefelRot s = stiefel_from_matrix(rot[k]);
                        for (int i = 0; i < 6; ++i) outrow.push_back(s.r[i]);
                        break;
                    }
                    case Representation::Coords: break;  // handled above
                }
            }
        }

        char buf[64];
        for (size_t i = 0; i < outrow.size(); ++i) {
            if (i) out << ',';
            int n = std::snprintf(buf, sizeof buf, "%.17g", outrow[i]);
            out.write(buf, n);
        }
        out << '\n';
    }
    std::cout << "converted " << rows.size() << " frames (" << o.from << " -> " << o.to
              << ") to " << o.output << "\n";
    return 0;
}

// ---- synth --------------------------------------------------------------------

struct SynthOpts {
    std::string out, skeleton_out;
    int bones = 4, frames = 500;
    double freq = 0.5, amplitude = 0.8, fps = 25.0;
    std::uint64_t seed = 1;
};

int do_synth(const SynthOpts& o) {
    MotionDataset ds = synth_pendulum(o.bones, o.frames, o.freq, o.amplitude, o.seed, o.fps);
    save_expmap_csv(o.out, ds);
    if (!o.skeleton_out.empty()) save_skeleton(ds.skeleton, o.skeleton_out);
    std::cout << "wrote " << o.frames << " frames of a " << o.bones << "-bone pendulum to "
              << o.out;
    if (!o.skeleton_out.empty()) std::cout << " (skeleton: " << o.skeleton_out << ")";
    std::cout << "\n";
    return 0;
}

void add_config(CLI::App* sub) {
    // Kept out of the echo: a config file naming another config file is meaningless.
    sub->add_option("--config")
        ->description("flat key=value file; flags override its entries")
        ->configurable(false);
    sub->option_defaults()->always_capture_default();  // echo true effective values
}

std::string strip_quotes(std::string s) {
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
        s = s.substr(1, s.size() - 2);
    }
    return s;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::pair<std::string, std::string>> read_flat_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string body = trim(line);
        if (body.empty() || body[0] == '#' || body[0] == ';') continue;
        auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw Error("config " + path + ": expected key=value on line " +
                        std::to_string(lineno));
        }
        std::string key = trim(body.substr(0, eq));
        std::string value = strip_quotes(trim(body.substr(eq + 1)));
        if (key.empty()) {
            throw Error("config " + path + ": empty key on line " + std::to_string(lineno));
        }
        entries.emplace_back(key, value);
    }
    return entries;
}

// CLI11 only reads a config file attached to the app parse() starts from, never one
// attached to a subcommand, so the file is expanded by hand: each key=value entry
// becomes a --key=value token inserted after the subcommand name, skipping keys the
// command line already sets.  Explicit flags therefore always win, required options
// can be satisfied from the file, and unknown keys fail the parse like any unknown
// flag would.
void expand_config_args(std::vector<std::string>& args) {
    if (args.size() < 2) return;
    for (const std::string& a : args) {
        if (a == "-h" || a == "--help") return;
    }
    std::string path;
    bool seen = false;
    for (size_t i = 1; i < args.size(); ++i) {
        std::string value;
        if (args[i] == "--config" && i + 1 < args.size()) {
            value = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            value = args[i].substr(9);
        } else {
            continue;
        }
        if (seen) throw Error("--config given more than once");
        seen = true;
        path = value;
    }
    if (!seen || path.empty()) return;

    std::vector<std::string> given;  // option names set explicitly on the command line
    for (size_t i = 1; i < args.size(); ++i) {
        if (args[i].rfind("--", 0) != 0) continue;
        given.push_back(args[i].substr(0, args[i].find('=')));
    }

    std::vector<std::string> injected;
    for (const auto& [key, value] : read_flat_config(path)) {
        if (key == "config") throw Error("config " + path + ": 'config' is not a valid key");
        std::string name = "--" + key;
        if (std::find(given.begin(), given.end(), name) != given.end()) continue;
        injected.push_back(name + "=" + value);
    }
    args.insert(args.begin() + 1, injected.begin(), injected.end());
}

}  // namespace

int run_cli(std::vector<std::string> args) {
    CLI::App app{"kinematic-chain motion prediction toolkit"};
    app.name("kinemotion");
    app.require_subcommand(1);

    TrainOpts t;
    CLI::App* train_cmd = app.add_subcommand("train", "train a model and write checkpoints");
    add_config(train_cmd);
    train_cmd->add_option("--data", t.data, "exponential-map CSV dataset");
    train_cmd->add_option("--skeleton", t.skeleton, "skeleton JSON for --data");
    train_cmd->add_option("--preset", t.preset, "skeleton preset (human36, fish, mouse)");
    train_cmd->add_option("--synthetic", t.synthetic, "generate data in-process ('pendulum')");
    train_cmd->add_option("--synth-bones", t.synth_bones)->check(CLI::PositiveNumber);
    train_cmd->add_option("--synth-frames", t.synth_frames)->check(CLI::PositiveNumber);
    train_cmd->add_option("--synth-freq", t.synth_freq);
    train_cmd->add_option("--synth-amplitude", t.synth_amplitude);
    train_cmd->add_option("--synth-seed", t.synth_seed);
    train_cmd->add_option("--rep", t.rep, "expmap, quat, stiefel, or coords");
    train_cmd->add_option("--loss", t.loss, "geodesic, l2, smooth_l1, or fk");
    train_cmd->add_option("--hidden", t.hidden)->check(CLI::PositiveNumber);
    train_cmd->add_option("--steps", t.steps, "recurrent refinement steps");
    train_cmd->add_option("--window", t.window, "context window (1, 3, 5, 7)");
    train_cmd->add_option("--input-frames", t.input_frames);
    train_cmd->add_option("--output-frames", t.output_frames);
    train_cmd->add_option("--iters", t.iters)->check(CLI::PositiveNumber);
    train_cmd->add_option("--batch", t.batch)->check(CLI::PositiveNumber);
    train_cmd->add_option("--lr", t.lr0, "initial learning rate");
    train_cmd->add_option("--decay", t.decay);
    train_cmd->add_option("--decay-every", t.decay_every);
    train_cmd->add_option("--clip", t.clip, "global-norm clip threshold");
    train_cmd->add_option("--seed", t.seed);
    train_cmd->add_option("--log-every", t.log_every);
    train_cmd->add_option("--stride", t.stride)->check(CLI::PositiveNumber);
    train_cmd->add_option("--threads", t.threads, "0 = KINEMOTION_THREADS or hardware");
    train_cmd->add_option("--fps", t.fps);
    train_cmd->add_option("--out", t.out_dir, "output directory");

    PredictOpts p;
    CLI::App* predict_cmd =
        app.add_subcommand("predict", "roll a checkpoint forward from an input CSV");
    add_config(predict_cmd);
    predict_cmd->add_option("--checkpoint", p.checkpoint)->required();
    predict_cmd->add_option("--input", p.input, "exponential-map CSV")->required();
    predict_cmd->add_option("--output", p.output, "output CSV path")->required();
    predict_cmd->add_option("--frames", p.frames, "prediction length (default: checkpoint's)")
        ->check(CLI::Range(1, 1 << 20));
    predict_cmd->add_option("--fps", p.fps);

    EvalOpts e;
    CLI::App* eval_cmd = app.add_subcommand("eval", "MAE/MPE at standard horizons");
    add_config(eval_cmd);
    eval_cmd->add_option("--data", e.data, "exponential-map CSV")->required();
    eval_cmd->add_option("--checkpoint", e.checkpoint, "optional model to compare");
    eval_cmd->add_option("--skeleton", e.skeleton, "skeleton JSON (when no checkpoint)");
    eval_cmd->add_option("--preset", e.preset, "skeleton preset (when no checkpoint)");
    eval_cmd->add_option("--metrics", e.metrics, "mae, mpe")->delimiter(',');
    eval_cmd->add_option("--horizons", e.horizons, "milliseconds")->delimiter(',');
    eval_cmd->add_option("--fps", e.fps);
    eval_cmd->add_option("--input-frames", e.input_frames, "t (when no checkpoint)");
    eval_cmd->add_option("--output-frames", e.output_frames, "T (when no checkpoint)");
    eval_cmd->add_option("--stride", e.stride)->check(CLI::PositiveNumber);
    eval_cmd->add_flag("--summed", e.summed, "norm the summed Euler deltas");
    eval_cmd->add_flag("--include-root", e.include_root, "include the root bone in MAE");
    eval_cmd->add_option("--out", e.out_csv, "also write rows as CSV");
    eval_cmd->add_option("--action", e.action, "label for the CSV rows");

    ConvertOpts c;
    CLI::App* convert_cmd =
        app.add_subcommand("convert", "re-encode a pose CSV between representations");
    add_config(convert_cmd);
    convert_cmd->add_option("--input", c.input)->required();
    convert_cmd->add_option("--output", c.output)->required();
    convert_cmd->add_option("--from", c.from, "expmap, quat, stiefel")->required();
    convert_cmd->add_option("--to", c.to, "expmap, quat, stiefel, coords")->required();
    convert_cmd->add_option("--skeleton", c.skeleton, "needed for --to coords");
    convert_cmd->add_option("--preset", c.preset);

    SynthOpts s;
    CLI::App* synth_cmd = app.add_subcommand("synth", "write a synthetic pendulum dataset");
    add_config(synth_cmd);
    synth_cmd->add_option("--out", s.out, "output CSV path")->required();
    synth_cmd->add_option("--skeleton-out", s.skeleton_out, "also write the skeleton JSON");
    synth_cmd->add_option("--bones", s.bones)->check(CLI::PositiveNumber);
    synth_cmd->add_option("--frames", s.frames)->check(CLI::PositiveNumber);
    synth_cmd->add_option("--freq", s.freq, "oscillation frequency, Hz");
    synth_cmd->add_option("--amplitude", s.amplitude, "radians");
    synth_cmd->add_option("--seed", s.seed);
    synth_cmd->add_option("--fps", s.fps);

    try {
        expand_config_args(args);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& err) {
        return app.exit(err);
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        echo_config(*sub);
        if (sub == train_cmd) return do_train(t);
        if (sub == predict_cmd) return do_predict(p);
        if (sub == eval_cmd) return do_eval(e);
        if (sub == convert_cmd) return do_convert(c);
        if (sub == synth_cmd) return do_synth(s);
        throw Error("unreachable subcommand");
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}

}  // namespace kinemotion
