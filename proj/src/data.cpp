#include "kinemotion/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "kinemotion/errors.hpp"
#include "kinemotion/rotation.hpp"

namespace kinemotion {

namespace {

bool is_blank(const std::string& s) {
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

double parse_field(const std::string& field, int line, int column) {
    const char* b = field.data();
    const char* e = b + field.size();
    while (b < e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(b, e, value);
    if (ec != std::errc() || ptr != e || b == e) {
        throw ParseError("not a number: '" + field + "'", line, column);
    }
    return value;
}

std::vector<double> parse_row(const std::string& text, int line) {
    std::vector<double> row;
    std::stringstream ss(text);
    std::string field;
    int column = 1;
    while (std::getline(ss, field, ',')) {
        row.push_back(parse_field(field, line, column));
        ++column;
    }
    return row;
}

void write_row(std::ofstream& out, const std::vector<double>& row) {
    char buf[64];
    for (size_t i = 0; i < row.size(); ++i) {
        if (i) out << ',';
        int n = std::snprintf(buf, sizeof buf, "%.17g", row[i]);
        out.write(buf, n);
    }
    out << '\n';
}

}  // namespace

std::vector<std::vector<double>> load_numeric_csv(const std::string& path,
                                                  std::vector<int>* row_lines) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string text;
    int line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (is_blank(text)) continue;
        rows.push_back(parse_row(text, line));
        if (row_lines) row_lines->push_back(line);
    }
    return rows;
}

MotionDataset load_expmap_csv(const std::string& path, const SkeletonSpec& skeleton,
                              double frame_rate) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    const int m = skeleton.bone_count();
    const size_t expect = 3 + 3 * static_cast<size_t>(m);

    MotionDataset ds;
    ds.skeleton = skeleton;
    ds.frame_rate = frame_rate;

    PoseSequence current;
    auto flush = [&] {
        if (!current.frames.empty()) {
            ds.sequences.push_back(std::move(current));
            current = PoseSequence{};
        }
    };

    std::string text;
    int line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (is_blank(text)) {
            flush();  // blank line = sequence separator
            continue;
        }
        std::vector<double> row = parse_row(text, line);
        if (row.size() != expect) {
            throw ParseError("expected " + std::to_string(expect) + " fields for " +
                                 std::to_string(m) + " bones, got " + std::to_string(row.size()),
                             line, static_cast<int>(row.size()) + 1);
        }
        PoseFrame frame;
        frame.root_t = Eigen::Vector3d(row[0], row[1], row[2]);
        frame.rot.reserve(m);
        for (int k = 0; k < m; ++k) {
            AxisAngle aa{Eigen::Vector3d(row[3 + 3 * k], row[4 + 3 * k], row[5 + 3 * k])};
            frame.rot.push_back(matrix_from_axis_angle(aa));
        }
        current.frames.push_back(std::move(frame));
    }
    flush();
    if (ds.sequences.empty()) throw EmptyDataset("'" + path + "' holds no frames");
    return ds;
}

void save_expmap_csv(const std::string& path, const MotionDataset& dataset) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    const int m = dataset.skeleton.bone_count();
    bool first = true;
    for (const PoseSequence& seq : dataset.sequences) {
        if (!first) out << '\n';  // sequence separator
        first = false;
        for (const PoseFrame& frame : seq.frames) {
            if (static_cast<int>(frame.rot.size()) != m) {
                throw TopologyMismatch("save_expmap_csv: frame does not match the skeleton");
            }
            std::vector<double> row;
            row.reserve(3 + 3 * m);
            for (int i = 0; i < 3; ++i) row.push_back(frame.root_t[i]);
            for (int k = 0; k < m; ++k) {
                AxisAngle aa = axis_angle_from_matrix(frame.rot[k]);
                for (int i = 0; i < 3; ++i) row.push_back(aa.w[i]);
            }
            write_row(out, row);
        }
    }
}

MotionDataset synth_pendulum(int bones, int frames, double freq, double amplitude,
                             std::uint64_t seed, double frame_rate) {
    if (bones < 1) throw ConfigError("synth_pendulum: bones must be >= 1");
    if (frames < 1) throw ConfigError("synth_pendulum: frames must be >= 1");
    if (frame_rate <= 0) throw ConfigError("synth_pendulum: frame_rate must be positive");

    SkeletonSpec skel;
    skel.name = "pendulum" + std::to_string(bones);
    for (int k = 0; k < bones; ++k) {
        Bone b;
        b.name = "link" + std::to_string(k);
        b.parent = k - 1;
        b.offset = Eigen::Vector3d(1.0, 0.0, 0.0);
        // The motion is yaw-only but all axes stay enabled: discovering the
        // restriction from data is extract_dof_mask's job, not the spec's.
        b.dof = {true, true, true};
        skel.bones.push_back(b);
    }
    skel.validate();

    // One phase per bone, fixed by the seed.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::vector<double> phi(bones);
    for (int k = 0; k < bones; ++k) phi[k] = phase(rng);

    MotionDataset ds;
    ds.skeleton = skel;
    ds.frame_rate = frame_rate;
    PoseSequence seq;
    seq.frames.reserve(frames);
    for (int j = 0; j < frames; ++j) {
        PoseFrame frame;
        frame.root_t.setZero();
        frame.rot.reserve(bones);
        for (int k = 0; k < bones; ++k) {
            double angle =
                amplitude * std::sin(2.0 * std::numbers::pi * freq * j / frame_rate + phi[k]);
            frame.rot.push_back(Rotation::rot_z(angle));
        }
        seq.frames.push_back(std::move(frame));
    }
    ds.sequences.push_back(std::move(seq));
    return ds;
}

// ---- Metrics ---------------------------------------------------------------

double wrap_angle(double x) {
    double w = std::fmod(x + std::numbers::pi, 2.0 * std::numbers::pi);
    if (w <= 0.0) w += 2.0 * std::numbers::pi;
    return w - std::numbers::pi;
}

int horizon_frame(double ms, double fps) {
    return static_cast<int>(std::lround(ms * fps / 1000.0));
}

namespace {

void check_pair(const SkeletonSpec& skeleton, const PoseSequence& pred,
                const PoseSequence& target) {
    if (pred.frames.size() != target.frames.size()) {
        throw ShapeMismatch("metric: sequences have different lengths");
    }
    const size_t m = static_cast<size_t>(skeleton.bone_count());
    for (const PoseSequence* seq : {&pred, &target}) {
        for (const PoseFrame& f : seq->frames) {
            if (f.rot.size() != m) {
                throw ShapeMismatch("metric: frame does not match the skeleton");
            }
        }
    }
}

}  // namespace

std::vector<double> mae(const SkeletonSpec& skeleton, const PoseSequence& pred,
                        const PoseSequence& target, const MaeProtocol& protocol) {
    check_pair(skeleton, pred, target);
    const int m = skeleton.bone_count();
    const int first = protocol.include_root ? 0 : 1;
    if (first >= m) throw ShapeMismatch("mae: no bones left after root exclusion");

    std::vector<double> out;
    out.reserve(pred.frames.size());
    for (size_t j = 0; j < pred.frames.size(); ++j) {
        double acc = 0.0;
        for (int k = first; k < m; ++k) {
            EulerAngles ep = euler_from_matrix(pred.frames[j].rot[k]);
            EulerAngles et = euler_from_matrix(target.frames[j].rot[k]);
            double dy = wrap_angle(ep.yaw - et.yaw);
            double dp = wrap_angle(ep.pitch - et.pitch);
            double dr = wrap_angle(ep.roll - et.roll);
            acc += protocol.summed ? std::abs(dy + dp + dr)
                                   : std::sqrt(dy * dy + dp * dp + dr * dr);
        }
        out.push_back(acc / double(m - first));
    }
    return out;
}

std::vector<double> mpe(const SkeletonSpec& skeleton, const PoseSequence& pred,
                        const PoseSequence& target) {
    check_pair(skeleton, pred, target);
    const int m = skeleton.bone_count();
    std::vector<double> out;
    out.reserve(pred.frames.size());
    for (size_t j = 0; j < pred.frames.size(); ++j) {
        PoseFrame p = pred.frames[j];
        PoseFrame t = target.frames[j];
        p.root_t.setZero();  // translation aligned; rotation retained
        t.root_t.setZero();
        std::vector<Eigen::Vector3d> jp = forward_kinematics(skeleton, p);
        std::vector<Eigen::Vector3d> jt = forward_kinematics(skeleton, t);
        double acc = 0.0;
        for (int k = 0; k < m; ++k) acc += (jp[k] - jt[k]).norm();
        out.push_back(acc / double(m));
    }
    return out;
}

PoseSequence zero_velocity(const PoseSequence& input, int T) {
    if (input.frames.empty()) throw EmptyDataset("zero_velocity: empty input");
    if (T < 1) throw ConfigError("zero_velocity: T must be >= 1");
    PoseSequence out;
    out.frames.assign(static_cast<size_t>(T), input.frames.back());
    return out;
}

}  // namespace kinemotion
