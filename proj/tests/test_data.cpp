#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "kinemotion/data.hpp"

using namespace kinemotion;

namespace {

constexpr double kPi = std::numbers::pi;

SkeletonSpec chain(int bones) {
    SkeletonSpec s;
    s.name = "chain";
    for (int k = 0; k < bones; ++k) {
        Bone b;
        b.name = "link" + std::to_string(k);
        b.parent = k - 1;
        b.offset = Eigen::Vector3d(1, 0, 0);
        s.bones.push_back(b);
    }
    return s;
}

// Writes `text` to a fresh temp file and returns its path.
std::string temp_csv(const std::string& name, const std::string& text) {
    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / name;
    std::ofstream out(path);
    out << text;
    return path.string();
}

Rotation random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Vector4d q(n(rng), n(rng), n(rng), n(rng));
    q.normalize();
    return matrix_from_quat(Quaternion(q));
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("expmap csv: worked parses") {
    SkeletonSpec s = chain(2);

    // All zeros: identity pose at the origin.
    std::string p1 = temp_csv("kinemotion_zeros.csv", "0,0,0,0,0,0,0,0,0\n");
    MotionDataset ds = load_expmap_csv(p1, s);
    REQUIRE(ds.sequences.size() == 1);
    REQUIRE(ds.sequences[0].size() == 1);
    const PoseFrame& f0 = ds.sequences[0].frames[0];
    CHECK(f0.root_t.norm() == 0.0);
    CHECK((f0.rot[0].m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((f0.rot[1].m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() == 0.0);

    // Second bone's exponential map (1.5708, 0, 0): a rotation about x.
    std::string p2 = temp_csv("kinemotion_rotx.csv", "0,0,0, 0,0,0, 1.5708,0,0\n");
    ds = load_expmap_csv(p2, s);
    const PoseFrame& f1 = ds.sequences[0].frames[0];
    CHECK((f1.rot[0].m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((f1.rot[1].m - Rotation::rot_x(1.5708).m).cwiseAbs().maxCoeff() < 1e-12);
    // Translation fields come first.
    std::string p3 = temp_csv("kinemotion_trans.csv", "1,2,3,0,0,0,0,0,0\n");
    ds = load_expmap_csv(p3, s);
    CHECK((ds.sequences[0].frames[0].root_t - Eigen::Vector3d(1, 2, 3)).norm() == 0.0);

    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
    std::filesystem::remove(p3);
}

TEST_CASE("expmap csv: error reporting") {
    SkeletonSpec s = chain(2);

    // Short line: the error names the offending line.
    std::string p1 = temp_csv("kinemotion_short.csv",
                              "0,0,0,0,0,0,0,0,0\n0,0,0,0,0,0\n");
    try {
        (void)load_expmap_csv(p1, s);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }

    // Non-numeric field: line and field index are both reported.
    std::string p2 = temp_csv("kinemotion_nan.csv", "0,0,0,0,zero,0,0,0,0\n");
    try {
        (void)load_expmap_csv(p2, s);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 1);
        CHECK(e.column == 5);
    }

    std::string p3 = temp_csv("kinemotion_blank.csv", "\n\n\n");
    CHECK_THROWS_AS((void)load_expmap_csv(p3, s), EmptyDataset);
    CHECK_THROWS_AS((void)load_expmap_csv("/nonexistent/poses.csv", s), Error);

    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
    std::filesystem::remove(p3);
}

TEST_CASE("expmap csv: blank lines split sequences") {
    SkeletonSpec s = chain(1);
    std::string text =
        "0,0,0,0,0,0.1\n"
        "0,0,0,0,0,0.2\n"
        "\n"
        "0,0,0,0,0,0.3\n"
        "\n"
        "\n";
    std::string p = temp_csv("kinemotion_seqs.csv", text);
    MotionDataset ds = load_expmap_csv(p, s);
    REQUIRE(ds.sequences.size() == 2);
    CHECK(ds.sequences[0].size() == 2);
    CHECK(ds.sequences[1].size() == 1);
    std::filesystem::remove(p);
}

TEST_CASE("expmap csv: save/load round trip") {
    SkeletonSpec s = chain(3);
    std::mt19937_64 rng(601);
    MotionDataset ds;
    ds.skeleton = s;
    ds.frame_rate = 50.0;
    for (int seq = 0; seq < 2; ++seq) {
        PoseSequence ps;
        for (int j = 0; j < 4; ++j) {
            PoseFrame f;
            std::normal_distribution<double> n(0.0, 1.0);
            f.root_t = Eigen::Vector3d(n(rng), n(rng), n(rng));
            for (int k = 0; k < 3; ++k) f.rot.push_back(random_rotation(rng));
            ps.frames.push_back(f);
        }
        ds.sequences.push_back(ps);
    }

    namespace fs = std::filesystem;
    std::string p = (fs::temp_directory_path() / "kinemotion_roundtrip.csv").string();
    save_expmap_csv(p, ds);
    MotionDataset back = load_expmap_csv(p, s, 50.0);
    REQUIRE(back.sequences.size() == 2);
    for (size_t q = 0; q < 2; ++q) {
        REQUIRE(back.sequences[q].size() == ds.sequences[q].size());
        for (int j = 0; j < ds.sequences[q].size(); ++j) {
            const PoseFrame& a = ds.sequences[q].frames[size_t(j)];
            const PoseFrame& b = back.sequences[q].frames[size_t(j)];
            CHECK((a.root_t - b.root_t).norm() < 1e-15);
            for (int k = 0; k < 3; ++k) {
                // Matrix comparison: the geodesic metric cannot resolve
                // distances below the ~3e-8 arccos floor.
                CHECK((a.rot[size_t(k)].m - b.rot[size_t(k)].m).cwiseAbs().maxCoeff() < 1e-8);
            }
        }
    }
    fs::remove(p);

    // A frame that disagrees with the skeleton is refused on save.
    ds.sequences[0].frames[0].rot.pop_back();
    CHECK_THROWS_AS(save_expmap_csv(p, ds), TopologyMismatch);
}

TEST_CASE("load_numeric_csv records source lines") {
    std::string p = temp_csv("kinemotion_numeric.csv", "1,2\n\n3,4\n 5 , 6 \n");
    std::vector<int> lines;
    auto rows = load_numeric_csv(p, &lines);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<double>{1, 2});
    CHECK(rows[1] == std::vector<double>{3, 4});
    CHECK(rows[2] == std::vector<double>{5, 6});  // fields are trimmed
    CHECK(lines == std::vector<int>{1, 3, 4});    // the blank line is dropped
    std::filesystem::remove(p);
}

TEST_CASE("synthetic pendulum") {
    MotionDataset ds = synth_pendulum(3, 50, 0.5, 0.8, 99);
    CHECK(ds.skeleton.name == "pendulum3");
    CHECK(ds.skeleton.bone_count() == 3);
    CHECK(ds.frame_rate == 25.0);
    REQUIRE(ds.sequences.size() == 1);
    REQUIRE(ds.sequences[0].size() == 50);

    // Every bone is a pure yaw rotation with |angle| ≤ amplitude, and the
    // angle sequence satisfies the exact sinusoid recurrence
    //   θ_{j+1} + θ_{j−1} = 2·cos(2πf/rate)·θ_j,
    // which pins the closed form A·sin(2πf·j/rate + φ) without knowing φ.
    const double c = 2.0 * std::cos(2.0 * kPi * 0.5 / 25.0);
    for (int k = 0; k < 3; ++k) {
        std::vector<double> theta;
        for (int j = 0; j < 50; ++j) {
            EulerAngles e = euler_from_matrix(ds.sequences[0].frames[size_t(j)].rot[size_t(k)]);
            CHECK(std::abs(e.pitch) < 1e-15);
            CHECK(std::abs(e.roll) < 1e-15);
            CHECK(std::abs(e.yaw) <= 0.8 + 1e-12);
            theta.push_back(e.yaw);
        }
        for (int j = 1; j + 1 < 50; ++j) {
            CHECK(theta[size_t(j + 1)] + theta[size_t(j - 1)] ==
                  doctest::Approx(c * theta[size_t(j)]).epsilon(1e-9));
        }
    }

    // Deterministic in the seed; distinct seeds give distinct phases.
    MotionDataset same = synth_pendulum(3, 50, 0.5, 0.8, 99);
    MotionDataset other = synth_pendulum(3, 50, 0.5, 0.8, 100);
    double max_same = 0.0, max_other = 0.0;
    for (int j = 0; j < 50; ++j) {
        for (int k = 0; k < 3; ++k) {
            max_same = std::max(max_same,
                                geodesic_distance(ds.sequences[0].frames[size_t(j)].rot[size_t(k)],
                                                  same.sequences[0].frames[size_t(j)].rot[size_t(k)]));
            max_other =
                std::max(max_other,
                         geodesic_distance(ds.sequences[0].frames[size_t(j)].rot[size_t(k)],
                                           other.sequences[0].frames[size_t(j)].rot[size_t(k)]));
        }
    }
    CHECK(max_same == 0.0);
    CHECK(max_other > 1e-3);

    // Amplitude 0: constant identity poses.
    MotionDataset still = synth_pendulum(2, 10, 0.5, 0.0, 1);
    for (const PoseFrame& f : still.sequences[0].frames) {
        for (const Rotation& r : f.rot) {
            CHECK((r.m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() == 0.0);
        }
    }

    CHECK_THROWS_AS((void)synth_pendulum(0, 10, 0.5, 0.8, 1), ConfigError);
    CHECK_THROWS_AS((void)synth_pendulum(2, 0, 0.5, 0.8, 1), ConfigError);
}

TEST_CASE("wrap_angle maps into (-pi, pi]") {
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(0.3) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(wrap_angle(-0.3) == doctest::Approx(-0.3).epsilon(1e-15));
    CHECK(wrap_angle(kPi) == doctest::Approx(kPi).epsilon(1e-15));
    CHECK(wrap_angle(-kPi) == doctest::Approx(kPi).epsilon(1e-15));  // −π is excluded
    CHECK(wrap_angle(2 * kPi) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2).epsilon(1e-12));
    CHECK(wrap_angle(7.0) == doctest::Approx(7.0 - 2 * kPi).epsilon(1e-12));
    CHECK(wrap_angle(-7.0) == doctest::Approx(2 * kPi - 7.0).epsilon(1e-12));
    std::mt19937_64 rng(602);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
        double x = u(rng);
        double w = wrap_angle(x);
        CHECK(w > -kPi);
        CHECK(w <= kPi);
        // Same angle modulo 2π.
        CHECK(std::abs(std::remainder(x - w, 2 * kPi)) < 1e-9);
    }
}

TEST_CASE("horizon_frame arithmetic for 25 and 50 fps") {
    CHECK(horizon_frame(80, 25) == 2);
    CHECK(horizon_frame(160, 25) == 4);
    CHECK(horizon_frame(320, 25) == 8);
    CHECK(horizon_frame(400, 25) == 10);
    CHECK(horizon_frame(1000, 25) == 25);
    CHECK(horizon_frame(80, 50) == 4);
    CHECK(horizon_frame(160, 50) == 8);
    CHECK(horizon_frame(320, 50) == 16);
    CHECK(horizon_frame(400, 50) == 20);
    CHECK(horizon_frame(1000, 50) == 50);
    CHECK(horizon_frame(30, 25) == 1);  // nearest frame, 1-based
}

TEST_CASE("mae: worked example, protocols, and root exclusion") {
    SkeletonSpec s = chain(2);
    PoseSequence target, pred;
    PoseFrame tf, pf;
    tf.rot = {Rotation::identity(), Rotation::identity()};
    pf.rot = {Rotation::identity(), matrix_from_euler(EulerAngles(0.3, 0.4, 0.0))};
    target.frames.push_back(tf);
    pred.frames.push_back(pf);

    // Single non-root bone with Euler deltas (0.3, 0.4, 0) → ‖·‖ = 0.5.
    auto errs = mae(s, pred, target);
    REQUIRE(errs.size() == 1);
    CHECK(errs[0] == doctest::Approx(0.5).epsilon(1e-12));

    // The summed protocol collapses the same deltas to |0.3+0.4+0| = 0.7.
    MaeProtocol summed;
    summed.summed = true;
    CHECK(mae(s, pred, target, summed)[0] == doctest::Approx(0.7).epsilon(1e-12));
    // ...and sign-opposed deltas cancel entirely under it.
    PoseSequence opp = pred;
    opp.frames[0].rot[1] = matrix_from_euler(EulerAngles(0.3, -0.3, 0.0));
    CHECK(mae(s, opp, target, summed)[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    // Root rotations are excluded *exactly*: spinning the root changes nothing.
    PoseSequence spun = pred;
    spun.frames[0].rot[0] = Rotation::rot_y(1.2);
    auto spun_errs = mae(s, spun, target);
    CHECK(spun_errs[0] == errs[0]);

    // include_root flips that convention.
    MaeProtocol with_root;
    with_root.include_root = true;
    CHECK(mae(s, spun, target, with_root)[0] > mae(s, pred, target, with_root)[0]);

    // Angle deltas wrap: yaws π−0.1 vs −π+0.1 differ by 0.2, not 2π−0.2.
    PoseSequence wa, wb;
    PoseFrame fa, fb;
    fa.rot = {Rotation::identity(), Rotation::rot_z(kPi - 0.1)};
    fb.rot = {Rotation::identity(), Rotation::rot_z(-kPi + 0.1)};
    wa.frames.push_back(fa);
    wb.frames.push_back(fb);
    CHECK(mae(s, wa, wb)[0] == doctest::Approx(0.2).epsilon(1e-9));

    // Identical sequences cost zero; the metric is symmetric and per-frame.
    CHECK(mae(s, target, target)[0] == 0.0);
    PoseSequence two = pred;
    two.frames.push_back(pf);
    PoseSequence two_t = target;
    two_t.frames.push_back(tf);
    auto v = mae(s, two, two_t);
    REQUIRE(v.size() == 2);
    CHECK(v[0] == doctest::Approx(v[1]).epsilon(1e-15));
    auto fwd = mae(s, pred, target);
    auto rev = mae(s, target, pred);
    CHECK(fwd[0] == doctest::Approx(rev[0]).epsilon(1e-12));

    // Shape errors.
    CHECK_THROWS_AS((void)mae(s, two, target), ShapeMismatch);
    PoseSequence wrong = target;
    wrong.frames[0].rot.pop_back();
    CHECK_THROWS_AS((void)mae(s, wrong, target), ShapeMismatch);
}

TEST_CASE("mpe: worked example and translation alignment") {
    SkeletonSpec s = chain(2);
    PoseSequence target, pred;
    PoseFrame tf, pf;
    tf.rot = {Rotation::identity(), Rotation::identity()};
    pf.rot = {Rotation::identity(), Rotation::rot_z(kPi / 2)};
    target.frames.push_back(tf);
    pred.frames.push_back(pf);

    // Joints: pred (1,0,0),(1,1,0) vs target (1,0,0),(2,0,0) → (0+√2)/2.
    auto errs = mpe(s, pred, target);
    REQUIRE(errs.size() == 1);
    CHECK(errs[0] == doctest::Approx(0.7071067811865476).epsilon(1e-12));

    // Differing global translations are aligned away exactly.
    PoseSequence shifted = target;
    shifted.frames[0].root_t = Eigen::Vector3d(100, -3, 7);
    CHECK(mpe(s, shifted, target)[0] == 0.0);
    // ...but the root *rotation* is retained.
    PoseSequence rolled = target;
    rolled.frames[0].rot[0] = Rotation::rot_z(kPi / 2);
    CHECK(mpe(s, rolled, target)[0] > 0.5);

    CHECK(mpe(s, target, target)[0] == 0.0);
    CHECK(mpe(s, pred, target)[0] == doctest::Approx(mpe(s, target, pred)[0]).epsilon(1e-15));

    PoseSequence wrong = target;
    wrong.frames[0].rot.pop_back();
    CHECK_THROWS_AS((void)mpe(s, wrong, target), ShapeMismatch);
}

TEST_CASE("zero_velocity repeats the last frame") {
    SkeletonSpec s = chain(2);
    PoseSequence input;
    for (int j = 0; j < 5; ++j) {
        PoseFrame f;
        f.rot = {Rotation::rot_z(0.1 * j), Rotation::rot_y(0.05 * j)};
        f.root_t = Eigen::Vector3d(j, 0, 0);
        input.frames.push_back(f);
    }

    PoseSequence zv = zero_velocity(input, 4);
    REQUIRE(zv.size() == 4);
    for (const PoseFrame& f : zv.frames) {
        CHECK((f.root_t - input.frames.back().root_t).norm() == 0.0);
        for (int k = 0; k < 2; ++k) {
            CHECK((f.rot[size_t(k)].m - input.frames.back().rot[size_t(k)].m)
                      .cwiseAbs()
                      .maxCoeff() == 0.0);
        }
    }

    // On a constant sequence the baseline is perfect.
    PoseSequence constant;
    constant.frames.assign(6, input.frames.back());
    PoseSequence pred = zero_velocity(constant, 3);
    PoseSequence tail;
    tail.frames.assign(constant.frames.begin(), constant.frames.begin() + 3);
    for (double e : mae(s, pred, tail)) CHECK(e == 0.0);

    CHECK_THROWS_AS((void)zero_velocity(PoseSequence{}, 3), EmptyDataset);
    CHECK_THROWS_AS((void)zero_velocity(input, 0), ConfigError);
}

}  // TEST_SUITE
