#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kinemotion/losses.hpp"

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

Rotation random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Vector4d q(n(rng), n(rng), n(rng), n(rng));
    q.normalize();
    return matrix_from_quat(Quaternion(q));
}

PoseFrame random_frame(const SkeletonSpec& s, std::mt19937_64& rng) {
    PoseFrame f;
    f.rot.reserve(s.bones.size());
    for (int k = 0; k < s.bone_count(); ++k) f.rot.push_back(random_rotation(rng));
    return f;
}

// Central finite differences of the packed loss value at `pred`, compared
// against the analytic gradient, as a max relative error over frames.
double fd_relative_error(LossKind kind, const Packing& packing,
                         const std::vector<Eigen::VectorXd>& pred,
                         const std::vector<PoseFrame>& target) {
    const double h = 1e-5;
    LossResult analytic = eval_loss(kind, packing, pred, target, true);
    double worst = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        Eigen::VectorXd fd = Eigen::VectorXd::Zero(pred[i].size());
        std::vector<Eigen::VectorXd> probe = pred;
        for (int d = 0; d < pred[i].size(); ++d) {
            probe[i][d] = pred[i][d] + h;
            double up = eval_loss(kind, packing, probe, target, false).loss.value;
            probe[i][d] = pred[i][d] - h;
            double dn = eval_loss(kind, packing, probe, target, false).loss.value;
            probe[i][d] = pred[i][d];
            fd[d] = (up - dn) / (2 * h);
        }
        double denom = std::max(fd.norm(), 1e-8);
        worst = std::max(worst, (analytic.grad[i] - fd).norm() / denom);
    }
    return worst;
}

}  // namespace

TEST_SUITE("losses") {

TEST_CASE("worked examples") {
    // One bone, quarter turn: squared geodesic distance (π/2)².
    LossValue g = geodesic_loss({Rotation::identity()}, {Rotation::rot_x(kPi / 2)});
    CHECK(g.value == doctest::Approx(2.4674011002723395).epsilon(1e-12));
    REQUIRE(g.terms.size() == 1);

    // Two unit-x bones, elbow bent 90° vs straight: ‖(1,1,0)−(2,0,0)‖² = 2.
    SkeletonSpec s = chain(2);
    PoseFrame pred, target;
    pred.rot = {Rotation::identity(), Rotation::rot_z(kPi / 2)};
    target.rot = {Rotation::identity(), Rotation::identity()};
    LossValue f = fk_loss(s, pred, target);
    CHECK(f.value == doctest::Approx(2.0).epsilon(1e-12));

    // Element-mean scalar cases.
    Eigen::VectorXd a(1), b(1);
    a << 0.5, b << 0.0;
    CHECK(l2_loss(a, b).value == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(smooth_l1_loss(a, b).value == doctest::Approx(0.125).epsilon(1e-15));
    a << 2.0;
    CHECK(smooth_l1_loss(a, b).value == doctest::Approx(1.5).epsilon(1e-15));

    // Identical inputs cost nothing.
    CHECK(geodesic_loss({Rotation::rot_y(0.4)}, {Rotation::rot_y(0.4)}).value == 0.0);
    CHECK(fk_loss(s, pred, pred).value == 0.0);
    CHECK(l2_loss(a, a).value == 0.0);
    CHECK(smooth_l1_loss(a, a).value == 0.0);
}

TEST_CASE("scalar is the mean of the terms") {
    std::mt19937_64 rng(301);
    SkeletonSpec s = chain(3);
    std::vector<Rotation> pred, target;
    for (int k = 0; k < 3; ++k) {
        pred.push_back(random_rotation(rng));
        target.push_back(random_rotation(rng));
    }
    LossValue lv = geodesic_loss(pred, target);
    REQUIRE(lv.terms.size() == 3);
    double mean = (lv.terms[0] + lv.terms[1] + lv.terms[2]) / 3.0;
    CHECK(lv.value == doctest::Approx(mean).epsilon(1e-15));
    for (double t : lv.terms) CHECK(t >= 0.0);

    Eigen::VectorXd a = Eigen::VectorXd::Random(7), b = Eigen::VectorXd::Random(7);
    LossValue l2 = l2_loss(a, b);
    REQUIRE(l2.terms.size() == 7);
    double sum = 0.0;
    for (double t : l2.terms) sum += t;
    CHECK(l2.value == doctest::Approx(sum / 7.0).epsilon(1e-12));
}

TEST_CASE("smooth-l1 branches join continuously") {
    CHECK(smooth_l1(1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(smooth_l1(-1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(smooth_l1(1.0 + 1e-12) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(smooth_l1_grad(0.3) == doctest::Approx(0.3));
    CHECK(smooth_l1_grad(5.0) == 1.0);
    CHECK(smooth_l1_grad(-5.0) == -1.0);
}

TEST_CASE("shape and topology errors") {
    SkeletonSpec s = chain(2);
    CHECK_THROWS_AS((void)geodesic_loss({Rotation::identity()}, {}), ShapeMismatch);

    PoseFrame two, three;
    two.rot.assign(2, Rotation::identity());
    three.rot.assign(3, Rotation::identity());
    CHECK_THROWS_AS((void)fk_loss(s, two, three), ShapeMismatch);
    CHECK_THROWS_AS((void)fk_loss(s, three, three), TopologyMismatch);

    Eigen::VectorXd a(3), b(4);
    a.setZero();
    b.setZero();
    CHECK_THROWS_AS((void)l2_loss(a, b), ShapeMismatch);
    CHECK_THROWS_AS((void)smooth_l1_loss(a, b), ShapeMismatch);

    Packing packing(s, Representation::AxisAngle);
    std::vector<Eigen::VectorXd> pred = {Eigen::VectorXd::Zero(packing.dim())};
    CHECK_THROWS_AS((void)eval_loss(LossKind::L2, packing, pred, {two, two}), ShapeMismatch);
    CHECK_THROWS_AS((void)eval_loss(LossKind::L2, packing, {}, {}), ShapeMismatch);
    std::vector<Eigen::VectorXd> narrow = {Eigen::VectorXd::Zero(packing.dim() - 1)};
    CHECK_THROWS_AS((void)eval_loss(LossKind::L2, packing, narrow, {two}), ShapeMismatch);
    CHECK_THROWS_AS((void)eval_loss(LossKind::Geodesic, packing, pred, {three}), ShapeMismatch);

    // Geodesic and FK need recoverable rotations, so coords is rejected.
    Packing coords(s, Representation::Coords);
    CHECK(!loss_compatible(LossKind::Geodesic, Representation::Coords));
    CHECK(!loss_compatible(LossKind::Fk, Representation::Coords));
    CHECK(loss_compatible(LossKind::L2, Representation::Coords));
    CHECK(loss_compatible(LossKind::SmoothL1, Representation::Coords));
    std::vector<Eigen::VectorXd> cpred = {Eigen::VectorXd::Zero(coords.dim())};
    CHECK_THROWS_AS((void)eval_loss(LossKind::Geodesic, coords, cpred, {two}), ConfigError);
    CHECK_THROWS_AS((void)eval_loss(LossKind::Fk, coords, cpred, {two}), ConfigError);
}

TEST_CASE("geodesic loss is invariant under a common left rotation") {
    std::mt19937_64 rng(302);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Rotation> pred, target, lpred, ltarget;
        Rotation q = random_rotation(rng);
        for (int k = 0; k < 4; ++k) {
            pred.push_back(random_rotation(rng));
            target.push_back(random_rotation(rng));
            lpred.push_back(q * pred.back());
            ltarget.push_back(q * target.back());
        }
        CHECK(std::abs(geodesic_loss(pred, target).value -
                       geodesic_loss(lpred, ltarget).value) < 1e-8);
    }
}

TEST_CASE("fk loss ignores a common root translation") {
    SkeletonSpec s = chain(3);
    std::mt19937_64 rng(303);
    for (int trial = 0; trial < 20; ++trial) {
        PoseFrame pred = random_frame(s, rng);
        PoseFrame target = random_frame(s, rng);
        double base = fk_loss(s, pred, target).value;
        Eigen::Vector3d t(1.5, -0.25, 9.0);
        pred.root_t = t;
        target.root_t = t;
        CHECK(fk_loss(s, pred, target).value == doctest::Approx(base).epsilon(1e-12));
        CHECK(base >= 0.0);
    }
}

TEST_CASE("fk loss weights bones near the root more heavily") {
    SkeletonSpec s = chain(5);
    std::mt19937_64 rng(304);
    std::normal_distribution<double> n(0.0, 1.0);
    int root_wins = 0;
    for (int trial = 0; trial < 100; ++trial) {
        PoseFrame base = random_frame(s, rng);
        Eigen::Vector3d axis(n(rng), n(rng), n(rng));
        Rotation delta = matrix_from_axis_angle(AxisAngle(0.05 * axis.normalized()));

        PoseFrame root_pert = base;
        root_pert.rot[0] = delta * base.rot[0];
        PoseFrame tip_pert = base;
        tip_pert.rot[4] = delta * base.rot[4];

        if (fk_loss(s, root_pert, base).value > fk_loss(s, tip_pert, base).value) ++root_wins;
    }
    // The same perturbation displaces every downstream joint when applied at
    // the root but only one joint at the tip.
    CHECK(root_wins == 100);
}

TEST_CASE("zero iff equal within tolerance") {
    std::mt19937_64 rng(305);
    SkeletonSpec s = chain(2);
    for (int trial = 0; trial < 20; ++trial) {
        PoseFrame f = random_frame(s, rng);
        // arccos resolves tiny angles only to ~√ε, so the squared geodesic
        // self-distance bottoms out near ε rather than at exactly zero.
        CHECK(geodesic_loss(f.rot, f.rot).value < 1e-14);
        CHECK(fk_loss(s, f, f).value < 1e-18);
        // A visible perturbation must cost something.
        PoseFrame g = f;
        g.rot[1] = Rotation::rot_y(1e-3) * g.rot[1];
        CHECK(geodesic_loss(g.rot, f.rot).value > 1e-9);
        CHECK(fk_loss(s, g, f).value > 1e-9);
    }
}

TEST_CASE("analytic gradients match finite differences: geodesic") {
    // 100 random instances across the three recoverable representations,
    // gradient flowing through the representation adjoints.
    SkeletonSpec s = chain(2);
    std::mt19937_64 rng(306);
    std::normal_distribution<double> noise(0.0, 0.1);
    Representation reps[] = {Representation::AxisAngle, Representation::Quaternion,
                             Representation::Stiefel};
    for (int trial = 0; trial < 100; ++trial) {
        Packing packing(s, reps[trial % 3]);
        std::vector<PoseFrame> target = {random_frame(s, rng)};
        Eigen::VectorXd p = packing.pack(random_frame(s, rng));
        for (int d = 0; d < p.size(); ++d) p[d] += noise(rng);
        CHECK(fd_relative_error(LossKind::Geodesic, packing, {p}, target) < 1e-4);
    }
}

TEST_CASE("analytic gradients match finite differences: fk") {
    SkeletonSpec s = chain(3);
    std::mt19937_64 rng(307);
    std::normal_distribution<double> noise(0.0, 0.1);
    Representation reps[] = {Representation::AxisAngle, Representation::Quaternion,
                             Representation::Stiefel};
    for (int trial = 0; trial < 30; ++trial) {
        Packing packing(s, reps[trial % 3]);
        std::vector<PoseFrame> target = {random_frame(s, rng)};
        Eigen::VectorXd p = packing.pack(random_frame(s, rng));
        for (int d = 0; d < p.size(); ++d) p[d] += noise(rng);
        CHECK(fd_relative_error(LossKind::Fk, packing, {p}, target) < 1e-4);
    }
}

TEST_CASE("analytic gradients match finite differences: element losses") {
    SkeletonSpec s = chain(2);
    std::mt19937_64 rng(308);
    std::normal_distribution<double> noise(0.0, 0.7);
    Representation reps[] = {Representation::AxisAngle, Representation::Quaternion,
                             Representation::Stiefel, Representation::Coords};
    for (int trial = 0; trial < 20; ++trial) {
        Packing packing(s, reps[trial % 4]);
        std::vector<PoseFrame> target = {random_frame(s, rng), random_frame(s, rng)};
        std::vector<Eigen::VectorXd> pred;
        for (int i = 0; i < 2; ++i) {
            Eigen::VectorXd p = packing.pack(target[size_t(i)]);
            for (int d = 0; d < p.size(); ++d) p[d] += noise(rng);
            pred.push_back(p);
        }
        CHECK(fd_relative_error(LossKind::L2, packing, pred, target) < 1e-4);
        CHECK(fd_relative_error(LossKind::SmoothL1, packing, pred, target) < 1e-4);
    }
}

TEST_CASE("direct l2/smooth-l1 gradients") {
    std::mt19937_64 rng(309);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd a(5), b(5);
    for (int i = 0; i < 5; ++i) {
        a[i] = n(rng);
        b[i] = n(rng);
    }
    Eigen::VectorXd grad;
    (void)l2_loss(a, b, &grad);
    // d/da_i of mean_j (a_j − b_j)² = 2(a_i − b_i)/n.
    CHECK((grad - Eigen::VectorXd(2.0 / 5.0 * (a - b))).norm() < 1e-15);
    (void)smooth_l1_loss(a, b, &grad);
    for (int i = 0; i < 5; ++i) {
        CHECK(grad[i] == doctest::Approx(smooth_l1_grad(a[i] - b[i]) / 5.0).epsilon(1e-12));
    }
}

TEST_CASE("loss name round trip") {
    for (LossKind k : {LossKind::Geodesic, LossKind::L2, LossKind::SmoothL1, LossKind::Fk}) {
        CHECK(loss_from_string(to_string(k)) == k);
    }
    CHECK_THROWS_AS((void)loss_from_string("hinge"), ConfigError);
}

}  // TEST_SUITE
