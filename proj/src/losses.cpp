#include "kinemotion/losses.hpp"

#include <cmath>

#include "kinemotion/errors.hpp"
#include "kinemotion/rotation_grad.hpp"

namespace kinemotion {

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::Geodesic: return "geodesic";
        case LossKind::L2: return "l2";
        case LossKind::SmoothL1: return "smooth_l1";
        case LossKind::Fk: return "fk";
    }
    return "?";
}

LossKind loss_from_string(const std::string& name) {
    if (name == "geodesic") return LossKind::Geodesic;
    if (name == "l2") return LossKind::L2;
    if (name == "smooth_l1" || name == "smoothl1" || name == "huber") return LossKind::SmoothL1;
    if (name == "fk" || name == "kinematics") return LossKind::Fk;
    throw ConfigError("unknown loss '" + name + "' (expected geodesic, l2, smooth_l1, or fk)");
}

bool loss_compatible(LossKind kind, Representation rep) {
    if (rep == Representation::Coords) {
        return kind == LossKind::L2 || kind == LossKind::SmoothL1;
    }
    return true;
}

double smooth_l1(double x) {
    double a = std::abs(x);
    return a <= 1.0 ? 0.5 * x * x : a - 0.5;
}

double smooth_l1_grad(double x) {
    if (x > 1.0) return 1.0;
    if (x < -1.0) return -1.0;
    return x;
}

LossValue geodesic_loss(const std::vector<Rotation>& pred, const std::vector<Rotation>& target) {
    if (pred.size() != target.size()) {
        throw ShapeMismatch("geodesic_loss: bone count mismatch");
    }
    LossValue lv;
    for (size_t k = 0; k < pred.size(); ++k) {
        double d = geodesic_distance(pred[k], target[k]);
        lv.terms.push_back(d * d);
    }
    for (double t : lv.terms) lv.value += t;
    if (!lv.terms.empty()) lv.value /= double(lv.terms.size());
    return lv;
}

LossValue fk_loss(const SkeletonSpec& skel, const PoseFrame& pred, const PoseFrame& target) {
    if (pred.rot.size() != target.rot.size()) {
        throw ShapeMismatch("fk_loss: bone count mismatch");
    }
    if (static_cast<int>(pred.rot.size()) != skel.bone_count()) {
        throw TopologyMismatch("fk_loss: pose does not match the skeleton");
    }
    PoseFrame p = pred, t = target;
    p.root_t.setZero();
    t.root_t.setZero();
    std::vector<Eigen::Vector3d> jp = forward_kinematics(skel, p);
    std::vector<Eigen::Vector3d> jt = forward_kinematics(skel, t);
    double sum = 0.0;
    for (size_t k = 0; k < jp.size(); ++k) {
        sum += (jp[k] - jt[k]).squaredNorm();
    }
    LossValue lv;
    lv.terms.push_back(sum);
    lv.value = sum;
    return lv;
}

namespace {

// Shared element-mean reduction for the L2 / smooth-L1 pair.
LossValue elementwise_value(LossKind kind, const Eigen::VectorXd& diff, Eigen::VectorXd* grad) {
    LossValue lv;
    lv.terms.reserve(static_cast<size_t>(diff.size()));
    if (grad) *grad = Eigen::VectorXd::Zero(diff.size());
    for (int d = 0; d < diff.size(); ++d) {
        if (kind == LossKind::L2) {
            lv.terms.push_back(diff[d] * diff[d]);
            if (grad) (*grad)[d] = 2.0 * diff[d];
        } else {
            lv.terms.push_back(smooth_l1(diff[d]));
            if (grad) (*grad)[d] = smooth_l1_grad(diff[d]);
        }
    }
    for (double t : lv.terms) lv.value += t;
    if (!lv.terms.empty()) {
        lv.value /= double(lv.terms.size());
        if (grad) *grad /= double(lv.terms.size());
    }
    return lv;
}

}  // namespace

LossValue l2_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target,
                  Eigen::VectorXd* grad) {
    if (pred.size() != target.size()) throw ShapeMismatch("l2_loss: vector sizes differ");
    return elementwise_value(LossKind::L2, pred - target, grad);
}

LossValue smooth_l1_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target,
                         Eigen::VectorXd* grad) {
    if (pred.size() != target.size()) throw ShapeMismatch("smooth_l1_loss: vector sizes differ");
    return elementwise_value(LossKind::SmoothL1, pred - target, grad);
}

namespace {

LossResult packed_elementwise(LossKind kind, const Packing& packing,
                              const std::vector<Eigen::VectorXd>& pred,
                              const std::vector<PoseFrame>& target, bool with_grad) {
    const int frames = static_cast<int>(pred.size());
    LossResult res;
    // One term per element across all frames; the scalar is the global
    // element mean, so each frame's gradient carries 1/(frames·dim).
    const double count = double(frames) * double(packing.dim());
    for (int i = 0; i < frames; ++i) {
        if (pred[i].size() != packing.dim()) {
            throw ShapeMismatch("loss: packed width mismatch");
        }
        Eigen::VectorXd tv = packing.pack(target[i]);
        Eigen::VectorXd diff = pred[i] - tv;
        Eigen::VectorXd g = Eigen::VectorXd::Zero(diff.size());
        for (int d = 0; d < diff.size(); ++d) {
            if (kind == LossKind::L2) {
                res.loss.terms.push_back(diff[d] * diff[d]);
                g[d] = 2.0 * diff[d] / count;
            } else {
                res.loss.terms.push_back(smooth_l1(diff[d]));
                g[d] = smooth_l1_grad(diff[d]) / count;
            }
        }
        if (with_grad) res.grad.push_back(g);
    }
    for (double t : res.loss.terms) res.loss.value += t;
    if (!res.loss.terms.empty()) res.loss.value /= double(res.loss.terms.size());
    return res;
}

LossResult packed_geodesic(const Packing& packing, const std::vector<Eigen::VectorXd>& pred,
                           const std::vector<PoseFrame>& target, bool with_grad) {
    const int frames = static_cast<int>(pred.size());
    const int m = packing.skeleton().bone_count();
    LossResult res;
    const double scale = 1.0 / (double(frames) * double(m));
    for (int i = 0; i < frames; ++i) {
        std::vector<Rotation> rots = packing.unpack(pred[i]);
        std::vector<Eigen::Matrix3d> rbar(m, Eigen::Matrix3d::Zero());
        for (int k = 0; k < m; ++k) {
            double d = geodesic_distance(rots[k], target[i].rot[k]);
            res.loss.terms.push_back(d * d);
            if (with_grad) {
                rbar[k] = scale * geodesic_sq_backward(rots[k], target[i].rot[k]);
            }
        }
        if (with_grad) res.grad.push_back(packing.unpack_backward(pred[i], rbar));
    }
    for (double t : res.loss.terms) res.loss.value += t;
    if (!res.loss.terms.empty()) res.loss.value /= double(res.loss.terms.size());
    return res;
}

LossResult packed_fk(const Packing& packing, const std::vector<Eigen::VectorXd>& pred,
                     const std::vector<PoseFrame>& target, bool with_grad) {
    const int frames = static_cast<int>(pred.size());
    const SkeletonSpec& skel = packing.skeleton();
    const int m = skel.bone_count();
    LossResult res;
    for (int i = 0; i < frames; ++i) {
        PoseFrame pf;
        pf.root_t.setZero();
        pf.rot = packing.unpack(pred[i]);
        PoseFrame tf = target[i];
        tf.root_t.setZero();
        FkCache cp = forward_kinematics_full(skel, pf);
        FkCache ct = forward_kinematics_full(skel, tf);
        double term = 0.0;
        std::vector<Eigen::Vector3d> jbar(m, Eigen::Vector3d::Zero());
        for (int k = 0; k < m; ++k) {
            Eigen::Vector3d d = cp.joints[k] - ct.joints[k];
            term += d.squaredNorm();
            jbar[k] = (2.0 / double(frames)) * d;
        }
        res.loss.terms.push_back(term);
        if (with_grad) {
            FkGrad fg = fk_backward(skel, pf, cp, jbar);
            res.grad.push_back(packing.unpack_backward(pred[i], fg.rot));
        }
    }
    for (double t : res.loss.terms) res.loss.value += t;
    if (frames > 0) res.loss.value /= double(frames);
    return res;
}

}  // namespace

LossResult eval_loss(LossKind kind, const Packing& packing,
                     const std::vector<Eigen::VectorXd>& pred,
                     const std::vector<PoseFrame>& target, bool with_grad) {
    if (pred.size() != target.size()) {
        throw ShapeMismatch("loss: prediction and target frame counts differ");
    }
    if (pred.empty()) {
        throw ShapeMismatch("loss: no frames");
    }
    for (const PoseFrame& f : target) {
        if (static_cast<int>(f.rot.size()) != packing.skeleton().bone_count()) {
            throw ShapeMismatch("loss: target frame bone count mismatch");
        }
    }
    if (!loss_compatible(kind, packing.representation())) {
        throw ConfigError("loss '" + to_string(kind) + "' is incompatible with the " +
                          to_string(packing.representation()) + " representation");
    }
    switch (kind) {
        case LossKind::L2:
        case LossKind::SmoothL1:
            return packed_elementwise(kind, packing, pred, target, with_grad);
        case LossKind::Geodesic:
            return packed_geodesic(packing, pred, target, with_grad);
        case LossKind::Fk:
            return packed_fk(packing, pred, target, with_grad);
    }
    throw Error("unreachable");
}

}  // namespace kinemotion
