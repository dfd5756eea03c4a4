#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kinemotion/packing.hpp"
#include "kinemotion/rotation.hpp"
#include "kinemotion/skeleton.hpp"

// Training losses and their hand-derived gradients.
//
// Every loss reduces to `LossValue`: a list of per-term contributions and
// their mean as the scalar. Terms are
//   geodesic  — squared geodesic distance, one term per (frame, bone);
//   fk        — one term per frame: Σ_joints ‖Υ̂ − Υ‖² over bone-end joints,
//               both poses anchored at the origin;
//   l2        — one term per element: (pred_d − target_d)²;
//   smooth_l1 — one term per element: huber(pred_d − target_d), δ = 1.
//
// Gradients are with respect to the *packed* prediction vectors and flow
// through the representation adjoints (and through FK for the fk loss).

namespace kinemotion {

enum class LossKind { Geodesic, L2, SmoothL1, Fk };

std::string to_string(LossKind kind);
LossKind loss_from_string(const std::string& name);

// Geodesic and FK need recoverable rotations, so they reject Coords.
bool loss_compatible(LossKind kind, Representation rep);

struct LossValue {
    double value = 0.0;          // mean of terms
    std::vector<double> terms;   // individual contributions
};

// Huber with δ = 1: x²/2 for |x| ≤ 1, |x| − 1/2 beyond.
double smooth_l1(double x);
double smooth_l1_grad(double x);

// ---- Direct (unpacked) entry points, used by the worked-example tests ----

// Mean over per-bone squared geodesic distances of one frame pair.
LossValue geodesic_loss(const std::vector<Rotation>& pred, const std::vector<Rotation>& target);

// Σ_joints ‖Υ̂ − Υ‖² for one frame pair, both FK'd at the origin.
LossValue fk_loss(const SkeletonSpec& skel, const PoseFrame& pred, const PoseFrame& target);

// Element-mean losses over plain parameter vectors. If `grad` is non-null it
// receives ∂value/∂pred.
LossValue l2_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target,
                  Eigen::VectorXd* grad = nullptr);
LossValue smooth_l1_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target,
                         Eigen::VectorXd* grad = nullptr);

// ---- Packed sequence losses (training path) -------------------------------

struct LossResult {
    LossValue loss;
    std::vector<Eigen::VectorXd> grad;  // ∂loss.value/∂pred[i], if requested
};

// `pred` holds one packed vector per predicted frame; `target` the matching
// ground-truth frames. Throws ShapeMismatch on length disagreements and
// ConfigError for an incompatible kind/representation pair.
LossResult eval_loss(LossKind kind, const Packing& packing,
                     const std::vector<Eigen::VectorXd>& pred,
                     const std::vector<PoseFrame>& target, bool with_grad = true);

}  // namespace kinemotion
