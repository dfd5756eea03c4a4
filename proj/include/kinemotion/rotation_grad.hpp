#pragma once

#include <Eigen/Dense>

#include "kinemotion/rotation.hpp"

// Hand-derived adjoints (vector-Jacobian products) for the parameter →
// rotation-matrix maps and for the geodesic metric. Each `*_backward` takes
// the forward inputs plus `Rbar` = ∂L/∂R (3×3, elementwise) and returns
// ∂L/∂params. Verified against central finite differences in the tests.

namespace kinemotion {

// ∂/∂R1 of geodesic_distance(R1, R2)² — bounded as R1 → R2 (the d/sin d
// factor tends to 1). The arccos argument is clamped to ±(1 − 1e-7) before
// differentiating so the gradient stays finite at the ends of the range.
Eigen::Matrix3d geodesic_sq_backward(const Rotation& r1, const Rotation& r2);

// Adjoint of matrix_from_axis_angle. Smooth everywhere; uses the same Taylor
// switch as the forward map near θ = 0.
Eigen::Vector3d axis_angle_backward(const AxisAngle& aa, const Eigen::Matrix3d& rbar);

// Adjoint of matrix_from_quat (includes the normalization step, so `q` may
// be any nonzero quaternion — exactly what the network emits).
Eigen::Vector4d quat_backward(const Quaternion& q, const Eigen::Matrix3d& rbar);

// Adjoint of matrix_from_stiefel (through Gram-Schmidt and the cross
// product). Precondition: the forward map does not throw for `s`.
Eigen::Matrix<double, 6, 1> stiefel_backward(const StiefelRot& s, const Eigen::Matrix3d& rbar);

// Adjoint of matrix_from_euler; returns (∂L/∂yaw, ∂L/∂pitch, ∂L/∂roll).
Eigen::Vector3d euler_backward(const EulerAngles& e, const Eigen::Matrix3d& rbar);

}  // namespace kinemotion
