#pragma once

#include <Eigen/Dense>

#include "kinemotion/errors.hpp"

// Rotation representations and conversions.
//
// Conventions, fixed across the library:
//  * Rotations act on column vectors: v' = R * v.
//  * Axis-angle ω = θ·ŵ, canonical range θ ∈ [0, π].
//  * Quaternions are scalar-first (w, x, y, z); q and −q encode the same
//    rotation, canonical form has w ≥ 0.
//  * The Stiefel parameters are the first two matrix columns stacked into
//    R⁶; the third column is recovered by Gram-Schmidt + cross product.
//  * Euler angles are intrinsic Z-Y-X (yaw about z, then pitch about the new
//    y, then roll about the new x): R = Rz(yaw)·Ry(pitch)·Rx(roll).
//
// Conversions evaluate their formulas on whatever matrix they are given and
// do not validate orthonormality; use Rotation::nearest to project noisy
// matrices onto SO(3) first when that matters.

namespace kinemotion {

struct AxisAngle;
struct Quaternion;
struct StiefelRot;
struct EulerAngles;

struct Rotation {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();

    Rotation() = default;
    explicit Rotation(const Eigen::Matrix3d& mat) : m(mat) {}

    static Rotation identity() { return Rotation(); }
    static Rotation rot_x(double angle);
    static Rotation rot_y(double angle);
    static Rotation rot_z(double angle);

    // Orthogonal projection of an arbitrary matrix onto SO(3) (polar
    // projection via SVD, with the determinant sign fixed to +1).
    static Rotation nearest(const Eigen::Matrix3d& mat);

    // True iff mᵀm = I and det m = +1 within `tol`.
    bool is_valid(double tol = 1e-9) const;

    Rotation inverse() const { return Rotation(m.transpose()); }
    Rotation operator*(const Rotation& rhs) const { return Rotation(m * rhs.m); }
    Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return m * v; }

    double trace() const { return m.trace(); }
};

// ω = θ·ŵ. angle() is the parameter-space magnitude ‖ω‖.
struct AxisAngle {
    Eigen::Vector3d w = Eigen::Vector3d::Zero();

    AxisAngle() = default;
    explicit AxisAngle(const Eigen::Vector3d& omega) : w(omega) {}
    AxisAngle(double x, double y, double z) : w(x, y, z) {}

    double angle() const { return w.norm(); }
};

// Scalar-first unit quaternion. Stored unnormalized as given; conversions
// normalize where the formulas require it.
struct Quaternion {
    Eigen::Vector4d q = Eigen::Vector4d(1, 0, 0, 0);  // (w, x, y, z)

    Quaternion() = default;
    explicit Quaternion(const Eigen::Vector4d& v) : q(v) {}
    Quaternion(double w, double x, double y, double z) : q(w, x, y, z) {}

    double scalar() const { return q[0]; }
    Eigen::Vector3d vector() const { return q.tail<3>(); }

    Quaternion normalized() const { return Quaternion(q / q.norm()); }
    // Same rotation, scalar part ≥ 0.
    Quaternion canonical() const {
        return q[0] < 0 ? Quaternion(-q) : *this;
    }
};

// First two columns of the rotation matrix, stacked: (col0; col1) ∈ R⁶.
struct StiefelRot {
    Eigen::Matrix<double, 6, 1> r = (Eigen::Matrix<double, 6, 1>() << 1, 0, 0, 0, 1, 0).finished();

    StiefelRot() = default;
    explicit StiefelRot(const Eigen::Matrix<double, 6, 1>& v) : r(v) {}

    Eigen::Vector3d col0() const { return r.head<3>(); }
    Eigen::Vector3d col1() const { return r.tail<3>(); }
};

// Intrinsic Z-Y-X angles, radians. Canonical ranges: yaw, roll ∈ (−π, π],
// pitch ∈ [−π/2, π/2].
struct EulerAngles {
    double yaw = 0.0;    // about z
    double pitch = 0.0;  // about y
    double roll = 0.0;   // about x

    EulerAngles() = default;
    EulerAngles(double yaw_, double pitch_, double roll_)
        : yaw(yaw_), pitch(pitch_), roll(roll_) {}
};

// Rotation followed by translation: v' = R·v + t.
struct RigidTransform {
    Rotation rot;
    Eigen::Vector3d t = Eigen::Vector3d::Zero();

    RigidTransform() = default;
    RigidTransform(const Rotation& r, const Eigen::Vector3d& t_) : rot(r), t(t_) {}
};

// ---- Conversions ----------------------------------------------------------

// Matrix → axis-angle. Branches: θ < 1e-7 returns ω = 0; θ within 1e-6 of π
// extracts the axis from the symmetric part of (R+I)/2 (the antisymmetric
// part only fixes the sign there). Result is canonical (θ ∈ [0, π]).
AxisAngle axis_angle_from_matrix(const Rotation& R);

// Rodrigues' formula, numerically stable at θ → 0 (Taylor fallback).
Rotation matrix_from_axis_angle(const AxisAngle& aa);

// q = (cos θ/2, sin(θ/2)·ŵ); θ = 0 maps to the identity quaternion.
Quaternion quat_from_axis_angle(const AxisAngle& aa);

// Inverse of the above, canonicalized to θ ∈ [0, π].
AxisAngle axis_angle_from_quat(const Quaternion& q);

// Normalizes, then applies the standard homogeneous expression.
Rotation matrix_from_quat(const Quaternion& q);

// Shepperd's method (stable for all rotations, including θ ≈ π); canonical.
Quaternion quat_from_matrix(const Rotation& R);

// First two columns, verbatim.
StiefelRot stiefel_from_matrix(const Rotation& R);

// Gram-Schmidt on (r1, r2), third column by cross product. Throws
// DegenerateStiefel when r1 is numerically zero or r2 is parallel to r1.
Rotation matrix_from_stiefel(const StiefelRot& s);

// Z-Y-X factorization; at gimbal lock (|pitch| = π/2) yaw is set to 0 and
// roll absorbs the free angle.
EulerAngles euler_from_matrix(const Rotation& R);

Rotation matrix_from_euler(const EulerAngles& e);

// Wraps an arbitrary ω to the canonical range θ ∈ [0, π] (same rotation).
AxisAngle canonicalized(const AxisAngle& aa);

// ---- Rigid transforms ------------------------------------------------------

inline Eigen::Vector3d apply_transform(const RigidTransform& T, const Eigen::Vector3d& v) {
    return T.rot * v + T.t;
}

// compose(A, B) maps v ↦ A(B(v)).
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    return RigidTransform(a.rot * b.rot, a.rot * b.t + a.t);
}

inline RigidTransform inverse(const RigidTransform& T) {
    Rotation rinv = T.rot.inverse();
    return RigidTransform(rinv, -(rinv * T.t));
}

// ---- Metrics ---------------------------------------------------------------

// Geodesic distance on SO(3): arccos((Tr(R1·R2ᵀ) − 1)/2), with the arccos
// argument clamped to [−1, 1]. Range [0, π].
double geodesic_distance(const Rotation& a, const Rotation& b);

}  // namespace kinemotion
