#include "kinemotion/rotation.hpp"

#include <algorithm>
#include <cmath>

namespace kinemotion {

namespace {

constexpr double kPi = 3.14159265358979323846;

inline double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

// Skew-symmetric cross-product matrix [w]×.
Eigen::Matrix3d hat(const Eigen::Vector3d& w) {
    Eigen::Matrix3d m;
    // clang-format off
    m <<     0, -w.z(),  w.y(),
         w.z(),      0, -w.x(),
        -w.y(),  w.x(),      0;
    // clang-format on
    return m;
}

}  // namespace

Rotation Rotation::rot_x(double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    Eigen::Matrix3d m;
    m << 1, 0, 0, 0, c, -s, 0, s, c;
    return Rotation(m);
}

Rotation Rotation::rot_y(double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    Eigen::Matrix3d m;
    m << c, 0, s, 0, 1, 0, -s, 0, c;
    return Rotation(m);
}

Rotation Rotation::rot_z(double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    Eigen::Matrix3d m;
    m << c, -s, 0, s, c, 0, 0, 0, 1;
    return Rotation(m);
}

Rotation Rotation::nearest(const Eigen::Matrix3d& mat) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(mat, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU();
    Eigen::Matrix3d v = svd.matrixV();
    Eigen::Vector3d d(1, 1, (u * v.transpose()).determinant() < 0 ? -1.0 : 1.0);
    return Rotation(u * d.asDiagonal() * v.transpose());
}

bool Rotation::is_valid(double tol) const {
    bool orthonormal = (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < tol;
    return orthonormal && std::abs(m.determinant() - 1.0) < tol;
}

AxisAngle axis_angle_from_matrix(const Rotation& R) {
    const Eigen::Matrix3d& m = R.m;
    double theta = std::acos(clamp_unit((m.trace() - 1.0) / 2.0));
    if (theta < 1e-7) {
        return AxisAngle();
    }

    Eigen::Vector3d v(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));

    if (theta > kPi - 1e-6) {
        // Near θ = π the antisymmetric part ~2·sinθ·ŵ vanishes; recover the
        // axis from the symmetric part, where (R + I)/2 ≈ ŵŵᵀ.
        Eigen::Matrix3d p = (0.5 * (m + m.transpose()) + Eigen::Matrix3d::Identity()) / 2.0;
        int i = 0;
        p.diagonal().maxCoeff(&i);
        Eigen::Vector3d axis = p.col(i) / std::sqrt(std::max(p(i, i), 1e-30));
        axis.normalize();
        // The vanishing antisymmetric part still carries the sign; keep the
        // extracted axis continuous with the sub-π branch.
        if (axis.dot(v) < 0) axis = -axis;
        return AxisAngle(theta * axis);
    }

    return AxisAngle((theta / (2.0 * std::sin(theta))) * v);
}

Rotation matrix_from_axis_angle(const AxisAngle& aa) {
    double theta = aa.angle();
    double a, b;  // R = I + a·[ω]× + b·[ω]×²
    if (theta < 1e-6) {
        double t2 = theta * theta;
        a = 1.0 - t2 / 6.0;
        b = 0.5 - t2 / 24.0;
    } else {
        a = std::sin(theta) / theta;
        b = (1.0 - std::cos(theta)) / (theta * theta);
    }
    Eigen::Matrix3d k = hat(aa.w);
    return Rotation(Eigen::Matrix3d::Identity() + a * k + b * (k * k));
}

Quaternion quat_from_axis_angle(const AxisAngle& aa) {
    double theta = aa.angle();
    if (theta < 1e-12) {
        return Quaternion(1, 0, 0, 0);
    }
    double half = theta / 2.0;
    Eigen::Vector3d v = (std::sin(half) / theta) * aa.w;
    return Quaternion(Eigen::Vector4d(std::cos(half), v.x(), v.y(), v.z()));
}

AxisAngle axis_angle_from_quat(const Quaternion& q_in) {
    Eigen::Vector4d q = q_in.normalized().canonical().q;
    double vnorm = q.tail<3>().norm();
    double theta = 2.0 * std::atan2(vnorm, q[0]);  // ∈ [0, π] once w ≥ 0
    if (vnorm < 1e-12) {
        return AxisAngle();
    }
    return AxisAngle((theta / vnorm) * q.tail<3>());
}

Rotation matrix_from_quat(const Quaternion& q_in) {
    Eigen::Vector4d q = q_in.q / q_in.q.norm();
    double w = q[0], x = q[1], y = q[2], z = q[3];
    Eigen::Matrix3d m;
    // clang-format off
    m << 1 - 2*(y*y + z*z),     2*(x*y - w*z),     2*(x*z + w*y),
             2*(x*y + w*z), 1 - 2*(x*x + z*z),     2*(y*z - w*x),
             2*(x*z - w*y),     2*(y*z + w*x), 1 - 2*(x*x + y*y);
    // clang-format on
    return Rotation(m);
}

Quaternion quat_from_matrix(const Rotation& R) {
    const Eigen::Matrix3d& m = R.m;
    // Shepperd: pick the largest of {1+tr, 1+2m00−tr, 1+2m11−tr, 1+2m22−tr}
    // so the leading square root is always well conditioned.
    double tr = m.trace();
    Eigen::Vector4d q;
    if (tr > m(0, 0) && tr > m(1, 1) && tr > m(2, 2)) {
        double s = std::sqrt(1.0 + tr) * 2.0;  // 4w
        q << 0.25 * s, (m(2, 1) - m(1, 2)) / s, (m(0, 2) - m(2, 0)) / s,
            (m(1, 0) - m(0, 1)) / s;
    } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
        double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2.0;  // 4x
        q << (m(2, 1) - m(1, 2)) / s, 0.25 * s, (m(0, 1) + m(1, 0)) / s,
            (m(0, 2) + m(2, 0)) / s;
    } else if (m(1, 1) > m(2, 2)) {
        double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2.0;  // 4y
        q << (m(0, 2) - m(2, 0)) / s, (m(0, 1) + m(1, 0)) / s, 0.25 * s,
            (m(1, 2) + m(2, 1)) / s;
    } else {
        double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2.0;  // 4z
        q << (m(1, 0) - m(0, 1)) / s, (m(0, 2) + m(2, 0)) / s,
            (m(1, 2) + m(2, 1)) / s, 0.25 * s;
    }
    return Quaternion(q).normalized().canonical();
}

StiefelRot stiefel_from_matrix(const Rotation& R) {
    StiefelRot s;
    s.r.head<3>() = R.m.col(0);
    s.r.tail<3>() = R.m.col(1);
    return s;
}

Rotation matrix_from_stiefel(const StiefelRot& s) {
    Eigen::Vector3d r1 = s.col0();
    double n1 = r1.norm();
    if (n1 <= 1e-8) {
        throw DegenerateStiefel("stiefel: first column seed is numerically zero");
    }
    Eigen::Vector3d c0 = r1 / n1;
    Eigen::Vector3d v2 = s.col1() - s.col1().dot(c0) * c0;
    double n2 = v2.norm();
    if (n2 <= 1e-8) {
        throw DegenerateStiefel("stiefel: column seeds are numerically parallel");
    }
    Eigen::Vector3d c1 = v2 / n2;
    Eigen::Matrix3d m;
    m.col(0) = c0;
    m.col(1) = c1;
    m.col(2) = c0.cross(c1);
    return Rotation(m);
}

EulerAngles euler_from_matrix(const Rotation& R) {
    const Eigen::Matrix3d& m = R.m;
    EulerAngles e;
    double sp = clamp_unit(-m(2, 0));
    e.pitch = std::asin(sp);
    if (std::abs(sp) > 1.0 - 1e-12) {
        // Gimbal lock: only yaw∓roll is determined. Convention: yaw := 0.
        e.yaw = 0.0;
        e.roll = std::atan2(sp > 0 ? m(0, 1) : -m(0, 1), m(1, 1));
    } else {
        e.yaw = std::atan2(m(1, 0), m(0, 0));
        e.roll = std::atan2(m(2, 1), m(2, 2));
    }
    // atan2 can return exactly −π; the canonical range is (−π, π].
    if (e.yaw <= -kPi) e.yaw = kPi;
    if (e.roll <= -kPi) e.roll = kPi;
    return e;
}

Rotation matrix_from_euler(const EulerAngles& e) {
    return Rotation::rot_z(e.yaw) * Rotation::rot_y(e.pitch) * Rotation::rot_x(e.roll);
}

AxisAngle canonicalized(const AxisAngle& aa) {
    double theta = aa.angle();
    if (theta < 1e-12) {
        return AxisAngle();
    }
    Eigen::Vector3d axis = aa.w / theta;
    theta = std::fmod(theta, 2.0 * kPi);
    if (theta > kPi) {
        theta = 2.0 * kPi - theta;
        axis = -axis;
    }
    return AxisAngle(theta * axis);
}

double geodesic_distance(const Rotation& a, const Rotation& b) {
    double c = ((a.m * b.m.transpose()).trace() - 1.0) / 2.0;
    return std::acos(clamp_unit(c));
}

}  // namespace kinemotion
