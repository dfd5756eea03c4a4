#include "kinemotion/rotation_grad.hpp"

#include <algorithm>
#include <cmath>

namespace kinemotion {

namespace {

// ⟨A, [v]×⟩ = axial(A)·v for any 3×3 A.
Eigen::Vector3d axial(const Eigen::Matrix3d& a) {
    return Eigen::Vector3d(a(2, 1) - a(1, 2), a(0, 2) - a(2, 0), a(1, 0) - a(0, 1));
}

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

Eigen::Matrix3d geodesic_sq_backward(const Rotation& r1, const Rotation& r2) {
    double c = ((r1.m * r2.m.transpose()).trace() - 1.0) / 2.0;
    c = std::clamp(c, -1.0 + 1e-7, 1.0 - 1e-7);
    double d = std::acos(c);
    // d(d²)/dR1 = 2d · d(arccos c)/dc · dc/dR1, and dc/dR1 = R2/2.
    return (-d / std::sqrt(1.0 - c * c)) * r2.m;
}

Eigen::Vector3d axis_angle_backward(const AxisAngle& aa, const Eigen::Matrix3d& rbar) {
    double theta = aa.angle();
    double a, b, da_over_t, db_over_t;  // a' / θ and b' / θ, both even in θ
    if (theta < 1e-3) {
        double t2 = theta * theta;
        a = 1.0 - t2 / 6.0;
        b = 0.5 - t2 / 24.0;
        da_over_t = -1.0 / 3.0 + t2 / 30.0;
        db_over_t = -1.0 / 12.0 + t2 / 180.0;
    } else {
        double s = std::sin(theta), c = std::cos(theta);
        double t2 = theta * theta;
        a = s / theta;
        b = (1.0 - c) / t2;
        da_over_t = (theta * c - s) / (t2 * theta);
        db_over_t = (theta * s - 2.0 * (1.0 - c)) / (t2 * t2);
    }
    Eigen::Matrix3d k = hat(aa.w);
    // R = I + a·K + b·K²; differentiate both the coefficients (through θ)
    // and K itself.
    double dR_dK = (rbar.cwiseProduct(k)).sum();
    double dR_dK2 = (rbar.cwiseProduct(k * k)).sum();
    Eigen::Vector3d grad = (dR_dK * da_over_t + dR_dK2 * db_over_t) * aa.w;
    grad += a * axial(rbar);
    grad += b * axial(k.transpose() * rbar + rbar * k.transpose());
    return grad;
}

Eigen::Vector4d quat_backward(const Quaternion& q_in, const Eigen::Matrix3d& rbar) {
    double norm = q_in.q.norm();
    Eigen::Vector4d y = q_in.q / norm;
    double w = y[0], x = y[1], yy = y[2], z = y[3];

    Eigen::Matrix3d dw, dx, dy, dz;  // ∂R/∂(unit components), each ×2
    // clang-format off
    dw <<   0, -z,  yy,
            z,  0, -x,
          -yy,  x,  0;
    dx <<   0,  yy,  z,
           yy, -2*x, -w,
            z,  w, -2*x;
    dy << -2*yy,  x,  w,
             x,  0,  z,
            -w,  z, -2*yy;
    dz << -2*z, -w,  x,
             w, -2*z, yy,
             x,  yy,  0;
    // clang-format on
    Eigen::Vector4d ybar;
    ybar << 2.0 * rbar.cwiseProduct(dw).sum(), 2.0 * rbar.cwiseProduct(dx).sum(),
        2.0 * rbar.cwiseProduct(dy).sum(), 2.0 * rbar.cwiseProduct(dz).sum();
    // Through the normalization y = q/‖q‖: q̄ = (I − yyᵀ)ȳ / ‖q‖.
    return (ybar - y.dot(ybar) * y) / norm;
}

Eigen::Matrix<double, 6, 1> stiefel_backward(const StiefelRot& s, const Eigen::Matrix3d& rbar) {
    // Recompute the forward intermediates.
    Eigen::Vector3d r1 = s.col0(), r2 = s.col1();
    double n1 = r1.norm();
    Eigen::Vector3d c0 = r1 / n1;
    Eigen::Vector3d w = r2 - r2.dot(c0) * c0;
    double n2 = w.norm();
    Eigen::Vector3d c1 = w / n2;

    Eigen::Vector3d c0bar = rbar.col(0);
    Eigen::Vector3d c1bar = rbar.col(1);
    Eigen::Vector3d c2bar = rbar.col(2);

    // c2 = c0 × c1.
    c0bar += c1.cross(c2bar);
    c1bar += c2bar.cross(c0);

    // c1 = w / ‖w‖.
    Eigen::Vector3d wbar = (c1bar - c1.dot(c1bar) * c1) / n2;

    // w = r2 − (r2·c0)·c0.
    Eigen::Vector3d r2bar = wbar - c0.dot(wbar) * c0;
    c0bar += -c0.dot(wbar) * r2 - r2.dot(c0) * wbar;

    // c0 = r1 / ‖r1‖.
    Eigen::Vector3d r1bar = (c0bar - c0.dot(c0bar) * c0) / n1;

    Eigen::Matrix<double, 6, 1> grad;
    grad.head<3>() = r1bar;
    grad.tail<3>() = r2bar;
    return grad;
}

Eigen::Vector3d euler_backward(const EulerAngles& e, const Eigen::Matrix3d& rbar) {
    double cy = std::cos(e.yaw), sy = std::sin(e.yaw);
    double cp = std::cos(e.pitch), sp = std::sin(e.pitch);
    double cr = std::cos(e.roll), sr = std::sin(e.roll);

    Eigen::Matrix3d rz = Rotation::rot_z(e.yaw).m;
    Eigen::Matrix3d ry = Rotation::rot_y(e.pitch).m;
    Eigen::Matrix3d rx = Rotation::rot_x(e.roll).m;

    Eigen::Matrix3d dz, dy, dx;
    // clang-format off
    dz << -sy, -cy, 0,
           cy, -sy, 0,
            0,   0, 0;
    dy << -sp, 0,  cp,
            0, 0,   0,
          -cp, 0, -sp;
    dx << 0,   0,   0,
          0, -sr, -cr,
          0,  cr, -sr;
    // clang-format on
    Eigen::Vector3d grad;
    grad << rbar.cwiseProduct(dz * ry * rx).sum(),
        rbar.cwiseProduct(rz * dy * rx).sum(),
        rbar.cwiseProduct(rz * ry * dx).sum();
    return grad;
}

}  // namespace kinemotion
