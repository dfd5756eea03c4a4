#pragma once

#include <functional>

#include <Eigen/Dense>

// Finite-difference gradient oracle used to validate every hand-derived
// adjoint in the test suite. Central differences with step h give O(h²)
// truncation error; with h = 1e-5 and loss values of order 1 the oracle is
// good to ~1e-10, far below the 1e-4 acceptance gate.

namespace kinemotion {

inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h = 1e-5) {
    Eigen::VectorXd grad(x.size());
    Eigen::VectorXd p = x;
    for (int i = 0; i < x.size(); ++i) {
        double x0 = p[i];
        p[i] = x0 + h;
        double fp = f(p);
        p[i] = x0 - h;
        double fm = f(p);
        p[i] = x0;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

// ‖a − b‖ / max(‖a‖, ‖b‖); 0 when both vanish.
inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double denom = std::max(a.norm(), b.norm());
    if (denom == 0.0) return 0.0;
    return (a - b).norm() / denom;
}

}  // namespace kinemotion
