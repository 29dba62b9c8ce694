#pragma once

#include <Eigen/Dense>

#include <functional>

namespace exocast {

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

struct OptimResult {
    Eigen::VectorXd x;
    double value = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    /// True when the gradient tolerance was met or the line search could no
    /// longer improve the objective (local optimum at working precision).
    bool converged = false;
};

/// Central-difference gradient. Step per coordinate: step_scale * (1 + |x_i|).
Eigen::VectorXd numerical_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x,
                                   double step_scale = 1e-6);

/// BFGS minimization with backtracking (Armijo) line search and numerical
/// gradients. Deterministic for a given objective and start point. Non-finite
/// objective values are treated as +infinity by the line search.
OptimResult minimize_bfgs(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                          int max_iterations = 500, double grad_tolerance = 1e-6);

} // namespace exocast
