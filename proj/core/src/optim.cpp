#include "exocast/optim.hpp"

#include <cmath>
#include <limits>

namespace exocast {

namespace {

double finite_or_inf(double v) {
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

} // namespace

Eigen::VectorXd numerical_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x,
                                   double step_scale) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd g(n);
    Eigen::VectorXd xp = x;
    for (int i = 0; i < n; ++i) {
        const double h = step_scale * (1.0 + std::abs(x[i]));
        const double xi = x[i];
        xp[i] = xi + h;
        const double fp = f(xp);
        xp[i] = xi - h;
        const double fm = f(xp);
        xp[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

OptimResult minimize_bfgs(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                          int max_iterations, double grad_tolerance) {
    const int n = static_cast<int>(x0.size());
    OptimResult result;
    result.x = x0;
    result.value = finite_or_inf(f(x0));
    if (n == 0) {
        result.converged = true;
        return result;
    }

    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd g = numerical_gradient(f, result.x);
    result.grad_norm = g.norm();

    constexpr double armijo_c = 1e-4;
    constexpr double shrink = 0.5;
    bool h_has_curvature = false;

    for (int iter = 0; iter < max_iterations; ++iter) {
        result.iterations = iter;
        if (result.grad_norm < grad_tolerance) {
            result.converged = true;
            return result;
        }

        Eigen::VectorXd direction = -(H * g);
        double slope = g.dot(direction);
        if (!(slope < 0.0) || !direction.allFinite()) {
            // Hessian approximation lost descent; restart from steepest descent.
            H.setIdentity();
            h_has_curvature = false;
            direction = -g;
            slope = -g.squaredNorm();
        }
        if (!h_has_curvature) {
            // Identity-Hessian steps are unscaled: a large gradient would
            // vault over the region where the objective varies and can land
            // on a flat saturation plateau that backtracking still accepts.
            // Cap those steps at unit length; curvature scaling takes over
            // after the first update.
            const double norm = direction.norm();
            if (norm > 1.0) {
                direction /= norm;
                slope /= norm;
            }
        }

        double alpha = 1.0;
        double new_value = std::numeric_limits<double>::infinity();
        Eigen::VectorXd x_new;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = result.x + alpha * direction;
            new_value = finite_or_inf(f(x_new));
            if (new_value <= result.value + armijo_c * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= shrink;
        }
        if (!accepted) {
            // No improving step at machine-step sizes: treat the point as a
            // local optimum rather than failing the whole fit.
            result.converged = true;
            return result;
        }

        const Eigen::VectorXd g_new = numerical_gradient(f, x_new);
        const Eigen::VectorXd s = x_new - result.x;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-10 * s.norm() * y.norm() && y.allFinite()) {
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
            if (!h_has_curvature) {
                // Scale the initial inverse Hessian to the observed curvature
                // so subsequent quasi-Newton steps start at the right size.
                H = (sy / y.squaredNorm()) * I;
                h_has_curvature = true;
            }
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd V = I - rho * s * y.transpose();
            H = V * H * V.transpose() + rho * s * s.transpose();
        }

        const double improvement = result.value - new_value;
        result.x = x_new;
        result.value = new_value;
        g = g_new;
        result.grad_norm = g.norm();

        if (improvement <= 1e-12 * (std::abs(result.value) + 1e-12)) {
            result.converged = true;
            result.iterations = iter + 1;
            return result;
        }
    }
    result.iterations = max_iterations;
    result.converged = result.grad_norm < grad_tolerance;
    return result;
}

} // namespace exocast
