#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace mtload::numerics {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LevMarOptions {
    int max_iterations = 200;
    double param_tol = 1e-8;     // relative parameter change
    double residual_tol = 1e-10; // relative change of the residual norm
    double jacobian_step = 1e-6; // relative central-difference step
    double initial_damping = 1e-3;
};

struct LevMarResult {
    Eigen::VectorXd params;
    Eigen::VectorXd std_errors;
    Eigen::MatrixXd covariance;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    bool hit_bound = false;
    std::string message;
};

// Central-difference Jacobian; step_i = rel_step * max(|p_i|, scale_i).
Eigen::MatrixXd numeric_jacobian(const ResidualFn& residuals, const Eigen::VectorXd& p, const Eigen::VectorXd& scale,
                                 double rel_step);

// Damped Gauss-Newton with Marquardt's diagonal scaling. `scale` gives each
// parameter's typical magnitude (used for Jacobian steps near zero and for the
// relative step test). Parameters are clamped to `lower` after every step.
// Standard errors come from s^2 (J^T J)^-1 with s^2 = SSR / (m - n).
LevMarResult levenberg_marquardt(const ResidualFn& residuals, Eigen::VectorXd p0, Eigen::VectorXd scale,
                                 const LevMarOptions& opts = {}, Eigen::VectorXd lower = {});

}  // namespace mtload::numerics
