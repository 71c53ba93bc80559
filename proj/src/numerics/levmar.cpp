#include "mtload/numerics/levmar.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "mtload/errors.hpp"

namespace mtload::numerics {
namespace {

double scaled_step(const Eigen::VectorXd& delta, const Eigen::VectorXd& p, const Eigen::VectorXd& scale) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        worst = std::max(worst, std::abs(delta[i]) / std::max(std::abs(p[i]), scale[i]));
    }
    return worst;
}

bool clamp_to(Eigen::VectorXd& p, const Eigen::VectorXd& lower) {
    bool clamped = false;
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        if (p[i] < lower[i]) {
            p[i] = lower[i];
            clamped = true;
        }
    }
    return clamped;
}

Eigen::VectorXd column_scale(const Eigen::MatrixXd& jac) {
    Eigen::VectorXd col = jac.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < col.size(); ++j)
        if (!(col[j] > 0.0)) col[j] = 1.0;
    return col;
}

// Solves lhs * d = -grad with parameters that sit on their lower bound and would be
// pushed below it held fixed.
Eigen::VectorXd bounded_step(const Eigen::MatrixXd& lhs, const Eigen::VectorXd& grad, const Eigen::VectorXd& p,
                             const Eigen::VectorXd& lower) {
    const Eigen::Index n = p.size();
    std::vector<bool> fixed(static_cast<std::size_t>(n), false);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
    for (Eigen::Index pass = 0; pass <= n; ++pass) {
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!fixed[static_cast<std::size_t>(i)]) free.push_back(i);
        delta.setZero();
        if (free.empty()) return delta;
        const auto k = static_cast<Eigen::Index>(free.size());
        Eigen::MatrixXd a(k, k);
        Eigen::VectorXd b(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            b[i] = -grad[free[i]];
            for (Eigen::Index j = 0; j < k; ++j) a(i, j) = lhs(free[i], free[j]);
        }
        const Eigen::VectorXd d = a.ldlt().solve(b);
        for (Eigen::Index i = 0; i < k; ++i) delta[free[i]] = d[i];
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!fixed[static_cast<std::size_t>(i)] && p[i] <= lower[i] && delta[i] < 0.0) {
                fixed[static_cast<std::size_t>(i)] = true;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return delta;
}

}  // namespace

Eigen::MatrixXd numeric_jacobian(const ResidualFn& residuals, const Eigen::VectorXd& p, const Eigen::VectorXd& scale,
                                 double rel_step) {
    Eigen::MatrixXd jac;
    Eigen::VectorXd probe = p;
    for (Eigen::Index j = 0; j < p.size(); ++j) {
        const double h = rel_step * std::max(std::abs(p[j]), scale[j]);
        probe[j] = p[j] + h;
        const Eigen::VectorXd up = residuals(probe);
        probe[j] = p[j] - h;
        const Eigen::VectorXd down = residuals(probe);
        probe[j] = p[j];
        if (j == 0) jac.resize(up.size(), p.size());
        jac.col(j) = (up - down) / (2.0 * h);
    }
    return jac;
}

LevMarResult levenberg_marquardt(const ResidualFn& residuals, Eigen::VectorXd p, Eigen::VectorXd scale,
                                 const LevMarOptions& opts, Eigen::VectorXd lower) {
    const Eigen::Index n = p.size();
    if (scale.size() != n) scale = Eigen::VectorXd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(scale[i] > 0.0)) scale[i] = std::abs(p[i]) > 0.0 ? std::abs(p[i]) : 1.0;
    }
    if (lower.size() != n) lower = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());

    LevMarResult result;
    result.hit_bound = clamp_to(p, lower);
    Eigen::VectorXd r = residuals(p);
    if (r.size() < n) throw InvalidInput("least squares needs at least as many residuals as parameters");
    if (!r.allFinite()) throw NumericFailure("residuals are not finite at the initial guess");
    double cost = r.squaredNorm();
    double damping = opts.initial_damping;

    int iter = 0;
    while (iter < opts.max_iterations && !result.converged) {
        ++iter;
        if (cost == 0.0) {
            result.converged = true;
            result.message = "exact fit";
            break;
        }
        // Columns are normalised before solving; parameters spanning many decades
        // otherwise make the normal equations numerically singular.
        const Eigen::MatrixXd jac = numeric_jacobian(residuals, p, scale, opts.jacobian_step);
        const Eigen::VectorXd col = column_scale(jac);
        const Eigen::MatrixXd js = jac * col.cwiseInverse().asDiagonal();
        const Eigen::MatrixXd jtj = js.transpose() * js;
        const Eigen::VectorXd grad = js.transpose() * r;
        Eigen::VectorXd diag = jtj.diagonal();
        for (Eigen::Index i = 0; i < n; ++i) diag[i] = std::max(diag[i], 1e-12);

        bool stepped = false;
        while (!stepped) {
            Eigen::MatrixXd lhs = jtj;
            lhs.diagonal() += damping * diag;
            const Eigen::VectorXd delta = bounded_step(lhs, grad, p, lower).cwiseQuotient(col);
            Eigen::VectorXd trial = p + delta;
            const bool clamped = clamp_to(trial, lower);
            const double rel_step = scaled_step(trial - p, p, scale);
            Eigen::VectorXd r_trial = residuals(trial);
            const double cost_trial = r_trial.allFinite() ? r_trial.squaredNorm() : std::numeric_limits<double>::infinity();
            if (cost_trial < cost) {
                const double rel_residual = (std::sqrt(cost) - std::sqrt(cost_trial)) / std::sqrt(cost);
                p = trial;
                r = std::move(r_trial);
                cost = cost_trial;
                result.hit_bound = result.hit_bound || clamped;
                damping = std::max(damping / 3.0, 1e-15);
                stepped = true;
                if (rel_step < opts.param_tol || rel_residual < opts.residual_tol) {
                    result.converged = true;
                    result.message = rel_step < opts.param_tol ? "parameter change below tolerance"
                                                               : "residual change below tolerance";
                }
            } else {
                // No decrease: a step already shorter than the tolerance means we sit at the minimum.
                if (rel_step < opts.param_tol) {
                    result.converged = true;
                    result.message = "no further decrease; step below tolerance";
                    break;
                }
                damping *= 4.0;
                if (damping > 1e20) {
                    result.message = "damping blew up without reducing the residual";
                    break;
                }
            }
        }
        if (!stepped && !result.converged) break;
    }
    if (!result.converged && result.message.empty()) result.message = "iteration limit reached";

    result.params = p;
    result.iterations = iter;
    result.residual_norm = std::sqrt(cost);

    const Eigen::MatrixXd jac = numeric_jacobian(residuals, p, scale, opts.jacobian_step);
    const Eigen::Index m = r.size();
    const double dof = m > n ? static_cast<double>(m - n) : 1.0;
    const Eigen::VectorXd col = column_scale(jac);
    const Eigen::MatrixXd js = jac * col.cwiseInverse().asDiagonal();
    const Eigen::MatrixXd inv = (js.transpose() * js).completeOrthogonalDecomposition().pseudoInverse();
    result.covariance = col.cwiseInverse().asDiagonal() * inv * col.cwiseInverse().asDiagonal() * (cost / dof);
    result.std_errors = result.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    return result;
}

}  // namespace mtload::numerics
