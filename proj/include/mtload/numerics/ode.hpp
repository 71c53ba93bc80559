#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace mtload::numerics {

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct OdeOptions {
    double rel_tol = 1e-9;
    double abs_tol = 0.0;  // per component; 0 means pure relative control
    double initial_step = 0.0;  // 0 picks a step from the derivative scale
    double max_step = std::numeric_limits<double>::infinity();
    long max_steps = 1'000'000;
};

struct OdeStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evaluations = 0;
};

// Explicit Dormand-Prince 5(4) with local extrapolation and a standard
// step-size controller. Hits every requested output time exactly.
class DormandPrince {
public:
    explicit DormandPrince(OdeOptions opts = {}) : opts_(opts) {}

    // Advances y from t0 through each entry of `times` (ascending, >= t0), returning
    // the state at each. Throws IntegrationFailure when the step underflows.
    std::vector<std::vector<double>> solve(const OdeRhs& rhs, double t0, std::vector<double> y0,
                                           std::span<const double> times);

    const OdeStats& stats() const { return stats_; }

private:
    double initial_step(const OdeRhs& rhs, double t, std::span<const double> y, std::span<const double> f0,
                        double span) const;
    double error_norm(std::span<const double> err, std::span<const double> y0, std::span<const double> y1) const;

    OdeOptions opts_;
    OdeStats stats_;
};

}  // namespace mtload::numerics
