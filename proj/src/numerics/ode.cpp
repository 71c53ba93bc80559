#include "mtload/numerics/ode.hpp"

#include <algorithm>
#include <cmath>

#include "mtload/errors.hpp"

namespace mtload::numerics {
namespace {

// Dormand & Prince (1980) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat, the embedded error weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;

}  // namespace

double DormandPrince::error_norm(std::span<const double> err, std::span<const double> y0,
                                 std::span<const double> y1) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < err.size(); ++i) {
        const double scale = opts_.abs_tol + opts_.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double e = scale > 0.0 ? err[i] / scale : (err[i] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(err.size()));
}

double DormandPrince::initial_step(const OdeRhs& rhs, double t, std::span<const double> y,
                                   std::span<const double> f0, double span) const {
    if (opts_.initial_step > 0.0) return std::min(opts_.initial_step, span);
    // Hairer-Norsett-Wanner starting step heuristic, single probe.
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double sc = opts_.abs_tol + opts_.rel_tol * std::abs(y[i]);
        if (sc <= 0.0) continue;
        d0 += (y[i] / sc) * (y[i] / sc);
        d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    double h0 = (d0 < 1e-10 || d1 < 1e-10) ? 1e-6 * span : 0.01 * std::sqrt(d0 / d1);
    h0 = std::min(h0, span);
    std::vector<double> y1(y.size()), f1(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) y1[i] = y[i] + h0 * f0[i];
    rhs(t + h0, y1, f1);
    double d2 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double sc = opts_.abs_tol + opts_.rel_tol * std::abs(y[i]);
        if (sc <= 0.0) continue;
        d2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc);
    }
    d2 = std::sqrt(d2) / h0;
    const double dmax = std::max(std::sqrt(d1), d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
    return std::min({100.0 * h0, h1, span, opts_.max_step});
}

std::vector<std::vector<double>> DormandPrince::solve(const OdeRhs& rhs, double t0, std::vector<double> y,
                                                      std::span<const double> times) {
    stats_ = {};
    std::vector<std::vector<double>> out;
    out.reserve(times.size());
    if (times.empty()) return out;
    if (!std::is_sorted(times.begin(), times.end()) || times.front() < t0) {
        throw InvalidInput("output times must be ascending and not before t0");
    }

    const std::size_t n = y.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y_new(n), err(n);
    double t = t0;
    rhs(t, y, k1);
    stats_.rhs_evaluations = 1;
    const double total_span = times.back() - t0;
    double h = total_span > 0.0 ? initial_step(rhs, t, y, k1, total_span) : 0.0;
    ++stats_.rhs_evaluations;

    for (double target : times) {
        while (t < target) {
            if (stats_.accepted + stats_.rejected >= opts_.max_steps) {
                throw IntegrationFailure("ODE step budget exhausted", t, h);
            }
            h = std::min(h, opts_.max_step);
            double step = h;
            bool last = false;
            if (t + step >= target || target - (t + step) < 1e-12 * std::abs(target)) {
                step = target - t;
                last = true;
            }
            const double min_step = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0);
            if (h < min_step) throw IntegrationFailure("ODE step size underflow", t, h);

            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + step * a21 * k1[i];
            rhs(t + c2 * step, tmp, k2);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + step * (a31 * k1[i] + a32 * k2[i]);
            rhs(t + c3 * step, tmp, k3);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + step * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            rhs(t + c4 * step, tmp, k4);
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y[i] + step * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            rhs(t + c5 * step, tmp, k5);
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y[i] + step * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            rhs(t + step, tmp, k6);
            for (std::size_t i = 0; i < n; ++i)
                y_new[i] = y[i] + step * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
            rhs(t + step, y_new, k7);
            stats_.rhs_evaluations += 6;
            for (std::size_t i = 0; i < n; ++i)
                err[i] = step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

            const double en = error_norm(err, y, y_new);
            if (!std::isfinite(en)) {
                ++stats_.rejected;
                h = step * kMinFactor;
                continue;
            }
            const double factor =
                en == 0.0 ? kMaxFactor : std::clamp(kSafety * std::pow(en, -0.2), kMinFactor, kMaxFactor);
            if (en <= 1.0) {
                t = last ? target : t + step;
                y.swap(y_new);
                k1.swap(k7);  // first-same-as-last
                ++stats_.accepted;
                // A step shortened to land on an output time says little about the natural step.
                h = last ? std::max(h, step * factor) : step * factor;
            } else {
                ++stats_.rejected;
                h = step * std::min(1.0, factor);
            }
        }
        out.push_back(y);
    }
    return out;
}

}  // namespace mtload::numerics
