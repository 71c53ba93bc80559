#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature and a spherical-coordinate
// driver for integrals over all of R^3.

#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <vector>

namespace mtload::numerics {

struct QuadratureOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    int max_intervals = 4000;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    long evaluations = 0;
    bool converged = false;
};

namespace detail {

// Kronrod abscissae x_k (k odd are Gauss-Legendre 7-point nodes), positive half incl. 0.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

template <class F>
Interval gauss_kronrod_15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double fsum = f(center - dx) + f(center + dx);
        kronrod += kWgk[j] * fsum;
        if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

// Bisects the interval with the largest error estimate until the summed estimate
// meets max(abs_tol, rel_tol * |I|). The subdivision order depends only on f, so
// results are reproducible.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, const QuadratureOptions& opts = {}) {
    QuadratureResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    std::priority_queue<detail::Interval> heap;
    auto first = detail::gauss_kronrod_15(f, a, b);
    out.evaluations = 15;
    double total = first.value;
    double error = first.error;
    heap.push(first);
    int intervals = 1;
    while (error > std::max(opts.abs_tol, opts.rel_tol * std::abs(total)) && intervals < opts.max_intervals) {
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        auto left = detail::gauss_kronrod_15(f, worst.a, mid);
        auto right = detail::gauss_kronrod_15(f, mid, worst.b);
        out.evaluations += 30;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++intervals;
    }
    // Re-sum from the leaves to shed the round-off accumulated by the running updates.
    total = 0.0;
    error = 0.0;
    std::vector<detail::Interval> leaves;
    leaves.reserve(heap.size());
    while (!heap.empty()) {
        leaves.push_back(heap.top());
        heap.pop();
    }
    for (auto it = leaves.rbegin(); it != leaves.rend(); ++it) {
        total += it->value;
        error += it->error;
    }
    out.value = total;
    out.error = error;
    out.converged = error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
    return out;
}

// Integrates f(x, y, z) over R^3 in spherical coordinates with the polar axis on y
// (the gravity axis): y = r u, x = r sqrt(1-u^2) cos(phi), z = r sqrt(1-u^2) sin(phi).
// The radius is mapped onto [0, 1) by r = L t / (1 - t); choose L near the decay length
// of f. Inner integrals run at a tenth of the requested tolerance.
template <class F>
QuadratureResult integrate_space(F&& f, double length_scale, const QuadratureOptions& opts = {}) {
    QuadratureOptions inner = opts;
    inner.rel_tol = opts.rel_tol * 0.1;
    inner.abs_tol = 0.0;
    long evaluations = 0;
    bool converged = true;

    auto over_phi = [&](double phi) {
        const double cp = std::cos(phi);
        const double sp = std::sin(phi);
        auto over_u = [&](double u) {
            const double st = std::sqrt(std::max(0.0, 1.0 - u * u));
            auto over_t = [&](double t) {
                const double one_minus = 1.0 - t;
                const double r = length_scale * t / one_minus;
                const double jac = length_scale / (one_minus * one_minus);
                return r * r * jac * f(r * st * cp, r * u, r * st * sp);
            };
            auto res = integrate_adaptive(over_t, 0.0, 1.0, inner);
            evaluations += res.evaluations;
            converged = converged && res.converged;
            return res.value;
        };
        auto res = integrate_adaptive(over_u, -1.0, 1.0, inner);
        converged = converged && res.converged;
        return res.value;
    };
    auto res = integrate_adaptive(over_phi, 0.0, 2.0 * std::numbers::pi, opts);
    res.evaluations = evaluations;
    res.converged = res.converged && converged;
    return res;
}

}  // namespace mtload::numerics
