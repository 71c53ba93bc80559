#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mtload/cloud.hpp"
#include "mtload/errors.hpp"
#include "mtload/numerics/levmar.hpp"
#include "mtload/species.hpp"

namespace mtload {

// (x, y) samples with optional per-point uncertainties (empty when absent).
struct SampleSeries {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> uncertainty;

    std::size_t size() const { return x.size(); }
    bool weighted() const { return !uncertainty.empty(); }
    // Throws InvalidInput on mismatched sizes, non-positive uncertainties, or
    // (when strictly_increasing) non-increasing x.
    void validate(bool strictly_increasing) const;
};

struct FitParameter {
    std::string name;
    double value = 0.0;
    double std_error = 0.0;
    std::string unit;
};

struct FitResult {
    std::vector<FitParameter> parameters;  // estimated
    std::vector<FitParameter> derived;     // computed from the estimates
    Eigen::MatrixXd covariance;
    double residual_norm = 0.0;
    bool converged = false;
    int iterations = 0;
    bool low_confidence = false;
    std::vector<std::string> notes;

    const FitParameter& get(const std::string& name) const;
    double value(const std::string& name) const { return get(name).value; }
    double error(const std::string& name) const { return get(name).std_error; }
};

// Carries the best iterate of a fit that did not converge.
class FitFailure : public NumericFailure {
public:
    FitFailure(const std::string& what, FitResult best) : NumericFailure(what), best_iterate(std::move(best)) {}
    FitResult best_iterate;
};

class GravityAxisMisidentified : public NumericFailure {
public:
    using NumericFailure::NumericFailure;
};

struct LoadingFitOptions {
    numerics::LevMarOptions levmar;
    // Without explicit uncertainties, residuals are taken relative to the model
    // (floored at 1% of N0), matching signal-proportional counting noise.
    // false gives plain unweighted least squares.
    bool relative_noise = true;
};

// N(t) = N0 (1 - exp(-t / tau)); derived R = N0 / tau.
FitResult fit_loading_curve(const SampleSeries& data, const LoadingFitOptions& opts = {});

// Straight line y = slope x + intercept by (weighted) least squares.
FitResult fit_linear(const SampleSeries& data);

// Line fit for data with noise proportional to the signal: starts unweighted, then
// refits `passes` times with uncertainties proportional to the previous fitted line.
// Explicit uncertainties in `data` are ignored.
FitResult fit_linear_proportional(const SampleSeries& data, int passes = 3);

enum class ImageMode {
    ColumnAlongZ,  // integrated along the coil axis; image axes (x, y)
    ColumnAlongX,  // integrated along a radial axis; image axes (z, y)
    SliceZ0,       // density in the z = 0 plane; image axes (x, y)
};

// Row-major image; rows run along the vertical (gravity) axis y.
struct DensityImage {
    ImageMode mode = ImageMode::ColumnAlongZ;
    int cols = 0;
    int rows = 0;
    double pitch = 0.0;      // m
    double u_origin = 0.0;   // horizontal coordinate of column 0
    double y_origin = 0.0;   // vertical coordinate of row 0
    std::vector<double> values;

    double u(int col) const { return u_origin + col * pitch; }
    double y(int row) const { return y_origin + row * pitch; }
    double at(int row, int col) const { return values[static_cast<std::size_t>(row) * cols + col]; }
    void validate() const;
};

// Closed-form forward model of one image pixel for (n0, B, G).
double image_model(ImageMode mode, double n0, double shape_b, double shape_g, double u, double y);

// Fits (n0, B, G); derives T = m g / (k_B G) and mu_bar = 2 m g B / (b G).
FitResult fit_density_image(const DensityImage& image, const QuadrupoleField& field, const SpeciesData& species,
                            const numerics::LevMarOptions& opts = {});

struct TwoBodyFitOptions {
    numerics::LevMarOptions levmar;
    // Fixing the initial density to the first sample gives a strict one-parameter
    // fit; the default also fits the initial density.
    bool fix_initial_density = false;
    bool sensitivity_check = true;  // refit with t0 * 0.5 and t0 * 1.5
};

// Fits beta by integrating dn0/dt = -n0/t0 - beta n0^2 - (n0/V) dV/dt through the
// density samples, with V(t) from a linear fit to the volume samples.
FitResult fit_two_body_loss(const SampleSeries& density, double t0, const SampleSeries& volume,
                            const TwoBodyFitOptions& opts = {});

}  // namespace mtload
