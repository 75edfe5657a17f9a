#pragma once

// Numerical linearization of a linearizable d-web: integrate the resolved
// compatibility system for (lambda1, lambda2) on a grid, assemble the flat
// connection, transport two coframes to flat coordinates (u, v) and measure
// how straight every foliation becomes in them. Double precision throughout.

#include "weblin/calculus.hpp"
#include "weblin/eval.hpp"
#include "weblin/invariants.hpp"

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace weblin {

class LinearizerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Grid {
    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    int nx = 41, ny = 41;

    double hx() const { return (x_hi - x_lo) / (nx - 1); }
    double hy() const { return (y_hi - y_lo) / (ny - 1); }
    double x(int i) const { return x_lo + i * hx(); }
    double y(int j) const { return y_lo + j * hy(); }
    double diameter() const;
    bool contains(double px, double py) const { return px >= x_lo && px <= x_hi && py >= y_lo && py <= y_hi; }
};

struct ScalarField {
    Grid grid;
    std::vector<double> values; // row-major, index j * nx + i

    explicit ScalarField(const Grid& g = {}) : grid(g), values(static_cast<std::size_t>(g.nx * g.ny), 0.0) {}
    double& at(int i, int j) { return values[static_cast<std::size_t>(j * grid.nx + i)]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(j * grid.nx + i)]; }
    /// Bicubic Lagrange interpolation on the 4x4 stencil around (px, py).
    double interpolate(double px, double py) const;
    double max_abs() const;
};

struct LinearizerOptions {
    int grid = 41;
    std::optional<std::array<double, 2>> base;     // snapped to the nearest node; default centre
    std::array<double, 2> lambda0{0.0, 0.0};
    std::map<std::string, double> params;          // values for free parameters
    std::optional<Domain> rectangle;               // defaults to the web domain
    int leaves = 7;
    bool force = false;                            // run on non-flat input (negative controls)
    unsigned threads = 0;
    double blowup = 1e12;
};

/// H, K, mu and its frame derivatives plus f_x, f_y, compiled once and
/// evaluated in double precision.
class CoefficientField {
public:
    struct Values {
        double fx, fy, H, K, mu, mu1, mu2;
    };

    CoefficientField(const WebSpec& web, const std::map<std::string, double>& params);
    Values at(double x, double y) const;

private:
    Program program_;
    std::vector<double> symbols_;
};

struct LambdaFields {
    ScalarField lambda1, lambda2;         // x-then-y sweep
    ScalarField lambda1_alt, lambda2_alt; // y-then-x sweep
    double path_discrepancy = 0;          // max |difference| over nodes
    int base_i = 0, base_j = 0;
    std::array<double, 2> lambda0{0.0, 0.0};
};

LambdaFields integrate_lambda(const WebSpec& web, const Grid& grid, const LinearizerOptions& options);

struct ConnectionField {
    Grid grid;
    int base_i = 0, base_j = 0;
    ScalarField lambda1, lambda2;
    ScalarField fx, fy, H, K, mu, mu1, mu2;
    /// ∇_i ω_j = c[i][j][0] ω1 + c[i][j][1] ω2  (i, j in {0, 1}), per node.
    std::vector<std::array<std::array<std::array<double, 2>, 2>, 2>> nabla;
    /// T12^2 = lambda1, T12^1 = lambda2, T11^1 = 2 lambda1 + mu, T22^2 = 2 lambda2 - mu.
    ScalarField T12_2, T12_1, T11_1, T22_2;
};

ConnectionField build_connection(const LambdaFields& lambda, const WebSpec& web, const LinearizerOptions& options);

/// Max over nodes of the four curvature coefficients, lambda derivatives by
/// fourth-order finite differences (one-sided at the border).
double flatness_residual(const ConnectionField& conn);
/// Per-node max of the four curvature coefficients.
ScalarField flatness_field(const ConnectionField& conn);

struct FoliationStraightness {
    std::string name;    // "x", "y", "f", "g4", ...
    double residual = 0; // max over traced leaves
    int traced = 0;
    int skipped = 0;
    std::vector<std::vector<std::array<double, 2>>> leaves_xy;
    std::vector<std::vector<std::array<double, 2>>> leaves_uv;
};

struct LinearizationResult {
    Grid grid;
    ScalarField u, v;
    std::array<double, 2> base{0, 0};
    std::array<double, 2> lambda0{0, 0};
    double flatness_residual = 0;
    double path_independence_residual = 0;
    double closedness_residual = 0; // max finite-difference curl of θ1, θ2
    double min_jacobian = 0;        // min |det d(u, v)/d(x, y)|
    std::vector<FoliationStraightness> straightness;
    std::vector<std::string> warnings;
};

/// Transports θ1 = dx, θ2 = dy (at the base) with the flat connection along
/// the x-then-y sweep and integrates them to potentials u, v.
LinearizationResult flat_coordinates(const ConnectionField& conn, const WebSpec& web, const LinearizerOptions& options);

/// Straightness of every foliation (x, y, f, g_4, ...) in the coordinates of
/// `result`. An optional affine map is applied to (u, v) first.
std::vector<FoliationStraightness> straightness_report(const LinearizationResult& result, const WebSpec& web, int leaves_per_foliation,
                                                       const LinearizerOptions& options,
                                                       const std::array<double, 6>* affine = nullptr);

/// Throws unless the verdict is YES or force is set.
void require_linearizable(Outcome verdict, bool force);

/// Full pipeline. Throws LinearizerError on divergence, singular coordinates,
/// or non-flat input without options.force. A coframe that fails the closedness
/// check only adds a warning.
LinearizationResult linearize(const WebSpec& web, const LinearizerOptions& options);

/// Total least squares line fit: max perpendicular distance / extent along the line.
double line_fit_residual(const std::vector<std::array<double, 2>>& points);

/// Two-panel SVG: leaves in (x, y) and their images in (u, v).
std::string render_svg(const LinearizationResult& result);

} // namespace weblin
