#include "weblin/linearizer.hpp"

#include "weblin/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace weblin {

double Grid::diameter() const { return std::hypot(x_hi - x_lo, y_hi - y_lo); }

namespace {

// Lagrange weights of the 4-point stencil starting at node k for coordinate s
// measured in grid units.
std::array<double, 4> cubic_weights(double s, int k)
{
    std::array<double, 4> w{};
    for (int a = 0; a < 4; ++a) {
        double num = 1, den = 1;
        for (int b = 0; b < 4; ++b) {
            if (a == b) continue;
            num *= s - (k + b);
            den *= a - b;
        }
        w[static_cast<std::size_t>(a)] = num / den;
    }
    return w;
}

int stencil_start(double s, int n)
{
    int k = static_cast<int>(std::floor(s)) - 1;
    return std::clamp(k, 0, n - 4);
}

} // namespace

double ScalarField::interpolate(double px, double py) const
{
    const double sx = (px - grid.x_lo) / grid.hx();
    const double sy = (py - grid.y_lo) / grid.hy();
    const int kx = stencil_start(sx, grid.nx), ky = stencil_start(sy, grid.ny);
    const auto wx = cubic_weights(sx, kx), wy = cubic_weights(sy, ky);
    double sum = 0;
    for (int b = 0; b < 4; ++b) {
        double row = 0;
        for (int a = 0; a < 4; ++a) row += wx[static_cast<std::size_t>(a)] * at(kx + a, ky + b);
        sum += wy[static_cast<std::size_t>(b)] * row;
    }
    return sum;
}

double ScalarField::max_abs() const
{
    double m = 0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> symbol_values(const Program& program, const std::map<std::string, double>& params)
{
    std::vector<double> values(program.symbols().size(), 0.0);
    for (std::size_t k = 2; k < values.size(); ++k) {
        auto it = params.find(program.symbols()[k]);
        if (it == params.end()) throw LinearizerError("parameter '" + program.symbols()[k] + "' needs a value");
        values[k] = it->second;
    }
    return values;
}

std::string point_text(double x, double y)
{
    std::ostringstream os;
    os << std::setprecision(6) << "(" << x << ", " << y << ")";
    return os.str();
}

} // namespace

CoefficientField::CoefficientField(const WebSpec& web, const std::map<std::string, double>& params)
    : program_([&] {
          const Expr m = mu(web, 4);
          return std::vector<Expr>{partial(web.f, Var::x), partial(web.f, Var::y), web_H(web), web_K(web), m, d1(m, web), d2(m, web)};
      }())
{
    symbols_ = symbol_values(program_, params);
}

CoefficientField::Values CoefficientField::at(double x, double y) const
{
    std::vector<double> s = symbols_;
    s[0] = x;
    s[1] = y;
    std::array<double, 7> out{};
    if (!program_.run_double(s, out)) throw LinearizerError("coefficients singular at " + point_text(x, y));
    return {out[0], out[1], out[2], out[3], out[4], out[5], out[6]};
}

namespace {

using Coeffs = CoefficientField::Values;

// ∂_1 and ∂_2 of (lambda1, lambda2) from the resolved compatibility system.
std::array<double, 2> frame1(const Coeffs& c, double l1, double l2)
{
    return {l1 * (c.H + l1 + c.mu), -c.K / 3 + c.H * (l2 - c.mu / 3) + l1 * l2 + 2 * c.mu1 / 3 - c.mu2 / 3};
}

std::array<double, 2> frame2(const Coeffs& c, double l1, double l2)
{
    return {c.K / 3 + c.H * (l1 + c.mu / 3) + l1 * l2 + c.mu1 / 3 - 2 * c.mu2 / 3, l2 * (c.H + l2 - c.mu)};
}

enum class Axis { x, y };

// State: lambda1, lambda2, then (p, q, potential) for each transported coframe.
template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
State<N> derivative(const Coeffs& c, const State<N>& s, Axis axis)
{
    State<N> d{};
    const double l1 = s[0], l2 = s[1];
    if (axis == Axis::x) {
        const auto f = frame1(c, l1, l2);
        d[0] = -c.fx * f[0];
        d[1] = -c.fx * f[1];
        for (std::size_t k = 2; k + 2 < N; k += 3) {
            const double p = s[k], q = s[k + 1];
            d[k] = -c.fx * (p * (2 * l1 + c.mu + c.H));
            d[k + 1] = -c.fx * (p * l2 + q * (l1 + c.H));
            d[k + 2] = -p * c.fx;
        }
    } else {
        const auto f = frame2(c, l1, l2);
        d[0] = -c.fy * f[0];
        d[1] = -c.fy * f[1];
        for (std::size_t k = 2; k + 2 < N; k += 3) {
            const double p = s[k], q = s[k + 1];
            d[k] = -c.fy * (p * (l2 + c.H) + q * l1);
            d[k + 1] = -c.fy * (q * (2 * l2 - c.mu + c.H));
            d[k + 2] = -q * c.fy;
        }
    }
    return d;
}

template <std::size_t N>
State<N> axpy(const State<N>& s, double h, const State<N>& d)
{
    State<N> out;
    for (std::size_t k = 0; k < N; ++k) out[k] = s[k] + h * d[k];
    return out;
}

// One classical Runge-Kutta step from (x, y) along `axis` by h.
template <std::size_t N>
State<N> rk4_step(const CoefficientField& field, double x, double y, const State<N>& s, double h, Axis axis)
{
    auto at = [&](double t) { return axis == Axis::x ? field.at(x + t, y) : field.at(x, y + t); };
    const Coeffs c0 = at(0), cm = at(h / 2), c1 = at(h);
    const State<N> k1 = derivative(c0, s, axis);
    const State<N> k2 = derivative(cm, axpy(s, h / 2, k1), axis);
    const State<N> k3 = derivative(cm, axpy(s, h / 2, k2), axis);
    const State<N> k4 = derivative(c1, axpy(s, h, k3), axis);
    State<N> out;
    for (std::size_t k = 0; k < N; ++k) out[k] = s[k] + h / 6 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
    return out;
}

template <std::size_t N>
void check_finite(const State<N>& s, double bound, double x, double y)
{
    for (double v : s)
        if (!std::isfinite(v) || std::fabs(v) > bound)
            throw LinearizerError("Frobenius integration diverged near " + point_text(x, y) + "; shrink grid");
}

// Two-stage sweep from the base node: first along `first` through the base,
// then along the other axis from every node of that line.
template <std::size_t N>
std::vector<State<N>> sweep(const CoefficientField& field, const Grid& grid, int bi, int bj, const State<N>& start, Axis first,
                            const LinearizerOptions& options)
{
    std::vector<State<N>> out(static_cast<std::size_t>(grid.nx * grid.ny));
    auto idx = [&](int i, int j) { return static_cast<std::size_t>(j * grid.nx + i); };
    auto run_line = [&](int i0, int j0, Axis axis, int dir) {
        int i = i0, j = j0;
        State<N> s = out[idx(i, j)];
        for (;;) {
            const int ni = axis == Axis::x ? i + dir : i, nj = axis == Axis::y ? j + dir : j;
            if (ni < 0 || nj < 0 || ni >= grid.nx || nj >= grid.ny) break;
            const double h = dir * (axis == Axis::x ? grid.hx() : grid.hy());
            s = rk4_step<N>(field, grid.x(i), grid.y(j), s, h, axis);
            check_finite(s, options.blowup, grid.x(ni), grid.y(nj));
            i = ni;
            j = nj;
            out[idx(i, j)] = s;
        }
    };
    out[idx(bi, bj)] = start;
    run_line(bi, bj, first, +1);
    run_line(bi, bj, first, -1);
    const Axis second = first == Axis::x ? Axis::y : Axis::x;
    const int count = first == Axis::x ? grid.nx : grid.ny;
    std::vector<std::string> errors(static_cast<std::size_t>(count));
    parallel_for(static_cast<std::size_t>(count), options.threads, [&](std::size_t k) {
        const int i = first == Axis::x ? static_cast<int>(k) : bi;
        const int j = first == Axis::x ? bj : static_cast<int>(k);
        try {
            run_line(i, j, second, +1);
            run_line(i, j, second, -1);
        } catch (const std::exception& err) {
            errors[k] = err.what();
        }
    });
    for (auto& e : errors)
        if (!e.empty()) throw LinearizerError(e);
    return out;
}

std::pair<int, int> base_node(const Grid& grid, const LinearizerOptions& options)
{
    if (!options.base) return {grid.nx / 2, grid.ny / 2};
    const auto [bx, by] = *options.base;
    if (!grid.contains(bx, by)) throw LinearizerError("base point " + point_text(bx, by) + " is outside the grid");
    const int i = static_cast<int>(std::lround((bx - grid.x_lo) / grid.hx()));
    const int j = static_cast<int>(std::lround((by - grid.y_lo) / grid.hy()));
    return {std::clamp(i, 0, grid.nx - 1), std::clamp(j, 0, grid.ny - 1)};
}

Grid make_grid(const WebSpec& web, const LinearizerOptions& options)
{
    if (options.grid < 5) throw LinearizerError("grid needs at least 5 nodes per side");
    const Domain d = options.rectangle.value_or(web.domain);
    Grid g;
    g.x_lo = d.x_lo.get_d();
    g.x_hi = d.x_hi.get_d();
    g.y_lo = d.y_lo.get_d();
    g.y_hi = d.y_hi.get_d();
    g.nx = g.ny = options.grid;
    return g;
}

// Fourth-order first derivative along one grid direction.
double fd(const ScalarField& f, int i, int j, Axis axis)
{
    const int n = axis == Axis::x ? f.grid.nx : f.grid.ny;
    const int k = axis == Axis::x ? i : j;
    const double h = axis == Axis::x ? f.grid.hx() : f.grid.hy();
    auto v = [&](int m) { return axis == Axis::x ? f.at(m, j) : f.at(i, m); };
    if (k >= 2 && k <= n - 3) return (v(k - 2) - 8 * v(k - 1) + 8 * v(k + 1) - v(k + 2)) / (12 * h);
    if (k == 0) return (-25 * v(0) + 48 * v(1) - 36 * v(2) + 16 * v(3) - 3 * v(4)) / (12 * h);
    if (k == 1) return (-3 * v(0) - 10 * v(1) + 18 * v(2) - 6 * v(3) + v(4)) / (12 * h);
    if (k == n - 1) return (25 * v(n - 1) - 48 * v(n - 2) + 36 * v(n - 3) - 16 * v(n - 4) + 3 * v(n - 5)) / (12 * h);
    return (3 * v(n - 1) + 10 * v(n - 2) - 18 * v(n - 3) + 6 * v(n - 4) - v(n - 5)) / (12 * h);
}

} // namespace

LambdaFields integrate_lambda(const WebSpec& web, const Grid& grid, const LinearizerOptions& options)
{
    const CoefficientField field(web, options.params);
    const auto [bi, bj] = base_node(grid, options);
    const State<2> start{options.lambda0[0], options.lambda0[1]};
    const auto a = sweep<2>(field, grid, bi, bj, start, Axis::x, options);
    const auto b = sweep<2>(field, grid, bi, bj, start, Axis::y, options);
    LambdaFields out{ScalarField(grid), ScalarField(grid), ScalarField(grid), ScalarField(grid)};
    out.base_i = bi;
    out.base_j = bj;
    out.lambda0 = options.lambda0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        out.lambda1.values[k] = a[k][0];
        out.lambda2.values[k] = a[k][1];
        out.lambda1_alt.values[k] = b[k][0];
        out.lambda2_alt.values[k] = b[k][1];
        out.path_discrepancy = std::max({out.path_discrepancy, std::fabs(a[k][0] - b[k][0]), std::fabs(a[k][1] - b[k][1])});
    }
    return out;
}

ConnectionField build_connection(const LambdaFields& lambda, const WebSpec& web, const LinearizerOptions& options)
{
    const Grid& grid = lambda.lambda1.grid;
    const CoefficientField field(web, options.params);
    ConnectionField conn;
    conn.grid = grid;
    conn.base_i = lambda.base_i;
    conn.base_j = lambda.base_j;
    conn.lambda1 = lambda.lambda1;
    conn.lambda2 = lambda.lambda2;
    for (ScalarField* s : {&conn.fx, &conn.fy, &conn.H, &conn.K, &conn.mu, &conn.mu1, &conn.mu2, &conn.T12_2, &conn.T12_1, &conn.T11_1, &conn.T22_2})
        *s = ScalarField(grid);
    conn.nabla.resize(static_cast<std::size_t>(grid.nx * grid.ny));
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const Coeffs c = field.at(grid.x(i), grid.y(j));
            const double l1 = lambda.lambda1.at(i, j), l2 = lambda.lambda2.at(i, j);
            conn.fx.at(i, j) = c.fx;
            conn.fy.at(i, j) = c.fy;
            conn.H.at(i, j) = c.H;
            conn.K.at(i, j) = c.K;
            conn.mu.at(i, j) = c.mu;
            conn.mu1.at(i, j) = c.mu1;
            conn.mu2.at(i, j) = c.mu2;
            conn.T12_2.at(i, j) = l1;
            conn.T12_1.at(i, j) = l2;
            conn.T11_1.at(i, j) = 2 * l1 + c.mu;
            conn.T22_2.at(i, j) = 2 * l2 - c.mu;
            auto& n = conn.nabla[static_cast<std::size_t>(j * grid.nx + i)];
            n[0][0] = {-(2 * l1 + c.mu + c.H), -l2};
            n[0][1] = {0.0, -(l1 + c.H)};
            n[1][0] = {-(l2 + c.H), 0.0};
            n[1][1] = {-l1, -(2 * l2 - c.mu + c.H)};
        }
    }
    return conn;
}

ScalarField flatness_field(const ConnectionField& conn)
{
    const Grid& grid = conn.grid;
    ScalarField out(grid);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const double fx = conn.fx.at(i, j), fy = conn.fy.at(i, j);
            const double H = conn.H.at(i, j), K = conn.K.at(i, j), m = conn.mu.at(i, j);
            const double m1 = conn.mu1.at(i, j), m2 = conn.mu2.at(i, j);
            const double l1 = conn.lambda1.at(i, j), l2 = conn.lambda2.at(i, j);
            const double d1l1 = -fd(conn.lambda1, i, j, Axis::x) / fx, d1l2 = -fd(conn.lambda2, i, j, Axis::x) / fx;
            const double d2l1 = -fd(conn.lambda1, i, j, Axis::y) / fy, d2l2 = -fd(conn.lambda2, i, j, Axis::y) / fy;
            const double r1a = 2 * d2l1 - d1l2 + m2 - H * (2 * l1 - l2 + m) - l1 * l2 - K;
            const double r1b = d2l2 + l2 * (-H - l2 + m);
            const double r2a = -d1l1 + l1 * (H + l1 + m);
            const double r2b = d2l1 - 2 * d1l2 + m1 - H * (l1 - 2 * l2 + m) + l1 * l2 - K;
            out.at(i, j) = std::max({std::fabs(r1a), std::fabs(r1b), std::fabs(r2a), std::fabs(r2b)});
        }
    }
    return out;
}

double flatness_residual(const ConnectionField& conn) { return flatness_field(conn).max_abs(); }

LinearizationResult flat_coordinates(const ConnectionField& conn, const WebSpec& web, const LinearizerOptions& options)
{
    const Grid& grid = conn.grid;
    const CoefficientField field(web, options.params);
    const int bi = conn.base_i, bj = conn.base_j;
    const double fxb = conn.fx.at(bi, bj), fyb = conn.fy.at(bi, bj);
    // θ1 = dx and θ2 = dy at the base: θ = p ω1 + q ω2 with ω1 = -f_x dx, ω2 = -f_y dy
    const State<8> start{conn.lambda1.at(bi, bj), conn.lambda2.at(bi, bj), -1 / fxb, 0.0, 0.0, 0.0, -1 / fyb, 0.0};
    const auto s = sweep<8>(field, grid, bi, bj, start, Axis::x, options);

    LinearizationResult r;
    r.grid = grid;
    r.base = {grid.x(bi), grid.y(bj)};
    r.u = ScalarField(grid);
    r.v = ScalarField(grid);
    ScalarField t1x(grid), t1y(grid), t2x(grid), t2y(grid);
    double lambda_mismatch = 0;
    r.min_jacobian = std::numeric_limits<double>::infinity();
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const auto& st = s[static_cast<std::size_t>(j * grid.nx + i)];
            const double fx = conn.fx.at(i, j), fy = conn.fy.at(i, j);
            lambda_mismatch = std::max({lambda_mismatch, std::fabs(st[0] - conn.lambda1.at(i, j)), std::fabs(st[1] - conn.lambda2.at(i, j))});
            t1x.at(i, j) = -st[2] * fx;
            t1y.at(i, j) = -st[3] * fy;
            t2x.at(i, j) = -st[5] * fx;
            t2y.at(i, j) = -st[6] * fy;
            r.u.at(i, j) = st[4];
            r.v.at(i, j) = st[7];
            r.min_jacobian = std::min(r.min_jacobian, std::fabs(t1x.at(i, j) * t2y.at(i, j) - t1y.at(i, j) * t2x.at(i, j)));
        }
    }
    if (lambda_mismatch > 1e-12) r.warnings.push_back("connection lambda differs from the transported lambda by " + std::to_string(lambda_mismatch));
    if (r.min_jacobian < 1e-8) throw LinearizerError("coordinate map singular on grid");

    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const double c1 = fd(t1x, i, j, Axis::y) - fd(t1y, i, j, Axis::x);
            const double c2 = fd(t2x, i, j, Axis::y) - fd(t2y, i, j, Axis::x);
            r.closedness_residual = std::max({r.closedness_residual, std::fabs(c1), std::fabs(c2)});
        }
    if (r.closedness_residual > 1e-4 * grid.diameter()) {
        std::ostringstream msg;
        msg << "transported coframe is not closed: curl " << r.closedness_residual << " exceeds " << 1e-4 * grid.diameter();
        r.warnings.push_back(msg.str());
    }
    return r;
}

// ---------------------------------------------------------------------------
// Straightness

double line_fit_residual(const std::vector<std::array<double, 2>>& pts)
{
    if (pts.size() < 2) return 0;
    double mx = 0, my = 0;
    for (auto& p : pts) {
        mx += p[0];
        my += p[1];
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxx = 0, sxy = 0, syy = 0;
    for (auto& p : pts) {
        const double dx = p[0] - mx, dy = p[1] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    const double theta = 0.5 * std::atan2(2 * sxy, sxx - syy);
    const double cx = std::cos(theta), cy = std::sin(theta);
    double worst = 0, tmin = std::numeric_limits<double>::infinity(), tmax = -tmin;
    for (auto& p : pts) {
        const double dx = p[0] - mx, dy = p[1] - my;
        worst = std::max(worst, std::fabs(-cy * dx + cx * dy));
        const double t = cx * dx + cy * dy;
        tmin = std::min(tmin, t);
        tmax = std::max(tmax, t);
    }
    const double extent = tmax - tmin;
    return extent > 0 ? worst / extent : 0;
}

namespace {

struct Foliation {
    std::string name;
    Program program; // phi, phi_x, phi_y
    std::vector<double> symbols;
};

std::vector<Foliation> foliations(const WebSpec& web, const std::map<std::string, double>& params)
{
    std::vector<std::pair<std::string, Expr>> list{{"x", var_x()}, {"y", var_y()}, {"f", web.f}};
    for (int alpha = 4; alpha <= web.d(); ++alpha) list.emplace_back("g" + std::to_string(alpha), web.g(alpha));
    std::vector<Foliation> out;
    for (auto& [name, phi] : list) {
        Program prog({phi, partial(phi, Var::x), partial(phi, Var::y)});
        auto symbols = symbol_values(prog, params);
        out.push_back({name, std::move(prog), std::move(symbols)});
    }
    return out;
}

bool eval_phi(const Foliation& fol, double x, double y, std::array<double, 3>& out)
{
    std::vector<double> s = fol.symbols;
    s[0] = x;
    s[1] = y;
    return fol.program.run_double(s, out) && (out[1] != 0 || out[2] != 0);
}

std::vector<std::array<double, 2>> trace_leaf(const Foliation& fol, const Grid& grid, double sx, double sy)
{
    std::array<double, 3> v{};
    if (!eval_phi(fol, sx, sy, v)) return {};
    const double level = v[0];
    const double ds = 0.5 * std::min(grid.hx(), grid.hy());
    const int max_steps = static_cast<int>(8 * ((grid.x_hi - grid.x_lo) + (grid.y_hi - grid.y_lo)) / ds);
    auto tangent = [&](double x, double y, std::array<double, 2>& t) {
        std::array<double, 3> w{};
        if (!eval_phi(fol, x, y, w)) return false;
        const double n = std::hypot(w[1], w[2]);
        t = {w[2] / n, -w[1] / n};
        return true;
    };
    std::vector<std::array<double, 2>> half[2];
    for (int side = 0; side < 2; ++side) {
        const double sgn = side == 0 ? 1.0 : -1.0;
        double x = sx, y = sy;
        for (int step = 0; step < max_steps; ++step) {
            std::array<double, 2> k1{}, k2{}, k3{}, k4{};
            if (!tangent(x, y, k1) || !tangent(x + sgn * ds / 2 * k1[0], y + sgn * ds / 2 * k1[1], k2) ||
                !tangent(x + sgn * ds / 2 * k2[0], y + sgn * ds / 2 * k2[1], k3) || !tangent(x + sgn * ds * k3[0], y + sgn * ds * k3[1], k4))
                break;
            double nx = x + sgn * ds / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
            double ny = y + sgn * ds / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
            bool ok = true;
            for (int it = 0; it < 3 && ok; ++it) {
                std::array<double, 3> w{};
                if (!eval_phi(fol, nx, ny, w)) {
                    ok = false;
                    break;
                }
                const double g2 = w[1] * w[1] + w[2] * w[2];
                nx -= (w[0] - level) * w[1] / g2;
                ny -= (w[0] - level) * w[2] / g2;
            }
            if (!ok || !grid.contains(nx, ny)) break;
            x = nx;
            y = ny;
            half[side].push_back({x, y});
        }
    }
    std::vector<std::array<double, 2>> pts(half[1].rbegin(), half[1].rend());
    pts.push_back({sx, sy});
    pts.insert(pts.end(), half[0].begin(), half[0].end());
    return pts;
}

} // namespace

std::vector<FoliationStraightness> straightness_report(const LinearizationResult& result, const WebSpec& web, int leaves_per_foliation,
                                                       const LinearizerOptions& options, const std::array<double, 6>* affine)
{
    const Grid& grid = result.grid;
    const auto fols = foliations(web, options.params);
    std::vector<FoliationStraightness> out(fols.size());
    const double cx = 0.5 * (grid.x_lo + grid.x_hi), cy = 0.5 * (grid.y_lo + grid.y_hi);
    const double reach = 0.45 * std::min(grid.x_hi - grid.x_lo, grid.y_hi - grid.y_lo);

    parallel_for(fols.size(), options.threads, [&](std::size_t k) {
        const Foliation& fol = fols[k];
        FoliationStraightness& rep = out[k];
        rep.name = fol.name;
        std::array<double, 3> w{};
        if (!eval_phi(fol, cx, cy, w)) {
            rep.skipped = leaves_per_foliation;
            return;
        }
        const double n = std::hypot(w[1], w[2]);
        const double dx = w[1] / n, dy = w[2] / n;
        for (int m = 0; m < leaves_per_foliation; ++m) {
            const double t = leaves_per_foliation == 1 ? 0.0 : reach * (2.0 * m / (leaves_per_foliation - 1) - 1.0);
            const double sx = cx + t * dx, sy = cy + t * dy;
            auto xy = grid.contains(sx, sy) ? trace_leaf(fol, grid, sx, sy) : std::vector<std::array<double, 2>>{};
            if (xy.size() < 8) {
                ++rep.skipped;
                continue;
            }
            std::vector<std::array<double, 2>> uv;
            uv.reserve(xy.size());
            for (auto& p : xy) {
                double u = result.u.interpolate(p[0], p[1]), v = result.v.interpolate(p[0], p[1]);
                if (affine) {
                    const auto& A = *affine;
                    const double nu = A[0] * u + A[1] * v + A[4], nv = A[2] * u + A[3] * v + A[5];
                    u = nu;
                    v = nv;
                }
                uv.push_back({u, v});
            }
            rep.residual = std::max(rep.residual, line_fit_residual(uv));
            ++rep.traced;
            rep.leaves_xy.push_back(std::move(xy));
            rep.leaves_uv.push_back(std::move(uv));
        }
    });
    return out;
}

void require_linearizable(Outcome verdict, bool force)
{
    if (verdict == Outcome::yes || force) return;
    throw LinearizerError(std::string("linearizability verdict is ") + to_string(verdict) +
                          "; the Frobenius system has no solution to integrate (--force runs it anyway)");
}

LinearizationResult linearize(const WebSpec& web, const LinearizerOptions& options)
{
    const Grid grid = make_grid(web, options);
    const LambdaFields lambda = integrate_lambda(web, grid, options);
    const ConnectionField conn = build_connection(lambda, web, options);
    const double flat = flatness_residual(conn);
    const double gate = 1e-4 * grid.diameter();
    std::vector<std::string> warnings;
    if (flat > gate) {
        std::ostringstream msg;
        msg << "connection is not flat: curvature residual " << flat << " exceeds " << gate;
        if (!options.force) throw LinearizerError(msg.str());
        warnings.push_back(msg.str());
    }
    LinearizationResult r = flat_coordinates(conn, web, options);
    r.lambda0 = options.lambda0;
    r.flatness_residual = flat;
    r.path_independence_residual = lambda.path_discrepancy;
    r.warnings.insert(r.warnings.begin(), warnings.begin(), warnings.end());
    r.straightness = straightness_report(r, web, options.leaves, options);
    return r;
}

// ---------------------------------------------------------------------------

std::string render_svg(const LinearizationResult& r)
{
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#7f7f7f"};
    const Grid& g = r.grid;
    double ulo = std::numeric_limits<double>::infinity(), uhi = -ulo, vlo = ulo, vhi = -ulo;
    for (auto& fol : r.straightness)
        for (auto& leaf : fol.leaves_uv)
            for (auto& p : leaf) {
                ulo = std::min(ulo, p[0]);
                uhi = std::max(uhi, p[0]);
                vlo = std::min(vlo, p[1]);
                vhi = std::max(vhi, p[1]);
            }
    if (!(uhi > ulo) || !(vhi > vlo)) {
        ulo = vlo = 0;
        uhi = vhi = 1;
    }
    std::ostringstream os;
    os << std::setprecision(9);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"500\">\n";
    auto panel = [&](double x0, const char* title, double lo_x, double hi_x, double lo_y, double hi_y, bool mapped) {
        os << "<text x=\"" << x0 + 10 << "\" y=\"16\" font-size=\"14\">" << title << "</text>\n";
        os << "<svg x=\"" << x0 + 10 << "\" y=\"24\" width=\"470\" height=\"470\" viewBox=\"" << lo_x << " " << -hi_y << " " << hi_x - lo_x << " "
           << hi_y - lo_y << "\" preserveAspectRatio=\"xMidYMid meet\">\n";
        std::size_t color = 0;
        for (auto& fol : r.straightness) {
            os << "<g fill=\"none\" stroke=\"" << palette[color++ % 9] << "\" stroke-width=\"1.5\" vector-effect=\"non-scaling-stroke\" data-foliation=\"" << fol.name
               << "\">\n";
            for (auto& leaf : mapped ? fol.leaves_uv : fol.leaves_xy) {
                os << "<polyline vector-effect=\"non-scaling-stroke\" points=\"";
                for (std::size_t k = 0; k < leaf.size(); ++k) os << (k ? " " : "") << leaf[k][0] << "," << -leaf[k][1];
                os << "\"/>\n";
            }
            os << "</g>\n";
        }
        os << "</svg>\n";
    };
    panel(0, "leaves in (x, y)", g.x_lo, g.x_hi, g.y_lo, g.y_hi, false);
    panel(500, "leaves in (u, v)", ulo, uhi, vlo, vhi, true);
    os << "</svg>\n";
    return os.str();
}

} // namespace weblin
