#include "diffrestore/biaslab.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "diffrestore/numerics.hpp"

namespace diffrestore {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double trig_function::value(double x, double y) const
{
    double v = 0.0;
    for (trig_term const& t : m_terms)
        v += t.amplitude * std::cos(kTwoPi * (t.kx * x + t.ky * y) + t.phase);
    return v;
}

std::array<double, 2> trig_function::gradient(double x, double y) const
{
    std::array<double, 2> g{ 0.0, 0.0 };
    for (trig_term const& t : m_terms) {
        double const s = -t.amplitude * kTwoPi * std::sin(kTwoPi * (t.kx * x + t.ky * y) + t.phase);
        g[0] += s * t.kx;
        g[1] += s * t.ky;
    }
    return g;
}

std::array<double, 3> trig_function::hessian(double x, double y) const
{
    std::array<double, 3> h{ 0.0, 0.0, 0.0 };
    for (trig_term const& t : m_terms) {
        double const c =
            -t.amplitude * kTwoPi * kTwoPi * std::cos(kTwoPi * (t.kx * x + t.ky * y) + t.phase);
        h[0] += c * t.kx * t.kx;
        h[1] += c * t.kx * t.ky;
        h[2] += c * t.ky * t.ky;
    }
    return h;
}

double trig_function::laplacian(double x, double y) const
{
    auto const h = hessian(x, y);
    return h[0] + h[2];
}

std::array<double, 2> trig_function::grad_laplacian(double x, double y) const
{
    std::array<double, 2> g{ 0.0, 0.0 };
    for (trig_term const& t : m_terms) {
        double const k2 = static_cast<double>(t.kx) * t.kx + static_cast<double>(t.ky) * t.ky;
        double const s = t.amplitude * kTwoPi * kTwoPi * kTwoPi * k2 *
                         std::sin(kTwoPi * (t.kx * x + t.ky * y) + t.phase);
        g[0] += s * t.kx;
        g[1] += s * t.ky;
    }
    return g;
}

double trig_function::bilaplacian(double x, double y) const
{
    double v = 0.0;
    for (trig_term const& t : m_terms) {
        double const k2 = static_cast<double>(t.kx) * t.kx + static_cast<double>(t.ky) * t.ky;
        v += t.amplitude * kTwoPi * kTwoPi * kTwoPi * kTwoPi * k2 * k2 *
             std::cos(kTwoPi * (t.kx * x + t.ky * y) + t.phase);
    }
    return v;
}

trig_function trig_function::random(philox_rng& rng, int terms, int max_freq)
{
    std::vector<trig_term> ts;
    ts.reserve(static_cast<std::size_t>(terms));
    for (int i = 0; i < terms; ++i) {
        trig_term t;
        t.amplitude = 2.0 * rng.uniform() - 1.0;
        t.kx = static_cast<int>(rng.uniform() * (2 * max_freq + 1)) - max_freq;
        t.ky = static_cast<int>(rng.uniform() * (2 * max_freq + 1)) - max_freq;
        t.phase = kTwoPi * rng.uniform();
        ts.push_back(t);
    }
    return trig_function(std::move(ts));
}

std::array<double, 2> langevin_drift(langevin_config const& cfg, target_density const& t,
                                     torus_point const& x)
{
    std::vector<double> const s = t.score(x);
    double const sig2 = cfg.sigma_sq();
    double const c = cfg.rotation_c();
    return { 0.5 * (sig2 * s[0] + c * s[1]), 0.5 * (sig2 * s[1] - c * s[0]) };
}

double continuous_generator(langevin_config const& cfg, target_density const& t,
                            trig_function const& phi, torus_point const& x)
{
    auto const b = langevin_drift(cfg, t, x);
    auto const g = phi.gradient(x[0], x[1]);
    return b[0] * g[0] + b[1] * g[1] + 0.5 * cfg.sigma_sq() * phi.laplacian(x[0], x[1]);
}

double embedded_generator(langevin_config const& cfg, target_density const& t,
                          trig_function const& phi, torus_point const& x, int quadrature_n)
{
    if (quadrature_n < 2)
        throw std::invalid_argument("embedded_generator: quadrature_n too small");
    auto const b = langevin_drift(cfg, t, x);
    double const mx = x[0] + cfg.dt * b[0];
    double const my = x[1] + cfg.dt * b[1];
    quadrature_rule const gh = gauss_hermite(quadrature_n);
    double expectation = 0.0;
    for (int i = 0; i < quadrature_n; ++i)
        for (int j = 0; j < quadrature_n; ++j) {
            double const yx = mx + cfg.stddev * gh.nodes[static_cast<std::size_t>(i)];
            double const yy = my + cfg.stddev * gh.nodes[static_cast<std::size_t>(j)];
            expectation += gh.weights[static_cast<std::size_t>(i)] *
                           gh.weights[static_cast<std::size_t>(j)] * phi.value(yx, yy);
        }
    return (expectation - phi.value(x[0], x[1])) / cfg.dt;
}

double correction_operator(langevin_config const& cfg, target_density const& t,
                           trig_function const& phi, torus_point const& x)
{
    auto const b = langevin_drift(cfg, t, x);
    auto const h = phi.hessian(x[0], x[1]);
    auto const gl = phi.grad_laplacian(x[0], x[1]);
    double const sig2 = cfg.sigma_sq();
    double const quad_form = b[0] * b[0] * h[0] + 2.0 * b[0] * b[1] * h[1] + b[1] * b[1] * h[2];
    return 0.5 * quad_form + 0.5 * sig2 * (b[0] * gl[0] + b[1] * gl[1]) +
           0.125 * sig2 * sig2 * phi.bilaplacian(x[0], x[1]);
}

double grid_field::sup_norm() const
{
    double s = 0.0;
    for (double v : values)
        s = std::max(s, std::abs(v));
    return s;
}

double grid_field::quadrature_integral() const
{
    double s = 0.0;
    for (double v : values)
        s += v;
    return s / (static_cast<double>(n) * static_cast<double>(n));
}

namespace {

// Wrapped-Gaussian transition density from mean to the point at minimal
// image offset delta, three images per axis. stddev-scaled increments make
// the dropped images smaller than exp(-(1.5/stddev)^2/2).
double wrapped_kernel_density_1d(double delta, double stddev)
{
    double const inv = 1.0 / stddev;
    double const norm = inv / std::sqrt(kTwoPi);
    double acc = 0.0;
    for (int j = -1; j <= 1; ++j) {
        double const z = (delta + j) * inv;
        acc += norm * std::exp(-0.5 * z * z);
    }
    return acc;
}

} // namespace

grid_field adjoint_bias_field(langevin_config const& cfg, target_density const& t,
                              int grid_n, int quadrature_n, int threads)
{
    if (t.dim() != 2)
        throw std::invalid_argument("adjoint_bias_field: d = 2 targets only");
    if (grid_n < 2 || quadrature_n < 8)
        throw std::invalid_argument("adjoint_bias_field: grid/quadrature too small");

    grid_field field;
    field.n = grid_n;
    field.values.assign(static_cast<std::size_t>(grid_n) * grid_n, 0.0);

    // Integration window around the evaluation point: the kernel reaches at
    // most |dt b| + 8 stddev before the dropped mass falls under ~1e-15. The
    // drift bound comes from a grid scan of the score with a safety margin.
    double score_cap = 0.0;
    for (int iy = 0; iy < grid_n; ++iy)
        for (int ix = 0; ix < grid_n; ++ix) {
            torus_point const xs{ { (ix + 0.5) / grid_n, (iy + 0.5) / grid_n } };
            for (double s : t.score(xs))
                score_cap = std::max(score_cap, std::abs(s));
        }
    double const drift_cap =
        0.5 * cfg.dt * (cfg.sigma_sq() + std::abs(cfg.rotation_c())) * 1.5 * score_cap;
    double const half_width = std::min(0.5, 8.0 * cfg.stddev + drift_cap);
    // Keep the node spacing proportional to the kernel width when the drift
    // widens the window.
    int const n_quad = std::min(512, static_cast<int>(std::ceil(
        quadrature_n * std::max(1.0, half_width / (8.0 * cfg.stddev)))));
    quadrature_rule const gl = gauss_legendre(n_quad, -half_width, half_width);

    if (threads <= 0) {
        unsigned const hw = std::thread::hardware_concurrency();
        threads = hw == 0 ? 1 : static_cast<int>(hw);
    }
    std::atomic<int> next{ 0 };
    int const cells = grid_n * grid_n;
    auto worker = [&] {
        torus_point y{ { 0.0, 0.0 } };
        for (;;) {
            int const cell = next.fetch_add(1);
            if (cell >= cells)
                return;
            int const ix = cell % grid_n;
            int const iy = cell / grid_n;
            double const x0 = (ix + 0.5) / grid_n;
            double const x1 = (iy + 0.5) / grid_n;

            double integral = 0.0;
            for (int a = 0; a < n_quad; ++a) {
                y[0] = wrap_coord(x0 + gl.nodes[static_cast<std::size_t>(a)]);
                for (int bq = 0; bq < n_quad; ++bq) {
                    y[1] = wrap_coord(x1 + gl.nodes[static_cast<std::size_t>(bq)]);
                    double const p_y = t.eval(y).p + kDensityEpsilon;
                    auto const drift = langevin_drift(cfg, t, y);
                    double const d0 =
                        toroidal_delta_coord(wrap_coord(y[0] + cfg.dt * drift[0]), x0);
                    double const d1 =
                        toroidal_delta_coord(wrap_coord(y[1] + cfg.dt * drift[1]), x1);
                    double const k = wrapped_kernel_density_1d(d0, cfg.stddev) *
                                     wrapped_kernel_density_1d(d1, cfg.stddev);
                    integral += gl.weights[static_cast<std::size_t>(a)] *
                                gl.weights[static_cast<std::size_t>(bq)] * p_y * k;
                }
            }

            torus_point const xc{ { x0, x1 } };
            double const p_x = t.eval(xc).p + kDensityEpsilon;
            field.values[static_cast<std::size_t>(cell)] = (integral - p_x) / (cfg.dt * p_x);
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < threads - 1; ++i)
        pool.emplace_back(worker);
    worker();
    for (std::thread& th : pool)
        th.join();
    return field;
}

void write_grid_csv(grid_field const& field, std::string const& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << "x1,x2,value\n";
    for (int iy = 0; iy < field.n; ++iy)
        for (int ix = 0; ix < field.n; ++ix)
            out << (ix + 0.5) / field.n << ',' << (iy + 0.5) / field.n << ','
                << field.at(ix, iy) << '\n';
}

} // namespace diffrestore
