#include "diffrestore/targets.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace diffrestore {

std::vector<double> target_density::score(torus_point const& x) const
{
    // Central differences of ln(p + eps); h well below every stddev in use.
    constexpr double h = 1e-6;
    std::vector<double> s(static_cast<std::size_t>(dim()));
    torus_point probe = x;
    for (int i = 0; i < dim(); ++i) {
        double const xi = x[i];
        probe[i] = wrap_coord(xi + h);
        double const lp = std::log(eval(probe).p + kDensityEpsilon);
        probe[i] = wrap_coord(xi - h);
        double const lm = std::log(eval(probe).p + kDensityEpsilon);
        probe[i] = xi;
        s[static_cast<std::size_t>(i)] = (lp - lm) / (2.0 * h);
    }
    return s;
}

uniform_target::uniform_target(int d, int width, int height)
    : m_dim(d), m_width(width), m_height(height)
{
    if (d < 2 || d % 2 != 0)
        throw std::invalid_argument("uniform_target: dimension must be even and >= 2");
    if (width < 1 || height < 1)
        throw std::invalid_argument("uniform_target: empty image");
}

target_evaluation uniform_target::eval(torus_point const& x) const
{
    return { rgb{ 1.0, 1.0, 1.0 }, 1.0, pixel_index_of(x[0], x[1], m_width, m_height) };
}

std::vector<double> uniform_target::score(torus_point const&) const
{
    return std::vector<double>(static_cast<std::size_t>(m_dim), 0.0);
}

wrapped_gaussian_mixture::wrapped_gaussian_mixture(std::vector<mixture_component> components,
                                                   int width, int height, int truncation)
    : m_components(std::move(components)),
      m_width(width), m_height(height), m_truncation(truncation), m_total_weight(0.0)
{
    if (m_components.empty())
        throw std::invalid_argument("wrapped_gaussian_mixture: no components");
    m_dim = static_cast<int>(m_components.front().mean.size());
    if (m_dim < 2 || m_dim % 2 != 0)
        throw std::invalid_argument("wrapped_gaussian_mixture: dimension must be even and >= 2");
    for (mixture_component const& c : m_components) {
        if (static_cast<int>(c.mean.size()) != m_dim)
            throw std::invalid_argument("wrapped_gaussian_mixture: mean dimension mismatch");
        if (c.weight <= 0.0 || c.stddev <= 0.0)
            throw std::invalid_argument("wrapped_gaussian_mixture: weight and stddev must be > 0");
        m_total_weight += c.weight;
    }
    if (width < 1 || height < 1)
        throw std::invalid_argument("wrapped_gaussian_mixture: empty image");
}

namespace {

// One-axis wrapped normal factor and its derivative in the offset.
struct axis_factor {
    double g;
    double dg;
};

axis_factor wrapped_axis(double delta, double s, int truncation)
{
    double const inv_s = 1.0 / s;
    double const norm = inv_s / std::sqrt(2.0 * std::numbers::pi);
    double g = 0.0, dg = 0.0;
    for (int j = -truncation; j <= truncation; ++j) {
        double const z = (delta + j) * inv_s;
        double const phi = norm * std::exp(-0.5 * z * z);
        g += phi;
        dg += -z * inv_s * phi;
    }
    return { g, dg };
}

} // namespace

double wrapped_gaussian_mixture::density(torus_point const& x) const
{
    double p = 0.0;
    for (mixture_component const& c : m_components) {
        double term = c.weight;
        for (int i = 0; i < m_dim; ++i) {
            double const delta = toroidal_delta_coord(c.mean[static_cast<std::size_t>(i)], x[i]);
            term *= wrapped_axis(delta, c.stddev, m_truncation).g;
        }
        p += term;
    }
    return p;
}

target_evaluation wrapped_gaussian_mixture::eval(torus_point const& x) const
{
    double const p = density(x);
    return { rgb{ p, p, p }, p, pixel_index_of(x[0], x[1], m_width, m_height) };
}

std::vector<double> wrapped_gaussian_mixture::score(torus_point const& x) const
{
    std::size_t const d = static_cast<std::size_t>(m_dim);
    std::vector<double> grad(d, 0.0);
    double p = 0.0;
    std::vector<axis_factor> factors(d);
    for (mixture_component const& c : m_components) {
        double term = c.weight;
        for (std::size_t i = 0; i < d; ++i) {
            double const delta = toroidal_delta_coord(c.mean[i], x[static_cast<int>(i)]);
            factors[i] = wrapped_axis(delta, c.stddev, m_truncation);
            term *= factors[i].g;
        }
        p += term;
        for (std::size_t i = 0; i < d; ++i) {
            // term * dg_i / g_i, written to stay finite when g_i underflows
            double partial = c.weight * factors[i].dg;
            for (std::size_t j = 0; j < d; ++j)
                if (j != i)
                    partial *= factors[j].g;
            grad[i] += partial;
        }
    }
    double const denom = p + kDensityEpsilon;
    for (double& gi : grad)
        gi /= denom;
    return grad;
}

normalization_estimate estimate_normalization(target_density const& t, philox_rng& rng,
                                              long long n_samples)
{
    if (n_samples < 1)
        throw std::invalid_argument("estimate_normalization: n_samples must be >= 1");
    double sum = 0.0, sum_sq = 0.0;
    for (long long i = 0; i < n_samples; ++i) {
        torus_point const x = sample_uniform(rng, t.dim());
        double const p = t.eval(x).p;
        sum += p;
        sum_sq += p * p;
    }
    double const n = static_cast<double>(n_samples);
    double const mean = sum / n;
    double var = (sum_sq - n * mean * mean) / (n > 1 ? n - 1 : 1);
    if (var < 0.0)
        var = 0.0;
    return { mean, std::sqrt(var / n) };
}

image quadrature_reference(target_density const& t, int n_per_axis)
{
    if (t.dim() != 2)
        throw std::invalid_argument("quadrature_reference: d = 2 targets only");
    int const w = t.image_width(), h = t.image_height();
    if (n_per_axis % w != 0 || n_per_axis % h != 0)
        throw std::invalid_argument("quadrature_reference: grid must divide image dims");
    image ref(w, h);
    std::vector<long long> counts(static_cast<std::size_t>(w) * h, 0);
    torus_point x{ { 0.0, 0.0 } };
    for (int iy = 0; iy < n_per_axis; ++iy) {
        x[1] = (iy + 0.5) / n_per_axis;
        for (int ix = 0; ix < n_per_axis; ++ix) {
            x[0] = (ix + 0.5) / n_per_axis;
            target_evaluation const e = t.eval(x);
            ref.pixels[static_cast<std::size_t>(e.pixel)] =
                ref.pixels[static_cast<std::size_t>(e.pixel)] + e.f;
            ++counts[static_cast<std::size_t>(e.pixel)];
        }
    }
    for (std::size_t i = 0; i < ref.pixels.size(); ++i)
        ref.pixels[i] = (counts[i] > 0 ? 1.0 / static_cast<double>(counts[i]) : 0.0) * ref.pixels[i];
    return ref;
}

} // namespace diffrestore
