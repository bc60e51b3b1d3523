#include "diffrestore/torus.hpp"

#include <cmath>
#include <stdexcept>

namespace diffrestore {

double wrap_coord(double v)
{
    double w = v - std::floor(v);
    if (w >= 1.0)
        w = 0.0; // v - floor(v) can round up to 1.0 for tiny negative v
    return w;
}

torus_point wrap(std::vector<double> v)
{
    for (double& c : v) {
        if (!std::isfinite(c))
            throw std::invalid_argument("wrap: non-finite coordinate");
        c = wrap_coord(c);
    }
    return torus_point{ std::move(v) };
}

torus_point sample_uniform(philox_rng& rng, int d)
{
    if (d < 2 || d % 2 != 0)
        throw std::invalid_argument("sample_uniform: dimension must be even and >= 2");
    std::vector<double> coords(static_cast<std::size_t>(d));
    for (double& c : coords)
        c = rng.uniform();
    return torus_point{ std::move(coords) };
}

double toroidal_delta_coord(double from, double to)
{
    double const d = to - from;
    double r = d - std::floor(d + 0.5); // maps to [-0.5, 0.5), tie at -0.5
    if (r >= 0.5)
        r = -0.5;
    return r;
}

std::vector<double> toroidal_delta(torus_point const& a, torus_point const& b)
{
    if (a.dim() != b.dim())
        throw std::invalid_argument("toroidal_delta: dimension mismatch");
    std::vector<double> delta(a.coords.size());
    for (std::size_t i = 0; i < delta.size(); ++i)
        delta[i] = toroidal_delta_coord(a.coords[i], b.coords[i]);
    return delta;
}

} // namespace diffrestore
