#ifndef DIFFRESTORE_TORUS_HPP
#define DIFFRESTORE_TORUS_HPP

#include <vector>

#include "diffrestore/rng.hpp"

namespace diffrestore {

// A point on the flat torus T^d = [0,1)^d with d even. Coordinates are kept
// in [0,1); construction goes through wrap() which enforces the invariant.
struct torus_point {
    std::vector<double> coords;

    int dim() const { return static_cast<int>(coords.size()); }
    double operator[](int i) const { return coords[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return coords[static_cast<std::size_t>(i)]; }

    bool operator==(torus_point const&) const = default;
};

// Wraps one coordinate into [0,1). Guards the x - floor(x) == 1.0 rounding
// case (tiny negative inputs) so the < 1 invariant always holds.
double wrap_coord(double v);

// Toroidal wrap of a full vector. Throws std::invalid_argument on non-finite
// input; NaNs never propagate silently into chain state.
torus_point wrap(std::vector<double> v);

// i.i.d. uniform coordinates. d must be even and >= 2.
torus_point sample_uniform(philox_rng& rng, int d);

// Minimal-image displacement: each component in [-0.5, 0.5) and
// wrap(a + delta) == b. The antipodal tie resolves to -0.5.
std::vector<double> toroidal_delta(torus_point const& a, torus_point const& b);

// Minimal-image offset of a single coordinate difference, in [-0.5, 0.5).
double toroidal_delta_coord(double from, double to);

} // namespace diffrestore

#endif
