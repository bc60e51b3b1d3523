// Canonical analytic targets shared by the unit and acceptance suites; the
// bundled configs mirror these definitions.
#ifndef DIFFRESTORE_TESTS_FIXTURES_HPP
#define DIFFRESTORE_TESTS_FIXTURES_HPP

#include <memory>

#include "diffrestore/targets.hpp"

namespace fixtures {

// Single wrapped Gaussian, s = 0.05, weight chosen so the density peak is
// about 1 (pixel values stay O(1)).
inline diffrestore::wrapped_gaussian_mixture single_gaussian(int w = 32, int h = 32)
{
    return diffrestore::wrapped_gaussian_mixture(
        { { 0.015708, { 0.5, 0.5 }, 0.05 } }, w, h);
}

// Smooth 3-mode mixture on T^2: overlapping wrapped tails keep the density
// bounded away from zero, scores mild, and pixel values in [0, ~0.35].
inline diffrestore::wrapped_gaussian_mixture mixture3(int w = 32, int h = 32)
{
    return diffrestore::wrapped_gaussian_mixture(
        {
            { 0.0369, { 0.25, 0.25 }, 0.14 },
            { 0.0402, { 0.68, 0.32 }, 0.16 },
            { 0.0454, { 0.42, 0.74 }, 0.19 },
        },
        w, h);
}

// d = 6 extension of the 3-mode mixture (distinct means in the latent
// coordinate pairs per mode) for the equal-sample-count ordering runs.
inline diffrestore::wrapped_gaussian_mixture mixture3_d6(int w = 32, int h = 32)
{
    return diffrestore::wrapped_gaussian_mixture(
        {
            { 0.0369, { 0.25, 0.25, 0.30, 0.60, 0.50, 0.20 }, 0.14 },
            { 0.0402, { 0.68, 0.32, 0.70, 0.25, 0.15, 0.70 }, 0.16 },
            { 0.0454, { 0.42, 0.74, 0.20, 0.80, 0.75, 0.55 }, 0.19 },
        },
        w, h);
}

} // namespace fixtures

#endif
