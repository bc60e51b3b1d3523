#ifndef DIFFRESTORE_NUMERICS_HPP
#define DIFFRESTORE_NUMERICS_HPP

#include <cstddef>
#include <vector>

namespace diffrestore {

struct quadrature_rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre rule on [a, b].
quadrature_rule gauss_legendre(int n, double a, double b);

// Gauss-Hermite rule for E[f(Z)] with Z ~ N(0,1): sum_i w_i f(x_i).
// (Probabilists' normalization; weights sum to 1.)
quadrature_rule gauss_hermite(int n);

struct linear_fit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Ordinary least squares y = slope*x + intercept.
linear_fit fit_line(std::vector<double> const& x, std::vector<double> const& y);

} // namespace diffrestore

#endif
