#ifndef DIFFRESTORE_BIASLAB_HPP
#define DIFFRESTORE_BIASLAB_HPP

#include <array>
#include <string>
#include <vector>

#include "diffrestore/dynamics.hpp"
#include "diffrestore/rng.hpp"
#include "diffrestore/targets.hpp"
#include "diffrestore/torus.hpp"

namespace diffrestore {

// Numerical verification of the discretization-bias identity: the adjoint
// generator term (L* p_hat)/p_hat, the first-order correction operator and
// the O(dt) decay, all on T^2 where quadrature is exact enough to serve as
// ground truth.

// Trigonometric test functions sum_j a_j cos(2 pi (kx x + ky y) + phase_j)
// with closed-form derivatives up to fourth order.
struct trig_term {
    double amplitude = 1.0;
    int kx = 0;
    int ky = 0;
    double phase = 0.0;
};

class trig_function {
public:
    explicit trig_function(std::vector<trig_term> terms) : m_terms(std::move(terms)) {}

    double value(double x, double y) const;
    std::array<double, 2> gradient(double x, double y) const;
    std::array<double, 3> hessian(double x, double y) const; // (xx, xy, yy)
    double laplacian(double x, double y) const;
    std::array<double, 2> grad_laplacian(double x, double y) const;
    double bilaplacian(double x, double y) const;

    static trig_function random(philox_rng& rng, int terms, int max_freq);

private:
    std::vector<trig_term> m_terms;
};

// Langevin drift on T^2: b = (sigma^2/2) s + (c/2) (s_1, -s_0) with
// s = grad ln(p + eps). sigma^2 = stddev^2/dt, c = 2 c_tilde/dt.
std::array<double, 2> langevin_drift(langevin_config const& cfg, target_density const& t,
                                     torus_point const& x);

// L phi = b . grad phi + (sigma^2/2) lap phi (constant diffusion, div C = 0).
double continuous_generator(langevin_config const& cfg, target_density const& t,
                            trig_function const& phi, torus_point const& x);

// (L_K phi)(x) = (1/dt) (E[phi(x + dt b + stddev xi)] - phi(x)), the kernel
// expectation taken by tensor Gauss-Hermite quadrature (exact wrapping: phi
// is 1-periodic, so the wrap is implicit).
double embedded_generator(langevin_config const& cfg, target_density const& t,
                          trig_function const& phi, torus_point const& x, int quadrature_n);

// First-order correction operator
//   C phi = 1/2 b^T (H phi) b + (sigma^2/2) b . grad(lap phi) + (sigma^4/8) bilap phi.
double correction_operator(langevin_config const& cfg, target_density const& t,
                           trig_function const& phi, torus_point const& x);

// n x n cell-centered scalar field on T^2 with uniform quadrature weights.
struct grid_field {
    int n = 0;
    std::vector<double> values; // row-major, values[iy * n + ix]

    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * n + ix]; }
    double sup_norm() const;
    double quadrature_integral() const; // sum * (1/n^2)
};

// (L_K* p_hat)(x) / p_hat(x) on the grid, computed from the adjoint identity
// (L_K* p_hat)(x) = (1/dt) (int k(y -> x) p_hat(y) dy - p_hat(x)) with the
// forward wrapped-Gaussian kernel density, Gauss-Legendre in y around x.
grid_field adjoint_bias_field(langevin_config const& cfg, target_density const& t,
                              int grid_n, int quadrature_n, int threads = 0);

void write_grid_csv(grid_field const& field, std::string const& path);

} // namespace diffrestore

#endif
