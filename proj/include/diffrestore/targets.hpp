#ifndef DIFFRESTORE_TARGETS_HPP
#define DIFFRESTORE_TARGETS_HPP

#include <memory>
#include <optional>
#include <vector>

#include "diffrestore/image.hpp"
#include "diffrestore/rng.hpp"
#include "diffrestore/torus.hpp"

namespace diffrestore {

// Penalization constant added inside the logarithm: score = grad p / (p + eps).
// The same penalized density p + eps feeds the killing rate and the MH
// acceptance ratios, so zero-density regions stay finite everywhere.
inline constexpr double kDensityEpsilon = 1e-8;

struct target_evaluation {
    rgb f{ 0, 0, 0 };   // integrand value
    double p = 0.0;     // unnormalized scalar target density, >= 0
    int pixel = 0;      // linearized pixel index from the first two coordinates
};

inline int pixel_index_of(double x0, double x1, int width, int height)
{
    int px = static_cast<int>(x0 * width);
    int py = static_cast<int>(x1 * height);
    if (px >= width) px = width - 1;
    if (py >= height) py = height - 1;
    return py * width + px;
}

// The target-density abstraction: unnormalized density p, RGB integrand f,
// score = grad ln(p + eps). Implementations are immutable after construction
// and safe to call from many threads.
class target_density {
public:
    virtual ~target_density() = default;

    virtual int dim() const = 0;
    virtual int image_width() const = 0;
    virtual int image_height() const = 0;
    int pixel_count() const { return image_width() * image_height(); }

    virtual target_evaluation eval(torus_point const& x) const = 0;

    // Default: central finite differences of ln(p + eps) with h = 1e-6.
    virtual std::vector<double> score(torus_point const& x) const;

    // Reference-measure integral of p, when known in closed form.
    virtual std::optional<double> normalization() const { return std::nullopt; }
};

// Constant density p = 1, f = (1,1,1), on a virtual WxH pixel grid.
class uniform_target final : public target_density {
public:
    uniform_target(int d, int width, int height);

    int dim() const override { return m_dim; }
    int image_width() const override { return m_width; }
    int image_height() const override { return m_height; }
    target_evaluation eval(torus_point const& x) const override;
    std::vector<double> score(torus_point const& x) const override;
    std::optional<double> normalization() const override { return 1.0; }

private:
    int m_dim, m_width, m_height;
};

struct mixture_component {
    double weight = 1.0;              // > 0
    std::vector<double> mean;         // in T^d
    double stddev = 0.1;              // per-axis scale, > 0
};

// Mixture of isotropic wrapped Gaussians with analytic score. The wrapped
// sum is truncated at K images per axis; for s <= 0.1 and K = 5 the missing
// tail mass is below 1e-15 per axis (Gaussian tail bound exp(-K^2/(2s^2))).
class wrapped_gaussian_mixture final : public target_density {
public:
    wrapped_gaussian_mixture(std::vector<mixture_component> components,
                             int width, int height, int truncation = 5);

    int dim() const override { return m_dim; }
    int image_width() const override { return m_width; }
    int image_height() const override { return m_height; }
    target_evaluation eval(torus_point const& x) const override;
    std::vector<double> score(torus_point const& x) const override;
    std::optional<double> normalization() const override { return m_total_weight; }

    double density(torus_point const& x) const;
    std::vector<mixture_component> const& components() const { return m_components; }

private:
    std::vector<mixture_component> m_components;
    int m_dim, m_width, m_height, m_truncation;
    double m_total_weight;
};

struct normalization_estimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

// Monte Carlo estimate of lambda(p) = mean of p under uniform draws.
normalization_estimate estimate_normalization(target_density const& t, philox_rng& rng,
                                              long long n_samples);

// Per-pixel mean of f by midpoint quadrature on an n x n grid over the first
// two coordinates (d = 2 targets only). n must be divisible by both image
// dimensions; 256 against a 32x32 image gives 64 cells per pixel.
image quadrature_reference(target_density const& t, int n_per_axis);

} // namespace diffrestore

#endif
