// Test-side statistical oracles: incomplete-gamma based chi-squared
// quantiles, Kolmogorov-Smirnov critical values, histogram tests with
// low-count bin pooling, and a rejection sampler. Kept independent of the
// sampler implementations they check.
#ifndef DIFFRESTORE_TESTS_STATS_UTIL_HPP
#define DIFFRESTORE_TESTS_STATS_UTIL_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "diffrestore/rng.hpp"
#include "diffrestore/targets.hpp"
#include "diffrestore/torus.hpp"

namespace testutil {

// Regularized lower incomplete gamma P(a, x) by series / continued fraction.
inline double gamma_p(double a, double x)
{
    if (x < 0.0 || a <= 0.0)
        throw std::invalid_argument("gamma_p: bad arguments");
    if (x == 0.0)
        return 0.0;
    double const gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15)
                break;
        }
        return sum * std::exp(-x + a * std::log(x) - gln);
    }
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        double const an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        double const del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15)
            break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

// chi^2 CDF and upper quantile (bisection; plenty for test tolerances).
inline double chi2_cdf(double x, double dof) { return gamma_p(0.5 * dof, 0.5 * x); }

inline double chi2_quantile(double prob, double dof)
{
    double lo = 0.0, hi = dof + 100.0 * std::sqrt(dof) + 100.0;
    for (int i = 0; i < 200; ++i) {
        double const mid = 0.5 * (lo + hi);
        (chi2_cdf(mid, dof) < prob ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// One-sample KS critical value at level alpha (asymptotic).
inline double ks_critical(double alpha, std::size_t n)
{
    double const c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c / std::sqrt(static_cast<double>(n));
}

inline double ks_critical_two_sample(double alpha, std::size_t n, std::size_t m)
{
    double const c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

// KS statistic of samples against the uniform CDF on [0,1).
inline double ks_statistic_uniform(std::vector<double> samples)
{
    std::sort(samples.begin(), samples.end());
    double d = 0.0;
    std::size_t const n = samples.size();
    for (std::size_t i = 0; i < n; ++i) {
        double const lo = static_cast<double>(i) / n;
        double const hi = static_cast<double>(i + 1) / n;
        d = std::max({ d, std::abs(samples[i] - lo), std::abs(samples[i] - hi) });
    }
    return d;
}

inline double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                                 static_cast<double>(j) / b.size()));
    }
    return d;
}

// Pearson chi^2 with pooling of low-expectation cells (< 5 pooled into one);
// returns the test statistic and effective dof through out-params.
struct chi2_result {
    double statistic = 0.0;
    double dof = 0.0;
    double critical_1pct = 0.0;
    bool pass = false;
};

inline chi2_result chi2_test(std::vector<double> const& observed,
                             std::vector<double> const& expected, int constraints = 1)
{
    if (observed.size() != expected.size())
        throw std::invalid_argument("chi2_test: size mismatch");
    double pooled_obs = 0.0, pooled_exp = 0.0, stat = 0.0;
    int cells = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] < 5.0) {
            pooled_obs += observed[i];
            pooled_exp += expected[i];
        } else {
            double const d = observed[i] - expected[i];
            stat += d * d / expected[i];
            ++cells;
        }
    }
    if (pooled_exp > 0.0) {
        double const d = pooled_obs - pooled_exp;
        stat += d * d / pooled_exp;
        ++cells;
    }
    chi2_result r;
    r.statistic = stat;
    r.dof = std::max(1, cells - constraints);
    r.critical_1pct = chi2_quantile(0.99, r.dof);
    r.pass = stat < r.critical_1pct;
    return r;
}

// Rejection sampler from the penalized density p + eps, bound from a grid
// scan with a safety margin.
class rejection_sampler {
public:
    rejection_sampler(diffrestore::target_density const& t, int scan_n = 101)
        : m_target(t)
    {
        if (t.dim() != 2)
            throw std::invalid_argument("rejection_sampler: d = 2 only");
        double best = 0.0;
        for (int iy = 0; iy < scan_n; ++iy)
            for (int ix = 0; ix < scan_n; ++ix) {
                diffrestore::torus_point const x{ { (ix + 0.5) / scan_n, (iy + 0.5) / scan_n } };
                best = std::max(best, t.eval(x).p);
            }
        m_bound = 1.15 * (best + diffrestore::kDensityEpsilon);
    }

    diffrestore::torus_point operator()(diffrestore::philox_rng& rng) const
    {
        for (;;) {
            diffrestore::torus_point x = diffrestore::sample_uniform(rng, 2);
            double const p_hat = m_target.eval(x).p + diffrestore::kDensityEpsilon;
            if (rng.uniform() * m_bound < p_hat)
                return x;
        }
    }

private:
    diffrestore::target_density const& m_target;
    double m_bound;
};

// Per-pixel probability masses of the penalized density on the target's
// virtual image (midpoint quadrature), normalized to sum to one.
inline std::vector<double> pixel_masses(diffrestore::target_density const& t, int n_per_axis)
{
    std::vector<double> mass(static_cast<std::size_t>(t.pixel_count()), 0.0);
    double total = 0.0;
    diffrestore::torus_point x{ { 0.0, 0.0 } };
    for (int iy = 0; iy < n_per_axis; ++iy) {
        x[1] = (iy + 0.5) / n_per_axis;
        for (int ix = 0; ix < n_per_axis; ++ix) {
            x[0] = (ix + 0.5) / n_per_axis;
            auto const e = t.eval(x);
            double const p_hat = e.p + diffrestore::kDensityEpsilon;
            mass[static_cast<std::size_t>(e.pixel)] += p_hat;
            total += p_hat;
        }
    }
    for (double& m : mass)
        m /= total;
    return mass;
}

inline double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    std::size_t const n = v.size();
    return n == 0 ? 0.0 : (n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]));
}

} // namespace testutil

#endif
