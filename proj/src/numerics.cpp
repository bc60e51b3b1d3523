#include "diffrestore/numerics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace diffrestore {

quadrature_rule gauss_legendre(int n, double a, double b)
{
    if (n < 1)
        throw std::invalid_argument("gauss_legendre: n must be >= 1");
    quadrature_rule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));

    // Newton iteration on Legendre P_n, Chebyshev-based initial guesses.
    int const m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double const p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double const dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15)
                break;
        }
        double const w = 2.0 / ((1.0 - x * x) * dp * dp);
        double const mid = 0.5 * (a + b), half = 0.5 * (b - a);
        rule.nodes[static_cast<std::size_t>(i)] = mid - half * x;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = mid + half * x;
        rule.weights[static_cast<std::size_t>(i)] = half * w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = half * w;
    }
    return rule;
}

quadrature_rule gauss_hermite(int n)
{
    if (n < 1)
        throw std::invalid_argument("gauss_hermite: n must be >= 1");
    // Physicists' Hermite nodes by Newton iteration, then rescaled to the
    // probabilists' convention (weight function exp(-x^2/2)/sqrt(2*pi)).
    quadrature_rule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));

    int const m = (n + 1) / 2;
    double const pim4 = 0.7511255444649425; // pi^{-1/4}
    double x = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            x = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            x -= 1.14 * std::pow(static_cast<double>(n), 0.426) / x;
        else if (i == 2)
            x = 1.86 * x - 0.86 * rule.nodes[0];
        else if (i == 3)
            x = 1.91 * x - 0.91 * rule.nodes[1];
        else
            x = 2.0 * x - rule.nodes[static_cast<std::size_t>(i - 2)];

        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4, p2 = 0.0;
            for (int k = 0; k < n; ++k) {
                double const p3 = p2;
                p2 = p1;
                p1 = x * std::sqrt(2.0 / (k + 1.0)) * p2 -
                     std::sqrt(static_cast<double>(k) / (k + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            double const dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-14)
                break;
        }
        // Store physicists' node in ascending slot order for the recurrences
        // above; mirrored below.
        rule.nodes[static_cast<std::size_t>(i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = 2.0 / (pp * pp);
    }
    // Mirror and convert: z = sqrt(2) x, w = w_phys / sqrt(pi).
    std::vector<double> nodes(static_cast<std::size_t>(n)), weights(static_cast<std::size_t>(n));
    double const sqrt_pi = std::sqrt(std::numbers::pi);
    for (int i = 0; i < m; ++i) {
        double const z = std::numbers::sqrt2 * rule.nodes[static_cast<std::size_t>(i)];
        double const w = rule.weights[static_cast<std::size_t>(i)] / sqrt_pi;
        nodes[static_cast<std::size_t>(i)] = z;
        weights[static_cast<std::size_t>(i)] = w;
        nodes[static_cast<std::size_t>(n - 1 - i)] = -z;
        weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    rule.nodes = std::move(nodes);
    rule.weights = std::move(weights);
    return rule;
}

linear_fit fit_line(std::vector<double> const& x, std::vector<double> const& y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need matching x/y with >= 2 points");
    double const n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    linear_fit fit;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

} // namespace diffrestore
