#ifndef DIFFRESTORE_METRICS_HPP
#define DIFFRESTORE_METRICS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "diffrestore/image.hpp"
#include "diffrestore/restore.hpp"

namespace diffrestore {

// Error metrics in linear radiance, per channel then averaged. The MAPE and
// MRSE denominators are r + 1e-2 and r^2 + 1e-2; absolute values are
// therefore not comparable across other conventions.
struct error_report {
    double mae = 0.0;
    double mse = 0.0;
    double mrse = 0.0;
    double mape = 0.0;
};

error_report compare(image const& test, image const& ref);

struct curve_row {
    std::string method;
    long long budget = 0;
    std::uint64_t seed = 0;
    error_report err;
};

// One sampler invocation at (budget, seed) for the curve runner.
using method_runner = std::function<image(long long budget, std::uint64_t seed)>;

// Runs every (budget, seed) pair for one method against a fixed reference;
// the same seed list must be passed for every method so rows align.
std::vector<curve_row> convergence_curve(std::string const& method, method_runner const& run,
                                         image const& reference,
                                         std::vector<long long> const& budgets,
                                         std::vector<std::uint64_t> const& seeds);

// Stable schema: method,budget,seed,mae,mse,mrse,mape with a header row.
void write_curves_csv(std::vector<curve_row> const& rows, std::string const& path);

} // namespace diffrestore

#endif
