#ifndef DIFFRESTORE_CONFIG_HPP
#define DIFFRESTORE_CONFIG_HPP

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffrestore/microrender.hpp"
#include "diffrestore/restore.hpp"
#include "diffrestore/targets.hpp"

namespace diffrestore {

// Raised on any schema violation; message carries file:line and field names.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kConfigSchema = 1;

struct method_config {
    std::string kind; // pt | metropolis | mala | metropolis-restore | mala-restore | diffusion-restore
    double stddev = 0.0;
    double c_tilde = 0.0;
    double dt = 1e-5;
    double m = 64.0;
    double large_step_prob = 0.0;
    double kappa0 = 0.0;   // 0 = derive from p_lambda/(m dt)
    double p_lambda = 0.0; // 0 = exact normalization or bootstrap
};

struct target_config {
    std::string kind; // uniform | mixture | renderer
    int width = 32;
    int height = 32;
    int dim = 2;        // synthetic targets
    int truncation = 5; // wrapped-sum images per axis
    std::vector<mixture_component> components;
    scene sc; // renderer targets
};

struct run_config {
    long long budget = 1000000;
    std::uint64_t seed = 0;
    int threads = 0;
    int dispatch_count = 0;
    double exposure = 1.0;
    std::string out = "out";
    std::vector<long long> budgets;      // bench
    std::vector<std::uint64_t> seeds;    // bench
    int reference_spp = 16384;           // bench, renderer targets
    int quadrature = 256;                // bench, analytic targets
};

struct bias_config {
    double sigma = 1.0;
    double c = 1.0;
    std::vector<double> dt_sweep;
    int grid = 64;
    int quadrature = 64;
};

struct experiment_config {
    target_config target;
    std::vector<method_config> methods;
    run_config run;
    std::optional<bias_config> bias;
};

experiment_config parse_config_file(std::string const& path);
experiment_config parse_config_text(std::string const& text, std::string const& origin);

std::unique_ptr<target_density> make_target(target_config const& tc);

// Dispatches a configured method to the matching driver.
std::pair<image, run_stats> run_method(method_config const& mc, target_density const& t,
                                       run_options opt, int dispatch_count = 0);

} // namespace diffrestore

#endif
