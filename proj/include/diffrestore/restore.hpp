#ifndef DIFFRESTORE_RESTORE_HPP
#define DIFFRESTORE_RESTORE_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "diffrestore/dynamics.hpp"
#include "diffrestore/image.hpp"
#include "diffrestore/rng.hpp"
#include "diffrestore/targets.hpp"
#include "diffrestore/torus.hpp"

namespace diffrestore {

// Holding-time convention for the continuous-time embedding: the diffusion
// variant holds each state for Exp(1/dt); the Metropolis/MALA Restore
// variants fix the holding rate to 1.
enum class holding_mode { embedded, unit };

struct restore_config {
    double m = 64.0;          // expected local steps per tour
    double kappa0 = 0.0;      // killing-rate constant; auto-derived when <= 0
    double dt = 1e-5;
    double p_lambda = 0.0;    // normalization lambda(p); bootstrap/exact when <= 0
    int dispatch_count = 0;   // parallel chains; defaults to pixel_count
    holding_mode holding = holding_mode::embedded;
};

// lambda = 1/dt (embedded) or 1 (unit holding).
double holding_rate(restore_config const& cfg);

// kappa = regen_density_ratio * kappa0 / (p + eps); strictly positive and
// finite even at p = 0. regen_density_ratio is rho/rho_lambda, identically 1
// for uniform regeneration.
double killing_rate(restore_config const& cfg, double p, double regen_density_ratio = 1.0);

// kappa0 = p_lambda / (m dt) (embedded) or p_lambda / m (unit), the choice
// that makes tours perform m local steps on average.
double derive_kappa0(restore_config const& cfg, double p_lambda);

// Per-tour state record. The score field caches the gradient at x for
// gradient-based local dynamics; everything else mirrors the tour structure
// of the sampler (rng, x, pixelIndex, p, f_over_p, killed).
struct chain_state {
    philox_rng rng;
    torus_point x;
    int pixel_index = 0;
    double p = 0.0;
    rgb f_over_p{ 0, 0, 0 };
    bool killed = false;
    std::vector<double> score; // empty = not cached
};

struct accumulation_image {
    std::vector<rgb> buffer;
    long long tour_count = 0;

    explicit accumulation_image(int pixel_count)
        : buffer(static_cast<std::size_t>(pixel_count), rgb{ 0, 0, 0 }) {}
};

// Evaluates the target at chain.x, samples the competing holding/killing
// exponentials, sets the killed flag (incrementing tour_count on a kill) and
// deposits dtau * f/p into the pixel accumulator when p > 0.
void accumulate(chain_state& chain, restore_config const& cfg, target_density const& t,
                accumulation_image& acc);

using regeneration_sampler = std::function<torus_point(philox_rng&, int)>;

regeneration_sampler uniform_regeneration();

// Pluggable local dynamics for the Restore engine. advance() moves chain.x
// by one local transition using the chain's own rng; a rejected MH proposal
// still counts as one local step.
class local_dynamics {
public:
    virtual ~local_dynamics() = default;
    virtual std::string_view name() const = 0;
    virtual void advance(chain_state& chain, target_density const& t) const = 0;
};

class langevin_dynamics final : public local_dynamics {
public:
    explicit langevin_dynamics(langevin_config cfg) : m_cfg(cfg) {}
    std::string_view name() const override { return "diffusion-restore"; }
    void advance(chain_state& chain, target_density const& t) const override;
    langevin_config const& config() const { return m_cfg; }

private:
    langevin_config m_cfg;
};

class metropolis_dynamics final : public local_dynamics {
public:
    explicit metropolis_dynamics(metropolis_config cfg) : m_cfg(cfg) {}
    std::string_view name() const override { return "metropolis"; }
    void advance(chain_state& chain, target_density const& t) const override;

private:
    metropolis_config m_cfg;
};

class mala_dynamics final : public local_dynamics {
public:
    explicit mala_dynamics(mala_config cfg) : m_cfg(cfg) {}
    std::string_view name() const override { return "mala"; }
    void advance(chain_state& chain, target_density const& t) const override;

private:
    mala_config m_cfg;
};

// One evolve pass: local step if alive, regeneration from nu if killed, then
// one accumulation.
void evolve(chain_state& chain, restore_config const& cfg, local_dynamics const& dyn,
            target_density const& t, accumulation_image& acc, regeneration_sampler const& nu);

struct resolve_result {
    image img;
    bool tour_count_zero = false;
};

// out[px] = (kappa0 / tour_count) * buffer[px]; a zero tour count yields an
// all-zero image with the warning flag set instead of dividing.
resolve_result resolve(accumulation_image const& acc, restore_config const& cfg,
                       int width, int height);

struct run_stats {
    std::string method;
    long long steps = 0;
    long long tours = 0;
    double mean_tour_len = 0.0; // completed-tour local steps per tour
    double kill_frac = 0.0;
    double wall_ms = 0.0;
    double p_lambda = 0.0;
    double kappa0 = 0.0;
    std::vector<int> tour_lengths; // populated only when requested
};

struct run_options {
    long long budget = 1;  // total accumulate calls (one per chain per frame)
    std::uint64_t seed = 0;
    int threads = 0;       // 0 = hardware concurrency
    bool record_tour_lengths = false;
};

// Full Restore driver: initializes dispatch_count chains, evolves them for
// budget/dispatch_count frames, resolves. The resolved image is scaled by
// pixel_count so pixel values are mean radiance over the pixel footprint
// (the convention shared by the path-tracing driver and the quadrature
// references). Bit-identical output for any thread count given a seed.
std::pair<image, run_stats> run_restore(restore_config cfg, local_dynamics const& dyn,
                                        target_density const& t, run_options const& opt,
                                        regeneration_sampler const& nu = uniform_regeneration());

enum class plain_mcmc_kind { metropolis, mala };

// Plain MH baseline: bootstrap pass of pixel_count uniform samples estimates
// p_lambda, then every visited state contributes (f/p_hat) * p_lambda / N to
// its pixel (scaled to the mean-radiance convention).
std::pair<image, run_stats> run_plain_mcmc(plain_mcmc_kind kind, metropolis_config const& mcfg,
                                           mala_config const& lcfg, target_density const& t,
                                           run_options const& opt);

// Independent-sampling baseline: the first two coordinates are stratified
// per pixel, the rest are uniform; per-pixel mean of f.
std::pair<image, run_stats> run_path_tracing(target_density const& t, run_options const& opt);

void write_stats_csv(std::vector<run_stats> const& stats, std::string const& path);

} // namespace diffrestore

#endif
