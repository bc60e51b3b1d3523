#ifndef DIFFRESTORE_DYNAMICS_HPP
#define DIFFRESTORE_DYNAMICS_HPP

#include <string_view>
#include <utility>
#include <vector>

#include "diffrestore/rng.hpp"
#include "diffrestore/targets.hpp"
#include "diffrestore/torus.hpp"

namespace diffrestore {

// Reparameterized Euler-Maruyama step: stddev = sqrt(dt) * sigma is the
// per-step Gaussian scale and c_tilde = dt * c / 2 the rotation strength.
// dt is kept because the embedded holding rate is 1/dt.
struct langevin_config {
    double stddev = 5e-3;
    double c_tilde = 0.0;
    double dt = 1e-5;

    double sigma_sq() const { return stddev * stddev / dt; }
    double rotation_c() const { return 2.0 * c_tilde / dt; }
};

struct metropolis_config {
    double stddev = 1e-2;
    double large_step_prob = 0.3;
};

struct mala_config {
    double stddev = 5e-3;
    double large_step_prob = 0.0;
};

// Per-block rotation of the score: returns c_tilde * (v1, -v0).
inline std::pair<double, double> rotate_block(double c_tilde, double v0, double v1)
{
    return { c_tilde * v1, -c_tilde * v0 };
}

// One Euler-Maruyama step of the nonreversible Langevin diffusion, wrapped.
// Consumes exactly d/2 independent 2-d standard normals in block order.
torus_point langevin_step(langevin_config const& cfg, target_density const& t,
                          torus_point const& x, philox_rng& rng);

struct mh_step_result {
    torus_point x;
    target_evaluation eval;
    bool accepted = false;
};

// Random-walk Metropolis on the penalized density p + eps: wrapped-Gaussian
// small step, or (with large_step_prob) an independent uniform proposal
// accepted with the plain density ratio.
mh_step_result metropolis_step(metropolis_config const& cfg, target_density const& t,
                               torus_point const& x, target_evaluation const& eval_x,
                               philox_rng& rng);

struct mala_step_result {
    torus_point x;
    target_evaluation eval;
    std::vector<double> score;
    bool accepted = false;
};

// MALA: proposal ~ wrapped-N(x + (stddev^2/2) score(x), stddev^2 I) with the
// Metropolis-Hastings ratio using nearest-image proposal densities. For
// stddev <= 1e-2 the neglected wrap images contribute less than exp(-1000)
// relatively. Large steps as in metropolis_step.
mala_step_result mala_step(mala_config const& cfg, target_density const& t,
                           torus_point const& x, target_evaluation const& eval_x,
                           std::vector<double> const& score_x, philox_rng& rng);

} // namespace diffrestore

#endif
