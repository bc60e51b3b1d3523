#include "diffrestore/dynamics.hpp"

#include <cmath>

namespace diffrestore {

torus_point langevin_step(langevin_config const& cfg, target_density const& t,
                          torus_point const& x, philox_rng& rng)
{
    std::vector<double> const score = t.score(x);
    double const half_var = 0.5 * cfg.stddev * cfg.stddev;
    torus_point y = x;
    int const blocks = x.dim() / 2;
    for (int b = 0; b < blocks; ++b) {
        int const i = 2 * b;
        auto const [z0, z1] = rng.normal2();
        auto const [r0, r1] = rotate_block(cfg.c_tilde,
                                           score[static_cast<std::size_t>(i)],
                                           score[static_cast<std::size_t>(i + 1)]);
        y[i] = wrap_coord(y[i] + half_var * score[static_cast<std::size_t>(i)] + r0 + cfg.stddev * z0);
        y[i + 1] = wrap_coord(y[i + 1] + half_var * score[static_cast<std::size_t>(i + 1)] + r1 + cfg.stddev * z1);
    }
    return y;
}

namespace {

torus_point wrapped_gaussian_perturb(torus_point const& x, double stddev, philox_rng& rng)
{
    torus_point y = x;
    for (int b = 0; b < x.dim() / 2; ++b) {
        auto const [z0, z1] = rng.normal2();
        y[2 * b] = wrap_coord(y[2 * b] + stddev * z0);
        y[2 * b + 1] = wrap_coord(y[2 * b + 1] + stddev * z1);
    }
    return y;
}

// Nearest-image log proposal density up to the shared normalization constant.
double log_nearest_image_gaussian(torus_point const& mean, torus_point const& at, double stddev)
{
    double acc = 0.0;
    for (int i = 0; i < mean.dim(); ++i) {
        double const d = toroidal_delta_coord(mean[i], at[i]);
        acc += d * d;
    }
    return -acc / (2.0 * stddev * stddev);
}

bool accept(double ratio, philox_rng& rng)
{
    return ratio >= 1.0 || rng.uniform() < ratio;
}

} // namespace

mh_step_result metropolis_step(metropolis_config const& cfg, target_density const& t,
                               torus_point const& x, target_evaluation const& eval_x,
                               philox_rng& rng)
{
    bool const large = rng.uniform() < cfg.large_step_prob;
    torus_point y = large ? sample_uniform(rng, t.dim())
                          : wrapped_gaussian_perturb(x, cfg.stddev, rng);
    target_evaluation eval_y = t.eval(y);
    double const ratio = (eval_y.p + kDensityEpsilon) / (eval_x.p + kDensityEpsilon);
    if (accept(ratio, rng))
        return { std::move(y), eval_y, true };
    return { x, eval_x, false };
}

mala_step_result mala_step(mala_config const& cfg, target_density const& t,
                           torus_point const& x, target_evaluation const& eval_x,
                           std::vector<double> const& score_x, philox_rng& rng)
{
    if (rng.uniform() < cfg.large_step_prob) {
        torus_point y = sample_uniform(rng, t.dim());
        target_evaluation eval_y = t.eval(y);
        double const ratio = (eval_y.p + kDensityEpsilon) / (eval_x.p + kDensityEpsilon);
        if (accept(ratio, rng))
            return { std::move(y), eval_y, t.score(y), true };
        return { x, eval_x, score_x, false };
    }

    double const half_var = 0.5 * cfg.stddev * cfg.stddev;
    std::vector<double> fwd_mean(static_cast<std::size_t>(x.dim()));
    for (int i = 0; i < x.dim(); ++i)
        fwd_mean[static_cast<std::size_t>(i)] =
            wrap_coord(x[i] + half_var * score_x[static_cast<std::size_t>(i)]);
    torus_point const fwd = torus_point{ fwd_mean };

    torus_point y = x;
    for (int b = 0; b < x.dim() / 2; ++b) {
        auto const [z0, z1] = rng.normal2();
        y[2 * b] = wrap_coord(fwd[2 * b] + cfg.stddev * z0);
        y[2 * b + 1] = wrap_coord(fwd[2 * b + 1] + cfg.stddev * z1);
    }

    target_evaluation eval_y = t.eval(y);
    std::vector<double> score_y = t.score(y);
    std::vector<double> rev_mean(static_cast<std::size_t>(x.dim()));
    for (int i = 0; i < x.dim(); ++i)
        rev_mean[static_cast<std::size_t>(i)] =
            wrap_coord(y[i] + half_var * score_y[static_cast<std::size_t>(i)]);
    torus_point const rev = torus_point{ rev_mean };

    double const log_ratio =
        std::log(eval_y.p + kDensityEpsilon) - std::log(eval_x.p + kDensityEpsilon) +
        log_nearest_image_gaussian(rev, x, cfg.stddev) -
        log_nearest_image_gaussian(fwd, y, cfg.stddev);
    if (accept(std::exp(log_ratio), rng))
        return { std::move(y), eval_y, std::move(score_y), true };
    return { x, eval_x, score_x, false };
}

} // namespace diffrestore
