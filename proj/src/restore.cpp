#include "diffrestore/restore.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace diffrestore {

namespace {

// Stream purpose tags for philox_rng::for_stream.
constexpr std::uint32_t kStreamChain = 0;
constexpr std::uint32_t kStreamBootstrap = 1;
constexpr std::uint32_t kStreamPathTracing = 2;

// Chains are partitioned into a fixed number of blocks, each processed by
// exactly one worker and merged in block order, so the floating-point
// summation order never depends on the thread count.
constexpr int kAccumulationBlocks = 64;

int resolve_threads(int requested)
{
    if (requested > 0)
        return requested;
    unsigned const hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(block_index) for block_index in [0, num_blocks) on a worker pool.
void parallel_blocks(int num_blocks, int threads, std::function<void(int)> const& fn)
{
    threads = std::min(resolve_threads(threads), num_blocks);
    if (threads <= 1) {
        for (int b = 0; b < num_blocks; ++b)
            fn(b);
        return;
    }
    std::atomic<int> next{ 0 };
    auto worker = [&] {
        for (;;) {
            int const b = next.fetch_add(1);
            if (b >= num_blocks)
                return;
            fn(b);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads) - 1);
    for (int i = 0; i < threads - 1; ++i)
        pool.emplace_back(worker);
    worker();
    for (std::thread& th : pool)
        th.join();
}

struct block_tally {
    long long kills = 0;
    long long local_steps = 0;
    long long completed_tour_steps = 0;
    std::vector<int> tour_lengths;
};

double resolved_p_lambda(restore_config const& cfg, target_density const& t,
                         std::uint64_t seed)
{
    if (cfg.p_lambda > 0.0)
        return cfg.p_lambda;
    if (auto const exact = t.normalization())
        return *exact;
    // Bootstrap pass: one dispatch of image resolution size, ordinary
    // independent sampling.
    philox_rng rng = philox_rng::for_stream(0, seed, 0, kStreamBootstrap);
    return estimate_normalization(t, rng, t.pixel_count()).estimate;
}

} // namespace

double holding_rate(restore_config const& cfg)
{
    if (cfg.holding == holding_mode::unit)
        return 1.0;
    if (!(cfg.dt > 0.0))
        throw std::invalid_argument("holding_rate: dt must be > 0");
    return 1.0 / cfg.dt;
}

double killing_rate(restore_config const& cfg, double p, double regen_density_ratio)
{
    return regen_density_ratio * cfg.kappa0 / (p + kDensityEpsilon);
}

double derive_kappa0(restore_config const& cfg, double p_lambda)
{
    if (cfg.holding == holding_mode::unit)
        return p_lambda / cfg.m;
    return p_lambda / (cfg.m * cfg.dt);
}

void accumulate(chain_state& chain, restore_config const& cfg, target_density const& t,
                accumulation_image& acc)
{
    target_evaluation const e = t.eval(chain.x);
    chain.p = e.p;
    chain.pixel_index = e.pixel;

    double const lambda = holding_rate(cfg);
    double const kappa = killing_rate(cfg, e.p);
    double const dtau1 = chain.rng.exponential(lambda);
    double const dtau2 = chain.rng.exponential(kappa);

    double dtau;
    if (dtau1 < dtau2) {
        dtau = dtau1;
        chain.killed = false;
    } else {
        dtau = dtau2;
        chain.killed = true;
        ++acc.tour_count;
    }

    if (e.p > 0.0) {
        chain.f_over_p = (1.0 / e.p) * e.f;
        acc.buffer[static_cast<std::size_t>(e.pixel)] =
            acc.buffer[static_cast<std::size_t>(e.pixel)] + dtau * chain.f_over_p;
    }
}

regeneration_sampler uniform_regeneration()
{
    return [](philox_rng& rng, int d) { return sample_uniform(rng, d); };
}

void langevin_dynamics::advance(chain_state& chain, target_density const& t) const
{
    chain.x = langevin_step(m_cfg, t, chain.x, chain.rng);
    chain.score.clear();
}

void metropolis_dynamics::advance(chain_state& chain, target_density const& t) const
{
    // accumulate() refreshed p at the current x; pixel/f are re-derived there
    // as well, so only p matters for the ratio.
    target_evaluation eval_x;
    eval_x.p = chain.p;
    mh_step_result r = metropolis_step(m_cfg, t, chain.x, eval_x, chain.rng);
    if (r.accepted) {
        chain.x = std::move(r.x);
        chain.p = r.eval.p;
    }
}

void mala_dynamics::advance(chain_state& chain, target_density const& t) const
{
    if (chain.score.empty())
        chain.score = t.score(chain.x);
    target_evaluation eval_x;
    eval_x.p = chain.p;
    mala_step_result r = mala_step(m_cfg, t, chain.x, eval_x, chain.score, chain.rng);
    if (r.accepted) {
        chain.x = std::move(r.x);
        chain.p = r.eval.p;
        chain.score = std::move(r.score);
    }
}

void evolve(chain_state& chain, restore_config const& cfg, local_dynamics const& dyn,
            target_density const& t, accumulation_image& acc, regeneration_sampler const& nu)
{
    if (chain.killed) {
        chain.x = nu(chain.rng, t.dim());
        chain.score.clear();
    } else {
        dyn.advance(chain, t);
    }
    accumulate(chain, cfg, t, acc);
}

resolve_result resolve(accumulation_image const& acc, restore_config const& cfg,
                       int width, int height)
{
    resolve_result out;
    out.img = image(width, height);
    if (acc.tour_count == 0) {
        out.tour_count_zero = true;
        return out;
    }
    double const scale = cfg.kappa0 / static_cast<double>(acc.tour_count);
    for (std::size_t i = 0; i < acc.buffer.size(); ++i)
        out.img.pixels[i] = scale * acc.buffer[i];
    return out;
}

std::pair<image, run_stats> run_restore(restore_config cfg, local_dynamics const& dyn,
                                        target_density const& t, run_options const& opt,
                                        regeneration_sampler const& nu)
{
    int const pixel_count = t.pixel_count();
    if (pixel_count <= 0)
        throw std::invalid_argument("run_restore: empty image");
    int const dispatch = cfg.dispatch_count > 0 ? cfg.dispatch_count : pixel_count;
    if (dispatch <= 0)
        throw std::invalid_argument("run_restore: dispatch_count must be > 0");
    if (opt.budget <= 0)
        throw std::invalid_argument("run_restore: budget must be > 0");

    double const p_lambda = resolved_p_lambda(cfg, t, opt.seed);
    cfg.p_lambda = p_lambda;
    if (cfg.kappa0 <= 0.0)
        cfg.kappa0 = derive_kappa0(cfg, p_lambda);

    long long const frames = std::max<long long>(1, opt.budget / dispatch);
    long long const steps = frames * dispatch;

    auto const t_begin = std::chrono::steady_clock::now();

    int const num_blocks = std::min(kAccumulationBlocks, dispatch);
    std::vector<accumulation_image> block_acc(static_cast<std::size_t>(num_blocks),
                                              accumulation_image(pixel_count));
    std::vector<block_tally> tallies(static_cast<std::size_t>(num_blocks));

    parallel_blocks(num_blocks, opt.threads, [&](int b) {
        accumulation_image& acc = block_acc[static_cast<std::size_t>(b)];
        block_tally& tally = tallies[static_cast<std::size_t>(b)];
        long long const lo = static_cast<long long>(b) * dispatch / num_blocks;
        long long const hi = static_cast<long long>(b + 1) * dispatch / num_blocks;
        for (long long i = lo; i < hi; ++i) {
            chain_state chain;
            chain.rng = philox_rng::for_stream(static_cast<std::uint64_t>(i), opt.seed,
                                               0, kStreamChain);
            chain.x = nu(chain.rng, t.dim());
            long long tours_before = acc.tour_count;
            accumulate(chain, cfg, t, acc);
            int tour_steps = 0;
            if (acc.tour_count != tours_before) {
                ++tally.kills;
                if (opt.record_tour_lengths)
                    tally.tour_lengths.push_back(0);
            }
            for (long long frame = 1; frame < frames; ++frame) {
                bool const regenerated = chain.killed;
                tours_before = acc.tour_count;
                evolve(chain, cfg, dyn, t, acc, nu);
                if (regenerated) {
                    tour_steps = 0;
                } else {
                    ++tour_steps;
                    ++tally.local_steps;
                }
                if (acc.tour_count != tours_before) {
                    ++tally.kills;
                    tally.completed_tour_steps += tour_steps;
                    if (opt.record_tour_lengths)
                        tally.tour_lengths.push_back(tour_steps);
                }
            }
        }
    });

    accumulation_image total(pixel_count);
    block_tally grand;
    for (int b = 0; b < num_blocks; ++b) {
        accumulation_image const& acc = block_acc[static_cast<std::size_t>(b)];
        for (std::size_t i = 0; i < total.buffer.size(); ++i)
            total.buffer[i] = total.buffer[i] + acc.buffer[i];
        total.tour_count += acc.tour_count;
        block_tally const& tally = tallies[static_cast<std::size_t>(b)];
        grand.kills += tally.kills;
        grand.local_steps += tally.local_steps;
        grand.completed_tour_steps += tally.completed_tour_steps;
        grand.tour_lengths.insert(grand.tour_lengths.end(),
                                  tally.tour_lengths.begin(), tally.tour_lengths.end());
    }

    resolve_result res = resolve(total, cfg, t.image_width(), t.image_height());
    // Pixel-footprint normalization: resolve estimates the integral of f over
    // each pixel; dividing by the pixel area (i.e. multiplying by the pixel
    // count) yields mean radiance, the convention of the other drivers.
    for (rgb& px : res.img.pixels)
        px = static_cast<double>(pixel_count) * px;

    auto const t_end = std::chrono::steady_clock::now();

    run_stats stats;
    stats.method = std::string(dyn.name());
    stats.steps = steps;
    stats.tours = total.tour_count;
    stats.mean_tour_len = grand.kills > 0
        ? static_cast<double>(grand.completed_tour_steps) / static_cast<double>(grand.kills)
        : 0.0;
    stats.kill_frac = static_cast<double>(total.tour_count) / static_cast<double>(steps);
    stats.wall_ms = std::chrono::duration<double, std::milli>(t_end - t_begin).count();
    stats.p_lambda = p_lambda;
    stats.kappa0 = cfg.kappa0;
    stats.tour_lengths = std::move(grand.tour_lengths);
    return { std::move(res.img), std::move(stats) };
}

std::pair<image, run_stats> run_plain_mcmc(plain_mcmc_kind kind, metropolis_config const& mcfg,
                                           mala_config const& lcfg, target_density const& t,
                                           run_options const& opt)
{
    int const pixel_count = t.pixel_count();
    if (pixel_count <= 0)
        throw std::invalid_argument("run_plain_mcmc: empty image");
    if (opt.budget <= 0)
        throw std::invalid_argument("run_plain_mcmc: budget must be > 0");
    int const dispatch = pixel_count;
    long long const frames = std::max<long long>(1, opt.budget / dispatch);
    long long const steps = frames * dispatch;

    auto const t_begin = std::chrono::steady_clock::now();

    // Bootstrap pass for the normalization constant (penalized density).
    philox_rng boot_rng = philox_rng::for_stream(0, opt.seed, 0, kStreamBootstrap);
    double const p_lambda =
        estimate_normalization(t, boot_rng, pixel_count).estimate + kDensityEpsilon;
    double const weight = static_cast<double>(pixel_count) * p_lambda
        / static_cast<double>(steps);

    int const num_blocks = std::min(kAccumulationBlocks, dispatch);
    std::vector<std::vector<rgb>> block_buf(
        static_cast<std::size_t>(num_blocks),
        std::vector<rgb>(static_cast<std::size_t>(pixel_count), rgb{ 0, 0, 0 }));

    parallel_blocks(num_blocks, opt.threads, [&](int b) {
        std::vector<rgb>& buf = block_buf[static_cast<std::size_t>(b)];
        long long const lo = static_cast<long long>(b) * dispatch / num_blocks;
        long long const hi = static_cast<long long>(b + 1) * dispatch / num_blocks;
        for (long long i = lo; i < hi; ++i) {
            philox_rng rng = philox_rng::for_stream(static_cast<std::uint64_t>(i), opt.seed,
                                                    0, kStreamChain);
            torus_point x = sample_uniform(rng, t.dim());
            target_evaluation eval = t.eval(x);
            std::vector<double> score;
            if (kind == plain_mcmc_kind::mala)
                score = t.score(x);
            for (long long frame = 0;; ++frame) {
                buf[static_cast<std::size_t>(eval.pixel)] =
                    buf[static_cast<std::size_t>(eval.pixel)] +
                    (weight / (eval.p + kDensityEpsilon)) * eval.f;
                if (frame + 1 >= frames)
                    break;
                if (kind == plain_mcmc_kind::metropolis) {
                    mh_step_result r = metropolis_step(mcfg, t, x, eval, rng);
                    if (r.accepted) {
                        x = std::move(r.x);
                        eval = r.eval;
                    }
                } else {
                    mala_step_result r = mala_step(lcfg, t, x, eval, score, rng);
                    if (r.accepted) {
                        x = std::move(r.x);
                        eval = r.eval;
                        score = std::move(r.score);
                    }
                }
            }
        }
    });

    image img(t.image_width(), t.image_height());
    for (int b = 0; b < num_blocks; ++b) {
        std::vector<rgb> const& buf = block_buf[static_cast<std::size_t>(b)];
        for (std::size_t i = 0; i < img.pixels.size(); ++i)
            img.pixels[i] = img.pixels[i] + buf[i];
    }

    auto const t_end = std::chrono::steady_clock::now();

    run_stats stats;
    stats.method = kind == plain_mcmc_kind::metropolis ? "metropolis" : "mala";
    stats.steps = steps;
    stats.p_lambda = p_lambda;
    stats.wall_ms = std::chrono::duration<double, std::milli>(t_end - t_begin).count();
    return { std::move(img), std::move(stats) };
}

std::pair<image, run_stats> run_path_tracing(target_density const& t, run_options const& opt)
{
    int const pixel_count = t.pixel_count();
    if (pixel_count <= 0)
        throw std::invalid_argument("run_path_tracing: empty image");
    if (opt.budget <= 0)
        throw std::invalid_argument("run_path_tracing: budget must be >= 1");
    long long const spp = std::max<long long>(1, opt.budget / pixel_count);
    long long const steps = spp * pixel_count;
    int const w = t.image_width(), h = t.image_height();

    auto const t_begin = std::chrono::steady_clock::now();

    image img(w, h);
    int const num_blocks = std::min(kAccumulationBlocks, pixel_count);
    parallel_blocks(num_blocks, opt.threads, [&](int b) {
        long long const lo = static_cast<long long>(b) * pixel_count / num_blocks;
        long long const hi = static_cast<long long>(b + 1) * pixel_count / num_blocks;
        std::vector<double> coords(static_cast<std::size_t>(t.dim()));
        for (long long pix = lo; pix < hi; ++pix) {
            int const px = static_cast<int>(pix % w);
            int const py = static_cast<int>(pix / w);
            rgb sum{ 0, 0, 0 };
            for (long long s = 0; s < spp; ++s) {
                philox_rng rng = philox_rng::for_stream(static_cast<std::uint64_t>(pix),
                                                        opt.seed,
                                                        static_cast<std::uint32_t>(s),
                                                        kStreamPathTracing);
                coords[0] = (px + rng.uniform()) / w;
                coords[1] = (py + rng.uniform()) / h;
                for (int i = 2; i < t.dim(); ++i)
                    coords[static_cast<std::size_t>(i)] = rng.uniform();
                sum = sum + t.eval(torus_point{ coords }).f;
            }
            img.pixels[static_cast<std::size_t>(pix)] = (1.0 / static_cast<double>(spp)) * sum;
        }
    });

    auto const t_end = std::chrono::steady_clock::now();

    run_stats stats;
    stats.method = "pt";
    stats.steps = steps;
    stats.wall_ms = std::chrono::duration<double, std::milli>(t_end - t_begin).count();
    return { std::move(img), std::move(stats) };
}

void write_stats_csv(std::vector<run_stats> const& stats, std::string const& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << "method,steps,tours,mean_tour_len,kill_frac,wall_ms\n";
    for (run_stats const& s : stats)
        out << s.method << ',' << s.steps << ',' << s.tours << ',' << s.mean_tour_len << ','
            << s.kill_frac << ',' << s.wall_ms << '\n';
}

} // namespace diffrestore
