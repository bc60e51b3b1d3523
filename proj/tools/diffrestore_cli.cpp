#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "diffrestore/biaslab.hpp"
#include "diffrestore/config.hpp"
#include "diffrestore/metrics.hpp"
#include "diffrestore/microrender.hpp"
#include "diffrestore/numerics.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

struct cli_overrides {
    int threads = -1;
    std::string out;
    long long seed = -1;
};

void apply_overrides(diffrestore::experiment_config& cfg, cli_overrides const& ov)
{
    if (char const* env = std::getenv("DIFFRESTORE_THREADS"))
        cfg.run.threads = std::atoi(env);
    if (char const* env = std::getenv("DIFFRESTORE_OUT"))
        cfg.run.out = env;
    if (ov.threads >= 0)
        cfg.run.threads = ov.threads;
    if (!ov.out.empty())
        cfg.run.out = ov.out;
    if (ov.seed >= 0)
        cfg.run.seed = static_cast<std::uint64_t>(ov.seed);
}

void ensure_out_dir(std::string const& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

diffrestore::image make_reference(diffrestore::experiment_config const& cfg,
                                  diffrestore::target_density const& target)
{
    if (cfg.target.kind == "renderer")
        return diffrestore::render_reference(cfg.target.sc, cfg.run.reference_spp,
                                             cfg.run.seed + 0x9E3779B9u, cfg.run.threads);
    if (target.dim() == 2)
        return diffrestore::quadrature_reference(target, cfg.run.quadrature);
    // Analytic target in d > 2: fall back to a high-budget independent run.
    diffrestore::run_options opt;
    opt.budget = static_cast<long long>(cfg.run.reference_spp) * target.pixel_count();
    opt.seed = cfg.run.seed + 0x9E3779B9u;
    opt.threads = cfg.run.threads;
    return diffrestore::run_path_tracing(target, opt).first;
}

int cmd_render(diffrestore::experiment_config cfg)
{
    if (cfg.methods.size() != 1) {
        std::cerr << "render expects exactly one method block\n";
        return kExitConfig;
    }
    auto const target = diffrestore::make_target(cfg.target);

    diffrestore::run_options opt;
    opt.budget = cfg.run.budget;
    opt.seed = cfg.run.seed;
    opt.threads = cfg.run.threads;

    auto [img, stats] = diffrestore::run_method(cfg.methods[0], *target, opt,
                                                cfg.run.dispatch_count);
    if (!img.all_finite()) {
        std::cerr << "numeric failure: non-finite pixels in output\n";
        return kExitNumeric;
    }

    ensure_out_dir(cfg.run.out);
    diffrestore::write_pfm(img, cfg.run.out + "/image.pfm");
    diffrestore::write_png(img, cfg.run.out + "/image.png", cfg.run.exposure);
    diffrestore::write_stats_csv({ stats }, cfg.run.out + "/stats.csv");

    std::cout << stats.method << ": " << stats.steps << " steps, " << stats.tours << " tours, "
              << "mean tour " << stats.mean_tour_len << ", " << stats.wall_ms << " ms -> "
              << cfg.run.out << "/image.pfm\n";
    return 0;
}

int cmd_bench(diffrestore::experiment_config cfg)
{
    if (cfg.methods.size() < 2) {
        std::cerr << "bench expects at least two method blocks\n";
        return kExitConfig;
    }
    if (cfg.run.seeds.empty())
        cfg.run.seeds = { cfg.run.seed };
    if (cfg.run.budgets.empty())
        cfg.run.budgets = { cfg.run.budget };

    auto const target = diffrestore::make_target(cfg.target);
    diffrestore::image const reference = make_reference(cfg, *target);

    std::vector<diffrestore::curve_row> rows;
    for (diffrestore::method_config const& mc : cfg.methods) {
        auto runner = [&](long long budget, std::uint64_t seed) {
            diffrestore::run_options opt;
            opt.budget = budget;
            opt.seed = seed;
            opt.threads = cfg.run.threads;
            return diffrestore::run_method(mc, *target, opt, cfg.run.dispatch_count).first;
        };
        auto method_rows = diffrestore::convergence_curve(mc.kind, runner, reference,
                                                          cfg.run.budgets, cfg.run.seeds);
        rows.insert(rows.end(), method_rows.begin(), method_rows.end());
    }

    ensure_out_dir(cfg.run.out);
    diffrestore::write_curves_csv(rows, cfg.run.out + "/curves.csv");

    // Per-method summary at the final budget: median over seeds.
    long long const final_budget = cfg.run.budgets.back();
    std::ofstream summary(cfg.run.out + "/summary.csv");
    summary << "method,budget,median_mse,median_mae,median_mrse,median_mape\n";
    std::cout << "method            median MSE @ " << final_budget << "\n";
    for (diffrestore::method_config const& mc : cfg.methods) {
        std::vector<double> mse, mae, mrse, mape;
        for (auto const& r : rows)
            if (r.method == mc.kind && r.budget == final_budget) {
                mse.push_back(r.err.mse);
                mae.push_back(r.err.mae);
                mrse.push_back(r.err.mrse);
                mape.push_back(r.err.mape);
            }
        auto median = [](std::vector<double> v) {
            std::sort(v.begin(), v.end());
            std::size_t const n = v.size();
            return n == 0 ? 0.0 : (n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]));
        };
        summary << mc.kind << ',' << final_budget << ',' << median(mse) << ',' << median(mae)
                << ',' << median(mrse) << ',' << median(mape) << '\n';
        std::cout << mc.kind << std::string(std::max<std::size_t>(1, 18 - mc.kind.size()), ' ')
                  << median(mse) << "\n";
    }
    return 0;
}

int cmd_bias(diffrestore::experiment_config cfg)
{
    if (!cfg.bias) {
        std::cerr << "bias requires a 'bias' block with a dt_sweep field\n";
        return kExitConfig;
    }
    auto const target = diffrestore::make_target(cfg.target);
    if (target->dim() != 2) {
        std::cerr << "bias requires a d=2 analytic target\n";
        return kExitConfig;
    }
    if (cfg.target.kind == "renderer") {
        std::cerr << "bias requires an analytic target\n";
        return kExitConfig;
    }

    ensure_out_dir(cfg.run.out);
    diffrestore::bias_config const& bc = *cfg.bias;

    std::vector<double> sup_norms;
    for (double dt : bc.dt_sweep) {
        diffrestore::langevin_config lc;
        lc.dt = dt;
        lc.stddev = std::sqrt(dt) * bc.sigma;
        lc.c_tilde = 0.5 * dt * bc.c;
        diffrestore::grid_field const field =
            diffrestore::adjoint_bias_field(lc, *target, bc.grid, bc.quadrature, cfg.run.threads);
        sup_norms.push_back(field.sup_norm());

        std::string tag = std::to_string(dt);
        std::replace(tag.begin(), tag.end(), '.', 'p');
        diffrestore::write_grid_csv(field, cfg.run.out + "/bias_dt" + tag + ".csv");
        double lim = field.sup_norm();
        diffrestore::write_png_gray(field.values, field.n, field.n, -lim, lim,
                                    cfg.run.out + "/bias_dt" + tag + ".png");
        std::cout << "dt " << dt << ": sup|bias| = " << lim << "\n";
    }

    std::ofstream slope_csv(cfg.run.out + "/slope.csv");
    slope_csv << "slope,status\n";
    bool const degenerate =
        *std::max_element(sup_norms.begin(), sup_norms.end()) < 1e-10 || bc.dt_sweep.size() < 2;
    if (degenerate) {
        slope_csv << "nan,degenerate\n";
        std::cout << "slope: degenerate (field vanishes)\n";
    } else {
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < sup_norms.size(); ++i) {
            lx.push_back(std::log(bc.dt_sweep[i]));
            ly.push_back(std::log(std::max(sup_norms[i], 1e-300)));
        }
        double const slope = diffrestore::fit_line(lx, ly).slope;
        slope_csv << slope << ",ok\n";
        std::cout << "slope: " << slope << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{ "Diffusion Restore sampling harness" };
    app.require_subcommand(1);

    std::string config_path;
    cli_overrides ov;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "experiment config file")->required();
        sub->add_option("--threads", ov.threads, "worker thread count (0 = hardware)");
        sub->add_option("--out", ov.out, "output directory");
        sub->add_option("--seed", ov.seed, "seed override");
    };
    CLI::App* render = app.add_subcommand("render", "run one method, write image + stats");
    CLI::App* bench = app.add_subcommand("bench", "equal-sample-count comparison across methods");
    CLI::App* bias = app.add_subcommand("bias", "adjoint bias field sweep over dt");
    add_common(render);
    add_common(bench);
    add_common(bias);

    CLI11_PARSE(app, argc, argv);

    try {
        diffrestore::experiment_config cfg = diffrestore::parse_config_file(config_path);
        apply_overrides(cfg, ov);
        if (render->parsed())
            return cmd_render(std::move(cfg));
        if (bench->parsed())
            return cmd_bench(std::move(cfg));
        return cmd_bias(std::move(cfg));
    } catch (diffrestore::config_error const& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}
