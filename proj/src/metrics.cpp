#include "diffrestore/metrics.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace diffrestore {

error_report compare(image const& test, image const& ref)
{
    if (test.width != ref.width || test.height != ref.height)
        throw std::invalid_argument("compare: image dimensions differ");
    error_report r;
    std::size_t const n = test.pixels.size() * 3;
    for (std::size_t i = 0; i < test.pixels.size(); ++i)
        for (int c = 0; c < 3; ++c) {
            double const tv = test.pixels[i][static_cast<std::size_t>(c)];
            double const rv = ref.pixels[i][static_cast<std::size_t>(c)];
            double const d = tv - rv;
            r.mae += std::abs(d);
            r.mse += d * d;
            r.mrse += d * d / (rv * rv + 1e-2);
            r.mape += std::abs(d) / (rv + 1e-2);
        }
    r.mae /= static_cast<double>(n);
    r.mse /= static_cast<double>(n);
    r.mrse /= static_cast<double>(n);
    r.mape /= static_cast<double>(n);
    return r;
}

std::vector<curve_row> convergence_curve(std::string const& method, method_runner const& run,
                                         image const& reference,
                                         std::vector<long long> const& budgets,
                                         std::vector<std::uint64_t> const& seeds)
{
    for (std::size_t i = 1; i < budgets.size(); ++i)
        if (budgets[i] <= budgets[i - 1])
            throw std::invalid_argument("convergence_curve: budgets must be ascending");
    std::vector<curve_row> rows;
    rows.reserve(budgets.size() * seeds.size());
    for (long long budget : budgets)
        for (std::uint64_t seed : seeds) {
            curve_row row;
            row.method = method;
            row.budget = budget;
            row.seed = seed;
            row.err = compare(run(budget, seed), reference);
            rows.push_back(std::move(row));
        }
    return rows;
}

void write_curves_csv(std::vector<curve_row> const& rows, std::string const& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << "method,budget,seed,mae,mse,mrse,mape\n";
    for (curve_row const& r : rows)
        out << r.method << ',' << r.budget << ',' << r.seed << ',' << r.err.mae << ','
            << r.err.mse << ',' << r.err.mrse << ',' << r.err.mape << '\n';
}

} // namespace diffrestore
