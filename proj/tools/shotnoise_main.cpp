// Command-line surface: density tables, conditional CDFs, and the validation
// suite, emitted as CSV or JSON for external plotting.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "shotnoise/conditional.hpp"
#include "shotnoise/edgeworth.hpp"
#include "shotnoise/model.hpp"
#include "shotnoise/oracle.hpp"
#include "shotnoise/sampler.hpp"
#include "shotnoise/table_io.hpp"
#include "shotnoise/validate.hpp"

namespace {

using namespace shotnoise;

int thread_cap() {
    if (const char* env = std::getenv("SHOTNOISE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// Evaluates row i = f(i) for i in [0, n) across the thread cap; rows land in
// submission order regardless of scheduling.
template <class F>
void parallel_rows(size_t n, F&& f) {
    const int workers = std::min<int>(thread_cap(), static_cast<int>(n));
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
            } catch (...) {
                errors[static_cast<size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void emit(const Table& table, const std::string& path, const std::string& format) {
    std::ostringstream buf;
    if (format == "json")
        table.write_json(buf);
    else
        table.write_csv(buf);
    if (path.empty() || path == "-") {
        std::cout << buf.str();
    } else {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open output file: " + path);
        os << buf.str();
    }
}

struct CommonOpts {
    int d = 2;
    double gamma = 4.0;
    std::string format = "csv";
    std::string out;
    std::uint64_t seed = 1;
};

int run_density(const CommonOpts& common, const std::string& y_grid, double r,
                std::vector<int> ks, bool with_oracle) {
    const ModelParams mp = make_params(common.d, common.gamma);
    const std::vector<double> ys = parse_grid(y_grid);
    if (ks.empty()) ks = {2};

    Table table;
    table.meta = {{"command", "density"},
                  {"d", std::to_string(common.d)},
                  {"gamma", format_g17(common.gamma)},
                  {"r", format_g17(r)},
                  {"seed", std::to_string(common.seed)}};
    table.columns = {"y"};
    for (int k : ks) table.columns.push_back("edgeworth_k" + std::to_string(k));
    if (with_oracle) {
        table.columns.push_back("oracle");
        for (int k : ks) table.columns.push_back("rel_error_k" + std::to_string(k));
    }
    for (int k : ks) table.columns.push_back("valid_k" + std::to_string(k));

    table.rows.assign(ys.size(), {});
    QuadratureSpec spec;
    spec.abs_tol = 1e-12;
    spec.rel_tol = 1e-12;
    parallel_rows(ys.size(), [&](size_t i) {
        const double y = ys[i];
        std::vector<double>& row = table.rows[i];
        row.push_back(y);
        std::vector<DensityValue> vals;
        for (int k : ks) {
            vals.push_back(density_Y(mp, y, r, k));
            row.push_back(vals.back().value);
        }
        if (with_oracle) {
            const double oracle = invert_density(mp, y, r, spec, true);
            row.push_back(oracle);
            for (const auto& v : vals)
                row.push_back(std::abs(v.value - oracle) / std::max(std::abs(oracle), 1e-300));
        }
        for (const auto& v : vals) row.push_back(v.theorem_applies ? 1.0 : 0.0);
    });
    emit(table, common.out, common.format);
    return 0;
}

int run_conditional(const CommonOpts& common, double s, const std::string& r_grid, int ell, int k,
                    double a0, bool baseline, long gibbs_draws, const std::string& fs_mode) {
    const ModelParams mp = make_params(common.d, common.gamma);
    const std::vector<double> rs = parse_grid(r_grid);
    ConditionalConfig cfg;
    cfg.ell = ell;
    cfg.k = k;
    if (a0 > 0.0) cfg.a0 = a0;
    if (fs_mode == "scheme") cfg.fs_mode = FsMode::Scheme;
    cfg.validate(mp);

    Table table;
    table.meta = {{"command", "conditional"}, {"s", format_g17(s)},
                  {"ell", std::to_string(ell)}, {"k", std::to_string(cfg.effective_k(mp))},
                  {"a0", format_g17(cfg.a0)},   {"seed", std::to_string(common.seed)}};
    table.columns = {"r", "cdf_scheme", "cdf_scheme_err"};
    if (baseline) table.columns.push_back("cdf_normal_baseline");
    if (gibbs_draws > 0) {
        table.columns.push_back("cdf_gibbs");
        table.columns.push_back("gibbs_se");
    }

    const auto scheme = conditional_cdf_R1_grid(mp, rs, s, cfg);

    std::vector<double> base_cdf;
    if (baseline) {
        // Integrate the baseline density over the same grid segments.
        base_cdf.assign(rs.size(), 0.0);
        std::vector<size_t> order(rs.size());
        for (size_t i = 0; i < rs.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return rs[a] < rs[b]; });
        const double fs = stable_density_S(mp, s);
        double cum = 0.0, prev = std::pow(s, -1.0 / mp.gamma);
        for (size_t idx : order) {
            if (rs[idx] > prev) {
                QuadResult q = integrate(
                    [&](double r1) { return normal_baseline_R1S(mp, r1, s).value; }, prev,
                    rs[idx], fs * 1e-5, 1e-4, 120);
                cum += q.value;
                prev = rs[idx];
            }
            base_cdf[idx] = cum / fs;
        }
    }

    std::vector<double> gibbs_cdf, gibbs_se;
    if (gibbs_draws > 0) {
        const int n = 64;
        const double m = gibbs_box(mp, n);
        const double s_eff = s - mp.d3 * std::pow(m, (mp.d - mp.gamma) / mp.d);
        if (!(s_eff > n * std::pow(m, -mp.gamma / mp.d)))
            throw std::domain_error("conditional: s too small for the n=64 Gibbs comparison");
        GibbsChainState st = gibbs_init(mp, n, m, s_eff);
        CounterRng rng(common.seed);
        gibbs_run_poisson(mp, st, 100L * n, rng);
        std::vector<double> r1s;
        r1s.reserve(static_cast<size_t>(gibbs_draws));
        for (long i = 0; i < gibbs_draws; ++i) {
            gibbs_run_poisson(mp, st, 2, rng);
            double umin = st.u[0];
            for (double u : st.u) umin = std::min(umin, u);
            r1s.push_back(std::pow(umin, 1.0 / mp.d));
        }
        const double ess = effective_sample_size(r1s);
        std::sort(r1s.begin(), r1s.end());
        gibbs_cdf.resize(rs.size());
        gibbs_se.resize(rs.size());
        for (size_t i = 0; i < rs.size(); ++i) {
            const double f =
                static_cast<double>(std::upper_bound(r1s.begin(), r1s.end(), rs[i]) - r1s.begin()) /
                static_cast<double>(r1s.size());
            gibbs_cdf[i] = f;
            gibbs_se[i] = std::sqrt(std::max(f * (1.0 - f), 1e-12) / std::max(ess, 1.0));
        }
    }

    for (size_t i = 0; i < rs.size(); ++i) {
        std::vector<double> row{rs[i], scheme[i].value, scheme[i].error};
        if (baseline) row.push_back(base_cdf[i]);
        if (gibbs_draws > 0) {
            row.push_back(gibbs_cdf[i]);
            row.push_back(gibbs_se[i]);
        }
        table.rows.push_back(std::move(row));
    }
    emit(table, common.out, common.format);
    return 0;
}

int run_validate(const CommonOpts& common, const std::string& only) {
    const auto results = run_validation(only, common.seed);
    if (results.empty()) throw std::invalid_argument("validate: unknown module '" + only + "'");
    Table table;
    table.meta = {{"command", "validate"}, {"seed", std::to_string(common.seed)}};
    table.columns = {"pass", "measured", "bound"};
    bool all_pass = true;
    for (const auto& res : results) {
        table.rows.push_back({res.pass ? 1.0 : 0.0, res.measured, res.bound});
        all_pass = all_pass && res.pass;
        std::cerr << (res.pass ? "[PASS] " : "[FAIL] ") << res.module << ": " << res.name
                  << "  (measured " << res.measured << ", bound " << res.bound << ")\n";
    }
    emit(table, common.out, common.format);
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"power-law shot noise densities and conditional distributions"};
    app.require_subcommand(1);
    CommonOpts common;
    app.add_option("--d", common.d, "spatial dimension");
    app.add_option("--gamma", common.gamma, "pathloss exponent (> d)");
    app.add_option("--format", common.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", common.out, "output path (default stdout)");
    app.add_option("--seed", common.seed, "RNG seed for MC-touching paths");

    auto* density = app.add_subcommand("density", "Edgeworth density table over a y grid");
    std::string y_grid = "-2:4:0.25";
    double r = 2.0;
    std::vector<int> ks;
    bool with_oracle = false;
    density->add_option("--y", y_grid, "grid start:stop:step or comma list");
    density->add_option("--r", r, "truncation radius");
    density->add_option("--k", ks, "expansion orders")->delimiter(',');
    density->add_flag("--oracle", with_oracle, "add inversion-oracle and rel-error columns");

    auto* cond = app.add_subcommand("conditional", "conditional CDF of the nearest distance");
    double s = 10.0, a0 = -1.0;
    int ell = 4, k = -1;
    std::string r_grid = "0.2:2.0:0.05", fs_mode = "auto";
    bool baseline = false;
    long gibbs_draws = 0;
    cond->add_option("--s", s, "conditioning value S = s");
    cond->add_option("--r", r_grid, "radius grid");
    cond->add_option("--ell", ell, "number of integrated nearest points");
    cond->add_option("--k", k, "Edgeworth order (-1: floor(sqrt(a0*ell)))");
    cond->add_option("--a0", a0, "cutoff constant in (0, 1/d2)");
    cond->add_flag("--baseline", baseline, "add the plain-normal baseline column");
    cond->add_option("--gibbs-draws", gibbs_draws, "add an empirical-CDF column from the sampler");
    cond->add_option("--fS", fs_mode, "denominator: auto|closed|scheme")
        ->check(CLI::IsMember({"auto", "closed", "scheme"}));

    auto* val = app.add_subcommand("validate", "run the invariant suites");
    std::string only;
    val->add_option("--only", only, "restrict to one module");

    try {
        app.parse(argc, argv);
        if (density->parsed()) return run_density(common, y_grid, r, ks, with_oracle);
        if (cond->parsed())
            return run_conditional(common, s, r_grid, ell, k, a0, baseline, gibbs_draws, fs_mode);
        return run_validate(common, only);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    }
}
