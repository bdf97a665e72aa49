#include "unravel/cli/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "unravel/cli/model_spec.hpp"
#include "unravel/cli/output.hpp"
#include "unravel/functionals.hpp"
#include "unravel/poisson.hpp"
#include "unravel/rng.hpp"
#include "unravel/wiener.hpp"

namespace unravel::cli {

using nlohmann::json;

namespace {

/// JSON has no inf/nan; those are written as strings.
json number(double x)
{
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

json estimate_json(const Estimate& e)
{
    return {{"mean", number(e.mean)}, {"se", number(e.se)}, {"samples", e.samples}};
}

std::string basis_label(std::size_t dim, std::size_t i)
{
    if (dim == 2) return i == 0 ? "g" : "e";
    return std::to_string(i);
}

std::string pair_label(std::size_t i, std::size_t k)
{
    return std::to_string(i) + "_" + std::to_string(k);
}

std::size_t resolve_workers(const CommandOptions& options)
{
    return options.workers ? options.workers : workers_from_env();
}

void prepare_out_dir(const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
}

// --- master --------------------------------------------------------------------------

CsvTable master_table(const MasterSolution& sol, const Measurement& meas)
{
    const std::size_t dim = sol.states.front().dim();
    std::vector<Column> cols{{"t", "time"}};
    for (std::size_t r = 0; r < dim; ++r) {
        const std::string a = basis_label(dim, r);
        cols.push_back({"rho_" + a + a, ""});
    }
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = r + 1; c < dim; ++c) {
            const std::string ab = basis_label(dim, r) + basis_label(dim, c);
            cols.push_back({"rho_" + ab + "_re", ""});
            cols.push_back({"rho_" + ab + "_im", ""});
        }
    }
    for (std::size_t i = 0; i < meas.outcomes(); ++i) cols.push_back({"p_" + std::to_string(i), ""});
    cols.push_back({"S_vN", "nat"});
    cols.push_back({"S_A", "nat"});

    CsvTable table(std::move(cols));
    for (std::size_t k = 0; k < sol.states.size(); ++k) {
        const DensityMatrix& rho = sol.states[k];
        std::vector<double> row{sol.grid.time(k)};
        for (std::size_t r = 0; r < dim; ++r) row.push_back(rho(r, r).real());
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = r + 1; c < dim; ++c) {
                row.push_back(rho(r, c).real());
                row.push_back(rho(r, c).imag());
            }
        }
        for (const auto& effect : meas.effects()) row.push_back((rho.matrix() * effect).trace().real());
        row.push_back(von_neumann_entropy(rho));
        row.push_back(measurement_entropy(rho, meas));
        table.add_row(row);
    }
    return table;
}

MasterSolution solve_master(const EnsembleConfig& config)
{
    return integrate_master(config.model, projector_of(config.psi0), config.grid);
}

// --- ensemble ------------------------------------------------------------------------

CsvTable ensemble_table(const EnsembleStats& stats)
{
    const std::size_t dim = stats.points.front().mean_projector.dim();
    const auto n_out = static_cast<std::size_t>(stats.points.front().mean_p.size());
    std::vector<Column> cols{{"t", "time"}};
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = r; c < dim; ++c) {
            const std::string ab = "proj_" + basis_label(dim, r) + basis_label(dim, c);
            cols.push_back({ab + "_re", ""});
            cols.push_back({ab + "_re_se", ""});
            if (c != r) {
                cols.push_back({ab + "_im", ""});
                cols.push_back({ab + "_im_se", ""});
            }
        }
    }
    for (std::size_t i = 0; i < n_out; ++i) {
        cols.push_back({"p_" + std::to_string(i), ""});
        cols.push_back({"p_" + std::to_string(i) + "_se", ""});
    }
    for (std::size_t i = 0; i < n_out; ++i) {
        for (std::size_t k = i; k < n_out; ++k) {
            cols.push_back({"pp_" + pair_label(i, k), ""});
            cols.push_back({"pp_" + pair_label(i, k) + "_se", ""});
        }
    }
    cols.push_back({"mean_S", "nat"});
    cols.push_back({"mean_S_se", "nat"});
    cols.push_back({"S_A_ens", "nat"});
    cols.push_back({"S_A_ens_se", "nat"});
    cols.push_back({"mean_f", "nat/time"});
    cols.push_back({"mean_f_se", "nat/time"});
    cols.push_back({"f_samples", "count"});
    cols.push_back({"boundary_flags", "count"});
    for (std::size_t i = 0; i < n_out; ++i) {
        for (std::size_t k = i; k < n_out; ++k) {
            cols.push_back({"drift_" + pair_label(i, k), "1/time"});
            cols.push_back({"drift_" + pair_label(i, k) + "_se", "1/time"});
        }
    }

    CsvTable table(std::move(cols));
    for (const auto& gp : stats.points) {
        std::vector<double> row{gp.time};
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = r; c < dim; ++c) {
                const auto er = static_cast<Eigen::Index>(r);
                const auto ec = static_cast<Eigen::Index>(c);
                row.push_back(gp.mean_projector(r, c).real());
                row.push_back(gp.projector_se_re(er, ec));
                if (c != r) {
                    row.push_back(gp.mean_projector(r, c).imag());
                    row.push_back(gp.projector_se_im(er, ec));
                }
            }
        }
        for (Eigen::Index i = 0; i < gp.mean_p.size(); ++i) {
            row.push_back(gp.mean_p(i));
            row.push_back(gp.p_se(i));
        }
        for (Eigen::Index i = 0; i < gp.mean_p.size(); ++i) {
            for (Eigen::Index k = i; k < gp.mean_p.size(); ++k) {
                row.push_back(gp.mean_pp(i, k));
                row.push_back(gp.pp_se(i, k));
            }
        }
        row.push_back(gp.entropy.mean);
        row.push_back(gp.entropy.se);
        row.push_back(gp.measurement_entropy);
        row.push_back(gp.measurement_entropy_se);
        row.push_back(gp.f.mean);
        row.push_back(gp.f.se);
        row.push_back(static_cast<double>(gp.f.samples));
        row.push_back(static_cast<double>(gp.boundary_flags));
        for (Eigen::Index i = 0; i < gp.mean_p.size(); ++i) {
            for (Eigen::Index k = i; k < gp.mean_p.size(); ++k) {
                row.push_back(gp.mean_drift(i, k));
                row.push_back(gp.drift_se(i, k));
            }
        }
        table.add_row(row);
    }
    return table;
}

CsvTable second_moment_table(const EnsembleStats& stats)
{
    const auto n_out = static_cast<std::size_t>(stats.points.front().mean_p.size());
    std::vector<Column> cols{{"t", "time"}, {"half_width", "time"}};
    for (std::size_t i = 0; i < n_out; ++i) {
        for (std::size_t k = i; k < n_out; ++k) {
            const std::string ik = pair_label(i, k);
            cols.push_back({"fd_" + ik, "1/time"});
            cols.push_back({"drift_" + ik, "1/time"});
            cols.push_back({"residual_" + ik, "1/time"});
            cols.push_back({"residual_" + ik + "_se", "1/time"});
        }
    }
    CsvTable table(std::move(cols));
    for (const auto& w : stats.second_moment) {
        std::vector<double> row{w.time, w.half_width};
        for (Eigen::Index i = 0; i < w.residual.rows(); ++i) {
            for (Eigen::Index k = i; k < w.residual.cols(); ++k) {
                row.push_back(w.fd_derivative(i, k));
                row.push_back(w.window_drift(i, k));
                row.push_back(w.residual(i, k));
                row.push_back(w.residual_se(i, k));
            }
        }
        table.add_row(row);
    }
    return table;
}

json ensemble_summary(const EnsembleConfig& config, const EnsembleStats& stats)
{
    json jumps = json::array();
    for (const auto& e : stats.jumps_per_trajectory) jumps.push_back(estimate_json(e));
    json s;
    s["unraveling"] = to_string(stats.unraveling);
    s["n_traj"] = stats.n_traj;
    s["seed"] = stats.master_seed;
    s["jumps_per_trajectory"] = std::move(jumps);
    s["first_jump_time"] = estimate_json(stats.first_jump_time);
    s["trajectories_with_jump"] = stats.trajectories_with_jump;
    s["max_norm_drift"] = number(stats.max_norm_drift);
    s["spec"] = to_json(config);
    return s;
}

// --- compare -------------------------------------------------------------------------

CsvTable compare_table(const ComparisonReport& report, const EnsembleStats& stats)
{
    const auto n_out = static_cast<std::size_t>(report.points.front().p_residual_se.size());
    std::vector<Column> cols{{"t", "time"}, {"trace_distance", ""}};
    for (std::size_t i = 0; i < n_out; ++i) cols.push_back({"p_" + std::to_string(i) + "_residual", "SE"});
    cols.push_back({"projector_residual", "SE"});
    cols.push_back({"S_A_master", "nat"});
    cols.push_back({"S_A_ens", "nat"});
    cols.push_back({"S_A_agreement", "SE"});
    cols.push_back({"S_vN", "nat"});
    cols.push_back({"mean_S", "nat"});
    cols.push_back({"jensen_gap", "nat"});
    cols.push_back({"jensen_gap_se", "nat"});
    cols.push_back({"jensen_gap_pooled_se", "nat"});
    CsvTable table(std::move(cols));
    for (std::size_t k = 0; k < report.points.size(); ++k) {
        const GridComparison& c = report.points[k];
        std::vector<double> row{c.time, c.trace_distance};
        for (Eigen::Index i = 0; i < c.p_residual_se.size(); ++i) row.push_back(c.p_residual_se(i));
        row.push_back(c.projector_residual_se);
        row.push_back(c.master_measurement_entropy);
        row.push_back(c.ensemble_measurement_entropy);
        row.push_back(c.measurement_entropy_agreement_se);
        row.push_back(c.von_neumann_entropy);
        row.push_back(stats.points[k].entropy.mean);
        row.push_back(c.jensen_gap);
        row.push_back(c.jensen_gap_se);
        row.push_back(c.jensen_gap_pooled_se);
        table.add_row(row);
    }
    return table;
}

CsvTable window_table(const std::vector<WindowComparison>& windows)
{
    const auto n_out = static_cast<std::size_t>(windows.empty() ? 0 : windows.front().residual_se.rows());
    std::vector<Column> cols{{"t", "time"}};
    for (std::size_t i = 0; i < n_out; ++i) {
        for (std::size_t k = i; k < n_out; ++k) {
            const std::string ik = pair_label(i, k);
            cols.push_back({"fd_" + ik, "1/time"});
            cols.push_back({"drift_" + ik, "1/time"});
            cols.push_back({"residual_" + ik, "SE"});
        }
    }
    CsvTable table(std::move(cols));
    for (const auto& w : windows) {
        std::vector<double> row{w.time};
        for (Eigen::Index i = 0; i < w.residual_se.rows(); ++i) {
            for (Eigen::Index k = i; k < w.residual_se.cols(); ++k) {
                row.push_back(w.fd_derivative(i, k));
                row.push_back(w.window_drift(i, k));
                row.push_back(w.residual_se(i, k));
            }
        }
        table.add_row(row);
    }
    return table;
}

CsvTable discrepancy_table(const std::vector<DiscrepancyPoint>& points)
{
    const auto n_out = static_cast<std::size_t>(points.front().wiener_pp.rows());
    std::vector<Column> cols{{"t", "time"}};
    for (std::size_t i = 0; i < n_out; ++i) {
        for (std::size_t k = i; k < n_out; ++k) {
            const std::string ik = pair_label(i, k);
            cols.push_back({"wiener_pp_" + ik, ""});
            cols.push_back({"poisson_pp_" + ik, ""});
            cols.push_back({"difference_" + ik, "pooled SE"});
        }
    }
    CsvTable table(std::move(cols));
    for (const auto& d : points) {
        std::vector<double> row{d.time};
        for (Eigen::Index i = 0; i < d.wiener_pp.rows(); ++i) {
            for (Eigen::Index k = i; k < d.wiener_pp.cols(); ++k) {
                row.push_back(d.wiener_pp(i, k));
                row.push_back(d.poisson_pp(i, k));
                row.push_back(d.pooled_se_units(i, k));
            }
        }
        table.add_row(row);
    }
    return table;
}

json check(double value, double limit, bool upper)
{
    const bool pass = upper ? value <= limit : value >= limit;
    return {{"value", number(value)}, {"limit", number(limit)}, {"pass", pass}};
}

json report_summary(const ComparisonReport& report, const CompareThresholds& th, bool& all_pass)
{
    json checks;
    checks["max_trace_distance"] = check(report.max_trace_distance(), th.max_trace_distance, true);
    checks["max_p_residual_se"] = check(report.max_p_residual_se(), th.max_p_residual_se, true);
    checks["max_projector_residual_se"] =
        check(report.max_projector_residual_se(), th.max_projector_residual_se, true);
    checks["min_jensen_gap_se"] = check(report.min_jensen_gap_se(), th.min_jensen_gap_se, false);
    checks["max_second_moment_residual_se"] =
        check(report.max_second_moment_residual_se(), th.max_second_moment_residual_se, true);
    checks["max_measurement_entropy_agreement_se"] =
        check(report.max_measurement_entropy_agreement_se(), th.max_measurement_entropy_agreement_se, true);
    for (const auto& [name, c] : checks.items()) all_pass = all_pass && c["pass"].get<bool>();
    return checks;
}

// --- functionals ---------------------------------------------------------------------

double or_nan(bool ok, double x)
{
    return ok ? x : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::size_t workers_from_env()
{
    if (const char* env = std::getenv("UNRAVEL_THREADS")) {
        char* end = nullptr;
        const unsigned long long n = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && n > 0) return static_cast<std::size_t>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

EnsembleConfig apply_options(EnsembleConfig config, const CommandOptions& options)
{
    if (options.seed) config.master_seed = *options.seed;
    if (options.n_traj) config.n_traj = *options.n_traj;
    if (options.unraveling) config.unraveling = *options.unraveling;
    validate(config);
    return config;
}

int cmd_master(const EnsembleConfig& config, const CommandOptions& options)
{
    prepare_out_dir(options.out_dir);
    const MasterSolution sol = solve_master(config);
    master_table(sol, config.meas).write(options.out_dir / "master.csv");

    const DensityMatrix& last = sol.states.back();
    json s;
    s["steps"] = config.grid.steps;
    s["final_time"] = number(config.grid.time(config.grid.steps));
    s["final_S_vN"] = number(von_neumann_entropy(last));
    s["final_S_A"] = number(measurement_entropy(last, config.meas));
    s["spec"] = to_json(config);
    write_json(options.out_dir / "master_summary.json", s);
    return kExitOk;
}

int cmd_ensemble(const EnsembleConfig& config, const CommandOptions& options)
{
    prepare_out_dir(options.out_dir);
    const EnsembleStats stats = run_ensemble(config, resolve_workers(options));
    ensemble_table(stats).write(options.out_dir / "ensemble.csv");
    second_moment_table(stats).write(options.out_dir / "second_moment.csv");
    write_json(options.out_dir / "ensemble_summary.json", ensemble_summary(config, stats));
    return kExitOk;
}

int cmd_compare(const EnsembleConfig& config, const CommandOptions& options, const CompareThresholds& thresholds)
{
    prepare_out_dir(options.out_dir);
    const std::size_t workers = resolve_workers(options);
    const MasterSolution master = solve_master(config);
    master_table(master, config.meas).write(options.out_dir / "master.csv");

    EnsembleConfig wiener_config = config;
    wiener_config.unraveling = Unraveling::wiener;
    EnsembleConfig poisson_config = config;
    poisson_config.unraveling = Unraveling::poisson;
    const EnsembleStats wiener = run_ensemble(wiener_config, workers);
    const EnsembleStats poisson = run_ensemble(poisson_config, workers);

    bool all_pass = true;
    json s;
    s["n_traj"] = config.n_traj;
    s["seed"] = config.master_seed;
    for (const EnsembleStats* stats : {&wiener, &poisson}) {
        const std::string tag = to_string(stats->unraveling);
        const ComparisonReport report = compare_to_master(*stats, master, config.meas);
        compare_table(report, *stats).write(options.out_dir / ("compare_" + tag + ".csv"));
        window_table(report.second_moment).write(options.out_dir / ("second_moment_" + tag + ".csv"));
        s[tag] = report_summary(report, thresholds, all_pass);
    }
    const SecondMomentReport sm = second_moment_validation(wiener, poisson);
    discrepancy_table(sm.discrepancy).write(options.out_dir / "discrepancy.csv");
    double max_discrepancy = 0.0;
    for (const auto& d : sm.discrepancy) max_discrepancy = std::max(max_discrepancy, d.pooled_se_units.maxCoeff());
    s["max_wiener_poisson_pp_difference_se"] = number(max_discrepancy);
    s["pass"] = all_pass;
    s["spec"] = to_json(config);
    write_json(options.out_dir / "compare_summary.json", s);
    return all_pass ? kExitOk : kExitThresholdViolated;
}

int cmd_functionals(const EnsembleConfig& config, const CommandOptions& options)
{
    prepare_out_dir(options.out_dir);
    const std::uint64_t seed = split_seed(config.master_seed, options.trajectory);
    const TrajectoryRecord record = config.unraveling == Unraveling::wiener
                                        ? gp_trajectory(config.model, config.psi0, config.grid, seed)
                                        : pdp_trajectory(config.model, config.psi0, config.grid, seed);
    const MeasurementDynamics dynamics(config.model, config.meas);

    std::vector<Column> cols{{"t", "time"}};
    for (std::size_t i = 0; i < config.meas.outcomes(); ++i) cols.push_back({"p_" + std::to_string(i), ""});
    cols.push_back({"S", "nat"});
    cols.push_back({"wiener_correction", "nat/time"});
    cols.push_back({"f", "nat/time"});
    cols.push_back({"poisson_correction", "nat/time"});
    cols.push_back({"E_X", ""});
    cols.push_back({"boundary_flag", ""});
    CsvTable table(std::move(cols));

    std::size_t flagged = 0;
    double min_f = std::numeric_limits<double>::infinity();
    double max_wiener_correction = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < record.states.size(); ++k) {
        const LocalQuantities q = dynamics.evaluate(record.states[k]);
        const CorrectionEvaluation w = wiener_entropy_correction(q);
        const FEvaluation f = evaluate_f(q);
        const bool w_ok = w.status != FunctionalStatus::boundary_divergence;
        const bool f_ok = f.status != FunctionalStatus::boundary_divergence;
        if (!w_ok || !f_ok) ++flagged;
        if (w_ok) max_wiener_correction = std::max(max_wiener_correction, w.value);
        if (f_ok) min_f = std::min(min_f, f.value);

        std::vector<double> row{record.grid.time(k)};
        for (Eigen::Index i = 0; i < q.p.size(); ++i) row.push_back(std::clamp(q.p(i), 0.0, 1.0));
        row.push_back(shannon_entropy(q.p));
        row.push_back(or_nan(w_ok, w.value));
        row.push_back(or_nan(f_ok, f.value));
        row.push_back(or_nan(f_ok, -f.value));
        row.push_back(or_nan(f_ok, f.expected_x));
        row.push_back(w_ok && f_ok ? 0.0 : 1.0);
        table.add_row(row);
    }
    table.write(options.out_dir / "functionals.csv");

    CsvTable jumps({{"t", "time"}, {"channel", "index"}});
    for (const auto& j : record.jumps) jumps.add_row({j.time, static_cast<double>(j.channel)});
    jumps.write(options.out_dir / "jumps.csv");

    json s;
    s["unraveling"] = to_string(config.unraveling);
    s["trajectory"] = options.trajectory;
    s["seed"] = seed;
    s["master_seed"] = config.master_seed;
    s["jumps"] = record.jumps.size();
    s["boundary_flags"] = flagged;
    s["min_f"] = number(min_f);
    s["max_wiener_correction"] = number(max_wiener_correction);
    s["max_norm_drift"] = number(record.max_norm_drift);
    s["spec"] = to_json(config);
    write_json(options.out_dir / "functionals_summary.json", s);
    return kExitOk;
}

}  // namespace unravel::cli
