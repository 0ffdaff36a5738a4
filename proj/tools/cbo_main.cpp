// Experiment CLI: optimize | benchmark | diagnostics | partition-stats.
// Every data file embeds the fully-resolved config and the base seed, so any
// output can be reproduced from its own header. Wall-clock timings go to
// separate *_timing.json files, which are the only outputs excluded from the
// byte-for-byte reproducibility guarantee.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "cbo/config.hpp"
#include "cbo/errors.hpp"
#include "cbo/harness.hpp"
#include "cbo/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir = "cbo_out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
    long replicates = 0;
};

json config_json(const cbo::ExperimentConfig& config) {
    json object = json::object();
    for (const auto& [key, value] : cbo::resolved_entries(config)) {
        object[key] = value;
    }
    return object;
}

void write_csv_header(std::ostream& out, const cbo::ExperimentConfig& config) {
    out << "# config_hash = " << cbo::config_hash(config) << "\n";
    out << "# seed = " << config.run.seed << "\n";
    for (const auto& [key, value] : cbo::resolved_entries(config)) {
        out << "# " << key << " = " << value << "\n";
    }
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw cbo::ConfigError("cannot open output file " + path.string());
    }
    return out;
}

void write_json(const fs::path& path, const json& value) {
    auto out = open_output(path);
    out << value.dump(2) << "\n";
}

json annotate(json value, const cbo::ExperimentConfig& config) {
    value["config"] = config_json(config);
    value["config_hash"] = cbo::config_hash(config);
    value["seed"] = config.run.seed;
    return value;
}

cbo::ExperimentConfig load_config(const CliOptions& options) {
    cbo::ExperimentConfig config = cbo::load_experiment_config(options.config_path);
    if (options.seed_set) {
        config.run.seed = options.seed;
    }
    if (options.replicates > 0) {
        config.benchmark.replicates = static_cast<int>(options.replicates);
        config.partition_stats.replicates = options.replicates;
    }
    return config;
}

void write_series_csv(const fs::path& path, const cbo::ExperimentConfig& config,
                      const cbo::RunResult& result) {
    auto out = open_output(path);
    write_csv_header(out, config);
    out << "step";
    if (!result.diameters.empty()) {
        for (int l = 0; l < result.config.dimension; ++l) {
            out << ",diameter_" << (l + 1);
        }
    }
    if (!result.best_objective.empty()) {
        out << ",best_objective";
    }
    out << ",displacement\n";
    for (long n = 0; n <= result.steps; ++n) {
        out << n;
        if (!result.diameters.empty()) {
            const auto& diam = result.diameters[static_cast<std::size_t>(n)];
            for (int l = 0; l < result.config.dimension; ++l) {
                out << ',' << cbo::format_double(diam(l));
            }
        }
        if (!result.best_objective.empty()) {
            out << ',' << cbo::format_double(result.best_objective[static_cast<std::size_t>(n)]);
        }
        out << ',' << cbo::format_double(result.displacement[static_cast<std::size_t>(n)]);
        out << "\n";
    }
}

json fit_json(const cbo::LogLinearFit& fit) {
    json value;
    value["slope"] = fit.slope;
    value["intercept"] = fit.intercept;
    value["r_squared"] = fit.r_squared;
    value["slope_standard_error"] = fit.slope_standard_error;
    value["points"] = fit.points;
    return value;
}

json run_summary(const cbo::RunResult& result) {
    const auto& ensemble = result.final_ensemble;
    std::vector<double> values(static_cast<std::size_t>(ensemble.particles()));
    std::vector<int> all(static_cast<std::size_t>(ensemble.particles()));
    for (int i = 0; i < ensemble.particles(); ++i) {
        values[static_cast<std::size_t>(i)] = result.config.objective->value(ensemble.particle(i));
        all[static_cast<std::size_t>(i)] = i;
    }
    const int best = cbo::argmin_member(values, all);
    json summary;
    summary["termination"] = cbo::to_string(result.termination);
    summary["steps"] = result.steps;
    summary["evaluations"] = result.evaluations;
    summary["gamma"] = result.gamma;
    summary["noise_bound"] = result.noise_bound;
    summary["best_index"] = best + 1; // particle ids are 1-based on the wire
    summary["best_value"] = values[static_cast<std::size_t>(best)];
    json point = json::array();
    for (double x : ensemble.particle(best)) {
        point.push_back(x);
    }
    summary["best_point"] = point;
    summary["final_displacement"] =
        result.displacement.empty() ? 0.0 : result.displacement.back();
    if (result.divergence_step >= 0) {
        summary["divergence_step"] = result.divergence_step;
    }
    return summary;
}

int cmd_optimize(const CliOptions& options) {
    const cbo::ExperimentConfig config = load_config(options);
    const cbo::RunConfig run_config = cbo::make_run_config(config);
    fs::create_directories(options.out_dir);

    cbo::RngStream rng(config.run.seed, 0);
    const cbo::RunResult result = cbo::run(run_config, rng);

    {
        auto out = open_output(fs::path(options.out_dir) / "final_ensemble.csv");
        write_csv_header(out, config);
        cbo::write_ensemble_csv(out, result.final_ensemble);
    }
    write_series_csv(fs::path(options.out_dir) / "series.csv", config, result);
    for (const auto& [step, states] : result.snapshots) {
        char name[40];
        std::snprintf(name, sizeof(name), "snapshot_%08ld.csv", step);
        auto out = open_output(fs::path(options.out_dir) / name);
        write_csv_header(out, config);
        cbo::ParticleEnsemble snap;
        snap.states = states;
        snap.step = step;
        cbo::write_ensemble_csv(out, snap);
    }
    if (!result.schedule.steps.empty()) {
        auto out = open_output(fs::path(options.out_dir) / "schedule.txt");
        cbo::write_schedule(out, result.schedule);
    }
    write_json(fs::path(options.out_dir) / "summary.json",
               annotate(run_summary(result), config));

    if (result.snapshots.size() >= 5 && result.termination != cbo::Termination::divergence) {
        try {
            const long tail = std::max<long>(3, result.steps / 2);
            const auto report = cbo::convergence_check(result, tail);
            json value;
            value["tail_window"] = tail;
            value["displacement_fit"] = fit_json(report.displacement_fit);
            value["snapshot_fit"] = fit_json(report.snapshot_fit);
            value["limit_index"] = report.limit_index + 1;
            value["limit_point"] = report.limit_point;
            value["final_max_pairwise"] = report.final_max_pairwise;
            value["final_diameter"] = report.final_diameter;
            value["agreement"] = report.agreement;
            write_json(fs::path(options.out_dir) / "convergence.json",
                       annotate(value, config));
        } catch (const cbo::UsageError&) {
            // tail too short or displacement already flat; no report
        }
    }

    if (result.termination == cbo::Termination::divergence) {
        std::cerr << "optimize: run diverged at step " << result.divergence_step
                  << "; partial outputs written to " << options.out_dir << "\n";
        return 3;
    }
    std::cout << "optimize: " << cbo::to_string(result.termination) << " after "
              << result.steps << " steps\n";
    return 0;
}

int cmd_benchmark(const CliOptions& options) {
    const cbo::ExperimentConfig config = load_config(options);
    const cbo::BenchmarkConfig bench_config = cbo::make_benchmark_config(config, options.jobs);
    fs::create_directories(options.out_dir);

    const cbo::BenchmarkTable table = cbo::benchmark(bench_config);

    {
        auto out = open_output(fs::path(options.out_dir) / "benchmark_table.csv");
        write_csv_header(out, config);
        out << "dimension";
        for (int p : table.batch_sizes) out << ",P=" << p;
        out << "\n";
        for (std::size_t di = 0; di < table.dimensions.size(); ++di) {
            out << table.dimensions[di];
            for (std::size_t bi = 0; bi < table.batch_sizes.size(); ++bi) {
                out << ',' << cbo::format_double(table.cell(di, bi).success_rate);
            }
            out << "\n";
        }
    }
    {
        auto out = open_output(fs::path(options.out_dir) / "benchmark_steps.csv");
        write_csv_header(out, config);
        out << "dimension";
        for (int p : table.batch_sizes) out << ",P=" << p;
        out << "\n";
        for (std::size_t di = 0; di < table.dimensions.size(); ++di) {
            out << table.dimensions[di];
            for (std::size_t bi = 0; bi < table.batch_sizes.size(); ++bi) {
                out << ',' << cbo::format_double(table.cell(di, bi).mean_steps);
            }
            out << "\n";
        }
    }
    json cells = json::array();
    json timing = json::array();
    for (const auto& cell : table.cells) {
        json entry;
        entry["dimension"] = cell.dimension;
        entry["batch_size"] = cell.batch_size;
        entry["replicates"] = cell.replicates;
        entry["successes"] = cell.successes;
        entry["divergences"] = cell.divergences;
        entry["errors"] = cell.errors;
        entry["success_rate"] = cell.success_rate;
        entry["mean_steps"] = cell.mean_steps;
        cells.push_back(entry);
        json t;
        t["dimension"] = cell.dimension;
        t["batch_size"] = cell.batch_size;
        t["mean_wall_ms"] = cell.mean_wall_ms;
        timing.push_back(t);
    }
    json summary;
    summary["cells"] = cells;
    summary["noise_distribution"] = config.run.noise;
    summary["heterogeneous"] = config.run.heterogeneous;
    write_json(fs::path(options.out_dir) / "benchmark.json", annotate(summary, config));
    write_json(fs::path(options.out_dir) / "benchmark_timing.json", timing);

    std::cout << "benchmark: " << table.cells.size() << " cells x "
              << bench_config.replicates << " replicates\n";
    return 0;
}

json report_json(const cbo::BoundReport& report) {
    json value;
    value["name"] = report.name;
    value["window"] = json::array({report.window_begin, report.window_end});
    if (report.coordinate >= 0) {
        value["coordinate"] = report.coordinate + 1;
    }
    value["lhs"] = report.lhs;
    value["rhs"] = report.rhs;
    value["slack"] = report.slack;
    value["pass"] = report.pass;
    return value;
}

json theory_json(const cbo::TheoryRate& theory) {
    json value;
    value["m0"] = theory.m0;
    value["p_m0"] = theory.p_m0;
    value["p_m0_exact"] = theory.p_m0_exact;
    if (!theory.p_m0_exact) {
        value["p_m0_standard_error"] = theory.p_m0_standard_error;
    }
    value["lambda1"] = theory.lambda1;
    value["lambda2_sup"] = theory.lambda2_sup;
    value["c1"] = theory.c1;
    value["small_noise_condition"] = theory.small_noise_condition;
    return value;
}

int cmd_diagnostics(const CliOptions& options) {
    cbo::ExperimentConfig config = load_config(options);
    config.record.diameters = true;
    config.record.best_objective = true;
    config.record.transitions = true;

    const int window_length = config.diagnostics.window_length > 0
                                  ? config.diagnostics.window_length
                                  : cbo::find_m0(config.run.particles, config.run.batch_size);
    const long horizon = static_cast<long>(window_length) * config.diagnostics.windows;
    config.run.max_steps = horizon;
    config.run.tolerance = 1e-300; // keep the full horizon instrumented

    cbo::RunConfig run_config = cbo::make_run_config(config);
    fs::create_directories(options.out_dir);

    cbo::RngStream rng(config.run.seed, 0);
    const cbo::RunResult result = cbo::run(run_config, rng);
    const long windows = result.steps / window_length;

    std::vector<cbo::BoundReport> reports;
    for (long k = 0; k < windows; ++k) {
        const long begin = k * window_length;
        const long end = begin + window_length;
        reports.push_back(cbo::product_alpha_bound_noise_free(result, begin, end));
        for (int l = 0; l < run_config.dimension; ++l) {
            const auto perturbed = cbo::perturbed_product_alpha_bounds(result, begin, end, l);
            reports.insert(reports.end(), perturbed.begin(), perturbed.end());
            const auto diameterbounds = cbo::window_diameter_bounds(result, k, window_length, l);
            reports.insert(reports.end(), diameterbounds.begin(), diameterbounds.end());
        }
    }

    long passed = 0;
    json report_array = json::array();
    for (const auto& report : reports) {
        passed += report.pass ? 1 : 0;
        report_array.push_back(report_json(report));
    }

    json decay_array = json::array();
    cbo::RngStream theory_rng(config.run.seed, 0x7e0);
    for (int l = 0; l < run_config.dimension; ++l) {
        const auto decay = cbo::estimate_decay(run_config, {&result, 1}, l,
                                               cbo::DecayMode::pathwise, theory_rng);
        json entry;
        entry["coordinate"] = l + 1;
        entry["fit"] = fit_json(decay.fit);
        entry["theory"] = theory_json(decay.theory);
        decay_array.push_back(entry);
    }

    json summary;
    summary["window_length"] = window_length;
    summary["windows"] = windows;
    summary["steps"] = result.steps;
    summary["termination"] = cbo::to_string(result.termination);
    summary["checks_total"] = reports.size();
    summary["checks_passed"] = passed;
    summary["reports"] = report_array;
    summary["decay"] = decay_array;
    write_json(fs::path(options.out_dir) / "diagnostics.json", annotate(summary, config));

    std::cout << "diagnostics: " << passed << "/" << reports.size() << " bound checks passed\n";
    return passed == static_cast<long>(reports.size()) ? 0 : 4;
}

int cmd_partition_stats(const CliOptions& options) {
    const cbo::ExperimentConfig config = load_config(options);
    const int particles = config.run.particles;
    const int batch_size = config.run.batch_size;
    if (batch_size == 1 && particles >= 2) {
        throw cbo::ConfigError("partition-stats: P = 1 gives no connectivity; "
                               "the consensus hypotheses cannot hold");
    }
    fs::create_directories(options.out_dir);

    const cbo::StepParams params = cbo::step_params(cbo::make_run_config(config).scheme);
    const double gamma = params.gamma;
    const double zeta = params.noise.noise_bound();

    cbo::RngStream rng(config.run.seed, 0x9a7);
    const cbo::TheoryRate theory =
        cbo::theory_rate(particles, batch_size, gamma, zeta, rng, config.partition_stats.m0,
                         config.partition_stats.replicates);

    const double m0 = static_cast<double>(theory.m0);
    const double drift = gamma * std::pow(1.0 - gamma, m0 - 1.0) * theory.p_m0;
    const double noise_term =
        2.0 * (std::pow(1.0 + 2.0 * std::sqrt(static_cast<double>(particles)) * zeta, m0) - 1.0);
    const double critical =
        cbo::critical_noise_level(particles, gamma, theory.m0, theory.p_m0);

    json summary;
    summary["particles"] = particles;
    summary["batch_size"] = batch_size;
    summary["gamma"] = gamma;
    summary["zeta"] = zeta;
    summary["theory"] = theory_json(theory);
    summary["condition_lhs"] = drift;
    summary["condition_rhs"] = noise_term;
    summary["condition_holds"] = theory.small_noise_condition;
    summary["critical_zeta"] = critical;
    write_json(fs::path(options.out_dir) / "partition_stats.json", annotate(summary, config));

    std::cout << "partition-stats: m0 = " << theory.m0 << ", p_m0 = " << theory.p_m0
              << (theory.p_m0_exact ? " (exact)" : " (monte-carlo)") << ", condition "
              << (theory.small_noise_condition ? "holds" : "fails") << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Consensus-based optimization with random batch interactions"};
    app.require_subcommand(1);

    CliOptions options;

    auto add_common = [&](CLI::App* cmd, bool with_jobs, bool with_replicates) {
        cmd->add_option("--config", options.config_path, "Experiment config file")->required();
        cmd->add_option("--out", options.out_dir, "Output directory");
        cmd->add_option("--seed", options.seed, "Base seed override")
            ->check(CLI::NonNegativeNumber)
            ->each([&](const std::string&) { options.seed_set = true; });
        if (with_jobs) {
            cmd->add_option("--jobs", options.jobs, "Worker threads (0 = hardware)");
        }
        if (with_replicates) {
            cmd->add_option("--replicates", options.replicates, "Replicate count override");
        }
    };

    CLI::App* optimize = app.add_subcommand("optimize", "Run one optimization");
    add_common(optimize, false, false);
    CLI::App* bench = app.add_subcommand("benchmark", "Replicated success-rate table");
    add_common(bench, true, true);
    CLI::App* diagnostics =
        app.add_subcommand("diagnostics", "Instrumented run with bound checks");
    add_common(diagnostics, false, false);
    CLI::App* stats =
        app.add_subcommand("partition-stats", "Connectivity statistics and rate condition");
    add_common(stats, false, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(optimize)) return cmd_optimize(options);
        if (app.got_subcommand(bench)) return cmd_benchmark(options);
        if (app.got_subcommand(diagnostics)) return cmd_diagnostics(options);
        if (app.got_subcommand(stats)) return cmd_partition_stats(options);
    } catch (const cbo::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const cbo::ResourceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
