// Acceptance suite: every criterion below runs end-to-end against the built
// library (and the CLI binary for the determinism criterion) and prints one
// PASS/FAIL line. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cbo/batching.hpp"
#include "cbo/config.hpp"
#include "cbo/dynamics.hpp"
#include "cbo/ergodicity.hpp"
#include "cbo/errors.hpp"
#include "cbo/harness.hpp"

namespace fs = std::filesystem;
using namespace cbo;

namespace {

constexpr std::uint64_t kSeed = 20260810;

// ---------------------------------------------------------------- shared
// success-rate cells reused by criteria 1-4

RunConfig reference_run_config() {
    RunConfig config;
    config.particles = 100;
    config.dimension = 2; // overwritten per cell
    config.batch_size = 10;
    config.objective = make_objective("rastrigin", 2, {1.0}, 0.0);
    config.rule = RepresentativeRule::argmin();
    config.scheme = SchemeConfig::generalized(0.01, NoiseModel::gaussian(0.5));
    config.max_steps = 100000;
    config.tolerance = 1e-3;
    config.init_lower = -3.0;
    config.init_upper = 3.0;
    return config;
}

struct SharedTables {
    BenchmarkTable easy; // d = 2, P in {10, 50, 100}
    BenchmarkTable hard; // d in {4, 10}, P in {10, 100}
};

const SharedTables& shared_tables() {
    static SharedTables tables = [] {
        std::cout << "[setup] running replicated success-rate cells (200 replicates each)..."
                  << std::endl;
        BenchmarkConfig config;
        config.base = reference_run_config();
        config.objective_name = "rastrigin";
        config.objective_shift = {1.0};
        config.objective_offset = 0.0;
        config.replicates = 200;
        config.success_threshold = 0.25;
        config.base_seed = kSeed;
        config.jobs = 0;

        SharedTables tables;
        config.dimensions = {2};
        config.batch_sizes = {10, 50, 100};
        tables.easy = benchmark(config);
        config.dimensions = {4, 10};
        config.batch_sizes = {10, 100};
        tables.hard = benchmark(config);
        return tables;
    }();
    return tables;
}

// ---------------------------------------------------------------- criteria

bool criterion_easy_regime(std::string& detail) {
    const auto& table = shared_tables().easy;
    std::ostringstream note;
    bool pass = true;
    for (std::size_t bi = 0; bi < table.batch_sizes.size(); ++bi) {
        const auto& cell = table.cell(0, bi);
        note << "P=" << cell.batch_size << ": rate=" << cell.success_rate << " ("
             << cell.mean_wall_ms * cell.replicates / 1000.0 << "s/cell) ";
        pass = pass && cell.success_rate >= 0.95 && cell.errors == 0;
    }
    detail = note.str() + "[need >= 0.95 each; runtime target 120s/cell]";
    return pass;
}

bool criterion_hard_regime_ordering(std::string& detail) {
    const auto& table = shared_tables().hard;
    const double small_batch = table.cell(1, 0).success_rate; // d = 10, P = 10
    const double full_batch = table.cell(1, 1).success_rate;  // d = 10, P = 100
    std::ostringstream note;
    note << "d=10: rate(P=10)=" << small_batch << ", rate(P=100)=" << full_batch
         << " [need gap >= 0.3]";
    detail = note.str();
    return small_batch - full_batch >= 0.3;
}

bool criterion_dimension_trend(std::string& detail) {
    const double low_d = shared_tables().easy.cell(0, 2).success_rate;   // d = 2, P = 100
    const double high_d = shared_tables().hard.cell(1, 1).success_rate;  // d = 10, P = 100
    std::ostringstream note;
    note << "full batch: rate(d=2)=" << low_d << ", rate(d=10)=" << high_d
         << " [need gap >= 0.5]";
    detail = note.str();
    return low_d - high_d >= 0.5;
}

bool criterion_step_count_ordering(std::string& detail) {
    const auto& table = shared_tables().hard;
    const double small_batch = table.cell(0, 0).mean_steps; // d = 4, P = 10
    const double full_batch = table.cell(0, 1).mean_steps;  // d = 4, P = 100
    std::ostringstream note;
    note << "d=4: steps(P=10)=" << small_batch << ", steps(P=100)=" << full_batch
         << " [need P=10 larger]";
    detail = note.str();
    return small_batch > full_batch;
}

Eigen::MatrixXd random_matrix(RngStream& rng, int n, double lo, double hi) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a(i, j) = rng.uniform(lo, hi);
    }
    return a;
}

bool criterion_randomized_matrix_suites(std::string& detail) {
    const int cases = 10000;
    long violations = 0;
    RngStream rng(kSeed, 5);

    for (int trial = 0; trial < cases; ++trial) { // super-additivity + homogeneity
        const int n = 2 + static_cast<int>(rng.bounded(7));
        const Eigen::MatrixXd a = random_matrix(rng, n, -1.0, 1.0);
        const Eigen::MatrixXd b = random_matrix(rng, n, -1.0, 1.0);
        if (ergodicity_coefficient(a + b) <
            ergodicity_coefficient(a) + ergodicity_coefficient(b) - 1e-10) {
            ++violations;
        }
        const double t = rng.uniform(0.0, 4.0);
        if (std::abs(ergodicity_coefficient(t * a) - t * ergodicity_coefficient(a)) > 1e-10) {
            ++violations;
        }
        const Eigen::MatrixXd larger = a + random_matrix(rng, n, 0.0, 1.0);
        if (ergodicity_coefficient(larger) < ergodicity_coefficient(a) - 1e-10) {
            ++violations;
        }
    }
    for (int trial = 0; trial < cases; ++trial) { // equal-row-sum contraction
        const int n = 2 + static_cast<int>(rng.bounded(7));
        Eigen::MatrixXd a(n, n);
        for (int i = 0; i < n; ++i) {
            double total = 0.0;
            for (int j = 0; j < n; ++j) {
                a(i, j) = rng.uniform(0.0, 1.0);
                total += a(i, j);
            }
            a.row(i) /= total;
        }
        Eigen::VectorXd z(n);
        for (int i = 0; i < n; ++i) z(i) = rng.uniform(-10, 10);
        if (!diameter_contraction_check(a, z).pass) ++violations;
    }
    for (int trial = 0; trial < cases; ++trial) { // alpha >= -2 norm
        const int n = 2 + static_cast<int>(rng.bounded(7));
        const Eigen::MatrixXd a = random_matrix(rng, n, -3.0, 3.0);
        if (ergodicity_coefficient(a) < -2.0 * mixed_norm_1_inf(a) - 1e-10) ++violations;
    }
    for (int trial = 0; trial < cases; ++trial) { // product difference norm
        const int n = 2 + static_cast<int>(rng.bounded(5));
        const int length = 1 + static_cast<int>(rng.bounded(5));
        std::vector<Eigen::MatrixXd> drift;
        std::vector<Eigen::MatrixXd> perturbed;
        double bound = 1.0;
        double drift_norms = 1.0;
        for (int r = 0; r < length; ++r) {
            const Eigen::MatrixXd a = random_matrix(rng, n, -1.0, 1.0);
            const Eigen::MatrixXd b = random_matrix(rng, n, -0.5, 0.5);
            drift.push_back(a);
            perturbed.push_back(a + b);
            bound *= mixed_norm_1_inf(a) + mixed_norm_1_inf(b);
            drift_norms *= mixed_norm_1_inf(a);
        }
        const double lhs = mixed_norm_1_inf(ordered_product(perturbed) - ordered_product(drift));
        if (lhs > bound - drift_norms + 1e-10) ++violations;
    }

    detail = "4 suites x 10000 instances, violations = " + std::to_string(violations);
    return violations == 0;
}

RunResult instrumented_run(double zeta, long steps) {
    RunConfig config;
    config.particles = 4;
    config.dimension = 2;
    config.batch_size = 2;
    config.objective = make_objective("sphere", 2, {0.0}, 0.0);
    config.rule = RepresentativeRule::gibbs(1.0);
    // gamma kept small so the ensemble cannot hit exact floating-point
    // consensus (displacement == 0) before the full horizon is recorded
    config.scheme = SchemeConfig::generalized(
        0.05, zeta > 0.0 ? NoiseModel::gaussian(zeta) : NoiseModel::none());
    config.max_steps = steps;
    config.tolerance = 1e-300;
    config.record.diameters = true;
    config.record.transitions = true;
    RngStream rng(kSeed, 6);
    return run(config, rng);
}

bool criterion_trajectory_bound_suites(std::string& detail) {
    const int window_length = find_m0(4, 2); // 3
    long checks = 0;
    long violations = 0;
    for (double zeta : {0.0, 0.05}) {
        const auto result = instrumented_run(zeta, 100L * window_length);
        for (long k = 0; k < 100; ++k) {
            const long begin = k * window_length;
            const long end = begin + window_length;
            const auto drift_only = product_alpha_bound_noise_free(result, begin, end);
            ++checks;
            violations += drift_only.pass ? 0 : 1;
            for (int l = 0; l < 2; ++l) {
                for (const auto& report :
                     perturbed_product_alpha_bounds(result, begin, end, l)) {
                    ++checks;
                    violations += report.pass ? 0 : 1;
                }
                for (const auto& report : window_diameter_bounds(result, k, window_length, l)) {
                    ++checks;
                    violations += report.pass ? 0 : 1;
                }
            }
        }
    }
    detail = "window length " + std::to_string(window_length) + ", " + std::to_string(checks) +
             " checks across zeta in {0, 0.05}, violations = " + std::to_string(violations);
    return violations == 0;
}

bool criterion_noisy_argmin_monotonicity(std::string& detail) {
    int passed = 0;
    for (int replicate = 0; replicate < 100; ++replicate) {
        RunConfig config;
        config.particles = 50;
        config.dimension = 3;
        config.batch_size = 10;
        config.objective = make_objective("rastrigin", 3, {1.0}, 0.0);
        config.rule = RepresentativeRule::argmin();
        config.scheme = SchemeConfig::generalized(0.01, NoiseModel::gaussian(0.5));
        config.max_steps = 300;
        config.tolerance = 1e-3;
        config.record.best_objective = true;
        RngStream rng = RngStream::derive(kSeed, {7, static_cast<std::uint64_t>(replicate)});
        const auto result = run(config, rng);
        const auto audit = monotonicity_audit(result);
        passed += audit.pass ? 1 : 0;
    }
    detail = "exact nonincreasing best-objective series in " + std::to_string(passed) +
             "/100 noisy argmin runs";
    return passed == 100;
}

bool criterion_exact_geometric_decay(std::string& detail) {
    RunConfig config;
    config.particles = 2;
    config.dimension = 1;
    config.batch_size = 2;
    config.objective = make_objective("sphere", 1, {0.0}, 0.0);
    config.rule = RepresentativeRule::gibbs(0.0);
    config.scheme = SchemeConfig::generalized(0.5, NoiseModel::none());
    config.max_steps = 40;
    config.tolerance = 1e-300;
    config.record.diameters = true;
    RngStream rng(kSeed, 8);
    const auto result = run(config, rng);
    RngStream theory_rng(kSeed, 9);
    const auto report =
        estimate_decay(config, {&result, 1}, 0, DecayMode::pathwise, theory_rng);
    const double target = std::log(0.5);
    std::ostringstream note;
    note << "fitted slope " << report.fit.slope << " vs log(1/2) = " << target
         << " [tolerance 1e-6]";
    detail = note.str();
    return std::abs(report.fit.slope - target) <= 1e-6;
}

bool criterion_expected_decay_rate_bound(std::string& detail) {
    std::ostringstream note;
    bool pass = true;
    for (double zeta : {0.0, 0.01}) {
        RunConfig config;
        config.particles = 4;
        config.dimension = 2;
        config.batch_size = 2;
        config.objective = make_objective("sphere", 2, {0.0}, 0.0);
        config.rule = RepresentativeRule::gibbs(0.0);
        config.scheme = SchemeConfig::generalized(
            0.5, zeta > 0.0 ? NoiseModel::gaussian(zeta) : NoiseModel::none());
        config.max_steps = 120;
        config.tolerance = 1e-300;
        config.record.diameters = true;

        std::vector<RunResult> results;
        for (int replicate = 0; replicate < 200; ++replicate) {
            RngStream rng = RngStream::derive(
                kSeed, {10, static_cast<std::uint64_t>(zeta * 1000.0),
                        static_cast<std::uint64_t>(replicate)});
            results.push_back(run(config, rng));
        }
        RngStream theory_rng(kSeed, 11);
        const auto report =
            estimate_decay(config, results, 0, DecayMode::expectation, theory_rng);
        const double slack = 2.0 * report.fit.slope_standard_error;
        const bool ok = report.theory.p_m0_exact &&
                        report.fit.slope <= -report.theory.lambda1 + slack;
        note << "zeta=" << zeta << ": slope=" << report.fit.slope
             << " vs -lambda1=" << -report.theory.lambda1 << " (p_m0=" << report.theory.p_m0
             << " exact, 2se=" << slack << ") ";
        pass = pass && ok;
    }
    detail = note.str();
    return pass;
}

bool criterion_convergence_tail(std::string& detail) {
    RunConfig config;
    config.particles = 10;
    config.dimension = 3;
    config.batch_size = 5;
    config.objective = make_objective("sphere", 3, {0.0}, 0.0);
    config.rule = RepresentativeRule::gibbs(0.0);
    config.scheme = SchemeConfig::generalized(0.3, NoiseModel::gaussian(0.05));
    config.max_steps = 400;
    config.tolerance = 1e-300;
    config.record.snapshot_every = 5;
    RngStream rng(kSeed, 12);
    const auto result = run(config, rng);
    const auto report = convergence_check(result, 150);
    std::ostringstream note;
    note << "tail displacement slope " << report.displacement_fit.slope << ", R^2 "
         << report.displacement_fit.r_squared << " [need < 0 and > 0.9]; final spread "
         << report.final_max_pairwise << " vs 10x diameter " << 10.0 * report.final_diameter;
    detail = note.str();
    return report.displacement_fit.slope < 0.0 && report.displacement_fit.r_squared > 0.9 &&
           report.agreement;
}

bool criterion_partition_uniformity(std::string& detail) {
    RngStream rng(kSeed, 13);
    const auto partitions = enumerate_partitions(4, 2);
    std::map<std::string, long> counts;
    auto key_of = [](const BatchPartition& partition) {
        std::vector<std::string> parts;
        for (const auto& batch : partition.batches) {
            std::string s;
            for (int i : batch) s += std::to_string(i);
            parts.push_back(s);
        }
        std::sort(parts.begin(), parts.end()); // batch order is not canonical
        std::string key;
        for (const auto& part : parts) key += part + "|";
        return key;
    };
    std::vector<std::string> keys;
    for (const auto& partition : partitions) {
        keys.push_back(key_of(partition));
        counts[keys.back()] = 0;
    }
    const long draws = 100000;
    for (long t = 0; t < draws; ++t) {
        ++counts.at(key_of(sample_partition(4, 2, rng)));
    }
    const double expected = static_cast<double>(draws) / 3.0;
    double chi2 = 0.0;
    for (const auto& [key, observed] : counts) {
        const double delta = static_cast<double>(observed) - expected;
        chi2 += delta * delta / expected;
    }
    const double quantile_99 = 9.21034037197618; // chi-square, 2 dof

    const double exact = exact_p_m0(4, 2, 3);
    const auto estimate = estimate_p_m0(4, 2, 3, 100000, rng);
    const double gap = std::abs(estimate.value - exact);

    std::ostringstream note;
    note << "chi2 = " << chi2 << " < " << quantile_99 << "; exact p_m0 = " << exact
         << " (= 2/9), monte carlo gap " << gap << " vs 3se = "
         << 3.0 * estimate.standard_error;
    detail = note.str();
    return chi2 < quantile_99 && std::abs(exact - 2.0 / 9.0) < 1e-14 &&
           gap <= 3.0 * estimate.standard_error;
}

// ------------------------------------------------------------- criterion 12

std::map<std::string, std::string> read_data_files(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.find("timing") != std::string::npos) continue; // not a data file
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream content;
        content << in.rdbuf();
        files[fs::relative(entry.path(), dir).string()] = content.str();
    }
    return files;
}

bool run_cli(const std::string& cli, const std::string& args) {
    const std::string command = cli + " " + args + " >/dev/null 2>&1";
    return std::system(command.c_str()) == 0;
}

bool criterion_cli_determinism(std::string& detail) {
    const char* cli_env = std::getenv("CBO_CLI");
    const std::string cli = cli_env ? cli_env : "cbo";
    const fs::path root = fs::path("acceptance_tmp");
    fs::remove_all(root);
    fs::create_directories(root);

    const fs::path optimize_cfg = root / "optimize.ini";
    {
        std::ofstream out(optimize_cfg);
        out << "[run]\nparticles = 20\ndimension = 2\nbatch_size = 5\nmax_steps = 200\n"
               "seed = 7\n[record]\nsnapshot_every = 50\n";
    }
    const fs::path bench_cfg = root / "bench.ini";
    {
        std::ofstream out(bench_cfg);
        out << "[run]\nparticles = 20\ndimension = 2\nbatch_size = 5\nmax_steps = 500\n"
               "seed = 7\n[benchmark]\ndimensions = 2\nbatch_sizes = 5,20\nreplicates = 20\n";
    }
    const fs::path diag_cfg = root / "diag.ini";
    {
        std::ofstream out(diag_cfg);
        out << "[run]\nparticles = 4\ndimension = 2\nbatch_size = 2\ngamma = 0.5\n"
               "zeta = 0.05\nseed = 7\n[diagnostics]\nwindows = 30\n";
    }
    const fs::path stats_cfg = root / "stats.ini";
    {
        std::ofstream out(stats_cfg);
        out << "[run]\nparticles = 6\nbatch_size = 3\ngamma = 0.2\nzeta = 0.01\nseed = 7\n";
    }

    struct Invocation {
        std::string name;
        std::string args;
    };
    const std::vector<Invocation> invocations{
        {"optimize", "optimize --config " + optimize_cfg.string()},
        {"benchmark", "benchmark --config " + bench_cfg.string() + " --jobs 1"},
        {"benchmark-jobs2", "benchmark --config " + bench_cfg.string() + " --jobs 2"},
        {"diagnostics", "diagnostics --config " + diag_cfg.string()},
        {"partition-stats", "partition-stats --config " + stats_cfg.string()},
    };

    std::ostringstream note;
    for (const auto& invocation : invocations) {
        const fs::path dir_a = root / (invocation.name + "_a");
        const fs::path dir_b = root / (invocation.name + "_b");
        if (!run_cli(cli, invocation.args + " --out " + dir_a.string()) ||
            !run_cli(cli, invocation.args + " --out " + dir_b.string())) {
            detail = invocation.name + ": CLI invocation failed (CBO_CLI=" + cli + ")";
            return false;
        }
        const auto files_a = read_data_files(dir_a);
        const auto files_b = read_data_files(dir_b);
        if (files_a.empty() || files_a != files_b) {
            detail = invocation.name + ": data files differ between identical reruns";
            return false;
        }
        note << invocation.name << "=" << files_a.size() << " files ";
    }

    // job count must not change the benchmark data files
    const auto jobs1 = read_data_files(root / "benchmark_a");
    const auto jobs2 = read_data_files(root / "benchmark-jobs2_a");
    if (jobs1 != jobs2) {
        detail = "benchmark outputs differ between --jobs 1 and --jobs 2";
        return false;
    }

    fs::remove_all(root);
    detail = note.str() + "(byte-identical, timing files excluded)";
    return true;
}

} // namespace

int main() {
    struct Criterion {
        int id;
        std::string name;
        std::function<bool(std::string&)> check;
    };
    const std::vector<Criterion> criteria{
        {1, "success-rate easy regime (d=2, 200 replicates, all batch sizes)",
         criterion_easy_regime},
        {2, "small batches beat full batch at d=10 by >= 0.3", criterion_hard_regime_ordering},
        {3, "full-batch success decays from d=2 to d=10 by >= 0.5", criterion_dimension_trend},
        {4, "small batches need more steps to stop at d=4", criterion_step_count_ordering},
        {5, "randomized coefficient/norm suites (4 x 10^4 instances)",
         criterion_randomized_matrix_suites},
        {6, "trajectory bound suites (100 windows, zeta in {0, 0.05})",
         criterion_trajectory_bound_suites},
        {7, "noisy argmin monotonicity audit (100 runs, exact)",
         criterion_noisy_argmin_monotonicity},
        {8, "two-particle averaging decays at exactly log(1/2)",
         criterion_exact_geometric_decay},
        {9, "expectation-mode decay beats the theoretical rate bound",
         criterion_expected_decay_rate_bound},
        {10, "small-noise tail is exponential and particles agree", criterion_convergence_tail},
        {11, "partition uniformity chi-square and window-connectivity expectation",
         criterion_partition_uniformity},
        {12, "CLI reruns are byte-identical for every subcommand", criterion_cli_determinism},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto started = std::chrono::steady_clock::now();
        std::string detail;
        bool pass = false;
        try {
            pass = criterion.check(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        std::printf("[%2d] %s  %s — %s (%.1fs)\n", criterion.id, pass ? "PASS" : "FAIL",
                    criterion.name.c_str(), detail.c_str(), seconds);
        std::fflush(stdout);
        failures += pass ? 0 : 1;
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failures);
    return failures == 0 ? 0 : 1;
}
