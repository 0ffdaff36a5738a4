#include "cbo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "cbo/errors.hpp"

namespace cbo {

bool success(const RunResult& result, std::span<const double> minimizer, double threshold,
             const Objective& objective) {
    if (!(threshold > 0.0)) {
        throw ConfigError("success: threshold must be > 0");
    }
    if (result.termination == Termination::divergence) {
        return false;
    }
    const ParticleEnsemble& ensemble = result.final_ensemble;
    if (static_cast<int>(minimizer.size()) != ensemble.dimension()) {
        throw ConfigError("success: minimizer dimension mismatch");
    }
    std::vector<double> values(static_cast<std::size_t>(ensemble.particles()));
    std::vector<int> all(static_cast<std::size_t>(ensemble.particles()));
    for (int i = 0; i < ensemble.particles(); ++i) {
        values[static_cast<std::size_t>(i)] = objective.value(ensemble.particle(i));
        all[static_cast<std::size_t>(i)] = i;
    }
    const int best = argmin_member(values, all);
    double miss = 0.0;
    for (int l = 0; l < ensemble.dimension(); ++l) {
        miss = std::max(miss, std::abs(ensemble.states(best, l) -
                                       minimizer[static_cast<std::size_t>(l)]));
    }
    return miss < threshold;
}

const CellResult& BenchmarkTable::cell(std::size_t dimension_index,
                                       std::size_t batch_index) const {
    return cells.at(dimension_index * batch_sizes.size() + batch_index);
}

namespace {

struct Outcome {
    bool success = false;
    bool divergence = false;
    bool error = false;
    long steps = 0;
};

} // namespace

BenchmarkTable benchmark(const BenchmarkConfig& config) {
    if (config.replicates < 1) {
        throw ConfigError("benchmark: replicates must be >= 1");
    }
    if (!(config.success_threshold > 0.0)) {
        throw ConfigError("benchmark: success threshold must be > 0");
    }
    if (config.dimensions.empty() || config.batch_sizes.empty()) {
        throw ConfigError("benchmark: need at least one dimension and one batch size");
    }
    int jobs = config.jobs;
    if (jobs <= 0) {
        jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }

    BenchmarkTable table;
    table.dimensions = config.dimensions;
    table.batch_sizes = config.batch_sizes;
    table.base_seed = config.base_seed;

    for (int d : config.dimensions) {
        const auto objective =
            make_objective(config.objective_name, d, config.objective_shift,
                           config.objective_offset);
        const auto minimizer = objective_minimizer(*objective);
        for (int P : config.batch_sizes) {
            RunConfig run_config = config.base;
            run_config.dimension = d;
            run_config.batch_size = P;
            run_config.objective = objective;
            run_config.record = RecordOptions{}; // benchmark cells need no series

            std::vector<Outcome> outcomes(static_cast<std::size_t>(config.replicates));
            const auto started = std::chrono::steady_clock::now();

            auto worker = [&](int first, int last) {
                for (int r = first; r < last; ++r) {
                    Outcome& outcome = outcomes[static_cast<std::size_t>(r)];
                    try {
                        RngStream stream = RngStream::derive(
                            config.base_seed,
                            {static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(P),
                             static_cast<std::uint64_t>(r)});
                        const RunResult result = run(run_config, stream);
                        outcome.steps = result.steps;
                        if (result.termination == Termination::divergence) {
                            outcome.divergence = true;
                        } else {
                            outcome.success = success(result, minimizer,
                                                      config.success_threshold, *objective);
                        }
                    } catch (const std::exception&) {
                        outcome.error = true;
                    }
                }
            };

            if (jobs == 1 || config.replicates == 1) {
                worker(0, config.replicates);
            } else {
                std::vector<std::thread> pool;
                const int chunk = (config.replicates + jobs - 1) / jobs;
                for (int j = 0; j < jobs; ++j) {
                    const int first = j * chunk;
                    const int last = std::min(config.replicates, first + chunk);
                    if (first >= last) break;
                    pool.emplace_back(worker, first, last);
                }
                for (auto& t : pool) t.join();
            }

            const auto elapsed = std::chrono::steady_clock::now() - started;

            CellResult cell;
            cell.dimension = d;
            cell.batch_size = P;
            cell.replicates = config.replicates;
            long step_sum = 0;
            int stopped = 0;
            for (const Outcome& outcome : outcomes) {
                cell.successes += outcome.success ? 1 : 0;
                cell.divergences += outcome.divergence ? 1 : 0;
                cell.errors += outcome.error ? 1 : 0;
                if (!outcome.error && !outcome.divergence) {
                    step_sum += outcome.steps;
                    ++stopped;
                }
            }
            cell.success_rate =
                static_cast<double>(cell.successes) / static_cast<double>(config.replicates);
            cell.mean_steps =
                stopped > 0 ? static_cast<double>(step_sum) / static_cast<double>(stopped) : 0.0;
            cell.mean_wall_ms =
                std::chrono::duration<double, std::milli>(elapsed).count() /
                static_cast<double>(config.replicates);
            table.cells.push_back(cell);
        }
    }
    return table;
}

LogLinearFit fit_log_linear(std::span<const double> series, double floor) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t n = 0; n < series.size(); ++n) {
        if (!(series[n] >= floor)) {
            break;
        }
        xs.push_back(static_cast<double>(n));
        ys.push_back(std::log(series[n]));
    }
    const std::size_t count = xs.size();
    if (count < 3) {
        throw UsageError("fit_log_linear: fewer than 3 usable points");
    }
    const double x_mean = std::accumulate(xs.begin(), xs.end(), 0.0) / count;
    const double y_mean = std::accumulate(ys.begin(), ys.end(), 0.0) / count;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t n = 0; n < count; ++n) {
        const double dx = xs[n] - x_mean;
        const double dy = ys[n] - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LogLinearFit fit;
    fit.points = static_cast<long>(count);
    fit.slope = sxy / sxx;
    fit.intercept = y_mean - fit.slope * x_mean;
    double ss_res = 0.0;
    for (std::size_t n = 0; n < count; ++n) {
        const double r = ys[n] - (fit.intercept + fit.slope * xs[n]);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    if (count > 2) {
        fit.slope_standard_error = std::sqrt(ss_res / static_cast<double>(count - 2) / sxx);
    }
    return fit;
}

TheoryRate theory_rate(int particles, int batch_size, double gamma, double zeta,
                       RngStream& mc_rng, int m0_override, long mc_replicates) {
    TheoryRate theory;
    theory.m0 = m0_override > 0 ? m0_override : find_m0(particles, batch_size);
    try {
        theory.p_m0 = exact_p_m0(particles, batch_size, theory.m0);
        theory.p_m0_exact = true;
    } catch (const ResourceError&) {
        const auto estimate =
            estimate_p_m0(particles, batch_size, theory.m0, mc_replicates, mc_rng);
        theory.p_m0 = estimate.value;
        theory.p_m0_standard_error = estimate.standard_error;
    }
    const double m0 = static_cast<double>(theory.m0);
    const double drift = gamma * std::pow(1.0 - gamma, m0 - 1.0) * theory.p_m0;
    const double noise_term =
        2.0 * (std::pow(1.0 + 2.0 * std::sqrt(static_cast<double>(particles)) * zeta, m0) - 1.0);
    theory.small_noise_condition = drift > noise_term;
    theory.lambda1 = (drift - noise_term) / (m0 * m0);
    theory.lambda2_sup = (drift - noise_term) / m0;
    theory.c1 =
        (1.0 + 2.0 * (std::pow(1.0 + 2.0 * std::sqrt(static_cast<double>(particles)) * zeta,
                               m0 - 1.0) -
                      1.0)) *
        std::exp(m0);
    return theory;
}

double critical_noise_level(int particles, double gamma, int m0, double p_m0) {
    const double m = static_cast<double>(m0);
    const double drift = gamma * std::pow(1.0 - gamma, m - 1.0) * p_m0;
    if (!(drift > 0.0)) {
        return 0.0;
    }
    const double root_n = std::sqrt(static_cast<double>(particles));
    auto margin = [&](double zeta) {
        return drift - 2.0 * (std::pow(1.0 + 2.0 * root_n * zeta, m) - 1.0);
    };
    double lo = 0.0;
    double hi = 1.0;
    while (margin(hi) > 0.0) hi *= 2.0;
    for (int iteration = 0; iteration < 200; ++iteration) {
        const double mid = 0.5 * (lo + hi);
        if (margin(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

DecayReport estimate_decay(const RunConfig& config, std::span<const RunResult> results,
                           int coordinate, DecayMode mode, RngStream& theory_rng) {
    if (results.empty()) {
        throw UsageError("estimate_decay: no runs supplied");
    }
    if (coordinate < 0 || coordinate >= config.dimension) {
        throw UsageError("estimate_decay: coordinate out of range");
    }
    for (const RunResult& result : results) {
        if (result.diameters.empty()) {
            throw UsageError("estimate_decay: diameter series missing (enable recording)");
        }
    }

    DecayReport report;
    report.coordinate = coordinate;
    report.mode = mode;

    if (mode == DecayMode::pathwise) {
        for (const RunResult& result : results) {
            std::vector<double> series;
            series.reserve(result.diameters.size());
            for (const auto& diam : result.diameters) {
                series.push_back(diam(coordinate));
            }
            report.pathwise.push_back(fit_log_linear(series));
        }
        report.fit = report.pathwise.front();
    } else {
        std::size_t length = results.front().diameters.size();
        for (const RunResult& result : results) {
            length = std::min(length, result.diameters.size());
        }
        std::vector<double> mean(length, 0.0);
        for (const RunResult& result : results) {
            for (std::size_t n = 0; n < length; ++n) {
                mean[n] += result.diameters[n](coordinate);
            }
        }
        for (double& value : mean) {
            value /= static_cast<double>(results.size());
        }
        report.fit = fit_log_linear(mean);
    }

    const StepParams params = step_params(config.scheme);
    report.theory = theory_rate(config.particles, config.batch_size, params.gamma,
                                params.noise.noise_bound(), theory_rng);
    return report;
}

ConvergenceReport convergence_check(const RunResult& result, long tail_window) {
    if (tail_window < 3) {
        throw UsageError("convergence_check: tail window too short");
    }
    const long tail_begin = std::max<long>(0, result.steps - tail_window);

    ConvergenceReport report;

    std::vector<double> tail;
    for (std::size_t n = static_cast<std::size_t>(tail_begin) + 1;
         n < result.displacement.size(); ++n) {
        tail.push_back(result.displacement[n]);
    }
    report.displacement_fit = fit_log_linear(tail, 1e-280);

    std::vector<const RowMatrixXd*> snaps;
    for (const auto& [step, states] : result.snapshots) {
        if (step >= tail_begin) {
            snaps.push_back(&states);
        }
    }
    if (snaps.size() < 4) {
        throw UsageError("convergence_check: insufficient snapshots in the tail");
    }
    std::vector<double> motion;
    for (std::size_t k = 1; k < snaps.size(); ++k) {
        motion.push_back((*snaps[k] - *snaps[k - 1]).cwiseAbs().maxCoeff());
    }
    report.snapshot_fit = fit_log_linear(motion, 1e-280);

    const ParticleEnsemble& ensemble = result.final_ensemble;
    std::vector<double> values(static_cast<std::size_t>(ensemble.particles()));
    std::vector<int> all(static_cast<std::size_t>(ensemble.particles()));
    for (int i = 0; i < ensemble.particles(); ++i) {
        values[static_cast<std::size_t>(i)] = result.config.objective->value(ensemble.particle(i));
        all[static_cast<std::size_t>(i)] = i;
    }
    report.limit_index = argmin_member(values, all);
    const auto row = ensemble.particle(report.limit_index);
    report.limit_point.assign(row.begin(), row.end());
    report.final_max_pairwise = max_pairwise_inf_distance(ensemble);
    report.final_diameter = report.final_max_pairwise;
    report.agreement = report.final_max_pairwise <= 10.0 * report.final_diameter;
    return report;
}

MonotonicityAudit monotonicity_audit_series(std::span<const double> series) {
    MonotonicityAudit audit;
    audit.pass = true;
    for (std::size_t n = 1; n < series.size(); ++n) {
        if (series[n] > series[n - 1]) {
            audit.pass = false;
            audit.first_violation = static_cast<long>(n);
            break;
        }
    }
    return audit;
}

MonotonicityAudit monotonicity_audit(const RunResult& result) {
    if (result.config.rule.kind != RepresentativeRule::Kind::argmin) {
        throw UsageError("monotonicity_audit: only applicable to the argmin rule");
    }
    return monotonicity_audit_series(best_objective_series(result));
}

long count_diameter_increases(const RunResult& result, int coordinate) {
    if (result.diameters.empty()) {
        throw UsageError("count_diameter_increases: diameter series missing");
    }
    long count = 0;
    for (std::size_t n = 1; n < result.diameters.size(); ++n) {
        if (result.diameters[n](coordinate) > result.diameters[n - 1](coordinate)) {
            ++count;
        }
    }
    return count;
}

} // namespace cbo
