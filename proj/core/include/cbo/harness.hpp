#ifndef CBO_HARNESS_HPP
#define CBO_HARNESS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cbo/dynamics.hpp"

namespace cbo {

/// Success criterion: the final best particle (lowest objective value, lowest
/// index on exact ties) lies within inf-norm `threshold` of the known
/// minimizer. Divergence-terminated runs count as failures.
bool success(const RunResult& result, std::span<const double> minimizer, double threshold,
             const Objective& objective);

struct BenchmarkConfig {
    RunConfig base;              // per-cell template; dimension/batch overwritten
    std::string objective_name = "rastrigin";
    std::vector<double> objective_shift{1.0}; // broadcast per dimension
    double objective_offset = 0.0;
    std::vector<int> dimensions{2};
    std::vector<int> batch_sizes{10};
    int replicates = 200;
    double success_threshold = 0.25;
    std::uint64_t base_seed = 0;
    int jobs = 1; // 0 = hardware concurrency
};

struct CellResult {
    int dimension = 0;
    int batch_size = 0;
    int replicates = 0;
    int successes = 0;
    int divergences = 0; // counted as failures
    int errors = 0;      // per-run errors, recorded without aborting the table
    double success_rate = 0.0;
    double mean_steps = 0.0;    // over runs that stopped normally
    double mean_wall_ms = 0.0;  // informational; not part of the data files
};

struct BenchmarkTable {
    std::vector<int> dimensions;
    std::vector<int> batch_sizes;
    std::vector<CellResult> cells; // dimension-major
    std::uint64_t base_seed = 0;

    const CellResult& cell(std::size_t dimension_index, std::size_t batch_index) const;
};

/// Replicated success-rate table. Replicate r of cell (d, P) uses the stream
/// derived from (base_seed, {d, P, r}), so the table is independent of the
/// job count and of scheduling order.
BenchmarkTable benchmark(const BenchmarkConfig& config);

struct LogLinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_standard_error = 0.0;
    long points = 0;
};

/// Least-squares fit of log(series[n]) against n over the prefix where the
/// series stays above `floor`. Fewer than 3 usable points -> UsageError.
LogLinearFit fit_log_linear(std::span<const double> series, double floor = 1e-14);

enum class DecayMode { pathwise, expectation };

/// Theoretical consensus-rate constants derived from (gamma, N, P, zeta):
/// window length m0, expected window connectivity p_m0 (exact by enumeration
/// when feasible, Monte Carlo otherwise), and the mean/almost-sure rate
/// bounds they imply.
struct TheoryRate {
    int m0 = 0;
    double p_m0 = 0.0;
    bool p_m0_exact = false;
    double p_m0_standard_error = 0.0;
    double lambda1 = 0.0;     // rate for the expected-diameter bound
    double lambda2_sup = 0.0; // supremum of admissible almost-sure rates
    double c1 = 0.0;          // prefactor of the expected-diameter bound
    bool small_noise_condition = false;
};

TheoryRate theory_rate(int particles, int batch_size, double gamma, double zeta,
                       RngStream& mc_rng, int m0_override = 0, long mc_replicates = 100000);

/// Noise level at which the small-noise margin
/// gamma (1-gamma)^{m0-1} p_m0 - 2[(1 + 2 sqrt(N) zeta)^{m0} - 1]
/// crosses zero (bisection; 0 when the margin is never positive).
double critical_noise_level(int particles, double gamma, int m0, double p_m0);

struct DecayReport {
    int coordinate = 0;
    DecayMode mode = DecayMode::pathwise;
    LogLinearFit fit;                    // expectation fit, or the first run's
    std::vector<LogLinearFit> pathwise;  // per run (pathwise mode)
    TheoryRate theory;
};

/// Fitted diameter-decay exponent for one coordinate. Pathwise mode fits each
/// run's log-diameter; expectation mode averages diameters across runs at
/// each step first. Requires recorded diameters (all runs equal length for
/// expectation mode).
DecayReport estimate_decay(const RunConfig& config, std::span<const RunResult> results,
                           int coordinate, DecayMode mode, RngStream& theory_rng);

struct ConvergenceReport {
    LogLinearFit displacement_fit;      // per-step squared displacement, tail
    LogLinearFit snapshot_fit;          // inf-norm motion between snapshots
    std::vector<double> limit_point;    // final best particle
    int limit_index = -1;
    double final_max_pairwise = 0.0;
    double final_diameter = 0.0;
    bool agreement = false; // final_max_pairwise <= 10 * final_diameter
};

/// Empirical trajectory-settling check over the last `tail_window` steps.
/// Needs snapshots recorded (>= 4 in the tail for the snapshot fit).
ConvergenceReport convergence_check(const RunResult& result, long tail_window);

struct MonotonicityAudit {
    bool pass = false;
    long first_violation = -1;
};

/// Exact (no tolerance) nonincreasing check of a best-objective series.
MonotonicityAudit monotonicity_audit_series(std::span<const double> series);

/// Audit of a run's recorded best-objective series. Only the argmin rule
/// pins the best particle in place, so other rules -> UsageError.
MonotonicityAudit monotonicity_audit(const RunResult& result);

/// Steps at which a recorded per-coordinate diameter increased (strictly).
/// Zero for noise-free runs; noisy runs report a frequency instead of
/// asserting.
long count_diameter_increases(const RunResult& result, int coordinate);

} // namespace cbo

#endif
