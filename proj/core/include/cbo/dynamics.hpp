#ifndef CBO_DYNAMICS_HPP
#define CBO_DYNAMICS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "cbo/batching.hpp"
#include "cbo/consensus.hpp"
#include "cbo/ensemble.hpp"
#include "cbo/ergodicity.hpp"
#include "cbo/objectives.hpp"
#include "cbo/rng.hpp"

namespace cbo {

/// External multiplicative noise eta with mean 0 and second moment <=
/// noise_bound()^2. Heterogeneous draws are independent per (particle,
/// coordinate); homogeneous draws are shared by all particles per coordinate.
struct NoiseModel {
    enum class Kind { none, gaussian, scheme_b, scheme_c };
    enum class Heterogeneity { heterogeneous, homogeneous };

    Kind kind = Kind::none;
    Heterogeneity heterogeneity = Heterogeneity::heterogeneous;
    double zeta = 0.0;   // gaussian standard deviation
    double lambda = 1.0; // scheme_b / scheme_c
    double sigma = 0.0;
    double h = 0.01;

    static NoiseModel none();
    static NoiseModel gaussian(double zeta,
                               Heterogeneity het = Heterogeneity::heterogeneous);
    static NoiseModel scheme_b(double lambda, double sigma, double h,
                               Heterogeneity het = Heterogeneity::heterogeneous);
    static NoiseModel scheme_c(double lambda, double sigma, double h,
                               Heterogeneity het = Heterogeneity::heterogeneous);

    /// sqrt of the exact second moment of one draw (the bound zeta).
    double noise_bound() const;

    /// One draw (mean zero by construction for every variant).
    double draw(RngStream& rng) const;

    /// Fill an N x d draw matrix. Heterogeneous: independent entries in
    /// particle-major order. Homogeneous: one draw per coordinate, copied to
    /// every particle. kind == none leaves the matrix zero.
    void sample(int particles, int dimension, RngStream& rng, RowMatrixXd& out) const;
};

/// Scheme selection. The three classic discretizations are special cases of
/// the generalized update; step_params() maps each onto (gamma, noise):
///   model_a: gamma = lambda h,        eta = sigma sqrt(h) Z
///   model_b: gamma = 1 - e^{-lambda h}, eta = e^{-lambda h} sigma sqrt(h) Z
///   model_c: gamma = 1 - e^{-lambda h},
///            eta = e^{-lambda h} - exp(-(lambda + sigma^2/2) h + sigma sqrt(h) Z)
struct SchemeConfig {
    enum class Kind { generalized, model_a, model_b, model_c };

    Kind kind = Kind::generalized;
    double gamma = 0.01; // generalized only
    NoiseModel noise;    // generalized only
    double lambda = 1.0; // models a/b/c
    double sigma = 0.0;
    double h = 0.01;
    NoiseModel::Heterogeneity heterogeneity = NoiseModel::Heterogeneity::heterogeneous;

    static SchemeConfig generalized(double gamma, NoiseModel noise);
    static SchemeConfig model_a(double lambda, double sigma, double h,
                                NoiseModel::Heterogeneity het);
    static SchemeConfig model_b(double lambda, double sigma, double h,
                                NoiseModel::Heterogeneity het);
    static SchemeConfig model_c(double lambda, double sigma, double h,
                                NoiseModel::Heterogeneity het);
};

struct StepParams {
    double gamma = 0.0;
    NoiseModel noise;
};

/// Resolve a scheme to its effective drift and noise sampler. Throws
/// ConfigError when the mapped gamma falls outside (0, 1).
StepParams step_params(const SchemeConfig& scheme);

struct RecordOptions {
    bool diameters = false;
    bool best_objective = false;
    long snapshot_every = 0; // 0 = no snapshots
    bool transitions = false;
    int transition_max_particles = 64;
    long transition_max_steps = 20000;
};

struct RunConfig {
    int particles = 100;
    int dimension = 2;
    std::shared_ptr<const Objective> objective;
    RepresentativeRule rule = RepresentativeRule::argmin();
    SchemeConfig scheme;
    int batch_size = 10;
    long max_steps = 100000;
    double tolerance = 1e-3; // stop when sum_i ||x_{n+1}^i - x_n^i||^2 < tolerance
    double init_lower = -3.0;
    double init_upper = 3.0;
    std::optional<RowMatrixXd> initial_states; // overrides box sampling
    RecordOptions record;
};

void validate(const RunConfig& config);

enum class Termination { tolerance, max_steps, divergence };

const char* to_string(Termination t);

struct RunResult {
    ParticleEnsemble final_ensemble;
    long steps = 0;
    Termination termination = Termination::max_steps;
    long divergence_step = -1;
    std::uint64_t evaluations = 0;
    double gamma = 0.0;
    double noise_bound = 0.0;
    RunConfig config;

    // Series indexed by step 0..steps. displacement[0] == 0.
    std::vector<double> displacement;
    std::vector<double> best_objective;       // when record.best_objective
    std::vector<Eigen::VectorXd> diameters;   // when record.diameters
    std::vector<std::pair<long, RowMatrixXd>> snapshots;

    // When record.transitions: per-step weight matrices, noise draws and the
    // partition schedule actually used (transitions[n] drives step n -> n+1).
    std::vector<TransitionRecord> transitions;
    PartitionSchedule schedule;
};

/// One synchronous update. Every batch representative is computed from the
/// pre-step states, then x' = x - (gamma + eta) (x - rep) coordinatewise; the
/// difference form leaves the representative particle bit-identical. `eta`
/// is N x d, or empty for zero noise. Throws DivergenceError if a non-finite
/// state is produced.
ParticleEnsemble step(const ParticleEnsemble& ensemble, const BatchPartition& partition,
                      const RepresentativeRule& rule, const Objective& objective, double gamma,
                      const RowMatrixXd& eta);

/// Full trajectory: sample partition, draw noise, update; stop when the
/// squared displacement drops below tolerance or max_steps is reached.
/// Divergence is reported as a termination reason with the last finite
/// ensemble. Per-step draw order is fixed: partition first, then noise.
RunResult run(const RunConfig& config, RngStream& rng);

/// min_j L(x_n^j) per step; UsageError when recording was disabled.
const std::vector<double>& best_objective_series(const RunResult& result);

} // namespace cbo

#endif
