#include "cbo/dynamics.hpp"

#include <cmath>
#include <string>

#include "cbo/errors.hpp"

namespace cbo {

NoiseModel NoiseModel::none() {
    return NoiseModel{};
}

NoiseModel NoiseModel::gaussian(double zeta, Heterogeneity het) {
    if (!(zeta >= 0.0) || !std::isfinite(zeta)) {
        throw ConfigError("noise: zeta must be finite and >= 0");
    }
    NoiseModel m;
    m.kind = Kind::gaussian;
    m.heterogeneity = het;
    m.zeta = zeta;
    return m;
}

NoiseModel NoiseModel::scheme_b(double lambda, double sigma, double h, Heterogeneity het) {
    if (!(lambda > 0.0) || !(h > 0.0) || !(sigma >= 0.0)) {
        throw ConfigError("noise: scheme_b needs lambda > 0, h > 0, sigma >= 0");
    }
    NoiseModel m;
    m.kind = Kind::scheme_b;
    m.heterogeneity = het;
    m.lambda = lambda;
    m.sigma = sigma;
    m.h = h;
    return m;
}

NoiseModel NoiseModel::scheme_c(double lambda, double sigma, double h, Heterogeneity het) {
    if (!(lambda > 0.0) || !(h > 0.0) || !(sigma >= 0.0)) {
        throw ConfigError("noise: scheme_c needs lambda > 0, h > 0, sigma >= 0");
    }
    NoiseModel m;
    m.kind = Kind::scheme_c;
    m.heterogeneity = het;
    m.lambda = lambda;
    m.sigma = sigma;
    m.h = h;
    return m;
}

double NoiseModel::noise_bound() const {
    switch (kind) {
    case Kind::none:
        return 0.0;
    case Kind::gaussian:
        return zeta;
    case Kind::scheme_b:
        return std::exp(-lambda * h) * sigma * std::sqrt(h);
    case Kind::scheme_c:
        // E eta^2 = e^{-2 lambda h} (e^{sigma^2 h} - 1)
        return std::exp(-lambda * h) * std::sqrt(std::expm1(sigma * sigma * h));
    }
    return 0.0;
}

double NoiseModel::draw(RngStream& rng) const {
    switch (kind) {
    case Kind::none:
        return 0.0;
    case Kind::gaussian:
        return zeta * rng.normal();
    case Kind::scheme_b:
        return std::exp(-lambda * h) * sigma * std::sqrt(h) * rng.normal();
    case Kind::scheme_c: {
        // mean zero: E exp(sigma sqrt(h) Z) = e^{sigma^2 h / 2} cancels the
        // drift correction in the exponent
        const double z = rng.normal();
        return std::exp(-lambda * h) -
               std::exp(-(lambda + 0.5 * sigma * sigma) * h + sigma * std::sqrt(h) * z);
    }
    }
    return 0.0;
}

void NoiseModel::sample(int particles, int dimension, RngStream& rng, RowMatrixXd& out) const {
    out.setZero(particles, dimension);
    if (kind == Kind::none) {
        return;
    }
    if (heterogeneity == Heterogeneity::heterogeneous) {
        for (int i = 0; i < particles; ++i) {
            for (int l = 0; l < dimension; ++l) {
                out(i, l) = draw(rng);
            }
        }
    } else {
        for (int l = 0; l < dimension; ++l) {
            const double eta = draw(rng);
            out.col(l).setConstant(eta);
        }
    }
}

SchemeConfig SchemeConfig::generalized(double gamma, NoiseModel noise) {
    SchemeConfig s;
    s.kind = Kind::generalized;
    s.gamma = gamma;
    s.noise = noise;
    return s;
}

namespace {

SchemeConfig make_model(SchemeConfig::Kind kind, double lambda, double sigma, double h,
                        NoiseModel::Heterogeneity het) {
    if (!(lambda > 0.0) || !(h > 0.0) || !(sigma >= 0.0)) {
        throw ConfigError("scheme: models need lambda > 0, h > 0, sigma >= 0");
    }
    SchemeConfig s;
    s.kind = kind;
    s.lambda = lambda;
    s.sigma = sigma;
    s.h = h;
    s.heterogeneity = het;
    return s;
}

} // namespace

SchemeConfig SchemeConfig::model_a(double lambda, double sigma, double h,
                                   NoiseModel::Heterogeneity het) {
    return make_model(Kind::model_a, lambda, sigma, h, het);
}

SchemeConfig SchemeConfig::model_b(double lambda, double sigma, double h,
                                   NoiseModel::Heterogeneity het) {
    return make_model(Kind::model_b, lambda, sigma, h, het);
}

SchemeConfig SchemeConfig::model_c(double lambda, double sigma, double h,
                                   NoiseModel::Heterogeneity het) {
    return make_model(Kind::model_c, lambda, sigma, h, het);
}

StepParams step_params(const SchemeConfig& scheme) {
    StepParams p;
    switch (scheme.kind) {
    case SchemeConfig::Kind::generalized:
        p.gamma = scheme.gamma;
        p.noise = scheme.noise;
        break;
    case SchemeConfig::Kind::model_a:
        p.gamma = scheme.lambda * scheme.h;
        p.noise = NoiseModel::gaussian(scheme.sigma * std::sqrt(scheme.h), scheme.heterogeneity);
        break;
    case SchemeConfig::Kind::model_b:
        p.gamma = -std::expm1(-scheme.lambda * scheme.h);
        p.noise =
            NoiseModel::scheme_b(scheme.lambda, scheme.sigma, scheme.h, scheme.heterogeneity);
        break;
    case SchemeConfig::Kind::model_c:
        p.gamma = -std::expm1(-scheme.lambda * scheme.h);
        p.noise =
            NoiseModel::scheme_c(scheme.lambda, scheme.sigma, scheme.h, scheme.heterogeneity);
        break;
    }
    if (!(p.gamma > 0.0) || !(p.gamma < 1.0)) {
        throw ConfigError("scheme: effective drift gamma = " + std::to_string(p.gamma) +
                          " must lie in (0, 1)");
    }
    return p;
}

void validate(const RunConfig& config) {
    if (config.particles < 1 || config.particles > 10000) {
        throw ConfigError("run: particles must be in [1, 10000]");
    }
    if (config.dimension < 1 || config.dimension > 1000) {
        throw ConfigError("run: dimension must be in [1, 1000]");
    }
    if (!config.objective) {
        throw ConfigError("run: objective not set");
    }
    if (config.objective->dimension() != config.dimension) {
        throw ConfigError("run: objective dimension mismatch");
    }
    if (config.batch_size < 1 || config.batch_size > config.particles) {
        throw ConfigError("run: batch size must satisfy 1 <= P <= N");
    }
    if (config.max_steps < 1) {
        throw ConfigError("run: max_steps must be >= 1");
    }
    if (!(config.tolerance > 0.0)) {
        throw ConfigError("run: tolerance must be > 0");
    }
    if (config.initial_states) {
        if (config.initial_states->rows() != config.particles ||
            config.initial_states->cols() != config.dimension) {
            throw ConfigError("run: initial_states shape mismatch");
        }
        if (!config.initial_states->allFinite()) {
            throw ConfigError("run: initial_states must be finite");
        }
    } else if (!(config.init_lower < config.init_upper)) {
        throw ConfigError("run: init_lower must be < init_upper");
    }
    if (config.record.transitions) {
        if (config.particles > config.record.transition_max_particles) {
            throw ConfigError("run: transition recording capped at " +
                              std::to_string(config.record.transition_max_particles) +
                              " particles");
        }
        if (config.max_steps > config.record.transition_max_steps) {
            throw ConfigError("run: transition recording capped at " +
                              std::to_string(config.record.transition_max_steps) + " steps");
        }
    }
    step_params(config.scheme); // validates the gamma mapping
}

const char* to_string(Termination t) {
    switch (t) {
    case Termination::tolerance:
        return "tolerance";
    case Termination::max_steps:
        return "max_steps";
    case Termination::divergence:
        return "divergence";
    }
    return "unknown";
}

namespace {

/// Synchronous update of all particles from pre-step states. `values` holds
/// L per particle for the pre-step states. Fills `weight_matrix` (N x N)
/// when non-null.
void step_kernel(const RowMatrixXd& states, RowMatrixXd& next, const BatchPartition& partition,
                 const RepresentativeRule& rule, std::span<const double> values, double gamma,
                 const RowMatrixXd* eta, Eigen::MatrixXd* weight_matrix) {
    const int dimension = static_cast<int>(states.cols());
    Eigen::VectorXd rep(dimension);
    for (const auto& batch : partition.batches) {
        const auto weights = batch_weights(values, batch, rule);
        if (rule.kind == RepresentativeRule::Kind::argmin) {
            rep = states.row(argmin_member(values, batch));
        } else {
            rep.setZero();
            for (std::size_t k = 0; k < batch.size(); ++k) {
                rep += weights[k] * states.row(batch[k]).transpose();
            }
        }
        if (weight_matrix) {
            for (int i : batch) {
                for (std::size_t k = 0; k < batch.size(); ++k) {
                    (*weight_matrix)(i, batch[k]) = weights[k];
                }
            }
        }
        for (int i : batch) {
            for (int l = 0; l < dimension; ++l) {
                const double e = eta ? (*eta)(i, l) : 0.0;
                next(i, l) = states(i, l) - (gamma + e) * (states(i, l) - rep(l));
            }
        }
    }
}

std::vector<double> evaluate_all(const Objective& objective, const ParticleEnsemble& ensemble) {
    std::vector<double> values(static_cast<std::size_t>(ensemble.particles()));
    for (int i = 0; i < ensemble.particles(); ++i) {
        values[static_cast<std::size_t>(i)] = objective.value(ensemble.particle(i));
    }
    return values;
}

} // namespace

ParticleEnsemble step(const ParticleEnsemble& ensemble, const BatchPartition& partition,
                      const RepresentativeRule& rule, const Objective& objective, double gamma,
                      const RowMatrixXd& eta) {
    if (!(gamma > 0.0) || !(gamma < 1.0)) {
        throw ConfigError("step: gamma must lie in (0, 1)");
    }
    validate_partition(partition, ensemble.particles(), partition.max_size);
    const bool has_noise = eta.size() != 0;
    if (has_noise &&
        (eta.rows() != ensemble.particles() || eta.cols() != ensemble.dimension())) {
        throw UsageError("step: eta must be N x d (or empty)");
    }
    const auto values = evaluate_all(objective, ensemble);
    ParticleEnsemble next;
    next.states.resize(ensemble.particles(), ensemble.dimension());
    next.step = ensemble.step + 1;
    step_kernel(ensemble.states, next.states, partition, rule, values, gamma,
                has_noise ? &eta : nullptr, nullptr);
    if (!next.all_finite()) {
        throw DivergenceError(next.step, "step: non-finite state at step " +
                                             std::to_string(next.step));
    }
    return next;
}

RunResult run(const RunConfig& config, RngStream& rng) {
    validate(config);
    const StepParams params = step_params(config.scheme);
    const int N = config.particles;
    const int d = config.dimension;
    const Objective& objective = *config.objective;

    RunResult result;
    result.config = config;
    result.gamma = params.gamma;
    result.noise_bound = params.noise.noise_bound();

    ParticleEnsemble ensemble;
    if (config.initial_states) {
        ensemble.states = *config.initial_states;
    } else {
        ensemble = sample_initial(N, d, config.init_lower, config.init_upper, rng);
    }
    ensemble.step = 0;

    auto values = evaluate_all(objective, ensemble);
    result.evaluations += static_cast<std::uint64_t>(N);

    const bool record_transitions = config.record.transitions;
    if (record_transitions) {
        result.schedule.particles = N;
        result.schedule.max_size = config.batch_size;
    }

    auto record_series = [&](double displacement) {
        result.displacement.push_back(displacement);
        if (config.record.best_objective) {
            double best = values[0];
            for (double v : values) best = std::min(best, v);
            result.best_objective.push_back(best);
        }
        if (config.record.diameters) {
            Eigen::VectorXd diam(d);
            for (int l = 0; l < d; ++l) {
                diam[l] = diameter(Eigen::VectorXd(ensemble.states.col(l)));
            }
            result.diameters.push_back(std::move(diam));
        }
        if (config.record.snapshot_every > 0 &&
            ensemble.step % config.record.snapshot_every == 0) {
            result.snapshots.emplace_back(ensemble.step, ensemble.states);
        }
    };
    record_series(0.0);

    RowMatrixXd next(N, d);
    RowMatrixXd eta;
    const bool has_noise = params.noise.kind != NoiseModel::Kind::none;
    Eigen::MatrixXd weight_matrix;

    for (long n = 0; n < config.max_steps; ++n) {
        BatchPartition partition = sample_partition(N, config.batch_size, rng);
        if (has_noise) {
            params.noise.sample(N, d, rng, eta);
        }
        if (record_transitions) {
            weight_matrix.setZero(N, N);
        }
        step_kernel(ensemble.states, next, partition, config.rule, values, params.gamma,
                    has_noise ? &eta : nullptr, record_transitions ? &weight_matrix : nullptr);
        if (record_transitions) {
            TransitionRecord record;
            record.step = n;
            record.weight_matrix = weight_matrix;
            record.noise = has_noise ? eta : RowMatrixXd(RowMatrixXd::Zero(N, d));
            result.transitions.push_back(std::move(record));
            result.schedule.steps.push_back(std::move(partition));
        }
        if (!next.allFinite()) {
            result.termination = Termination::divergence;
            result.divergence_step = n + 1;
            break;
        }
        const double displacement = (next - ensemble.states).squaredNorm();
        ensemble.states.swap(next);
        ensemble.step = n + 1;
        result.steps = n + 1;

        values = evaluate_all(objective, ensemble);
        result.evaluations += static_cast<std::uint64_t>(N);
        record_series(displacement);

        if (displacement < config.tolerance) {
            result.termination = Termination::tolerance;
            break;
        }
        if (n + 1 == config.max_steps) {
            result.termination = Termination::max_steps;
        }
    }

    if (config.record.snapshot_every > 0 &&
        (result.snapshots.empty() || result.snapshots.back().first != ensemble.step)) {
        result.snapshots.emplace_back(ensemble.step, ensemble.states);
    }
    result.final_ensemble = std::move(ensemble);
    return result;
}

const std::vector<double>& best_objective_series(const RunResult& result) {
    if (!result.config.record.best_objective) {
        throw UsageError("best_objective_series: recording was not enabled");
    }
    return result.best_objective;
}

} // namespace cbo
