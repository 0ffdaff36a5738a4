#include "cbo/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cbo/errors.hpp"

namespace cbo {

RepresentativeRule RepresentativeRule::gibbs(double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw ConfigError("gibbs rule: beta must be finite and >= 0");
    }
    return RepresentativeRule{Kind::gibbs, beta};
}

std::vector<double> gibbs_weights(std::span<const double> values, double beta) {
    if (values.empty()) {
        throw UsageError("gibbs_weights: empty batch");
    }
    if (!(beta >= 0.0)) {
        throw ConfigError("gibbs_weights: beta must be >= 0");
    }
    double vmin = values[0];
    for (double v : values) vmin = std::min(vmin, v);

    std::vector<double> weights(values.size());
    double total = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        weights[j] = std::exp(-beta * (values[j] - vmin));
        total += weights[j];
    }
    for (double& w : weights) w /= total;
    return weights;
}

int argmin_member(std::span<const double> values_by_particle, std::span<const int> batch) {
    if (batch.empty()) {
        throw UsageError("argmin_member: empty batch");
    }
    int best = batch[0];
    double best_value = values_by_particle[static_cast<std::size_t>(best)];
    for (int j : batch) {
        const double v = values_by_particle[static_cast<std::size_t>(j)];
        if (v < best_value || (v == best_value && j < best)) {
            best = j;
            best_value = v;
        }
    }
    return best;
}

std::vector<double> batch_weights(std::span<const double> values_by_particle,
                                  std::span<const int> batch, const RepresentativeRule& rule) {
    if (batch.empty()) {
        throw UsageError("batch_weights: empty batch");
    }
    if (rule.kind == RepresentativeRule::Kind::argmin) {
        std::vector<double> weights(batch.size(), 0.0);
        const int winner = argmin_member(values_by_particle, batch);
        for (std::size_t k = 0; k < batch.size(); ++k) {
            if (batch[k] == winner) {
                weights[k] = 1.0;
                break;
            }
        }
        return weights;
    }
    std::vector<double> values(batch.size());
    for (std::size_t k = 0; k < batch.size(); ++k) {
        values[k] = values_by_particle[static_cast<std::size_t>(batch[k])];
    }
    return gibbs_weights(values, rule.beta);
}

Eigen::VectorXd representative_from_values(const ParticleEnsemble& ensemble,
                                           std::span<const int> batch,
                                           const RepresentativeRule& rule,
                                           std::span<const double> values_by_particle) {
    if (batch.empty()) {
        throw UsageError("representative: empty batch");
    }
    if (rule.kind == RepresentativeRule::Kind::argmin) {
        const int winner = argmin_member(values_by_particle, batch);
        return ensemble.states.row(winner);
    }
    const auto weights = batch_weights(values_by_particle, batch, rule);
    Eigen::VectorXd rep = Eigen::VectorXd::Zero(ensemble.dimension());
    for (std::size_t k = 0; k < batch.size(); ++k) {
        rep += weights[k] * ensemble.states.row(batch[k]).transpose();
    }
    return rep;
}

Eigen::VectorXd representative(const ParticleEnsemble& ensemble, std::span<const int> batch,
                               const RepresentativeRule& rule, const Objective& objective) {
    std::vector<double> values(static_cast<std::size_t>(ensemble.particles()),
                               std::numeric_limits<double>::quiet_NaN());
    for (int j : batch) {
        values[static_cast<std::size_t>(j)] = objective.value(ensemble.particle(j));
    }
    return representative_from_values(ensemble, batch, rule, values);
}

} // namespace cbo
