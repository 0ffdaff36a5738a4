#ifndef CBO_CONSENSUS_HPP
#define CBO_CONSENSUS_HPP

#include <Eigen/Core>
#include <span>
#include <vector>

#include "cbo/ensemble.hpp"
#include "cbo/objectives.hpp"

namespace cbo {

/// How a batch maps to its representative point: Gibbs-weighted average of
/// member states (weight proportional to exp(-beta * L)) or the state of the
/// batch's best member (lowest objective value, lowest index on exact ties).
struct RepresentativeRule {
    enum class Kind { gibbs, argmin };
    Kind kind = Kind::gibbs;
    double beta = 1.0;

    static RepresentativeRule gibbs(double beta);
    static RepresentativeRule argmin() { return RepresentativeRule{Kind::argmin, 0.0}; }
};

/// Normalized weights exp(-beta (L_j - L_min)) / sum over the batch. The
/// shift by the batch minimum is algebraically neutral and keeps large-beta
/// weights away from overflow/underflow collapse. Weights sum to 1 within
/// 1e-12 for finite inputs.
std::vector<double> gibbs_weights(std::span<const double> values, double beta);

/// Member of `batch` with minimal value; exact float ties broken by the
/// smallest particle index. Returns the particle index.
int argmin_member(std::span<const double> values_by_particle, std::span<const int> batch);

/// Weights aligned with `batch` (argmin -> one-hot). `values_by_particle` is
/// indexed by particle id and must cover every batch member.
std::vector<double> batch_weights(std::span<const double> values_by_particle,
                                  std::span<const int> batch, const RepresentativeRule& rule);

/// Per-batch representative point from precomputed objective values. For the
/// argmin rule this is a verbatim copy of the chosen particle's state (no
/// arithmetic on states).
Eigen::VectorXd representative_from_values(const ParticleEnsemble& ensemble,
                                           std::span<const int> batch,
                                           const RepresentativeRule& rule,
                                           std::span<const double> values_by_particle);

/// Convenience overload evaluating the objective on the batch members.
Eigen::VectorXd representative(const ParticleEnsemble& ensemble, std::span<const int> batch,
                               const RepresentativeRule& rule, const Objective& objective);

} // namespace cbo

#endif
