#ifndef CBO_ENSEMBLE_HPP
#define CBO_ENSEMBLE_HPP

#include <Eigen/Core>
#include <iosfwd>
#include <span>

#include "cbo/rng.hpp"

namespace cbo {

/// Particle states, one row per particle (row-major so a particle is a
/// contiguous span); columns are coordinates.
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ParticleEnsemble {
    RowMatrixXd states; // N x d
    long step = 0;

    int particles() const { return static_cast<int>(states.rows()); }
    int dimension() const { return static_cast<int>(states.cols()); }

    std::span<const double> particle(int i) const {
        return {states.row(i).data(), static_cast<std::size_t>(states.cols())};
    }

    bool all_finite() const { return states.allFinite(); }
};

/// l-th coordinate across all particles (0-based l). Out of range -> UsageError.
Eigen::VectorXd column(const ParticleEnsemble& ensemble, int l);

/// max - min of a nonempty vector. Empty -> UsageError.
double diameter(std::span<const double> v);
double diameter(const Eigen::VectorXd& v);

/// max_{i,j} ||x^i - x^j||_inf == max_l diameter(column l).
double max_pairwise_inf_distance(const ParticleEnsemble& ensemble);

/// i.i.d. uniform initial states, coordinate k on [lower[k], upper[k]).
/// Draw order is fixed (particle-major, coordinate inner), so a given stream
/// always produces the same ensemble.
ParticleEnsemble sample_initial(int particles, int dimension, const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper, RngStream& rng);
ParticleEnsemble sample_initial(int particles, int dimension, double lower, double upper,
                                RngStream& rng);

/// CSV snapshot: "# step=<n>" then a header row x1..xd, then one row per
/// particle with 17-significant-digit values.
void write_ensemble_csv(std::ostream& out, const ParticleEnsemble& ensemble);

} // namespace cbo

#endif
