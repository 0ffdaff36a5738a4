#include "cbo/ensemble.hpp"

#include <ostream>

#include "cbo/errors.hpp"
#include "cbo/io.hpp"

namespace cbo {

Eigen::VectorXd column(const ParticleEnsemble& ensemble, int l) {
    if (l < 0 || l >= ensemble.dimension()) {
        throw UsageError("column: coordinate index out of range");
    }
    return ensemble.states.col(l);
}

double diameter(std::span<const double> v) {
    if (v.empty()) {
        throw UsageError("diameter: empty vector");
    }
    double lo = v[0];
    double hi = v[0];
    for (double x : v) {
        if (x < lo) lo = x;
        if (x > hi) hi = x;
    }
    return hi - lo;
}

double diameter(const Eigen::VectorXd& v) {
    return diameter(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

double max_pairwise_inf_distance(const ParticleEnsemble& ensemble) {
    double best = 0.0;
    for (int l = 0; l < ensemble.dimension(); ++l) {
        double lo = ensemble.states(0, l);
        double hi = lo;
        for (int i = 1; i < ensemble.particles(); ++i) {
            double x = ensemble.states(i, l);
            if (x < lo) lo = x;
            if (x > hi) hi = x;
        }
        best = std::max(best, hi - lo);
    }
    return best;
}

ParticleEnsemble sample_initial(int particles, int dimension, const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper, RngStream& rng) {
    if (particles < 1 || dimension < 1) {
        throw ConfigError("sample_initial: need particles >= 1 and dimension >= 1");
    }
    if (lower.size() != dimension || upper.size() != dimension) {
        throw ConfigError("sample_initial: bounds must have `dimension` entries");
    }
    for (int k = 0; k < dimension; ++k) {
        if (!(lower[k] < upper[k])) {
            throw ConfigError("sample_initial: lower bound must be < upper bound");
        }
    }
    ParticleEnsemble ensemble;
    ensemble.states.resize(particles, dimension);
    for (int i = 0; i < particles; ++i) {
        for (int k = 0; k < dimension; ++k) {
            ensemble.states(i, k) = rng.uniform(lower[k], upper[k]);
        }
    }
    return ensemble;
}

ParticleEnsemble sample_initial(int particles, int dimension, double lower, double upper,
                                RngStream& rng) {
    return sample_initial(particles, dimension,
                          Eigen::VectorXd::Constant(dimension, lower),
                          Eigen::VectorXd::Constant(dimension, upper), rng);
}

void write_ensemble_csv(std::ostream& out, const ParticleEnsemble& ensemble) {
    out << "# step=" << ensemble.step << "\n";
    for (int k = 0; k < ensemble.dimension(); ++k) {
        out << (k ? ",x" : "x") << (k + 1);
    }
    out << "\n";
    for (int i = 0; i < ensemble.particles(); ++i) {
        for (int k = 0; k < ensemble.dimension(); ++k) {
            if (k) out << ',';
            out << format_double(ensemble.states(i, k));
        }
        out << "\n";
    }
}

} // namespace cbo
