#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "cbo/consensus.hpp"
#include "cbo/errors.hpp"
#include "cbo/rng.hpp"

using namespace cbo;

TEST_CASE("gibbs weights: frozen examples") {
    // equal values -> uniform
    std::vector<double> equal{3.0, 3.0, 3.0, 3.0};
    for (double w : gibbs_weights(equal, 7.0)) {
        CHECK(w == doctest::Approx(0.25).epsilon(1e-14));
    }
    // beta = 0 -> uniform
    std::vector<double> values{0.0, 5.0, -2.0};
    for (double w : gibbs_weights(values, 0.0)) {
        CHECK(w == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    }
    // L = (0, 1), beta = ln 3 -> weights (3/4, 1/4)
    std::vector<double> pair{0.0, 1.0};
    const auto w = gibbs_weights(pair, std::log(3.0));
    CHECK(w[0] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(w[1] == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("gibbs weights: normalization, shift invariance, large beta") {
    RngStream rng(41, 0);
    for (int trial = 0; trial < 2000; ++trial) {
        const int size = 1 + static_cast<int>(rng.bounded(8));
        std::vector<double> values(static_cast<std::size_t>(size));
        for (double& v : values) v = rng.uniform(-50, 50);
        const double beta = rng.uniform(0, 20);
        const auto weights = gibbs_weights(values, beta);
        const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        CHECK(std::abs(total - 1.0) <= 1e-12);
        for (double w : weights) CHECK(w >= 0.0);

        std::vector<double> shifted = values;
        const double shift = rng.uniform(-1000, 1000);
        for (double& v : shifted) v += shift;
        const auto shifted_weights = gibbs_weights(shifted, beta);
        for (std::size_t k = 0; k < weights.size(); ++k) {
            CHECK(shifted_weights[k] == doctest::Approx(weights[k]).epsilon(1e-10));
        }
    }
    // huge beta with a large spread must not collapse to NaN
    std::vector<double> spread{0.0, 1e5};
    const auto w = gibbs_weights(spread, 1e4);
    CHECK(w[0] == doctest::Approx(1.0));
    CHECK(std::isfinite(w[1]));
}

namespace {

ParticleEnsemble two_by_two(double a, double b, double c, double d) {
    ParticleEnsemble ensemble;
    ensemble.states.resize(2, 2);
    ensemble.states << a, b, c, d;
    return ensemble;
}

} // namespace

TEST_CASE("argmin representative: exact copy, min-index ties") {
    ParticleEnsemble ensemble;
    ensemble.states.resize(3, 2);
    ensemble.states << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
    std::vector<double> values{5.0, 2.0, 2.0};
    std::vector<int> batch{0, 1, 2};

    CHECK(argmin_member(values, batch) == 1);
    const auto rep = representative_from_values(ensemble, batch, RepresentativeRule::argmin(),
                                                values);
    CHECK(rep(0) == ensemble.states(1, 0)); // bit-identical copy
    CHECK(rep(1) == ensemble.states(1, 1));

    const auto weights = batch_weights(values, batch, RepresentativeRule::argmin());
    CHECK(weights == std::vector<double>{0.0, 1.0, 0.0});
}

TEST_CASE("singleton batches return the particle itself under either rule") {
    const auto ensemble = two_by_two(1.5, -2.5, 3.0, 4.0);
    std::vector<double> values{7.0, 1.0};
    std::vector<int> batch{0};
    for (const auto& rule : {RepresentativeRule::argmin(), RepresentativeRule::gibbs(3.0)}) {
        const auto rep = representative_from_values(ensemble, batch, rule, values);
        CHECK(rep(0) == 1.5);
        CHECK(rep(1) == -2.5);
    }
}

TEST_CASE("gibbs beta = 0 averages the batch") {
    const auto ensemble = two_by_two(0.0, 0.0, 2.0, 2.0);
    std::vector<double> values{9.0, -1.0};
    std::vector<int> batch{0, 1};
    const auto rep =
        representative_from_values(ensemble, batch, RepresentativeRule::gibbs(0.0), values);
    CHECK(rep(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rep(1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("representative stays inside the coordinatewise batch box") {
    RngStream rng(42, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + static_cast<int>(rng.bounded(6));
        const int d = 1 + static_cast<int>(rng.bounded(3));
        ParticleEnsemble ensemble;
        ensemble.states.resize(n, d);
        std::vector<double> values(static_cast<std::size_t>(n));
        std::vector<int> batch;
        for (int i = 0; i < n; ++i) {
            values[static_cast<std::size_t>(i)] = rng.uniform(-5, 5);
            batch.push_back(i);
            for (int l = 0; l < d; ++l) ensemble.states(i, l) = rng.uniform(-5, 5);
        }
        const bool use_argmin = rng.bounded(2) == 0;
        const auto rule = use_argmin ? RepresentativeRule::argmin()
                                     : RepresentativeRule::gibbs(rng.uniform(0, 30));
        const auto rep = representative_from_values(ensemble, batch, rule, values);
        for (int l = 0; l < d; ++l) {
            const auto col = ensemble.states.col(l);
            CHECK(rep(l) >= col.minCoeff() - 1e-12);
            CHECK(rep(l) <= col.maxCoeff() + 1e-12);
        }
    }
}

TEST_CASE("large beta approaches the argmin representative") {
    RngStream rng(43, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3 + static_cast<int>(rng.bounded(4));
        ParticleEnsemble ensemble;
        ensemble.states.resize(n, 2);
        std::vector<double> values(static_cast<std::size_t>(n));
        std::vector<int> batch;
        for (int i = 0; i < n; ++i) {
            batch.push_back(i);
            values[static_cast<std::size_t>(i)] = 0.2 * i + rng.uniform(0.0, 0.1);
            for (int l = 0; l < 2; ++l) ensemble.states(i, l) = rng.uniform(-5, 5);
        }
        const auto sharp =
            representative_from_values(ensemble, batch, RepresentativeRule::gibbs(1e3), values);
        const auto exact = representative_from_values(ensemble, batch,
                                                      RepresentativeRule::argmin(), values);
        // gap between best and second-best value is at least 0.1 here, so the
        // residual weight mass is at most (n-1) e^{-1e3 * 0.1}
        CHECK((sharp - exact).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("empty batches and bad parameters are rejected") {
    const auto ensemble = two_by_two(0, 0, 1, 1);
    std::vector<double> values{1.0, 2.0};
    std::vector<int> empty;
    CHECK_THROWS_AS(
        representative_from_values(ensemble, empty, RepresentativeRule::argmin(), values),
        UsageError);
    CHECK_THROWS_AS(gibbs_weights({}, 1.0), UsageError);
    CHECK_THROWS_AS(RepresentativeRule::gibbs(-1.0), ConfigError);
}

TEST_CASE("objective-evaluating overload matches the value-based path") {
    ParticleEnsemble ensemble;
    ensemble.states.resize(3, 1);
    ensemble.states << -1.0, 0.5, 2.0;
    auto objective = make_objective("sphere", 1, {0.0}, 0.0);
    std::vector<int> batch{0, 1, 2};
    const auto rep = representative(ensemble, batch, RepresentativeRule::argmin(), *objective);
    CHECK(rep(0) == 0.5);
}
