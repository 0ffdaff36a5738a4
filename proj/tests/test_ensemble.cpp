#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cbo/ensemble.hpp"
#include "cbo/errors.hpp"

using namespace cbo;

namespace {

ParticleEnsemble make_ensemble(std::initializer_list<std::initializer_list<double>> rows) {
    ParticleEnsemble ensemble;
    const int n = static_cast<int>(rows.size());
    const int d = static_cast<int>(rows.begin()->size());
    ensemble.states.resize(n, d);
    int i = 0;
    for (const auto& row : rows) {
        int l = 0;
        for (double v : row) ensemble.states(i, l++) = v;
        ++i;
    }
    return ensemble;
}

} // namespace

TEST_CASE("column extraction and reassembly") {
    const auto ensemble = make_ensemble({{1.0, 2.0}, {3.0, 4.0}});
    const Eigen::VectorXd col2 = column(ensemble, 1);
    CHECK(col2(0) == 2.0);
    CHECK(col2(1) == 4.0);

    RowMatrixXd reassembled(2, 2);
    for (int l = 0; l < 2; ++l) {
        reassembled.col(l) = column(ensemble, l);
    }
    CHECK(reassembled == ensemble.states);

    const auto single = make_ensemble({{7.0, 8.0, 9.0}});
    CHECK(column(single, 2).size() == 1);
    CHECK(column(single, 2)(0) == 9.0);

    CHECK_THROWS_AS(column(ensemble, 2), UsageError);
    CHECK_THROWS_AS(column(ensemble, -1), UsageError);
}

TEST_CASE("diameter basics") {
    std::vector<double> constant{2.5, 2.5, 2.5};
    CHECK(diameter(constant) == 0.0);
    std::vector<double> v{1.0, 4.0, 2.0};
    CHECK(diameter(v) == 3.0);
    CHECK_THROWS_AS(diameter(std::span<const double>{}), UsageError);
}

TEST_CASE("diameter is shift invariant") {
    RngStream rng(21, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> v(5);
        for (double& x : v) x = rng.uniform(-10, 10);
        const double base = diameter(v);
        const double shift = rng.uniform(-100, 100);
        std::vector<double> w = v;
        for (double& x : w) x += shift;
        CHECK(diameter(w) == doctest::Approx(base).epsilon(1e-12));
        CHECK(base >= 0.0);
    }
}

TEST_CASE("max pairwise inf distance matches the brute-force double loop") {
    CHECK(max_pairwise_inf_distance(make_ensemble({{1.0, 2.0, 3.0}})) == 0.0);
    CHECK(max_pairwise_inf_distance(make_ensemble({{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}})) == 0.0);
    CHECK(max_pairwise_inf_distance(make_ensemble({{0.0, 0.0}, {3.0, -4.0}})) == 4.0);

    RngStream rng(22, 0);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 2 + static_cast<int>(rng.bounded(9));
        const int d = 1 + static_cast<int>(rng.bounded(4));
        ParticleEnsemble ensemble;
        ensemble.states.resize(n, d);
        for (int i = 0; i < n; ++i) {
            for (int l = 0; l < d; ++l) {
                ensemble.states(i, l) = rng.uniform(-5, 5);
            }
        }
        double brute = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                double dist = 0.0;
                for (int l = 0; l < d; ++l) {
                    dist = std::max(dist, std::abs(ensemble.states(i, l) - ensemble.states(j, l)));
                }
                brute = std::max(brute, dist);
            }
        }
        CHECK(max_pairwise_inf_distance(ensemble) == doctest::Approx(brute).epsilon(1e-14));
    }
}

TEST_CASE("initial sampling: support, mean, determinism") {
    RngStream rng(23, 0);
    const int n = 100000;
    auto ensemble = sample_initial(n, 1, -3.0, 3.0, rng);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = ensemble.states(i, 0);
        CHECK(x >= -3.0);
        CHECK(x < 3.0);
        sum += x;
    }
    // 3 sigma / sqrt(n) with sigma = sqrt(3)
    CHECK(std::abs(sum / n) < 0.03);

    RngStream r1(99, 5);
    RngStream r2(99, 5);
    auto a = sample_initial(20, 3, -3.0, 3.0, r1);
    auto b = sample_initial(20, 3, -3.0, 3.0, r2);
    CHECK(a.states == b.states);

    CHECK_THROWS_AS(sample_initial(5, 2, 3.0, -3.0, rng), ConfigError);
}

TEST_CASE("ensemble CSV carries the step index and full precision") {
    auto ensemble = make_ensemble({{0.1, 0.2}, {0.3, 0.4}});
    ensemble.step = 17;
    std::ostringstream out;
    write_ensemble_csv(out, ensemble);
    const std::string text = out.str();
    CHECK(text.find("# step=17") == 0);
    CHECK(text.find("x1,x2") != std::string::npos);
    CHECK(text.find("0.10000000000000001") != std::string::npos); // 0.1 at 17 digits
}
