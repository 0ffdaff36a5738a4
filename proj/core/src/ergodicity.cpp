#include "cbo/ergodicity.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cbo/dynamics.hpp"
#include "cbo/errors.hpp"

namespace cbo {

Eigen::MatrixXd drift_matrix(const TransitionRecord& record, double gamma) {
    const auto n = record.weight_matrix.rows();
    return (1.0 - gamma) * Eigen::MatrixXd::Identity(n, n) + gamma * record.weight_matrix;
}

Eigen::MatrixXd noise_matrix(const TransitionRecord& record, int coordinate) {
    const auto n = record.weight_matrix.rows();
    if (coordinate < 0 || coordinate >= record.noise.cols()) {
        throw UsageError("noise_matrix: coordinate out of range");
    }
    Eigen::VectorXd eta = record.noise.col(coordinate);
    return (-eta).asDiagonal() * (Eigen::MatrixXd::Identity(n, n) - record.weight_matrix);
}

double ergodicity_coefficient(const Eigen::MatrixXd& a) {
    const auto n = a.rows();
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            double sum = 0.0;
            for (Eigen::Index k = 0; k < n; ++k) {
                sum += std::min(a(i, k), a(j, k));
            }
            best = std::min(best, sum);
        }
    }
    return best;
}

double mixed_norm_1_inf(const Eigen::MatrixXd& a) {
    return a.cwiseAbs().rowwise().sum().maxCoeff();
}

Eigen::MatrixXd ordered_product(std::span<const Eigen::MatrixXd> factors) {
    if (factors.empty()) {
        throw UsageError("ordered_product: empty factor sequence");
    }
    Eigen::MatrixXd product = factors[0];
    for (std::size_t r = 1; r < factors.size(); ++r) {
        product = factors[r] * product; // later factors multiply from the left
    }
    return product;
}

BoundReport diameter_contraction_check(const Eigen::MatrixXd& a, const Eigen::VectorXd& z,
                                       double tolerance) {
    if (a.rows() != a.cols() || a.rows() != z.size() || z.size() == 0) {
        throw UsageError("diameter_contraction_check: shape mismatch");
    }
    const Eigen::VectorXd row_sums = a.rowwise().sum();
    const double common = row_sums.mean();
    if ((row_sums.array() - common).abs().maxCoeff() > 1e-10) {
        throw UsageError("diameter_contraction_check: rows must share a common sum");
    }
    BoundReport report;
    report.name = "diameter-contraction";
    report.lhs = diameter(Eigen::VectorXd(a * z));
    report.rhs = (common - ergodicity_coefficient(a)) * diameter(z);
    report.slack = report.rhs - report.lhs;
    report.pass = report.slack >= -tolerance;
    return report;
}

double noise_statistic(std::span<const TransitionRecord> window, int coordinate) {
    double product = 1.0;
    for (const auto& record : window) {
        if (coordinate < 0 || coordinate >= record.noise.cols()) {
            throw UsageError("noise_statistic: coordinate out of range");
        }
        product *= 1.0 + 2.0 * record.noise.col(coordinate).cwiseAbs().maxCoeff();
    }
    return 2.0 * (product - 1.0);
}

namespace {

void check_window(const RunResult& result, long begin, long end) {
    if (result.transitions.empty() || result.schedule.steps.size() != result.transitions.size()) {
        throw UsageError("ergodicity check: transition records missing (enable recording)");
    }
    if (begin < 0 || begin >= end || end > static_cast<long>(result.transitions.size())) {
        throw UsageError("ergodicity check: window outside recorded range");
    }
}

std::vector<Eigen::MatrixXd> drift_factors(const RunResult& result, long begin, long end) {
    std::vector<Eigen::MatrixXd> factors;
    factors.reserve(static_cast<std::size_t>(end - begin));
    for (long r = begin; r < end; ++r) {
        factors.push_back(drift_matrix(result.transitions[static_cast<std::size_t>(r)],
                                       result.gamma));
    }
    return factors;
}

std::vector<Eigen::MatrixXd> perturbed_factors(const RunResult& result, long begin, long end,
                                               int coordinate) {
    std::vector<Eigen::MatrixXd> factors;
    factors.reserve(static_cast<std::size_t>(end - begin));
    for (long r = begin; r < end; ++r) {
        const auto& record = result.transitions[static_cast<std::size_t>(r)];
        factors.push_back(drift_matrix(record, result.gamma) + noise_matrix(record, coordinate));
    }
    return factors;
}

double drift_rate(double gamma, long m) {
    return gamma * std::pow(1.0 - gamma, static_cast<double>(m - 1));
}

} // namespace

BoundReport product_alpha_bound_noise_free(const RunResult& result, long begin, long end) {
    check_window(result, begin, end);
    const auto factors = drift_factors(result, begin, end);
    const long m = end - begin;
    const long connectivity = connectivity_count(result.schedule, begin, end);

    BoundReport report;
    report.name = "product-alpha-connectivity";
    report.window_begin = begin;
    report.window_end = end;
    report.lhs = ergodicity_coefficient(ordered_product(factors));
    report.rhs = drift_rate(result.gamma, m) * static_cast<double>(connectivity);
    report.slack = report.lhs - report.rhs;
    report.pass = report.slack >= -kBoundTolerance;
    return report;
}

std::vector<BoundReport> perturbed_product_alpha_bounds(const RunResult& result, long begin,
                                                        long end, int coordinate) {
    check_window(result, begin, end);
    const long m = end - begin;
    const auto drift = drift_factors(result, begin, end);
    const auto perturbed = perturbed_factors(result, begin, end, coordinate);
    const Eigen::MatrixXd drift_product = ordered_product(drift);
    const Eigen::MatrixXd perturbed_product = ordered_product(perturbed);
    const Eigen::MatrixXd difference = perturbed_product - drift_product;

    const std::span<const TransitionRecord> window(result.transitions.data() + begin,
                                                   static_cast<std::size_t>(m));
    const double h_stat = noise_statistic(window, coordinate);
    const long connectivity = connectivity_count(result.schedule, begin, end);

    std::vector<BoundReport> reports;

    BoundReport alpha_bound;
    alpha_bound.name = "perturbed-product-alpha";
    alpha_bound.window_begin = begin;
    alpha_bound.window_end = end;
    alpha_bound.coordinate = coordinate;
    alpha_bound.lhs = ergodicity_coefficient(perturbed_product);
    alpha_bound.rhs = drift_rate(result.gamma, m) * static_cast<double>(connectivity) - h_stat;
    alpha_bound.slack = alpha_bound.lhs - alpha_bound.rhs;
    alpha_bound.pass = alpha_bound.slack >= -kBoundTolerance;
    reports.push_back(alpha_bound);

    BoundReport norm_lower;
    norm_lower.name = "alpha-mixed-norm-lower";
    norm_lower.window_begin = begin;
    norm_lower.window_end = end;
    norm_lower.coordinate = coordinate;
    norm_lower.lhs = ergodicity_coefficient(difference);
    norm_lower.rhs = -2.0 * mixed_norm_1_inf(difference);
    norm_lower.slack = norm_lower.lhs - norm_lower.rhs;
    norm_lower.pass = norm_lower.slack >= -kBoundTolerance;
    reports.push_back(norm_lower);

    double bound = 1.0;
    double drift_norms = 1.0;
    for (long r = 0; r < m; ++r) {
        const auto& a = drift[static_cast<std::size_t>(r)];
        const auto& p = perturbed[static_cast<std::size_t>(r)];
        const double na = mixed_norm_1_inf(a);
        bound *= na + mixed_norm_1_inf(p - a);
        drift_norms *= na;
    }
    BoundReport norm_upper;
    norm_upper.name = "product-difference-norm";
    norm_upper.window_begin = begin;
    norm_upper.window_end = end;
    norm_upper.coordinate = coordinate;
    norm_upper.lhs = mixed_norm_1_inf(difference);
    norm_upper.rhs = bound - drift_norms;
    norm_upper.slack = norm_upper.rhs - norm_upper.lhs;
    norm_upper.pass = norm_upper.slack >= -kBoundTolerance;
    reports.push_back(norm_upper);

    return reports;
}

std::vector<BoundReport> window_diameter_bounds(const RunResult& result, long window_index,
                                                int window_length, int coordinate) {
    if (window_index < 0 || window_length < 1) {
        throw UsageError("window_diameter_bounds: need window_index >= 0 and length >= 1");
    }
    if (!result.config.record.diameters ||
        result.diameters.size() != static_cast<std::size_t>(result.steps) + 1) {
        throw UsageError("window_diameter_bounds: diameter series missing");
    }
    const long k = window_index;
    const long m = window_length;
    const long window_begin = k * m;
    const long window_end = (k + 1) * m;
    check_window(result, window_begin, window_end);

    auto diam = [&](long n) {
        return result.diameters[static_cast<std::size_t>(n)](coordinate);
    };

    std::vector<BoundReport> reports;

    // contraction of one full window through the perturbed product
    {
        const auto factors = perturbed_factors(result, window_begin, window_end, coordinate);
        BoundReport report;
        report.name = "window-diameter-contraction";
        report.window_begin = window_begin;
        report.window_end = window_end;
        report.coordinate = coordinate;
        report.lhs = diam(window_end);
        report.rhs =
            (1.0 - ergodicity_coefficient(ordered_product(factors))) * diam(window_begin);
        report.slack = report.rhs - report.lhs;
        report.pass = report.slack >= -kBoundTolerance;
        reports.push_back(report);
    }

    // cumulative product bound from step 0, checked at every step the window
    // covers
    double window_products = 1.0;
    for (long s = 0; s < k; ++s) {
        const std::span<const TransitionRecord> window(
            result.transitions.data() + s * m, static_cast<std::size_t>(m));
        const long connectivity = connectivity_count(result.schedule, s * m, (s + 1) * m);
        window_products *= 1.0 - drift_rate(result.gamma, m) * static_cast<double>(connectivity) +
                           noise_statistic(window, coordinate);
    }
    for (long n = window_begin; n < window_end; ++n) {
        const std::span<const TransitionRecord> partial(
            result.transitions.data() + window_begin, static_cast<std::size_t>(n - window_begin));
        BoundReport report;
        report.name = "window-diameter-cumulative";
        report.window_begin = window_begin;
        report.window_end = n;
        report.coordinate = coordinate;
        report.lhs = diam(n);
        report.rhs = result.diameters[0](coordinate) *
                     (1.0 + noise_statistic(partial, coordinate)) * window_products;
        report.slack = report.rhs - report.lhs;
        report.pass = report.slack >= -kBoundTolerance;
        reports.push_back(report);
    }
    return reports;
}

} // namespace cbo
