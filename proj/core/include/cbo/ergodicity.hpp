#ifndef CBO_ERGODICITY_HPP
#define CBO_ERGODICITY_HPP

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "cbo/ensemble.hpp"

namespace cbo {

struct RunResult; // dynamics.hpp

/// Per-step transition data recorded by an instrumented run: the
/// row-stochastic weight matrix W_n (row i holds the batch weights of
/// particle i's batch, zero outside it) and the noise draws eta_n (N x d).
/// The drift part A_n = (1-gamma) I + gamma W_n and the per-coordinate noise
/// part B_n^l = -diag(eta^l) (I - W_n) are derived on demand.
struct TransitionRecord {
    long step = 0;
    Eigen::MatrixXd weight_matrix; // W_n, N x N
    RowMatrixXd noise;             // eta_n, N x d (zero when noise-free)
};

Eigen::MatrixXd drift_matrix(const TransitionRecord& record, double gamma);
Eigen::MatrixXd noise_matrix(const TransitionRecord& record, int coordinate);

/// Ergodicity coefficient: min over ordered row pairs (i, j), i == j
/// included, of sum_k min(a_ik, a_jk). For row-stochastic matrices the
/// diagonal pairs contribute the row sum and never attain the minimum unless
/// all rows are equal; including them matters only for arbitrary matrices.
double ergodicity_coefficient(const Eigen::MatrixXd& a);

/// max_i sum_j |a_ij| (maximum absolute row sum).
double mixed_norm_1_inf(const Eigen::MatrixXd& a);

/// Ordered product M_{end-1} * ... * M_{begin} (rightmost factor earliest).
Eigen::MatrixXd ordered_product(std::span<const Eigen::MatrixXd> factors);

/// One verified inequality: pass iff slack >= -tolerance, where slack is
/// lhs - rhs for lower bounds and rhs - lhs for upper bounds (the `name`
/// says which).
struct BoundReport {
    std::string name;
    long window_begin = 0;
    long window_end = 0;
    int coordinate = -1;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool pass = false;
};

constexpr double kBoundTolerance = 1e-10;

/// For A with equal row sums a (within 1e-10, else UsageError):
/// diameter(A z) <= (a - alpha(A)) * diameter(z).
BoundReport diameter_contraction_check(const Eigen::MatrixXd& a, const Eigen::VectorXd& z,
                                       double tolerance = kBoundTolerance);

/// Window noise statistic: 2 [ prod_r (1 + 2 max_i |eta_r^{i,l}|) - 1 ].
double noise_statistic(std::span<const TransitionRecord> window, int coordinate);

/// alpha(A_{end-1} ... A_begin) >= gamma (1-gamma)^{m-1} * connectivity.
/// Requires transition records and the schedule over [begin, end).
BoundReport product_alpha_bound_noise_free(const RunResult& result, long begin, long end);

/// Perturbed-product bounds over [begin, end) for one coordinate:
///   product-alpha:  alpha(Prod (A+B))  >= gamma (1-gamma)^{m-1} G - H
///   alpha-norm:     alpha(Prod(A+B) - Prod A) >= -2 ||Prod(A+B) - Prod A||
///   product-norm:   ||Prod(A+B) - Prod A|| <= Prod(||A||+||B||) - Prod||A||
std::vector<BoundReport> perturbed_product_alpha_bounds(const RunResult& result, long begin,
                                                        long end, int coordinate);

/// Diameter bounds for window index k of length m (steps [k m, (k+1) m)):
///   one-window:  D(x_{(k+1)m}) <= (1 - alpha(Prod (A+B))) D(x_{km})
///   cumulative:  D(x_n) <= D(x_0) (1 + H_{[km,n)}) *
///                prod_{s<=k} (1 - gamma(1-gamma)^{m-1} G_s + H_s)
/// for every n in (km, (k+1)m]. Requires recorded diameters.
std::vector<BoundReport> window_diameter_bounds(const RunResult& result, long window_index,
                                                int window_length, int coordinate);

} // namespace cbo

#endif
