#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wmle/errors.hpp"

namespace wmle {

/// N points in d dimensions, row-major.
struct EmpiricalCloud {
    std::size_t N = 0;
    std::size_t d = 0;
    std::vector<double> points;

    EmpiricalCloud() = default;
    EmpiricalCloud(std::size_t n, std::size_t dim) : N(n), d(dim), points(n * dim, 0.0) {}
    const double* row(std::size_t i) const { return points.data() + i * d; }
    double& at(std::size_t i, std::size_t j) { return points[i * d + j]; }

    static EmpiricalCloud from_column(const std::vector<double>& x);
};

enum class OtSolver { Sorted1d, ExactMatching, Entropic, BruteForce };

std::string solver_name(OtSolver s);

/// Equal-weight transport outcome: wp_value = (total_cost / N)^{1/p}; exact
/// solvers report gap = 0, the entropic solver reports a certified optimality
/// gap for its (feasible) rounded coupling.
struct TransportResult {
    std::vector<std::uint32_t> assignment; // row i of X matched to assignment[i] of Y
    double total_cost = 0.0;
    double wp_value = 0.0;
    double order = 1.0;
    OtSolver solver = OtSolver::ExactMatching;
    std::optional<double> gap;
    bool converged = true;
};

/// 1-D optimum via the monotone (sorted) coupling.
TransportResult w_p_1d(const std::vector<double>& x, const std::vector<double>& y, double p);

/// Globally optimal equal-weight matching under c(i,j) = |X_i - Y_j|^p,
/// by shortest augmenting paths on the dense cost matrix. N above the cap
/// raises capacity_error directing the caller to the entropic solver.
TransportResult w_p_exact(const EmpiricalCloud& x, const EmpiricalCloud& y, double p,
                          std::size_t exact_cap = 5000);

/// Log-domain-stabilized Sinkhorn on the entropic regularization with
/// rounding to exact marginals before costing; the reported wp is a feasible
/// coupling's value, hence an upper bound on the true wp.
TransportResult w_p_entropic(const EmpiricalCloud& x, const EmpiricalCloud& y, double p,
                             double epsilon, unsigned max_iter = 2000);

/// Exhaustive minimum over all N! permutations, N <= 8; the test oracle.
TransportResult brute_force_wp(const EmpiricalCloud& x, const EmpiricalCloud& y, double p);

/// Median of |X_i - Y_j|^p over a deterministic subsample; used to size the
/// entropic regularization.
double median_pairwise_cost(const EmpiricalCloud& x, const EmpiricalCloud& y, double p);

/// Point-cloud CSV: d columns, one point per row, no header.
EmpiricalCloud read_cloud_csv(const std::string& path);
void write_cloud_csv(const EmpiricalCloud& cloud, const std::string& path);

} // namespace wmle
