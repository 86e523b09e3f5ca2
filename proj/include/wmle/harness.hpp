#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wmle/bounds.hpp"
#include "wmle/families.hpp"
#include "wmle/ot.hpp"

namespace wmle {

/// One table experiment: per (n, repetition), N draws of W against N draws of
/// Z, distance averaged over K repetitions, paired with the family's
/// closed-form bound.
struct ExperimentConfig {
    FamilyModel family = FamilyModel::exp_canonical(1.0);
    std::vector<std::uint64_t> n_values;
    std::uint64_t N = 10000; // cloud size per distance
    std::uint64_t K = 100;   // repetitions averaged per row
    double p = 1.0;          // Wasserstein order
    Metric metric = Metric::W1;
    std::uint64_t master_seed = 1;
    std::size_t exact_cap = 5000;
    double entropic_eps_factor = 0.005; // epsilon = factor x median pairwise cost
    unsigned entropic_max_iter = 2000;
    unsigned threads = 0; // 0 = hardware concurrency
};

struct ExperimentRow {
    std::uint64_t n = 0;
    double dhat_mean = 0.0;
    double dhat_stderr = 0.0;
    double bound = 0.0;
    double gap = 0.0; // bound - dhat_mean, exactly
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows;
    std::string family;
    std::string metric;
    double order = 1.0;
    std::uint64_t N = 0, K = 0, master_seed = 0;
    std::string solver;
};

/// The family must have a registered closed-form bound for (metric, order);
/// deterministic given master_seed, independent of thread count.
ExperimentReport run_table(const ExperimentConfig& config);

/// Closed-form bound for the family at sample size n, or contract_error if
/// none is registered for the metric.
BoundBreakdown closed_form_bound(const FamilyModel& family, Metric metric, std::uint64_t n);

/// Dimension-scaling study: unit MVN with diagonal covariance, W in R^{2p},
/// distance vs dimension at fixed n with log-log tail slopes.
struct ScalingConfig {
    std::vector<std::uint64_t> p_values; // e.g. 2..100
    std::uint64_t n = 1000;
    std::uint64_t N = 1000;
    std::uint64_t K = 100;
    std::uint64_t master_seed = 1;
    std::size_t exact_cap = 5000;
    double entropic_eps_factor = 0.005;
    unsigned entropic_max_iter = 2000;
    unsigned threads = 0;
};

struct ScalingReport {
    std::vector<std::uint64_t> p_values;
    std::vector<double> dhat;        // mean over K per p
    std::vector<double> dhat_stderr;
    double slope_tail = 0.0;             // indices [70, 99] 1-based when available
    std::size_t tail_from = 0, tail_to = 0; // 0-based inclusive window actually used
    double slope_far_tail = 0.0;         // indices [90, 99] 1-based when available
    std::size_t far_from = 0, far_to = 0;
    std::uint64_t n = 0, N = 0, K = 0, master_seed = 0;
};

ScalingReport run_dimension_scaling(const ScalingConfig& config);

/// OLS slope of log(ys) on log(xs) over the 0-based inclusive window.
double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys,
                        std::size_t from, std::size_t to);

/// Order-in-n checks for the inverse-gamma dominating functions:
/// E[(mle - theta0)^4] should scale like n^{-2} and E[(M(mle; X))^2] like n^2.
struct OrderCheckReport {
    std::vector<std::uint64_t> n_values;
    std::vector<double> fourth_moment; // E[(mle - theta0)^4]
    std::vector<double> m_square;      // E[(M(mle; X))^2]
    double fourth_moment_slope = 0.0;  // target -2
    double m_square_slope = 0.0;       // target +2
};

OrderCheckReport rc4_order_check(FamilyTag variant, double alpha0, double beta0,
                                 const std::vector<std::uint64_t>& n_values,
                                 std::uint64_t mc_budget, std::uint64_t master_seed,
                                 unsigned threads = 0);

// ---- serialization -------------------------------------------------------

/// CSV columns: n, dhat_mean, dhat_stderr, bound, gap (full precision).
void write_report_csv(const ExperimentReport& report, const std::string& path);
void write_report_json(const ExperimentReport& report, const std::string& path);

/// CSV columns: p, dhat_mean, dhat_stderr.
void write_scaling_csv(const ScalingReport& report, const std::string& path);
void write_scaling_json(const ScalingReport& report, const std::string& path);

void write_order_check_csv(const OrderCheckReport& report, const std::string& path);
void write_order_check_json(const OrderCheckReport& report, const std::string& path);

} // namespace wmle
