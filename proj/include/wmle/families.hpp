#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wmle/linalg.hpp"
#include "wmle/rng.hpp"

namespace wmle {

enum class FamilyTag {
    ExpCanonical,        // rate theta0 > 0
    ExpNonCanonical,     // mean theta0 > 0
    NormalCanonical,     // natural parameters (eta1 > 0, eta2)
    MvnDiagonal,         // (mu_1..mu_p, sigma^2_1..sigma^2_p)
    MvnGeneral,          // (mu, vech Sigma) row-major lower triangle
    InvGammaRateUnknown, // (alpha0 fixed, beta0 unknown), d = 1
    InvGammaShapeUnknown // (alpha0 unknown, beta0 fixed), d = 1
};

std::string family_name(FamilyTag tag);

/// A statistical family plus its true parameter vector; drives sampling,
/// MLE computation, Fisher information and standardization.
struct FamilyModel {
    FamilyTag tag;
    std::vector<double> theta0; // per-tag layout, see constructors
    std::size_t obs_dim = 1;    // t
    std::size_t param_dim = 1;  // d of the standardized statistic

    static FamilyModel exp_canonical(double rate);
    static FamilyModel exp_noncanonical(double mean);
    static FamilyModel normal_canonical(double eta1, double eta2);
    static FamilyModel mvn_diagonal(std::vector<double> mu, std::vector<double> sigma2);
    static FamilyModel mvn_general(std::vector<double> mu, SymMatrix sigma);
    static FamilyModel inv_gamma_rate_unknown(double alpha0, double beta0);
    static FamilyModel inv_gamma_shape_unknown(double alpha0, double beta0);

    /// MvnGeneral only: the covariance as a matrix.
    SymMatrix mvn_sigma() const;
    std::size_t mvn_p() const { return mvn_p_; }

  private:
    std::size_t mvn_p_ = 0;
};

/// N replications of the standardized statistic W, row-major.
struct StandardizedSample {
    std::size_t N = 0;
    std::size_t d = 0;
    std::vector<double> rows;

    double operator()(std::size_t i, std::size_t j) const { return rows[i * d + j]; }
};

/// One dataset of n i.i.d. observations from the family at theta0.
SampleMatrix sample_data(const FamilyModel& family, std::size_t n, RandomStream& stream);

/// The family's unique MLE. NormalCanonical requires n >= 2 with non-constant
/// data; positive-support families reject non-positive observations.
std::vector<double> mle_estimate(const FamilyModel& family, const SampleMatrix& sample);

/// Per-observation expected Fisher information I(theta0).
SymMatrix fisher_info(const FamilyModel& family);

/// W = sqrt(n) * I(theta0)^{1/2} * (theta_hat - theta0).
std::vector<double> standardize(const FamilyModel& family, const SampleMatrix& sample);

/// N independent draws of W, each from a fresh n-observation dataset.
/// Degenerate datasets are resampled, capped at 100*N attempts.
StandardizedSample simulate_W(const FamilyModel& family, std::size_t n, std::size_t N,
                              RandomStream& stream);

/// Whitened score xi = I(theta0)^{-1/2} * grad log f(x | theta0); population
/// mean 0 and identity covariance.
std::vector<double> score_transform(const FamilyModel& family,
                                    const std::vector<double>& observation);

/// Callbacks feeding the generic bound assemblers. The
/// dominating function bounds the third derivatives of the full-dataset
/// log-likelihood and must be coordinate-wise monotone.
struct GeneralFamilyHooks {
    std::size_t dim = 1;     // d
    std::size_t obs_dim = 1; // t

    std::function<void(RandomStream&, double*)> sample_obs;
    std::function<std::vector<double>(const std::vector<double>&, const double*)>
        grad_log_density;
    std::function<SymMatrix(const std::vector<double>&, const double*)> hessian_log_density;
    /// M_qlj(theta; dataset), dataset-level (already carries the factor n).
    std::function<double(std::size_t, std::size_t, std::size_t, const std::vector<double>&,
                         const SampleMatrix&)>
        dominating_M;
    std::function<std::vector<double>(const SampleMatrix&)> mle;
    SymMatrix fisher;
};

/// Hooks for the built-in families.
GeneralFamilyHooks hooks_for(const FamilyModel& family);

/// Extra structure for the single-parameter assembler: optional analytic
/// moments (as functions of n where they depend on it) and optional
/// exponential-family structure that zeroes the Hessian-variance term in the
/// canonical case.
struct SingleParamHooks {
    GeneralFamilyHooks base;

    struct ExpFamilyStructure {
        double k_prime = 0.0;        // k'(theta0)
        double k_double_prime = 0.0; // k''(theta0); identically 0 <=> canonical
        double var_T = 0.0;          // Var(T(X_1))
    };
    std::optional<ExpFamilyStructure> expfam;

    std::optional<double> e_abs_score3;                 // E|d/dtheta log f(X1|theta0)|^3
    std::optional<double> var_second_derivative;        // Var(d^2/dtheta^2 log f(X1|theta0))
    std::optional<std::function<double(std::uint64_t)>> e_q2;            // E[(mle-theta0)^2]
    std::optional<std::function<double(std::uint64_t)>> e_q2_M_theta0;   // E|Q^2 M(theta0;X)|
    std::optional<std::function<double(std::uint64_t)>> e_q2_M_mle;      // E|Q^2 M(mle;X)|
};

/// Fully analytic single-parameter hooks for the worked exponential families.
SingleParamHooks single_param_hooks_exp_canonical(double rate);
SingleParamHooks single_param_hooks_exp_noncanonical(double mean);

} // namespace wmle
