#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wmle/families.hpp"
#include "wmle/linalg.hpp"
#include "wmle/rng.hpp"

namespace wmle {

enum class Metric { W1, W2, Wp, BoundedW, Kolmogorov };

std::string metric_name(Metric m);

struct BoundTerm {
    std::string label;
    double value = 0.0;
    double std_error = 0.0; // 0 for analytic terms
};

/// Per-term decomposition of a distance bound; total is the exact sum of the
/// term values and is monotone non-increasing in n for every closed form.
struct BoundBreakdown {
    Metric metric = Metric::W1;
    double order = 1.0; // Wasserstein order p
    std::vector<BoundTerm> terms;
    double total = 0.0;
    std::uint64_t n = 0;
    std::string family;
    bool constant_incomplete = false; // K_{1,p} carries an unspecified C_p for p > 2

    void push(std::string label, double value, double std_error = 0.0);
};

// ---- closed-form family bounds ---------------------------------------------

/// Exp(theta) canonical, 1-Wasserstein:
/// 5.41456/sqrt(n) + sqrt(n)(n+2)/((n-1)(n-2)) + 2/n^{3/2}, n > 2.
BoundBreakdown bound_exp_canonical_w1(std::uint64_t n);

/// Exp(theta) canonical, 2-Wasserstein, n > 4.
BoundBreakdown bound_exp_canonical_w2(std::uint64_t n);

/// Exp(1/theta) non-canonical, 1-Wasserstein:
/// 10.41456/sqrt(n) + 4n^{3/2}(n+6)/((n-1)(n-2)(n-3)) + 6/n^{3/2}, n > 3.
BoundBreakdown bound_exp_noncanonical_w1(std::uint64_t n);

/// Direct sum-of-i.i.d. bound for the non-canonical exponential: 4.41456/sqrt(n).
double bound_exp_direct_stein(std::uint64_t n);

/// N(mu, sigma^2) under natural parameters (eta1, eta2), 1-Wasserstein, n > 9.
BoundBreakdown bound_normal_canonical_w1(double eta1, double eta2, std::uint64_t n);

/// MVN with diagonal covariance: d_W <= d_W2 < 56 sqrt(p/n); parameter-free.
double bound_mvn_diag_w2(std::uint64_t p, std::uint64_t n);

/// MVN with general covariance, 1-Wasserstein:
/// (p^4 sigma*^2 ||I^{1/2}||_max + 15.1 p^{13/4}(p+3)^{13/4} sigma*^4 ||I^{1/2}||_max^2)/sqrt(n).
BoundBreakdown bound_mvn_general_w1(std::uint64_t p, std::uint64_t n, double sigma_star_sq,
                                    double root_info_max_norm);

// ---- generic Monte-Carlo assemblers ----------------------------------------

/// General multi-parameter 1-Wasserstein bound (K1 + K2 + K3)/sqrt(n), with
/// every expectation Monte-Carlo estimated (batch-means standard errors,
/// 20 batches). d = 1 uses the single-parameter CLT constant 2 + E|xi|^3;
/// d >= 2 uses 14 d^{5/4} max_j sqrt(E[xi_j^4]). The K3 vertex sum enumerates
/// all 2^d sign patterns (capped at d <= 12), reusing one simulation batch
/// across vertices.
BoundBreakdown bound_general_w1(const GeneralFamilyHooks& hooks,
                                const std::vector<double>& theta0, std::uint64_t n,
                                std::uint64_t mc_budget, RandomStream& stream);

/// p-Wasserstein analogue (p >= 2). C_p multiplies the K_{1,p} term only; the
/// p = 2 path uses the explicit K1 constant and ignores C_p.
BoundBreakdown bound_general_wp(const GeneralFamilyHooks& hooks,
                                const std::vector<double>& theta0, std::uint64_t n, double p,
                                double c_p, std::uint64_t mc_budget, RandomStream& stream);

/// Single-parameter bound with four labelled terms: the CLT term
/// 2 + E|score|^3 / i^{3/2}, the Hessian-variance term, and the two
/// dominating-function expectations. Analytic moments supplied by the hooks
/// are used verbatim (zero standard error); anything missing is Monte-Carlo
/// estimated. Exponential-family hooks with k'' = 0 zero the variance term
/// exactly.
BoundBreakdown bound_single_param_w1(const SingleParamHooks& hooks, double theta0,
                                     std::uint64_t n, std::uint64_t mc_budget,
                                     RandomStream& stream);

// ---- implicit-MLE bounded-Wasserstein bound ---------------------------------

/// d x d x d array of dominating constants M_kmi(theta0).
struct MConstants {
    std::size_t d = 0;
    std::vector<double> v; // row-major (k, m, i)

    explicit MConstants(std::size_t dim = 0) : d(dim), v(dim * dim * dim, 0.0) {}
    double operator()(std::size_t k, std::size_t m, std::size_t i) const {
        return v[(k * d + m) * d + i];
    }
    double& at(std::size_t k, std::size_t m, std::size_t i) { return v[(k * d + m) * d + i]; }
};

struct ImplicitBoundInputs {
    double epsilon = 0.0;      // neighbourhood half-width from (Con.1)
    double mse_estimate = 0.0; // E[sum_j Q_j^2]
    MConstants m_constants;
    SymMatrix v_tilde;      // I(theta0)^{-1/2}
    SymMatrix variance_terms; // Var(d^2/dtheta_k dtheta_i log f(X1|theta0))
    double k1 = 0.0;        // CLT constant of the W2 route
};

/// Four labelled terms: K1/sqrt(n), the sqrt(d)-weighted Hessian-variance
/// term, 2 MSE / eps^2, and the sqrt(n)/2 dominating-constant term.
BoundBreakdown bound_implicit_bw(const ImplicitBoundInputs& inputs, std::uint64_t n,
                                 std::size_t d);

/// Gamma(alpha, beta): M111 = |psi_2(alpha-eps)|, M222 = 2(alpha+eps)/(beta-eps)^3,
/// M122 = M212 = M221 = 1/(beta-eps)^2, M112 = M121 = M211 = 0.
/// Requires eps < min(alpha, beta).
MConstants gamma_M_constants(double alpha, double beta, double eps);

/// Beta(alpha, beta): M111 = |psi_2(a+b-2e)| + |psi_2(a-e)|,
/// M222 = |psi_2(a+b-2e)| + |psi_2(b-e)|, mixed entries |psi_2(a+b-2e)|.
MConstants beta_M_constants(double alpha, double beta, double eps);

/// Scans a 200-point log grid on [1e-3, eps_max) and returns the breakdown
/// with the smallest total.
BoundBreakdown minimize_over_epsilon(const std::function<BoundBreakdown(double)>& bound_at,
                                     double eps_max);

// ---- metric conversions ------------------------------------------------------

double kolmogorov_from_w1(double dw);                       // (2/pi)^{1/4} sqrt(dw)
double kolmogorov_from_w1_multi(double dw, std::uint64_t d); // sqrt(2(sqrt(2 log d)+2)) sqrt(dw)
double kolmogorov_from_bw(double dbw);                      // (1 + 1/(2 sqrt(2 pi))) sqrt(dbw)

// ---- canonical-normal second-moment bound table ------------------------------

/// The 13 displayed moment bounds for the canonical-normal MLE, n > 9,
/// labelled by their moment.
std::vector<std::pair<std::string, double>> normal_canonical_moment_bounds(double eta1, double eta2,
                                                                  std::uint64_t n);

} // namespace wmle
