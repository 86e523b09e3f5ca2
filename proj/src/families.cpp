#include "wmle/families.hpp"

#include <cmath>
#include <numeric>

#include "wmle/specialfn.hpp"

namespace wmle {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw domain_error(what);
}

double mean_of(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s / static_cast<double>(n);
}

// Constant Hessian of the canonical-normal log-density; fisher_info negates
// these same expressions so that centered Hessian sums vanish exactly.
SymMatrix normal_canonical_hessian(double eta1, double eta2) {
    SymMatrix h(2);
    h.at(0, 0) = -(1.0 / (2.0 * eta1 * eta1) + eta2 * eta2 / (2.0 * eta1 * eta1 * eta1));
    h.at(0, 1) = eta2 / (2.0 * eta1 * eta1);
    h.at(1, 1) = -1.0 / (2.0 * eta1);
    return h;
}

// Row-major lower-triangle pair list: (0,0),(1,0),(1,1),(2,0),...
std::vector<std::pair<std::size_t, std::size_t>> vech_pairs(std::size_t p) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(p * (p + 1) / 2);
    for (std::size_t k = 0; k < p; ++k)
        for (std::size_t l = 0; l <= k; ++l) pairs.emplace_back(k, l);
    return pairs;
}

SymMatrix sym_inverse(const SymMatrix& m) {
    const SymMatrix root = inv_sqrt_psd(m);
    const Matrix r = root.to_dense();
    return SymMatrix::from_dense(r * r);
}

} // namespace

std::string family_name(FamilyTag tag) {
    switch (tag) {
        case FamilyTag::ExpCanonical: return "exp-canonical";
        case FamilyTag::ExpNonCanonical: return "exp-noncanonical";
        case FamilyTag::NormalCanonical: return "normal-canonical";
        case FamilyTag::MvnDiagonal: return "mvn-diag";
        case FamilyTag::MvnGeneral: return "mvn-general";
        case FamilyTag::InvGammaRateUnknown: return "invgamma-rate";
        case FamilyTag::InvGammaShapeUnknown: return "invgamma-shape";
    }
    return "unknown";
}

FamilyModel FamilyModel::exp_canonical(double rate) {
    require(rate > 0.0, "exp_canonical: rate must be positive");
    FamilyModel f;
    f.tag = FamilyTag::ExpCanonical;
    f.theta0 = {rate};
    return f;
}

FamilyModel FamilyModel::exp_noncanonical(double mean) {
    require(mean > 0.0, "exp_noncanonical: mean must be positive");
    FamilyModel f;
    f.tag = FamilyTag::ExpNonCanonical;
    f.theta0 = {mean};
    return f;
}

FamilyModel FamilyModel::normal_canonical(double eta1, double eta2) {
    require(eta1 > 0.0, "normal_canonical: eta1 must be positive");
    FamilyModel f;
    f.tag = FamilyTag::NormalCanonical;
    f.theta0 = {eta1, eta2};
    f.param_dim = 2;
    return f;
}

FamilyModel FamilyModel::mvn_diagonal(std::vector<double> mu, std::vector<double> sigma2) {
    require(!mu.empty() && mu.size() == sigma2.size(),
            "mvn_diagonal: mu and sigma2 must have equal positive length");
    for (double s : sigma2) require(s > 0.0, "mvn_diagonal: variances must be positive");
    FamilyModel f;
    f.tag = FamilyTag::MvnDiagonal;
    f.obs_dim = mu.size();
    f.param_dim = 2 * mu.size();
    f.mvn_p_ = mu.size();
    f.theta0 = std::move(mu);
    f.theta0.insert(f.theta0.end(), sigma2.begin(), sigma2.end());
    return f;
}

FamilyModel FamilyModel::mvn_general(std::vector<double> mu, SymMatrix sigma) {
    require(!mu.empty() && mu.size() == sigma.dim(), "mvn_general: dimension mismatch");
    cholesky(sigma); // PSD gate
    FamilyModel f;
    f.tag = FamilyTag::MvnGeneral;
    const std::size_t p = mu.size();
    f.obs_dim = p;
    f.param_dim = p + p * (p + 1) / 2;
    f.mvn_p_ = p;
    f.theta0 = std::move(mu);
    for (auto [k, l] : vech_pairs(p)) f.theta0.push_back(sigma(k, l));
    return f;
}

FamilyModel FamilyModel::inv_gamma_rate_unknown(double alpha0, double beta0) {
    require(alpha0 > 0.0 && beta0 > 0.0, "inv_gamma: parameters must be positive");
    FamilyModel f;
    f.tag = FamilyTag::InvGammaRateUnknown;
    f.theta0 = {alpha0, beta0};
    return f;
}

FamilyModel FamilyModel::inv_gamma_shape_unknown(double alpha0, double beta0) {
    require(alpha0 > 0.0 && beta0 > 0.0, "inv_gamma: parameters must be positive");
    FamilyModel f;
    f.tag = FamilyTag::InvGammaShapeUnknown;
    f.theta0 = {alpha0, beta0};
    return f;
}

SymMatrix FamilyModel::mvn_sigma() const {
    if (tag != FamilyTag::MvnGeneral) throw contract_error("mvn_sigma: not an MvnGeneral model");
    SymMatrix s(mvn_p_);
    std::size_t m = mvn_p_;
    for (auto [k, l] : vech_pairs(mvn_p_)) s.at(k, l) = theta0[m++];
    return s;
}

SampleMatrix sample_data(const FamilyModel& family, std::size_t n, RandomStream& stream) {
    SampleMatrix s(n, family.obs_dim);
    switch (family.tag) {
        case FamilyTag::ExpCanonical: {
            const double rate = family.theta0[0];
            for (std::size_t i = 0; i < n; ++i) s.values[i] = sample_gamma_one(stream, 1.0, rate);
            break;
        }
        case FamilyTag::ExpNonCanonical: {
            const double rate = 1.0 / family.theta0[0];
            for (std::size_t i = 0; i < n; ++i) s.values[i] = sample_gamma_one(stream, 1.0, rate);
            break;
        }
        case FamilyTag::NormalCanonical: {
            const double eta1 = family.theta0[0], eta2 = family.theta0[1];
            const double mu = eta2 / (2.0 * eta1);
            const double sd = std::sqrt(1.0 / (2.0 * eta1));
            for (std::size_t i = 0; i < n; ++i) s.values[i] = mu + sd * stream.next_normal();
            break;
        }
        case FamilyTag::MvnDiagonal: {
            const std::size_t p = family.obs_dim;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < p; ++j)
                    s(i, j) = family.theta0[j] +
                              std::sqrt(family.theta0[p + j]) * stream.next_normal();
            break;
        }
        case FamilyTag::MvnGeneral: {
            const std::size_t p = family.obs_dim;
            const Matrix chol = cholesky(family.mvn_sigma());
            std::vector<double> z(p);
            for (std::size_t i = 0; i < n; ++i) {
                for (auto& v : z) v = stream.next_normal();
                for (std::size_t r = 0; r < p; ++r) {
                    double acc = family.theta0[r];
                    for (std::size_t c = 0; c <= r; ++c) acc += chol(r, c) * z[c];
                    s(i, r) = acc;
                }
            }
            break;
        }
        case FamilyTag::InvGammaRateUnknown:
        case FamilyTag::InvGammaShapeUnknown: {
            const double a = family.theta0[0], b = family.theta0[1];
            for (std::size_t i = 0; i < n; ++i)
                s.values[i] = 1.0 / sample_gamma_one(stream, a, b);
            break;
        }
    }
    return s;
}

std::vector<double> mle_estimate(const FamilyModel& family, const SampleMatrix& sample) {
    if (sample.t != family.obs_dim)
        throw contract_error("mle_estimate: sample dimension does not match family");
    const std::size_t n = sample.n;
    if (n == 0) throw contract_error("mle_estimate: empty sample");

    switch (family.tag) {
        case FamilyTag::ExpCanonical: {
            for (std::size_t i = 0; i < n; ++i)
                if (!(sample.values[i] > 0.0))
                    throw support_error("exp_canonical: observations must be positive");
            return {1.0 / mean_of(sample.values.data(), n)};
        }
        case FamilyTag::ExpNonCanonical: {
            for (std::size_t i = 0; i < n; ++i)
                if (!(sample.values[i] > 0.0))
                    throw support_error("exp_noncanonical: observations must be positive");
            return {mean_of(sample.values.data(), n)};
        }
        case FamilyTag::NormalCanonical: {
            if (n < 2) throw degenerate_data_error("normal_canonical: needs n >= 2");
            const double xbar = mean_of(sample.values.data(), n);
            double ss = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = sample.values[i] - xbar;
                ss += d * d;
            }
            if (!(ss > 0.0))
                throw degenerate_data_error("normal_canonical: constant sample has no MLE");
            const double scale = static_cast<double>(n) / ss;
            return {0.5 * scale, xbar * scale};
        }
        case FamilyTag::MvnDiagonal: {
            if (n < 2) throw degenerate_data_error("mvn_diagonal: needs n >= 2");
            const std::size_t p = family.obs_dim;
            std::vector<double> est(2 * p);
            for (std::size_t j = 0; j < p; ++j) {
                double m = 0.0;
                for (std::size_t i = 0; i < n; ++i) m += sample(i, j);
                m /= static_cast<double>(n);
                double ss = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = sample(i, j) - m;
                    ss += d * d;
                }
                if (!(ss > 0.0))
                    throw degenerate_data_error("mvn_diagonal: constant coordinate has no MLE");
                est[j] = m;
                est[p + j] = ss / static_cast<double>(n);
            }
            return est;
        }
        case FamilyTag::MvnGeneral: {
            if (n < 2) throw degenerate_data_error("mvn_general: needs n >= 2");
            const std::size_t p = family.obs_dim;
            std::vector<double> mu(p, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < p; ++j) mu[j] += sample(i, j);
            for (auto& v : mu) v /= static_cast<double>(n);

            std::vector<double> est = mu;
            for (auto [k, l] : vech_pairs(p)) {
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    acc += (sample(i, k) - mu[k]) * (sample(i, l) - mu[l]);
                est.push_back(acc / static_cast<double>(n));
            }
            return est;
        }
        case FamilyTag::InvGammaRateUnknown: {
            double inv_sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!(sample.values[i] > 0.0))
                    throw support_error("inv_gamma: observations must be positive");
                inv_sum += 1.0 / sample.values[i];
            }
            return {static_cast<double>(n) * family.theta0[0] / inv_sum};
        }
        case FamilyTag::InvGammaShapeUnknown: {
            // score n log(beta0) - n psi(alpha) - sum log x = 0
            double log_sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!(sample.values[i] > 0.0))
                    throw support_error("inv_gamma: observations must be positive");
                log_sum += std::log(family.theta0[1] / sample.values[i]);
            }
            return {inv_digamma(log_sum / static_cast<double>(n))};
        }
    }
    throw contract_error("mle_estimate: unknown family");
}

SymMatrix fisher_info(const FamilyModel& family) {
    switch (family.tag) {
        case FamilyTag::ExpCanonical:
        case FamilyTag::ExpNonCanonical: {
            const double t = family.theta0[0];
            SymMatrix i(1);
            i.at(0, 0) = 1.0 / (t * t);
            return i;
        }
        case FamilyTag::NormalCanonical: {
            const SymMatrix h = normal_canonical_hessian(family.theta0[0], family.theta0[1]);
            SymMatrix i(2);
            for (std::size_t r = 0; r < 2; ++r)
                for (std::size_t c = r; c < 2; ++c) i.at(r, c) = -h(r, c);
            return i;
        }
        case FamilyTag::MvnDiagonal: {
            const std::size_t p = family.obs_dim;
            SymMatrix i(2 * p);
            for (std::size_t j = 0; j < p; ++j) {
                const double s2 = family.theta0[p + j];
                i.at(j, j) = 1.0 / s2;
                i.at(p + j, p + j) = 1.0 / (2.0 * s2 * s2);
            }
            return i;
        }
        case FamilyTag::MvnGeneral: {
            const std::size_t p = family.obs_dim;
            const SymMatrix a = sym_inverse(family.mvn_sigma());
            const auto pairs = vech_pairs(p);
            SymMatrix info(family.param_dim);
            for (std::size_t r = 0; r < p; ++r)
                for (std::size_t c = r; c < p; ++c) info.at(r, c) = a(r, c);
            // covariance block: c_m c_m' (A_ik A_jl + A_il A_jk) / 4
            for (std::size_t m = 0; m < pairs.size(); ++m) {
                const auto [i, j] = pairs[m];
                const double cm = (i == j) ? 1.0 : 2.0;
                for (std::size_t m2 = m; m2 < pairs.size(); ++m2) {
                    const auto [k, l] = pairs[m2];
                    const double cm2 = (k == l) ? 1.0 : 2.0;
                    info.at(p + m, p + m2) =
                        0.25 * cm * cm2 * (a(i, k) * a(j, l) + a(i, l) * a(j, k));
                }
            }
            return info;
        }
        case FamilyTag::InvGammaRateUnknown: {
            SymMatrix i(1);
            i.at(0, 0) = family.theta0[0] / (family.theta0[1] * family.theta0[1]);
            return i;
        }
        case FamilyTag::InvGammaShapeUnknown: {
            SymMatrix i(1);
            i.at(0, 0) = polygamma(1, family.theta0[0]);
            return i;
        }
    }
    throw contract_error("fisher_info: unknown family");
}

namespace {

std::vector<double> true_params(const FamilyModel& family) {
    switch (family.tag) {
        case FamilyTag::InvGammaRateUnknown: return {family.theta0[1]};
        case FamilyTag::InvGammaShapeUnknown: return {family.theta0[0]};
        default: return family.theta0;
    }
}

std::vector<double> standardize_with_root(const FamilyModel& family, const SampleMatrix& sample,
                                          const SymMatrix& info_root) {
    const std::vector<double> est = mle_estimate(family, sample);
    const std::vector<double> truth = true_params(family);
    std::vector<double> diff(est.size());
    for (std::size_t i = 0; i < est.size(); ++i) diff[i] = est[i] - truth[i];
    std::vector<double> w = info_root * diff;
    const double root_n = std::sqrt(static_cast<double>(sample.n));
    for (auto& v : w) v *= root_n;
    return w;
}

} // namespace

std::vector<double> standardize(const FamilyModel& family, const SampleMatrix& sample) {
    return standardize_with_root(family, sample, sqrt_psd(fisher_info(family)));
}

StandardizedSample simulate_W(const FamilyModel& family, std::size_t n, std::size_t N,
                              RandomStream& stream) {
    const SymMatrix info_root = sqrt_psd(fisher_info(family));
    StandardizedSample out;
    out.N = N;
    out.d = family.param_dim;
    out.rows.resize(N * family.param_dim);

    const std::size_t attempt_cap = 100 * N;
    std::size_t attempts = 0;
    for (std::size_t r = 0; r < N; ++r) {
        for (;;) {
            if (attempts++ >= attempt_cap)
                throw degenerate_data_error("simulate_W: resample cap of 100*N reached");
            const SampleMatrix data = sample_data(family, n, stream);
            try {
                const std::vector<double> w = standardize_with_root(family, data, info_root);
                std::copy(w.begin(), w.end(), out.rows.begin() + r * family.param_dim);
                break;
            } catch (const degenerate_data_error&) {
                // astronomically rare for continuous families; draw a fresh dataset
            }
        }
    }
    return out;
}

namespace {

std::vector<double> gradient_log_density(const FamilyModel& family,
                                         const std::vector<double>& theta, const double* x) {
    switch (family.tag) {
        case FamilyTag::ExpCanonical: {
            // the score extends continuously to the boundary x = 0
            if (!(x[0] >= 0.0)) throw support_error("score: observation outside support");
            return {1.0 / theta[0] - x[0]};
        }
        case FamilyTag::ExpNonCanonical: {
            if (!(x[0] >= 0.0)) throw support_error("score: observation outside support");
            const double t = theta[0];
            return {-1.0 / t + x[0] / (t * t)};
        }
        case FamilyTag::NormalCanonical: {
            const double e1 = theta[0], e2 = theta[1];
            return {1.0 / (2.0 * e1) + e2 * e2 / (4.0 * e1 * e1) - x[0] * x[0],
                    x[0] - e2 / (2.0 * e1)};
        }
        case FamilyTag::MvnDiagonal: {
            const std::size_t p = family.obs_dim;
            std::vector<double> g(2 * p);
            for (std::size_t j = 0; j < p; ++j) {
                const double s2 = theta[p + j];
                const double c = x[j] - theta[j];
                g[j] = c / s2;
                g[p + j] = -0.5 / s2 + c * c / (2.0 * s2 * s2);
            }
            return g;
        }
        case FamilyTag::MvnGeneral: {
            const std::size_t p = family.obs_dim;
            SymMatrix sigma(p);
            {
                std::size_t m = p;
                for (auto [k, l] : vech_pairs(p)) sigma.at(k, l) = theta[m++];
            }
            const SymMatrix a = sym_inverse(sigma);
            std::vector<double> u(p);
            for (std::size_t j = 0; j < p; ++j) u[j] = x[j] - theta[j];
            const std::vector<double> au = a * u;
            std::vector<double> g(au);
            for (auto [k, l] : vech_pairs(p)) {
                const double gkl = 0.5 * (au[k] * au[l] - a(k, l));
                g.push_back(k == l ? gkl : 2.0 * gkl);
            }
            return g;
        }
        case FamilyTag::InvGammaRateUnknown: {
            if (!(x[0] > 0.0)) throw support_error("score: observation outside support");
            return {family.theta0[0] / theta[0] - 1.0 / x[0]};
        }
        case FamilyTag::InvGammaShapeUnknown: {
            if (!(x[0] > 0.0)) throw support_error("score: observation outside support");
            return {std::log(family.theta0[1]) - digamma(theta[0]) - std::log(x[0])};
        }
    }
    throw contract_error("gradient_log_density: unknown family");
}

} // namespace

std::vector<double> score_transform(const FamilyModel& family,
                                    const std::vector<double>& observation) {
    if (observation.size() != family.obs_dim)
        throw contract_error("score_transform: observation dimension mismatch");
    const SymMatrix v_tilde = inv_sqrt_psd(fisher_info(family));
    const std::vector<double> g =
        gradient_log_density(family, true_params(family), observation.data());
    return v_tilde * g;
}

GeneralFamilyHooks hooks_for(const FamilyModel& family) {
    GeneralFamilyHooks h;
    h.dim = family.param_dim;
    h.obs_dim = family.obs_dim;
    h.fisher = fisher_info(family);
    h.mle = [family](const SampleMatrix& s) { return mle_estimate(family, s); };
    h.grad_log_density = [family](const std::vector<double>& theta, const double* x) {
        return gradient_log_density(family, theta, x);
    };

    const FamilyModel f = family;
    h.sample_obs = [f](RandomStream& stream, double* out) {
        const SampleMatrix one = sample_data(f, 1, stream);
        std::copy(one.values.begin(), one.values.end(), out);
    };

    switch (family.tag) {
        case FamilyTag::ExpCanonical: {
            h.hessian_log_density = [](const std::vector<double>& theta, const double*) {
                SymMatrix m(1);
                m.at(0, 0) = -1.0 / (theta[0] * theta[0]);
                return m;
            };
            h.dominating_M = [](std::size_t, std::size_t, std::size_t,
                                const std::vector<double>& theta, const SampleMatrix& data) {
                const double t = theta[0];
                return 2.0 * static_cast<double>(data.n) / (t * t * t);
            };
            break;
        }
        case FamilyTag::ExpNonCanonical: {
            h.hessian_log_density = [](const std::vector<double>& theta, const double* x) {
                const double t = theta[0];
                SymMatrix m(1);
                m.at(0, 0) = 1.0 / (t * t) - 2.0 * x[0] / (t * t * t);
                return m;
            };
            h.dominating_M = [](std::size_t, std::size_t, std::size_t,
                                const std::vector<double>& theta, const SampleMatrix& data) {
                const double t = theta[0];
                const double xbar = mean_of(data.values.data(), data.n);
                return 2.0 * static_cast<double>(data.n) / (t * t * t) *
                       std::abs(1.0 + 3.0 * xbar / t);
            };
            break;
        }
        case FamilyTag::NormalCanonical: {
            h.hessian_log_density = [](const std::vector<double>& theta, const double*) {
                return normal_canonical_hessian(theta[0], theta[1]);
            };
            h.dominating_M = [](std::size_t q, std::size_t l, std::size_t j,
                                const std::vector<double>& theta, const SampleMatrix& data) {
                const double n = static_cast<double>(data.n);
                const double e1 = theta[0], e2 = theta[1];
                const int ones = static_cast<int>(q == 0) + static_cast<int>(l == 0) +
                                 static_cast<int>(j == 0);
                switch (ones) {
                    case 3:
                        return n * (1.0 / (e1 * e1 * e1) +
                                    1.5 * e2 * e2 / (e1 * e1 * e1 * e1));
                    case 2: return n * std::abs(e2) / (e1 * e1 * e1);
                    case 1: return n / (2.0 * e1 * e1);
                    default: return 0.0;
                }
            };
            break;
        }
        case FamilyTag::InvGammaRateUnknown: {
            const double alpha0 = family.theta0[0];
            h.hessian_log_density = [alpha0](const std::vector<double>& theta, const double*) {
                SymMatrix m(1);
                m.at(0, 0) = -alpha0 / (theta[0] * theta[0]);
                return m;
            };
            h.dominating_M = [alpha0](std::size_t, std::size_t, std::size_t,
                                      const std::vector<double>& theta,
                                      const SampleMatrix& data) {
                const double b = theta[0];
                return 2.0 * static_cast<double>(data.n) * alpha0 / (b * b * b);
            };
            break;
        }
        case FamilyTag::InvGammaShapeUnknown: {
            h.hessian_log_density = [](const std::vector<double>& theta, const double*) {
                SymMatrix m(1);
                m.at(0, 0) = -polygamma(1, theta[0]);
                return m;
            };
            h.dominating_M = [](std::size_t, std::size_t, std::size_t,
                                const std::vector<double>& theta, const SampleMatrix& data) {
                return static_cast<double>(data.n) * std::abs(polygamma(2, theta[0]));
            };
            break;
        }
        default:
            throw contract_error(
                "hooks_for: no generic hooks registered for this family; the MVN families use "
                "their dedicated closed-form bounds");
    }
    return h;
}

SingleParamHooks single_param_hooks_exp_canonical(double rate) {
    const FamilyModel family = FamilyModel::exp_canonical(rate);
    SingleParamHooks h;
    h.base = hooks_for(family);
    h.expfam = SingleParamHooks::ExpFamilyStructure{1.0, 0.0, 1.0 / (rate * rate)};
    h.e_abs_score3 = exp_abs_third_central(rate);
    h.var_second_derivative = 0.0;
    h.e_q2 = [rate](std::uint64_t n) {
        if (n <= 2) throw domain_error("exp_canonical moments: require n > 2");
        const double nn = static_cast<double>(n);
        return rate * rate * (nn + 2.0) / ((nn - 1.0) * (nn - 2.0));
    };
    h.e_q2_M_theta0 = [rate](std::uint64_t n) {
        if (n <= 2) throw domain_error("exp_canonical moments: require n > 2");
        const double nn = static_cast<double>(n);
        return 2.0 * nn * (nn + 2.0) / (rate * (nn - 1.0) * (nn - 2.0));
    };
    h.e_q2_M_mle = [rate](std::uint64_t n) {
        const double nn = static_cast<double>(n);
        return 2.0 * (nn + 2.0) / (nn * rate);
    };
    return h;
}

SingleParamHooks single_param_hooks_exp_noncanonical(double mean) {
    const FamilyModel family = FamilyModel::exp_noncanonical(mean);
    SingleParamHooks h;
    h.base = hooks_for(family);
    const double m2 = mean * mean;
    h.expfam = SingleParamHooks::ExpFamilyStructure{-1.0 / m2, 2.0 / (m2 * mean), m2};
    h.e_abs_score3 = (12.0 / std::exp(1.0) - 2.0) / (m2 * mean);
    h.var_second_derivative = 4.0 / (m2 * m2);
    h.e_q2 = [m2](std::uint64_t n) { return m2 / static_cast<double>(n); };
    h.e_q2_M_theta0 = [mean](std::uint64_t n) {
        const double nn = static_cast<double>(n);
        return 4.0 * (2.0 * nn + 3.0) / (nn * mean);
    };
    h.e_q2_M_mle = [mean](std::uint64_t n) {
        if (n <= 3) throw domain_error("exp_noncanonical moments: require n > 3");
        const double nn = static_cast<double>(n);
        return 8.0 * nn * nn * (nn + 6.0) / ((nn - 1.0) * (nn - 2.0) * (nn - 3.0) * mean);
    };
    return h;
}

} // namespace wmle
