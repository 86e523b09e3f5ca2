#include "wmle/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "wmle/specialfn.hpp"

namespace wmle {

namespace {

constexpr std::size_t kBatches = 20;

double nf(std::uint64_t n) { return static_cast<double>(n); }

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw evaluation_error(std::string("non-finite value from ") + what);
}

// Batch-means bookkeeping: full-sample means plus per-batch means of a fixed
// set of scalar moments.
class BatchTable {
  public:
    BatchTable(std::size_t items, std::size_t total_count)
        : items_(items),
          total_(total_count),
          batch_size_((total_count + kBatches - 1) / kBatches),
          global_(items, 0.0),
          batch_(items, 0.0) {}

    // contributions for one replicate; call item() for each tracked moment,
    // then commit().
    void add(std::size_t item, double value) { batch_[item] += value; }

    void commit() {
        ++in_batch_;
        ++seen_;
        if (in_batch_ == batch_size_ || seen_ == total_) {
            for (std::size_t i = 0; i < items_; ++i) global_[i] += batch_[i];
            batch_means_.emplace_back(batch_);
            for (auto& m : batch_means_.back()) m /= static_cast<double>(in_batch_);
            std::fill(batch_.begin(), batch_.end(), 0.0);
            in_batch_ = 0;
        }
    }

    double mean(std::size_t item) const { return global_[item] / static_cast<double>(seen_); }

    /// Point estimate f(full means) and batch-spread standard error of f.
    template <typename F>
    std::pair<double, double> estimate(F&& f) const {
        std::vector<double> means(items_);
        for (std::size_t i = 0; i < items_; ++i) means[i] = mean(i);
        const double point = f(means);

        const std::size_t b = batch_means_.size();
        if (b < 2) return {point, 0.0};
        std::vector<double> vals(b);
        for (std::size_t k = 0; k < b; ++k) vals[k] = f(batch_means_[k]);
        double m = 0.0;
        for (double v : vals) m += v;
        m /= static_cast<double>(b);
        double ss = 0.0;
        for (double v : vals) ss += (v - m) * (v - m);
        const double se = std::sqrt(ss / static_cast<double>(b - 1) / static_cast<double>(b));
        return {point, se};
    }

  private:
    std::size_t items_;
    std::size_t total_;
    std::size_t batch_size_;
    std::size_t in_batch_ = 0;
    std::size_t seen_ = 0;
    std::vector<double> global_;
    std::vector<double> batch_;
    std::vector<std::vector<double>> batch_means_;
};

std::size_t round_up_multiple(std::size_t x, std::size_t m) { return ((x + m - 1) / m) * m; }

// Single-observation pass: whitened-score moments per coordinate.
// items layout: [0, d) -> xi_j^4; [d, 2d) -> |xi_j|^3; [2d, 3d) -> |xi_j|^{p+2}
BatchTable xi_moment_pass(const GeneralFamilyHooks& hooks, const std::vector<double>& theta0,
                          const SymMatrix& v_tilde, std::uint64_t budget, double p,
                          RandomStream& stream) {
    const std::size_t d = hooks.dim;
    const std::size_t count = round_up_multiple(std::max<std::size_t>(budget, 200), kBatches);
    BatchTable table(3 * d, count);
    std::vector<double> obs(hooks.obs_dim);
    for (std::size_t i = 0; i < count; ++i) {
        hooks.sample_obs(stream, obs.data());
        const std::vector<double> g = hooks.grad_log_density(theta0, obs.data());
        if (g.size() != d) throw contract_error("grad_log_density: wrong dimension");
        const std::vector<double> xi = v_tilde * g;
        for (std::size_t j = 0; j < d; ++j) {
            check_finite(xi[j], "grad_log_density");
            const double a = std::abs(xi[j]);
            table.add(j, a * a * a * a);
            table.add(d + j, a * a * a);
            if (p > 0.0) table.add(2 * d + j, std::pow(a, p + 2.0));
        }
        table.commit();
    }
    return table;
}

struct DatasetMoments {
    BatchTable table;
    std::size_t d;
    std::size_t vertices;
    // items layout:
    //   [0, d)                      -> |Q_l|^{2p}           (p = 1 for W1)
    //   [d, d + d^2)                -> |T_lj|^{2p}
    //   [d + d^2, ... )             -> |Q_l Q_q M_qlj(v)|^p, index ((v*d + q)*d + l)*d + j
    std::size_t q_item(std::size_t l) const { return l; }
    std::size_t t_item(std::size_t l, std::size_t j) const { return d + l * d + j; }
    std::size_t m_item(std::size_t v, std::size_t q, std::size_t l, std::size_t j) const {
        return d + d * d + ((v * d + q) * d + l) * d + j;
    }
};

DatasetMoments dataset_moment_pass(const GeneralFamilyHooks& hooks,
                                   const std::vector<double>& theta0, std::uint64_t n,
                                   std::uint64_t mc_budget, double p, RandomStream& stream) {
    const std::size_t d = hooks.dim;
    if (d > 12) throw capacity_error("bound_general: 2^d vertex enumeration capped at d <= 12");
    const std::size_t vertices = std::size_t{1} << d;
    const std::size_t replicates = round_up_multiple(
        std::max<std::size_t>(kBatches * 2, (mc_budget + n - 1) / n), kBatches);

    DatasetMoments dm{BatchTable(d + d * d + vertices * d * d * d, replicates), d, vertices};

    SampleMatrix data(n, hooks.obs_dim);
    std::vector<double> theta_v(d);
    SymMatrix hess_sum(d);
    const SymMatrix& info = hooks.fisher;

    for (std::size_t r = 0; r < replicates; ++r) {
        for (std::size_t i = 0; i < n; ++i) hooks.sample_obs(stream, data.values.data() + i * hooks.obs_dim);
        const std::vector<double> est = hooks.mle(data);
        if (est.size() != d) throw contract_error("mle hook: wrong dimension");

        std::vector<double> q(d);
        for (std::size_t l = 0; l < d; ++l) {
            q[l] = est[l] - theta0[l];
            check_finite(q[l], "mle hook");
            dm.table.add(dm.q_item(l), std::pow(std::abs(q[l]), 2.0 * p));
        }

        // T_lj = sum_i hessian(theta0; x_i) + n I_lj
        hess_sum = SymMatrix(d);
        for (std::size_t i = 0; i < n; ++i) {
            const SymMatrix h = hooks.hessian_log_density(theta0, data.row(i));
            for (std::size_t l = 0; l < d; ++l)
                for (std::size_t j = l; j < d; ++j) hess_sum.at(l, j) += h(l, j);
        }
        for (std::size_t l = 0; l < d; ++l)
            for (std::size_t j = 0; j < d; ++j) {
                const double t = hess_sum(l, j) + nf(n) * info(l, j);
                check_finite(t, "hessian_log_density");
                dm.table.add(dm.t_item(l, j), std::pow(std::abs(t), 2.0 * p));
            }

        // vertex sweep over {mle_m, theta0_m}^d; one batch reused across vertices
        for (std::size_t v = 0; v < vertices; ++v) {
            for (std::size_t m = 0; m < d; ++m) theta_v[m] = (v >> m) & 1 ? est[m] : theta0[m];
            for (std::size_t qi = 0; qi < d; ++qi)
                for (std::size_t l = 0; l < d; ++l)
                    for (std::size_t j = 0; j < d; ++j) {
                        const double mqlj = hooks.dominating_M(qi, l, j, theta_v, data);
                        check_finite(mqlj, "dominating_M");
                        dm.table.add(dm.m_item(v, qi, l, j),
                                     std::pow(std::abs(q[l] * q[qi]) * mqlj, p));
                    }
        }
        dm.table.commit();
    }
    return dm;
}

} // namespace

void BoundBreakdown::push(std::string label, double value, double std_error) {
    terms.push_back({std::move(label), value, std_error});
    total += value;
}

std::string metric_name(Metric m) {
    switch (m) {
        case Metric::W1: return "W1";
        case Metric::W2: return "W2";
        case Metric::Wp: return "Wp";
        case Metric::BoundedW: return "bW";
        case Metric::Kolmogorov: return "Kolmogorov";
    }
    return "?";
}

BoundBreakdown bound_exp_canonical_w1(std::uint64_t n) {
    if (n <= 2) throw domain_error("bound_exp_canonical_w1: requires n > 2");
    const double x = nf(n);
    BoundBreakdown b;
    b.metric = Metric::W1;
    b.n = n;
    b.family = "exp-canonical";
    b.push("5.41456/sqrt(n)", 5.41456 / std::sqrt(x));
    b.push("sqrt(n)(n+2)/((n-1)(n-2))", std::sqrt(x) * (x + 2.0) / ((x - 1.0) * (x - 2.0)));
    b.push("2/n^(3/2)", 2.0 / (x * std::sqrt(x)));
    return b;
}

BoundBreakdown bound_exp_canonical_w2(std::uint64_t n) {
    if (n <= 4) throw domain_error("bound_exp_canonical_w2: requires n > 4");
    const double x = nf(n);
    BoundBreakdown b;
    b.metric = Metric::W2;
    b.order = 2.0;
    b.n = n;
    b.family = "exp-canonical";
    b.push("42/sqrt(n)", 42.0 / std::sqrt(x));
    const double ratio = (1144.0 * x * x * x * x + 2028.0 * x * x * x + 1576.0 * x * x +
                          480.0 * x) /
                         ((x - 1.0) * (x - 2.0) * (x - 3.0) * (x - 4.0));
    b.push("sqrt(poly(n))/(2 sqrt(n))", 0.5 / std::sqrt(x) * std::sqrt(ratio));
    return b;
}

BoundBreakdown bound_exp_noncanonical_w1(std::uint64_t n) {
    if (n <= 3) throw domain_error("bound_exp_noncanonical_w1: requires n > 3");
    const double x = nf(n);
    BoundBreakdown b;
    b.metric = Metric::W1;
    b.n = n;
    b.family = "exp-noncanonical";
    b.push("10.41456/sqrt(n)", 10.41456 / std::sqrt(x));
    b.push("4n^(3/2)(n+6)/((n-1)(n-2)(n-3))",
           4.0 * x * std::sqrt(x) * (x + 6.0) / ((x - 1.0) * (x - 2.0) * (x - 3.0)));
    b.push("6/n^(3/2)", 6.0 / (x * std::sqrt(x)));
    return b;
}

double bound_exp_direct_stein(std::uint64_t n) {
    if (n == 0) throw domain_error("bound_exp_direct_stein: requires n >= 1");
    return 4.41456 / std::sqrt(nf(n));
}

BoundBreakdown bound_normal_canonical_w1(double eta1, double eta2, std::uint64_t n) {
    if (!(eta1 > 0.0)) throw domain_error("bound_normal_canonical_w1: requires eta1 > 0");
    if (n <= 9) throw domain_error("bound_normal_canonical_w1: requires n > 9");
    const double x = nf(n);
    const double r = std::sqrt(eta1);
    const double alpha = eta1 * (1.0 + r) * (1.0 + r) + eta2 * eta2;
    const double e2sq = eta2 * eta2;

    const double inner = 15.0 * std::pow(1.0 + r, 4.0) * (eta1 + e2sq) * (eta1 + e2sq) +
                         3.0 * std::pow(eta2, 6.0) / eta1 * (10.0 + 3.0 * e2sq / eta1);
    const double clt = 189.0 / (alpha * std::sqrt(x)) * std::sqrt(inner);

    const double weights = 3.0 * eta1 + 4.0 * eta1 * eta1 + 3.0 * e2sq;
    const double bracket = 206.0 / r + 1286.0 / eta1 + 393.0 * std::abs(eta2) / eta1 +
                           1792.0 * e2sq / (eta1 * eta1);
    const double third = weights * bracket / std::sqrt(2.0 * alpha * x);

    BoundBreakdown b;
    b.metric = Metric::W1;
    b.n = n;
    b.family = "normal-canonical";
    b.push("189/(alpha sqrt(n)) * sqrt(...)", clt);
    b.push("(3e1+4e1^2+3e2^2)[...]/sqrt(2 alpha n)", third);
    return b;
}

double bound_mvn_diag_w2(std::uint64_t p, std::uint64_t n) {
    if (p == 0 || n == 0) throw domain_error("bound_mvn_diag_w2: requires p >= 1, n >= 1");
    return 56.0 * std::sqrt(nf(p) / nf(n));
}

BoundBreakdown bound_mvn_general_w1(std::uint64_t p, std::uint64_t n, double sigma_star_sq,
                                    double root_info_max_norm) {
    if (p == 0 || n == 0) throw domain_error("bound_mvn_general_w1: requires p >= 1, n >= 1");
    if (!(sigma_star_sq > 0.0) || !(root_info_max_norm > 0.0))
        throw domain_error("bound_mvn_general_w1: inputs must be positive");
    const double pd = nf(p);
    const double rn = std::sqrt(nf(n));
    BoundBreakdown b;
    b.metric = Metric::W1;
    b.n = n;
    b.family = "mvn-general";
    b.push("p^4 sigma*^2 ||I^(1/2)||max / sqrt(n)",
           std::pow(pd, 4.0) * sigma_star_sq * root_info_max_norm / rn);
    b.push("15.1 p^(13/4)(p+3)^(13/4) sigma*^4 ||I^(1/2)||max^2 / sqrt(n)",
           15.1 * std::pow(pd, 3.25) * std::pow(pd + 3.0, 3.25) * sigma_star_sq * sigma_star_sq *
               root_info_max_norm * root_info_max_norm / rn);
    return b;
}

namespace {

BoundBreakdown assemble_general(const GeneralFamilyHooks& hooks,
                                const std::vector<double>& theta0, std::uint64_t n, double p,
                                double c_p, std::uint64_t mc_budget, RandomStream& stream) {
    const std::size_t d = hooks.dim;
    if (theta0.size() != d) throw contract_error("bound_general: theta0 dimension mismatch");
    if (mc_budget < 1000) throw contract_error("bound_general: mc_budget must be >= 1000");
    const bool w1 = (p == 1.0);
    const double inv_root_n = 1.0 / std::sqrt(nf(n));

    const SymMatrix v_tilde = inv_sqrt_psd(hooks.fisher);

    // K1 from single-observation whitened-score moments
    BatchTable xi = xi_moment_pass(hooks, theta0, v_tilde, mc_budget, w1 ? 0.0 : p, stream);
    auto k1_of = [&](const std::vector<double>& m) {
        if (w1 && d == 1) return 2.0 + m[1]; // 2 + E|xi|^3
        double fourth = 0.0;
        for (std::size_t j = 0; j < d; ++j) fourth = std::max(fourth, m[j]);
        const double base = 14.0 * std::pow(nf(d), 1.25) * std::sqrt(fourth);
        if (w1 || p == 2.0) return base;
        double high = 0.0;
        for (std::size_t j = 0; j < d; ++j) high = std::max(high, m[2 * d + j]);
        return c_p * (std::pow(nf(d), 1.25) * std::sqrt(fourth) +
                      std::pow(nf(d), 0.5 + 1.0 / p) * std::pow(high, 1.0 / p));
    };
    auto [k1, k1_se] = xi.estimate(k1_of);

    // K2 and K3 from replicate datasets
    const double moment_power = w1 ? 1.0 : p;
    DatasetMoments dm = dataset_moment_pass(hooks, theta0, n, mc_budget, moment_power, stream);

    std::vector<double> col_weight(d, 0.0); // sum_k |V_kj| (or |V_kj|^p)
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < d; ++k)
            col_weight[j] += w1 ? std::abs(v_tilde(k, j)) : std::pow(std::abs(v_tilde(k, j)), p);

    auto k2_of = [&](const std::vector<double>& m) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double inner = 0.0;
            for (std::size_t l = 0; l < d; ++l)
                inner += std::sqrt(m[dm.q_item(l)]) * std::sqrt(m[dm.t_item(l, j)]);
            acc += col_weight[j] * inner;
        }
        if (w1) return acc;
        return std::pow(nf(d), 3.0 - 3.0 / p) * std::pow(acc, 1.0 / p);
    };
    auto k3_of = [&](const std::vector<double>& m) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double inner = 0.0;
            for (std::size_t l = 0; l < d; ++l)
                for (std::size_t q = 0; q < d; ++q)
                    for (std::size_t v = 0; v < dm.vertices; ++v)
                        inner += m[dm.m_item(v, q, l, j)];
            acc += col_weight[j] * inner;
        }
        if (w1) return 0.5 * acc;
        return 0.5 * std::pow(nf(d), 4.0 - 4.0 / p) * std::pow(acc, 1.0 / p);
    };
    auto [k2, k2_se] = dm.table.estimate(k2_of);
    auto [k3, k3_se] = dm.table.estimate(k3_of);

    BoundBreakdown b;
    b.metric = w1 ? Metric::W1 : (p == 2.0 ? Metric::W2 : Metric::Wp);
    b.order = p;
    b.n = n;
    b.constant_incomplete = (!w1 && p > 2.0);
    b.push(w1 ? "K1/sqrt(n)" : (p == 2.0 ? "K1/sqrt(n)" : "K1p/sqrt(n)"), k1 * inv_root_n,
           k1_se * inv_root_n);
    b.push(w1 ? "K2/sqrt(n)" : "K2p/sqrt(n)", k2 * inv_root_n, k2_se * inv_root_n);
    b.push(w1 ? "K3/sqrt(n)" : "K3p/sqrt(n)", k3 * inv_root_n, k3_se * inv_root_n);
    return b;
}

} // namespace

BoundBreakdown bound_general_w1(const GeneralFamilyHooks& hooks,
                                const std::vector<double>& theta0, std::uint64_t n,
                                std::uint64_t mc_budget, RandomStream& stream) {
    return assemble_general(hooks, theta0, n, 1.0, 1.0, mc_budget, stream);
}

BoundBreakdown bound_general_wp(const GeneralFamilyHooks& hooks,
                                const std::vector<double>& theta0, std::uint64_t n, double p,
                                double c_p, std::uint64_t mc_budget, RandomStream& stream) {
    if (!(p >= 2.0)) throw domain_error("bound_general_wp: requires p >= 2");
    if (!(c_p > 0.0) && !(c_p == 0.0)) throw domain_error("bound_general_wp: C_p must be >= 0");
    return assemble_general(hooks, theta0, n, p, c_p, mc_budget, stream);
}

BoundBreakdown bound_single_param_w1(const SingleParamHooks& hooks, double theta0,
                                     std::uint64_t n, std::uint64_t mc_budget,
                                     RandomStream& stream) {
    if (hooks.base.dim != 1) throw contract_error("bound_single_param_w1: requires d = 1");
    const double info = hooks.base.fisher(0, 0);
    const double root_i = std::sqrt(info);
    const double inv_root_n = 1.0 / std::sqrt(nf(n));
    const std::vector<double> theta{theta0};

    const bool canonical = hooks.expfam && hooks.expfam->k_double_prime == 0.0;

    // single-observation pass only when an analytic moment is missing
    double e_abs_score3 = 0.0, e_abs_score3_se = 0.0;
    double var_second = 0.0, var_second_se = 0.0;
    const bool need_singles =
        !hooks.e_abs_score3 || (!canonical && !hooks.var_second_derivative && !hooks.expfam);
    if (need_singles) {
        const std::size_t count =
            round_up_multiple(std::max<std::size_t>(mc_budget, 200), kBatches);
        BatchTable singles(3, count);
        std::vector<double> obs(hooks.base.obs_dim);
        for (std::size_t i = 0; i < count; ++i) {
            hooks.base.sample_obs(stream, obs.data());
            const double g = hooks.base.grad_log_density(theta, obs.data())[0];
            const double h = hooks.base.hessian_log_density(theta, obs.data())(0, 0);
            check_finite(g, "grad_log_density");
            check_finite(h, "hessian_log_density");
            const double a = std::abs(g);
            singles.add(0, a * a * a);
            singles.add(1, h);
            singles.add(2, h * h);
            singles.commit();
        }
        auto [m3, m3_se] = singles.estimate([](const std::vector<double>& m) { return m[0]; });
        e_abs_score3 = m3;
        e_abs_score3_se = m3_se;
        auto [v2, v2_se] = singles.estimate(
            [](const std::vector<double>& m) { return std::max(0.0, m[2] - m[1] * m[1]); });
        var_second = v2;
        var_second_se = v2_se;
    }
    if (hooks.e_abs_score3) {
        e_abs_score3 = *hooks.e_abs_score3;
        e_abs_score3_se = 0.0;
    }
    if (hooks.var_second_derivative) {
        var_second = *hooks.var_second_derivative;
        var_second_se = 0.0;
    } else if (hooks.expfam) {
        var_second = hooks.expfam->k_double_prime * hooks.expfam->k_double_prime *
                     hooks.expfam->var_T;
        var_second_se = 0.0;
    }

    // replicate-dataset pass for the Q-moments, unless all are analytic
    double e_q2 = 0.0, e_q2_se = 0.0;
    double e_m0 = 0.0, e_m0_se = 0.0;
    double e_m1 = 0.0, e_m1_se = 0.0;
    const bool need_datasets = !(hooks.e_q2 && hooks.e_q2_M_theta0 && hooks.e_q2_M_mle);
    if (need_datasets) {
        const std::size_t replicates = round_up_multiple(
            std::max<std::size_t>(kBatches * 2, (mc_budget + n - 1) / n), kBatches);
        BatchTable datasets(3, replicates);
        SampleMatrix data(n, hooks.base.obs_dim);
        for (std::size_t r = 0; r < replicates; ++r) {
            for (std::size_t i = 0; i < n; ++i)
                hooks.base.sample_obs(stream, data.values.data() + i * hooks.base.obs_dim);
            const double est = hooks.base.mle(data)[0];
            check_finite(est, "mle hook");
            const double q2 = (est - theta0) * (est - theta0);
            datasets.add(0, q2);
            datasets.add(1, q2 * hooks.base.dominating_M(0, 0, 0, theta, data));
            datasets.add(2, q2 * hooks.base.dominating_M(0, 0, 0, {est}, data));
            datasets.commit();
        }
        auto g0 = datasets.estimate([](const std::vector<double>& m) { return m[0]; });
        auto g1 = datasets.estimate([](const std::vector<double>& m) { return m[1]; });
        auto g2 = datasets.estimate([](const std::vector<double>& m) { return m[2]; });
        e_q2 = g0.first;
        e_q2_se = g0.second;
        e_m0 = g1.first;
        e_m0_se = g1.second;
        e_m1 = g2.first;
        e_m1_se = g2.second;
    }
    if (hooks.e_q2) {
        e_q2 = (*hooks.e_q2)(n);
        e_q2_se = 0.0;
    }
    if (hooks.e_q2_M_theta0) {
        e_m0 = (*hooks.e_q2_M_theta0)(n);
        e_m0_se = 0.0;
    }
    if (hooks.e_q2_M_mle) {
        e_m1 = (*hooks.e_q2_M_mle)(n);
        e_m1_se = 0.0;
    }

    BoundBreakdown b;
    b.metric = Metric::W1;
    b.n = n;
    b.push("(2 + E|score|^3/i^(3/2))/sqrt(n)",
           (2.0 + e_abs_score3 / (info * root_i)) * inv_root_n,
           e_abs_score3_se / (info * root_i) * inv_root_n);

    if (canonical) {
        b.push("hessian-variance term", 0.0, 0.0);
    } else {
        const double t2 = std::sqrt(nf(n) * var_second) * std::sqrt(e_q2) / root_i;
        // first-order error propagation through the product of square roots
        double rel = 0.0;
        if (var_second > 0.0) rel += 0.5 * var_second_se / var_second;
        if (e_q2 > 0.0) rel += 0.5 * e_q2_se / e_q2;
        b.push("hessian-variance term", t2 * inv_root_n, t2 * rel * inv_root_n);
    }
    b.push("E|Q^2 M(theta0)|/(2 sqrt(i n))", e_m0 / (2.0 * root_i) * inv_root_n,
           e_m0_se / (2.0 * root_i) * inv_root_n);
    b.push("E|Q^2 M(mle)|/(2 sqrt(i n))", e_m1 / (2.0 * root_i) * inv_root_n,
           e_m1_se / (2.0 * root_i) * inv_root_n);
    return b;
}

BoundBreakdown bound_implicit_bw(const ImplicitBoundInputs& in, std::uint64_t n, std::size_t d) {
    if (!(in.epsilon > 0.0)) throw domain_error("bound_implicit_bw: epsilon must be positive");
    if (in.mse_estimate < 0.0) throw domain_error("bound_implicit_bw: MSE must be >= 0");
    if (in.v_tilde.dim() != d || in.m_constants.d != d || in.variance_terms.dim() != d)
        throw contract_error("bound_implicit_bw: dimension mismatch");
    if (!std::isfinite(in.k1) || !std::isfinite(in.mse_estimate))
        throw domain_error("bound_implicit_bw: inputs must be finite");
    for (double m : in.m_constants.v)
        if (!(m >= 0.0) || !std::isfinite(m))
            throw domain_error("bound_implicit_bw: M constants must be finite and >= 0");

    const double root_n = std::sqrt(nf(n));
    const double mse = in.mse_estimate;

    double var_term = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        double vsum = 0.0;
        for (std::size_t i = 0; i < d; ++i) vsum += in.variance_terms(k, i);
        double w = 0.0;
        for (std::size_t l = 0; l < d; ++l) w += std::abs(in.v_tilde(l, k));
        var_term += w * std::sqrt(vsum);
    }
    var_term *= std::sqrt(nf(d)) * std::sqrt(mse);

    double m_term = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        double msum = 0.0;
        for (std::size_t m = 0; m < d; ++m)
            for (std::size_t i = 0; i < d; ++i) msum += in.m_constants(k, m, i);
        double w = 0.0;
        for (std::size_t l = 0; l < d; ++l) w += std::abs(in.v_tilde(l, k));
        m_term += w * msum;
    }
    m_term *= 0.5 * root_n * mse;

    BoundBreakdown b;
    b.metric = Metric::BoundedW;
    b.n = n;
    b.push("K1/sqrt(n)", in.k1 / root_n);
    b.push("sqrt(d) sum |V| sqrt(sum Var) sqrt(MSE)", var_term);
    b.push("2 MSE/eps^2", 2.0 * mse / (in.epsilon * in.epsilon));
    b.push("sqrt(n)/2 sum |V| sum M * MSE", m_term);
    return b;
}

MConstants gamma_M_constants(double alpha, double beta, double eps) {
    if (!(eps > 0.0) || eps >= std::min(alpha, beta))
        throw domain_error("gamma_M_constants: requires 0 < eps < min(alpha, beta)");
    MConstants m(2);
    const double m111 = std::abs(polygamma(2, alpha - eps));
    const double m222 = 2.0 * (alpha + eps) / std::pow(beta - eps, 3.0);
    const double m122 = 1.0 / ((beta - eps) * (beta - eps));
    m.at(0, 0, 0) = m111;
    m.at(1, 1, 1) = m222;
    // one alpha index, two beta indices -> m122; two alpha, one beta -> 0
    for (auto [a, b, c] : {std::array<std::size_t, 3>{0, 1, 1}, std::array<std::size_t, 3>{1, 0, 1},
                           std::array<std::size_t, 3>{1, 1, 0}})
        m.at(a, b, c) = m122;
    return m;
}

MConstants beta_M_constants(double alpha, double beta, double eps) {
    if (!(eps > 0.0) || eps >= std::min(alpha, beta))
        throw domain_error("beta_M_constants: requires 0 < eps < min(alpha, beta)");
    MConstants m(2);
    const double shared = std::abs(polygamma(2, alpha + beta - 2.0 * eps));
    m.at(0, 0, 0) = shared + std::abs(polygamma(2, alpha - eps));
    m.at(1, 1, 1) = shared + std::abs(polygamma(2, beta - eps));
    for (auto [a, b, c] :
         {std::array<std::size_t, 3>{0, 1, 1}, std::array<std::size_t, 3>{1, 0, 1},
          std::array<std::size_t, 3>{1, 1, 0}, std::array<std::size_t, 3>{0, 0, 1},
          std::array<std::size_t, 3>{0, 1, 0}, std::array<std::size_t, 3>{1, 0, 0}})
        m.at(a, b, c) = shared;
    return m;
}

BoundBreakdown minimize_over_epsilon(const std::function<BoundBreakdown(double)>& bound_at,
                                     double eps_max) {
    const double lo = 1e-3;
    const double hi = eps_max * (1.0 - 1e-9);
    if (!(hi > lo)) throw domain_error("minimize_over_epsilon: eps_max must exceed 1e-3");
    const int points = 200;
    std::optional<BoundBreakdown> best;
    for (int i = 0; i < points; ++i) {
        const double eps = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
        BoundBreakdown cand = bound_at(eps);
        if (!best || cand.total < best->total) best = std::move(cand);
    }
    return *best;
}

double kolmogorov_from_w1(double dw) {
    if (dw < 0.0) throw domain_error("kolmogorov_from_w1: distance must be >= 0");
    return std::pow(2.0 / M_PI, 0.25) * std::sqrt(dw);
}

double kolmogorov_from_w1_multi(double dw, std::uint64_t d) {
    if (dw < 0.0 || d < 1) throw domain_error("kolmogorov_from_w1_multi: bad inputs");
    return std::sqrt(2.0 * (std::sqrt(2.0 * std::log(nf(d))) + 2.0)) * std::sqrt(dw);
}

double kolmogorov_from_bw(double dbw) {
    if (dbw < 0.0) throw domain_error("kolmogorov_from_bw: distance must be >= 0");
    return (1.0 + 0.5 / std::sqrt(2.0 * M_PI)) * std::sqrt(dbw);
}

std::vector<std::pair<std::string, double>> normal_canonical_moment_bounds(double eta1, double eta2,
                                                                  std::uint64_t n) {
    if (!(eta1 > 0.0)) throw domain_error("normal_canonical_moment_bounds: requires eta1 > 0");
    if (n <= 9) throw domain_error("normal_canonical_moment_bounds: requires n > 9");
    const double x = nf(n);
    const double e1 = eta1, e2 = eta2;
    const double e2sq = e2 * e2;
    std::vector<std::pair<std::string, double>> out;
    out.emplace_back("E[Q1^2]", 10.0 * e1 * e1 / x);
    out.emplace_back("E[Q2^2]", (6.0 * e1 + 10.0 * e2sq) / x);
    out.emplace_back("E[Q1^4]", 6958.0 * std::pow(e1, 4.0) / (x * x));
    out.emplace_back("E[Q2^4]", (5886.0 * e1 * e1 + 11700.0 * e2sq * e2sq) / (x * x));
    out.emplace_back("E[Q1^2 Q2^2]", e1 * e1 * (6400.0 * e1 + 9023.0 * e2sq) / (x * x));
    out.emplace_back("E[eta1hat^-8]", 31.0 / std::pow(e1, 8.0));
    out.emplace_back("E[eta1hat^-6]", 7.0 / std::pow(e1, 6.0));
    out.emplace_back("E[eta1hat^-4]", 2.0 / std::pow(e1, 4.0));
    out.emplace_back("E[eta2hat^2]", e1 + 3.0 * e2sq);
    out.emplace_back("E[eta2hat^4]", 69.0 * e1 * e1 + 153.0 * e2sq * e2sq);
    out.emplace_back("E[|eta2hat|/eta1hat^3]", std::abs(e2) / std::pow(e1, 3.0));
    out.emplace_back("E[eta2hat^2/eta1hat^6]", (e1 + 2.0 * e2sq) / std::pow(e1, 6.0));
    out.emplace_back("E[eta2hat^4/eta1hat^8]",
                     2.0 * (e1 * e1 + 2.0 * e2sq * e2sq) / std::pow(e1, 8.0));
    return out;
}

} // namespace wmle
