#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wmle/bounds.hpp"
#include "wmle/harness.hpp"
#include "wmle/ot.hpp"
#include "wmle/specialfn.hpp"

namespace {

using wmle::BoundBreakdown;
using wmle::FamilyModel;
using wmle::Metric;
using ordered_json = nlohmann::ordered_json;

std::string fmt6(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.6g", v);
    return b;
}

std::string fmt17(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

void render_breakdown(const BoundBreakdown& b, const std::string& format,
                      const std::string& out_path) {
    if (format == "json") {
        ordered_json j;
        j["metric"] = wmle::metric_name(b.metric);
        j["order"] = b.order;
        j["n"] = b.n;
        j["family"] = b.family;
        j["constant_incomplete"] = b.constant_incomplete;
        j["terms"] = ordered_json::array();
        for (const auto& t : b.terms) {
            ordered_json jt{{"label", t.label}, {"value", t.value}};
            if (t.std_error > 0.0) jt["std_error"] = t.std_error;
            j["terms"].push_back(jt);
        }
        j["total"] = b.total;
        const std::string text = j.dump(2) + "\n";
        if (out_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream f(out_path);
            f << text;
        }
        return;
    }
    std::ostringstream os;
    if (format == "csv") {
        os << "label,value,std_error\n";
        for (const auto& t : b.terms)
            os << '"' << t.label << "\"," << fmt17(t.value) << ',' << fmt17(t.std_error) << '\n';
        os << "\"total\"," << fmt17(b.total) << ",0\n";
    } else {
        os << "bound breakdown (" << wmle::metric_name(b.metric) << ", n=" << b.n;
        if (!b.family.empty()) os << ", " << b.family;
        os << ")\n";
        for (const auto& t : b.terms) {
            os << "  " << t.label << " = " << fmt6(t.value);
            if (t.std_error > 0.0) os << "  (se " << fmt6(t.std_error) << ")";
            os << '\n';
        }
        os << "  total = " << fmt6(b.total) << '\n';
        if (b.constant_incomplete)
            os << "  note: K1p term carries an unspecified p-dependent constant factor\n";
    }
    if (out_path.empty()) {
        std::cout << os.str();
    } else {
        std::ofstream f(out_path);
        f << os.str();
    }
}

struct BoundArgs {
    std::string family;
    std::uint64_t n = 0;
    std::string metric = "w1";
    double order = 2.0;
    double theta = 1.0;
    double eta1 = 0.5, eta2 = 1.0;
    std::uint64_t p = 1;
    double sigma_star_sq = 1.0;
    double root_info_max = 1.0;
    double alpha = 2.0, beta = 2.0;
    double epsilon = 0.0;
    bool optimize_eps = false;
    double mse = -1.0;
    std::optional<double> k1;
    double cp = 1.0;
    std::uint64_t budget = 100000;
    std::uint64_t seed = 1;
    bool direct = false;
    bool to_kolmogorov = false;
    std::string format = "table";
    std::string out;
};

// K1 of the implicit bound for the gamma family, Monte-Carlo estimated from
// whitened-score fourth moments.
double gamma_k1_mc(double alpha, double beta, std::uint64_t budget, std::uint64_t seed) {
    wmle::SymMatrix info(2);
    info.at(0, 0) = wmle::polygamma(1, alpha);
    info.at(0, 1) = -1.0 / beta;
    info.at(1, 1) = alpha / (beta * beta);
    const wmle::SymMatrix v_tilde = wmle::inv_sqrt_psd(info);
    wmle::RandomStream stream = wmle::derive_stream(seed, 0);
    double m0 = 0.0, m1 = 0.0;
    const double dig = wmle::digamma(alpha);
    for (std::uint64_t i = 0; i < budget; ++i) {
        const double x = wmle::sample_gamma_one(stream, alpha, beta);
        const std::vector<double> g{std::log(beta) - dig + std::log(x), alpha / beta - x};
        const std::vector<double> xi = v_tilde * g;
        m0 += std::pow(xi[0], 4.0);
        m1 += std::pow(xi[1], 4.0);
    }
    m0 /= static_cast<double>(budget);
    m1 /= static_cast<double>(budget);
    return 14.0 * std::pow(2.0, 1.25) * std::sqrt(std::max(m0, m1));
}

int cmd_bound(const BoundArgs& a) {
    BoundBreakdown b;
    if (a.family == "exp-canonical") {
        if (a.metric == "w1") {
            b = wmle::bound_exp_canonical_w1(a.n);
        } else if (a.metric == "w2") {
            b = wmle::bound_exp_canonical_w2(a.n);
        } else if (a.metric == "wp") {
            wmle::RandomStream stream = wmle::derive_stream(a.seed, 0);
            b = wmle::bound_general_wp(wmle::hooks_for(FamilyModel::exp_canonical(a.theta)),
                                       {a.theta}, a.n, a.order, a.cp, a.budget, stream);
        } else {
            throw wmle::contract_error("unsupported metric for exp-canonical: " + a.metric);
        }
    } else if (a.family == "exp-noncanonical") {
        if (a.direct) {
            b.metric = Metric::W1;
            b.n = a.n;
            b.family = "exp-noncanonical";
            b.push("4.41456/sqrt(n)", wmle::bound_exp_direct_stein(a.n));
        } else if (a.metric == "w1") {
            b = wmle::bound_exp_noncanonical_w1(a.n);
        } else {
            throw wmle::contract_error("unsupported metric for exp-noncanonical: " + a.metric);
        }
    } else if (a.family == "normal-canonical") {
        if (a.metric != "w1")
            throw wmle::contract_error("unsupported metric for normal-canonical: " + a.metric);
        b = wmle::bound_normal_canonical_w1(a.eta1, a.eta2, a.n);
    } else if (a.family == "mvn-diag") {
        if (a.metric != "w1" && a.metric != "w2")
            throw wmle::contract_error("unsupported metric for mvn-diag: " + a.metric);
        b.metric = a.metric == "w2" ? Metric::W2 : Metric::W1;
        b.order = a.metric == "w2" ? 2.0 : 1.0;
        b.n = a.n;
        b.family = "mvn-diag";
        b.push("56 sqrt(p/n)", wmle::bound_mvn_diag_w2(a.p, a.n));
    } else if (a.family == "mvn-general") {
        if (a.metric != "w1")
            throw wmle::contract_error("unsupported metric for mvn-general: " + a.metric);
        b = wmle::bound_mvn_general_w1(a.p, a.n, a.sigma_star_sq, a.root_info_max);
    } else if (a.family == "gamma-implicit" || a.family == "beta-implicit") {
        if (a.mse < 0.0)
            throw wmle::domain_error("implicit bound requires --mse (E[sum Q_j^2] >= 0)");
        const bool gamma = a.family == "gamma-implicit";
        double k1;
        if (a.k1) {
            k1 = *a.k1;
        } else if (gamma) {
            k1 = gamma_k1_mc(a.alpha, a.beta, a.budget, a.seed);
        } else {
            throw wmle::contract_error("beta-implicit requires --k1");
        }
        wmle::SymMatrix info(2);
        if (gamma) {
            info.at(0, 0) = wmle::polygamma(1, a.alpha);
            info.at(0, 1) = -1.0 / a.beta;
            info.at(1, 1) = a.alpha / (a.beta * a.beta);
        } else {
            // beta-family information via trigamma identities
            info.at(0, 0) = wmle::polygamma(1, a.alpha) - wmle::polygamma(1, a.alpha + a.beta);
            info.at(0, 1) = -wmle::polygamma(1, a.alpha + a.beta);
            info.at(1, 1) = wmle::polygamma(1, a.beta) - wmle::polygamma(1, a.alpha + a.beta);
        }
        auto bound_at = [&](double eps) {
            wmle::ImplicitBoundInputs in;
            in.epsilon = eps;
            in.mse_estimate = a.mse;
            in.m_constants = gamma ? wmle::gamma_M_constants(a.alpha, a.beta, eps)
                                   : wmle::beta_M_constants(a.alpha, a.beta, eps);
            in.v_tilde = wmle::inv_sqrt_psd(info);
            in.variance_terms = wmle::SymMatrix(2); // second derivatives are data-free
            in.k1 = k1;
            BoundBreakdown out = wmle::bound_implicit_bw(in, a.n, 2);
            out.family = a.family;
            return out;
        };
        if (a.optimize_eps) {
            b = wmle::minimize_over_epsilon(bound_at, std::min(a.alpha, a.beta));
        } else {
            if (!(a.epsilon > 0.0))
                throw wmle::domain_error("implicit bound requires --epsilon > 0 or --optimize-eps");
            b = bound_at(a.epsilon);
        }
    } else {
        throw wmle::contract_error("unknown family: " + a.family);
    }

    if (a.to_kolmogorov) {
        BoundBreakdown k;
        k.metric = Metric::Kolmogorov;
        k.n = b.n;
        k.family = b.family;
        if (b.metric == Metric::BoundedW) {
            k.push("(1+1/(2 sqrt(2 pi))) sqrt(bW)", wmle::kolmogorov_from_bw(b.total));
        } else if (b.family == "normal-canonical" || b.family == "mvn-diag" ||
                   b.family == "mvn-general") {
            const std::uint64_t d = b.family == "normal-canonical" ? 2 : a.p;
            k.push("sqrt(2(sqrt(2 log d)+2)) sqrt(W1)",
                   wmle::kolmogorov_from_w1_multi(b.total, std::max<std::uint64_t>(d, 1)));
        } else {
            k.push("(2/pi)^(1/4) sqrt(W1)", wmle::kolmogorov_from_w1(b.total));
        }
        render_breakdown(k, a.format, a.out);
        return 0;
    }
    render_breakdown(b, a.format, a.out);
    return 0;
}

struct EstimateArgs {
    std::string cloud_x, cloud_y;
    std::string family;
    double theta = 1.0;
    double eta1 = 0.5, eta2 = 1.0;
    std::uint64_t p_dim = 1;
    std::uint64_t n = 1000;
    std::uint64_t N = 2000;
    double order = 1.0;
    std::string solver = "auto";
    double eps_factor = 0.005;
    unsigned max_iter = 2000;
    std::size_t exact_cap = 5000;
    std::uint64_t seed = 1;
    std::string format = "table";
    std::string out;
};

FamilyModel family_from_flags(const std::string& name, const EstimateArgs& a) {
    if (name == "exp-canonical") return FamilyModel::exp_canonical(a.theta);
    if (name == "exp-noncanonical") return FamilyModel::exp_noncanonical(a.theta);
    if (name == "normal-canonical") return FamilyModel::normal_canonical(a.eta1, a.eta2);
    if (name == "mvn-diag")
        return FamilyModel::mvn_diagonal(std::vector<double>(a.p_dim, 1.0),
                                         std::vector<double>(a.p_dim, 1.0));
    throw wmle::contract_error("unknown family: " + name);
}

int cmd_estimate(const EstimateArgs& a) {
    wmle::EmpiricalCloud x, y;
    if (!a.cloud_x.empty() || !a.cloud_y.empty()) {
        if (a.cloud_x.empty() || a.cloud_y.empty())
            throw wmle::contract_error("estimate: both --cloud-x and --cloud-y are required");
        x = wmle::read_cloud_csv(a.cloud_x);
        y = wmle::read_cloud_csv(a.cloud_y);
    } else if (!a.family.empty()) {
        const FamilyModel family = family_from_flags(a.family, a);
        wmle::RandomStream ws = wmle::derive_stream(a.seed, 0);
        wmle::RandomStream zs = wmle::derive_stream(a.seed, 1);
        const wmle::StandardizedSample w = wmle::simulate_W(family, a.n, a.N, ws);
        x = wmle::EmpiricalCloud(w.N, w.d);
        x.points = w.rows;
        y = wmle::EmpiricalCloud(a.N, w.d);
        for (auto& v : y.points) v = zs.next_normal();
    } else {
        throw wmle::contract_error("estimate: provide cloud files or a family");
    }

    wmle::TransportResult r;
    if (a.solver == "sorted1d" || (a.solver == "auto" && x.d == 1)) {
        std::vector<double> xv(x.points), yv(y.points);
        if (x.d != 1) throw wmle::contract_error("sorted1d solver requires 1-D clouds");
        r = wmle::w_p_1d(xv, yv, a.order);
    } else if (a.solver == "brute") {
        r = wmle::brute_force_wp(x, y, a.order);
    } else if (a.solver == "entropic") {
        const double eps = a.eps_factor * wmle::median_pairwise_cost(x, y, a.order);
        r = wmle::w_p_entropic(x, y, a.order, eps, a.max_iter);
    } else if (a.solver == "exact" || a.solver == "auto") {
        if (a.solver == "auto" && x.N > a.exact_cap) {
            const double eps = a.eps_factor * wmle::median_pairwise_cost(x, y, a.order);
            r = wmle::w_p_entropic(x, y, a.order, eps, a.max_iter);
        } else {
            r = wmle::w_p_exact(x, y, a.order, a.exact_cap);
        }
    } else {
        throw wmle::contract_error("unknown solver: " + a.solver);
    }

    if (a.format == "json") {
        ordered_json j;
        j["wp"] = r.wp_value;
        j["order"] = r.order;
        j["total_cost"] = r.total_cost;
        j["solver"] = wmle::solver_name(r.solver);
        if (r.gap) j["gap"] = *r.gap;
        j["converged"] = r.converged;
        j["N"] = x.N;
        j["d"] = x.d;
        const std::string text = j.dump(2) + "\n";
        if (a.out.empty())
            std::cout << text;
        else
            std::ofstream(a.out) << text;
    } else {
        std::ostringstream os;
        os << "wp = " << fmt6(r.wp_value) << "  (order " << fmt6(r.order) << ", solver "
           << wmle::solver_name(r.solver);
        if (r.gap) os << ", gap " << fmt6(*r.gap);
        if (!r.converged) os << ", UNCONVERGED";
        os << ")\n";
        if (a.out.empty())
            std::cout << os.str();
        else
            std::ofstream(a.out) << os.str();
    }
    return 0;
}

struct ReproduceArgs {
    std::string target;
    std::string scale = "desk";
    std::uint64_t seed = 1;
    std::string out = ".";
    unsigned threads = 0;
    std::size_t exact_cap = 5000;
};

void print_report(const wmle::ExperimentReport& rep) {
    std::cout << "  n        dhat      stderr    bound     gap\n";
    for (const auto& r : rep.rows)
        std::cout << "  " << r.n << "\t" << fmt6(r.dhat_mean) << "\t" << fmt6(r.dhat_stderr)
                  << "\t" << fmt6(r.bound) << "\t" << fmt6(r.gap) << "\n";
}

int cmd_reproduce(const ReproduceArgs& a) {
    const bool full = a.scale == "full";
    std::filesystem::create_directories(a.out);
    const auto path = [&](const std::string& name) {
        return (std::filesystem::path(a.out) / name).string();
    };

    const std::vector<std::uint64_t> table_n{10, 100, 1000, 10000};
    wmle::ExperimentConfig cfg;
    cfg.n_values = table_n;
    cfg.N = full ? 10000 : 2000;
    cfg.K = full ? 100 : 20;
    cfg.master_seed = a.seed;
    cfg.threads = a.threads;
    cfg.exact_cap = a.exact_cap;

    if (a.target == "table1" || a.target == "table2" || a.target == "table3") {
        if (a.target == "table1")
            cfg.family = FamilyModel::exp_canonical(1.0);
        else if (a.target == "table2")
            cfg.family = FamilyModel::exp_noncanonical(1.0);
        else
            cfg.family = FamilyModel::normal_canonical(0.5, 1.0);
        const wmle::ExperimentReport rep = wmle::run_table(cfg);
        wmle::write_report_csv(rep, path(a.target + ".csv"));
        wmle::write_report_json(rep, path(a.target + ".json"));
        std::cout << a.target << " (" << a.scale << ", seed " << a.seed << ")\n";
        print_report(rep);
        return 0;
    }
    if (a.target == "figure1") {
        wmle::ScalingConfig sc;
        const std::uint64_t p_max = full ? 100 : 50;
        for (std::uint64_t p = 2; p <= p_max; ++p) sc.p_values.push_back(p);
        sc.n = 1000;
        sc.N = 1000;
        sc.K = full ? 100 : 5;
        sc.master_seed = a.seed;
        sc.threads = a.threads;
        const wmle::ScalingReport rep = wmle::run_dimension_scaling(sc);
        wmle::write_scaling_csv(rep, path("figure1.csv"));
        wmle::write_scaling_json(rep, path("figure1.json"));
        std::cout << "figure1 (" << a.scale << ", seed " << a.seed << "): " << rep.p_values.size()
                  << " dimensions, tail slope " << fmt6(rep.slope_tail) << " (points "
                  << rep.tail_from + 1 << ".." << rep.tail_to + 1 << "), far-tail slope "
                  << fmt6(rep.slope_far_tail) << "\n";
        return 0;
    }
    if (a.target == "rc4-check") {
        const std::vector<std::uint64_t> ns{50, 100, 200, 400};
        const std::uint64_t budget = full ? 200000 : 20000;
        const auto rate = wmle::rc4_order_check(wmle::FamilyTag::InvGammaRateUnknown, 3.0, 1.0,
                                                ns, budget, a.seed, a.threads);
        const auto shape = wmle::rc4_order_check(wmle::FamilyTag::InvGammaShapeUnknown, 2.0, 1.0,
                                                 ns, budget, a.seed + 1, a.threads);
        wmle::write_order_check_csv(rate, path("rc4_rate.csv"));
        wmle::write_order_check_json(rate, path("rc4_rate.json"));
        wmle::write_order_check_csv(shape, path("rc4_shape.csv"));
        wmle::write_order_check_json(shape, path("rc4_shape.json"));
        std::cout << "rc4-check (" << a.scale << ", seed " << a.seed << ")\n"
                  << "  rate-unknown:  E[Q^4] slope " << fmt6(rate.fourth_moment_slope)
                  << ", E[M^2] slope " << fmt6(rate.m_square_slope) << "\n"
                  << "  shape-unknown: E[Q^4] slope " << fmt6(shape.fourth_moment_slope)
                  << ", E[M^2] slope " << fmt6(shape.m_square_slope) << "\n";
        return 0;
    }
    throw wmle::contract_error("unknown reproduce target: " + a.target);
}

int cmd_selftest() {
    struct Check {
        std::string name;
        bool ok;
    };
    std::vector<Check> checks;
    auto check = [&](const std::string& name, bool ok) { checks.push_back({name, ok}); };
    auto near = [](double a, double b, double tol) { return std::abs(a - b) <= tol; };

    check("polygamma(1,1) = pi^2/6",
          near(wmle::polygamma(1, 1.0), M_PI * M_PI / 6.0, 1e-10));
    check("polygamma(2,1) = -2 zeta(3)",
          near(wmle::polygamma(2, 1.0), -2.4041138063191885, 1e-10));
    check("digamma(1) = -gamma", near(wmle::digamma(1.0), -0.5772156649015329, 1e-10));
    check("inv_digamma round trip",
          near(wmle::inv_digamma(wmle::digamma(3.7)), 3.7, 1e-8));

    {
        wmle::RandomStream s = wmle::derive_stream(17, 0);
        bool ok = true;
        for (std::size_t dim = 1; dim <= 5 && ok; ++dim) {
            wmle::Matrix a(dim, dim);
            for (std::size_t i = 0; i < dim; ++i)
                for (std::size_t j = 0; j < dim; ++j) a(i, j) = s.next_normal();
            wmle::SymMatrix m = wmle::SymMatrix::from_dense(a * a.transposed());
            for (std::size_t i = 0; i < dim; ++i) m.at(i, i) += 1e-6;
            const wmle::SymMatrix r = wmle::sqrt_psd(m);
            const wmle::Matrix rr = r.to_dense() * r.to_dense();
            for (std::size_t i = 0; i < dim; ++i)
                for (std::size_t j = 0; j < dim; ++j)
                    if (std::abs(rr(i, j) - m(i, j)) > 1e-9) ok = false;
        }
        check("PSD square roots reconstruct", ok);
    }

    check("exp-canonical bound at n=10", near(wmle::bound_exp_canonical_w1(10).total, 2.3025, 1e-3));
    check("exp-noncanonical bound at n=10",
          near(wmle::bound_exp_noncanonical_w1(10).total, 7.4987, 1e-3));
    check("normal-canonical bound at n=10",
          near(wmle::bound_normal_canonical_w1(0.5, 1.0, 10).total, 8962.830, 1e-2));
    check("mvn-diag bound", near(wmle::bound_mvn_diag_w2(3, 1000), 3.06725, 1e-4));

    {
        wmle::RandomStream s = wmle::derive_stream(23, 5);
        bool ok = true;
        for (int t = 0; t < 25 && ok; ++t) {
            const std::size_t n = 2 + static_cast<std::size_t>(s.next_u64() % 5);
            const std::size_t d = 1 + static_cast<std::size_t>(s.next_u64() % 3);
            const double p = (t % 2 == 0) ? 1.0 : 2.0;
            wmle::EmpiricalCloud x(n, d), y(n, d);
            for (auto& v : x.points) v = s.next_unit();
            for (auto& v : y.points) v = s.next_unit();
            const auto exact = wmle::w_p_exact(x, y, p);
            const auto brute = wmle::brute_force_wp(x, y, p);
            if (exact.total_cost != brute.total_cost) ok = false;
        }
        check("matching solver equals factorial oracle", ok);
    }
    {
        wmle::RandomStream s = wmle::derive_stream(29, 2);
        std::vector<double> x(64), y(64);
        for (auto& v : x) v = s.next_normal();
        for (auto& v : y) v = s.next_normal();
        const auto sorted = wmle::w_p_1d(x, y, 2.0);
        const auto exact = wmle::w_p_exact(wmle::EmpiricalCloud::from_column(x),
                                           wmle::EmpiricalCloud::from_column(y), 2.0);
        check("1-D sorted coupling equals matching solver",
              near(sorted.wp_value, exact.wp_value, 1e-12));
        check("W1 <= W2 on a sample instance",
              wmle::w_p_1d(x, y, 1.0).wp_value <= sorted.wp_value + 1e-12);
    }
    check("kolmogorov conversion", near(wmle::kolmogorov_from_w1(0.04), 0.178649, 1e-4));

    bool all_ok = true;
    for (const auto& c : checks) {
        std::cout << (c.ok ? "PASS" : "FAIL") << "  " << c.name << "\n";
        if (!c.ok) all_ok = false;
    }
    if (!all_ok) {
        std::cout << "selftest: FAILURES present\n";
        return 1;
    }
    std::cout << "selftest: all " << checks.size() << " checks passed\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wasserstein-distance error bounds for the normal approximation of MLEs"};
    app.require_subcommand(1);

    BoundArgs ba;
    auto* bound = app.add_subcommand("bound", "evaluate a closed-form or assembled bound");
    bound->add_option("--family", ba.family,
                      "exp-canonical | exp-noncanonical | normal-canonical | mvn-diag | "
                      "mvn-general | gamma-implicit | beta-implicit")
        ->required();
    bound->add_option("--n", ba.n, "sample size")->required();
    bound->add_option("--metric", ba.metric, "w1 | w2 | wp | bw (default w1)");
    bound->add_option("--order", ba.order, "Wasserstein order for --metric wp");
    bound->add_option("--theta", ba.theta, "exponential-family parameter");
    bound->add_option("--eta1", ba.eta1, "normal-canonical eta1");
    bound->add_option("--eta2", ba.eta2, "normal-canonical eta2");
    bound->add_option("--p", ba.p, "MVN dimension");
    bound->add_option("--sigma-star-sq", ba.sigma_star_sq, "largest variance (mvn-general)");
    bound->add_option("--root-info-max", ba.root_info_max, "||I^(1/2)||_max (mvn-general)");
    bound->add_option("--alpha", ba.alpha, "implicit-family alpha");
    bound->add_option("--beta", ba.beta, "implicit-family beta");
    bound->add_option("--epsilon", ba.epsilon, "implicit-bound epsilon");
    bound->add_flag("--optimize-eps", ba.optimize_eps, "grid-search epsilon");
    bound->add_option("--mse", ba.mse, "E[sum Q_j^2] for the implicit bound");
    double k1_value = 0.0;
    auto* k1_opt = bound->add_option("--k1", k1_value, "CLT constant for the implicit bound");
    bound->add_option("--cp", ba.cp, "C_p factor for --metric wp (default 1)");
    bound->add_option("--budget", ba.budget, "Monte-Carlo budget");
    bound->add_option("--seed", ba.seed, "Monte-Carlo seed");
    bound->add_flag("--direct", ba.direct, "direct sum-of-i.i.d. bound (exp-noncanonical)");
    bound->add_flag("--to-kolmogorov", ba.to_kolmogorov, "convert the result to a Kolmogorov bound");
    bound->add_option("--format", ba.format, "table | csv | json");
    bound->add_option("--out", ba.out, "output path (default stdout)");

    EstimateArgs ea;
    auto* estimate = app.add_subcommand("estimate", "empirical Wasserstein distance");
    estimate->add_option("--cloud-x", ea.cloud_x, "CSV point cloud (d columns, no header)");
    estimate->add_option("--cloud-y", ea.cloud_y, "CSV point cloud");
    estimate->add_option("--family", ea.family, "simulate W vs Z for this family");
    estimate->add_option("--theta", ea.theta, "exponential-family parameter");
    estimate->add_option("--eta1", ea.eta1, "normal-canonical eta1");
    estimate->add_option("--eta2", ea.eta2, "normal-canonical eta2");
    estimate->add_option("--p", ea.p_dim, "mvn-diag dimension");
    estimate->add_option("--n", ea.n, "sample size per replication");
    estimate->add_option("--N", ea.N, "points per cloud");
    estimate->add_option("--order", ea.order, "Wasserstein order (default 1)");
    estimate->add_option("--solver", ea.solver, "auto | exact | entropic | sorted1d | brute");
    estimate->add_option("--epsilon-factor", ea.eps_factor,
                         "entropic epsilon = factor x median pairwise cost");
    estimate->add_option("--max-iter", ea.max_iter, "entropic iteration cap");
    estimate->add_option("--exact-cap", ea.exact_cap, "exact-matching size cap");
    estimate->add_option("--seed", ea.seed, "simulation seed");
    estimate->add_option("--format", ea.format, "table | json");
    estimate->add_option("--out", ea.out, "output path (default stdout)");

    ReproduceArgs ra;
    auto* reproduce = app.add_subcommand("reproduce", "rerun a study end to end");
    reproduce->add_option("target", ra.target, "table1 | table2 | table3 | figure1 | rc4-check")
        ->required();
    reproduce->add_option("--scale", ra.scale, "desk | full (default desk)");
    reproduce->add_option("--seed", ra.seed, "master seed");
    reproduce->add_option("--out", ra.out, "output directory");
    reproduce->add_option("--threads", ra.threads, "worker threads (default: hardware)");
    reproduce->add_option("--exact-cap", ra.exact_cap,
                          "exact-matching size cap; clouds above it use the entropic solver");

    app.add_subcommand("selftest", "fast invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2; // usage error
    }

    try {
        if (app.got_subcommand("bound")) {
            if (k1_opt->count() > 0) ba.k1 = k1_value;
            return cmd_bound(ba);
        }
        if (app.got_subcommand("estimate")) return cmd_estimate(ea);
        if (app.got_subcommand("reproduce")) return cmd_reproduce(ra);
        if (app.got_subcommand("selftest")) return cmd_selftest();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
