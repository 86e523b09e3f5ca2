#include "wmle/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "wmle/specialfn.hpp"

namespace wmle {

namespace {

using ordered_json = nlohmann::ordered_json;

void run_tasks(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count == 0 ? 1 : count));

    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    // deterministic: surface the error of the lowest-indexed failing task
    for (std::size_t i = 0; i < count; ++i)
        if (errors[i]) std::rethrow_exception(errors[i]);
}

EmpiricalCloud gaussian_cloud(std::size_t N, std::size_t d, RandomStream& stream) {
    EmpiricalCloud z(N, d);
    for (auto& v : z.points) v = stream.next_normal();
    return z;
}

EmpiricalCloud cloud_from_sample(const StandardizedSample& w) {
    EmpiricalCloud c(w.N, w.d);
    c.points = w.rows;
    return c;
}

struct SolverChoice {
    std::size_t exact_cap;
    double eps_factor;
    unsigned max_iter;
};

double cloud_distance(const EmpiricalCloud& w, const EmpiricalCloud& z, double p,
                      const SolverChoice& s) {
    if (w.d == 1) {
        std::vector<double> x(w.points), y(z.points);
        return w_p_1d(x, y, p).wp_value;
    }
    if (w.N <= s.exact_cap) return w_p_exact(w, z, p, s.exact_cap).wp_value;
    const double eps = s.eps_factor * median_pairwise_cost(w, z, p);
    return w_p_entropic(w, z, p, eps, s.max_iter).wp_value;
}

std::string solver_description(std::size_t d, std::uint64_t N, const SolverChoice& s) {
    if (d == 1) return "sorted1d";
    if (N <= s.exact_cap) return "exact_matching";
    return "entropic";
}

void stderr_reduce(const std::vector<double>& values, double& mean, double& se) {
    const std::size_t k = values.size();
    mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(k);
    if (k < 2) {
        se = 0.0;
        return;
    }
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    se = std::sqrt(ss / static_cast<double>(k - 1) / static_cast<double>(k));
}

std::string fmt17(double v) {
    char b[64];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

} // namespace

BoundBreakdown closed_form_bound(const FamilyModel& family, Metric metric, std::uint64_t n) {
    switch (family.tag) {
        case FamilyTag::ExpCanonical:
            if (metric == Metric::W1) return bound_exp_canonical_w1(n);
            if (metric == Metric::W2) return bound_exp_canonical_w2(n);
            break;
        case FamilyTag::ExpNonCanonical:
            if (metric == Metric::W1) return bound_exp_noncanonical_w1(n);
            break;
        case FamilyTag::NormalCanonical:
            if (metric == Metric::W1)
                return bound_normal_canonical_w1(family.theta0[0], family.theta0[1], n);
            break;
        case FamilyTag::MvnDiagonal:
            if (metric == Metric::W1 || metric == Metric::W2) {
                BoundBreakdown b;
                b.metric = metric;
                b.order = metric == Metric::W2 ? 2.0 : 1.0;
                b.n = n;
                b.family = "mvn-diag";
                b.push("56 sqrt(p/n)", bound_mvn_diag_w2(family.mvn_p(), n));
                return b;
            }
            break;
        case FamilyTag::MvnGeneral:
            if (metric == Metric::W1) {
                const SymMatrix sigma = family.mvn_sigma();
                double sigma_star_sq = 0.0;
                for (std::size_t j = 0; j < sigma.dim(); ++j)
                    sigma_star_sq = std::max(sigma_star_sq, sigma(j, j));
                const double norm = max_abs_norm(sqrt_psd(fisher_info(family)));
                return bound_mvn_general_w1(family.mvn_p(), n, sigma_star_sq, norm);
            }
            break;
        default: break;
    }
    throw contract_error("closed_form_bound: no registered closed-form bound for " +
                         family_name(family.tag) + " under " + metric_name(metric));
}

ExperimentReport run_table(const ExperimentConfig& config) {
    if (config.K < 1 || config.N < 2) throw contract_error("run_table: requires K >= 1, N >= 2");
    const std::size_t rows = config.n_values.size();
    const std::size_t tasks = rows * config.K;
    std::vector<double> distances(tasks, 0.0);
    const SolverChoice solver{config.exact_cap, config.entropic_eps_factor,
                              config.entropic_max_iter};

    run_tasks(tasks, config.threads, [&](std::size_t id) {
        const std::size_t row = id / config.K;
        const std::uint64_t n = config.n_values[row];
        try {
            RandomStream w_stream = derive_stream(config.master_seed, 2 * id);
            RandomStream z_stream = derive_stream(config.master_seed, 2 * id + 1);
            const StandardizedSample w = simulate_W(config.family, n, config.N, w_stream);
            const EmpiricalCloud wc = cloud_from_sample(w);
            const EmpiricalCloud zc = gaussian_cloud(config.N, w.d, z_stream);
            distances[id] = cloud_distance(wc, zc, config.p, solver);
        } catch (const error& e) {
            throw error("run_table failed at n=" + std::to_string(n) + ", repetition " +
                        std::to_string(id % config.K) + ": " + e.what());
        }
    });

    ExperimentReport report;
    report.family = family_name(config.family.tag);
    report.metric = metric_name(config.metric);
    report.order = config.p;
    report.N = config.N;
    report.K = config.K;
    report.master_seed = config.master_seed;
    report.solver = solver_description(config.family.param_dim, config.N, solver);

    for (std::size_t row = 0; row < rows; ++row) {
        const std::uint64_t n = config.n_values[row];
        std::vector<double> vals(distances.begin() + row * config.K,
                                 distances.begin() + (row + 1) * config.K);
        ExperimentRow r;
        r.n = n;
        stderr_reduce(vals, r.dhat_mean, r.dhat_stderr);
        r.bound = closed_form_bound(config.family, config.metric, n).total;
        r.gap = r.bound - r.dhat_mean;
        if (r.dhat_mean > r.bound + 5.0 * r.dhat_stderr)
            throw error("run_table: empirical distance exceeds the bound by more than 5 "
                        "standard errors at n=" + std::to_string(n));
        report.rows.push_back(r);
    }
    return report;
}

ScalingReport run_dimension_scaling(const ScalingConfig& config) {
    if (config.p_values.empty()) throw contract_error("run_dimension_scaling: empty p grid");
    const std::size_t rows = config.p_values.size();
    const std::size_t tasks = rows * config.K;
    std::vector<double> distances(tasks, 0.0);
    const SolverChoice solver{config.exact_cap, config.entropic_eps_factor,
                              config.entropic_max_iter};

    run_tasks(tasks, config.threads, [&](std::size_t id) {
        const std::size_t row = id / config.K;
        const std::uint64_t p = config.p_values[row];
        const FamilyModel family = FamilyModel::mvn_diagonal(
            std::vector<double>(p, 1.0), std::vector<double>(p, 1.0));
        RandomStream w_stream = derive_stream(config.master_seed, 2 * id);
        RandomStream z_stream = derive_stream(config.master_seed, 2 * id + 1);
        const StandardizedSample w = simulate_W(family, config.n, config.N, w_stream);
        const EmpiricalCloud wc = cloud_from_sample(w);
        const EmpiricalCloud zc = gaussian_cloud(config.N, w.d, z_stream);
        distances[id] = cloud_distance(wc, zc, 1.0, solver);
    });

    ScalingReport report;
    report.p_values = config.p_values;
    report.n = config.n;
    report.N = config.N;
    report.K = config.K;
    report.master_seed = config.master_seed;
    report.dhat.resize(rows);
    report.dhat_stderr.resize(rows);
    for (std::size_t row = 0; row < rows; ++row) {
        std::vector<double> vals(distances.begin() + row * config.K,
                                 distances.begin() + (row + 1) * config.K);
        stderr_reduce(vals, report.dhat[row], report.dhat_stderr[row]);
    }

    std::vector<double> ps(rows);
    for (std::size_t i = 0; i < rows; ++i) ps[i] = static_cast<double>(config.p_values[i]);
    // reference windows (1-based points 70..99 and 90..99) when the full grid is
    // present, otherwise the last 30 / last 10 points
    if (rows >= 99) {
        report.tail_from = 69;
        report.tail_to = 98;
        report.far_from = 89;
        report.far_to = 98;
    } else {
        report.tail_from = rows > 30 ? rows - 30 : 0;
        report.tail_to = rows - 1;
        report.far_from = rows > 10 ? rows - 10 : 0;
        report.far_to = rows - 1;
    }
    report.slope_tail = fit_loglog_slope(ps, report.dhat, report.tail_from, report.tail_to);
    report.slope_far_tail = fit_loglog_slope(ps, report.dhat, report.far_from, report.far_to);
    return report;
}

double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys,
                        std::size_t from, std::size_t to) {
    if (to <= from || to >= xs.size() || xs.size() != ys.size())
        throw contract_error("fit_loglog_slope: bad window");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double count = static_cast<double>(to - from + 1);
    for (std::size_t i = from; i <= to; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw domain_error("fit_loglog_slope: values must be positive");
        const double lx = std::log(xs[i]);
        const double ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = sxx - sx * sx / count;
    if (denom == 0.0) throw domain_error("fit_loglog_slope: degenerate window");
    return (sxy - sx * sy / count) / denom;
}

OrderCheckReport rc4_order_check(FamilyTag variant, double alpha0, double beta0,
                                 const std::vector<std::uint64_t>& n_values,
                                 std::uint64_t mc_budget, std::uint64_t master_seed,
                                 unsigned threads) {
    if (variant != FamilyTag::InvGammaRateUnknown && variant != FamilyTag::InvGammaShapeUnknown)
        throw contract_error("rc4_order_check: variant must be an inverse-gamma family");
    if (n_values.empty()) throw contract_error("rc4_order_check: empty n grid");
    std::uint64_t n_min = n_values.front();
    for (auto n : n_values) n_min = std::min(n_min, n);
    if (!(alpha0 > 4.0 / static_cast<double>(n_min)))
        throw domain_error("rc4_order_check: moment existence requires alpha0 > 4/min(n)");

    const FamilyModel family = variant == FamilyTag::InvGammaRateUnknown
                                   ? FamilyModel::inv_gamma_rate_unknown(alpha0, beta0)
                                   : FamilyModel::inv_gamma_shape_unknown(alpha0, beta0);
    const double theta0 =
        variant == FamilyTag::InvGammaRateUnknown ? beta0 : alpha0;

    OrderCheckReport report;
    report.n_values = n_values;
    report.fourth_moment.resize(n_values.size());
    report.m_square.resize(n_values.size());

    run_tasks(n_values.size(), threads, [&](std::size_t row) {
        const std::uint64_t n = n_values[row];
        RandomStream stream = derive_stream(master_seed, 7000 + row);
        double sum4 = 0.0, sum_m2 = 0.0;
        for (std::uint64_t r = 0; r < mc_budget; ++r) {
            const SampleMatrix data = sample_data(family, n, stream);
            const double est = mle_estimate(family, data)[0];
            const double q = est - theta0;
            sum4 += q * q * q * q;
            double m;
            if (variant == FamilyTag::InvGammaRateUnknown)
                m = 2.0 * static_cast<double>(n) * alpha0 / (est * est * est);
            else
                m = static_cast<double>(n) * std::abs(polygamma(2, est));
            sum_m2 += m * m;
        }
        report.fourth_moment[row] = sum4 / static_cast<double>(mc_budget);
        report.m_square[row] = sum_m2 / static_cast<double>(mc_budget);
    });

    std::vector<double> ns(n_values.size());
    for (std::size_t i = 0; i < ns.size(); ++i) ns[i] = static_cast<double>(n_values[i]);
    report.fourth_moment_slope = fit_loglog_slope(ns, report.fourth_moment, 0, ns.size() - 1);
    report.m_square_slope = fit_loglog_slope(ns, report.m_square, 0, ns.size() - 1);
    return report;
}

void write_report_csv(const ExperimentReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << "n,dhat_mean,dhat_stderr,bound,gap\n";
    for (const auto& r : report.rows)
        out << r.n << ',' << fmt17(r.dhat_mean) << ',' << fmt17(r.dhat_stderr) << ','
            << fmt17(r.bound) << ',' << fmt17(r.gap) << '\n';
    if (!out) throw io_error("write failed for " + path);
}

void write_report_json(const ExperimentReport& report, const std::string& path) {
    ordered_json j;
    j["family"] = report.family;
    j["metric"] = report.metric;
    j["order"] = report.order;
    j["N"] = report.N;
    j["K"] = report.K;
    j["seed"] = report.master_seed;
    j["solver"] = report.solver;
    j["rows"] = ordered_json::array();
    for (const auto& r : report.rows)
        j["rows"].push_back({{"n", r.n},
                             {"dhat_mean", r.dhat_mean},
                             {"dhat_stderr", r.dhat_stderr},
                             {"bound", r.bound},
                             {"gap", r.gap}});
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

void write_scaling_csv(const ScalingReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << "p,dhat_mean,dhat_stderr\n";
    for (std::size_t i = 0; i < report.p_values.size(); ++i)
        out << report.p_values[i] << ',' << fmt17(report.dhat[i]) << ','
            << fmt17(report.dhat_stderr[i]) << '\n';
}

void write_scaling_json(const ScalingReport& report, const std::string& path) {
    ordered_json j;
    j["n"] = report.n;
    j["N"] = report.N;
    j["K"] = report.K;
    j["seed"] = report.master_seed;
    j["slope_tail"] = report.slope_tail;
    j["tail_window"] = {report.tail_from, report.tail_to};
    j["slope_far_tail"] = report.slope_far_tail;
    j["far_tail_window"] = {report.far_from, report.far_to};
    j["rows"] = ordered_json::array();
    for (std::size_t i = 0; i < report.p_values.size(); ++i)
        j["rows"].push_back({{"p", report.p_values[i]},
                             {"dhat_mean", report.dhat[i]},
                             {"dhat_stderr", report.dhat_stderr[i]}});
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

void write_order_check_csv(const OrderCheckReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << "n,fourth_moment,m_square\n";
    for (std::size_t i = 0; i < report.n_values.size(); ++i)
        out << report.n_values[i] << ',' << fmt17(report.fourth_moment[i]) << ','
            << fmt17(report.m_square[i]) << '\n';
}

void write_order_check_json(const OrderCheckReport& report, const std::string& path) {
    ordered_json j;
    j["fourth_moment_slope"] = report.fourth_moment_slope;
    j["m_square_slope"] = report.m_square_slope;
    j["rows"] = ordered_json::array();
    for (std::size_t i = 0; i < report.n_values.size(); ++i)
        j["rows"].push_back({{"n", report.n_values[i]},
                             {"fourth_moment", report.fourth_moment[i]},
                             {"m_square", report.m_square[i]}});
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

} // namespace wmle
