#include "wmle/ot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace wmle {

namespace {

double point_distance(const double* a, const double* b, std::size_t d) {
    switch (d) {
        case 1: return std::abs(a[0] - b[0]);
        case 2: return std::hypot(a[0] - b[0], a[1] - b[1]);
        case 3: return std::hypot(std::hypot(a[0] - b[0], a[1] - b[1]), a[2] - b[2]);
        default: {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = a[k] - b[k];
                s += diff * diff;
            }
            return std::sqrt(s);
        }
    }
}

double cost_power(double dist, double p) {
    if (p == 1.0) return dist;
    if (p == 2.0) return dist * dist;
    return std::pow(dist, p);
}

std::vector<double> build_cost_matrix(const EmpiricalCloud& x, const EmpiricalCloud& y,
                                      double p) {
    const std::size_t n = x.N;
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.row(i);
        double* row = cost.data() + i * n;
        for (std::size_t j = 0; j < n; ++j)
            row[j] = cost_power(point_distance(xi, y.row(j), x.d), p);
    }
    return cost;
}

double finish_wp(double total_cost, std::size_t n, double p) {
    const double mean = total_cost / static_cast<double>(n);
    if (p == 1.0) return mean;
    if (p == 2.0) return std::sqrt(mean);
    return std::pow(mean, 1.0 / p);
}

// Double-double accumulation (Knuth two-sum). Matching costs are summed in
// ~106-bit precision and rounded once, so permutations with equal real cost
// report bit-identical totals regardless of summation order.
struct DD {
    double hi = 0.0, lo = 0.0;
};

DD two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    const double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

DD dd_add(DD a, double b) {
    DD t = two_sum(a.hi, b);
    t.lo += a.lo;
    return two_sum(t.hi, t.lo);
}

int dd_cmp(DD a, DD b) {
    if (a.hi != b.hi) return a.hi < b.hi ? -1 : 1;
    if (a.lo != b.lo) return a.lo < b.lo ? -1 : 1;
    return 0;
}

DD pair_sum(double a, double b) { return two_sum(a, b); }

DD permutation_cost(const std::vector<double>& cost, std::size_t n,
                    const std::vector<std::uint32_t>& perm) {
    DD acc;
    for (std::size_t i = 0; i < n; ++i) acc = dd_add(acc, cost[i * n + perm[i]]);
    return acc;
}

// Pairwise-swap polish with exact cost comparisons; resolves the ulp-level
// near-ties that dual-ascent arithmetic cannot see. Ties are left alone, so
// the loop terminates.
void two_opt_polish(const std::vector<double>& cost, std::size_t n,
                    std::vector<std::uint32_t>& perm) {
    for (int pass = 0; pass < 64; ++pass) {
        bool improved = false;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = i + 1; k < n; ++k) {
                const DD cur = pair_sum(cost[i * n + perm[i]], cost[k * n + perm[k]]);
                const DD swp = pair_sum(cost[i * n + perm[k]], cost[k * n + perm[i]]);
                if (dd_cmp(swp, cur) < 0) {
                    std::swap(perm[i], perm[k]);
                    improved = true;
                }
            }
        if (!improved) return;
    }
}

void check_pair(const EmpiricalCloud& x, const EmpiricalCloud& y, double p) {
    if (x.N != y.N) throw contract_error("transport: clouds must have equal point counts");
    if (x.d != y.d) throw contract_error("transport: clouds must have equal dimensions");
    if (x.N == 0) throw contract_error("transport: empty clouds");
    if (!(p >= 1.0)) throw contract_error("transport: order p must be >= 1");
}

// Dense shortest-augmenting-path assignment (Jonker-Volgenant style) with
// dual feasibility maintained. Ties prefer the lowest column index: every
// scan walks columns in ascending order with strict improvement tests.
std::vector<std::uint32_t> solve_assignment(const std::vector<double>& cost, std::size_t n) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n, 0.0), v(n, 0.0);
    std::vector<std::int64_t> row_of_col(n, -1), col_of_row(n, -1);

    // column reduction seed
    for (std::size_t j = n; j-- > 0;) {
        double mn = cost[j];
        std::size_t imin = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (cost[i * n + j] < mn) {
                mn = cost[i * n + j];
                imin = i;
            }
        v[j] = mn;
        if (col_of_row[imin] == -1) {
            col_of_row[imin] = static_cast<std::int64_t>(j);
            row_of_col[j] = static_cast<std::int64_t>(imin);
        }
    }

    std::vector<double> shortest(n);
    std::vector<std::int64_t> pred(n);
    std::vector<char> done(n);

    for (std::size_t free_row = 0; free_row < n; ++free_row) {
        if (col_of_row[free_row] != -1) continue;

        // Dijkstra over columns from the unassigned row
        std::fill(done.begin(), done.end(), char{0});
        const double* row0 = cost.data() + free_row * n;
        for (std::size_t j = 0; j < n; ++j) {
            shortest[j] = row0[j] - v[j];
            pred[j] = static_cast<std::int64_t>(free_row);
        }

        std::int64_t sink = -1;
        double min_dist = 0.0;
        for (;;) {
            std::int64_t jmin = -1;
            double dmin = inf;
            for (std::size_t j = 0; j < n; ++j)
                if (!done[j] && shortest[j] < dmin) {
                    dmin = shortest[j];
                    jmin = static_cast<std::int64_t>(j);
                }
            done[jmin] = 1;
            min_dist = dmin;
            if (row_of_col[jmin] == -1) {
                sink = jmin;
                break;
            }
            const std::size_t i = static_cast<std::size_t>(row_of_col[jmin]);
            const double* rowi = cost.data() + i * n;
            const double base = dmin - (rowi[jmin] - u[i] - v[jmin]);
            for (std::size_t j = 0; j < n; ++j) {
                if (done[j]) continue;
                const double alt = base + rowi[j] - u[i] - v[j];
                if (alt < shortest[j]) {
                    shortest[j] = alt;
                    pred[j] = static_cast<std::int64_t>(i);
                }
            }
        }

        // dual update for scanned columns
        for (std::size_t j = 0; j < n; ++j) {
            if (!done[j] || static_cast<std::int64_t>(j) == sink) continue;
            const std::size_t i = static_cast<std::size_t>(row_of_col[j]);
            u[i] += min_dist - shortest[j];
            v[j] -= min_dist - shortest[j];
        }
        u[free_row] += min_dist;

        // augment along predecessors
        std::int64_t j = sink;
        while (true) {
            const std::int64_t i = pred[j];
            row_of_col[j] = i;
            std::swap(col_of_row[i], j);
            if (static_cast<std::size_t>(i) == free_row) break;
        }
    }

    std::vector<std::uint32_t> assignment(n);
    for (std::size_t i = 0; i < n; ++i) assignment[i] = static_cast<std::uint32_t>(col_of_row[i]);
    return assignment;
}

} // namespace

EmpiricalCloud EmpiricalCloud::from_column(const std::vector<double>& x) {
    EmpiricalCloud c(x.size(), 1);
    c.points = x;
    return c;
}

std::string solver_name(OtSolver s) {
    switch (s) {
        case OtSolver::Sorted1d: return "sorted1d";
        case OtSolver::ExactMatching: return "exact_matching";
        case OtSolver::Entropic: return "entropic";
        case OtSolver::BruteForce: return "brute_force";
    }
    return "?";
}

TransportResult w_p_1d(const std::vector<double>& x, const std::vector<double>& y, double p) {
    if (x.size() != y.size()) throw contract_error("w_p_1d: inputs must have equal length");
    if (x.empty()) throw contract_error("w_p_1d: empty inputs");
    if (!(p >= 1.0)) throw contract_error("w_p_1d: order p must be >= 1");
    const std::size_t n = x.size();

    std::vector<std::uint32_t> xi(n), yi(n);
    std::iota(xi.begin(), xi.end(), 0u);
    std::iota(yi.begin(), yi.end(), 0u);
    std::sort(xi.begin(), xi.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::sort(yi.begin(), yi.end(), [&](auto a, auto b) { return y[a] < y[b]; });

    TransportResult r;
    r.solver = OtSolver::Sorted1d;
    r.order = p;
    r.assignment.resize(n);
    DD total;
    for (std::size_t k = 0; k < n; ++k) {
        r.assignment[xi[k]] = yi[k];
        total = dd_add(total, cost_power(std::abs(x[xi[k]] - y[yi[k]]), p));
    }
    r.total_cost = total.hi + total.lo;
    r.wp_value = finish_wp(r.total_cost, n, p);
    r.gap = 0.0;
    return r;
}

TransportResult w_p_exact(const EmpiricalCloud& x, const EmpiricalCloud& y, double p,
                          std::size_t exact_cap) {
    check_pair(x, y, p);
    if (x.N > exact_cap)
        throw capacity_error(
            "w_p_exact: N exceeds the exact-matching cap; use w_p_entropic for clouds this "
            "large");

    const std::vector<double> cost = build_cost_matrix(x, y, p);
    TransportResult r;
    r.solver = OtSolver::ExactMatching;
    r.order = p;
    r.assignment = solve_assignment(cost, x.N);
    two_opt_polish(cost, x.N, r.assignment);
    const DD total = permutation_cost(cost, x.N, r.assignment);
    r.total_cost = total.hi + total.lo;
    r.wp_value = finish_wp(r.total_cost, x.N, p);
    r.gap = 0.0;
    return r;
}

TransportResult brute_force_wp(const EmpiricalCloud& x, const EmpiricalCloud& y, double p) {
    check_pair(x, y, p);
    if (x.N > 8) throw capacity_error("brute_force_wp: factorial oracle capped at N <= 8");

    const std::size_t n = x.N;
    const std::vector<double> cost = build_cost_matrix(x, y, p);
    std::vector<std::uint32_t> perm(n), best(n);
    std::iota(perm.begin(), perm.end(), 0u);
    DD best_cost{std::numeric_limits<double>::infinity(), 0.0};
    do {
        const DD total = permutation_cost(cost, n, perm);
        if (dd_cmp(total, best_cost) < 0) {
            best_cost = total;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    TransportResult r;
    r.solver = OtSolver::BruteForce;
    r.order = p;
    r.assignment = std::move(best);
    r.total_cost = best_cost.hi + best_cost.lo;
    r.wp_value = finish_wp(r.total_cost, n, p);
    r.gap = 0.0;
    return r;
}

TransportResult w_p_entropic(const EmpiricalCloud& x, const EmpiricalCloud& y, double p,
                             double epsilon, unsigned max_iter) {
    check_pair(x, y, p);
    if (!(epsilon > 0.0)) throw contract_error("w_p_entropic: epsilon must be positive");
    const std::size_t n = x.N;
    if (n > 20000)
        throw capacity_error("w_p_entropic: dense kernel storage capped at N <= 20000");
    const double a = 1.0 / static_cast<double>(n); // uniform marginals

    const std::vector<double> cost = build_cost_matrix(x, y, p);

    // Sinkhorn with kernel absorption: multiplicative scalings (u, v) run on a
    // cached kernel exp((f_i + g_j - c_ij)/eps) and are absorbed into the
    // potentials whenever they leave the safe exponent range.
    std::vector<double> f(n, 0.0), g(n, 0.0);
    std::vector<double> u(n, 1.0), v(n, 1.0), kv(n), ku(n);
    std::vector<double> kernel(n * n);

    auto absorb = [&]() {
        for (std::size_t i = 0; i < n; ++i) {
            f[i] += epsilon * std::log(u[i]);
            u[i] = 1.0;
        }
        for (std::size_t j = 0; j < n; ++j) {
            g[j] += epsilon * std::log(v[j]);
            v[j] = 1.0;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = cost.data() + i * n;
            double* krow = kernel.data() + i * n;
            for (std::size_t j = 0; j < n; ++j)
                krow[j] = std::exp((f[i] + g[j] - row[j]) / epsilon);
        }
    };
    absorb();

    bool converged = false;
    const double tol = 1e-7;      // L1 row-marginal violation; rounding repairs the rest
    const double safe_hi = 1e200; // absorption trigger for the scalings
    for (unsigned it = 0; it < max_iter; ++it) {
        // kv pass doubles as the row-violation check for the previous iterate
        double viol = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* krow = kernel.data() + i * n;
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += krow[j] * v[j];
            kv[i] = s;
            viol += std::abs(u[i] * s - a);
            u[i] = a / std::max(s, 1e-300);
        }
        if (it > 0 && viol < tol) {
            converged = true;
            break;
        }
        std::fill(ku.begin(), ku.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* krow = kernel.data() + i * n;
            const double ui = u[i];
            for (std::size_t j = 0; j < n; ++j) ku[j] += krow[j] * ui;
        }
        for (std::size_t j = 0; j < n; ++j) v[j] = a / std::max(ku[j], 1e-300);

        double extreme = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            extreme = std::max(extreme, std::max(u[i], 1.0 / std::max(u[i], 1e-300)));
        for (std::size_t j = 0; j < n; ++j)
            extreme = std::max(extreme, std::max(v[j], 1.0 / std::max(v[j], 1e-300)));
        if (extreme > safe_hi) absorb();
    }
    absorb(); // fold the final scalings into the potentials; plan = kernel

    auto plan = [&](std::size_t i, std::size_t j) { return kernel[i * n + j]; };

    // round to exact marginals: row scale, column scale, then rank-one repair
    std::vector<double> alpha(n), beta(n), colsum(n, 0.0), row2(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double rs = 0.0;
        for (std::size_t j = 0; j < n; ++j) rs += plan(i, j);
        alpha[i] = rs > a ? a / rs : 1.0;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) colsum[j] += alpha[i] * plan(i, j);
    for (std::size_t j = 0; j < n; ++j) beta[j] = colsum[j] > a ? a / colsum[j] : 1.0;

    double cost_scaled = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double rs = 0.0;
        const double* row = cost.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double m = alpha[i] * beta[j] * plan(i, j);
            rs += m;
            cost_scaled += m * row[j];
        }
        row2[i] = rs;
    }

    std::vector<double> err_r(n), err_c(n);
    double err_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        err_r[i] = std::max(0.0, a - row2[i]);
        err_total += err_r[i];
    }
    for (std::size_t j = 0; j < n; ++j) err_c[j] = std::max(0.0, a - beta[j] * colsum[j]);

    double primal = cost_scaled;
    if (err_total > 0.0) {
        double corr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (err_r[i] == 0.0) continue;
            const double* row = cost.data() + i * n;
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += row[j] * err_c[j];
            corr += err_r[i] * s;
        }
        primal += corr / err_total;
    }

    // feasible dual for the unregularized problem: g'_j = min_i (c_ij - f_i)
    double dual = 0.0;
    for (std::size_t i = 0; i < n; ++i) dual += a * f[i];
    for (std::size_t j = 0; j < n; ++j) {
        double mn = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) mn = std::min(mn, cost[i * n + j] - f[i]);
        dual += a * mn;
    }

    // greedy support extraction for the reported bijection
    std::vector<char> used(n, 0);
    std::vector<std::uint32_t> assignment(n);
    for (std::size_t i = 0; i < n; ++i) {
        double bestm = -1.0;
        std::size_t bestj = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (used[j]) continue;
            double m = alpha[i] * beta[j] * plan(i, j);
            if (err_total > 0.0) m += err_r[i] * err_c[j] / err_total;
            if (m > bestm) {
                bestm = m;
                bestj = j;
            }
        }
        used[bestj] = 1;
        assignment[i] = static_cast<std::uint32_t>(bestj);
    }

    TransportResult r;
    r.solver = OtSolver::Entropic;
    r.order = p;
    r.assignment = std::move(assignment);
    r.total_cost = primal * static_cast<double>(n);
    r.wp_value = finish_wp(r.total_cost, n, p);
    r.gap = std::max(0.0, primal - dual);
    r.converged = converged;
    return r;
}

double median_pairwise_cost(const EmpiricalCloud& x, const EmpiricalCloud& y, double p) {
    check_pair(x, y, p);
    const std::size_t n = x.N;
    // deterministic stride subsample, at most ~2e6 pairs
    std::size_t stride = 1;
    while ((n / stride) * (n / stride) > 2'000'000) ++stride;
    std::vector<double> costs;
    costs.reserve((n / stride + 1) * (n / stride + 1));
    for (std::size_t i = 0; i < n; i += stride)
        for (std::size_t j = 0; j < n; j += stride)
            costs.push_back(cost_power(point_distance(x.row(i), y.row(j), x.d), p));
    auto mid = costs.begin() + costs.size() / 2;
    std::nth_element(costs.begin(), mid, costs.end());
    return *mid;
}

EmpiricalCloud read_cloud_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open cloud file: " + path);
    std::vector<double> values;
    std::size_t cols = 0, lineno = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t count = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(cell, &pos);
                while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos])))
                    ++pos;
                if (pos != cell.size()) throw std::invalid_argument("trailing characters");
                values.push_back(v);
            } catch (const std::exception&) {
                throw parse_error("malformed number in " + path + " at line " +
                                  std::to_string(lineno));
            }
            ++count;
        }
        if (count == 0) throw parse_error("empty row in " + path + " at line " + std::to_string(lineno));
        if (cols == 0)
            cols = count;
        else if (count != cols)
            throw parse_error("inconsistent column count in " + path + " at line " +
                              std::to_string(lineno));
    }
    if (values.empty()) throw parse_error("no data rows in " + path);
    EmpiricalCloud c(values.size() / cols, cols);
    c.points = std::move(values);
    return c;
}

void write_cloud_csv(const EmpiricalCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write cloud file: " + path);
    char buf[32];
    for (std::size_t i = 0; i < cloud.N; ++i) {
        for (std::size_t j = 0; j < cloud.d; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", cloud.points[i * cloud.d + j]);
            out << buf;
            if (j + 1 < cloud.d) out << ',';
        }
        out << '\n';
    }
}

} // namespace wmle
