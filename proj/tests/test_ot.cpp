#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "wmle/ot.hpp"
#include "wmle/rng.hpp"

using namespace wmle;

namespace {

EmpiricalCloud random_cloud(RandomStream& s, std::size_t n, std::size_t d) {
    EmpiricalCloud c(n, d);
    for (auto& v : c.points) v = s.next_unit();
    return c;
}

bool is_bijection(const std::vector<std::uint32_t>& a) {
    std::vector<char> seen(a.size(), 0);
    for (auto v : a) {
        if (v >= a.size() || seen[v]) return false;
        seen[v] = 1;
    }
    return true;
}

} // namespace

TEST_CASE("1-D sorted coupling on worked examples") {
    CHECK(w_p_1d({0.0, 1.0}, {0.0, 1.0}, 1.0).wp_value == 0.0);
    CHECK(w_p_1d({0.0, 2.0}, {1.0, 3.0}, 1.0).wp_value == doctest::Approx(1.0).epsilon(1e-15));
    // {0,0} vs {0,2} at p=2: ((0+4)/2)^(1/2) = sqrt(2), against the factorial oracle
    const double direct = w_p_1d({0.0, 0.0}, {0.0, 2.0}, 2.0).wp_value;
    CHECK(direct == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    const auto brute = brute_force_wp(EmpiricalCloud::from_column({0.0, 0.0}),
                                      EmpiricalCloud::from_column({0.0, 2.0}), 2.0);
    CHECK(direct == doctest::Approx(brute.wp_value).epsilon(1e-15));

    CHECK_THROWS_AS(w_p_1d({0.0}, {0.0, 1.0}, 1.0), contract_error);
}

TEST_CASE("single-point clouds pay the lone pairing cost") {
    EmpiricalCloud x(1, 2), y(1, 2);
    x.points = {0.0, 0.0};
    y.points = {3.0, 4.0};
    const auto r = brute_force_wp(x, y, 1.0);
    CHECK(r.total_cost == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(r.wp_value == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(r.assignment == std::vector<std::uint32_t>{0});
}

TEST_CASE("crossing pairs resolve to the monotone matching") {
    const auto r = brute_force_wp(EmpiricalCloud::from_column({0.0, 1.0}),
                                  EmpiricalCloud::from_column({1.0, 0.0}), 1.0);
    CHECK(r.wp_value == 0.0);
    CHECK(r.assignment[0] == 1);
    CHECK(r.assignment[1] == 0);
}

TEST_CASE("exact matching equals the factorial oracle on 200 seeded instances") {
    RandomStream s = derive_stream(31337, 0);
    int done = 0;
    while (done < 200) {
        const std::size_t n = 2 + static_cast<std::size_t>(s.next_u64() % 6); // 2..7
        const std::size_t d = 1 + static_cast<std::size_t>(s.next_u64() % 3); // 1..3
        const double p = (done % 2 == 0) ? 1.0 : 2.0;
        const EmpiricalCloud x = random_cloud(s, n, d);
        const EmpiricalCloud y = random_cloud(s, n, d);
        const TransportResult exact = w_p_exact(x, y, p);
        const TransportResult brute = brute_force_wp(x, y, p);
        REQUIRE(exact.total_cost == brute.total_cost); // exact cost equality
        CHECK(is_bijection(exact.assignment));
        ++done;
    }
}

TEST_CASE("identical clouds transport for free") {
    RandomStream s = derive_stream(31337, 1);
    const EmpiricalCloud x = random_cloud(s, 12, 2);
    const auto r = w_p_exact(x, x, 1.0);
    CHECK(r.wp_value == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r.gap == 0.0);
}

TEST_CASE("three points in the plane at p=1") {
    EmpiricalCloud x(3, 2), y(3, 2);
    const double xs[6] = {0, 0, 1, 0, 0, 1};
    const double ys[6] = {2, 0, 1, 1, 0, 0};
    std::copy(xs, xs + 6, x.points.begin());
    std::copy(ys, ys + 6, y.points.begin());
    const auto exact = w_p_exact(x, y, 1.0);
    const auto brute = brute_force_wp(x, y, 1.0);
    CHECK(exact.total_cost == brute.total_cost);
}

TEST_CASE("embedded 1-D clouds match the sorted coupling") {
    RandomStream s = derive_stream(31337, 2);
    std::vector<double> xv(40), yv(40);
    for (auto& v : xv) v = s.next_normal();
    for (auto& v : yv) v = s.next_normal();
    for (double p : {1.0, 2.0}) {
        const double sorted = w_p_1d(xv, yv, p).wp_value;
        const double exact = w_p_exact(EmpiricalCloud::from_column(xv),
                                       EmpiricalCloud::from_column(yv), p)
                                 .wp_value;
        CHECK(std::abs(sorted - exact) <= 1e-12);
    }
}

TEST_CASE("capacity gates") {
    RandomStream s = derive_stream(31337, 3);
    const EmpiricalCloud x = random_cloud(s, 10, 1);
    const EmpiricalCloud y = random_cloud(s, 10, 1);
    CHECK_THROWS_AS(w_p_exact(x, y, 1.0, 8), capacity_error);
    CHECK_THROWS_AS(brute_force_wp(x, y, 1.0), capacity_error);
}

TEST_CASE("metric axioms on seeded instances") {
    RandomStream s = derive_stream(31337, 4);
    for (int t = 0; t < 10; ++t) {
        const std::size_t n = 4 + static_cast<std::size_t>(s.next_u64() % 12);
        const EmpiricalCloud x = random_cloud(s, n, 2);
        const EmpiricalCloud y = random_cloud(s, n, 2);
        const EmpiricalCloud z = random_cloud(s, n, 2);
        const double dxy = w_p_exact(x, y, 2.0).wp_value;
        const double dyx = w_p_exact(y, x, 2.0).wp_value;
        const double dxz = w_p_exact(x, z, 2.0).wp_value;
        const double dyz = w_p_exact(y, z, 2.0).wp_value;
        CHECK(dxy == doctest::Approx(dyx).epsilon(1e-12));
        CHECK(w_p_exact(x, x, 2.0).wp_value == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(dxz <= dxy + dyz + 1e-9);
    }
}

TEST_CASE("W1 <= W2 and translation equivariance") {
    RandomStream s = derive_stream(31337, 5);
    for (int t = 0; t < 10; ++t) {
        const std::size_t n = 5 + static_cast<std::size_t>(s.next_u64() % 15);
        const EmpiricalCloud x = random_cloud(s, n, 3);
        const EmpiricalCloud y = random_cloud(s, n, 3);
        const double w1 = w_p_exact(x, y, 1.0).wp_value;
        const double w2 = w_p_exact(x, y, 2.0).wp_value;
        CHECK(w1 <= w2 + 1e-12);

        EmpiricalCloud xs = x, ys = y;
        const double shift[3] = {1.5, -0.25, 3.0};
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                xs.at(i, j) += shift[j];
                ys.at(i, j) += shift[j];
            }
        CHECK(std::abs(w_p_exact(xs, ys, 1.0).wp_value - w1) <= 1e-12);
    }
}

TEST_CASE("entropic solver against the exact oracle") {
    RandomStream s = derive_stream(31337, 6);
    const EmpiricalCloud x = random_cloud(s, 6, 2);
    const EmpiricalCloud y = random_cloud(s, 6, 2);
    const double exact = w_p_exact(x, y, 1.0).wp_value;

    // mild regularization reaches the marginal tolerance quickly
    const double mild = 0.2 * median_pairwise_cost(x, y, 1.0);
    CHECK(w_p_entropic(x, y, 1.0, mild, 5000).converged);

    const double eps = 0.01 * median_pairwise_cost(x, y, 1.0);
    const TransportResult ent = w_p_entropic(x, y, 1.0, eps, 5000);
    REQUIRE(ent.gap.has_value());
    CHECK(is_bijection(ent.assignment));
    // the rounded coupling upper-bounds the optimum, within the certified gap
    CHECK(ent.wp_value >= exact - 1e-12);
    CHECK(std::abs(ent.wp_value - exact) <= *ent.gap + 1e-12);

    // a 10x smaller epsilon tightens the value toward the exact optimum
    const TransportResult tight = w_p_entropic(x, y, 1.0, eps / 10.0, 20000);
    CHECK(std::abs(tight.wp_value - exact) <= std::abs(ent.wp_value - exact) + 1e-12);
}

TEST_CASE("entropic on identical clouds stays near zero") {
    RandomStream s = derive_stream(31337, 7);
    const EmpiricalCloud x = random_cloud(s, 16, 2);
    const double eps = 0.01 * (median_pairwise_cost(x, x, 1.0) + 0.05);
    const TransportResult r = w_p_entropic(x, x, 1.0, eps, 5000);
    REQUIRE(r.gap.has_value());
    CHECK(r.wp_value <= *r.gap + 1e-9); // optimum 0, slack certified by the gap
}

TEST_CASE("cloud CSV round trip and parse errors") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "wmle_ot_test";
    fs::create_directories(dir);
    const std::string path = (dir / "cloud.csv").string();

    RandomStream s = derive_stream(31337, 8);
    const EmpiricalCloud x = random_cloud(s, 9, 3);
    write_cloud_csv(x, path);
    const EmpiricalCloud back = read_cloud_csv(path);
    REQUIRE(back.N == x.N);
    REQUIRE(back.d == x.d);
    for (std::size_t i = 0; i < x.points.size(); ++i) CHECK(back.points[i] == x.points[i]);

    const std::string bad = (dir / "bad.csv").string();
    {
        std::FILE* f = std::fopen(bad.c_str(), "w");
        std::fputs("1.0,2.0\n1.0,oops\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_WITH_AS(read_cloud_csv(bad), doctest::Contains("line 2"), parse_error);
    fs::remove_all(dir);
}
