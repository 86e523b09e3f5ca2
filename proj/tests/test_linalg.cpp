#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wmle/linalg.hpp"
#include "wmle/rng.hpp"

using namespace wmle;

namespace {

SymMatrix sym2(double a, double b, double d) {
    SymMatrix m(2);
    m.at(0, 0) = a;
    m.at(0, 1) = b;
    m.at(1, 1) = d;
    return m;
}

double residual_max(const Matrix& a, const SymMatrix& b) {
    double r = 0.0;
    for (std::size_t i = 0; i < b.dim(); ++i)
        for (std::size_t j = 0; j < b.dim(); ++j) r = std::max(r, std::abs(a(i, j) - b(i, j)));
    return r;
}

SymMatrix random_psd(RandomStream& s, std::size_t dim) {
    Matrix a(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) a(i, j) = s.next_normal();
    SymMatrix m = SymMatrix::from_dense(a * a.transposed());
    for (std::size_t i = 0; i < dim; ++i) m.at(i, i) += 1e-6;
    return m;
}

} // namespace

TEST_CASE("cholesky on worked examples") {
    const Matrix l_id = cholesky(SymMatrix::identity(3));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(l_id(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));

    // hand factorization: [[4,2],[2,2]] = [[2,0],[1,1]] [[2,1],[0,1]]
    const Matrix l = cholesky(sym2(4.0, 2.0, 2.0));
    CHECK(l(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(l(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(l(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
    const Matrix prod = l * l.transposed();
    CHECK(residual_max(prod, sym2(4.0, 2.0, 2.0)) < 1e-10);

    CHECK_THROWS_AS(cholesky(sym2(1.0, 2.0, 1.0)), not_psd_error);
}

TEST_CASE("psd square roots on diagonal and identity inputs") {
    const SymMatrix r = sqrt_psd(SymMatrix::diagonal({4.0, 9.0}));
    CHECK(r(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r(1, 1) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(std::abs(r(0, 1)) < 1e-12);

    const SymMatrix ri = inv_sqrt_psd(SymMatrix::identity(4));
    for (std::size_t i = 0; i < 4; ++i) CHECK(ri(i, i) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inverse root of the canonical-normal information matrix") {
    // closed form root at (eta1, eta2) = (0.5, 1):
    // sqrt(2/alpha) [[e1^(3/2)(1+sqrt(e1)), e1 e2], [e1 e2, e1(1+sqrt(e1)) + e2^2]]
    const double e1 = 0.5, e2 = 1.0;
    const double alpha = e1 * (1.0 + std::sqrt(e1)) * (1.0 + std::sqrt(e1)) + e2 * e2;
    const double f = std::sqrt(2.0 / alpha);
    const double v11 = f * std::pow(e1, 1.5) * (1.0 + std::sqrt(e1));
    const double v12 = f * e1 * e2;
    const double v22 = f * (e1 * (1.0 + std::sqrt(e1)) + e2 * e2);

    const SymMatrix info = sym2(6.0, -2.0, 1.0);
    const SymMatrix v = inv_sqrt_psd(info);
    CHECK(v(0, 0) == doctest::Approx(v11).epsilon(1e-10));
    CHECK(v(0, 1) == doctest::Approx(v12).epsilon(1e-10));
    CHECK(v(1, 1) == doctest::Approx(v22).epsilon(1e-10));
    CHECK(v(0, 0) == doctest::Approx(0.54452).epsilon(1e-4));
    CHECK(v(0, 1) == doctest::Approx(0.45109).epsilon(1e-4));
    CHECK(v(1, 1) == doctest::Approx(1.67226).epsilon(1e-4));

    // S * info * S = identity
    const Matrix w = v.to_dense() * info.to_dense() * v.to_dense();
    CHECK(residual_max(w, SymMatrix::identity(2)) < 1e-9);
}

TEST_CASE("error paths of the spectral maps") {
    CHECK_THROWS_AS(sqrt_psd(sym2(1.0, 2.0, 1.0)), not_psd_error);
    CHECK_THROWS_AS(inv_sqrt_psd(sym2(1.0, 1.0, 1.0)), singular_error);
}

TEST_CASE("matrix norms") {
    const SymMatrix m = sym2(3.0, 4.0, 0.0);
    CHECK(frobenius_norm(m) == doctest::Approx(std::sqrt(41.0)).epsilon(1e-14));
    CHECK(max_abs_norm(m) == 4.0);

    for (std::size_t d = 1; d <= 6; ++d) {
        CHECK(frobenius_norm(SymMatrix::identity(d)) ==
              doctest::Approx(std::sqrt(static_cast<double>(d))).epsilon(1e-14));
        CHECK(max_abs_norm(SymMatrix::identity(d)) == 1.0);
    }
    CHECK(frobenius_norm(SymMatrix(3)) == 0.0);
    CHECK(max_abs_norm(SymMatrix(3)) == 0.0);
}

TEST_CASE("square-root reconstruction over random PSD matrices") {
    RandomStream s = derive_stream(101, 0);
    for (std::size_t dim = 1; dim <= 10; ++dim) {
        for (int rep = 0; rep < 10; ++rep) {
            const SymMatrix m = random_psd(s, dim);
            const SymMatrix r = sqrt_psd(m);
            CHECK(residual_max(r.to_dense() * r.to_dense(), m) < 1e-9);

            const SymMatrix ri = inv_sqrt_psd(m);
            const Matrix w = ri.to_dense() * m.to_dense() * ri.to_dense();
            CHECK(residual_max(w, SymMatrix::identity(dim)) < 1e-9);
        }
    }
}

TEST_CASE("eigendecomposition reconstructs its input") {
    RandomStream s = derive_stream(101, 1);
    for (std::size_t dim = 2; dim <= 8; ++dim) {
        const SymMatrix m = random_psd(s, dim);
        const EigenDecomposition ed = jacobi_eigen(m);
        double radius = 0.0;
        for (double v : ed.values) radius = std::max(radius, std::abs(v));
        // Q diag(values) Q^T
        Matrix lam(dim, dim);
        for (std::size_t i = 0; i < dim; ++i) lam(i, i) = ed.values[i];
        const Matrix rec = ed.vectors * lam * ed.vectors.transposed();
        CHECK(residual_max(rec, m) <= 1e-10 * std::max(radius, 1.0));
        // ascending order
        for (std::size_t i = 1; i < dim; ++i) CHECK(ed.values[i] >= ed.values[i - 1]);
    }
}
