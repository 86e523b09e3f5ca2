#include "wmle/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wmle {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw contract_error("matrix product: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

std::vector<double> operator*(const Matrix& a, const std::vector<double>& x) {
    if (a.cols() != x.size()) throw contract_error("matrix-vector product: size mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

SymMatrix SymMatrix::identity(std::size_t dim) {
    SymMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
}

SymMatrix SymMatrix::diagonal(const std::vector<double>& d) {
    SymMatrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m.at(i, i) = d[i];
    return m;
}

SymMatrix SymMatrix::from_dense(const Matrix& a) {
    if (a.rows() != a.cols()) throw contract_error("from_dense: matrix not square");
    SymMatrix m(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i; j < a.cols(); ++j) m.at(i, j) = 0.5 * (a(i, j) + a(j, i));
    return m;
}

Matrix SymMatrix::to_dense() const {
    Matrix a(dim_, dim_);
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j) a(i, j) = (*this)(i, j);
    return a;
}

std::vector<double> SymMatrix::operator*(const std::vector<double>& x) const {
    if (x.size() != dim_) throw contract_error("SymMatrix product: size mismatch");
    std::vector<double> y(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) s += (*this)(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

Matrix cholesky(const SymMatrix& m) {
    const std::size_t n = m.dim();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(m(i, i)));
    const double tol = 1e-12 * std::max(max_diag, 1.0);

    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d < -tol) throw not_psd_error("cholesky: negative pivot beyond tolerance");
        if (d <= tol) {
            // zero pivot: PSD boundary, whole column collapses
            l(j, j) = 0.0;
            continue;
        }
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

EigenDecomposition jacobi_eigen(const SymMatrix& m) {
    const std::size_t n = m.dim();
    Matrix a = m.to_dense();
    Matrix q = Matrix::identity(n);

    const double fro0 = frobenius_norm(m);
    const double threshold = 1e-14 * std::max(fro0, 1e-300);

    auto offdiag = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
        return std::sqrt(2.0 * s);
    };

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps && offdiag() > threshold; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t qi = p + 1; qi < n; ++qi) {
                const double apq = a(p, qi);
                if (apq == 0.0) continue;
                const double app = a(p, p);
                const double aqq = a(qi, qi);
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                             : 1.0 / (tau - std::sqrt(1.0 + tau * tau)));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, qi);
                    a(k, p) = c * akp - s * akq;
                    a(k, qi) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(qi, k);
                    a(p, k) = c * apk - s * aqk;
                    a(qi, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double qkp = q(k, p);
                    const double qkq = q(k, qi);
                    q(k, p) = c * qkp - s * qkq;
                    q(k, qi) = s * qkp + c * qkq;
                }
            }
        }
    }

    EigenDecomposition ed;
    ed.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) ed.values[i] = a(i, i);

    // sort ascending, permuting eigenvector columns to match
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return ed.values[i] < ed.values[j]; });
    std::vector<double> sorted(n);
    Matrix vecs(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        sorted[j] = ed.values[order[j]];
        for (std::size_t i = 0; i < n; ++i) vecs(i, j) = q(i, order[j]);
    }
    ed.values = std::move(sorted);
    ed.vectors = std::move(vecs);
    return ed;
}

namespace {

SymMatrix spectral_map(const SymMatrix& m, bool inverse) {
    const std::size_t n = m.dim();
    EigenDecomposition ed = jacobi_eigen(m);
    double radius = 0.0;
    for (double v : ed.values) radius = std::max(radius, std::abs(v));
    const double clamp_tol = 1e-12 * std::max(radius, 1e-300);

    std::vector<double> mapped(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = ed.values[i];
        if (v < -clamp_tol) throw not_psd_error("sqrt_psd: matrix is indefinite");
        if (v < 0.0) v = 0.0;
        if (inverse) {
            if (v <= clamp_tol)
                throw singular_error("inv_sqrt_psd: matrix is singular to working precision");
            mapped[i] = 1.0 / std::sqrt(v);
        } else {
            mapped[i] = std::sqrt(v);
        }
    }

    // S = Q diag(mapped) Q^T, filled symmetrically
    SymMatrix s(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                acc += ed.vectors(i, k) * mapped[k] * ed.vectors(j, k);
            s.at(i, j) = acc;
        }
    return s;
}

} // namespace

SymMatrix sqrt_psd(const SymMatrix& m) { return spectral_map(m, false); }

SymMatrix inv_sqrt_psd(const SymMatrix& m) { return spectral_map(m, true); }

double frobenius_norm(const SymMatrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.dim(); ++i)
        for (std::size_t j = 0; j < m.dim(); ++j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
}

double max_abs_norm(const SymMatrix& m) {
    double mx = 0.0;
    for (std::size_t i = 0; i < m.dim(); ++i)
        for (std::size_t j = i; j < m.dim(); ++j) mx = std::max(mx, std::abs(m(i, j)));
    return mx;
}

} // namespace wmle
