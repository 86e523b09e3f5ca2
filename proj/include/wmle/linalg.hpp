#pragma once

#include <cstddef>
#include <vector>

#include "wmle/errors.hpp"

namespace wmle {

/// Minimal dense row-major matrix.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), v_(rows * cols, 0.0) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }

    Matrix transposed() const;

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> v_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
std::vector<double> operator*(const Matrix& a, const std::vector<double>& x);

/// Symmetric matrix with the upper triangle as authoritative storage, so
/// symmetry is exact by construction.
class SymMatrix {
  public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t dim) : dim_(dim), tri_(dim * (dim + 1) / 2, 0.0) {}

    static SymMatrix identity(std::size_t dim);
    static SymMatrix diagonal(const std::vector<double>& d);
    /// Symmetrizes (averages a_ij and a_ji) when the input is only
    /// numerically symmetric.
    static SymMatrix from_dense(const Matrix& a);

    std::size_t dim() const { return dim_; }
    double operator()(std::size_t i, std::size_t j) const { return tri_[index(i, j)]; }
    double& at(std::size_t i, std::size_t j) { return tri_[index(i, j)]; }

    Matrix to_dense() const;
    std::vector<double> operator*(const std::vector<double>& x) const;

  private:
    std::size_t index(std::size_t i, std::size_t j) const {
        if (i > j) std::swap(i, j);
        // row-major upper triangle
        return i * dim_ - i * (i + 1) / 2 + j;
    }

    std::size_t dim_ = 0;
    std::vector<double> tri_;
};

/// Lower-triangular Cholesky factor; pivot tolerance 1e-12 x max diagonal.
/// PSD inputs with (numerically) zero pivots are accepted; a negative pivot
/// beyond the tolerance raises not_psd_error.
Matrix cholesky(const SymMatrix& m);

struct EigenDecomposition {
    std::vector<double> values;  // ascending
    Matrix vectors;              // columns are eigenvectors
};

/// Cyclic Jacobi rotations; off-diagonal convergence threshold
/// 1e-14 x initial Frobenius norm.
EigenDecomposition jacobi_eigen(const SymMatrix& m);

/// Symmetric PSD square root via eigendecomposition. Eigenvalues in
/// [-1e-12 x spectral radius, 0) are clamped to zero; smaller ones raise
/// not_psd_error.
SymMatrix sqrt_psd(const SymMatrix& m);

/// Inverse square root; additionally requires the smallest eigenvalue to
/// exceed 1e-12 x spectral radius (else singular_error).
SymMatrix inv_sqrt_psd(const SymMatrix& m);

double frobenius_norm(const SymMatrix& m);
double max_abs_norm(const SymMatrix& m);

} // namespace wmle
