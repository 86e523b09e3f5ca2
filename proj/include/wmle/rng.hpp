#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "wmle/errors.hpp"

namespace wmle {

/// n observations of dimension t, row-major.
struct SampleMatrix {
    std::size_t n = 0;
    std::size_t t = 0;
    std::vector<double> values;

    SampleMatrix() = default;
    SampleMatrix(std::size_t n_, std::size_t t_) : n(n_), t(t_), values(n_ * t_, 0.0) {}

    double operator()(std::size_t i, std::size_t j) const { return values[i * t + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values[i * t + j]; }
    const double* row(std::size_t i) const { return values.data() + i * t; }
};

/// Counter-based splittable generator (SplitMix64 core). Streams with the same
/// (master_seed, stream_index) replay the same sequence; distinct indices give
/// statistically independent streams.
///
/// Single-owner mutable state: a stream may be handed to another thread but
/// never shared concurrently.
class RandomStream {
  public:
    RandomStream() : RandomStream(0, 0) {}
    RandomStream(std::uint64_t master_seed, std::uint64_t stream_index);

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_index() const { return stream_index_; }

    std::uint64_t next_u64();

    /// Uniform draw in (0, 1].
    double next_unit();

    /// Standard normal via the polar method; the second variate of each
    /// accepted pair is cached.
    double next_normal();

  private:
    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    std::uint64_t state_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

/// Deterministic stream construction; repeated calls with identical inputs
/// yield identical streams.
RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t stream_index);

std::vector<double> sample_std_normal(RandomStream& stream, std::size_t count);

/// i.i.d. Gamma(shape, rate) draws, mean = shape/rate. The underlying standard
/// draw depends only on the shape, so streams are scale-coupled across rates.
/// Marsaglia-Tsang squeeze, with the shape<1 boost.
std::vector<double> sample_gamma(RandomStream& stream, double shape, double rate,
                                 std::size_t count);
double sample_gamma_one(RandomStream& stream, double shape, double rate);

/// Reciprocal-gamma draws: X ~ Inv-Gamma(shape, scale) with density
/// scale^shape/Gamma(shape) x^{-shape-1} exp(-scale/x).
std::vector<double> sample_inv_gamma(RandomStream& stream, double shape, double scale,
                                     std::size_t count);

/// Exponential(rate) draws (the shape = 1 gamma special case).
std::vector<double> sample_exponential(RandomStream& stream, double rate, std::size_t count);

class SymMatrix;

/// Rows are i.i.d. MVN(mean, covariance) via mean + L z with L the Cholesky
/// factor of the covariance.
SampleMatrix sample_mvn(RandomStream& stream, const std::vector<double>& mean,
                        const SymMatrix& covariance, std::size_t count);

/// E[V^k] for V ~ Inv-chi-square with n-1 degrees of freedom:
///   k > 0: 1/((n-3)(n-5)...(n-2k-1)), requires n > 2k+1;
///   k < 0: (n-1)(n+1)...(n+2|k|-3), requires n > 1;
///   k = 0: 1.
double inv_chi2_moment(long n, long k);

/// Exact E|X - 1/rate|^3 for X ~ Exp(rate): (12/e - 2)/rate^3.
double exp_abs_third_central(double rate);

} // namespace wmle
