#include "wmle/rng.hpp"

#include <cmath>

#include "wmle/linalg.hpp"

namespace wmle {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_seed_(master_seed), stream_index_(stream_index) {
    const std::uint64_t root = mix64(master_seed ^ kGolden);
    state_ = mix64(root + (stream_index + 1) * 0xD1B54A32D192ED03ULL);
}

std::uint64_t RandomStream::next_u64() {
    state_ += kGolden;
    return mix64(state_);
}

double RandomStream::next_unit() {
    // 53-bit mantissa, shifted into (0, 1].
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RandomStream::next_normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double v1 = 0.0, v2 = 0.0, s = 0.0;
    do {
        v1 = 2.0 * next_unit() - 1.0;
        v2 = 2.0 * next_unit() - 1.0;
        s = v1 * v1 + v2 * v2;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    cached_normal_ = v2 * f;
    has_cached_normal_ = true;
    return v1 * f;
}

RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t stream_index) {
    return RandomStream(master_seed, stream_index);
}

std::vector<double> sample_std_normal(RandomStream& stream, std::size_t count) {
    std::vector<double> out(count);
    for (auto& v : out) v = stream.next_normal();
    return out;
}

namespace {

// Marsaglia-Tsang for shape >= 1; draw count depends only on the shape.
double std_gamma(RandomStream& stream, double shape) {
    if (shape < 1.0) {
        const double g = std_gamma(stream, shape + 1.0);
        const double u = stream.next_unit();
        return g * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = stream.next_normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = stream.next_unit();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

} // namespace

double sample_gamma_one(RandomStream& stream, double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw domain_error("sample_gamma: shape and rate must be positive");
    return std_gamma(stream, shape) / rate;
}

std::vector<double> sample_gamma(RandomStream& stream, double shape, double rate,
                                 std::size_t count) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw domain_error("sample_gamma: shape and rate must be positive");
    std::vector<double> out(count);
    for (auto& v : out) v = std_gamma(stream, shape) / rate;
    return out;
}

std::vector<double> sample_inv_gamma(RandomStream& stream, double shape, double scale,
                                     std::size_t count) {
    auto out = sample_gamma(stream, shape, scale, count);
    for (auto& v : out) v = 1.0 / v;
    return out;
}

std::vector<double> sample_exponential(RandomStream& stream, double rate, std::size_t count) {
    return sample_gamma(stream, 1.0, rate, count);
}

SampleMatrix sample_mvn(RandomStream& stream, const std::vector<double>& mean,
                        const SymMatrix& covariance, std::size_t count) {
    const std::size_t p = mean.size();
    if (covariance.dim() != p) throw contract_error("sample_mvn: dimension mismatch");
    const Matrix chol = cholesky(covariance);
    SampleMatrix out(count, p);
    std::vector<double> z(p);
    for (std::size_t i = 0; i < count; ++i) {
        for (auto& v : z) v = stream.next_normal();
        for (std::size_t r = 0; r < p; ++r) {
            double acc = mean[r];
            for (std::size_t c = 0; c <= r; ++c) acc += chol(r, c) * z[c];
            out(i, r) = acc;
        }
    }
    return out;
}

double inv_chi2_moment(long n, long k) {
    if (k == 0) {
        if (n <= 1) throw domain_error("inv_chi2_moment: requires n > 1");
        return 1.0;
    }
    if (k > 0) {
        if (n <= 2 * k + 1)
            throw domain_error("inv_chi2_moment: E[V^k] requires n > 2k+1");
        double denom = 1.0;
        for (long j = 1; j <= k; ++j) denom *= static_cast<double>(n - 2 * j - 1);
        return 1.0 / denom;
    }
    if (n <= 1) throw domain_error("inv_chi2_moment: requires n > 1");
    const long m = -k;
    double prod = 1.0;
    for (long j = 1; j <= m; ++j) prod *= static_cast<double>(n - 1 + 2 * (j - 1));
    return prod;
}

double exp_abs_third_central(double rate) {
    if (!(rate > 0.0)) throw domain_error("exp_abs_third_central: rate must be positive");
    const double r3 = rate * rate * rate;
    return (12.0 / std::exp(1.0) - 2.0) / r3;
}

} // namespace wmle
