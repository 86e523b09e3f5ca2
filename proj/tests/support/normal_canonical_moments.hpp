#pragma once

// Exact moments of the canonical-normal MLE, used as the independent oracle
// for the second-moment bound table. Everything reduces to
//   eta1hat = (n / (2 sigma^2)) V,   eta2hat = (n / sigma^2) U V,
// with U ~ N(mu, sigma^2/n) and V ~ Inv-chi-square(n-1) independent.

#include <cmath>
#include <cstdint>

#include "wmle/rng.hpp"

namespace wmle::testsupport {

struct NormalCanonicalMoments {
    double eta1, eta2;
    std::uint64_t n;
    double mu, s2, c1, c2; // c1, c2 scale V and UV into the eta-hats

    NormalCanonicalMoments(double e1, double e2, std::uint64_t n_) : eta1(e1), eta2(e2), n(n_) {
        s2 = 1.0 / (2.0 * eta1);
        mu = eta2 / (2.0 * eta1);
        c1 = static_cast<double>(n) / (2.0 * s2);
        c2 = static_cast<double>(n) / s2;
    }

    double ev(long k) const { return inv_chi2_moment(static_cast<long>(n), k); }

    double eu(int k) const {
        const double v = s2 / static_cast<double>(n);
        switch (k) {
            case 0: return 1.0;
            case 1: return mu;
            case 2: return mu * mu + v;
            case 3: return mu * mu * mu + 3.0 * mu * v;
            case 4: return mu * mu * mu * mu + 6.0 * mu * mu * v + 3.0 * v * v;
            default: return 0.0;
        }
    }

    // folded-normal mean of U
    double eu_abs() const {
        const double sd = std::sqrt(s2 / static_cast<double>(n));
        const double z = mu / sd;
        const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
        const double upper_tail = 0.5 * std::erfc(z / std::sqrt(2.0)); // P(Z > z)
        return mu * (1.0 - 2.0 * upper_tail) + 2.0 * sd * phi;
    }

    double e_eta1(int k) const { return std::pow(c1, k) * ev(k); }
    double e_eta2(int k) const { return std::pow(c2, k) * eu(k) * ev(k); }
    double e_eta1_inv(int k) const { return std::pow(c1, -k) * ev(-k); }

    double e_q1_sq() const { return e_eta1(2) - 2.0 * eta1 * e_eta1(1) + eta1 * eta1; }

    double e_q1_4() const {
        const double t = eta1;
        return e_eta1(4) - 4.0 * t * e_eta1(3) + 6.0 * t * t * e_eta1(2) -
               4.0 * t * t * t * e_eta1(1) + t * t * t * t;
    }

    double e_q2_sq() const { return e_eta2(2) - 2.0 * eta2 * e_eta2(1) + eta2 * eta2; }

    double e_q2_4() const {
        const double t = eta2;
        return e_eta2(4) - 4.0 * t * e_eta2(3) + 6.0 * t * t * e_eta2(2) -
               4.0 * t * t * t * e_eta2(1) + t * t * t * t;
    }

    double e_q1sq_q2sq() const {
        const double a2 = c1 * c1, a1 = -2.0 * eta1 * c1, a0 = eta1 * eta1;
        // (a2 V^2 + a1 V + a0)(b2 U^2 V^2 + b1 U V + b0), b-coefs below
        const double b2 = c2 * c2, b1 = -2.0 * eta2 * c2, b0 = eta2 * eta2;
        double acc = 0.0;
        const double a[3] = {a0, a1, a2};
        const double b[3] = {b0, b1, b2};
        for (int i = 0; i <= 2; ++i)
            for (int j = 0; j <= 2; ++j) acc += a[i] * b[j] * eu(j) * ev(i + j);
        return acc;
    }

    double e_abs_eta2_over_eta1_cubed() const {
        return (c2 / std::pow(c1, 3.0)) * eu_abs() * ev(-2);
    }

    double e_eta2sq_over_eta1_6() const {
        return (c2 * c2 / std::pow(c1, 6.0)) * eu(2) * ev(-4);
    }

    double e_eta2_4_over_eta1_8() const {
        return (std::pow(c2, 4.0) / std::pow(c1, 8.0)) * eu(4) * ev(-4);
    }
};

} // namespace wmle::testsupport
