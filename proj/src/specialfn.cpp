#include "wmle/specialfn.hpp"

#include <cmath>

namespace wmle {

namespace {

// Asymptotic series, valid for y >= 16.
double digamma_asymptotic(double y) {
    const double y2 = 1.0 / (y * y);
    // B_{2j}/(2j) coefficients
    double series = y2 * (1.0 / 12.0 +
                    y2 * (-1.0 / 120.0 +
                    y2 * (1.0 / 252.0 +
                    y2 * (-1.0 / 240.0 +
                    y2 * (1.0 / 132.0 +
                    y2 * (-691.0 / 32760.0 +
                    y2 * (1.0 / 12.0)))))));
    return std::log(y) - 0.5 / y - series;
}

// Euler-Maclaurin tail of sum_{k>=0} (y+k)^{-s}, s = m+1 >= 2, for y >= 32.
double polygamma_tail(double y, int m) {
    const double s = m + 1.0;
    const double ys = std::pow(y, -s);
    double t = std::pow(y, -(s - 1.0)) / (s - 1.0);
    t += 0.5 * ys;
    t += s * ys / y / 12.0;
    t -= s * (s + 1.0) * (s + 2.0) * ys / (y * y * y) / 720.0;
    t += s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * ys / (y * y * y * y * y) / 30240.0;
    return t;
}

} // namespace

double digamma(double x) {
    if (!(x > 0.0)) throw domain_error("digamma: requires x > 0");
    double acc = 0.0;
    while (x < 16.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    return acc + digamma_asymptotic(x);
}

double polygamma(int m, double x) {
    if (m < 0 || m > 3) throw domain_error("polygamma: order must be in {0,1,2,3}");
    if (!(x > 0.0)) throw domain_error("polygamma: requires x > 0");
    if (m == 0) return digamma(x);

    // explicit partial sum up to y >= 32, Euler-Maclaurin correction for the rest
    double sum = 0.0;
    double y = x;
    while (y < 32.0) {
        sum += std::pow(y, -(m + 1.0));
        y += 1.0;
    }
    sum += polygamma_tail(y, m);

    double factorial = 1.0;
    for (int j = 2; j <= m; ++j) factorial *= j;
    const double sign = (m % 2 == 1) ? 1.0 : -1.0;
    return sign * factorial * sum;
}

double inv_digamma(double y) {
    // bracket endpoints: 1/log(1 + e^{-y}) < psi^{-1}(y) < e^y + 1/2
    double lo;
    if (y < -30.0) {
        lo = 1.0 / (-y + std::log1p(std::exp(y)));
    } else {
        lo = 1.0 / std::log1p(std::exp(-y));
    }
    if (y > 690.0) return std::exp(y) + 0.5; // bracket width ~ e^{-y}; hi is the answer
    double hi = std::exp(y) + 0.5;
    // the true width ~ e^{-y}/12 can collapse below one ulp of e^y
    if (!(lo < hi)) return hi;

    double x = 0.5 * (lo + hi);
    const double tol = 1e-12 * std::max(1.0, std::abs(y));
    for (int it = 0; it < 64; ++it) {
        const double f = digamma(x) - y;
        if (std::abs(f) <= tol) break;
        if (f > 0.0)
            hi = x;
        else
            lo = x;
        const double step = f / polygamma(1, x);
        double next = x - step;
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
        if (next == x) break;
        x = next;
    }
    return x;
}

} // namespace wmle
