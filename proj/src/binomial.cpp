#include "dynet/binomial.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dynet/errors.hpp"

namespace dynet {

namespace {

// Continued fraction for I_x(a, b) (modified Lentz); valid for x < (a+1)/(a+b+2).
double beta_continued_fraction(double a, double b, double x)
{
    constexpr int kMaxIterations = 200000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny)
        d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny)
            d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny)
            d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps)
            return h;
    }
    throw NumericalError("incomplete beta continued fraction did not converge");
}

// I_x(a, b) with y = 1 - x supplied separately to avoid cancellation.
double incomplete_beta(double a, double b, double x, double y)
{
    if (x <= 0.0)
        return 0.0;
    if (y <= 0.0)
        return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b)
                             + a * std::log(x) + b * std::log(y);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

} // namespace

double log_binomial_coefficient(std::int64_t k, std::int64_t i)
{
    return std::lgamma(static_cast<double>(k) + 1.0) - std::lgamma(static_cast<double>(i) + 1.0)
           - std::lgamma(static_cast<double>(k - i) + 1.0);
}

double binomial_pmf(std::int64_t k, double q, std::int64_t i)
{
    if (k < 0)
        throw std::invalid_argument("binomial size must be nonnegative");
    if (i < 0 || i > k)
        return 0.0;
    if (q <= 0.0)
        return i == 0 ? 1.0 : 0.0;
    if (q >= 1.0)
        return i == k ? 1.0 : 0.0;
    const auto di = static_cast<double>(i);
    const auto dk = static_cast<double>(k);
    return std::exp(log_binomial_coefficient(k, i) + di * std::log(q) + (dk - di) * std::log1p(-q));
}

double regularized_incomplete_beta(double a, double b, double x)
{
    if (!(a > 0.0 && b > 0.0))
        throw std::invalid_argument("incomplete beta needs a, b > 0");
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("incomplete beta needs x in [0, 1]");
    return incomplete_beta(a, b, x, 1.0 - x);
}

double binomial_cdf(std::int64_t k, double q, std::int64_t i)
{
    if (k < 0)
        throw std::invalid_argument("binomial size must be nonnegative");
    if (i < 0)
        return 0.0;
    if (i >= k)
        return 1.0;
    if (q <= 0.0)
        return 1.0;
    if (q >= 1.0)
        return 0.0;
    const auto di = static_cast<double>(i);
    const auto dk = static_cast<double>(k);
    if (k > kBinomialDirectMaxK)
        return incomplete_beta(dk - di, di + 1.0, 1.0 - q, q);

    // Sum whichever tail is smaller, walking away from i by the pmf ratio.
    const double odds = q / (1.0 - q);
    const double mean = dk * q;
    double term = binomial_pmf(k, q, i);
    if (term == 0.0)
        return di <= mean ? 0.0 : 1.0;
    if (di <= mean) {
        double sum = term;
        for (std::int64_t j = i; j > 0; --j) {
            term *= static_cast<double>(j) / (static_cast<double>(k - j + 1) * odds);
            sum += term;
            if (term < sum * 1e-18)
                break;
        }
        return std::min(1.0, sum);
    }
    double upper = 0.0;
    for (std::int64_t j = i; j < k; ++j) {
        term *= static_cast<double>(k - j) / static_cast<double>(j + 1) * odds;
        upper += term;
        if (term < upper * 1e-18)
            break;
    }
    return std::max(0.0, 1.0 - upper);
}

} // namespace dynet
