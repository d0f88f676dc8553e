#pragma once

#include <cstdint>

namespace dynet {

/// Exact-summation cutoff: above this k, CDFs go through the incomplete beta.
inline constexpr std::int64_t kBinomialDirectMaxK = 100000;

/// log C(k, i).
double log_binomial_coefficient(std::int64_t k, std::int64_t i);

/// Pr[Binomial(k, q) = i], evaluated in log space.
double binomial_pmf(std::int64_t k, double q, std::int64_t i);

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// Pr[Binomial(k, q) <= i]. Log-space summation for k <= kBinomialDirectMaxK,
/// incomplete beta I_{1-q}(k-i, i+1) above.
double binomial_cdf(std::int64_t k, double q, std::int64_t i);

} // namespace dynet
