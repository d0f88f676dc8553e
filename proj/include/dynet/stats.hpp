#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dynet/analytics.hpp"

namespace dynet {

/// Observations plus where they came from.
struct SampleSet {
    std::vector<double> values;
    std::uint64_t first_seed = 0;
    std::uint64_t seed_count = 0;
    std::string scenario;
};

struct MeanCi {
    double mean = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double std_err = 0.0;
};

/// Normal-approximation interval at the given confidence level in [0, 1).
MeanCi mean_ci(const SampleSet& samples, double level);
MeanCi mean_ci(const std::vector<double>& values, double level);

/// Standard error of a correlated series' mean by non-overlapping batch means.
double batch_means_std_err(const std::vector<double>& series, std::size_t batches = 20);

/// Empirical quantile (linear interpolation between order statistics).
double quantile(std::vector<double> values, double prob);

/// Half-L1 distance between the empirical pmf of integer samples and a reference.
double empirical_tv(const SampleSet& samples, const FinitePmf& reference);

/// Empirical pmf of integer-valued samples.
FinitePmf empirical_pmf(const std::vector<double>& values);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Asymptotic Kolmogorov survival function Q(x) = 2 Σ (-1)^{j-1} e^{-2 j² x²}.
double kolmogorov_survival(double x);

KsResult ks_two_sample(const SampleSet& a, const SampleSet& b);

/// One-sample KS test against a continuous CDF.
KsResult ks_one_sample(const std::vector<double>& values, const std::function<double(double)>& cdf);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

/// Pearson chi-square of integer samples against a pmf; cells with expected
/// count below min_expected are pooled into their neighbours.
ChiSquareResult chi_square_gof(const std::vector<std::int64_t>& samples, const FinitePmf& reference,
                               double min_expected = 5.0);

/// Degree-count table.
struct DegreeHistogram {
    std::map<std::int64_t, std::int64_t> counts;
    std::int64_t total = 0;
    int m = 0;

    void add(std::int64_t degree, std::int64_t count = 1);

    /// Fraction of nodes with degree >= k.
    double ccdf(std::int64_t k) const;
};

struct FitResult {
    double gamma_hat = 0.0;
    std::int64_t k_min = 0;
    std::int64_t n_tail = 0;
    double std_err = 0.0;
};

/// Continuous power-law MLE on degrees >= k_min:
/// γ̂ = 1 + n_tail / Σ log(k_i / (k_min - shift)), std_err = (γ̂-1)/√n_tail.
/// Throws std::invalid_argument with fewer than 10 tail points or a tail
/// that sits on a single degree.
FitResult fit_power_law(const DegreeHistogram& hist, std::int64_t k_min, double shift = 0.5);

/// Least-squares slope of y on x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace dynet
