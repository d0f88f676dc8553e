#include "dynet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace dynet {

MeanCi mean_ci(const SampleSet& samples, double level)
{
    return mean_ci(samples.values, level);
}

MeanCi mean_ci(const std::vector<double>& values, double level)
{
    if (values.size() < 2)
        throw std::invalid_argument("a confidence interval needs at least two samples");
    if (!(level >= 0.0 && level < 1.0))
        throw std::invalid_argument("confidence level must lie in [0, 1)");
    const auto n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values)
        ss += (v - mean) * (v - mean);
    MeanCi ci;
    ci.mean = mean;
    ci.std_err = std::sqrt(ss / (n - 1.0) / n);
    const double z = level == 0.0 ? 0.0
                                  : boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * level);
    ci.lo = mean - z * ci.std_err;
    ci.hi = mean + z * ci.std_err;
    return ci;
}

double batch_means_std_err(const std::vector<double>& series, std::size_t batches)
{
    if (batches < 2 || series.size() < batches)
        throw std::invalid_argument("need at least one observation per batch and two batches");
    const std::size_t per = series.size() / batches;
    std::vector<double> means;
    for (std::size_t b = 0; b < batches; ++b) {
        const auto first = series.begin() + static_cast<std::ptrdiff_t>(b * per);
        means.push_back(std::accumulate(first, first + static_cast<std::ptrdiff_t>(per), 0.0) / static_cast<double>(per));
    }
    return mean_ci(means, 0.0).std_err;
}

double quantile(std::vector<double> values, double prob)
{
    if (values.empty())
        throw std::invalid_argument("quantile of an empty sample");
    if (!(prob >= 0.0 && prob <= 1.0))
        throw std::invalid_argument("quantile probability must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = prob * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

FinitePmf empirical_pmf(const std::vector<double>& values)
{
    if (values.empty())
        throw std::invalid_argument("empirical pmf of an empty sample");
    std::map<std::int64_t, double> counts;
    for (double v : values) {
        if (v != std::floor(v))
            throw std::invalid_argument("empirical pmf needs integer-valued samples");
        counts[static_cast<std::int64_t>(v)] += 1.0;
    }
    std::vector<std::int64_t> support;
    std::vector<double> weight;
    for (const auto& [k, c] : counts) {
        support.push_back(k);
        weight.push_back(c);
    }
    return FinitePmf::normalized(std::move(support), std::move(weight));
}

double empirical_tv(const SampleSet& samples, const FinitePmf& reference)
{
    return tv(empirical_pmf(samples.values), reference);
}

double kolmogorov_survival(double x)
{
    if (x <= 0.0)
        return 1.0;
    if (x < 0.2)
        return 1.0; // series converges slowly here and the value is 1 to double precision
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 200; ++j) {
        const double term = sign * std::exp(-2.0 * j * j * x * x);
        sum += term;
        if (std::fabs(term) < 1e-17)
            break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(const SampleSet& a, const SampleSet& b)
{
    if (a.values.empty() || b.values.empty())
        throw std::invalid_argument("KS test needs nonempty samples");
    std::vector<double> x = a.values, y = b.values;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const auto nx = static_cast<double>(x.size());
    const auto ny = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v)
            ++i;
        while (j < y.size() && y[j] == v)
            ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    const double ne = std::sqrt(nx * ny / (nx + ny));
    KsResult r;
    r.statistic = d;
    r.p_value = kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d);
    return r;
}

KsResult ks_one_sample(const std::vector<double>& values, const std::function<double(double)>& cdf)
{
    if (values.empty())
        throw std::invalid_argument("KS test needs a nonempty sample");
    std::vector<double> x = values;
    std::sort(x.begin(), x.end());
    const auto n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    const double ne = std::sqrt(n);
    KsResult r;
    r.statistic = d;
    r.p_value = kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d);
    return r;
}

ChiSquareResult chi_square_gof(const std::vector<std::int64_t>& samples, const FinitePmf& reference,
                               double min_expected)
{
    if (samples.empty())
        throw std::invalid_argument("chi-square test needs samples");
    const auto n = static_cast<double>(samples.size());
    const auto& support = reference.support();
    std::map<std::int64_t, double> observed;
    for (auto s : samples)
        observed[s] += 1.0;

    // Walk the support, closing a cell once its expected count is large enough.
    std::vector<double> obs_cells, exp_cells;
    double obs = 0.0, expct = 0.0;
    for (std::size_t idx = 0; idx < support.size(); ++idx) {
        expct += n * reference.mass()[idx];
        auto it = observed.find(support[idx]);
        if (it != observed.end()) {
            obs += it->second;
            observed.erase(it);
        }
        if (expct >= min_expected) {
            obs_cells.push_back(obs);
            exp_cells.push_back(expct);
            obs = expct = 0.0;
        }
    }
    // Samples outside the support, and any trailing partial cell, join the last cell.
    for (const auto& [k, c] : observed)
        obs += c;
    if (obs_cells.empty())
        throw std::invalid_argument("reference pmf too concentrated for a chi-square test");
    obs_cells.back() += obs;
    exp_cells.back() += expct;

    ChiSquareResult r;
    for (std::size_t c = 0; c < obs_cells.size(); ++c)
        r.statistic += (obs_cells[c] - exp_cells[c]) * (obs_cells[c] - exp_cells[c]) / exp_cells[c];
    r.dof = static_cast<int>(obs_cells.size()) - 1;
    if (r.dof < 1)
        throw std::invalid_argument("chi-square test needs at least two cells");
    r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(r.dof), r.statistic));
    return r;
}

void DegreeHistogram::add(std::int64_t degree, std::int64_t count)
{
    if (degree < 0)
        throw std::invalid_argument("degree must be nonnegative");
    counts[degree] += count;
    total += count;
}

double DegreeHistogram::ccdf(std::int64_t k) const
{
    if (total == 0)
        return 0.0;
    std::int64_t above = 0;
    for (auto it = counts.lower_bound(k); it != counts.end(); ++it)
        above += it->second;
    return static_cast<double>(above) / static_cast<double>(total);
}

FitResult fit_power_law(const DegreeHistogram& hist, std::int64_t k_min, double shift)
{
    if (k_min < 1 || !(shift >= 0.0 && shift < static_cast<double>(k_min)))
        throw std::invalid_argument("need k_min >= 1 and 0 <= shift < k_min");
    const double base = static_cast<double>(k_min) - shift;
    std::int64_t n_tail = 0;
    double log_sum = 0.0;
    std::int64_t distinct = 0;
    for (auto it = hist.counts.lower_bound(k_min); it != hist.counts.end(); ++it) {
        if (it->second == 0)
            continue;
        n_tail += it->second;
        log_sum += static_cast<double>(it->second) * std::log(static_cast<double>(it->first) / base);
        ++distinct;
    }
    if (n_tail < 10)
        throw std::invalid_argument("power-law fit needs at least 10 observations above k_min");
    if (distinct < 2 || !(log_sum > 0.0))
        throw std::invalid_argument("power-law fit diverges: the tail has no spread in degree");
    FitResult r;
    r.k_min = k_min;
    r.n_tail = n_tail;
    r.gamma_hat = 1.0 + static_cast<double>(n_tail) / log_sum;
    r.std_err = (r.gamma_hat - 1.0) / std::sqrt(static_cast<double>(n_tail));
    return r;
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("slope needs two or more paired points");
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0)
        throw std::invalid_argument("slope undefined for constant x");
    return sxy / sxx;
}

} // namespace dynet
