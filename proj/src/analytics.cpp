#include "dynet/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "dynet/binomial.hpp"
#include "dynet/errors.hpp"

namespace dynet {

FinitePmf::FinitePmf(std::vector<std::int64_t> support, std::vector<double> mass)
{
    if (support.size() != mass.size())
        throw std::invalid_argument("support and mass differ in length");
    std::vector<std::size_t> order(support.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return support[a] < support[b]; });
    double total = 0.0;
    for (std::size_t idx : order) {
        if (!(mass[idx] >= 0.0))
            throw std::invalid_argument("pmf masses must be nonnegative");
        if (!support_.empty() && support_.back() == support[idx])
            throw std::invalid_argument("duplicate outcome in pmf support");
        support_.push_back(support[idx]);
        mass_.push_back(mass[idx]);
        total += mass[idx];
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw std::invalid_argument("pmf masses must sum to 1");
}

FinitePmf FinitePmf::normalized(std::vector<std::int64_t> support, std::vector<double> weight)
{
    const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
    if (!(total > 0.0))
        throw std::invalid_argument("pmf weights must have a positive total");
    for (auto& w : weight)
        w /= total;
    // Renormalized weights sum to 1 up to rounding; absorb the residue.
    const double residue = 1.0 - std::accumulate(weight.begin(), weight.end(), 0.0);
    auto largest = std::max_element(weight.begin(), weight.end());
    *largest += residue;
    return FinitePmf(std::move(support), std::move(weight));
}

FinitePmf FinitePmf::binomial(std::int64_t k, double q)
{
    std::vector<std::int64_t> support;
    std::vector<double> mass;
    for (std::int64_t i = 0; i <= k; ++i) {
        support.push_back(i);
        mass.push_back(binomial_pmf(k, q, i));
    }
    return normalized(std::move(support), std::move(mass));
}

FinitePmf FinitePmf::poisson(double mean, double tail_epsilon)
{
    if (!(mean > 0.0))
        throw std::invalid_argument("Poisson mean must be positive");
    std::vector<std::int64_t> support;
    std::vector<double> mass;
    double covered = 0.0;
    for (std::int64_t i = 0;; ++i) {
        const double m = std::exp(static_cast<double>(i) * std::log(mean) - mean - std::lgamma(static_cast<double>(i) + 1.0));
        covered += m;
        if (m > 0.0) {
            support.push_back(i);
            mass.push_back(m);
        }
        if (static_cast<double>(i) > mean && 1.0 - covered < tail_epsilon)
            break;
    }
    return normalized(std::move(support), std::move(mass));
}

double FinitePmf::at(std::int64_t outcome) const
{
    auto it = std::lower_bound(support_.begin(), support_.end(), outcome);
    if (it == support_.end() || *it != outcome)
        return 0.0;
    return mass_[static_cast<std::size_t>(it - support_.begin())];
}

TvResult tv_detail(const FinitePmf& a, const FinitePmf& b)
{
    TvResult r;
    double xi_e = 0.0, nu_e = 0.0, xi_c = 0.0, nu_c = 0.0;
    auto visit = [&](double x, double y) {
        r.half_l1 += std::fabs(x - y);
        if (x >= y) {
            xi_e += x;
            nu_e += y;
        } else {
            xi_c += x;
            nu_c += y;
        }
    };
    const auto& sa = a.support();
    const auto& sb = b.support();
    std::size_t i = 0, j = 0;
    while (i < sa.size() || j < sb.size()) {
        if (j == sb.size() || (i < sa.size() && sa[i] < sb[j])) {
            visit(a.mass()[i++], 0.0);
        } else if (i == sa.size() || sb[j] < sa[i]) {
            visit(0.0, b.mass()[j++]);
        } else {
            visit(a.mass()[i++], b.mass()[j++]);
        }
    }
    r.half_l1 *= 0.5;
    r.crossing = xi_e - nu_e;
    r.complement = nu_c - xi_c;
    if (std::fabs(r.half_l1 - r.crossing) > 1e-12 || std::fabs(r.crossing - r.complement) > 1e-12)
        throw NumericalError("total-variation forms disagree");
    return r;
}

double tv(const FinitePmf& a, const FinitePmf& b)
{
    return tv_detail(a, b).half_l1;
}

double tv_binomial_direct(std::int64_t k, double p, double q)
{
    if (k < 0)
        throw std::invalid_argument("k must be nonnegative");
    if (p < 0.0 || p > 1.0 || q < 0.0 || q > 1.0)
        throw std::invalid_argument("probabilities must lie in [0, 1]");
    if (p == q)
        return 0.0;
    // A point mass against a binomial: the TV is the binomial's mass elsewhere.
    if (p == 0.0 || p == 1.0)
        return 1.0 - binomial_pmf(k, q, p == 0.0 ? 0 : k);
    if (q == 0.0 || q == 1.0)
        return 1.0 - binomial_pmf(k, p, q == 0.0 ? 0 : k);

    std::int64_t lo = 0, hi = k;
    if (k > kBinomialDirectMaxK) {
        const auto dk = static_cast<double>(k);
        const double width = 40.0 * std::sqrt(dk * 0.25) + 10.0;
        lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::min(p, q) * dk - width));
        hi = std::min<std::int64_t>(k, static_cast<std::int64_t>(std::max(p, q) * dk + width));
    }
    double sum = 0.0;
    for (std::int64_t i = lo; i <= hi; ++i)
        sum += std::fabs(binomial_pmf(k, p, i) - binomial_pmf(k, q, i));
    return std::min(1.0, 0.5 * sum);
}

double binomial_crossing_point(double p, double q)
{
    if (!(p > 0.0 && p < q && q < 1.0))
        throw std::invalid_argument("crossing point needs 0 < p < q < 1");
    const double num = std::log1p((p - q) / (1.0 - p));  // log((1-q)/(1-p))
    const double den = num - std::log1p((q - p) / p);    // minus log(q/p)
    return num / den;
}

double tv_binomial(std::int64_t k, double p, double q)
{
    if (k < 1)
        throw std::invalid_argument("k must be at least 1");
    if (p < 0.0 || p > 1.0 || q < 0.0 || q > 1.0)
        throw std::invalid_argument("probabilities must lie in [0, 1]");
    if (p == q)
        return 0.0;
    if (p > q)
        std::swap(p, q);
    if (p == 0.0 || q == 1.0)
        return tv_binomial_direct(k, p, q);
    const double a = binomial_crossing_point(p, q);
    const auto cut = static_cast<std::int64_t>(std::floor(static_cast<double>(k) * a));
    const double value = binomial_cdf(k, p, cut) - binomial_cdf(k, q, cut);
    return std::clamp(value, 0.0, 1.0);
}

double worst_case_p_t(double p, const EdgeParams& params, double t)
{
    if (!(t >= 0.0))
        throw std::domain_error("time must be nonnegative");
    return p + (1.0 - p) * std::exp(-params.total_rate() * t);
}

MixingResult mixing_time_numeric(const MixingQuery& query)
{
    if (query.k < 1)
        throw std::invalid_argument("k must be at least 1");
    if (!(query.level > 0.0 && query.level < 1.0))
        throw std::invalid_argument("level must lie in (0, 1)");
    const double p = derive_stationary(query.params).p;
    if (p > 0.5)
        throw std::domain_error("mixing time is defined for the worst case p <= 1/2");
    const double rate = query.params.total_rate();
    auto distance = [&](double t) { return tv_binomial(query.k, worst_case_p_t(p, query.params, t), p); };

    MixingResult result;
    const double at_zero = distance(0.0);
    if (query.level >= at_zero) {
        result.tv_at_time = at_zero;
        return result;
    }
    double hi = 20.0 / rate;
    for (int expand = 0; distance(hi) > query.level; ++expand) {
        if (expand > 60)
            throw NumericalError("mixing-time bracket failed to expand");
        hi *= 2.0;
    }

    // Above the direct-summation cutoff the CDFs carry ~1e-10 absolute error.
    const double slack = query.k > kBinomialDirectMaxK ? 1e-10 : 1e-12;
    constexpr int kGrid = 64;
    double prev = at_zero;
    for (int g = 1; g <= kGrid && result.monotone_verified; ++g) {
        const double cur = distance(hi * g / kGrid);
        if (cur > prev + slack)
            result.monotone_verified = false;
        prev = cur;
    }

    double lo = 0.0;
    if (!result.monotone_verified) {
        // Fallback: first grid cell where the distance has reached the level.
        constexpr int kScan = 4096;
        for (int g = 1; g <= kScan; ++g) {
            const double t = hi * g / kScan;
            if (distance(t) <= query.level) {
                lo = hi * (g - 1) / kScan;
                hi = t;
                break;
            }
        }
    }
    while (hi - lo > 1e-10 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (distance(mid) > query.level)
            lo = mid;
        else
            hi = mid;
    }
    result.time = 0.5 * (lo + hi);
    result.tv_at_time = distance(result.time);
    return result;
}

double mixing_time_asymptotic(std::int64_t k, double p, double alpha, MixingRegime regime, double c)
{
    if (k < 2)
        throw std::invalid_argument("k must be at least 2");
    if (!(alpha > 0.0))
        throw std::invalid_argument("alpha must be positive");
    const double log_k = std::log(static_cast<double>(k));
    if (regime == MixingRegime::ConstantP) {
        if (!(p > 0.0 && p < 1.0))
            throw std::invalid_argument("p must lie in (0, 1)");
        const double total_rate = alpha / (p * (1.0 - p));
        return log_k / (2.0 * total_rate);
    }
    if (c <= 0.0)
        c = p * static_cast<double>(k);
    return c * log_k / (alpha * static_cast<double>(k));
}

double harmonic(std::int64_t n)
{
    double sum = 0.0;
    for (std::int64_t i = n; i >= 1; --i)
        sum += 1.0 / static_cast<double>(i);
    return sum;
}

BetaInfBound bound_tau_beta_inf(std::int64_t n, std::int64_t k, double lambda)
{
    if (k > n)
        throw std::domain_error("k must not exceed n");
    if (k < 2)
        throw std::domain_error("k must be at least 2");
    if (!(lambda > 0.0))
        throw std::invalid_argument("lambda must be positive");
    const auto dn = static_cast<double>(n);
    BetaInfBound b;
    for (std::int64_t i = k - 1; i >= 1; --i)
        b.exact += 1.0 / (lambda * static_cast<double>(i) * static_cast<double>(n - i));
    b.harmonic = (harmonic(k - 1) + harmonic(n - 1) - harmonic(n - k)) / (lambda * dn);
    if (k < n)
        b.simplified = (2.0 + std::log(dn * static_cast<double>(k) / static_cast<double>(n - k))) / (lambda * dn);
    else
        b.simplified = 2.0 * (1.0 + std::log(dn - 1.0)) / (lambda * dn);
    return b;
}

BetaFiniteBound bound_tau_beta_finite(std::int64_t n, std::int64_t k, double beta, double lambda)
{
    if (k > n || k < 2)
        throw std::domain_error("need 2 <= k <= n");
    if (!(beta > 0.0 && lambda > 0.0))
        throw std::invalid_argument("beta and lambda must be positive");
    const double scale = std::sqrt(std::numbers::pi / (2.0 * beta * lambda));
    BetaFiniteBound b;
    double sum = 0.0;
    for (std::int64_t m = k - 1; m >= 1; --m)
        sum += 1.0 / std::sqrt(static_cast<double>(m) * static_cast<double>(n - m));
    b.sum = scale * sum;
    b.integral = scale * std::acos(1.0 - 2.0 * static_cast<double>(k) / static_cast<double>(n));
    return b;
}

double lower_bound_tau_n(std::int64_t n, const InfectionRate& beta, double lambda)
{
    if (n < 2)
        throw std::domain_error("n must be at least 2");
    if (!(lambda > 0.0))
        throw std::invalid_argument("lambda must be positive");
    const auto dn = static_cast<double>(n);
    if (beta.infinite)
        return std::log(dn) / (lambda * dn);
    return std::sqrt(2.0 * std::log(dn) / (beta.beta * lambda * dn));
}

std::vector<double> solve_tridiagonal(const std::vector<double>& sub, const std::vector<double>& diag,
                                      const std::vector<double>& super, const std::vector<double>& rhs)
{
    const std::size_t n = diag.size();
    if (n == 0 || sub.size() != n || super.size() != n || rhs.size() != n)
        throw std::invalid_argument("tridiagonal bands must have equal nonzero length");
    std::vector<double> c(n), x(n);
    double pivot = diag[0];
    if (pivot == 0.0 || !std::isfinite(pivot))
        throw NumericalError("singular tridiagonal system");
    c[0] = super[0] / pivot;
    x[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - sub[i] * c[i - 1];
        if (pivot == 0.0 || !std::isfinite(pivot))
            throw NumericalError("singular tridiagonal system");
        c[i] = super[i] / pivot;
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i > 0; --i)
        x[i - 1] -= c[i - 1] * x[i];
    return x;
}

Lemma4Solution lemma4_t0_exact(std::int64_t N, const EdgeParams& params, double beta)
{
    if (N < 1)
        throw std::invalid_argument("N must be at least 1");
    if (params.instant_removal)
        throw std::invalid_argument("the absorbing chain needs a finite removal rate");
    const double lambda = params.lambda;
    const double mu = params.mu;
    if (!(lambda > 0.0 && beta > 0.0 && mu >= 0.0))
        throw std::invalid_argument("need lambda > 0, beta > 0, mu >= 0");

    const auto size = static_cast<std::size_t>(N + 1);
    std::vector<double> sub(size, 0.0), diag(size), super(size, 0.0), rhs(size, 1.0);
    for (std::size_t k = 0; k < size; ++k) {
        const auto dk = static_cast<double>(k);
        const double up = static_cast<double>(N - static_cast<std::int64_t>(k)) * lambda;
        diag[k] = up + dk * mu + dk * beta;
        super[k] = -up;
        sub[k] = -dk * mu;
    }
    Lemma4Solution sol;
    sol.t = solve_tridiagonal(sub, diag, super, rhs);
    for (std::size_t k = 0; k < size; ++k) {
        double lhs = diag[k] * sol.t[k];
        double scale = std::fabs(lhs) + 1.0;
        if (k > 0) {
            lhs += sub[k] * sol.t[k - 1];
            scale += std::fabs(sub[k] * sol.t[k - 1]);
        }
        if (k + 1 < size) {
            lhs += super[k] * sol.t[k + 1];
            scale += std::fabs(super[k] * sol.t[k + 1]);
        }
        sol.max_rel_residual = std::max(sol.max_rel_residual, std::fabs(lhs - 1.0) / scale);
    }
    return sol;
}

double lemma4_t0_asymptotic(std::int64_t N, double lambda, double beta)
{
    if (N < 1)
        throw std::invalid_argument("N must be at least 1");
    if (!(lambda > 0.0 && beta > 0.0))
        throw std::invalid_argument("lambda and beta must be positive");
    return std::sqrt(std::numbers::pi / (2.0 * beta * lambda * static_cast<double>(N)));
}

} // namespace dynet
