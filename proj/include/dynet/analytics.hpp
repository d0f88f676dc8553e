#pragma once

#include <cstdint>
#include <vector>

#include "dynet/core_model.hpp"
#include "dynet/simulator.hpp"

namespace dynet {

/// Finite probability mass function over integer-labelled outcomes.
class FinitePmf {
public:
    FinitePmf() = default;

    /// Throws std::invalid_argument unless masses are >= 0 and sum to 1 within 1e-12.
    FinitePmf(std::vector<std::int64_t> support, std::vector<double> mass);

    /// Same, but renormalizes instead of validating the total.
    static FinitePmf normalized(std::vector<std::int64_t> support, std::vector<double> weight);

    static FinitePmf binomial(std::int64_t k, double q);
    static FinitePmf poisson(double mean, double tail_epsilon = 1e-15);

    const std::vector<std::int64_t>& support() const { return support_; }
    const std::vector<double>& mass() const { return mass_; }

    /// Mass at one outcome (0 outside the support).
    double at(std::int64_t outcome) const;

private:
    std::vector<std::int64_t> support_; // sorted, unique
    std::vector<double> mass_;
};

struct TvResult {
    double half_l1 = 0.0;    ///< (1/2) Σ |ξ(ω) - ν(ω)|
    double crossing = 0.0;   ///< ξ(E) - ν(E), E = {ω : ξ(ω) >= ν(ω)}
    double complement = 0.0; ///< ν(Ē) - ξ(Ē)
};

/// Total variation between two pmfs, computed three ways. Throws
/// NumericalError if the forms disagree by more than 1e-12.
TvResult tv_detail(const FinitePmf& a, const FinitePmf& b);

double tv(const FinitePmf& a, const FinitePmf& b);

/// Binomial(k, p) vs Binomial(k, q) by direct half-L1 summation.
double tv_binomial_direct(std::int64_t k, double p, double q);

/// Crossing point a_k(q) = log((1-q)/(1-p)) / log(p(1-q)/(q(1-p))) for 0 < p < q < 1.
double binomial_crossing_point(double p, double q);

/// TV(Binomial(k, p), Binomial(k, q)) through the crossing point:
/// Pr[X(p) <= k a_k] - Pr[X(q) <= k a_k] with q >= p after ordering.
/// Degenerate p or q in {0, 1} fall back to direct evaluation.
double tv_binomial(std::int64_t k, double p, double q);

/// p(t) = p + (1-p) e^{-(λ+μ)t}: on-probability of an edge that started on.
double worst_case_p_t(double p, const EdgeParams& params, double t);

struct MixingQuery {
    std::int64_t k = 1;
    EdgeParams params;
    double level = 0.25;
};

struct MixingResult {
    double time = 0.0;
    bool monotone_verified = true; ///< false if the grid check failed and the scan was used
    double tv_at_time = 0.0;
};

/// Time at which TV(Bin(k, p(t)), Bin(k, p)) falls to the level, all edges on at t=0.
MixingResult mixing_time_numeric(const MixingQuery& query);

enum class MixingRegime { ConstantP, Sparse };

/// Leading-order mixing time: log k / (2(λ+μ)) with λ+μ = α/(p(1-p)),
/// or c log k / (α k) in the sparse regime p = c/k.
double mixing_time_asymptotic(std::int64_t k, double p, double alpha, MixingRegime regime, double c = 0.0);

/// H_n = Σ_{i<=n} 1/i.
double harmonic(std::int64_t n);

struct BetaInfBound {
    double exact = 0.0;      ///< Σ_{i<k} 1/(λ i (n-i))
    double harmonic = 0.0;   ///< (1/λn)(H_{k-1} + H_{n-1} - H_{n-k})
    double simplified = 0.0; ///< (1/λn)(2 + log(nk/(n-k))), or 2(1+log(n-1))/(λn) at k = n
};

/// Upper bounds on E[τ_k] for β = ∞ from the pure-birth coupling.
BetaInfBound bound_tau_beta_inf(std::int64_t n, std::int64_t k, double lambda);

struct BetaFiniteBound {
    double sum = 0.0;      ///< √(π/(2βλ)) Σ_{m<k} 1/√(m(n-m))
    double integral = 0.0; ///< √(π/(2βλ)) arccos(1 - 2k/n)
};

BetaFiniteBound bound_tau_beta_finite(std::int64_t n, std::int64_t k, double beta, double lambda);

/// Asymptotic lower bound on τ_n: √(2 log n/(βλn)) for finite β, log n/(λn) for β = ∞.
double lower_bound_tau_n(std::int64_t n, const InfectionRate& beta, double lambda);

struct Lemma4Solution {
    std::vector<double> t;       ///< expected absorption time from each state 0..N
    double max_rel_residual = 0.0;

    double t0() const { return t.front(); }
};

/// Expected time to absorption of the (N+2)-state chain: from state k, up at
/// (N-k)λ, down at kμ, absorbed at kβ. Solved as a tridiagonal system.
Lemma4Solution lemma4_t0_exact(std::int64_t N, const EdgeParams& params, double beta);

/// √(π/(2βλN)).
double lemma4_t0_asymptotic(std::int64_t N, double lambda, double beta);

/// Thomas algorithm for sub/diag/super bands; sub[0] and super[n-1] are ignored.
std::vector<double> solve_tridiagonal(const std::vector<double>& sub, const std::vector<double>& diag,
                                      const std::vector<double>& super, const std::vector<double>& rhs);

} // namespace dynet
