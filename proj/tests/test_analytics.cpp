#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "dynet/analytics.hpp"
#include "dynet/binomial.hpp"
#include "dynet/errors.hpp"

using namespace dynet;

namespace {

constexpr double kPi = std::numbers::pi;

double boost_pmf(std::int64_t k, double q, std::int64_t i)
{
    return boost::math::pdf(boost::math::binomial_distribution<double>(static_cast<double>(k), q),
                            static_cast<double>(i));
}

// Half-L1 between two product Bernoulli laws, enumerating all 2^k states.
double product_tv(int k, double p, double q)
{
    double sum = 0.0;
    for (std::uint32_t s = 0; s < (1u << k); ++s) {
        double a = 1.0, b = 1.0;
        for (int e = 0; e < k; ++e) {
            const bool on = (s >> e) & 1u;
            a *= on ? p : 1.0 - p;
            b *= on ? q : 1.0 - q;
        }
        sum += std::fabs(a - b);
    }
    return 0.5 * sum;
}

// Dense system for the absorbing chain, written from the transition rates.
Eigen::VectorXd absorbing_chain_dense(int N, double lambda, double mu, double beta)
{
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N + 1, N + 1);
    Eigen::VectorXd b = Eigen::VectorXd::Ones(N + 1);
    for (int k = 0; k <= N; ++k) {
        const double up = (N - k) * lambda, down = k * mu, absorb = k * beta;
        A(k, k) = up + down + absorb;
        if (k < N)
            A(k, k + 1) = -up;
        if (k > 0)
            A(k, k - 1) = -down;
    }
    return A.partialPivLu().solve(b);
}

} // namespace

TEST_CASE("FinitePmf validation")
{
    CHECK_THROWS_AS(FinitePmf({0, 1}, {0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(FinitePmf({0, 1}, {1.2, -0.2}), std::invalid_argument);
    CHECK_THROWS_AS(FinitePmf({0, 0}, {0.5, 0.5}), std::invalid_argument);
    const auto n = FinitePmf::normalized({2, 0}, {3.0, 1.0});
    CHECK(n.at(0) == doctest::Approx(0.25));
    CHECK(n.at(2) == doctest::Approx(0.75));
    CHECK(n.at(1) == 0.0);
    const auto po = FinitePmf::poisson(100.0);
    double total = 0.0;
    for (double m : po.mass())
        total += m;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tv examples")
{
    const auto a = FinitePmf({0, 1, 2}, {0.2, 0.3, 0.5});
    CHECK(tv(a, a) == 0.0);
    CHECK(tv(FinitePmf({0, 1}, {0.5, 0.5}), FinitePmf({2, 3}, {0.1, 0.9})) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(tv(FinitePmf({0, 1}, {0.5, 0.5}), FinitePmf({0, 1}, {0.25, 0.75})) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("the three total-variation forms agree")
{
    Rng rng(42);
    for (int trial = 0; trial < 500; ++trial) {
        const int size = 1 + static_cast<int>(rng.below(12));
        std::vector<std::int64_t> sa, sb;
        std::vector<double> wa, wb;
        for (int i = 0; i < size; ++i) {
            sa.push_back(i);
            wa.push_back(rng.uniform());
            sb.push_back(i + static_cast<std::int64_t>(size / 2));
            wb.push_back(rng.bernoulli(0.2) ? 0.0 : rng.uniform());
        }
        wb[0] += 0.01;
        const auto a = FinitePmf::normalized(sa, wa);
        const auto b = FinitePmf::normalized(sb, wb);
        const auto d = tv_detail(a, b);
        CHECK(std::fabs(d.half_l1 - d.crossing) <= 1e-12);
        CHECK(std::fabs(d.half_l1 - d.complement) <= 1e-12);
    }
}

TEST_CASE("binomial tv examples")
{
    for (double p : {0.1, 0.4, 0.9})
        for (double q : {0.05, 0.5, 0.77})
            CHECK(tv_binomial(1, p, q) == doctest::Approx(std::fabs(p - q)).epsilon(1e-13));
    CHECK(tv_binomial(2, 0.5, 0.75) == doctest::Approx(0.3125).epsilon(1e-14));
    CHECK(tv_binomial(40, 0.3, 0.3) == 0.0);
    CHECK(tv_binomial(7, 0.0, 0.2) == doctest::Approx(1.0 - std::pow(0.8, 7)).epsilon(1e-13));
    CHECK(tv_binomial(7, 1.0, 0.2) == doctest::Approx(1.0 - std::pow(0.2, 7)).epsilon(1e-13));
    CHECK(tv_binomial(30, 0.6, 0.2) == doctest::Approx(tv_binomial_direct(30, 0.6, 0.2)).epsilon(1e-12));
}

TEST_CASE("product-space distance equals the binomial distance")
{
    const double grid[] = {0.1, 0.3, 0.5, 0.7, 0.9};
    double worst = 0.0;
    for (int k = 1; k <= 12; ++k)
        for (double p : grid)
            for (double q : grid)
                worst = std::max(worst, std::fabs(product_tv(k, p, q) - tv_binomial(k, p, q)));
    INFO("max diff " << worst);
    CHECK(worst <= 1e-12);
}

TEST_CASE("crossing set is an integer interval ending at k a_k")
{
    const double grid[] = {0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95};
    int compared = 0;
    for (std::int64_t k = 1; k <= 200; ++k)
        for (double p : grid)
            for (double q : grid) {
                if (!(p < q))
                    continue;
                const double cut = k * binomial_crossing_point(p, q);
                for (std::int64_t i = 0; i <= k; ++i) {
                    const double a = boost_pmf(k, p, i), b = boost_pmf(k, q, i);
                    if (std::fabs(a - b) <= 1e-12 * std::max(a, b))
                        continue; // a tie sits on the boundary by construction
                    ++compared;
                    const bool in_set = a >= b;
                    if (in_set != (static_cast<double>(i) <= cut))
                        FAIL("k=" << k << " p=" << p << " q=" << q << " i=" << i << " cut=" << cut);
                }
            }
    CHECK(compared > 100000);
}

TEST_CASE("crossing-point evaluation matches direct summation for large k")
{
    for (std::int64_t k : {50, 1000, 100000, 300000})
        for (auto [p, q] : std::initializer_list<std::pair<double, double>>{{0.3, 0.31}, {0.3, 0.3015}, {0.5, 0.52}}) {
            double direct = 0.0;
            for (std::int64_t i = 0; i <= k; ++i)
                direct += std::fabs(boost_pmf(k, p, i) - boost_pmf(k, q, i));
            CHECK(tv_binomial(k, p, q) == doctest::Approx(0.5 * direct).epsilon(1e-9));
        }
}

TEST_CASE("incomplete beta and binomial CDF against an independent implementation")
{
    for (double a : {0.5, 3.0, 40.0, 900000.0})
        for (double b : {1.0, 7.5, 300000.0})
            for (double x : {0.01, 0.3, 0.5, 0.77, 0.99}) {
                const double ref = boost::math::ibeta(a, b, x);
                const double got = regularized_incomplete_beta(a, b, x);
                CHECK(std::fabs(got - ref) <= 1e-12 + 1e-9 * ref);
            }
    for (std::int64_t k : {10, 5000, 200000, 1000000}) {
        const boost::math::binomial_distribution<double> d(static_cast<double>(k), 0.3);
        for (double frac : {0.25, 0.299, 0.3, 0.31, 0.4}) {
            const auto i = static_cast<std::int64_t>(frac * k);
            const double ref = boost::math::cdf(d, static_cast<double>(i));
            CHECK(std::fabs(binomial_cdf(k, 0.3, i) - ref) <= 1e-12 + 1e-9 * ref);
        }
    }
}

TEST_CASE("worst-case on-probability")
{
    const auto e = EdgeParams::from_rates(0.01, 0.01);
    CHECK(worst_case_p_t(0.5, e, 0.0) == 1.0);
    CHECK(worst_case_p_t(0.5, e, 1e5) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(worst_case_p_t(0.5, e, 50.0) == doctest::Approx(0.5 + 0.5 * std::exp(-1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(worst_case_p_t(0.5, e, -1.0), std::domain_error);
}

TEST_CASE("distance to stationarity is nonincreasing in t")
{
    for (std::int64_t k : {10, 1000, 1000000})
        for (double p : {0.05, 0.3, 0.5}) {
            const auto e = derive_rates(p, 1.0);
            // incomplete-beta CDFs (k above the direct cutoff) are good to ~1e-10 absolute
            const double slack = k > kBinomialDirectMaxK ? 1e-10 : 1e-12;
            double prev = 1.0 + slack;
            for (int i = 0; i <= 200; ++i) {
                const double t = 0.05 * i / (e.lambda + e.mu) * std::log(static_cast<double>(k));
                const double d = tv_binomial(k, worst_case_p_t(p, e, t), p);
                CHECK(d <= prev + slack);
                prev = d;
            }
        }
}

TEST_CASE("numeric mixing time hits the level and moves with it")
{
    MixingQuery q;
    q.k = 5000;
    q.params = derive_rates(0.3, 1.0);
    const auto quarter = mixing_time_numeric(q);
    CHECK(quarter.monotone_verified);
    const double p = 0.3;
    CHECK(tv_binomial(q.k, worst_case_p_t(p, q.params, quarter.time), p) == doctest::Approx(0.25).epsilon(1e-6));

    double prev = 0.0;
    for (double level : {0.9, 0.5, 0.1, 1e-3, 1e-6}) {
        q.level = level;
        const double t = mixing_time_numeric(q).time;
        CHECK(t > prev);
        prev = t;
    }
    // just below TV(0) the time collapses to 0 (small k, where TV(0) < 1 visibly)
    q.k = 3;
    q.level = 0.25;
    const double small_quarter = mixing_time_numeric(q).time;
    q.level = tv_binomial(3, 1.0, p) * (1.0 - 1e-9);
    CHECK(mixing_time_numeric(q).time < 1e-6 * small_quarter);
    q.level = 1e-12;
    CHECK(mixing_time_numeric(q).time > 10.0 * small_quarter);
}

TEST_CASE("asymptotic mixing time examples")
{
    // λ+μ = α/(p(1-p)); at log k = 2 the time is 1/(λ+μ). k must be an integer, so check the shape.
    for (std::int64_t k : {7, 100, 1000000}) {
        const double rate = 1.0 / (0.5 * 0.5);
        CHECK(mixing_time_asymptotic(k, 0.5, 1.0, MixingRegime::ConstantP) * rate / (std::log(k) / 2.0)
              == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(mixing_time_asymptotic(10000, 2.0 / 10000, 1.0, MixingRegime::Sparse, 2.0)
          == doctest::Approx(2.0 * std::log(1e4) / 1e4).epsilon(1e-14));
    CHECK(2.0 * std::log(1e4) / 1e4 == doctest::Approx(1.8421e-3).epsilon(1e-4));
}

TEST_CASE("harmonic identity for the beta-infinity bound")
{
    for (std::int64_t n = 2; n <= 500; ++n) {
        double term_sum = 0.0;
        for (std::int64_t k = 2; k <= n; ++k) {
            term_sum += 1.0 / (static_cast<double>(k - 1) * static_cast<double>(n - k + 1));
            const auto b = bound_tau_beta_inf(n, k, 1.0);
            if (std::fabs(b.harmonic - term_sum) > 1e-12 * term_sum || std::fabs(b.exact - term_sum) > 1e-12 * term_sum)
                FAIL("n=" << n << " k=" << k << " sum=" << term_sum << " harmonic=" << b.harmonic);
        }
    }
}

TEST_CASE("bound examples")
{
    CHECK(bound_tau_beta_inf(3, 2, 1.0).exact == doctest::Approx(0.5).epsilon(1e-15));
    const double simplified = bound_tau_beta_inf(1000, 1000, 1.0).simplified;
    CHECK(simplified == doctest::Approx(2.0 * (1.0 + std::log(999.0)) / 1000.0).epsilon(1e-14));
    CHECK(simplified == doctest::Approx(1.5815e-2).epsilon(1e-4));
    CHECK_THROWS_AS(bound_tau_beta_inf(10, 11, 1.0), std::domain_error);

    CHECK(bound_tau_beta_finite(100, 50, 2.0, 0.5).integral == doctest::Approx(std::sqrt(kPi / 2.0) * kPi / 2.0));
    const double full = bound_tau_beta_finite(1600, 1600, 1.0, 1.0).integral;
    CHECK(full == doctest::Approx(std::sqrt(kPi * kPi * kPi / 2.0)).epsilon(1e-14));
    CHECK(full == doctest::Approx(3.9374).epsilon(1e-4));
    CHECK_THROWS_AS(bound_tau_beta_finite(10, 11, 1.0, 1.0), std::domain_error);

    const auto big = bound_tau_beta_finite(1000000, 500000, 1.0, 1.0);
    CHECK(std::fabs(big.sum / big.integral - 1.0) <= 1e-2);
}

TEST_CASE("lower bound examples")
{
    const double e = std::exp(1.0);
    // n = e is not an integer; evaluate the shape at integer n and scale to log n = 1.
    for (std::int64_t n : {3, 100, 1600}) {
        const double ln = std::log(static_cast<double>(n));
        CHECK(lower_bound_tau_n(n, InfectionRate::finite(1.0), 1.0)
              == doctest::Approx(std::sqrt(2.0 * ln / n)).epsilon(1e-14));
        CHECK(lower_bound_tau_n(n, InfectionRate::instantaneous(), 1.0) == doctest::Approx(ln / n).epsilon(1e-14));
    }
    CHECK(std::sqrt(2.0 * 1.0 / e) == doctest::Approx(0.8578).epsilon(1e-4));
}

TEST_CASE("absorbing chain: small cases and ordering")
{
    const auto one = lemma4_t0_exact(1, EdgeParams::from_rates(1, 1), 1.0);
    CHECK(one.t0() == doctest::Approx(3.0).epsilon(1e-14));
    for (auto [l, m, b] : std::initializer_list<std::tuple<double, double, double>>{{1, 1, 1}, {0.3, 2.0, 0.7}, {5, 0, 0.1}}) {
        CHECK(lemma4_t0_exact(1, EdgeParams::from_rates(l, m), b).t0() == doctest::Approx((l + m + b) / (l * b)));
        for (std::int64_t N : {2, 17, 500}) {
            const auto s = lemma4_t0_exact(N, EdgeParams::from_rates(l, m), b);
            for (std::size_t k = 1; k < s.t.size(); ++k)
                CHECK(s.t[k] < s.t[k - 1]);
            CHECK(s.t.back() > 0.0);
        }
    }
    CHECK(lemma4_t0_asymptotic(1, 1.0, 1.0) == doctest::Approx(std::sqrt(kPi / 2.0)).epsilon(1e-15));
    CHECK(std::sqrt(kPi / 2.0) == doctest::Approx(1.2533).epsilon(1e-4));
}

TEST_CASE("absorbing chain solution agrees with dense LU")
{
    for (auto [l, m, b] : std::initializer_list<std::tuple<double, double, double>>{{1, 1, 1}, {0.3, 2.0, 0.7}, {2, 0.01, 5}}) {
        for (int N : {1, 5, 60, 300}) {
            const auto s = lemma4_t0_exact(N, EdgeParams::from_rates(l, m), b);
            const auto dense = absorbing_chain_dense(N, l, m, b);
            for (int k = 0; k <= N; ++k)
                CHECK(s.t[static_cast<std::size_t>(k)] == doctest::Approx(dense(k)).epsilon(1e-10));
            CHECK(s.max_rel_residual <= 1e-9);
        }
    }
}

TEST_CASE("recurrence residuals from the returned vector")
{
    const double l = 1.0, m = 1.0, b = 1.0;
    for (std::int64_t N : {100, 10000, 100000}) {
        const auto s = lemma4_t0_exact(N, EdgeParams::from_rates(l, m), b);
        double worst = 0.0;
        for (std::int64_t k = 1; k < N; ++k) {
            const double up = (N - k) * l, down = k * m, ab = k * b;
            const auto K = static_cast<std::size_t>(k);
            const double lhs = (up + down + ab) * s.t[K];
            const double rhs = 1.0 + up * s.t[K + 1] + down * s.t[K - 1];
            worst = std::max(worst, std::fabs(lhs - rhs) / std::fabs(rhs));
        }
        INFO("N = " << N << " residual " << worst);
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("t0 sqrt(N) converges to sqrt(pi/2) with a shrinking error")
{
    double prev = 1e9;
    double last = 0.0;
    for (std::int64_t N : {100, 1000, 10000, 100000}) {
        const double t0 = lemma4_t0_exact(N, EdgeParams::from_rates(1, 1), 1.0).t0();
        const double ratio = t0 / lemma4_t0_asymptotic(N, 1.0, 1.0);
        const double err = std::fabs(ratio - 1.0);
        CHECK(err < prev);
        prev = err;
        last = ratio;
        if (N == 10000)
            CHECK(err <= 0.05);
    }
    CHECK(std::fabs(last - 1.0) <= 0.05);
}

TEST_CASE("the removal rate barely moves t0 at large N")
{
    const std::int64_t N = 100000;
    const double a = lemma4_t0_exact(N, EdgeParams::from_rates(1, 0.1), 1.0).t0();
    const double b = lemma4_t0_exact(N, EdgeParams::from_rates(1, 10.0), 1.0).t0();
    CHECK(std::fabs(a / b - 1.0) <= 0.1);
}

TEST_CASE("Thomas solver against dense LU on random diagonally dominant systems")
{
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(80));
        std::vector<double> sub(n), diag(n), sup(n), rhs(n);
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) {
            sub[i] = i > 0 ? rng.uniform() - 0.5 : 0.0;
            sup[i] = i + 1 < n ? rng.uniform() - 0.5 : 0.0;
            diag[i] = 1.5 + rng.uniform();
            rhs[i] = rng.uniform() * 10 - 5;
            A(i, i) = diag[i];
            if (i > 0)
                A(i, i - 1) = sub[i];
            if (i + 1 < n)
                A(i, i + 1) = sup[i];
            b(i) = rhs[i];
        }
        const auto x = solve_tridiagonal(sub, diag, sup, rhs);
        const Eigen::VectorXd ref = A.partialPivLu().solve(b);
        for (int i = 0; i < n; ++i)
            CHECK(x[i] == doctest::Approx(ref(i)).epsilon(1e-11));
    }
    CHECK_THROWS_AS(solve_tridiagonal({0, 1}, {0, 1}, {1, 0}, {1, 1}), NumericalError);
}
