#include <doctest.h>

#include <cmath>
#include <set>

#include "dynet/analytics.hpp"
#include "dynet/core_model.hpp"
#include "dynet/errors.hpp"
#include "dynet/stats.hpp"

using namespace dynet;

namespace {

// Fraction of [0, horizon] spent on, given the toggle times.
double time_on_fraction(bool initial_on, const std::vector<double>& toggles, double horizon)
{
    double on = 0.0;
    double last = 0.0;
    bool state = initial_on;
    for (double t : toggles) {
        if (state)
            on += t - last;
        state = !state;
        last = t;
    }
    if (state)
        on += horizon - last;
    return on / horizon;
}

bool state_at(bool initial_on, const std::vector<double>& toggles, double t)
{
    bool state = initial_on;
    for (double s : toggles) {
        if (s > t)
            break;
        state = !state;
    }
    return state;
}

} // namespace

TEST_CASE("pairs are canonical and indexed densely")
{
    CHECK(make_edge(5, 2) == Edge{2, 5});
    CHECK_THROWS_AS(make_edge(3, 3), std::invalid_argument);
    const node_t n = 13;
    CHECK(pair_count(n) == 78);
    std::set<pair_t> seen;
    for (node_t i = 0; i < n; ++i)
        for (node_t j = i + 1; j < n; ++j) {
            const pair_t idx = pair_index(i, j, n);
            CHECK(idx < pair_count(n));
            seen.insert(idx);
            CHECK(pair_from_index(idx, n) == Edge{i, j});
        }
    CHECK(seen.size() == pair_count(n));
}

TEST_CASE("derive_stationary examples")
{
    auto s = derive_stationary(EdgeParams::from_rates(0.01, 0.01));
    CHECK(s.p == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s.alpha == doctest::Approx(0.005).epsilon(1e-15));

    s = derive_stationary(EdgeParams::from_rates(1.0, 0.0));
    CHECK(s.p == 1.0);
    CHECK(s.alpha == 0.0);

    s = derive_stationary(EdgeParams::from_rates(0.0, 1.0));
    CHECK(s.p == 0.0);
    CHECK(s.alpha == 0.0);

    CHECK_THROWS_AS(derive_stationary(EdgeParams::from_rates(0.0, 0.0)), DegenerateParameters);
}

TEST_CASE("derive_rates examples")
{
    auto r = derive_rates(0.5, 0.005);
    CHECK(r.lambda == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(r.mu == doctest::Approx(0.01).epsilon(1e-14));

    r = derive_rates(0.25, 0.03);
    CHECK(r.lambda == doctest::Approx(0.04).epsilon(1e-14));
    CHECK(r.mu == doctest::Approx(0.12).epsilon(1e-14));

    r = derive_rates(0.5, 0.0);
    CHECK(r.lambda == 0.0);
    CHECK(r.mu == 0.0);

    CHECK_THROWS_AS(derive_rates(0.0, 1.0), DegenerateParameters);
    CHECK_THROWS_AS(derive_rates(1.0, 1.0), DegenerateParameters);
}

TEST_CASE("rate round trip is the identity")
{
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
        const double lambda = std::exp(8.0 * rng.uniform() - 4.0);
        const double mu = std::exp(8.0 * rng.uniform() - 4.0);
        const auto s = derive_stationary(EdgeParams::from_rates(lambda, mu));
        const auto back = derive_rates(s.p, s.alpha);
        CHECK(std::fabs(back.lambda / lambda - 1.0) <= 1e-12);
        CHECK(std::fabs(back.mu / mu - 1.0) <= 1e-12);
    }
}

TEST_CASE("instant removal is a flag, not an infinity")
{
    const auto e = EdgeParams::with_instant_removal(2.0);
    CHECK(e.instant_removal);
    CHECK(std::isfinite(e.mu));
    CHECK_THROWS_AS(e.total_rate(), DegenerateParameters);
}

TEST_CASE("expected degree")
{
    CHECK(expected_degree(101, 0.3) == doctest::Approx(30.0));
}

TEST_CASE("edge_on_probability examples")
{
    const auto e = EdgeParams::from_rates(0.01, 0.01);
    CHECK(edge_on_probability(true, 0.0, e) == 1.0);
    CHECK(edge_on_probability(true, 0.0, EdgeParams::from_rates(3.0, 0.2)) == 1.0);
    CHECK(edge_on_probability(false, 1e6, e) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(edge_on_probability(true, 50.0, e) == doctest::Approx(0.5 + 0.5 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(edge_on_probability(true, 50.0, e) == doctest::Approx(0.6839).epsilon(1e-4));
    CHECK_THROWS_AS(edge_on_probability(true, -1.0, e), std::domain_error);
}

TEST_CASE("edge_on_probability moves monotonically toward p and stays in [0, 1]")
{
    for (auto [lambda, mu] : std::initializer_list<std::pair<double, double>>{{0.01, 0.01}, {2.0, 0.5}, {0.1, 3.0}, {1.0, 0.0}, {0.0, 1.0}}) {
        const auto e = EdgeParams::from_rates(lambda, mu);
        const double p = derive_stationary(e).p;
        for (bool init : {false, true}) {
            double prev = std::fabs((init ? 1.0 : 0.0) - p);
            for (int i = 1; i <= 400; ++i) {
                const double f = edge_on_probability(init, 0.05 * i, e);
                CHECK(f >= 0.0);
                CHECK(f <= 1.0);
                const double d = std::fabs(f - p);
                CHECK(d <= prev + 1e-15);
                prev = d;
            }
        }
    }
}

TEST_CASE("graph snapshot bookkeeping")
{
    GraphSnapshot g(5, {{3, 4}, {0, 1}, {1, 3}});
    CHECK(g.edge_count() == 3);
    CHECK(g.edges().front() == Edge{0, 1});
    CHECK(g.has_edge(3, 1));
    CHECK_FALSE(g.has_edge(0, 4));
    const auto deg = g.degrees();
    CHECK(deg == std::vector<std::size_t>{1, 2, 0, 2, 1});
    const auto bits = g.pair_bitmap();
    CHECK(bits[pair_index(1, 3, 5)]);
    CHECK_FALSE(bits[pair_index(0, 2, 5)]);
    CHECK_THROWS_AS(GraphSnapshot(3, {{0, 1}, {0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(GraphSnapshot(3, {{0, 3}}), std::invalid_argument);
}

TEST_CASE("sample_stationary_graph extremes")
{
    Rng rng(1);
    CHECK(sample_stationary_graph(5, 0.0, rng).edge_count() == 0);
    CHECK(sample_stationary_graph(5, 1.0, rng).edge_count() == 10);
}

TEST_CASE("sample_stationary_graph edge count has Binomial(4950, 1/2) moments")
{
    const int draws = 10000;
    const double M = 4950.0;
    double sum = 0.0;
    for (int s = 0; s < draws; ++s) {
        Rng rng(1000 + s);
        sum += static_cast<double>(sample_stationary_graph(100, 0.5, rng).edge_count());
    }
    const double mean = sum / draws;
    const double sigma = std::sqrt(M * 0.25);
    CHECK(std::fabs(mean - 2475.0) <= 3.0 * sigma / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("degree of a fixed node in G(n, p) is Binomial(n-1, p)")
{
    const node_t n = 30;
    const double p = 0.3;
    std::vector<std::int64_t> deg;
    for (int s = 0; s < 10000; ++s) {
        Rng rng(77000 + s);
        deg.push_back(static_cast<std::int64_t>(sample_stationary_graph(n, p, rng).degrees()[0]));
    }
    const auto res = chi_square_gof(deg, FinitePmf::binomial(n - 1, p));
    INFO("chi2 = " << res.statistic << " dof = " << res.dof << " p = " << res.p_value);
    CHECK(res.p_value >= 1e-3);
}

TEST_CASE("sample_edge_trajectory edge cases")
{
    Rng rng(5);
    CHECK(sample_edge_trajectory(false, 1e3, EdgeParams::from_rates(0.0, 2.0), rng).empty());
    CHECK(sample_edge_trajectory(true, 1e3, EdgeParams::from_rates(2.0, 0.0), rng).empty());
    const auto toggles = sample_edge_trajectory(false, 100.0, EdgeParams::from_rates(1.0, 1.0), rng);
    for (std::size_t i = 1; i < toggles.size(); ++i)
        CHECK(toggles[i] > toggles[i - 1]);
    CHECK(toggles.back() <= 100.0);
}

TEST_CASE("time-on fraction of a symmetric edge is 1/2")
{
    const double horizon = 1e4;
    Rng rng(2024);
    const auto toggles = sample_edge_trajectory(false, horizon, EdgeParams::from_rates(1.0, 1.0), rng);
    const double frac = time_on_fraction(false, toggles, horizon);
    // Var of the time average of a telegraph process: 2p(1-p)/(kT) (1 - (1-e^{-kT})/(kT)), k = λ+μ.
    const double k = 2.0;
    const double var = 2.0 * 0.25 / (k * horizon) * (1.0 - (1.0 - std::exp(-k * horizon)) / (k * horizon));
    CHECK(std::fabs(frac - 0.5) <= 3.0 * std::sqrt(var));
}

TEST_CASE("trajectory marginal matches edge_on_probability")
{
    const auto e = EdgeParams::from_rates(0.7, 1.3);
    const int trials = 10000;
    for (bool init : {false, true})
        for (double t : {0.1, 0.4, 1.0, 3.0}) {
            int on = 0;
            for (int s = 0; s < trials; ++s) {
                Rng rng = Rng(314).split(static_cast<std::uint64_t>(s));
                on += state_at(init, sample_edge_trajectory(init, t, e, rng), t);
            }
            const double f = edge_on_probability(init, t, e);
            const double half = 2.5758293035489 * std::sqrt(f * (1.0 - f) / trials);
            INFO("init " << init << " t " << t);
            CHECK(std::fabs(static_cast<double>(on) / trials - f) <= half);
        }
}
