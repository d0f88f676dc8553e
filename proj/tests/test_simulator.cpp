#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dynet/analytics.hpp"
#include "dynet/errors.hpp"
#include "dynet/simulator.hpp"
#include "dynet/stats.hpp"

using namespace dynet;

namespace {

double mean_of(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

SiOptions si(node_t n, EdgeParams params, InfectionRate beta)
{
    SiOptions o;
    o.n = n;
    o.params = params;
    o.beta = beta;
    return o;
}

} // namespace

TEST_CASE("no events without appearance on an empty graph")
{
    Rng rng(3);
    const auto traj = simulate_dynamic_graph(3, EdgeParams::from_rates(0.0, 1.0), GraphSnapshot(3), 1e3, rng);
    CHECK(traj.events.empty());
}

TEST_CASE("dynamic graph replays identically from a seed")
{
    const auto e = EdgeParams::from_rates(0.3, 0.6);
    Rng a(99), b(99);
    const auto ta = simulate_dynamic_graph(40, e, GraphSnapshot(40), 50.0, a);
    const auto tb = simulate_dynamic_graph(40, e, GraphSnapshot(40), 50.0, b);
    REQUIRE(!ta.events.empty());
    CHECK(ta.events == tb.events);
}

TEST_CASE("dynamic graph events respect edge states")
{
    const node_t n = 25;
    const auto e = EdgeParams::from_rates(0.4, 0.9);
    Rng rng(8);
    const auto init = sample_stationary_graph(n, derive_stationary(e).p, rng);
    const auto traj = simulate_dynamic_graph(n, e, init, 30.0, rng);
    std::set<Edge> present(init.edges().begin(), init.edges().end());
    double last = 0.0;
    for (const auto& ev : traj.events) {
        CHECK(ev.t >= last);
        CHECK(ev.t <= 30.0);
        last = ev.t;
        const Edge edge{ev.i, ev.j};
        CHECK(ev.i < ev.j);
        if (ev.kind == EventKind::EdgeOn) {
            CHECK(present.insert(edge).second);
        } else {
            REQUIRE(ev.kind == EventKind::EdgeOff);
            CHECK(present.erase(edge) == 1);
        }
    }
    const auto end = graph_at(traj, 30.0);
    CHECK(std::vector<Edge>(present.begin(), present.end()) == end.edges());
    CHECK(graph_at(traj, 0.0) == init);
}

TEST_CASE("time-averaged edge count of a stationary dynamic graph")
{
    const node_t n = 100;
    const double lambda = 0.01, mu = 0.01, horizon = 1e3;
    const auto e = EdgeParams::from_rates(lambda, mu);
    Rng rng(123);
    const auto init = sample_stationary_graph(n, 0.5, rng);
    const auto traj = simulate_dynamic_graph(n, e, init, horizon, rng);
    double area = 0.0, last = 0.0;
    double count = static_cast<double>(init.edge_count());
    for (const auto& ev : traj.events) {
        area += count * (ev.t - last);
        last = ev.t;
        count += ev.kind == EventKind::EdgeOn ? 1.0 : -1.0;
    }
    area += count * (horizon - last);
    const double avg = area / horizon;
    // Stationary start: each of M independent edges has time-average variance
    // 2p(1-p)/(kT) (1 - (1 - e^{-kT})/(kT)) with k = λ+μ.
    const double k = lambda + mu, M = 4950.0;
    const double var = M * 2.0 * 0.25 / (k * horizon) * (1.0 - (1.0 - std::exp(-k * horizon)) / (k * horizon));
    INFO("avg " << avg << " sd " << std::sqrt(var));
    CHECK(std::fabs(avg - 2475.0) <= 3.0 * std::sqrt(var));
}

TEST_CASE("marginal law of a fixed edge in the joint simulation")
{
    const auto e = EdgeParams::from_rates(0.5, 1.5);
    const double t = 0.7;
    const int trials = 10000;
    for (bool init_on : {false, true}) {
        int on = 0;
        for (int s = 0; s < trials; ++s) {
            Rng rng = Rng(55).split(static_cast<std::uint64_t>(s));
            const GraphSnapshot init = init_on ? GraphSnapshot(4, {{0, 1}}) : GraphSnapshot(4);
            const auto traj = simulate_dynamic_graph(4, e, init, t, rng);
            on += graph_at(traj, t).has_edge(0, 1);
        }
        const double f = edge_on_probability(init_on, t, e);
        CHECK(std::fabs(static_cast<double>(on) / trials - f) <= 2.5758293035489 * std::sqrt(f * (1 - f) / trials));
    }
}

TEST_CASE("node cap refuses oversized simulations")
{
    Rng rng(1);
    SimLimits lim;
    lim.max_nodes = 50;
    CHECK_THROWS_AS(simulate_dynamic_graph(51, EdgeParams::from_rates(1, 1), GraphSnapshot(51), 1.0, rng, lim),
                    ResourceLimitExceeded);
    CHECK_THROWS_AS(simulate_si(si(51, EdgeParams::from_rates(1, 1), InfectionRate::finite(1)), rng, lim),
                    ResourceLimitExceeded);
    CHECK_NOTHROW(check_node_cap(50, lim));
}

TEST_CASE("two-node static SI gives a unit exponential")
{
    const int trials = 10000;
    std::vector<double> tau;
    for (int s = 0; s < trials; ++s) {
        Rng rng = Rng(2).split(static_cast<std::uint64_t>(s));
        const auto traj = simulate_si(si(2, EdgeParams::from_rates(1.0, 0.0), InfectionRate::finite(1.0)), rng);
        tau.push_back(traj.hitting(2).value());
    }
    CHECK(std::fabs(mean_of(tau) - 1.0) <= 3.0 / std::sqrt(static_cast<double>(trials)));
    const auto ks = ks_one_sample(tau, [](double x) { return 1.0 - std::exp(-x); });
    CHECK(ks.p_value >= 1e-3);
}

TEST_CASE("instantaneous spread on a complete graph finishes at time 0")
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        Rng rng(s);
        const auto traj = simulate_si(si(20, EdgeParams::from_rates(1.0, 0.0), InfectionRate::instantaneous()), rng);
        CHECK(traj.hitting(20) == 0.0);
    }
}

TEST_CASE("hitting times: seeds, unreachable targets, monotone")
{
    Rng rng(17);
    auto o = si(30, EdgeParams::from_rates(1.0, 1.0), InfectionRate::finite(1.0));
    o.seeds = {3, 7};
    const auto traj = simulate_si(o, rng);
    CHECK(hitting_time(traj, 1) == 0.0);
    CHECK(hitting_time(traj, 2) == 0.0);
    CHECK_FALSE(hitting_time(traj, 31).has_value());
    for (node_t k = 2; k < 30; ++k)
        CHECK(*hitting_time(traj, k) <= *hitting_time(traj, k + 1));
    CHECK(traj.infected_at(0.0) == 2);
    CHECK(traj.final_infected() == 30);

    Rng rng2(18);
    o.stop.horizon = 1e-6;
    const auto short_run = simulate_si(o, rng2);
    CHECK_FALSE(short_run.hitting(30).has_value());
}

TEST_CASE("SI replays identically and infects each node once")
{
    auto o = si(60, EdgeParams::from_rates(0.2, 0.3), InfectionRate::finite(0.8));
    o.record_events = true;
    Rng a(404), b(404);
    const auto ta = simulate_si(o, a);
    const auto tb = simulate_si(o, b);
    CHECK(ta == tb);
    std::set<node_t> infected{0};
    double last = 0.0;
    for (const auto& ev : ta.events()) {
        REQUIRE(ev.kind == EventKind::Infect);
        CHECK(ev.t >= last);
        last = ev.t;
        CHECK(infected.insert(ev.i).second);
    }
    CHECK(static_cast<node_t>(infected.size()) == ta.final_infected());
}

TEST_CASE("alpha-infinity chain examples")
{
    SiStop stop;
    const int trials = 10000;
    std::vector<double> two;
    for (int s = 0; s < trials; ++s) {
        Rng rng = Rng(31).split(static_cast<std::uint64_t>(s));
        two.push_back(*simulate_si_alpha_inf(2, 0.5, 2.0, 1, stop, rng).hitting(2));
    }
    CHECK(std::fabs(mean_of(two) - 1.0) <= 3.0 / std::sqrt(static_cast<double>(trials)));

    // n = 10, β = p = 1: E τ_n = Σ 1/(m(n-m)) = (2/n) H_9.
    double h9 = 0.0, var = 0.0;
    for (int i = 1; i <= 9; ++i)
        h9 += 1.0 / i;
    for (int m = 1; m < 10; ++m)
        var += 1.0 / (static_cast<double>(m) * (10 - m) * m * (10 - m));
    CHECK(0.2 * h9 == doctest::Approx(0.5658).epsilon(1e-4));
    std::vector<double> ten;
    for (int s = 0; s < trials; ++s) {
        Rng rng = Rng(32).split(static_cast<std::uint64_t>(s));
        ten.push_back(*simulate_si_alpha_inf(10, 1.0, 1.0, 1, stop, rng).hitting(10));
    }
    CHECK(std::fabs(mean_of(ten) - 0.2 * h9) <= 3.0 * std::sqrt(var / trials));

    Rng r1(5), r2(5);
    CHECK(simulate_si_alpha_inf(50, 0.3, 1.5, 2, stop, r1) == simulate_si_alpha_inf(50, 0.3, 1.5, 2, stop, r2));
}

TEST_CASE("connectivity time of one pair is Exp(lambda)")
{
    const int trials = 10000;
    const double lambda = 2.0;
    std::vector<double> t;
    for (int s = 0; s < trials; ++s) {
        Rng rng = Rng(71).split(static_cast<std::uint64_t>(s));
        t.push_back(connectivity_time(2, lambda, rng));
    }
    CHECK(std::fabs(mean_of(t) - 1.0 / lambda) <= 3.0 / lambda / std::sqrt(static_cast<double>(trials)));
}

TEST_CASE("infinite beta from an empty start matches connectivity time")
{
    const node_t n = 30;
    const double lambda = 1.0;
    const int trials = 500;
    SampleSet a, b;
    for (int s = 0; s < trials; ++s) {
        Rng r1 = Rng(900).split(static_cast<std::uint64_t>(s));
        auto o = si(n, EdgeParams::from_rates(lambda, 0.0), InfectionRate::instantaneous());
        o.initial = InitialGraph::Empty;
        a.values.push_back(*simulate_si(o, r1).hitting(n));
        Rng r2 = Rng(901).split(static_cast<std::uint64_t>(s));
        b.values.push_back(connectivity_time(n, lambda, r2));
    }
    const auto ks = ks_two_sample(a, b);
    INFO("D = " << ks.statistic << " p = " << ks.p_value);
    CHECK(ks.p_value >= 1e-3);
}

TEST_CASE("time scaling: tau/r under (alpha, beta) matches tau under (r alpha, r beta)")
{
    const node_t n = 40, k = 20;
    const double p = 0.5, alpha = 0.5, beta = 1.0, r = 4.0;
    const int trials = 500;
    SampleSet slow, fast;
    for (int s = 0; s < trials; ++s) {
        Rng r1 = Rng(1200).split(static_cast<std::uint64_t>(s));
        auto o = si(n, derive_rates(p, alpha), InfectionRate::finite(beta));
        o.stop.target = k;
        slow.values.push_back(*simulate_si(o, r1).hitting(k) / r);
        Rng r2 = Rng(1201).split(static_cast<std::uint64_t>(s));
        auto q = si(n, derive_rates(p, r * alpha), InfectionRate::finite(r * beta));
        q.stop.target = k;
        fast.values.push_back(*simulate_si(q, r2).hitting(k));
    }
    const auto ks = ks_two_sample(slow, fast);
    INFO("D = " << ks.statistic << " p = " << ks.p_value);
    CHECK(ks.p_value >= 1e-3);
}

TEST_CASE("invalid SI inputs are rejected")
{
    Rng rng(1);
    auto o = si(10, EdgeParams::from_rates(1, 1), InfectionRate::finite(1));
    o.seeds = {};
    CHECK_THROWS_AS(simulate_si(o, rng), std::invalid_argument);
    o.seeds = {10};
    CHECK_THROWS_AS(simulate_si(o, rng), std::invalid_argument);
    o.seeds = {1, 1};
    CHECK_THROWS_AS(simulate_si(o, rng), std::invalid_argument);
    o = si(10, EdgeParams::with_instant_removal(1), InfectionRate::finite(1));
    CHECK_THROWS_AS(simulate_si(o, rng), std::invalid_argument);
}
