#include "dynet/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dynet/errors.hpp"
#include "pair_pool.hpp"

namespace dynet {

namespace {

using detail::PairPool;

class UnionFind {
public:
    explicit UnionFind(node_t n)
        : parent_(static_cast<std::size_t>(n))
        , size_(static_cast<std::size_t>(n), 1)
    {
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    node_t find(node_t x)
    {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(node_t a, node_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b)
            return false;
        if (size_[a] < size_[b])
            std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }

private:
    std::vector<node_t> parent_;
    std::vector<std::size_t> size_;
};

/// Infection state for the SI simulators.
class SiState {
public:
    SiState(const SiOptions& o, Rng& rng)
        : o_(o)
        , rng_(rng)
        , pool_(pair_count(o.n))
        , infected_(static_cast<std::size_t>(o.n), 0)
        , sus_pos_(static_cast<std::size_t>(o.n))
    {
        sus_.resize(static_cast<std::size_t>(o.n));
        std::iota(sus_.begin(), sus_.end(), 0);
        std::iota(sus_pos_.begin(), sus_pos_.end(), 0);
        if (o.initial == InitialGraph::Explicit)
            initial_bits_ = o.initial_snapshot.pair_bitmap();
        if (o.initial == InitialGraph::Stationary)
            p_stationary_ = derive_stationary(o.params).p;
    }

    /// Draws the present state of a pair with two susceptible endpoints.
    bool sample_untouched(node_t a, node_t b, double t)
    {
        double prob = 0.0;
        switch (o_.initial) {
        case InitialGraph::Stationary:
            prob = p_stationary_;
            break;
        case InitialGraph::Empty:
            prob = edge_on_probability(false, t, o_.params);
            break;
        case InitialGraph::Explicit:
            prob = edge_on_probability(initial_bits_[pair_index(a, b, o_.n)], t, o_.params);
            break;
        }
        if (prob <= 0.0)
            return false;
        if (prob >= 1.0)
            return true;
        return rng_.bernoulli(prob);
    }

    void mark_infected(node_t v)
    {
        infected_[v] = 1;
        const std::size_t k = sus_pos_[v];
        const node_t last = sus_.back();
        sus_[k] = last;
        sus_pos_[last] = k;
        sus_.pop_back();
    }

    /// Finite-β infection of one node: retire its I–S pairs, open new ones.
    void infect_one(node_t s, double t)
    {
        mark_infected(s);
        for (node_t i : inf_)
            pool_.erase(pair_index(i, s, o_.n));
        for (node_t v : sus_)
            pool_.insert(pair_index(s, v, o_.n), sample_untouched(s, v, t));
        inf_.push_back(s);
    }

    /// β = ∞: infect the start nodes and everything connected to them at time t.
    /// Returns the number of newly infected nodes.
    std::size_t infect_component(const std::vector<node_t>& start, double t)
    {
        std::vector<node_t> fresh;
        for (node_t s : start) {
            if (infected_[s])
                continue;
            mark_infected(s);
            fresh.push_back(s);
        }
        std::vector<pair_t> pending_off;
        for (std::size_t head = 0; head < fresh.size(); ++head) {
            const node_t u = fresh[head];
            std::size_t k = 0;
            while (k < sus_.size()) {
                const node_t v = sus_[k];
                if (sample_untouched(u, v, t)) {
                    mark_infected(v); // swap-remove: sus_[k] now holds another node
                    fresh.push_back(v);
                } else {
                    pending_off.push_back(pair_index(u, v, o_.n));
                    ++k;
                }
            }
        }
        for (node_t w : fresh)
            for (node_t i : inf_)
                pool_.erase(pair_index(i, w, o_.n));
        for (pair_t id : pending_off) {
            const Edge e = pair_from_index(id, o_.n);
            if (!(infected_[e.i] && infected_[e.j]))
                pool_.insert(id, false);
        }
        inf_.insert(inf_.end(), fresh.begin(), fresh.end());
        if (o_.record_events)
            fresh_ = fresh;
        return fresh.size();
    }

    node_t susceptible_endpoint(pair_t id) const
    {
        const Edge e = pair_from_index(id, o_.n);
        return infected_[e.i] ? e.j : e.i;
    }

    PairPool& pool() { return pool_; }
    node_t infected_count() const { return static_cast<node_t>(inf_.size()); }
    const std::vector<node_t>& last_fresh() const { return fresh_; }

private:
    const SiOptions& o_;
    Rng& rng_;
    PairPool pool_;
    std::vector<std::uint8_t> infected_;
    std::vector<node_t> sus_;
    std::vector<std::size_t> sus_pos_;
    std::vector<node_t> inf_;
    std::vector<bool> initial_bits_;
    std::vector<node_t> fresh_;
    double p_stationary_ = 0.0;
};

void validate_si(const SiOptions& o)
{
    if (o.n < 1)
        throw std::invalid_argument("n must be at least 1");
    if (o.seeds.empty())
        throw std::invalid_argument("at least one seed node is required");
    std::vector<node_t> sorted = o.seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("duplicate seed node");
    if (sorted.front() < 0 || sorted.back() >= o.n)
        throw std::invalid_argument("seed node out of range");
    if (!o.beta.infinite && !(o.beta.beta > 0.0 && std::isfinite(o.beta.beta)))
        throw std::invalid_argument("beta must be positive and finite, or infinite");
    if (!o.beta.infinite && o.params.instant_removal)
        throw std::invalid_argument("finite beta cannot transmit across instantly removed edges");
    if (o.initial == InitialGraph::Explicit) {
        if (o.initial_snapshot.n() != o.n)
            throw std::invalid_argument("initial snapshot has the wrong node count");
        if (o.params.instant_removal && o.initial_snapshot.edge_count() > 0)
            throw std::invalid_argument("instant-removal graphs have no edges at time 0");
    }
}

} // namespace

void check_node_cap(node_t n, const SimLimits& limits)
{
    if (n > limits.max_nodes)
        throw ResourceLimitExceeded("n = " + std::to_string(n) + " exceeds the node cap of "
                                    + std::to_string(limits.max_nodes)
                                    + " (raise it with DYNET_MAX_N)");
}

EventTrajectory simulate_dynamic_graph(node_t n, const EdgeParams& params,
                                       const GraphSnapshot& initial, double horizon,
                                       Rng& rng, const SimLimits& limits)
{
    if (initial.n() != n)
        throw std::invalid_argument("initial snapshot has the wrong node count");
    if (!(horizon >= 0.0))
        throw std::domain_error("horizon must be nonnegative");
    if (params.instant_removal)
        throw std::invalid_argument("instant-removal graphs have no persistent edges to simulate");
    check_node_cap(n, limits);

    EventTrajectory traj{initial, horizon, {}};
    const pair_t total = pair_count(n);
    PairPool pool(total);
    {
        const auto bits = initial.pair_bitmap();
        for (pair_t id = 0; id < total; ++id)
            pool.insert(id, bits[id]);
    }

    double t = 0.0;
    for (;;) {
        const double off_rate = params.mu * static_cast<double>(pool.size(true));
        const double on_rate = params.lambda * static_cast<double>(pool.size(false));
        const double rate = off_rate + on_rate;
        if (rate <= 0.0)
            break;
        t += rng.exponential(rate);
        if (t > horizon)
            break;
        const bool turning_off = rng.uniform() * rate < off_rate;
        const pair_t id = pool.at(turning_off, rng.below(pool.size(turning_off)));
        pool.toggle(id);
        const Edge e = pair_from_index(id, n);
        traj.events.push_back({t, turning_off ? EventKind::EdgeOff : EventKind::EdgeOn, e.i, e.j});
    }
    return traj;
}

GraphSnapshot graph_at(const EventTrajectory& traj, double t)
{
    const node_t n = traj.initial.n();
    auto bits = traj.initial.pair_bitmap();
    for (const auto& ev : traj.events) {
        if (ev.t > t)
            break;
        if (ev.kind == EventKind::EdgeOn)
            bits[pair_index(ev.i, ev.j, n)] = true;
        else if (ev.kind == EventKind::EdgeOff)
            bits[pair_index(ev.i, ev.j, n)] = false;
    }
    std::vector<Edge> edges;
    for (pair_t id = 0; id < bits.size(); ++id)
        if (bits[id])
            edges.push_back(pair_from_index(id, n));
    return GraphSnapshot(n, std::move(edges));
}

InfectionRate InfectionRate::finite(double beta)
{
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("beta must be positive and finite");
    return {beta, false};
}

SiTrajectory::SiTrajectory(node_t n, node_t initial_infected)
    : n_(n)
    , initial_(initial_infected)
    , hit_(static_cast<std::size_t>(initial_infected), 0.0)
{
}

std::optional<double> SiTrajectory::hitting(node_t k) const
{
    if (k < 1)
        throw std::invalid_argument("k must be at least 1");
    if (static_cast<std::size_t>(k) > hit_.size())
        return std::nullopt;
    return hit_[static_cast<std::size_t>(k) - 1];
}

node_t SiTrajectory::infected_at(double t) const
{
    node_t x = initial_;
    for (const auto& j : jumps_) {
        if (j.t > t)
            break;
        x = j.infected;
    }
    return x;
}

void SiTrajectory::record_jump(double t, node_t infected)
{
    if (infected <= final_infected())
        throw std::logic_error("infected count must increase at a jump");
    jumps_.push_back({t, infected});
    while (hit_.size() < static_cast<std::size_t>(infected))
        hit_.push_back(t);
}

SiTrajectory simulate_si(const SiOptions& o, Rng& rng, const SimLimits& limits)
{
    validate_si(o);
    check_node_cap(o.n, limits);
    const node_t target = o.stop.target.value_or(o.n);
    const auto seeds = static_cast<node_t>(o.seeds.size());
    SiTrajectory traj(o.n, seeds);
    SiState state(o, rng);
    auto& pool = state.pool();
    double t = 0.0;

    if (!o.beta.infinite) {
        for (node_t s : o.seeds)
            state.infect_one(s, 0.0);
        const double beta = o.beta.beta;
        const double lambda = o.params.lambda;
        const double mu = o.params.mu;
        while (state.infected_count() < target && state.infected_count() < o.n) {
            const auto on = static_cast<double>(pool.size(true));
            const auto off = static_cast<double>(pool.size(false));
            const double infect_rate = on * beta;
            const double rate = infect_rate + on * mu + off * lambda;
            if (rate <= 0.0)
                break;
            t += rng.exponential(rate);
            if (t > o.stop.horizon)
                break;
            const double u = rng.uniform() * rate;
            if (u < infect_rate) {
                const pair_t id = pool.at(true, rng.below(pool.size(true)));
                const node_t s = state.susceptible_endpoint(id);
                state.infect_one(s, t);
                traj.record_jump(t, state.infected_count());
                if (o.record_events)
                    traj.record_event({t, EventKind::Infect, s, -1});
            } else if (u < infect_rate + on * mu) {
                pool.toggle(pool.at(true, rng.below(pool.size(true))));
            } else {
                pool.toggle(pool.at(false, rng.below(pool.size(false))));
            }
        }
        return traj;
    }

    // β = ∞: no I–S pair is ever on, so the pool only holds off pairs.
    auto absorb = [&](const std::vector<node_t>& start) {
        if (state.infect_component(start, t) == 0)
            return;
        const node_t x = state.infected_count();
        if (x > traj.final_infected())
            traj.record_jump(t, x);
        if (o.record_events)
            for (node_t v : state.last_fresh())
                traj.record_event({t, EventKind::Infect, v, -1});
    };
    {
        // Seeds count as X(0); their components join at t = 0.
        state.infect_component(o.seeds, 0.0);
        const node_t x = state.infected_count();
        if (x > seeds) {
            traj.record_jump(0.0, x);
            if (o.record_events)
                for (node_t v : state.last_fresh())
                    if (std::find(o.seeds.begin(), o.seeds.end(), v) == o.seeds.end())
                        traj.record_event({0.0, EventKind::Infect, v, -1});
        }
    }
    const double lambda = o.params.lambda;
    while (state.infected_count() < target && state.infected_count() < o.n) {
        const double rate = lambda * static_cast<double>(pool.size(false));
        if (rate <= 0.0)
            break;
        t += rng.exponential(rate);
        if (t > o.stop.horizon)
            break;
        const pair_t id = pool.at(false, rng.below(pool.size(false)));
        absorb({state.susceptible_endpoint(id)});
    }
    return traj;
}

SiTrajectory simulate_si_alpha_inf(node_t n, double p, double beta, node_t seed_count,
                                   const SiStop& stop, Rng& rng)
{
    if (n < 1 || seed_count < 1 || seed_count > n)
        throw std::invalid_argument("need 1 <= seed_count <= n");
    if (!(p > 0.0 && p <= 1.0))
        throw std::invalid_argument("p must lie in (0, 1]");
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("beta must be positive and finite");
    const node_t target = stop.target.value_or(n);
    SiTrajectory traj(n, seed_count);
    double t = 0.0;
    for (node_t m = seed_count; m < n && m < target; ++m) {
        t += rng.exponential(beta * p * static_cast<double>(m) * static_cast<double>(n - m));
        if (t > stop.horizon)
            break;
        traj.record_jump(t, m + 1);
    }
    return traj;
}

double connectivity_time(node_t n, double lambda, Rng& rng)
{
    if (n < 2)
        throw std::invalid_argument("connectivity needs n >= 2");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("lambda must be positive and finite");
    // The appearance order of iid Exp(λ) clocks is a uniform permutation and
    // the gap before the (a+1)-th appearance is Exp(λ(M - a)).
    const pair_t total = pair_count(n);
    std::vector<bool> seen(total, false);
    UnionFind uf(n);
    node_t components = n;
    double t = 0.0;
    pair_t appeared = 0;
    while (components > 1) {
        t += rng.exponential(lambda * static_cast<double>(total - appeared));
        pair_t id = 0;
        do {
            id = rng.below(total);
        } while (seen[id]);
        seen[id] = true;
        ++appeared;
        const Edge e = pair_from_index(id, n);
        if (uf.unite(e.i, e.j))
            --components;
    }
    return t;
}

std::optional<double> hitting_time(const SiTrajectory& traj, node_t k)
{
    return traj.hitting(k);
}

} // namespace dynet
