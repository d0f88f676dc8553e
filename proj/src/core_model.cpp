#include "dynet/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dynet/errors.hpp"

namespace dynet {

namespace {

pair_t row_start(pair_t i, pair_t n)
{
    return i * (2 * n - i - 1) / 2;
}

} // namespace

Edge make_edge(node_t a, node_t b)
{
    if (a == b)
        throw std::invalid_argument("self-loop on node " + std::to_string(a));
    return a < b ? Edge{a, b} : Edge{b, a};
}

pair_t pair_count(node_t n)
{
    if (n < 2)
        return 0;
    const auto nn = static_cast<pair_t>(n);
    return nn * (nn - 1) / 2;
}

pair_t pair_index(node_t i, node_t j, node_t n)
{
    if (i > j)
        std::swap(i, j);
    return row_start(static_cast<pair_t>(i), static_cast<pair_t>(n)) + static_cast<pair_t>(j - i - 1);
}

Edge pair_from_index(pair_t index, node_t n)
{
    const auto nn = static_cast<pair_t>(n);
    // Real root of row_start(i) = index, then nudge to the exact row.
    const double b = 2.0 * static_cast<double>(nn) - 1.0;
    auto i = static_cast<pair_t>(std::max(0.0, std::floor((b - std::sqrt(b * b - 8.0 * static_cast<double>(index))) / 2.0)));
    while (i > 0 && row_start(i, nn) > index)
        --i;
    while (i + 1 < nn && row_start(i + 1, nn) <= index)
        ++i;
    const pair_t j = index - row_start(i, nn) + i + 1;
    return Edge{static_cast<node_t>(i), static_cast<node_t>(j)};
}

EdgeParams EdgeParams::from_rates(double lambda, double mu)
{
    if (!(lambda >= 0.0) || !(mu >= 0.0) || !std::isfinite(lambda) || !std::isfinite(mu))
        throw std::invalid_argument("edge rates must be finite and nonnegative");
    return EdgeParams{lambda, mu, false};
}

EdgeParams EdgeParams::with_instant_removal(double lambda)
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("edge appearance rate must be finite and nonnegative");
    return EdgeParams{lambda, 0.0, true};
}

double EdgeParams::total_rate() const
{
    if (instant_removal)
        throw DegenerateParameters("total rate is infinite under instant removal");
    return lambda + mu;
}

StationaryParams derive_stationary(const EdgeParams& params)
{
    if (params.instant_removal)
        return {0.0, params.lambda};
    const double total = params.lambda + params.mu;
    if (!(total > 0.0))
        throw DegenerateParameters("lambda + mu must be positive");
    return {params.lambda / total, params.mu * params.lambda / total};
}

EdgeParams derive_rates(double p, double alpha)
{
    if (!(p > 0.0 && p < 1.0))
        throw DegenerateParameters("derive_rates needs 0 < p < 1; use one-sided rates for p in {0, 1}");
    if (!(alpha >= 0.0))
        throw std::invalid_argument("alpha must be nonnegative");
    return EdgeParams::from_rates(alpha / (1.0 - p), alpha / p);
}

double expected_degree(node_t n, double p)
{
    return static_cast<double>(n - 1) * p;
}

double edge_on_probability(bool initial_on, double t, const EdgeParams& params)
{
    if (!(t >= 0.0))
        throw std::domain_error("time must be nonnegative");
    const double start = initial_on ? 1.0 : 0.0;
    if (params.instant_removal)
        return t == 0.0 ? start : 0.0;
    const double total = params.lambda + params.mu;
    if (total == 0.0)
        return start;
    const double p = params.lambda / total;
    return p + (start - p) * std::exp(-total * t);
}

GraphSnapshot::GraphSnapshot(node_t n)
    : n_(n)
{
    if (n < 0)
        throw std::invalid_argument("node count must be nonnegative");
}

GraphSnapshot::GraphSnapshot(node_t n, std::vector<Edge> edges)
    : n_(n)
    , edges_(std::move(edges))
{
    if (n < 0)
        throw std::invalid_argument("node count must be nonnegative");
    for (auto& e : edges_) {
        e = make_edge(e.i, e.j);
        if (e.i < 0 || e.j >= n)
            throw std::invalid_argument("edge endpoint out of range");
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
        throw std::invalid_argument("duplicate edge");
}

bool GraphSnapshot::has_edge(node_t a, node_t b) const
{
    if (a == b)
        return false;
    return std::binary_search(edges_.begin(), edges_.end(), make_edge(a, b));
}

std::vector<std::size_t> GraphSnapshot::degrees() const
{
    std::vector<std::size_t> deg(static_cast<std::size_t>(n_), 0);
    for (const auto& e : edges_) {
        ++deg[static_cast<std::size_t>(e.i)];
        ++deg[static_cast<std::size_t>(e.j)];
    }
    return deg;
}

std::vector<bool> GraphSnapshot::pair_bitmap() const
{
    std::vector<bool> bits(pair_count(n_), false);
    for (const auto& e : edges_)
        bits[pair_index(e.i, e.j, n_)] = true;
    return bits;
}

GraphSnapshot sample_stationary_graph(node_t n, double p, Rng& rng)
{
    if (n < 1)
        throw std::invalid_argument("n must be at least 1");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("p must lie in [0, 1]");
    std::vector<Edge> edges;
    const pair_t total = pair_count(n);
    if (p == 0.0 || total == 0)
        return GraphSnapshot(n);
    if (p == 1.0) {
        edges.reserve(total);
        for (node_t i = 0; i < n; ++i)
            for (node_t j = i + 1; j < n; ++j)
                edges.push_back({i, j});
        return GraphSnapshot(n, std::move(edges));
    }
    // Geometric skipping over the pair index space; pairs come out in
    // canonical order, so the edge list is already sorted.
    const double log_q = std::log1p(-p);
    edges.reserve(static_cast<std::size_t>(static_cast<double>(total) * p * 1.1) + 16);
    double index = -1.0;
    for (;;) {
        index += 1.0 + std::floor(std::log(rng.uniform()) / log_q);
        if (index >= static_cast<double>(total))
            break;
        edges.push_back(pair_from_index(static_cast<pair_t>(index), n));
    }
    return GraphSnapshot(n, std::move(edges));
}

std::vector<double> sample_edge_trajectory(bool initial_on, double horizon,
                                           const EdgeParams& params, Rng& rng)
{
    if (!(horizon >= 0.0))
        throw std::domain_error("horizon must be nonnegative");
    if (params.instant_removal)
        throw std::invalid_argument("instant-removal edges have no on-intervals to sample");
    std::vector<double> toggles;
    bool on = initial_on;
    double t = 0.0;
    for (;;) {
        const double rate = on ? params.mu : params.lambda;
        if (rate <= 0.0)
            break;
        const double next = t + rng.exponential(rate);
        if (next > horizon)
            break;
        // Guard against a zero-length holding time collapsing two toggles.
        if (next <= t)
            continue;
        t = next;
        toggles.push_back(t);
        on = !on;
    }
    return toggles;
}

} // namespace dynet
