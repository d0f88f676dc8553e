#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include "dynet/random.hpp"

namespace dynet {

using node_t = std::int32_t;
using pair_t = std::uint64_t;

/// Unordered node pair stored in canonical order i < j.
struct Edge {
    node_t i = 0;
    node_t j = 0;

    auto operator<=>(const Edge&) const = default;
};

/// Canonicalizes (a, b); throws std::invalid_argument on a self-loop.
Edge make_edge(node_t a, node_t b);

/// Number of unordered pairs on n nodes, n(n-1)/2.
pair_t pair_count(node_t n);

/// Dense index of the pair {i, j} in [0, pair_count(n)), row-major over i < j.
pair_t pair_index(node_t i, node_t j, node_t n);

/// Inverse of pair_index.
Edge pair_from_index(pair_t index, node_t n);

/// Rates of one telegraph edge: λ for 0→1 and μ for 1→0.
///
/// μ = ∞ is carried by `instant_removal` instead of a floating infinity:
/// such an edge flashes on at rate λ and disappears at once.
struct EdgeParams {
    double lambda = 0.0;
    double mu = 0.0;
    bool instant_removal = false;

    static EdgeParams from_rates(double lambda, double mu);
    static EdgeParams with_instant_removal(double lambda);

    /// λ + μ; throws DegenerateParameters for instant removal.
    double total_rate() const;
};

struct StationaryParams {
    double p = 0.0;     ///< stationary edge probability λ/(λ+μ)
    double alpha = 0.0; ///< cycle-completion rate μλ/(λ+μ)
};

StationaryParams derive_stationary(const EdgeParams& params);

/// (λ, μ) = (α/(1-p), α/p). Requires 0 < p < 1.
EdgeParams derive_rates(double p, double alpha);

/// Expected stationary degree (n-1)p.
double expected_degree(node_t n, double p);

/// Pr[e(t) = 1] given the state at time 0.
double edge_on_probability(bool initial_on, double t, const EdgeParams& params);

/// Node count plus a canonical (sorted, duplicate-free) undirected edge list.
class GraphSnapshot {
public:
    GraphSnapshot() = default;
    explicit GraphSnapshot(node_t n);
    GraphSnapshot(node_t n, std::vector<Edge> edges);

    node_t n() const { return n_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::size_t edge_count() const { return edges_.size(); }

    bool has_edge(node_t a, node_t b) const;

    /// Degree of every node.
    std::vector<std::size_t> degrees() const;

    /// Membership bitmap indexed by pair_index.
    std::vector<bool> pair_bitmap() const;

    friend bool operator==(const GraphSnapshot&, const GraphSnapshot&) = default;

private:
    node_t n_ = 0;
    std::vector<Edge> edges_;
};

/// One draw of G(n, p).
GraphSnapshot sample_stationary_graph(node_t n, double p, Rng& rng);

/// Toggle times of a single telegraph edge on [0, horizon].
std::vector<double> sample_edge_trajectory(bool initial_on, double horizon,
                                           const EdgeParams& params, Rng& rng);

} // namespace dynet
