#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "dynet/core_model.hpp"
#include "dynet/random.hpp"

namespace dynet {

/// Default cap on the node count of full-graph simulations.
inline constexpr node_t kDefaultMaxNodes = 5000;

struct SimLimits {
    node_t max_nodes = kDefaultMaxNodes;
};

/// Throws ResourceLimitExceeded if n exceeds the cap.
void check_node_cap(node_t n, const SimLimits& limits);

enum class EventKind { EdgeOn, EdgeOff, Infect };

struct Event {
    double t = 0.0;
    EventKind kind = EventKind::EdgeOn;
    node_t i = 0;
    node_t j = -1; ///< -1 for Infect

    friend bool operator==(const Event&, const Event&) = default;
};

struct EventTrajectory {
    GraphSnapshot initial;
    double horizon = 0.0;
    std::vector<Event> events;
};

/// Joint simulation of all n(n-1)/2 independent telegraph edges.
///
/// Direct-method Gillespie over two indexed pair sets (present / absent):
/// the next event fires after Exp(μ·|on| + λ·|off|) and picks a pair
/// uniformly from the chosen set.
EventTrajectory simulate_dynamic_graph(node_t n, const EdgeParams& params,
                                       const GraphSnapshot& initial, double horizon,
                                       Rng& rng, const SimLimits& limits = {});

/// Replays events on top of the initial snapshot and returns the graph at time t.
GraphSnapshot graph_at(const EventTrajectory& traj, double t);

/// Infection rate across a present edge; `infinite` means instantaneous
/// spread through connected components.
struct InfectionRate {
    double beta = 0.0;
    bool infinite = false;

    static InfectionRate finite(double beta);
    static InfectionRate instantaneous() { return {0.0, true}; }
};

/// How the edge states look at time 0.
enum class InitialGraph {
    Stationary, ///< G(n, p), the steady state
    Empty,      ///< no edges; every pair starts off
    Explicit    ///< the snapshot in SiOptions::initial_snapshot
};

struct SiStop {
    double horizon = std::numeric_limits<double>::infinity();
    std::optional<node_t> target; ///< stop once X(t) >= target (default: n)
};

struct SiOptions {
    node_t n = 0;
    EdgeParams params;
    InfectionRate beta;
    std::vector<node_t> seeds{0};
    SiStop stop;
    InitialGraph initial = InitialGraph::Stationary;
    GraphSnapshot initial_snapshot;
    bool record_events = false; ///< keep Infect events for export
};

struct SiJump {
    double t = 0.0;
    node_t infected = 0; ///< X after the jump

    friend bool operator==(const SiJump&, const SiJump&) = default;
};

/// Step function X(t) with the first-passage times τ_k.
class SiTrajectory {
public:
    SiTrajectory() = default;
    SiTrajectory(node_t n, node_t initial_infected);

    node_t n() const { return n_; }
    node_t initial_infected() const { return initial_; }
    node_t final_infected() const { return jumps_.empty() ? initial_ : jumps_.back().infected; }

    /// Jumps after time 0's seed placement; the seed count itself is initial_infected().
    const std::vector<SiJump>& jumps() const { return jumps_; }

    const std::vector<Event>& events() const { return events_; }

    /// τ_k, or nullopt if X never reached k.
    std::optional<double> hitting(node_t k) const;

    /// X(t) (right-continuous).
    node_t infected_at(double t) const;

    void record_jump(double t, node_t infected);
    void record_event(const Event& ev) { events_.push_back(ev); }

    friend bool operator==(const SiTrajectory&, const SiTrajectory&) = default;

private:
    node_t n_ = 0;
    node_t initial_ = 0;
    std::vector<SiJump> jumps_;
    std::vector<double> hit_; ///< hit_[k-1] = τ_k for k <= final_infected()
    std::vector<Event> events_;
};

/// SI contact process on the dynamic graph G(n, λ, μ).
///
/// Only pairs with exactly one infected endpoint carry clocks. A pair whose
/// endpoints are both susceptible has not been observed since time 0, so its
/// state is drawn from edge_on_probability at the moment it first matters.
SiTrajectory simulate_si(const SiOptions& options, Rng& rng, const SimLimits& limits = {});

/// α = ∞ limit: a pure-birth chain with rate βp·m(n-m) out of m infected.
SiTrajectory simulate_si_alpha_inf(node_t n, double p, double beta, node_t seed_count,
                                   const SiStop& stop, Rng& rng);

/// inf{t : graph connected} when edges only appear (μ = 0) from an empty start.
double connectivity_time(node_t n, double lambda, Rng& rng);

/// τ_k = inf{t : X(t) >= k}.
std::optional<double> hitting_time(const SiTrajectory& traj, node_t k);

} // namespace dynet
