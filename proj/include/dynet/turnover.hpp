#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dynet/core_model.hpp"
#include "dynet/random.hpp"
#include "dynet/stats.hpp"

namespace dynet {

// --- Dynamic Erdős–Rényi with node births and deaths ------------------------

struct TurnoverSample {
    double t = 0.0;
    node_t nodes = 0;
    std::int64_t edges = 0;
    double on_fraction = 0.0; ///< present edges / alive pairs (0 when fewer than 2 nodes)
};

struct TurnoverSnapshot {
    GraphSnapshot graph;      ///< alive nodes relabelled 0..N-1
    std::vector<double> ages; ///< age of each relabelled node
};

struct TurnoverOptions {
    double sample_interval = 1.0;      ///< spacing of TurnoverSample rows
    double burn_in = 0.0;              ///< no samples before this time
    double age_snapshot_interval = 0.0; ///< > 0: collect every alive node's age at these times
};

struct TurnoverTrajectory {
    std::vector<TurnoverSample> samples;
    std::vector<double> pooled_ages; ///< ages gathered at each age snapshot
    TurnoverSnapshot final;
    std::int64_t births = 0;
    std::int64_t deaths = 0;
    std::int64_t dangling_edge_violations = 0; ///< must stay 0
};

/// Births arrive as a Poisson process of rate n, each node dies at rate 1,
/// and every alive pair is a telegraph edge that starts off at the younger
/// node's birth. A death takes the node's edges with it. Starts from n
/// isolated nodes of age 0.
TurnoverTrajectory simulate_turnover_er(node_t n, const EdgeParams& params, double horizon, Rng& rng,
                                        const TurnoverOptions& options = {});

/// Edge probability p(1 - 1/(λ+μ+1)) in the turnover network, as printed.
double effective_edge_probability(double p, const EdgeParams& params);

/// p(1 - E[e^{-(λ+μ)T}]) with T ~ Exp(2), i.e. p(1 - 2/(λ+μ+2)).
double effective_edge_probability_rederived(double p, const EdgeParams& params);

// --- Preferential attachment with node removal ------------------------------

/// Piecewise-constant removal hazard fitted so the mean lifespan is n.
struct HazardCalibration {
    enum class Mode { Piecewise, Truncation };

    Mode mode = Mode::Piecewise;
    double gamma = 3.0;
    double n = 1.0;
    double young_hazard = 0.0; ///< h0 on ages below `breakpoint`
    double breakpoint = 0.0;   ///< t0
    double tail_hazard = 0.0;  ///< (γ-1)/(2n) on ages >= t0
    double max_age = 0.0;      ///< truncation mode: forced removal at this age
    double mean_lifespan = 0.0;
    std::string note; ///< which way the young hazard moved, or why truncation was used

    double hazard(double age) const;
    double survival(double age) const;
};

/// Solves for the breakpoint t0 given a young hazard h0 so that
/// ∫ S(t) dt = n. Default h0: 0 for γ > 3, 2/n for γ < 3, and the plain
/// exponential (h0 = 1/n, t0 = 0) at γ = 3. An h0 that admits no solution
/// yields truncation mode for γ < 3 and h0 = 0 for γ > 3, with a note.
HazardCalibration calibrate_hazard(double gamma, double n);
HazardCalibration calibrate_hazard(double gamma, double n, double young_hazard);

/// Numerical ∫_0^∞ S(t) dt for a calibration, independent of the solver.
double integrate_mean_lifespan(const HazardCalibration& cal);

struct LifespanPolicy {
    enum class Kind { Exponential, HazardGamma, Fifo };

    Kind kind = Kind::Exponential;
    HazardCalibration calibration; ///< HazardGamma only

    static LifespanPolicy exponential() { return {}; }
    static LifespanPolicy fifo() { return {Kind::Fifo, {}}; }
    static LifespanPolicy hazard_gamma(const HazardCalibration& cal) { return {Kind::HazardGamma, cal}; }

    /// Survival 1 - F_l(t) of a node's lifespan for network size n.
    double survival(double age, double n) const;
};

struct PaOptions {
    bool average_last_tenth = false; ///< also time-average the histogram over the last 10% of steps
    bool trace_total_degree = false;
};

struct PaResult {
    DegreeHistogram final;
    DegreeHistogram averaged; ///< empty unless requested; counts are summed over sampled steps
    std::vector<std::int64_t> total_degree_trace;
    double mean_total_degree = 0.0; ///< over the second half of the run
    std::int64_t bookkeeping_violations = 0;
    bool reseeded = false;
};

/// Discrete-time preferential attachment at constant size n: each step
/// removes one node by the policy, then adds a node with m distinct
/// degree-proportional links. The initial graph is grown by ordinary
/// preferential attachment from an (m+1)-clique.
PaResult simulate_pa_turnover(node_t n, int m, const LifespanPolicy& policy, std::int64_t steps, Rng& rng,
                              const PaOptions& options = {});

/// (2/k) S(2n log(k/m)) for an arbitrary survival function.
double degree_density_from_survival(double k, int m, double n, const std::function<double(double)>& survival);

/// Degree density predicted from the lifespan law: 2m²/k³, (2/k)S_γ(...), or
/// 2/k on [m, m√e]. Zero below m.
double predicted_degree_density(double k, int m, double n, const LifespanPolicy& policy);

} // namespace dynet
