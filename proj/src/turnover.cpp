#include "dynet/turnover.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "dynet/errors.hpp"
#include "fenwick.hpp"
#include "pair_pool.hpp"

namespace dynet {

using detail::Fenwick;
using detail::PairPool;

// --- turnover ER -------------------------------------------------------------

namespace {

class TurnoverState {
public:
    TurnoverState(node_t n, node_t capacity)
        : capacity_(capacity)
        , pool_(pair_count(capacity))
        , birth_(static_cast<std::size_t>(capacity), 0.0)
        , alive_pos_(static_cast<std::size_t>(capacity), -1)
    {
        for (node_t s = capacity - 1; s >= 0; --s)
            free_.push_back(s);
        for (node_t i = 0; i < n; ++i)
            birth(0.0);
    }

    node_t alive_count() const { return static_cast<node_t>(alive_.size()); }
    PairPool& pool() { return pool_; }
    node_t capacity() const { return capacity_; }

    void birth(double t)
    {
        if (free_.empty())
            grow();
        const node_t s = free_.back();
        free_.pop_back();
        for (node_t a : alive_)
            pool_.insert(pair_index(a, s, capacity_), false);
        birth_[s] = t;
        alive_pos_[s] = static_cast<std::int64_t>(alive_.size());
        alive_.push_back(s);
    }

    void death(node_t s)
    {
        for (node_t a : alive_)
            if (a != s)
                pool_.erase(pair_index(a, s, capacity_));
        const auto k = static_cast<std::size_t>(alive_pos_[s]);
        const node_t last = alive_.back();
        alive_[k] = last;
        alive_pos_[last] = static_cast<std::int64_t>(k);
        alive_.pop_back();
        alive_pos_[s] = -1;
        free_.push_back(s);
    }

    node_t alive_at(std::size_t k) const { return alive_[k]; }

    std::int64_t alive_pairs() const
    {
        const auto a = static_cast<std::int64_t>(alive_.size());
        return a * (a - 1) / 2;
    }

    void collect_ages(double t, std::vector<double>& out) const
    {
        for (node_t a : alive_)
            out.push_back(t - birth_[a]);
    }

    TurnoverSnapshot snapshot(double t) const
    {
        std::vector<node_t> label(static_cast<std::size_t>(capacity_), -1);
        TurnoverSnapshot snap;
        for (std::size_t k = 0; k < alive_.size(); ++k) {
            label[alive_[k]] = static_cast<node_t>(k);
            snap.ages.push_back(t - birth_[alive_[k]]);
        }
        std::vector<Edge> edges;
        for (std::size_t k = 0; k < pool_.size(true); ++k) {
            const Edge e = pair_from_index(pool_.at(true, k), capacity_);
            edges.push_back(make_edge(label[e.i], label[e.j]));
        }
        snap.graph = GraphSnapshot(static_cast<node_t>(alive_.size()), std::move(edges));
        return snap;
    }

private:
    // Re-index every alive pair into a larger slot universe.
    void grow()
    {
        const node_t bigger = capacity_ * 2;
        PairPool next(pair_count(bigger));
        for (bool on : {false, true})
            for (std::size_t k = 0; k < pool_.size(on); ++k) {
                const Edge e = pair_from_index(pool_.at(on, k), capacity_);
                next.insert(pair_index(e.i, e.j, bigger), on);
            }
        pool_ = std::move(next);
        birth_.resize(static_cast<std::size_t>(bigger), 0.0);
        alive_pos_.resize(static_cast<std::size_t>(bigger), -1);
        for (node_t s = bigger - 1; s >= capacity_; --s)
            free_.insert(free_.begin(), s);
        capacity_ = bigger;
    }

    node_t capacity_;
    PairPool pool_;
    std::vector<double> birth_;
    std::vector<std::int64_t> alive_pos_;
    std::vector<node_t> alive_;
    std::vector<node_t> free_;
};

} // namespace

TurnoverTrajectory simulate_turnover_er(node_t n, const EdgeParams& params, double horizon, Rng& rng,
                                        const TurnoverOptions& options)
{
    if (n < 1)
        throw std::invalid_argument("n must be at least 1");
    if (!(horizon > 0.0))
        throw std::invalid_argument("horizon must be positive");
    if (params.instant_removal)
        throw std::invalid_argument("turnover networks need a finite edge removal rate");
    if (!(options.sample_interval > 0.0))
        throw std::invalid_argument("sample interval must be positive");

    const double dn = static_cast<double>(n);
    const auto capacity = static_cast<node_t>(dn + 10.0 * std::sqrt(dn) + 50.0);
    TurnoverState state(n, capacity);
    TurnoverTrajectory traj;
    auto& pool = state.pool();

    double next_sample = options.burn_in;
    double next_ages = options.age_snapshot_interval > 0.0 ? std::max(options.burn_in, options.age_snapshot_interval)
                                                           : std::numeric_limits<double>::infinity();
    auto record_until = [&](double until) {
        while (next_sample <= until && next_sample <= horizon) {
            TurnoverSample s;
            s.t = next_sample;
            s.nodes = state.alive_count();
            s.edges = static_cast<std::int64_t>(pool.size(true));
            const auto pairs = state.alive_pairs();
            s.on_fraction = pairs > 0 ? static_cast<double>(s.edges) / static_cast<double>(pairs) : 0.0;
            traj.samples.push_back(s);
            next_sample += options.sample_interval;
        }
        while (next_ages <= until && next_ages <= horizon) {
            state.collect_ages(next_ages, traj.pooled_ages);
            next_ages += options.age_snapshot_interval;
        }
    };

    double t = 0.0;
    for (;;) {
        const double birth_rate = dn;
        const double death_rate = static_cast<double>(state.alive_count());
        const double off_rate = params.mu * static_cast<double>(pool.size(true));
        const double on_rate = params.lambda * static_cast<double>(pool.size(false));
        const double rate = birth_rate + death_rate + off_rate + on_rate;
        const double next = t + rng.exponential(rate);
        record_until(std::min(next, horizon));
        if (next > horizon)
            break;
        t = next;
        double u = rng.uniform() * rate;
        if (u < birth_rate) {
            state.birth(t);
            ++traj.births;
        } else if ((u -= birth_rate) < death_rate) {
            const node_t victim = state.alive_at(rng.below(static_cast<std::uint64_t>(state.alive_count())));
            state.death(victim);
            ++traj.deaths;
            if (static_cast<std::int64_t>(pool.size(true) + pool.size(false)) != state.alive_pairs())
                ++traj.dangling_edge_violations;
        } else if ((u -= death_rate) < off_rate) {
            pool.toggle(pool.at(true, rng.below(pool.size(true))));
        } else {
            pool.toggle(pool.at(false, rng.below(pool.size(false))));
        }
    }
    traj.final = state.snapshot(horizon);
    return traj;
}

double effective_edge_probability(double p, const EdgeParams& params)
{
    return p * (1.0 - 1.0 / (params.total_rate() + 1.0));
}

double effective_edge_probability_rederived(double p, const EdgeParams& params)
{
    return p * (1.0 - 2.0 / (params.total_rate() + 2.0));
}

// --- hazard calibration --------------------------------------------------------

double HazardCalibration::hazard(double age) const
{
    if (mode == Mode::Truncation)
        return age < max_age ? tail_hazard : std::numeric_limits<double>::infinity();
    return age < breakpoint ? young_hazard : tail_hazard;
}

double HazardCalibration::survival(double age) const
{
    if (age <= 0.0)
        return 1.0;
    if (mode == Mode::Truncation)
        return age < max_age ? std::exp(-tail_hazard * age) : 0.0;
    if (age < breakpoint)
        return std::exp(-young_hazard * age);
    return std::exp(-young_hazard * breakpoint - tail_hazard * (age - breakpoint));
}

namespace {

double piecewise_mean(double h0, double t0, double h1)
{
    const double head = h0 > 0.0 ? -std::expm1(-h0 * t0) / h0 : t0;
    return head + std::exp(-h0 * t0) / h1;
}

HazardCalibration truncation_calibration(double gamma, double n, std::string note)
{
    HazardCalibration cal;
    cal.mode = HazardCalibration::Mode::Truncation;
    cal.gamma = gamma;
    cal.n = n;
    cal.tail_hazard = (gamma - 1.0) / (2.0 * n);
    cal.young_hazard = cal.tail_hazard;
    // (1 - e^{-hA})/h = n
    cal.max_age = -std::log1p(-cal.tail_hazard * n) / cal.tail_hazard;
    cal.mean_lifespan = -std::expm1(-cal.tail_hazard * cal.max_age) / cal.tail_hazard;
    cal.note = std::move(note);
    return cal;
}

} // namespace

HazardCalibration calibrate_hazard(double gamma, double n)
{
    if (!(n > 0.0))
        throw std::invalid_argument("n must be positive");
    double h0 = 1.0 / n;
    if (gamma > 3.0)
        h0 = 0.0;
    else if (gamma < 3.0)
        h0 = 2.0 / n;
    return calibrate_hazard(gamma, n, h0);
}

HazardCalibration calibrate_hazard(double gamma, double n, double young_hazard)
{
    if (!(gamma > 1.0))
        throw std::invalid_argument("gamma must exceed 1");
    if (!(n > 0.0))
        throw std::invalid_argument("n must be positive");
    if (!(young_hazard >= 0.0))
        throw std::invalid_argument("young hazard must be nonnegative");

    HazardCalibration cal;
    cal.gamma = gamma;
    cal.n = n;
    cal.tail_hazard = (gamma - 1.0) / (2.0 * n);
    const double h1 = cal.tail_hazard;

    if (gamma == 3.0) {
        cal.young_hazard = h1;
        cal.breakpoint = 0.0;
        cal.mean_lifespan = 1.0 / h1;
        cal.note = "gamma = 3: plain exponential lifespan";
        return cal;
    }

    // Mean lifespan runs monotonically from 1/h1 (t0 = 0) to 1/h0 (t0 → ∞).
    const double at_zero = 1.0 / h1;
    const double at_inf = young_hazard > 0.0 ? 1.0 / young_hazard : std::numeric_limits<double>::infinity();
    const bool feasible = (at_zero < n && n < at_inf) || (at_inf < n && n < at_zero);
    if (!feasible) {
        if (gamma < 3.0)
            return truncation_calibration(gamma, n, "no breakpoint solves the mean constraint for this young hazard; "
                                                    "truncating at a maximum age instead");
        return calibrate_hazard(gamma, n, 0.0);
    }

    cal.young_hazard = young_hazard;
    double lo = 0.0;
    double hi = n;
    auto excess = [&](double t0) { return piecewise_mean(young_hazard, t0, h1) - n; };
    const bool increasing = at_inf > at_zero;
    while ((excess(hi) < 0.0) == increasing)
        hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((excess(mid) < 0.0) == increasing)
            lo = mid;
        else
            hi = mid;
    }
    cal.breakpoint = 0.5 * (lo + hi);
    cal.mean_lifespan = piecewise_mean(young_hazard, cal.breakpoint, h1);
    cal.note = young_hazard < h1 ? "young-node hazard lowered below the tail hazard"
                                 : "young-node hazard raised above the tail hazard";
    return cal;
}

double integrate_mean_lifespan(const HazardCalibration& cal)
{
    // Composite Simpson on each smooth piece; the exponential tail is cut
    // where it has decayed by e^-60.
    auto simpson = [&](double a, double b, int intervals) {
        if (b <= a)
            return 0.0;
        const double h = (b - a) / intervals;
        double sum = cal.survival(a) + cal.survival(b - 1e-12 * (b - a));
        for (int i = 1; i < intervals; ++i)
            sum += cal.survival(a + i * h) * (i % 2 ? 4.0 : 2.0);
        return sum * h / 3.0;
    };
    constexpr int kIntervals = 200000;
    if (cal.mode == HazardCalibration::Mode::Truncation)
        return simpson(0.0, cal.max_age, kIntervals);
    const double tail_end = cal.breakpoint + 60.0 / cal.tail_hazard;
    return simpson(0.0, cal.breakpoint, kIntervals) + simpson(cal.breakpoint, tail_end, kIntervals);
}

double LifespanPolicy::survival(double age, double n) const
{
    switch (kind) {
    case Kind::Exponential:
        return std::exp(-age / n);
    case Kind::Fifo:
        return age < n ? 1.0 : 0.0;
    case Kind::HazardGamma:
        return calibration.survival(age);
    }
    return 0.0;
}

double degree_density_from_survival(double k, int m, double n, const std::function<double(double)>& survival)
{
    const double dm = m;
    if (k < dm)
        return 0.0;
    return (2.0 / k) * survival(2.0 * n * std::log(k / dm));
}

double predicted_degree_density(double k, int m, double n, const LifespanPolicy& policy)
{
    const double dm = m;
    if (k < dm)
        return 0.0;
    switch (policy.kind) {
    case LifespanPolicy::Kind::Exponential:
        return 2.0 * dm * dm / (k * k * k);
    case LifespanPolicy::Kind::Fifo:
        return k <= dm * std::sqrt(std::numbers::e) ? 2.0 / k : 0.0;
    case LifespanPolicy::Kind::HazardGamma:
        return degree_density_from_survival(k, m, n, [&](double a) { return policy.calibration.survival(a); });
    }
    return 0.0;
}

// --- preferential attachment with removal -------------------------------------

namespace {

class PaNetwork {
public:
    PaNetwork(node_t n, int m, Rng& rng)
        : n_(n)
        , m_(m)
        , rng_(rng)
        , adj_(static_cast<std::size_t>(n))
        , degree_(static_cast<std::size_t>(n))
    {
    }

    std::int64_t total_degree() const { return degree_.total(); }
    std::size_t degree(node_t v) const { return adj_[v].size(); }

    void connect(node_t a, node_t b)
    {
        if (adj_[a].empty())
            ++positive_;
        if (adj_[b].empty())
            ++positive_;
        adj_[a].push_back(b);
        adj_[b].push_back(a);
        degree_.add(static_cast<std::size_t>(a), 1);
        degree_.add(static_cast<std::size_t>(b), 1);
    }

    /// Removes every edge at v; returns v's former degree.
    std::size_t isolate(node_t v)
    {
        const std::size_t d = adj_[v].size();
        for (node_t nb : adj_[v]) {
            auto& list = adj_[nb];
            auto it = std::find(list.begin(), list.end(), v);
            *it = list.back();
            list.pop_back();
            degree_.add(static_cast<std::size_t>(nb), -1);
            if (list.empty())
                --positive_;
        }
        if (d > 0)
            --positive_;
        adj_[v].clear();
        degree_.set(static_cast<std::size_t>(v), 0);
        return d;
    }

    /// m distinct degree-proportional targets for a new node at `self`
    /// (whose weight is zero). Returns false and picks uniformly when fewer
    /// than m nodes carry any weight.
    bool draw_targets(node_t self, node_t population, std::vector<node_t>& out)
    {
        out.clear();
        if (positive_ < m_) {
            while (static_cast<int>(out.size()) < m_) {
                const auto v = static_cast<node_t>(rng_.below(static_cast<std::uint64_t>(population)));
                if (v != self && std::find(out.begin(), out.end(), v) == out.end())
                    out.push_back(v);
            }
            return false;
        }
        while (static_cast<int>(out.size()) < m_) {
            const auto target = static_cast<std::int64_t>(rng_.below(static_cast<std::uint64_t>(degree_.total())));
            const auto v = static_cast<node_t>(degree_.find(target));
            if (v != self && std::find(out.begin(), out.end(), v) == out.end())
                out.push_back(v);
        }
        return true;
    }

    void histogram_into(DegreeHistogram& hist) const
    {
        for (const auto& list : adj_)
            hist.add(static_cast<std::int64_t>(list.size()));
    }

private:
    node_t n_;
    int m_;
    Rng& rng_;
    std::vector<std::vector<node_t>> adj_;
    Fenwick<std::int64_t> degree_;
    int positive_ = 0;
};

/// Picks the node removed at each step.
class RemovalRule {
public:
    RemovalRule(const LifespanPolicy& policy, node_t n, Rng& rng)
        : policy_(policy)
        , n_(n)
        , rng_(rng)
        , birth_(static_cast<std::size_t>(n))
        , hazard_(static_cast<std::size_t>(n))
    {
    }

    void born(node_t slot, std::int64_t step)
    {
        birth_[slot] = step;
        order_.push_back({step, slot});
        if (policy_.kind == LifespanPolicy::Kind::HazardGamma)
            hazard_.set(static_cast<std::size_t>(slot), finite_hazard(0.0));
    }

    node_t choose(std::int64_t step)
    {
        switch (policy_.kind) {
        case LifespanPolicy::Kind::Exponential:
            return static_cast<node_t>(rng_.below(static_cast<std::uint64_t>(n_)));
        case LifespanPolicy::Kind::Fifo:
            return oldest_alive();
        case LifespanPolicy::Kind::HazardGamma:
            break;
        }
        const auto& cal = policy_.calibration;
        // Ages only change class at the breakpoint; refresh nodes crossing it.
        while (cross_ < order_.size()
               && static_cast<double>(step - order_[cross_].birth) >= cal.breakpoint) {
            const auto [birth, slot] = order_[cross_];
            if (birth_[slot] == birth)
                hazard_.set(static_cast<std::size_t>(slot), finite_hazard(static_cast<double>(step - birth)));
            ++cross_;
        }
        if (cal.mode == HazardCalibration::Mode::Truncation) {
            const node_t oldest = oldest_alive();
            if (static_cast<double>(step - birth_[oldest]) >= cal.max_age)
                return oldest;
        }
        if (!(hazard_.total() > 0.0))
            return static_cast<node_t>(rng_.below(static_cast<std::uint64_t>(n_)));
        return static_cast<node_t>(hazard_.find(rng_.uniform() * hazard_.total()));
    }

    void removed(node_t slot)
    {
        if (policy_.kind == LifespanPolicy::Kind::HazardGamma)
            hazard_.set(static_cast<std::size_t>(slot), 0.0);
        birth_[slot] = std::numeric_limits<std::int64_t>::min();
    }

private:
    struct Entry {
        std::int64_t birth;
        node_t slot;
    };

    double finite_hazard(double age) const
    {
        const auto& cal = policy_.calibration;
        if (cal.mode == HazardCalibration::Mode::Truncation)
            return cal.tail_hazard;
        return cal.hazard(age);
    }

    node_t oldest_alive()
    {
        while (birth_[order_[front_].slot] != order_[front_].birth)
            ++front_;
        return order_[front_].slot;
    }

    const LifespanPolicy& policy_;
    node_t n_;
    Rng& rng_;
    std::vector<std::int64_t> birth_;
    std::deque<Entry> order_;
    std::size_t front_ = 0;
    std::size_t cross_ = 0;
    Fenwick<double> hazard_;
};

} // namespace

PaResult simulate_pa_turnover(node_t n, int m, const LifespanPolicy& policy, std::int64_t steps, Rng& rng,
                              const PaOptions& options)
{
    if (m < 1)
        throw std::invalid_argument("m must be at least 1");
    if (n <= m)
        throw std::invalid_argument("n must exceed m");
    if (steps < 0)
        throw std::invalid_argument("steps must be nonnegative");

    PaNetwork net(n, m, rng);
    RemovalRule removal(policy, n, rng);
    PaResult result;
    result.final.m = m;
    result.averaged.m = m;

    // Seed graph: an (m+1)-clique grown to n nodes by preferential attachment.
    for (node_t a = 0; a <= m; ++a)
        for (node_t b = a + 1; b <= m; ++b)
            net.connect(a, b);
    std::vector<node_t> targets;
    for (node_t s = m + 1; s < n; ++s) {
        net.draw_targets(s, s, targets);
        for (node_t v : targets)
            net.connect(s, v);
    }
    for (node_t s = 0; s < n; ++s)
        removal.born(s, static_cast<std::int64_t>(s) - n);

    const std::int64_t average_from = steps - steps / 10;
    const std::int64_t average_every = std::max<std::int64_t>(1, (steps / 10) / 200);
    double degree_sum = 0.0;
    std::int64_t degree_samples = 0;
    for (std::int64_t step = 0; step < steps; ++step) {
        const std::int64_t before = net.total_degree();
        const node_t victim = removal.choose(step);
        const auto removed_degree = static_cast<std::int64_t>(net.isolate(victim));
        removal.removed(victim);
        if (!net.draw_targets(victim, n, targets))
            result.reseeded = true;
        for (node_t v : targets)
            net.connect(victim, v);
        removal.born(victim, step);

        const std::int64_t after = net.total_degree();
        if (after != before - 2 * removed_degree + 2 * m)
            ++result.bookkeeping_violations;
        if (options.trace_total_degree)
            result.total_degree_trace.push_back(after);
        if (step >= steps / 2) {
            degree_sum += static_cast<double>(after);
            ++degree_samples;
        }
        if (options.average_last_tenth && step >= average_from && (step - average_from) % average_every == 0)
            net.histogram_into(result.averaged);
    }
    result.mean_total_degree = degree_samples > 0 ? degree_sum / static_cast<double>(degree_samples)
                                                  : static_cast<double>(net.total_degree());
    net.histogram_into(result.final);
    return result;
}

} // namespace dynet
