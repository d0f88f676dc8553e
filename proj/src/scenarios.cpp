#include "scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dynet/binomial.hpp"
#include "dynet/stats.hpp"
#include "dynet/trajectory_io.hpp"

namespace dynet::detail {

using nlohmann::json;

void CsvRow::sep()
{
    if (!first_)
        line_ += ',';
    first_ = false;
}

CsvRow& CsvRow::operator<<(double v)
{
    sep();
    line_ += format_double(v);
    return *this;
}

CsvRow& CsvRow::operator<<(std::int64_t v)
{
    sep();
    line_ += std::to_string(v);
    return *this;
}

CsvRow& CsvRow::operator<<(std::uint64_t v)
{
    sep();
    line_ += std::to_string(v);
    return *this;
}

CsvRow& CsvRow::operator<<(const std::string& v)
{
    sep();
    line_ += v;
    return *this;
}

CsvRow& CsvRow::empty()
{
    sep();
    return *this;
}

namespace {

std::string fmt(double v)
{
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

void add_check(RunReport& r, std::string name, std::optional<int> criterion, bool pass, std::string detail)
{
    r.checks.push_back({std::move(name), criterion, pass, std::move(detail)});
}

json ci_json(const MeanCi& ci)
{
    return {{"mean", ci.mean}, {"ci95_lo", ci.lo}, {"ci95_hi", ci.hi}, {"std_err", ci.std_err}};
}

RunReport start(const ScenarioConfig& c, std::uint64_t seed)
{
    RunReport r;
    r.config = c;
    r.config.seed = seed;
    r.config.resolved["seed"] = seed;
    return r;
}

std::string csv_name(const ScenarioConfig& c) { return c.name + ".csv"; }

struct SiRow {
    double tau_k = NAN;
    double tau_half = NAN;
    double tau_n = NAN;
    node_t x_final = 0;
    std::vector<Event> events;
};

void put_optional(CsvRow& row, double v)
{
    if (std::isnan(v))
        row.empty();
    else
        row << v;
}

} // namespace

// --- si ------------------------------------------------------------------------

RunReport run_si(const ScenarioConfig& c, std::uint64_t seed, const RunOptions& o)
{
    RunReport r = start(c, seed);
    const int T = c.trials;
    const bool scaled = c.scale_r > 0.0;
    const int variants = scaled ? 2 : 1;
    const auto sizes = c.n_values.size();
    for (node_t n : c.n_values)
        check_node_cap(n, o.limits);

    std::vector<SiRow> rows(sizes * static_cast<std::size_t>(variants * T));
    auto slot = [&](std::size_t ni, int v, int i) { return (ni * variants + static_cast<std::size_t>(v)) * T + i; };

    parallel_for(static_cast<int>(rows.size()), o.jobs, [&](int flat) {
        const auto ni = static_cast<std::size_t>(flat) / static_cast<std::size_t>(variants * T);
        const int v = (flat / T) % variants;
        const int i = flat % T;
        const node_t n = c.n_values[ni];
        const node_t k = c.target.value_or(n);
        SiOptions opt;
        opt.n = n;
        opt.params = c.params;
        opt.beta = c.beta;
        opt.initial = c.initial;
        opt.stop.horizon = c.horizon;
        opt.stop.target = k;
        opt.record_events = c.export_events && ni == 0 && v == 0 && i == 0;
        if (v == 1) {
            opt.params = EdgeParams::from_rates(c.params.lambda * c.scale_r, c.params.mu * c.scale_r);
            opt.beta = InfectionRate::finite(c.beta.beta * c.scale_r);
        }
        const std::uint64_t s = seed + static_cast<std::uint64_t>(v * T + i);
        Rng rng = Rng(s).split(static_cast<std::uint64_t>(n));
        const SiTrajectory traj = simulate_si(opt, rng, o.limits);
        SiRow& row = rows[slot(ni, v, i)];
        row.tau_k = traj.hitting(k).value_or(NAN);
        row.tau_half = traj.hitting((n + 1) / 2).value_or(NAN);
        row.tau_n = traj.hitting(n).value_or(NAN);
        row.x_final = traj.final_infected();
        if (opt.record_events)
            row.events = traj.events();
    });

    std::string csv = "variant,n,trial,seed,k,tau_k,tau_half,tau_n,x_final\n";
    json per_n = json::array();
    json theory = json::array();
    for (std::size_t ni = 0; ni < sizes; ++ni) {
        const node_t n = c.n_values[ni];
        const node_t k = c.target.value_or(n);
        std::vector<double> taus[2];
        int unreached = 0;
        for (int v = 0; v < variants; ++v)
            for (int i = 0; i < T; ++i) {
                const SiRow& row = rows[slot(ni, v, i)];
                CsvRow line;
                line << (v == 0 ? "base" : "scaled") << static_cast<std::int64_t>(n) << i
                     << seed + static_cast<std::uint64_t>(v * T + i) << static_cast<std::int64_t>(k);
                put_optional(line, row.tau_k);
                put_optional(line, row.tau_half);
                put_optional(line, row.tau_n);
                line << static_cast<std::int64_t>(row.x_final);
                csv += line.str();
                if (std::isnan(row.tau_k))
                    ++unreached;
                else
                    taus[v].push_back(row.tau_k);
            }

        json agg = {{"n", n}, {"k", k}, {"reached", taus[0].size()}, {"unreached", unreached}};
        json th = {{"n", n}, {"k", k}};
        if (c.beta.infinite) {
            const auto b = bound_tau_beta_inf(n, k, c.params.lambda);
            th["birth_process_exact"] = b.exact;
            th["birth_process_simplified"] = b.simplified;
        } else {
            const auto b = bound_tau_beta_finite(n, k, c.beta.beta, c.params.lambda);
            th["upper_bound_sum"] = b.sum;
            th["upper_bound_integral"] = b.integral;
        }
        if (k == n)
            th["lower_floor"] = lower_bound_tau_n(n, c.beta, c.params.lambda);
        theory.push_back(th);

        if (unreached > 0)
            add_check(r, "target_reached_n" + std::to_string(n), std::nullopt, false,
                      std::to_string(unreached) + " trials stopped at the horizon before X reached " + std::to_string(k));
        if (taus[0].size() >= 2) {
            const MeanCi ci = mean_ci(taus[0], 0.95);
            agg["tau_k"] = ci_json(ci);
            agg["tau_k_q05"] = quantile(taus[0], 0.05);
            if (!c.beta.infinite && k == n && unreached == 0) {
                const double bound = th["upper_bound_integral"].get<double>();
                add_check(r, "mean_tau_n_below_bound_n" + std::to_string(n), 5, ci.mean <= bound + 3.0 * ci.std_err,
                          "mean " + fmt(ci.mean) + " (se " + fmt(ci.std_err) + ") vs bound " + fmt(bound));
            }
            if (c.beta.infinite && unreached == 0) {
                const double bound = th["birth_process_simplified"].get<double>();
                add_check(r, "mean_below_birth_process_bound_n" + std::to_string(n), std::nullopt,
                          ci.mean <= bound + 3.0 * ci.std_err,
                          "mean " + fmt(ci.mean) + " vs bound " + fmt(bound));
            }
            if (k == n && unreached == 0) {
                const double floor = 0.7 * th["lower_floor"].get<double>();
                const double q05 = agg["tau_k_q05"].get<double>();
                agg["floor_ratio_q05"] = q05 / th["lower_floor"].get<double>();
                // The floor is a statement about a network whose edges all start absent.
                if (c.initial == InitialGraph::Empty)
                    add_check(r, "tau_n_q05_above_floor_n" + std::to_string(n), 6, q05 >= floor,
                              "5th percentile " + fmt(q05) + " vs 0.7 x floor " + fmt(floor));
            }
        }
        if (scaled && taus[0].size() >= 1 && taus[1].size() >= 1) {
            SampleSet a, b;
            for (double t : taus[0])
                a.values.push_back(t / c.scale_r);
            b.values = taus[1];
            a.first_seed = seed;
            b.first_seed = seed + static_cast<std::uint64_t>(T);
            a.seed_count = b.seed_count = static_cast<std::uint64_t>(T);
            const KsResult ks = ks_two_sample(a, b);
            agg["ks_statistic"] = ks.statistic;
            agg["ks_p_value"] = ks.p_value;
            agg["scaled_mean_tau_k"] = mean_ci(taus[1], 0.95).mean;
            add_check(r, "time_scaling_ks_n" + std::to_string(n), 7, ks.p_value >= 0.001,
                      "KS D " + fmt(ks.statistic) + ", p " + fmt(ks.p_value));
        }
        per_n.push_back(agg);
    }
    r.aggregates["per_n"] = per_n;
    r.theory["per_n"] = theory;
    r.files.push_back({csv_name(c), csv});
    if (c.export_events) {
        std::ostringstream ev;
        write_events_jsonl(ev, rows[0].events);
        r.files.push_back({c.name + "_events.jsonl", ev.str()});
    }
    return r;
}

// --- connectivity ----------------------------------------------------------------

RunReport run_connectivity(const ScenarioConfig& c, std::uint64_t seed, const RunOptions& o)
{
    RunReport r = start(c, seed);
    const int T = c.trials;
    for (node_t n : c.n_values)
        check_node_cap(n, o.limits);
    std::vector<double> tau(c.n_values.size() * static_cast<std::size_t>(T));
    parallel_for(static_cast<int>(tau.size()), o.jobs, [&](int flat) {
        const node_t n = c.n_values[static_cast<std::size_t>(flat / T)];
        Rng rng = Rng(seed + static_cast<std::uint64_t>(flat % T)).split(static_cast<std::uint64_t>(n));
        tau[static_cast<std::size_t>(flat)] = connectivity_time(n, c.params.lambda, rng);
    });

    std::string csv = "n,trial,seed,tau_n\n";
    json per_n = json::array();
    std::vector<double> log_n, deviation;
    for (std::size_t ni = 0; ni < c.n_values.size(); ++ni) {
        const node_t n = c.n_values[ni];
        std::vector<double> v(tau.begin() + static_cast<std::ptrdiff_t>(ni * T),
                              tau.begin() + static_cast<std::ptrdiff_t>((ni + 1) * T));
        for (int i = 0; i < T; ++i)
            csv += (CsvRow() << static_cast<std::int64_t>(n) << i << seed + static_cast<std::uint64_t>(i) << v[i]).str();
        const double dn = n;
        const double scale = std::log(dn) / (c.params.lambda * dn);
        const double bound = bound_tau_beta_inf(n, n, c.params.lambda).simplified;
        json agg = {{"n", n}, {"log_n_over_lambda_n", scale}, {"bound", bound}};
        if (T >= 2) {
            const MeanCi ci = mean_ci(v, 0.95);
            const double ratio = ci.mean / scale;
            agg["tau_n"] = ci_json(ci);
            agg["ratio"] = ratio;
            log_n.push_back(std::log(dn));
            deviation.push_back(std::fabs(ratio - 1.0));
            add_check(r, "ratio_in_band_n" + std::to_string(n), 4, ratio >= 0.8 && ratio <= 1.3,
                      "mean / (log n / (lambda n)) = " + fmt(ratio) + ", band [0.8, 1.3]");
            add_check(r, "mean_below_bound_n" + std::to_string(n), 4, ci.mean <= bound,
                      "mean " + fmt(ci.mean) + " vs 2(1 + log(n-1))/(lambda n) = " + fmt(bound));
        }
        per_n.push_back(agg);
    }
    if (log_n.size() >= 2) {
        const double slope = ols_slope(log_n, deviation);
        r.aggregates["deviation_slope_vs_log_n"] = slope;
        add_check(r, "ratio_trends_to_one", 4, slope <= 0.0,
                  "slope of |ratio - 1| against log n = " + fmt(slope));
    }
    r.aggregates["per_n"] = per_n;
    r.files.push_back({csv_name(c), csv});
    return r;
}

// --- mixing --------------------------------------------------------------------

namespace {

/// Half-L1 distance between two product Bernoulli laws on {0,1}^k, by enumeration.
double product_space_tv(int k, double p, double q)
{
    double sum = 0.0;
    for (std::uint32_t s = 0; s < (1u << k); ++s) {
        const int ones = std::popcount(s);
        const double a = std::pow(p, ones) * std::pow(1.0 - p, k - ones);
        const double b = std::pow(q, ones) * std::pow(1.0 - q, k - ones);
        sum += std::fabs(a - b);
    }
    return 0.5 * sum;
}

} // namespace

RunReport run_mixing(const ScenarioConfig& c, const RunOptions& o)
{
    RunReport r = start(c, c.seed);
    const bool sparse = c.regime == MixingRegime::Sparse;
    std::vector<MixingResult> numeric(c.k_values.size());
    std::vector<EdgeParams> params(c.k_values.size());
    for (std::size_t i = 0; i < c.k_values.size(); ++i)
        params[i] = sparse ? derive_rates(c.sparse_c / static_cast<double>(c.k_values[i]), c.sparse_alpha) : c.params;
    parallel_for(static_cast<int>(c.k_values.size()), o.jobs, [&](int i) {
        numeric[static_cast<std::size_t>(i)] = mixing_time_numeric({c.k_values[i], params[i], c.level});
    });

    std::string csv = "k,p,alpha,regime,t_numeric,t_asymptotic,ratio,monotone_verified\n";
    json rows = json::array();
    for (std::size_t i = 0; i < c.k_values.size(); ++i) {
        const auto k = c.k_values[i];
        const StationaryParams st = derive_stationary(params[i]);
        const double asym = mixing_time_asymptotic(k, st.p, st.alpha, c.regime, c.sparse_c);
        const double ratio = numeric[i].time / asym;
        csv += (CsvRow() << k << st.p << st.alpha << (sparse ? "sparse" : "constant_p") << numeric[i].time << asym
                         << ratio << numeric[i].monotone_verified)
                   .str();
        rows.push_back({{"k", k}, {"p", st.p}, {"t_numeric", numeric[i].time}, {"t_asymptotic", asym},
                        {"ratio", ratio}, {"tv_at_time", numeric[i].tv_at_time}});
        add_check(r, "tv_monotone_k" + std::to_string(k), std::nullopt, numeric[i].monotone_verified,
                  numeric[i].monotone_verified ? "bisection bracket verified monotone"
                                               : "monotonicity grid check failed; grid scan used");
        // Tolerances are pinned at k = 10^6; smaller k is reported without a verdict.
        if (k >= 1000000) {
            const double lo = sparse ? 0.8 : 0.9;
            const double hi = sparse ? 1.2 : 1.1;
            add_check(r, std::string(sparse ? "sparse" : "constant_p") + "_ratio_k" + std::to_string(k), 3,
                      ratio >= lo && ratio <= hi,
                      "numeric / asymptotic = " + fmt(ratio) + ", band [" + fmt(lo) + ", " + fmt(hi) + "]");
        }
    }

    // Edge-set distance equals the distance between edge-count binomials.
    const double grid[] = {0.1, 0.3, 0.5, 0.7, 0.9};
    double worst = 0.0;
    for (int k = 1; k <= 12; ++k)
        for (double p : grid)
            for (double q : grid)
                worst = std::max(worst, std::fabs(product_space_tv(k, p, q) - tv_binomial(k, p, q)));
    r.aggregates["product_vs_binomial_max_diff"] = worst;
    add_check(r, "product_space_tv_equals_binomial_tv", 2, worst <= 1e-12,
              "max |TV_product - TV_binomial| over k <= 12, 5x5 grid = " + fmt(worst));

    r.aggregates["rows"] = rows;
    r.files.push_back({csv_name(c), csv});
    return r;
}

// --- lemma4 --------------------------------------------------------------------

RunReport run_lemma4(const ScenarioConfig& c, const RunOptions& o)
{
    RunReport r = start(c, c.seed);
    std::vector<Lemma4Solution> sols(c.lemma4_N.size());
    parallel_for(static_cast<int>(sols.size()), o.jobs, [&](int i) {
        sols[static_cast<std::size_t>(i)] = lemma4_t0_exact(c.lemma4_N[i], c.params, c.beta.beta);
    });
    std::string csv = "N,lambda,mu,beta,t0_exact,t0_asymptotic,ratio,max_rel_residual\n";
    json rows = json::array();
    for (std::size_t i = 0; i < sols.size(); ++i) {
        const auto N = c.lemma4_N[i];
        const double asym = lemma4_t0_asymptotic(N, c.params.lambda, c.beta.beta);
        const double ratio = sols[i].t0() / asym;
        csv += (CsvRow() << N << c.params.lambda << c.params.mu << c.beta.beta << sols[i].t0() << asym << ratio
                         << sols[i].max_rel_residual)
                   .str();
        rows.push_back({{"N", N}, {"t0_exact", sols[i].t0()}, {"t0_asymptotic", asym}, {"ratio", ratio},
                        {"max_rel_residual", sols[i].max_rel_residual}});
        add_check(r, "residual_N" + std::to_string(N), std::nullopt, sols[i].max_rel_residual <= 1e-9,
                  "max relative residual " + fmt(sols[i].max_rel_residual));
        if (N >= 100000)
            add_check(r, "t0_matches_asymptotic_N" + std::to_string(N), 1, std::fabs(ratio - 1.0) <= 0.05,
                      "t0 / sqrt(pi/(2 beta lambda N)) = " + fmt(ratio));
    }
    r.aggregates["rows"] = rows;
    r.files.push_back({csv_name(c), csv});
    return r;
}

// --- turnover ER ---------------------------------------------------------------

RunReport run_turnover_er(const ScenarioConfig& c, std::uint64_t seed, const RunOptions& o)
{
    RunReport r = start(c, seed);
    const node_t n = c.n_values.front();
    // Alive count fluctuates around n; leave headroom for the cap.
    check_node_cap(n, o.limits);
    TurnoverOptions topt;
    topt.sample_interval = c.sample_interval;
    topt.burn_in = c.burn_in;
    topt.age_snapshot_interval = c.age_interval;

    std::vector<TurnoverTrajectory> runs(static_cast<std::size_t>(c.trials));
    parallel_for(c.trials, o.jobs, [&](int i) {
        Rng rng = Rng(seed + static_cast<std::uint64_t>(i)).split(static_cast<std::uint64_t>(n));
        runs[static_cast<std::size_t>(i)] = simulate_turnover_er(n, c.params, c.horizon, rng, topt);
    });

    std::string csv = "trial,time,N,edges,on_fraction\n";
    std::vector<double> counts, fractions, ages;
    std::int64_t violations = 0, births = 0, deaths = 0;
    double se_sq = 0.0;
    for (int i = 0; i < c.trials; ++i) {
        const auto& tr = runs[static_cast<std::size_t>(i)];
        std::vector<double> series;
        for (const auto& s : tr.samples) {
            csv += (CsvRow() << i << s.t << static_cast<std::int64_t>(s.nodes) << s.edges << s.on_fraction).str();
            counts.push_back(s.nodes);
            series.push_back(s.on_fraction);
        }
        fractions.insert(fractions.end(), series.begin(), series.end());
        if (series.size() >= 40) {
            const double se = batch_means_std_err(series, 20);
            se_sq += se * se * static_cast<double>(series.size()) * static_cast<double>(series.size());
        }
        ages.insert(ages.end(), tr.pooled_ages.begin(), tr.pooled_ages.end());
        violations += tr.dangling_edge_violations;
        births += tr.births;
        deaths += tr.deaths;
    }
    const double p = derive_stationary(c.params).p;
    const double printed = effective_edge_probability(p, c.params);
    const double rederived = effective_edge_probability_rederived(p, c.params);
    r.theory = {{"p", p}, {"p_prime_printed", printed}, {"p_prime_rederived", rederived},
                {"node_count_law", "Poisson(" + std::to_string(n) + ")"}};
    r.aggregates["births"] = births;
    r.aggregates["deaths"] = deaths;

    add_check(r, "no_dangling_edges", std::nullopt, violations == 0,
              std::to_string(violations) + " deaths left pairs behind");
    if (!counts.empty()) {
        SampleSet s;
        s.values = counts;
        const double d = empirical_tv(s, FinitePmf::poisson(static_cast<double>(n)));
        r.aggregates["node_count_tv_poisson"] = d;
        r.aggregates["node_count_mean"] = mean_ci(counts, 0.0).mean;
        add_check(r, "node_count_tv_poisson", 9, d <= 0.05, "TV(N, Poisson(n)) = " + fmt(d));
    }
    if (!fractions.empty() && se_sq > 0.0) {
        const double mean = mean_ci(fractions, 0.0).mean;
        const double se = std::sqrt(se_sq) / static_cast<double>(fractions.size());
        const bool m_printed = std::fabs(mean - printed) <= 3.0 * se;
        const bool m_rederived = std::fabs(mean - rederived) <= 3.0 * se;
        r.aggregates["edge_frequency"] = {{"mean", mean}, {"std_err", se}, {"z_printed", (mean - printed) / se},
                                          {"z_rederived", (mean - rederived) / se},
                                          {"matches_printed", m_printed}, {"matches_rederived", m_rederived}};
        std::string which = m_printed && m_rederived ? "both candidates"
                            : m_printed             ? "p(1 - 1/(lambda+mu+1))"
                            : m_rederived           ? "p(1 - 2/(lambda+mu+2))"
                                                    : "neither candidate";
        add_check(r, "edge_frequency_matches_candidate", 9, m_printed || m_rederived,
                  "empirical " + fmt(mean) + " (se " + fmt(se) + "); printed " + fmt(printed) + ", rederived "
                      + fmt(rederived) + "; matches " + which);
    }
    if (ages.size() >= 10) {
        const KsResult ks = ks_one_sample(ages, [](double a) { return -std::expm1(-a); });
        r.aggregates["age_ks"] = {{"statistic", ks.statistic}, {"p_value", ks.p_value}, {"count", ages.size()}};
        add_check(r, "ages_exponential", std::nullopt, ks.p_value >= 0.001,
                  "KS against Exp(1): D " + fmt(ks.statistic) + ", p " + fmt(ks.p_value));
    }
    r.files.push_back({csv_name(c), csv});
    return r;
}

// --- PA with removal -----------------------------------------------------------

namespace {

json calibration_json(const HazardCalibration& cal)
{
    return {{"mode", cal.mode == HazardCalibration::Mode::Piecewise ? "piecewise" : "truncation"},
            {"gamma", cal.gamma},
            {"n", cal.n},
            {"young_hazard", cal.young_hazard},
            {"breakpoint", cal.breakpoint},
            {"tail_hazard", cal.tail_hazard},
            {"max_age", cal.max_age},
            {"mean_lifespan", cal.mean_lifespan},
            {"note", cal.note}};
}

} // namespace

RunReport run_pa_turnover(const ScenarioConfig& c, std::uint64_t seed, const RunOptions&)
{
    RunReport r = start(c, seed);
    const node_t n = c.n_values.front();
    const double dn = n;
    LifespanPolicy policy;
    policy.kind = c.policy;
    if (c.policy == LifespanPolicy::Kind::HazardGamma) {
        policy.calibration = calibrate_hazard(c.gamma, dn);
        r.metadata["calibration"] = calibration_json(policy.calibration);
        const double integrated = integrate_mean_lifespan(policy.calibration);
        r.metadata["calibration"]["integrated_mean_lifespan"] = integrated;
        add_check(r, "calibrated_mean_lifespan", std::nullopt, std::fabs(integrated / dn - 1.0) <= 1e-6,
                  "integrated mean lifespan " + fmt(integrated) + " vs n");
    }
    PaOptions popt;
    popt.average_last_tenth = true;
    Rng rng = Rng(seed).split(static_cast<std::uint64_t>(n));
    const PaResult res = simulate_pa_turnover(n, c.m, policy, c.steps, rng, popt);

    std::ostringstream final_csv, avg_csv;
    write_degree_csv(final_csv, res.final, dn, policy);
    r.files.push_back({csv_name(c), final_csv.str()});
    if (res.averaged.total > 0) {
        write_degree_csv(avg_csv, res.averaged, dn, policy);
        r.files.push_back({c.name + "_averaged.csv", avg_csv.str()});
    }

    const double dm = c.m;
    const double expected_total = 2.0 * dn * dm;
    r.metadata["reseeded"] = res.reseeded;
    r.aggregates["mean_total_degree"] = res.mean_total_degree;
    r.aggregates["mean_total_degree_over_2nm"] = res.mean_total_degree / expected_total;
    r.aggregates["isolated_fraction"] = res.final.total > 0 && res.final.counts.count(0)
                                            ? static_cast<double>(res.final.counts.at(0)) / static_cast<double>(res.final.total)
                                            : 0.0;
    add_check(r, "degree_bookkeeping", std::nullopt, res.bookkeeping_violations == 0,
              std::to_string(res.bookkeeping_violations) + " steps broke the degree-sum update");
    if (c.steps >= 10 * static_cast<std::int64_t>(n))
        add_check(r, "mean_total_degree_2nm", std::nullopt,
                  std::fabs(res.mean_total_degree / expected_total - 1.0) <= 0.05,
                  "long-run total degree " + fmt(res.mean_total_degree) + " vs 2nm = " + fmt(expected_total));

    auto fit = [&](const DegreeHistogram& h, const char* key) -> std::optional<FitResult> {
        try {
            const FitResult f = fit_power_law(h, c.k_min);
            r.aggregates[key] = {{"gamma_hat", f.gamma_hat}, {"std_err", f.std_err}, {"n_tail", f.n_tail},
                                 {"k_min", f.k_min}};
            return f;
        } catch (const std::invalid_argument& e) {
            r.aggregates[key] = {{"error", e.what()}};
            return std::nullopt;
        }
    };
    const auto fit_final = fit(res.final, "fit_final");
    if (res.averaged.total > 0)
        fit(res.averaged, "fit_averaged");

    switch (c.policy) {
    case LifespanPolicy::Kind::Exponential: {
        add_check(r, "tail_exponent", 10, fit_final && fit_final->gamma_hat >= 2.7 && fit_final->gamma_hat <= 3.3,
                  fit_final ? "gamma_hat " + fmt(fit_final->gamma_hat) + " (se " + fmt(fit_final->std_err)
                                  + "), band [2.7, 3.3]"
                            : "fit failed");
        const double total = static_cast<double>(res.final.total);
        for (int mult : {2, 4}) {
            const std::int64_t k = mult * c.m;
            const double emp = res.final.ccdf(k);
            const double pred = dm * dm / static_cast<double>(k * k);
            const double se = std::sqrt(pred * (1.0 - pred) / total);
            r.aggregates["ccdf_k" + std::to_string(k)] = {{"empirical", emp}, {"predicted", pred}, {"std_err", se}};
            add_check(r, "ccdf_k" + std::to_string(k), 10, std::fabs(emp - pred) <= 3.0 * se,
                      "P(deg >= " + std::to_string(k) + ") = " + fmt(emp) + " vs m^2/k^2 = " + fmt(pred) + " (se "
                          + fmt(se) + ")");
        }
        break;
    }
    case LifespanPolicy::Kind::Fifo: {
        const std::int64_t lo = c.m;
        const auto top = static_cast<std::int64_t>(std::floor(dm * std::sqrt(std::numbers::e)));
        const std::int64_t hi = static_cast<std::int64_t>(std::ceil(dm * std::sqrt(std::numbers::e))) + 3;
        std::int64_t inside = 0;
        std::vector<double> lk, lp;
        for (const auto& [k, cnt] : res.final.counts) {
            if (k >= lo && k <= hi)
                inside += cnt;
            if (k >= lo && k <= top && cnt > 0) {
                lk.push_back(std::log(static_cast<double>(k)));
                lp.push_back(std::log(static_cast<double>(cnt) / static_cast<double>(res.final.total)));
            }
        }
        const double frac = static_cast<double>(inside) / static_cast<double>(res.final.total);
        r.aggregates["fraction_in_window"] = frac;
        add_check(r, "degrees_in_window", 11, frac >= 0.99,
                  fmt(100.0 * frac) + "% of degrees in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        if (lk.size() >= 2) {
            const double slope = ols_slope(lk, lp);
            r.aggregates["loglog_pmf_slope"] = slope;
            add_check(r, "loglog_pmf_slope", 11, std::fabs(slope + 1.0) <= 0.2,
                      "slope " + fmt(slope) + " on [" + std::to_string(lo) + ", " + std::to_string(top) + "]");
        } else {
            add_check(r, "loglog_pmf_slope", 11, false, "fewer than two populated degrees in the support");
        }
        break;
    }
    case LifespanPolicy::Kind::HazardGamma: {
        add_check(r, "tail_exponent", std::nullopt,
                  fit_final && std::fabs(fit_final->gamma_hat - c.gamma) <= 0.5,
                  fit_final ? "gamma_hat " + fmt(fit_final->gamma_hat) + " vs target " + fmt(c.gamma) + " +- 0.5"
                            : "fit failed");
        break;
    }
    }
    return r;
}

// --- infection curves under parameter sweeps ----------------------------------

namespace {

struct Series {
    std::string name;
    double lambda, mu, beta;
};

/// Centered moving average with the window shrunk at the ends.
std::vector<double> smooth(const std::vector<double>& y, int half)
{
    std::vector<double> out(y.size());
    const int n = static_cast<int>(y.size());
    for (int i = 0; i < n; ++i) {
        const int w = std::min({half, i, n - 1 - i});
        double s = 0.0;
        for (int j = i - w; j <= i + w; ++j)
            s += y[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = s / (2 * w + 1);
    }
    return out;
}

/// Signs of the lag-h second difference, ignoring values below 5% of the
/// largest magnitude, with repeats collapsed.
std::vector<int> curvature_signs(const std::vector<double>& y, std::size_t h)
{
    std::vector<double> d2;
    for (std::size_t i = h; i + h < y.size(); ++i)
        d2.push_back(y[i + h] - 2.0 * y[i] + y[i - h]);
    double peak = 0.0;
    for (double v : d2)
        peak = std::max(peak, std::fabs(v));
    std::vector<int> signs;
    for (double v : d2) {
        if (std::fabs(v) < 0.05 * peak)
            continue;
        const int s = v > 0 ? 1 : -1;
        if (signs.empty() || signs.back() != s)
            signs.push_back(s);
    }
    return signs;
}

} // namespace

RunReport run_figure1(const ScenarioConfig& c, std::uint64_t seed, const RunOptions& o)
{
    RunReport r = start(c, seed);
    const node_t n = c.n_values.front();
    check_node_cap(n, o.limits);
    const double L = c.params.lambda, M = c.params.mu, B = c.beta.beta;
    const std::vector<Series> series = {
        {"default", L, M, B},          {"lambda_half", L / 2, M, B}, {"lambda_double", 2 * L, M, B},
        {"mu_half", L, M / 2, B},      {"mu_double", L, 2 * M, B},   {"beta_half", L, M, B / 2},
        {"beta_double", L, M, 2 * B},
    };
    const int T = c.trials;
    const int S = static_cast<int>(series.size());
    std::vector<SiTrajectory> runs(static_cast<std::size_t>(S * T));
    parallel_for(S * T, o.jobs, [&](int flat) {
        const Series& s = series[static_cast<std::size_t>(flat / T)];
        SiOptions opt;
        opt.n = n;
        opt.params = EdgeParams::from_rates(s.lambda, s.mu);
        opt.beta = InfectionRate::finite(s.beta);
        opt.initial = c.initial;
        Rng rng = Rng(seed + static_cast<std::uint64_t>(flat % T)).split(static_cast<std::uint64_t>(flat / T));
        runs[static_cast<std::size_t>(flat)] = simulate_si(opt, rng, o.limits);
    });

    constexpr int kGrid = 400;
    constexpr int kSmooth = 10; // moving-average half width, grid points
    constexpr std::size_t kLag = 10;
    std::string csv = "series,lambda,mu,beta,t,x_single,x_mean\n";
    json t50 = json::object();
    std::vector<double> t50_mean(static_cast<std::size_t>(S));
    std::vector<double> default_curve;
    json shapes = json::object();
    for (int s = 0; s < S; ++s) {
        double t_end = 0.0;
        std::vector<double> half;
        for (int i = 0; i < T; ++i) {
            const auto& tr = runs[static_cast<std::size_t>(s * T + i)];
            t_end = std::max(t_end, *tr.hitting(n));
            half.push_back(*tr.hitting((n + 1) / 2));
        }
        const MeanCi ci = T >= 2 ? mean_ci(half, 0.95) : MeanCi{half[0], half[0], half[0], 0.0};
        t50_mean[static_cast<std::size_t>(s)] = ci.mean;
        t50[series[static_cast<std::size_t>(s)].name] = ci_json(ci);
        const auto& sr = series[static_cast<std::size_t>(s)];
        std::vector<double> curve;
        for (int g = 0; g <= kGrid; ++g) {
            const double t = t_end * g / kGrid;
            double sum = 0.0;
            for (int i = 0; i < T; ++i)
                sum += runs[static_cast<std::size_t>(s * T + i)].infected_at(t);
            const double mean = sum / T;
            curve.push_back(mean);
            csv += (CsvRow() << sr.name << sr.lambda << sr.mu << sr.beta << t
                             << static_cast<std::int64_t>(runs[static_cast<std::size_t>(s * T)].infected_at(t)) << mean)
                       .str();
        }
        std::string seq;
        for (int sg : curvature_signs(smooth(curve, kSmooth), kLag))
            seq += sg > 0 ? '+' : '-';
        shapes[sr.name] = seq;
        if (s == 0)
            default_curve = std::move(curve);
    }
    r.aggregates["t50"] = t50;
    r.aggregates["curvature_signs"] = shapes;

    bool monotone = true;
    for (std::size_t i = 1; i < default_curve.size(); ++i)
        monotone = monotone && default_curve[i] >= default_curve[i - 1];
    add_check(r, "mean_curve_monotone", 8, monotone, monotone ? "nondecreasing" : "mean curve decreases somewhere");
    const std::string seq = shapes["default"].get<std::string>();
    add_check(r, "mean_curve_single_inflection", 8, seq == "+-",
              "curvature sign sequence of the smoothed mean: " + seq);

    const double base = t50_mean[0];
    auto shift = [&](const char* name) {
        for (int s = 0; s < S; ++s)
            if (series[static_cast<std::size_t>(s)].name == name)
                return std::fabs(t50_mean[static_cast<std::size_t>(s)] - base);
        return 0.0;
    };
    const double dl = shift("lambda_half"), dmu = shift("mu_half"), db = shift("beta_half");
    r.aggregates["t50_shift"] = {{"lambda_half", dl}, {"mu_half", dmu}, {"beta_half", db}};
    add_check(r, "lambda_shift_exceeds_mu_shift", 8, dl > dmu,
              "|dt50| halving lambda " + fmt(dl) + " vs halving mu " + fmt(dmu));
    add_check(r, "beta_shift_exceeds_mu_shift", 8, db > dmu,
              "|dt50| halving beta " + fmt(db) + " vs halving mu " + fmt(dmu));
    r.files.push_back({csv_name(c), csv});
    return r;
}

// --- property suites -----------------------------------------------------------

namespace {

double integrate_density(const std::function<double(double)>& density, double m, std::vector<double> cuts, double upper)
{
    // In u = log(k/m) the densities are smooth between cuts.
    using boost::math::quadrature::gauss_kronrod;
    auto g = [&](double u) {
        const double k = m * std::exp(u);
        return density(k) * k;
    };
    cuts.insert(cuts.begin(), 0.0);
    cuts.push_back(upper);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i + 1] > cuts[i])
            total += gauss_kronrod<double, 61>::integrate(g, cuts[i], cuts[i + 1], 15, 1e-13);
    return total;
}

} // namespace

RunReport run_bounds(const ScenarioConfig& c, std::uint64_t seed, const RunOptions& o)
{
    RunReport r = start(c, seed);
    std::string csv = "check,value,tolerance,pass\n";
    auto record = [&](const std::string& name, double value, double tol, bool pass, const std::string& detail) {
        csv += (CsvRow() << name << value << tol << pass).str();
        add_check(r, name, 12, pass, detail);
    };

    // Replay.
    {
        SiOptions opt;
        opt.n = 60;
        opt.params = EdgeParams::from_rates(0.3, 0.7);
        opt.beta = InfectionRate::finite(0.8);
        opt.record_events = true;
        Rng a(seed), b(seed);
        const bool si_same = simulate_si(opt, a, o.limits) == simulate_si(opt, b, o.limits);

        Rng g1(seed), g2(seed), s1(seed + 1), s2(seed + 1);
        const auto init1 = sample_stationary_graph(40, 0.3, s1);
        const auto init2 = sample_stationary_graph(40, 0.3, s2);
        const auto e1 = simulate_dynamic_graph(40, EdgeParams::from_rates(0.3, 0.7), init1, 5.0, g1, o.limits);
        const auto e2 = simulate_dynamic_graph(40, EdgeParams::from_rates(0.3, 0.7), init2, 5.0, g2, o.limits);
        const bool graph_same = init1 == init2 && e1.events == e2.events;

        Rng t1(seed), t2(seed);
        TurnoverOptions topt;
        topt.age_snapshot_interval = 5.0;
        const auto tr1 = simulate_turnover_er(30, EdgeParams::from_rates(0.5, 0.5), 50.0, t1, topt);
        const auto tr2 = simulate_turnover_er(30, EdgeParams::from_rates(0.5, 0.5), 50.0, t2, topt);
        const bool turnover_same = tr1.final.graph == tr2.final.graph && tr1.pooled_ages == tr2.pooled_ages
                                   && tr1.births == tr2.births;

        Rng p1(seed), p2(seed);
        const auto pa1 = simulate_pa_turnover(500, 2, LifespanPolicy::exponential(), 5000, p1);
        const auto pa2 = simulate_pa_turnover(500, 2, LifespanPolicy::exponential(), 5000, p2);
        const bool pa_same = pa1.final.counts == pa2.final.counts;

        ScenarioConfig small = parse_config(
            json{{"scenario", "si"}, {"n_values", {30, 50}}, {"lambda", 0.5}, {"mu", 0.5}, {"beta", 1.0}, {"trials", 8}});
        RunOptions serial = o, threaded = o;
        serial.jobs = 1;
        threaded.jobs = 3;
        const bool csv_same = run_scenario(small, serial).files[0].content
                              == run_scenario(small, threaded).files[0].content;

        const bool all = si_same && graph_same && turnover_same && pa_same && csv_same;
        std::string detail = std::string("si ") + (si_same ? "ok" : "DIFFERS") + ", dynamic graph "
                             + (graph_same ? "ok" : "DIFFERS") + ", turnover " + (turnover_same ? "ok" : "DIFFERS")
                             + ", pa " + (pa_same ? "ok" : "DIFFERS") + ", csv across job counts "
                             + (csv_same ? "ok" : "DIFFERS");
        record("deterministic_replay", all ? 0.0 : 1.0, 0.0, all, detail);
        record("no_dangling_edges", static_cast<double>(tr1.dangling_edge_violations), 0.0,
               tr1.dangling_edge_violations == 0, "turnover deaths leave no pairs behind");
    }

    // Predicted densities integrate to one.
    {
        const int m = 3;
        const double n = 1000.0;
        double worst = 0.0;
        std::string detail;
        auto check = [&](const std::string& label, const LifespanPolicy& pol, std::vector<double> cuts, double upper) {
            const double total = integrate_density(
                [&](double k) { return predicted_degree_density(k, m, n, pol); }, m, std::move(cuts), upper);
            worst = std::max(worst, std::fabs(total - 1.0));
            detail += (detail.empty() ? "" : "; ") + label + " " + fmt(total);
        };
        check("exponential", LifespanPolicy::exponential(), {}, 40.0);
        check("fifo", LifespanPolicy::fifo(), {0.5}, 0.5);
        for (double g : {2.5, 4.0}) {
            const auto cal = calibrate_hazard(g, n);
            const double to_u = 1.0 / (2.0 * n);
            std::vector<double> cuts;
            double upper;
            if (cal.mode == HazardCalibration::Mode::Truncation) {
                upper = cal.max_age * to_u;
            } else {
                cuts.push_back(cal.breakpoint * to_u);
                upper = cal.breakpoint * to_u + 80.0 / (cal.tail_hazard * 2.0 * n);
            }
            check("hazard gamma=" + fmt(g), LifespanPolicy::hazard_gamma(cal), cuts, upper);
        }
        record("density_normalization", worst, 1e-6, worst <= 1e-6, detail);
    }

    // Exponential survival reproduces 2m^2/k^3.
    {
        double worst = 0.0;
        for (int m : {1, 2, 5})
            for (int i = 0; i < 100; ++i) {
                const double k = m * std::pow(1000.0, i / 99.0);
                const double n = 750.0;
                const double via = degree_density_from_survival(k, m, n, [&](double a) { return std::exp(-a / n); });
                const double direct = 2.0 * m * m / (k * k * k);
                worst = std::max(worst, std::fabs(via / direct - 1.0));
            }
        record("survival_form_identity", worst, 1e-12, worst <= 1e-12, "max relative gap " + fmt(worst));
    }

    // Birth-process bound: direct sum against the harmonic form.
    {
        double worst = 0.0;
        for (std::int64_t n = 2; n <= 500; ++n)
            for (std::int64_t k = 2; k <= n; ++k) {
                const auto b = bound_tau_beta_inf(n, k, 1.0);
                worst = std::max(worst, std::fabs(b.exact - b.harmonic) / b.exact);
            }
        record("harmonic_identity", worst, 1e-12, worst <= 1e-12,
               "max relative gap over 2 <= k <= n <= 500: " + fmt(worst));
    }

    // Absorbing-chain recurrence residuals.
    {
        double worst = 0.0;
        for (std::int64_t N : {1, 10, 100, 1000, 10000, 100000})
            for (auto [l, m, b] : {std::tuple{1.0, 1.0, 1.0}, {0.01, 0.01, 0.015}, {2.0, 0.5, 3.0}, {0.1, 5.0, 0.2}})
                worst = std::max(worst, lemma4_t0_exact(N, EdgeParams::from_rates(l, m), b).max_rel_residual);
        record("recurrence_residuals", worst, 1e-9, worst <= 1e-9, "max relative residual " + fmt(worst));
    }

    // Crossing-point set equals the pmf comparison set.
    {
        std::int64_t mismatches = 0, ties = 0, cases = 0;
        const double grid[] = {0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95};
        for (std::int64_t k = 1; k <= 200; ++k)
            for (double p : grid)
                for (double q : grid) {
                    if (q <= p)
                        continue;
                    ++cases;
                    const double a = binomial_crossing_point(p, q);
                    const double lr = std::log(p / q), lr1 = std::log((1 - p) / (1 - q));
                    for (std::int64_t i = 0; i <= k; ++i) {
                        // log pmf_p(i) - log pmf_q(i)
                        const double diff = static_cast<double>(i) * lr + static_cast<double>(k - i) * lr1;
                        const double scale = std::fabs(static_cast<double>(i) * lr) + std::fabs(static_cast<double>(k - i) * lr1);
                        const double cut = static_cast<double>(k) * a;
                        if (std::fabs(diff) <= 1e-12 * scale) {
                            // Equal masses belong to the set; the cut must land on i up to rounding.
                            ++ties;
                            if (static_cast<double>(i) > cut + 1e-9 * static_cast<double>(k))
                                ++mismatches;
                            continue;
                        }
                        const bool in_set = diff > 0.0;
                        const bool by_cut = static_cast<double>(i) <= cut;
                        if (in_set != by_cut)
                            ++mismatches;
                    }
                }
        record("crossing_set_equality", static_cast<double>(mismatches), 0.0, mismatches == 0,
               std::to_string(mismatches) + " mismatches over " + std::to_string(cases) + " (k, p, q) cases, "
                   + std::to_string(ties) + " of them at exact ties");
    }

    // Hazard calibration hits the mean-lifespan target.
    {
        double worst = 0.0;
        for (double g : {1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0})
            for (double n : {100.0, 10000.0}) {
                const auto cal = calibrate_hazard(g, n);
                worst = std::max(worst, std::fabs(integrate_mean_lifespan(cal) / n - 1.0));
            }
        record("calibration_mean_lifespan", worst, 1e-6, worst <= 1e-6, "max relative error " + fmt(worst));
    }

    r.files.push_back({csv_name(c), csv});
    return r;
}

} // namespace dynet::detail
