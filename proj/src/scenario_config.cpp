#include "dynet/scenario.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace dynet {

using nlohmann::json;

const char* scenario_kind_name(ScenarioKind kind)
{
    switch (kind) {
    case ScenarioKind::Si:
        return "si";
    case ScenarioKind::Connectivity:
        return "connectivity";
    case ScenarioKind::Mixing:
        return "mixing";
    case ScenarioKind::Lemma4:
        return "lemma4";
    case ScenarioKind::TurnoverEr:
        return "turnover_er";
    case ScenarioKind::PaTurnover:
        return "pa_turnover";
    case ScenarioKind::Figure1:
        return "figure1";
    case ScenarioKind::Bounds:
        return "bounds";
    }
    return "?";
}

namespace {

std::string summarize(const std::vector<Diagnostic>& diags)
{
    std::string s = "invalid config:";
    for (const auto& d : diags)
        s += "\n  " + d.field + ": " + d.message;
    return s;
}

const char* policy_name(LifespanPolicy::Kind k)
{
    switch (k) {
    case LifespanPolicy::Kind::Exponential:
        return "exponential";
    case LifespanPolicy::Kind::Fifo:
        return "fifo";
    case LifespanPolicy::Kind::HazardGamma:
        return "hazard";
    }
    return "?";
}

const std::set<std::string> kKnownFields = {
    "scenario", "name",    "n",         "n_values", "lambda",       "mu",         "p",          "alpha",
    "beta",     "m",       "gamma",     "policy",   "trials",       "seed",       "horizon",    "steps",
    "k",        "target",  "level",     "regime",   "c",            "N",          "scale_r",    "initial",
    "burn_in",  "sample_interval",      "age_interval", "k_min",    "export_events", "output",
};

class Reader {
public:
    explicit Reader(const json& doc)
        : doc_(doc)
    {
    }

    std::vector<Diagnostic> diags;

    bool has(const char* f) const { return doc_.contains(f) && !doc_[f].is_null(); }

    void fail(const std::string& field, const std::string& msg) { diags.push_back({field, msg}); }

    std::optional<double> number(const char* f)
    {
        if (!has(f))
            return std::nullopt;
        if (!doc_[f].is_number()) {
            fail(f, "must be a number");
            return std::nullopt;
        }
        const double v = doc_[f].get<double>();
        if (!std::isfinite(v)) {
            fail(f, "must be finite");
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::int64_t> integer(const char* f)
    {
        if (!has(f))
            return std::nullopt;
        if (!doc_[f].is_number_integer()) {
            fail(f, "must be an integer");
            return std::nullopt;
        }
        return doc_[f].get<std::int64_t>();
    }

    std::optional<std::string> string(const char* f)
    {
        if (!has(f))
            return std::nullopt;
        if (!doc_[f].is_string()) {
            fail(f, "must be a string");
            return std::nullopt;
        }
        return doc_[f].get<std::string>();
    }

    /// Integer or list of integers.
    std::vector<std::int64_t> integers(const char* f)
    {
        std::vector<std::int64_t> out;
        if (!has(f))
            return out;
        const json& v = doc_[f];
        if (v.is_number_integer()) {
            out.push_back(v.get<std::int64_t>());
        } else if (v.is_array() && !v.empty()) {
            for (const auto& e : v) {
                if (!e.is_number_integer()) {
                    fail(f, "must be an integer or a nonempty list of integers");
                    return {};
                }
                out.push_back(e.get<std::int64_t>());
            }
        } else {
            fail(f, "must be an integer or a nonempty list of integers");
        }
        return out;
    }

    double positive(const char* f, double fallback)
    {
        auto v = number(f);
        if (!v)
            return fallback;
        if (!(*v > 0.0))
            fail(f, "must be positive");
        return *v;
    }

    double nonnegative(const char* f, double fallback)
    {
        auto v = number(f);
        if (!v)
            return fallback;
        if (!(*v >= 0.0))
            fail(f, "must be nonnegative");
        return *v;
    }

    const json& doc() const { return doc_; }

private:
    const json& doc_;
};

bool close(double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)}); }

/// Exactly one of (lambda, mu) or (p, alpha); both is allowed only when they agree.
std::optional<EdgeParams> read_rates(Reader& r, bool required)
{
    const auto lambda = r.number("lambda");
    const auto mu = r.number("mu");
    const auto p = r.number("p");
    const auto alpha = r.number("alpha");
    const bool rate_form = lambda || mu;
    const bool prob_form = p || alpha;

    std::optional<EdgeParams> from_rates, from_prob;
    if (rate_form) {
        if (!lambda || !mu)
            r.fail(lambda ? "mu" : "lambda", "lambda and mu must be given together");
        else if (*lambda < 0.0 || *mu < 0.0)
            r.fail("lambda", "rates must be nonnegative");
        else if (*lambda + *mu <= 0.0)
            r.fail("lambda", "lambda + mu must be positive");
        else
            from_rates = EdgeParams::from_rates(*lambda, *mu);
    }
    if (prob_form) {
        if (!p || !alpha)
            r.fail(p ? "alpha" : "p", "p and alpha must be given together");
        else if (!(*p > 0.0 && *p < 1.0))
            r.fail("p", "must lie strictly between 0 and 1");
        else if (!(*alpha > 0.0))
            r.fail("alpha", "must be positive");
        else
            from_prob = derive_rates(*p, *alpha);
    }
    if (from_rates && from_prob) {
        if (!close(from_rates->lambda, from_prob->lambda) || !close(from_rates->mu, from_prob->mu)) {
            r.fail("p", "conflict: (lambda, mu) and (p, alpha) describe different edge processes");
            return std::nullopt;
        }
        r.fail("p", "give either (lambda, mu) or (p, alpha), not both");
        return from_rates;
    }
    if (from_rates)
        return from_rates;
    if (from_prob)
        return from_prob;
    if (required && !rate_form && !prob_form)
        r.fail("lambda", "give either (lambda, mu) or (p, alpha)");
    return std::nullopt;
}

std::optional<InfectionRate> read_beta(Reader& r, bool required)
{
    if (!r.has("beta")) {
        if (required)
            r.fail("beta", "required");
        return std::nullopt;
    }
    const json& v = r.doc()["beta"];
    if (v.is_string()) {
        if (v.get<std::string>() == "inf")
            return InfectionRate::instantaneous();
        r.fail("beta", "must be a positive number or \"inf\"");
        return std::nullopt;
    }
    if (!v.is_number() || !(v.get<double>() > 0.0) || !std::isfinite(v.get<double>())) {
        r.fail("beta", "must be a positive number or \"inf\"");
        return std::nullopt;
    }
    return InfectionRate::finite(v.get<double>());
}

std::vector<node_t> read_sizes(Reader& r, bool required, std::int64_t min_n, std::int64_t fallback = 0)
{
    std::vector<std::int64_t> raw;
    if (r.has("n") && r.has("n_values")) {
        r.fail("n", "give n or n_values, not both");
        return {};
    }
    raw = r.integers(r.has("n_values") ? "n_values" : "n");
    if (raw.empty() && !r.has("n") && !r.has("n_values")) {
        if (fallback > 0)
            raw.push_back(fallback);
        else if (required)
            r.fail("n", "required");
    }
    std::vector<node_t> out;
    for (auto n : raw) {
        if (n < min_n || n > std::numeric_limits<node_t>::max()) {
            r.fail("n", "must be at least " + std::to_string(min_n));
            return {};
        }
        out.push_back(static_cast<node_t>(n));
    }
    return out;
}

ScenarioConfig read(const json& doc, std::vector<Diagnostic>& diags)
{
    ScenarioConfig c;
    if (!doc.is_object()) {
        diags.push_back({"(root)", "config must be a JSON object"});
        return c;
    }
    Reader r(doc);
    for (const auto& [key, _] : doc.items())
        if (!kKnownFields.count(key))
            r.fail(key, "unknown field");

    const auto kind = r.string("scenario");
    if (!kind) {
        if (!r.has("scenario"))
            r.fail("scenario", "required");
        diags = r.diags;
        return c;
    }
    bool known = false;
    for (auto k : {ScenarioKind::Si, ScenarioKind::Connectivity, ScenarioKind::Mixing, ScenarioKind::Lemma4,
                   ScenarioKind::TurnoverEr, ScenarioKind::PaTurnover, ScenarioKind::Figure1, ScenarioKind::Bounds})
        if (*kind == scenario_kind_name(k)) {
            c.kind = k;
            known = true;
        }
    if (!known) {
        r.fail("scenario", "unknown scenario kind '" + *kind + "' (see `dynet list`)");
        diags = r.diags;
        return c;
    }
    c.name = r.string("name").value_or(*kind);
    c.output = r.string("output").value_or("");

    const auto trials = r.integer("trials");
    if (trials && *trials < 1)
        r.fail("trials", "must be at least 1");
    if (trials && *trials > 1000000)
        r.fail("trials", "must be at most 1000000");
    const auto seed = r.integer("seed");
    if (seed && *seed < 0)
        r.fail("seed", "must be nonnegative");
    c.seed = static_cast<std::uint64_t>(seed.value_or(1));

    json res = {{"scenario", *kind}, {"name", c.name}, {"seed", c.seed}};
    auto set_trials = [&](int fallback) {
        c.trials = static_cast<int>(trials.value_or(fallback));
        res["trials"] = c.trials;
    };
    auto put_rates = [&] {
        res["lambda"] = c.params.lambda;
        res["mu"] = c.params.mu;
    };
    auto put_beta = [&] {
        if (c.beta.infinite)
            res["beta"] = "inf";
        else
            res["beta"] = c.beta.beta;
    };
    auto read_initial = [&] {
        const auto init = r.string("initial").value_or("stationary");
        if (init == "stationary")
            c.initial = InitialGraph::Stationary;
        else if (init == "empty")
            c.initial = InitialGraph::Empty;
        else
            r.fail("initial", "must be \"stationary\" or \"empty\"");
        res["initial"] = init;
    };

    switch (c.kind) {
    case ScenarioKind::Si: {
        c.n_values = read_sizes(r, true, 2);
        if (auto p = read_rates(r, true))
            c.params = *p;
        if (auto b = read_beta(r, true))
            c.beta = *b;
        set_trials(100);
        read_initial();
        c.horizon = r.positive("horizon", std::numeric_limits<double>::infinity());
        if (auto t = r.integer("target")) {
            c.target = static_cast<node_t>(*t);
            for (node_t n : c.n_values)
                if (*t < 1 || *t > n)
                    r.fail("target", "must lie in [1, n] for every n");
            res["target"] = *t;
        }
        c.scale_r = r.nonnegative("scale_r", 0.0);
        if (c.scale_r > 0.0) {
            if (c.beta.infinite)
                r.fail("scale_r", "time-scaling comparison needs a finite beta");
            res["scale_r"] = c.scale_r;
        }
        c.export_events = r.has("export_events") && r.doc()["export_events"].is_boolean()
                          && r.doc()["export_events"].get<bool>();
        if (r.has("export_events") && !r.doc()["export_events"].is_boolean())
            r.fail("export_events", "must be a boolean");
        res["n_values"] = c.n_values;
        put_rates();
        put_beta();
        if (std::isfinite(c.horizon))
            res["horizon"] = c.horizon;
        res["export_events"] = c.export_events;
        break;
    }
    case ScenarioKind::Connectivity: {
        c.n_values = read_sizes(r, true, 2);
        c.params = EdgeParams::from_rates(r.positive("lambda", 1.0), 0.0); // edges persist once present
        for (const char* f : {"mu", "p", "alpha"})
            if (r.has(f))
                r.fail(f, "connectivity uses lambda only");
        set_trials(200);
        res["n_values"] = c.n_values;
        res["lambda"] = c.params.lambda;
        break;
    }
    case ScenarioKind::Mixing: {
        const auto regime = r.string("regime").value_or("constant_p");
        c.k_values = r.integers("k");
        if (c.k_values.empty() && !r.has("k"))
            r.fail("k", "required");
        for (auto k : c.k_values)
            if (k < 2)
                r.fail("k", "must be at least 2");
        c.level = r.positive("level", 0.25);
        if (c.level >= 1.0)
            r.fail("level", "must lie in (0, 1)");
        if (regime == "constant_p") {
            c.regime = MixingRegime::ConstantP;
            if (auto p = read_rates(r, true)) {
                c.params = *p;
                if (derive_stationary(*p).p > 0.5)
                    r.fail("p", "mixing from the all-on start is not covered; need p <= 1/2");
            }
            put_rates();
        } else if (regime == "sparse") {
            c.regime = MixingRegime::Sparse;
            c.sparse_c = r.positive("c", 2.0);
            const auto alpha = r.number("alpha");
            if (!alpha || !(*alpha > 0.0))
                r.fail("alpha", "sparse regime needs a positive alpha (p is set to c/k)");
            else
                c.sparse_alpha = *alpha;
            for (const char* f : {"lambda", "mu", "p"})
                if (r.has(f))
                    r.fail(f, "sparse regime takes alpha and c; p is c/k");
            for (auto k : c.k_values)
                if (c.sparse_c >= 0.5 * static_cast<double>(k))
                    r.fail("c", "c/k must stay below 1/2");
            res["alpha"] = alpha.value_or(0.0);
            res["c"] = c.sparse_c;
        } else {
            r.fail("regime", "must be \"constant_p\" or \"sparse\"");
        }
        res["regime"] = regime;
        res["k"] = c.k_values;
        res["level"] = c.level;
        break;
    }
    case ScenarioKind::Lemma4: {
        c.lemma4_N = r.integers("N");
        if (c.lemma4_N.empty() && !r.has("N"))
            r.fail("N", "required");
        for (auto N : c.lemma4_N)
            if (N < 1 || N > 100000000)
                r.fail("N", "must lie in [1, 1e8]");
        if (auto p = read_rates(r, true))
            c.params = *p;
        if (auto b = read_beta(r, true)) {
            c.beta = *b;
            if (b->infinite)
                r.fail("beta", "lemma4 needs a finite beta");
        }
        res["N"] = c.lemma4_N;
        put_rates();
        put_beta();
        break;
    }
    case ScenarioKind::TurnoverEr: {
        c.n_values = read_sizes(r, true, 1);
        if (c.n_values.size() > 1)
            r.fail("n", "turnover_er takes a single n");
        if (auto p = read_rates(r, true)) {
            c.params = *p;
            if (p->mu <= 0.0)
                r.fail("mu", "turnover_er needs mu > 0");
        }
        c.horizon = r.positive("horizon", 0.0);
        if (!r.has("horizon"))
            r.fail("horizon", "required");
        c.burn_in = r.nonnegative("burn_in", 20.0);
        c.sample_interval = r.positive("sample_interval", 0.5);
        c.age_interval = r.nonnegative("age_interval", 50.0);
        if (c.burn_in >= c.horizon && c.horizon > 0.0)
            r.fail("burn_in", "must be shorter than the horizon");
        set_trials(1);
        res["n"] = c.n_values.empty() ? 0 : c.n_values.front();
        put_rates();
        res["horizon"] = c.horizon;
        res["burn_in"] = c.burn_in;
        res["sample_interval"] = c.sample_interval;
        res["age_interval"] = c.age_interval;
        break;
    }
    case ScenarioKind::PaTurnover: {
        c.n_values = read_sizes(r, true, 2);
        if (c.n_values.size() > 1)
            r.fail("n", "pa_turnover takes a single n");
        const auto m = r.integer("m");
        c.m = static_cast<int>(m.value_or(2));
        if (c.m < 1)
            r.fail("m", "must be at least 1");
        if (!c.n_values.empty() && c.n_values.front() <= c.m)
            r.fail("n", "must exceed m");
        const auto steps = r.integer("steps");
        if (!steps)
            r.fail("steps", "required");
        else if (*steps < 0)
            r.fail("steps", "must be nonnegative");
        c.steps = steps.value_or(0);
        const auto policy = r.string("policy").value_or("exponential");
        if (policy == "exponential")
            c.policy = LifespanPolicy::Kind::Exponential;
        else if (policy == "fifo")
            c.policy = LifespanPolicy::Kind::Fifo;
        else if (policy == "hazard")
            c.policy = LifespanPolicy::Kind::HazardGamma;
        else
            r.fail("policy", "must be \"exponential\", \"fifo\" or \"hazard\"");
        if (c.policy == LifespanPolicy::Kind::HazardGamma) {
            c.gamma = r.positive("gamma", 0.0);
            if (!r.has("gamma"))
                r.fail("gamma", "hazard policy needs gamma");
            else if (!(c.gamma > 1.0))
                r.fail("gamma", "must exceed 1");
            res["gamma"] = c.gamma;
        } else if (r.has("gamma")) {
            r.fail("gamma", "only the hazard policy takes gamma");
        }
        const auto k_min = r.integer("k_min");
        c.k_min = k_min.value_or(2 * c.m);
        if (c.k_min < 1)
            r.fail("k_min", "must be at least 1");
        set_trials(1);
        res["n"] = c.n_values.empty() ? 0 : c.n_values.front();
        res["m"] = c.m;
        res["steps"] = c.steps;
        res["policy"] = policy_name(c.policy);
        res["k_min"] = c.k_min;
        break;
    }
    case ScenarioKind::Figure1: {
        c.n_values = read_sizes(r, false, 2, 100);
        if (c.n_values.size() > 1)
            r.fail("n", "figure1 takes a single n");
        const bool any_rate = r.has("lambda") || r.has("mu") || r.has("p") || r.has("alpha");
        if (any_rate) {
            if (auto p = read_rates(r, true))
                c.params = *p;
        } else {
            c.params = EdgeParams::from_rates(0.01, 0.01);
        }
        if (auto b = read_beta(r, false))
            c.beta = *b;
        else if (!r.has("beta"))
            c.beta = InfectionRate::finite(0.015);
        if (c.beta.infinite)
            r.fail("beta", "figure1 needs a finite beta");
        set_trials(100);
        read_initial();
        res["n"] = c.n_values.empty() ? 0 : c.n_values.front();
        put_rates();
        put_beta();
        break;
    }
    case ScenarioKind::Bounds: {
        set_trials(1);
        break;
    }
    }

    // Fields that the chosen kind ignores are reported rather than dropped.
    static const std::map<ScenarioKind, std::set<std::string>> kAllowed = {
        {ScenarioKind::Si, {"n", "n_values", "lambda", "mu", "p", "alpha", "beta", "trials", "initial", "horizon",
                            "target", "scale_r", "export_events"}},
        {ScenarioKind::Connectivity, {"n", "n_values", "lambda", "mu", "p", "alpha", "trials"}},
        {ScenarioKind::Mixing, {"k", "lambda", "mu", "p", "alpha", "regime", "c", "level"}},
        {ScenarioKind::Lemma4, {"N", "lambda", "mu", "p", "alpha", "beta"}},
        {ScenarioKind::TurnoverEr, {"n", "n_values", "lambda", "mu", "p", "alpha", "horizon", "burn_in",
                                    "sample_interval", "age_interval", "trials"}},
        {ScenarioKind::PaTurnover, {"n", "n_values", "m", "steps", "policy", "gamma", "k_min", "trials"}},
        {ScenarioKind::Figure1, {"n", "n_values", "lambda", "mu", "p", "alpha", "beta", "trials", "initial"}},
        {ScenarioKind::Bounds, {"trials"}},
    };
    for (const auto& [key, _] : doc.items())
        if (kKnownFields.count(key) && key != "scenario" && key != "name" && key != "seed" && key != "output"
            && !kAllowed.at(c.kind).count(key))
            r.fail(key, std::string("not used by the ") + *kind + " scenario");

    c.resolved = std::move(res);
    diags = r.diags;
    return c;
}

} // namespace

ConfigError::ConfigError(std::vector<Diagnostic> diagnostics)
    : std::invalid_argument(summarize(diagnostics))
    , diagnostics_(std::move(diagnostics))
{
}

std::vector<Diagnostic> validate_config(const json& doc)
{
    std::vector<Diagnostic> diags;
    try {
        read(doc, diags);
    } catch (const std::exception& e) {
        diags.push_back({"(root)", e.what()});
    }
    return diags;
}

ScenarioConfig parse_config(const json& doc)
{
    std::vector<Diagnostic> diags;
    ScenarioConfig c = read(doc, diags);
    if (!diags.empty())
        throw ConfigError(std::move(diags));
    return c;
}

json read_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

} // namespace dynet
