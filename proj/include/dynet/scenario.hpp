#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dynet/analytics.hpp"
#include "dynet/simulator.hpp"
#include "dynet/turnover.hpp"

namespace dynet {

inline constexpr int kReportSchemaVersion = 1;

enum class ScenarioKind { Si, Connectivity, Mixing, Lemma4, TurnoverEr, PaTurnover, Figure1, Bounds };

const char* scenario_kind_name(ScenarioKind kind);

struct Diagnostic {
    std::string field;
    std::string message;
};

class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

/// Parsed, defaulted and cross-checked scenario description. `resolved`
/// holds the same content as JSON and is embedded verbatim in reports so a
/// run can be replayed from its report alone.
struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::Si;
    std::string name;

    std::vector<node_t> n_values;
    EdgeParams params;
    InfectionRate beta;
    int m = 2;
    double gamma = 3.0;
    LifespanPolicy::Kind policy = LifespanPolicy::Kind::Exponential;
    int trials = 1;
    std::uint64_t seed = 1;
    double horizon = 0.0;
    std::int64_t steps = 0;
    std::vector<std::int64_t> k_values; ///< mixing: edge counts
    std::optional<node_t> target;       ///< si: hitting level (default n)
    double level = 0.25;
    MixingRegime regime = MixingRegime::ConstantP;
    double sparse_c = 2.0;
    double sparse_alpha = 0.0; ///< mixing, sparse regime: p = c/k per k
    std::vector<std::int64_t> lemma4_N;
    double scale_r = 0.0; ///< si: > 0 enables the time-scaling comparison
    InitialGraph initial = InitialGraph::Stationary;
    double burn_in = 0.0;
    double sample_interval = 0.5;
    double age_interval = 0.0;
    std::int64_t k_min = 0; ///< pa fits; 0 means 2m
    bool export_events = false;
    std::string output;

    nlohmann::json resolved;
};

/// Schema problems in a config document; empty means valid.
std::vector<Diagnostic> validate_config(const nlohmann::json& doc);

/// Throws ConfigError carrying every diagnostic.
ScenarioConfig parse_config(const nlohmann::json& doc);

/// Reads and parses a file; I/O and JSON syntax problems throw std::runtime_error.
nlohmann::json read_config_file(const std::string& path);

struct Check {
    std::string name;
    std::optional<int> criterion; ///< acceptance criterion number, if any
    bool pass = false;
    std::string detail;
};

struct OutputFile {
    std::string name;
    std::string content;
};

struct RunReport {
    ScenarioConfig config;
    std::vector<OutputFile> files; ///< files[0] is the trial CSV
    nlohmann::json aggregates = nlohmann::json::object();
    nlohmann::json theory = nlohmann::json::object();
    nlohmann::json metadata = nlohmann::json::object();
    std::vector<Check> checks;

    bool all_pass() const;
    bool criterion_pass(int criterion) const;
    nlohmann::json to_json() const;
};

struct RunOptions {
    int jobs = 1;
    std::optional<std::uint64_t> seed; ///< overrides the config seed
    SimLimits limits;
};

/// Node cap from DYNET_MAX_N, else the default.
SimLimits limits_from_env();

RunReport run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// Writes every output file plus report.json into dir (created if needed).
void write_report(const RunReport& report, const std::string& dir);

struct CatalogEntry {
    ScenarioKind kind;
    std::string parameters;
    std::string anchor; ///< the result the scenario checks
};

std::vector<CatalogEntry> list_scenarios();

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. Results must be
/// written to per-index slots; the first exception is rethrown after join.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

} // namespace dynet
