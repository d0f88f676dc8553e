#pragma once

#include <cstdint>
#include <sstream>
#include <string>

#include "dynet/scenario.hpp"

namespace dynet::detail {

RunReport run_si(const ScenarioConfig& c, std::uint64_t seed, const RunOptions& o);
RunReport run_connectivity(const ScenarioConfig& c, std::uint64_t seed, const RunOptions& o);
RunReport run_mixing(const ScenarioConfig& c, const RunOptions& o);
RunReport run_lemma4(const ScenarioConfig& c, const RunOptions& o);
RunReport run_turnover_er(const ScenarioConfig& c, std::uint64_t seed, const RunOptions& o);
RunReport run_pa_turnover(const ScenarioConfig& c, std::uint64_t seed, const RunOptions& o);
RunReport run_figure1(const ScenarioConfig& c, std::uint64_t seed, const RunOptions& o);
RunReport run_bounds(const ScenarioConfig& c, std::uint64_t seed, const RunOptions& o);

/// Comma-joined CSV row builder with round-trip double formatting.
class CsvRow {
public:
    CsvRow& operator<<(double v);
    CsvRow& operator<<(std::int64_t v);
    CsvRow& operator<<(int v) { return *this << static_cast<std::int64_t>(v); }
    CsvRow& operator<<(std::uint64_t v);
    CsvRow& operator<<(const std::string& v);
    CsvRow& operator<<(const char* v) { return *this << std::string(v); }
    CsvRow& operator<<(bool v) { return *this << std::string(v ? "true" : "false"); }
    CsvRow& empty();
    std::string str() const { return line_ + "\n"; }

private:
    void sep();
    std::string line_;
    bool first_ = true;
};

} // namespace dynet::detail
