#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dynet/simulator.hpp"
#include "dynet/stats.hpp"
#include "dynet/turnover.hpp"

namespace dynet {

const char* event_kind_name(EventKind kind);
EventKind parse_event_kind(const std::string& name);

/// One event per line: {"t": ..., "kind": "edge_on", "i": 3, "j": 7}.
/// Infect events carry "j": null.
void write_events_jsonl(std::ostream& out, const std::vector<Event>& events);
std::vector<Event> read_events_jsonl(std::istream& in);

/// degree,count,predicted_density rows for every degree present in the
/// histogram (predicted density from the policy at size n).
void write_degree_csv(std::ostream& out, const DegreeHistogram& hist, double n, const LifespanPolicy& policy);

/// Shortest decimal form that round-trips a double.
std::string format_double(double x);

} // namespace dynet
