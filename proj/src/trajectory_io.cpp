#include "dynet/trajectory_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dynet {

const char* event_kind_name(EventKind kind)
{
    switch (kind) {
    case EventKind::EdgeOn:
        return "edge_on";
    case EventKind::EdgeOff:
        return "edge_off";
    case EventKind::Infect:
        return "infect";
    }
    return "?";
}

EventKind parse_event_kind(const std::string& name)
{
    if (name == "edge_on")
        return EventKind::EdgeOn;
    if (name == "edge_off")
        return EventKind::EdgeOff;
    if (name == "infect")
        return EventKind::Infect;
    throw std::invalid_argument("unknown event kind '" + name + "'");
}

std::string format_double(double x)
{
    if (!std::isfinite(x))
        return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_events_jsonl(std::ostream& out, const std::vector<Event>& events)
{
    for (const Event& ev : events) {
        out << "{\"t\": " << format_double(ev.t) << ", \"kind\": \"" << event_kind_name(ev.kind)
            << "\", \"i\": " << ev.i << ", \"j\": ";
        if (ev.kind == EventKind::Infect)
            out << "null";
        else
            out << ev.j;
        out << "}\n";
    }
}

std::vector<Event> read_events_jsonl(std::istream& in)
{
    std::vector<Event> events;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            const auto j = nlohmann::json::parse(line);
            Event ev;
            ev.t = j.at("t").get<double>();
            ev.kind = parse_event_kind(j.at("kind").get<std::string>());
            ev.i = j.at("i").get<node_t>();
            ev.j = j.at("j").is_null() ? -1 : j.at("j").get<node_t>();
            if ((ev.kind == EventKind::Infect) != (ev.j == -1))
                throw std::invalid_argument("\"j\" must be null exactly for infect events");
            events.push_back(ev);
        } catch (const std::exception& e) {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return events;
}

void write_degree_csv(std::ostream& out, const DegreeHistogram& hist, double n, const LifespanPolicy& policy)
{
    out << "degree,count,predicted_density\n";
    for (const auto& [k, c] : hist.counts)
        out << k << ',' << c << ','
            << format_double(predicted_degree_density(static_cast<double>(k), hist.m, n, policy)) << '\n';
}

} // namespace dynet
