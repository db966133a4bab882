#include "lprep/cli_report.h"

#include <chrono>
#include <cmath>
#include <ctime>

#include <fmt/format.h>

namespace lprep::cli {

namespace {

std::string csv_escape(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

void flatten(const json &j, const std::string &prefix, std::vector<std::pair<std::string, std::string>> &out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
        }
        return;
    }
    if (j.is_array()) {
        std::string joined;
        for (const auto &x : j) {
            if (x.is_structured()) {
                // Nested records (traces, per-row tables) are JSON-only.
                return;
            }
            if (!joined.empty()) {
                joined += ';';
            }
            joined += csv_cell(x);
        }
        out.emplace_back(prefix, joined);
        return;
    }
    out.emplace_back(prefix, csv_cell(j));
}

}  // namespace

json number(double x) {
    return std::isfinite(x) ? json(x) : json(nullptr);
}

json number(const std::optional<double> &x) {
    return x ? number(*x) : json(nullptr);
}

json ledger_json(const ResourceLedger &ledger) {
    return json{{"depth", ledger.depth()},
                {"unitary_layers", ledger.unitary_layers()},
                {"locc_steps", ledger.locc_steps()},
                {"ancillas_per_site", ledger.ancillas_per_site},
                {"extra_ancillas", ledger.extra_ancillas},
                {"repetitions", ledger.repetitions}};
}

json checks_json(const std::vector<BoundCheck> &checks) {
    json out = json::array();
    for (const auto &c : checks) {
        out.push_back(json{{"name", c.name},
                           {"lhs", number(c.lhs)},
                           {"relation", c.relation},
                           {"rhs", number(c.rhs)},
                           {"satisfied", c.satisfied}});
    }
    return out;
}

json Report::to_json(const std::string &timestamp) const {
    json j;
    j["tool"] = "lprep";
    j["schema_version"] = kSchemaVersion;
    j["subcommand"] = subcommand;
    j["timestamp"] = timestamp;
    j["config"] = config;
    j["status"] = violated() ? "bound_violated" : "ok";
    j["infidelity"] = number(infidelity);
    j["success_probability"] = number(success_probability);
    j["ledger"] = ledger ? ledger_json(*ledger) : json(nullptr);
    j["bound_checks"] = checks_json(checks);
    j["result"] = result;
    if (measurement_trace) {
        j["measurement_trace"] = *measurement_trace;
    }
    return j;
}

std::string timestamp_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string csv_cell(const json &value) {
    if (value.is_null()) {
        return "";
    }
    if (value.is_boolean()) {
        return value.get<bool>() ? "true" : "false";
    }
    if (value.is_number_unsigned()) {
        return std::to_string(value.get<std::uint64_t>());
    }
    if (value.is_number_integer()) {
        return std::to_string(value.get<std::int64_t>());
    }
    if (value.is_number_float()) {
        return fmt::format("{}", value.get<double>());
    }
    if (value.is_string()) {
        return csv_escape(value.get<std::string>());
    }
    return csv_escape(value.dump());
}

void write_flat_csv(const json &report, std::ostream &out) {
    std::vector<std::pair<std::string, std::string>> cells;
    flatten(report, "", cells);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out << (i ? "," : "") << csv_escape(cells[i].first);
    }
    out << "\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out << (i ? "," : "") << cells[i].second;
    }
    out << "\n";
}

}  // namespace lprep::cli
