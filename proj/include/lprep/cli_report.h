#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lprep/bounds.h"
#include "lprep/resource_ledger.h"

namespace lprep::cli {

using json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

/// Finite doubles as numbers, everything else as null.
json number(double x);
json number(const std::optional<double> &x);
json ledger_json(const ResourceLedger &ledger);
json checks_json(const std::vector<BoundCheck> &checks);

/// The envelope every subcommand emits.
struct Report {
    std::string subcommand;
    json config = json::object();
    std::optional<double> infidelity;
    std::optional<double> success_probability;
    std::optional<ResourceLedger> ledger;
    std::vector<BoundCheck> checks;
    json result = json::object();
    std::optional<json> measurement_trace;

    bool violated() const {
        return !all_satisfied(checks);
    }
    json to_json(const std::string &timestamp) const;
};

/// UTC time in ISO 8601, second resolution.
std::string timestamp_now();

/// Scalar as CSV text: numbers in shortest round-trip form, null as empty.
std::string csv_cell(const json &value);
/// Two-line CSV of every scalar leaf of the report (dotted keys); arrays of scalars are joined by ';'.
void write_flat_csv(const json &report, std::ostream &out);

}  // namespace lprep::cli
