#pragma once

// JSON and text rendering of verdicts and linearization results. Numbers are
// written as decimal strings; elapsed times appear in text output only so
// that JSON is byte-identical across runs with one seed.

#include "weblin/invariants.hpp"
#include "weblin/linearizer.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace weblin {

struct RunConfig {
    std::string command;
    std::string f;
    std::vector<std::string> gs;
    Domain domain;
    std::uint64_t seed = 1;
    ZeroTestPolicy policy;
    std::map<std::string, std::string> params; // fixed parameter values
    LinearizerOptions linearizer;
    bool json = false;
    std::string svg;
    std::optional<int> example;
};

/// Exact decimal when the denominator divides a power of ten, "p/q" otherwise.
std::string decimal_string(const Rational& q);
/// Shortest round-trip decimal of a double.
std::string decimal_string(double d);

nlohmann::json config_json(const RunConfig& config);
nlohmann::json invariant_json(const InvariantReport& report);
nlohmann::json linearization_json(const LinearizationResult& result);

/// The documented report object; `lin` may be null.
nlohmann::json report_json(const RunConfig& config, const WebVerdict& verdict, const LinearizationResult* lin);

void print_verdict(std::ostream& os, const RunConfig& config, const WebVerdict& verdict, bool evidence_tables);
void print_linearization(std::ostream& os, const LinearizationResult& result);

} // namespace weblin
