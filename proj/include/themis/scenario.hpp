#pragma once

#include <string>
#include <vector>

#include "themis/sim.hpp"

namespace themis {

// Self-check attached to a scenario: an observable of the run compared
// against a target with a tolerance.
//   ratio        bytes(a) / bytes(b) over [from_s, to_s)
//   share        bytes(job) / total bytes over [from_s, to_s)
//   user_ratio   user bytes(a) / user bytes(b)
//   group_ratio  group bytes(a) / group bytes(b)
//   completion   completion time of `job` in seconds (target +- tol)
//   divergence   max assignment divergence in seconds (must be <= target)
struct Expectation {
    std::string name;
    std::string type;
    std::string a;
    std::string b;
    std::string job;
    double from_s = 0.0;
    double to_s = 1e18;
    double target = 0.0;
    double tol = 0.0;
};

struct Scenario {
    SimConfig config;
    std::vector<Expectation> expectations;
};

// Parse a scenario JSON document. Throws ParseError with field diagnostics.
Scenario load_scenario(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);

struct ExpectationResult {
    std::string name;
    bool pass = false;
    double actual = 0.0;
    std::string detail;
};

std::vector<ExpectationResult> evaluate_expectations(const Scenario& scenario,
                                                     const Metrics& metrics);

} // namespace themis
