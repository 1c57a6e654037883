#pragma once

#include "ngopt/metrics.hpp"
#include "ngopt/optimizer.hpp"

#include <string>

namespace ngopt {

struct ScenarioConfig {
    std::string scenario;          // cat-odd | cat-even | cps | gkp | random | custom
    std::vector<int> target;       // empty: use the scenario default; {-1}: auto (halve)
    std::optional<int> cutoff;
    std::uint64_t seed = 7;
    std::string output_dir = "out";
    int jobs = 0;                  // OpenMP threads for sweeps; 0 keeps the default
    bool sweep_s0 = false;         // gkp only
    std::string custom_file;       // JSON input for the custom scenario
    MetricConvention gkp_convention = MetricConvention::hbar2; // calibrated against the paper value
};

struct Scenario {
    GeneratorSpec spec;
    GaussianPure full_state;       // circuit state, signal modes first
    std::vector<int> default_target;
    std::string metric;            // "cat" | "cps" | "gkp" | ""
    std::string notes;
};

/// Gaussian stage of the named generation circuit.
Scenario build_scenario(const ScenarioConfig& config);

/// Run the optimization scenario and write report.json, params.json,
/// tables.csv, wigner_before.csv and wigner_after.csv into output_dir.
/// Returns 0 on success, 2 on infeasible optimization, 3 on I/O failure.
int run_scenario(const ScenarioConfig& config);

/// Serialize / parse an optimization report (fixed key order, 12 significant
/// digits on floats).
std::string report_to_json(const OptimizationReport& rep, const std::string& metric,
                           double xi_before, double xi_after, const std::string& notes);
/// Re-emit a parsed report; byte-identical for files this library wrote.
std::string reemit_report_json(const std::string& text);

/// GKP breeding circuit for arbitrary cat-level s0 (r fixed at 8 dB).
Scenario build_gkp_breeding(double cat_s0, int photons);

double db_to_rnat(double r_db);

} // namespace ngopt
