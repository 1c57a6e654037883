#pragma once

#include "ngopt/fock.hpp"
#include "ngopt/reduce.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ngopt {

struct OptimizationOptions {
    double search_tail_tol = 1e-5; // probability tail during the damping search
    int restarts = 5;
    std::optional<int> cutoff; // herald cutoff override
    std::uint64_t seed = 1234; // restart sampling
};

struct OptimizationReport {
    GeneratorSpec before;
    GeneratorSpec reduced;
    GeneratorSpec after;
    double p_before = 0.0;
    double p_reduced = 0.0;
    double p_after = 0.0;
    double fidelity = 0.0; // between the heralded outputs before/after
    ControlParams params_before;
    ControlParams params_after;
    std::vector<ReductionPlan> plans;
    std::vector<double> t_star; // +inf entries mean no damping on that mode
    HeraldResult herald_before;
    HeraldResult herald_after;
    GaussianPure state_after; // tracked generator state after both steps
};

/// Step 1: reduce the detected photon numbers mode by mode (ascending order),
/// applying the reduction filter to the moments and, when given, to the full
/// generator state (control modes assumed to be the trailing ones).
GeneratorSpec reduce_photons(const GeneratorSpec& spec, const std::vector<int>& target,
                             std::vector<ReductionPlan>* plans_out = nullptr,
                             GaussianPure* tracked_state = nullptr);

/// Step 2: maximize the heralding probability over the damping orbit.
/// Returns the damped spec and the optimal t (infinite when undamped).
std::pair<GeneratorSpec, std::vector<double>> maximize_probability(
    const GeneratorSpec& spec, const OptimizationOptions& opts = {});

/// Both steps plus bookkeeping.  `full_state` overrides the canonical
/// purification as the generator state used for heralded-output fidelity.
OptimizationReport optimize(const GeneratorSpec& spec, const std::vector<int>& target,
                            const OptimizationOptions& opts = {},
                            const GaussianPure* full_state = nullptr);

/// Per-mode photon targets chosen by predicted reduction quality: each mode
/// gets the smallest n' whose planned wave-form overlap stays above
/// min_overlap; modes that tolerate no reduction keep their photon number.
std::vector<int> choose_targets(const GeneratorSpec& spec, double min_overlap = 0.99);

/// Mode permutation helper used by scenario builders.
GaussianPure permute_modes(const GaussianPure& g, const std::vector<int>& new_order);

} // namespace ngopt
