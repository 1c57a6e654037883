#pragma once

#include "ngopt/fock.hpp"

#include <optional>

namespace ngopt {

/// Which vacuum-variance convention a metric was evaluated in.
enum class MetricConvention { hbar2, hbar1 };

struct MetricResult {
    double value = 0.0;
    double lambda = 0.0;                // optimal scale
    std::optional<double> d;            // optimal offset (xi_cps)
    std::optional<double> phi1, phi2;   // optimal phases (xi_gkp)
    MetricConvention convention = MetricConvention::hbar2;
};

/// x^2-squeezing xi_cat = min_l <(x^2/l^2 - 1)^2>; closed form
/// 1 - <x^2>^2/<x^4> in hbar=2 moments.  Vacuum gives 2/3.
MetricResult xi_cat(const FockVector& v);

/// Cubic nonlinear squeezing xi_cps = min_{l,d} <(l p - x^2/(sqrt2 l^2) - d)^2>
/// on hbar=1-rescaled quadratures.  Vacuum gives 3/4.
MetricResult xi_cps(const FockVector& v);

/// GKP squeezing min over lambda, phases of
/// <2cos^2(l sqrt(pi)/2 x + phi1) + 2cos^2(sqrt(pi)/(2l) p + phi2)>.
/// The convention flag is calibrated against the reproduced GKP state.
MetricResult xi_gkp(const FockVector& v, MetricConvention convention = MetricConvention::hbar1);

} // namespace ngopt
