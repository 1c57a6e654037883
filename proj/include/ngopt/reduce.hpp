#pragma once

#include "ngopt/control.hpp"

#include <vector>

namespace ngopt {

/// How the wavefunction match phi_n(x) ~ phi_n'(kx - d) was obtained.
enum class MatchMethod { analytic_parity, method1, method2, method2_at_turning };

/// Photon-number reduction of one control mode: n -> n_prime with scale k and
/// shift d, reduced parameters, and the signal-side correction unitary whose
/// wavefunction action is psi(x) -> sqrt(k) psi(kx - d).
struct ReductionPlan {
    int n = 0;
    int n_prime = 0;
    double k = 1.0;
    double d = 0.0;
    double s0_prime = 0.0;
    cplx delta0_prime{0.0, 0.0};
    GaussianUnitary correction;
    MatchMethod method_used = MatchMethod::analytic_parity;
    double pre_rotation = 0.0; // control rotation applied before the filter (s0 = 0 case)
};

/// hbar=2 Hermite function phi_n(x) and its derivative, stable recurrences.
double fock_wavefunction(int n, double x);
double fock_wavefunction_deriv(int n, double x);

/// p(x) = sqrt(4n+2 - x^2) inside the classically allowed region, 0 outside.
double local_momentum(int n, double x);
double turning_point(int n); // sqrt(4n+2)
double largest_root(int n);  // largest zero of phi_n, 0 for n <= 1

/// Same-parity closed form: k = sqrt((2n+1)/(2n'+1)), d = 0.
std::pair<double, double> match_parity(int n, int n_prime);

struct MatchCandidate {
    double k = 0.0;
    double d = 0.0;
    double deriv_mismatch = 0.0; // |p'(x0) - ptilde'(x0)|
};

/// Method 1: match p(x0) = ptilde(x0) plus proportional initial conditions.
/// Returns all distinct solutions sorted by derivative mismatch.
std::vector<MatchCandidate> method1(int n, int n_prime, double x0);

/// Method 2: match p and p' at x0; reduces to a cubic in k^2.
std::pair<double, double> method2(int n, int n_prime, double x0);

/// Select the method per the switch points x_z, x_t and assemble the plan.
ReductionPlan plan_reduction(double s0, cplx delta0, int n, int n_prime);

/// Gaussian filter realizing the reduction on one control mode:
/// M = G_{C',b'} U_corr^T G_{C,b}^{-1} in the ladder representation, converted
/// to a Choi map.  C' keeps the symplectic eigenvalue of C.
GaussianCPMap build_filter(const Mat2& c_m, const Vec2& beta_m, int n, const ReductionPlan& plan);

/// Apply the mode-m reduction filter to the full control moments.
ControlMoments apply_reduction(const ControlMoments& m, int mode, const ReductionPlan& plan);

} // namespace ngopt
