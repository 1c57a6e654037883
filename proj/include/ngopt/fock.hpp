#pragma once

#include "ngopt/symplectic.hpp"

#include <optional>
#include <vector>

namespace ngopt {

/// Truncated single-mode state, amps[n] = <n|psi>, n = 0..cutoff.
struct FockVector {
    CVec amps;
    bool normalized = false;

    int cutoff() const { return static_cast<int>(amps.size()) - 1; }
    double norm2() const { return amps.squaredNorm(); }
    double tail_mass() const; // |amps[cutoff]|^2 / norm2
    FockVector normalize() const;
};

/// Truncated multimode amplitude array, row-major over dims (cutoff_i + 1).
struct FockTensor {
    std::vector<int> dims;
    CVec amps;

    int modes() const { return static_cast<int>(dims.size()); }
    std::int64_t size() const { return amps.size(); }
    double norm2() const { return amps.squaredNorm(); }
    FockVector as_vector() const; // requires modes() == 1
};

/// Holomorphic (Bargmann) data of a pure Gaussian state:
/// <alpha|psi> = exp(-|alpha|^2/2) * c * exp(alpha*^T A alpha*/2 + b^T alpha*).
struct BargmannForm {
    CMat a;
    CVec b;
    double c = 0.0; // |<0|psi>|, global phase fixed real positive
};

BargmannForm bargmann_form(const GaussianPure& g);

/// Amplitudes <n|G> on the box prod(cutoff_m + 1) via the three-term
/// recurrence on the Bargmann form.  `parallel` enables the wavefront kernel.
FockTensor gaussian_fock_amplitudes(const GaussianPure& g, const std::vector<int>& cutoffs,
                                    bool parallel = true);

/// Serial reference for the recurrence fill (identical arithmetic).
FockTensor gaussian_fock_amplitudes_serial(const GaussianPure& g, const std::vector<int>& cutoffs);

struct HeraldResult {
    FockTensor signal;   // normalized
    double probability = 0.0;
    std::vector<int> cutoffs_used;
};

double tail_tolerance(); // 1e-8 unless NGOPT_TAIL_TOL overrides

/// Project the last k modes onto |n_pattern>, returning the normalized signal
/// state and the heralding probability.  Signal cutoffs grow automatically
/// until the boundary mass drops below the tail tolerance.
HeraldResult herald(const GaussianPure& g, int signal_modes, const std::vector<int>& n_pattern,
                    std::optional<int> cutoff = std::nullopt);

/// Heralding probability from control moments alone, via the minimal
/// canonical purification.
double success_probability(const Mat& c, const Vec& beta, const std::vector<int>& n_pattern,
                           std::optional<int> cutoff = std::nullopt, double tail_tol = -1.0);

/// Normalized (a^dag + s0 a + delta0)^n |0>.
FockVector particle_form(double s0, cplx delta0, int n, int cutoff = -1);

/// Gaussian unitary mapping the particle form to the wave form.
GaussianUnitary p_to_w_unitary(double s0, cplx delta0);

/// Normalized wave form; equals p_to_w_unitary applied to particle_form.
FockVector wave_form(double s0, cplx delta0, int n, int cutoff = -1);

/// Apply a single-mode Gaussian unitary in the Fock basis.
FockVector apply_gaussian_unitary_fock(const GaussianUnitary& u, const FockVector& v);

double fidelity(const FockVector& u, const FockVector& v);
double fidelity(const FockTensor& u, const FockTensor& v);

/// <x^k> for k = 1..max_power (hbar = 2 ladder algebra).
std::vector<double> quadrature_moments_x(const FockVector& v, int max_power);
std::vector<double> quadrature_moments_p(const FockVector& v, int max_power);

/// psi(x) = sum_n a_n phi_n(x) with hbar=2 Hermite functions.
CVec x_wavefunction(const FockVector& v, const Vec& xs);

/// Fock-basis matrix of the displacement operator D(beta), size (n+1)^2.
CMat displacement_matrix(cplx beta, int n);

/// Wigner function on the grid, normalized so that it integrates to 1.
Mat wigner_grid(const FockVector& v, const Vec& xs, const Vec& ps, bool parallel = true);
Mat wigner_grid_serial(const FockVector& v, const Vec& xs, const Vec& ps);

} // namespace ngopt
