#pragma once

#include "ngopt/linalg.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ngopt {

/// Pure Gaussian state of N modes in hbar=2 units (vacuum variance 1),
/// interleaved quadrature ordering (x1,p1,...,xN,pN).
struct GaussianPure {
    int modes = 0;
    Mat cov;
    Vec mean;

    GaussianPure() = default;
    GaussianPure(Mat sigma, Vec gamma);

    static GaussianPure vacuum(int modes);

    /// Eq.-(16) two-mode squeezed state: amplitudes (2*sqrt(a)/(a+1)) q^j with
    /// q = (a-1)/(a+1).  Covariance blocks nu*I and mu*Z with
    /// nu = (a^2+1)/(2a), mu = (a^2-1)/(2a).
    static GaussianPure tmss(double a);

    bool is_pure(double tol = kRoundTripTol) const;
    void check_valid() const; // throws std::invalid_argument on violation
};

/// Gaussian unitary: Heisenberg action U^dag q U = S q + d, equivalently the
/// state map  cov -> S cov S^T, mean -> S mean + d.
struct GaussianUnitary {
    Mat symplectic;
    Vec displacement;

    GaussianUnitary() = default;
    GaussianUnitary(Mat s, Vec d);

    static GaussianUnitary identity(int modes);
    /// Phase rotation by theta on one mode: (x,p) -> (cos t x + sin t p, ...).
    static GaussianUnitary rotation(double theta);
    /// Single-mode squeezer: x -> e^{-r} x, p -> e^{r} p.
    static GaussianUnitary squeezer(double r);
    /// Displacement by mean shift d (2-vector per mode).
    static GaussianUnitary displace(const Vec& d);
    /// Beamsplitter of reflectance R between two modes of an n-mode register:
    /// out_a = sqrt(1-R) a - sqrt(R) b, out_b = sqrt(R) a + sqrt(1-R) b.
    static GaussianUnitary beamsplitter(int modes, int mode_a, int mode_b, double reflectance);
    /// Embed a single-mode unitary into an n-mode register.
    static GaussianUnitary embed(const GaussianUnitary& u1, int modes, int mode);

    int modes() const { return static_cast<int>(displacement.size()) / 2; }
    GaussianUnitary then(const GaussianUnitary& next) const; // next ∘ this
    GaussianUnitary inverse() const;
    GaussianPure apply(const GaussianPure& g) const;
    bool is_symplectic(double tol = kSymTol) const;
};

struct WilliamsonResult {
    Mat symplectic;            // S with C = S D S^T
    Vec eigenvalues;           // nu_1 >= ... >= nu_k, one entry per mode
    Mat diagonal() const;      // D = diag(nu_1,nu_1,...,nu_k,nu_k)
};

/// True iff C + i Omega >= -1e-10 (uncertainty relation).
/// Throws on non-square or odd-dimension input.
bool check_uncertainty(const Mat& cov);

/// Williamson decomposition of a symmetric positive-definite 2k x 2k matrix.
/// Degenerate symplectic eigenvalues are resolved deterministically.
WilliamsonResult williamson(const Mat& cov);

struct CanonicalForm {
    std::vector<double> a;     // TMSS parameters, one per entangled pair
    GaussianUnitary u_signal;
    GaussianUnitary u_control;
    int schmidt_rank = 0;
};

/// Decompose a pure (l+k)-mode Gaussian state as
/// (U_s x U_c) applied to TMSS(a_1)...TMSS(a_r) pairs padded with vacua,
/// pair m occupying (signal mode m, control mode m).  U_c depends only on the
/// control-block moments.  a_m = nu_m + sqrt(nu_m^2-1) where nu_m are the
/// symplectic eigenvalues of the control block.
CanonicalForm canonical_form(const GaussianPure& g, int signal_modes, int control_modes);

/// Reconstruct the state from its canonical form (for round-trip checks and
/// building canonical purifications).
GaussianPure canonical_reconstruct(const CanonicalForm& cf, int signal_modes, int control_modes);

/// Minimal canonical purification of control moments (C, beta): r signal
/// modes paired with k control modes, control block exactly (C, beta).
GaussianPure canonical_purification(const Mat& c, const Vec& beta, int* signal_modes_out = nullptr);

/// Cayley transform Ct = (C+I)^{-1}(C-I), bt = (C+I)^{-1} b and its inverse.
void cayley(const Mat& c, const Vec& beta, Mat& ct, Vec& bt);
void inverse_cayley(const Mat& ct, const Vec& bt, Mat& c, Vec& beta);

/// Condition one mode on a homodyne x-measurement with the given outcome.
/// Returns the conditional state on the remaining modes.
GaussianPure condition_homodyne_x(const GaussianPure& g, int mode, double outcome);

/// Random generator construction: G = D(d) W S(r) V |0>, W and V Haar-random
/// symplectic-orthogonal, r uniform in [0,r_max] per mode, d uniform in
/// [0,d_max] per quadrature.  Deterministic for a fixed seed.
GaussianPure random_generator(int k_signal, int k_control, double r_max, double d_max,
                              std::uint64_t seed);

} // namespace ngopt
