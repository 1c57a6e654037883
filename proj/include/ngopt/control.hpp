#pragma once

#include "ngopt/gaussian_maps.hpp"

#include <optional>
#include <vector>

namespace ngopt {

/// Control-block moments (C, beta) of k measured modes.
struct ControlMoments {
    Mat c;
    Vec beta;

    ControlMoments() = default;
    ControlMoments(Mat c_, Vec beta_);
    int k() const { return static_cast<int>(beta.size()) / 2; }
    Mat2 mode_block(int m) const { return c.block<2, 2>(2 * m, 2 * m); }
    Vec2 mode_mean(int m) const { return beta.segment<2>(2 * m); }

    static ControlMoments from_state(const GaussianPure& g, int signal_modes);
};

struct SingleModeParams {
    double s0 = 0.0;
    cplx delta0{0.0, 0.0};
    bool defined = true;
};

/// Per-mode non-Gaussian control parameters.
struct ControlParams {
    std::vector<SingleModeParams> mode;
};

/// Eigenframe shared by control_params_single and the reduction filter:
/// C = O^T diag(c,d) O with c >= d and O in SO(2); the sign of O is fixed so
/// the delta0 evaluated in this frame is canonical (first nonzero of
/// (Re delta0, Im delta0) nonnegative).  Isotropic blocks keep O = I.
void control_eigenframe(const Mat2& c, const Vec2& beta, Mat2& o, double& cmax, double& dmin);

/// Diagonalize C = O^T diag(c,d) O with c >= d, O in SO(2), and evaluate
///   s0 = (c-d)/(cd-1),
///   delta0 = 2/sqrt(cd-1) (sqrt((d+1)/(c+1)) bx - i sqrt((c+1)/(d+1)) bp),
/// with (bx,bp) = O beta.  delta0's overall sign is canonicalized so its
/// first nonzero component of (Re, Im) is nonnegative.  For cd = 1 the
/// parameters are undefined and `defined` is false.
SingleModeParams control_params_single(const Mat2& c, const Vec2& beta);

ControlParams control_params_multi(const ControlMoments& m);

/// Invariant parameters of control mode m: all other control modes are
/// projected onto vacuum first (Gaussian conditioning), then the single-mode
/// parameters of the residual block are taken.
SingleModeParams invariant_control_params(const GaussianPure& g, int signal_modes, int mode);

/// Per-mode SO(2) rotations of the control moments; output state invariant.
ControlMoments rotation_transform(const ControlMoments& m, const std::vector<double>& thetas);

/// Damping transformation D_t; modes with t = +infinity are untouched.
/// (C', b') = (T - sqrt(T^2-1)(C+T)^{-1} sqrt(T^2-1), sqrt(T^2-1)(C+T)^{-1} b).
ControlMoments damping_transform(const ControlMoments& m, const std::vector<double>& t);

/// True iff |t_m| > 1 for all m and D_t(C) is positive definite.
bool damping_domain_check(const Mat& c, const std::vector<double>& t);

enum class Regime { subtracted, added, critical };

struct RegimeReport {
    Regime regime = Regime::added;
    bool fock_state = false;
    std::optional<int> cat_parity;       // sgn((-1)^n) when delta0 = 0, s0 >= 1
    std::optional<double> cat_amplitude; // sqrt((n+1/2)/s0)
    std::optional<double> cps_p0;        // 2 sqrt(n+1/2) when s0 = 0, |delta0| > 0
    std::optional<double> cps_gamma;     // 1/(24 sqrt(n+1/2))
};

RegimeReport classify(double s0, cplx delta0, int n);

/// Thm on Gaussian-map convertibility of control moments:
/// (C,b) -> (C',b') possible iff C' <= C and b - b' lies in Im(C - C').
bool convertible(const ControlMoments& from, const ControlMoments& to);

/// Parameter form (n >= 2): true iff 0 <= s0 < 1, or s0' > s0, or
/// s0 = s0' = 1 with Re(delta0) = 0.
bool convertible_params(double s0, cplx delta0, double s0_to, cplx delta0_to, int n);

/// A state generator: control moments, photon pattern, and the Gaussian
/// unitary on the signal side (identity unless tracked).
struct GeneratorSpec {
    ControlMoments moments;
    std::vector<int> photons;
    GaussianUnitary signal_unitary;
    int signal_modes = 1;

    void check_valid() const;
};

} // namespace ngopt
