#pragma once

#include "ngopt/symplectic.hpp"

#include <utility>
#include <vector>

namespace ngopt {

/// Matrix representation of a Gaussian filter: F a F^{-1} = S a + b on the
/// ladder-operator vector (a_1, a_1^dag, ..., a_k, a_k^dag).  S is complex
/// symplectic; for non-unitary filters it is not a Bogoliubov matrix.
struct FilterMatrixRep {
    CMat s_matrix;
    CVec b;

    int modes() const { return static_cast<int>(b.size()) / 2; }

    static FilterMatrixRep identity(int modes = 1);
    /// exp(-lambda n): a -> e^lambda a, a^dag -> e^{-lambda} a^dag.
    static FilterMatrixRep damping(double lambda);
    /// Unitary U as a filter (from its symplectic/displacement data).
    static FilterMatrixRep unitary(const GaussianUnitary& u);
    /// exp(-kappa x^2) (single mode).
    static FilterMatrixRep exp_x2(double kappa);
    /// exp(c x) and exp(c p) (single mode, complex c).
    static FilterMatrixRep exp_x(cplx c);
    static FilterMatrixRep exp_p(cplx c);

    FilterMatrixRep inverse() const;
    FilterMatrixRep transpose() const; // Fock-basis transpose
};

/// f2 after f1 (the operator product f2 * f1).
FilterMatrixRep compose_filters(const FilterMatrixRep& f1, const FilterMatrixRep& f2);

/// Gaussian CP map between k input and j output modes, held as the Choi-state
/// moments with the output block first:
///   choi_cov = [[J, L^T], [L, K]],  choi_mean = (eps; delta).
/// Identity and unitary maps are held exactly (their Choi states are
/// singular); `unphysical` marks maps whose Choi state violates uncertainty,
/// which are legal here (negative damping) — only resulting states are
/// validated, by the caller.  Filters outside the damping class (elliptic
/// conjugacy class, where the Choi moments would be complex) are kept as
/// operator reps and applied through the annihilator algebra.
struct GaussianCPMap {
    enum class Kind { general, identity, unitary, filter };
    Kind kind = Kind::general;
    int in_modes = 0;
    int out_modes = 0;
    Mat choi_cov;
    Vec choi_mean;
    GaussianUnitary u;   // kind == unitary only
    FilterMatrixRep rep; // kind == filter only
    bool unphysical = false;

    static GaussianCPMap identity_map(int modes);
    static GaussianCPMap unitary_map(const GaussianUnitary& u);
};

/// Choi map of the damping operator exp(-sum_m lambda_m n_m), t_m = coth(lambda_m).
/// Requires |t_m| > 1 for every mode; use identity_map for t = infinity.
GaussianCPMap damping_choi(const std::vector<double>& t);

/// Choi map of projection onto the single-mode vacuum (1 -> 0 modes).
GaussianCPMap vacuum_projection_choi();

/// Decompose a single-mode filter as U1 Gamma(lambda) U2 and build its Choi
/// map.  Throws std::domain_error("non-decomposable...") when no such
/// decomposition exists.
GaussianCPMap filter_to_choi(const FilterMatrixRep& f);

/// Apply the map to the listed modes of a Gaussian moment pair (covariance,
/// mean).  Output modes replace the targets in place (j == k) or are removed
/// (j == 0).  Probability factors are not returned.
std::pair<Mat, Vec> apply_map(const Mat& cov, const Vec& mean, const GaussianCPMap& map,
                              const std::vector<int>& target_modes);

std::pair<Mat, Vec> apply_map(const GaussianPure& g, const GaussianCPMap& map,
                              const std::vector<int>& target_modes);

} // namespace ngopt
