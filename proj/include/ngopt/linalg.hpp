#pragma once

#include <Eigen/Dense>
#include <complex>

namespace ngopt {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;
using cplx = std::complex<double>;

inline constexpr double kSymTol = 1e-10;      // construction-level checks
inline constexpr double kRoundTripTol = 1e-8; // decomposition round trips

/// Symplectic form for n modes, interleaved ordering (x1,p1,...,xn,pn).
Mat omega(int modes);

/// diag(1,-1,1,-1,...) for n modes (phase-space conjugation).
Mat zmat(int modes);

/// Smallest eigenvalue of the Hermitian matrix M + i*Omega.
double min_eig_uncertainty(const Mat& m);

/// True iff M is symmetric within tol.
bool is_symmetric(const Mat& m, double tol = kSymTol);

/// Convert interleaved (x1,p1,...) <-> block (x1..xn,p1..pn) ordering.
Mat interleaved_from_block(const Mat& m);
Vec interleaved_from_block(const Vec& v);
Mat block_from_interleaved(const Mat& m);
Vec block_from_interleaved(const Vec& v);

} // namespace ngopt
