#include "ngopt/gaussian_maps.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace ngopt {

namespace {

// (a; a^dag) = V (x; p) per mode
CMat ladder_basis(int modes) {
    CMat v = CMat::Zero(2 * modes, 2 * modes);
    for (int m = 0; m < modes; ++m) {
        v(2 * m, 2 * m) = 0.5;
        v(2 * m, 2 * m + 1) = cplx(0, 0.5);
        v(2 * m + 1, 2 * m) = 0.5;
        v(2 * m + 1, 2 * m + 1) = cplx(0, -0.5);
    }
    return v;
}

CMat ladder_from_xp(const CMat& s_xp) {
    const int m = static_cast<int>(s_xp.rows()) / 2;
    CMat v = ladder_basis(m);
    return v * s_xp * v.inverse();
}

CMat xp_from_ladder(const CMat& s_lad) {
    const int m = static_cast<int>(s_lad.rows()) / 2;
    CMat v = ladder_basis(m);
    return v.inverse() * s_lad * v;
}

Mat real_part_checked(const CMat& m, double tol, const char* what) {
    if (m.imag().cwiseAbs().maxCoeff() > tol)
        throw std::domain_error(std::string("non-decomposable S-matrix: ") + what);
    return m.real();
}

} // namespace

FilterMatrixRep FilterMatrixRep::identity(int modes) {
    FilterMatrixRep f;
    f.s_matrix = CMat::Identity(2 * modes, 2 * modes);
    f.b = CVec::Zero(2 * modes);
    return f;
}

FilterMatrixRep FilterMatrixRep::damping(double lambda) {
    FilterMatrixRep f;
    f.s_matrix = CMat::Zero(2, 2);
    f.s_matrix(0, 0) = std::exp(lambda);
    f.s_matrix(1, 1) = std::exp(-lambda);
    f.b = CVec::Zero(2);
    return f;
}

FilterMatrixRep FilterMatrixRep::unitary(const GaussianUnitary& u) {
    // U q U^{-1} = S^{-1}(q - d)
    const Mat si = u.symplectic.inverse();
    const Vec sh = -si * u.displacement;
    FilterMatrixRep f;
    f.s_matrix = ladder_from_xp(si.cast<cplx>());
    CVec shc(sh.size());
    for (int i = 0; i < sh.size(); ++i) shc(i) = sh(i);
    f.b = ladder_basis(u.modes()) * shc;
    return f;
}

FilterMatrixRep FilterMatrixRep::exp_x2(double kappa) {
    // p -> p - 4 i kappa x
    CMat s_xp(2, 2);
    s_xp << 1, 0, cplx(0, -4.0 * kappa), 1;
    FilterMatrixRep f;
    f.s_matrix = ladder_from_xp(s_xp);
    f.b = CVec::Zero(2);
    return f;
}

FilterMatrixRep FilterMatrixRep::exp_x(cplx c) {
    // p -> p + 2 i c
    FilterMatrixRep f;
    f.s_matrix = CMat::Identity(2, 2);
    CVec b_xp(2);
    b_xp << 0, cplx(0, 2.0) * c;
    f.b = ladder_basis(1) * b_xp;
    return f;
}

FilterMatrixRep FilterMatrixRep::exp_p(cplx c) {
    // x -> x - 2 i c
    FilterMatrixRep f;
    f.s_matrix = CMat::Identity(2, 2);
    CVec b_xp(2);
    b_xp << cplx(0, -2.0) * c, 0;
    f.b = ladder_basis(1) * b_xp;
    return f;
}

FilterMatrixRep FilterMatrixRep::inverse() const {
    FilterMatrixRep f;
    f.s_matrix = s_matrix.inverse();
    f.b = -f.s_matrix * b;
    return f;
}

FilterMatrixRep FilterMatrixRep::transpose() const {
    // In the xp picture rep(F^T) = (Z S^{-1} Z, -Z S^{-1} b).
    const int m = modes();
    const CMat z = zmat(m).cast<cplx>();
    const CMat v = ladder_basis(m);
    const CMat s_xp = v.inverse() * s_matrix * v;
    const CVec b_xp = v.inverse() * b;
    const CMat si = s_xp.inverse();
    FilterMatrixRep f;
    f.s_matrix = v * (z * si * z) * v.inverse();
    f.b = v * (-z * si * b_xp);
    return f;
}

FilterMatrixRep compose_filters(const FilterMatrixRep& f1, const FilterMatrixRep& f2) {
    // rep(F2 F1) = (S1 S2, S1 b2 + b1)
    FilterMatrixRep f;
    f.s_matrix = f1.s_matrix * f2.s_matrix;
    f.b = f1.s_matrix * f2.b + f1.b;
    return f;
}

GaussianCPMap GaussianCPMap::identity_map(int modes) {
    GaussianCPMap m;
    m.kind = Kind::identity;
    m.in_modes = m.out_modes = modes;
    return m;
}

GaussianCPMap GaussianCPMap::unitary_map(const GaussianUnitary& u) {
    GaussianCPMap m;
    m.kind = Kind::unitary;
    m.in_modes = m.out_modes = u.modes();
    m.u = u;
    return m;
}

GaussianCPMap damping_choi(const std::vector<double>& t) {
    const int k = static_cast<int>(t.size());
    bool all_inf = true;
    for (double tm : t) all_inf = all_inf && std::isinf(tm);
    if (all_inf) return GaussianCPMap::identity_map(k);

    GaussianCPMap m;
    m.in_modes = m.out_modes = k;
    m.choi_cov = Mat::Zero(4 * k, 4 * k);
    m.choi_mean = Vec::Zero(4 * k);
    bool unphys = false;
    for (int i = 0; i < k; ++i) {
        const double tm = t[i];
        if (std::isinf(tm))
            throw std::invalid_argument("damping_choi: mixed finite/infinite t unsupported");
        if (std::abs(tm) <= 1.0)
            throw std::invalid_argument("damping_choi: |t| must exceed 1");
        if (tm < 0) unphys = true;
        // off-diagonal block is 1/sinh(lambda) Z, negative for t < -1
        const double c = (tm > 0 ? 1.0 : -1.0) * std::sqrt(tm * tm - 1.0);
        for (int q = 0; q < 2; ++q) {
            const int io = 2 * i + q, ii = 2 * k + 2 * i + q;
            m.choi_cov(io, io) = tm;
            m.choi_cov(ii, ii) = tm;
            const double sz = (q == 0) ? c : -c;
            m.choi_cov(io, ii) = sz;
            m.choi_cov(ii, io) = sz;
        }
    }
    m.unphysical = unphys;
    return m;
}

GaussianCPMap vacuum_projection_choi() {
    GaussianCPMap m;
    m.in_modes = 1;
    m.out_modes = 0;
    m.choi_cov = Mat::Identity(2, 2);
    m.choi_mean = Vec::Zero(2);
    return m;
}

GaussianCPMap filter_to_choi(const FilterMatrixRep& f) {
    if (f.modes() != 1)
        throw std::invalid_argument("filter_to_choi: single-mode filters only");
    const CMat& s = f.s_matrix;
    const cplx det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
    if (std::abs(det - cplx(1, 0)) > 1e-8)
        throw std::domain_error("non-decomposable S-matrix: determinant != 1");

    const CMat eta = (Mat(2, 2) << 1, 0, 0, -1).finished().cast<cplx>();
    const CMat w = eta * s.adjoint() * eta * s;

    // Bogoliubov test: unitary filter (possibly with complex shift rejected below)
    const bool bogo = std::abs(s(1, 0) - std::conj(s(0, 1))) < 1e-10 &&
                      std::abs(s(1, 1) - std::conj(s(0, 0))) < 1e-10;
    if (bogo && (w - CMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10) {
        const Mat s_xp = real_part_checked(xp_from_ladder(s), 1e-9, "unitary part not real");
        const CMat v = ladder_basis(1);
        const CVec b_xp = v.inverse() * f.b;
        if (b_xp.imag().cwiseAbs().maxCoeff() > 1e-9)
            throw std::domain_error("non-decomposable S-matrix: unitary filter with complex shift");
        // rep (S_r, b_r) -> unitary with S = S_r^{-1}, d = -S_r^{-1} b_r... rep(U).S = S^{-1}
        const Mat s_state = s_xp.inverse();
        const Vec d_state = -s_state * b_xp.real();
        return GaussianCPMap::unitary_map(GaussianUnitary(s_state, d_state));
    }

    Eigen::ComplexEigenSolver<CMat> es(w);
    if (es.info() != Eigen::Success)
        throw std::domain_error("non-decomposable S-matrix: eigensolver failure");

    // pick the eigenvalue/eigenvector pair that yields a Bogoliubov column
    int pick = -1;
    double lambda = 0.0;
    CVec col;
    for (int i = 0; i < 2 && pick < 0; ++i) {
        const cplx wv = es.eigenvalues()(i);
        if (std::abs(wv.imag()) > 1e-8 * std::max(1.0, std::abs(wv)) || wv.real() <= 0) continue;
        CVec v = es.eigenvectors().col(i);
        const double norm2 = std::norm(v(0)) - std::norm(v(1));
        if (norm2 <= 1e-12) continue;
        col = v / std::sqrt(norm2);
        lambda = 0.5 * std::log(wv.real());
        pick = i;
    }
    if (pick < 0) {
        // elliptic (or borderline) conjugacy class: no real damping normal
        // form exists; keep the operator rep and apply via annihilators
        GaussianCPMap out;
        out.kind = GaussianCPMap::Kind::filter;
        out.in_modes = out.out_modes = 1;
        out.rep = f;
        out.unphysical = true;
        return out;
    }

    // A_R^{-1} = [[g, conj(h)], [h, conj(g)]] with (g,h) the scaled eigenvector
    CMat ar_inv(2, 2);
    ar_inv << col(0), std::conj(col(1)), col(1), std::conj(col(0));
    CMat ar = eta * ar_inv.adjoint() * eta;
    CMat lam = CMat::Zero(2, 2);
    lam(0, 0) = std::exp(lambda);
    lam(1, 1) = std::exp(-lambda);
    CMat al = s * ar_inv * lam.inverse();
    if ((al.adjoint() * eta * al - eta).cwiseAbs().maxCoeff() > 1e-7)
        throw std::domain_error("non-decomposable S-matrix: left factor not Bogoliubov");

    // rep-matrix factorization S_xp = M_L Lam_xp M_R  (M_L = rep of the unitary
    // applied first, M_R = rep of the unitary applied last).
    const Mat m_l = real_part_checked(xp_from_ladder(al), 1e-7, "left factor not real");
    const Mat m_r = real_part_checked(xp_from_ladder(ar), 1e-7, "right factor not real");
    CMat lam_xp = xp_from_ladder(lam);

    // distribute the shift: b_xp = M_L Lam b_last + b_first, b_* real
    const CMat v = ladder_basis(1);
    const CVec b_xp = v.inverse() * f.b;
    const CMat mll = m_l.cast<cplx>() * lam_xp;
    Eigen::Matrix4d sys;
    sys << mll.real(), Mat::Identity(2, 2), mll.imag(), Mat::Zero(2, 2);
    Eigen::Vector4d rhs;
    rhs << b_xp(0).real(), b_xp(1).real(), b_xp(0).imag(), b_xp(1).imag();
    Eigen::FullPivLU<Eigen::Matrix4d> lu(sys);
    if (!lu.isInvertible())
        throw std::domain_error("non-decomposable S-matrix: shift system singular");
    Eigen::Vector4d sol = lu.solve(rhs);
    const Vec b_last = sol.head<2>();
    const Vec b_first = sol.tail<2>();

    // Choi state of F = U_last Gamma(lambda) U_first:
    //   out arm: state action of U_last (S = M_R^{-1}, d = -M_R^{-1} b_last)
    //   in arm:  state action of U_first^T (S = Z M_L Z, d = Z b_first)
    const double t = 1.0 / std::tanh(lambda);
    GaussianCPMap base = damping_choi({t});
    const Mat z = zmat(1);
    Mat big = Mat::Zero(4, 4);
    big.topLeftCorner(2, 2) = m_r.inverse();
    big.bottomRightCorner(2, 2) = z * m_l * z;
    GaussianCPMap out;
    out.in_modes = out.out_modes = 1;
    out.choi_cov = big * base.choi_cov * big.transpose();
    out.choi_cov = 0.5 * (out.choi_cov + out.choi_cov.transpose()).eval();
    out.choi_mean = Vec::Zero(4);
    out.choi_mean.head<2>() = -m_r.inverse() * b_last;
    out.choi_mean.tail<2>() = z * b_first;
    out.unphysical = min_eig_uncertainty(out.choi_cov) < -1e-10;
    return out;
}

namespace {

// Apply a Gaussian-filter operator to a pure Gaussian state through its
// annihilators.  Each annihilator a_i = l_i (q - gamma) maps to
// F a_i F^{-1} = l_i' q + c_i'; the output moments are reconstructed from the
// transformed annihilator set.  Mixed inputs are purified first.
std::pair<Mat, Vec> apply_filter_op(const Mat& cov, const Vec& mean, const GaussianCPMap& map,
                                    const std::vector<int>& target_modes) {
    const int n = static_cast<int>(mean.size()) / 2;
    Mat so = cov * omega(n);
    const bool pure =
        (so * so + Mat::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff() < 1e-6;
    if (!pure) {
        int extra = 0;
        GaussianPure pur = canonical_purification(cov, mean, &extra);
        std::vector<int> shifted(target_modes);
        for (int& t : shifted) t += extra;
        auto [c2, m2] = apply_filter_op(pur.cov, pur.mean, map, shifted);
        return {c2.bottomRightCorner(2 * n, 2 * n), m2.tail(2 * n)};
    }

    WilliamsonResult wl = williamson(cov);
    // pure state: cov = S S^T; annihilators are the transformed mode operators
    Mat s_inv = wl.symplectic.inverse();
    CMat vbasis = CMat::Zero(2 * n, 2 * n);
    for (int m = 0; m < n; ++m) {
        vbasis(2 * m, 2 * m) = 0.5;
        vbasis(2 * m, 2 * m + 1) = cplx(0, 0.5);
        vbasis(2 * m + 1, 2 * m) = 0.5;
        vbasis(2 * m + 1, 2 * m + 1) = cplx(0, -0.5);
    }
    CMat rows_full = vbasis * s_inv.cast<cplx>();
    CMat l(n, 2 * n);
    for (int i = 0; i < n; ++i) l.row(i) = rows_full.row(2 * i); // annihilation rows
    CVec c = -(l * mean.cast<cplx>());

    // transform the target-mode columns by the filter's xp action
    const int kf = map.rep.modes();
    CMat vf = CMat::Zero(2 * kf, 2 * kf);
    for (int m = 0; m < kf; ++m) {
        vf(2 * m, 2 * m) = 0.5;
        vf(2 * m, 2 * m + 1) = cplx(0, 0.5);
        vf(2 * m + 1, 2 * m) = 0.5;
        vf(2 * m + 1, 2 * m + 1) = cplx(0, -0.5);
    }
    CMat s_xp = vf.inverse() * map.rep.s_matrix * vf;
    CVec b_xp = vf.inverse() * map.rep.b;

    CMat lt(n, 2 * kf);
    for (int a = 0; a < kf; ++a)
        for (int i = 0; i < n; ++i) lt.block<1, 2>(i, 2 * a) = l.block<1, 2>(i, 2 * target_modes[a]);
    CMat lt_new = lt * s_xp;
    c += lt * b_xp;
    for (int a = 0; a < kf; ++a)
        for (int i = 0; i < n; ++i) l.block<1, 2>(i, 2 * target_modes[a]) = lt_new.block<1, 2>(i, 2 * a);

    // reconstruct moments: stack annihilator and creation rows
    CMat big(2 * n, 2 * n);
    big.topRows(n) = l;
    big.bottomRows(n) = l.conjugate();
    CVec rhs(2 * n);
    rhs.head(n) = -c;
    rhs.tail(n) = -c.conjugate();
    Eigen::FullPivLU<CMat> lu(big);
    if (!lu.isInvertible())
        throw std::runtime_error("apply_map: singular pivot block (ill-posed filter)");
    CVec gamma = lu.solve(rhs);
    if (gamma.imag().cwiseAbs().maxCoeff() > 1e-7 * std::max(1.0, gamma.real().cwiseAbs().maxCoeff()))
        throw std::runtime_error("apply_map: filter produced a non-real mean");

    // Sigma [L^T, conj(L)^T] = [-i Omega L^T, +i Omega conj(L)^T]
    CMat om = omega(n).cast<cplx>();
    CMat cols(2 * n, 2 * n), rhsm(2 * n, 2 * n);
    cols.leftCols(n) = l.transpose();
    cols.rightCols(n) = l.adjoint();
    rhsm.leftCols(n) = cplx(0, -1) * om * l.transpose();
    rhsm.rightCols(n) = cplx(0, 1) * om * l.adjoint();
    CMat sigma = rhsm * cols.inverse();
    if (sigma.imag().cwiseAbs().maxCoeff() > 1e-6 * std::max(1.0, sigma.real().cwiseAbs().maxCoeff()))
        throw std::runtime_error("apply_map: filter produced a non-real covariance");
    Mat sig = sigma.real();
    return {0.5 * (sig + sig.transpose()), gamma.real()};
}

} // namespace

std::pair<Mat, Vec> apply_map(const Mat& cov, const Vec& mean, const GaussianCPMap& map,
                              const std::vector<int>& target_modes) {
    const int n = static_cast<int>(mean.size()) / 2;
    const int k = map.in_modes, j = map.out_modes;
    if (static_cast<int>(target_modes.size()) != k)
        throw std::invalid_argument("apply_map: target mode count mismatch");

    if (map.kind == GaussianCPMap::Kind::identity) return {cov, mean};
    if (map.kind == GaussianCPMap::Kind::unitary) {
        Mat s = Mat::Identity(2 * n, 2 * n);
        Vec d = Vec::Zero(2 * n);
        for (int a = 0; a < k; ++a) {
            d.segment<2>(2 * target_modes[a]) = map.u.displacement.segment<2>(2 * a);
            for (int b = 0; b < k; ++b)
                s.block<2, 2>(2 * target_modes[a], 2 * target_modes[b]) =
                    map.u.symplectic.block<2, 2>(2 * a, 2 * b);
        }
        return {s * cov * s.transpose(), s * mean + d};
    }
    if (map.kind == GaussianCPMap::Kind::filter) return apply_filter_op(cov, mean, map, target_modes);

    // partition into target ("m") and rest blocks
    std::vector<int> rest;
    std::vector<bool> is_target(n, false);
    for (int t : target_modes) is_target[t] = true;
    for (int m = 0; m < n; ++m)
        if (!is_target[m]) rest.push_back(m);
    const int nr = static_cast<int>(rest.size());

    auto blk = [&](const std::vector<int>& rows, const std::vector<int>& cols) {
        Mat out(2 * rows.size(), 2 * cols.size());
        for (size_t a = 0; a < rows.size(); ++a)
            for (size_t b = 0; b < cols.size(); ++b)
                out.block<2, 2>(2 * a, 2 * b) = cov.block<2, 2>(2 * rows[a], 2 * cols[b]);
        return out;
    };
    std::vector<int> tvec(target_modes);
    Mat a_m = blk(tvec, tvec);
    Mat b_rt = blk(rest, tvec); // rest x target
    Mat c_r = blk(rest, rest);
    Vec alpha(2 * k), beta_r(2 * nr);
    for (int i = 0; i < k; ++i) alpha.segment<2>(2 * i) = mean.segment<2>(2 * tvec[i]);
    for (int i = 0; i < nr; ++i) beta_r.segment<2>(2 * i) = mean.segment<2>(2 * rest[i]);

    const Mat jb = map.choi_cov.topLeftCorner(2 * j, 2 * j);
    const Mat lb = map.choi_cov.bottomLeftCorner(2 * k, 2 * j);
    const Mat kb = map.choi_cov.bottomRightCorner(2 * k, 2 * k);
    const Vec eps = map.choi_mean.head(2 * j);
    const Vec del = map.choi_mean.tail(2 * k);
    const Mat z = zmat(k);

    Mat piv = a_m + z * kb * z;
    Eigen::JacobiSVD<Mat> svd(piv, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double cond = svd.singularValues()(0) / svd.singularValues().tail(1)(0);
    if (!(cond < 1e12))
        throw std::runtime_error("apply_map: singular pivot block (ill-posed filter)");
    Mat piv_inv = svd.solve(Mat::Identity(2 * k, 2 * k));

    const Vec shifted = alpha - z * del;
    Mat a_new = jb - lb.transpose() * z * piv_inv * z * lb;
    Mat b_new = b_rt * piv_inv * z * lb; // rest x out
    Mat c_new = c_r - b_rt * piv_inv * b_rt.transpose();
    Vec alpha_new = eps + lb.transpose() * z * piv_inv * shifted;
    Vec beta_new = beta_r - b_rt * piv_inv * shifted;

    // reassemble: out mode i takes target_modes[i]'s slot when j==k; targets
    // disappear when j==0 and the rest close ranks
    const int n_out = nr + j;
    Mat cov_out = Mat::Zero(2 * n_out, 2 * n_out);
    Vec mean_out = Vec::Zero(2 * n_out);
    std::vector<int> slot_rest(nr), slot_out(j);
    if (j == k) {
        for (int i = 0; i < j; ++i) slot_out[i] = tvec[i];
        slot_rest = rest;
    } else if (j == 0) {
        for (int i = 0; i < nr; ++i) slot_rest[i] = i;
    } else {
        throw std::invalid_argument("apply_map: only j == k or j == 0 supported");
    }

    auto put = [&](int slot_a, int slot_b, const Mat& m22) {
        cov_out.block<2, 2>(2 * slot_a, 2 * slot_b) = m22;
    };
    for (int a = 0; a < j; ++a) {
        mean_out.segment<2>(2 * slot_out[a]) = alpha_new.segment<2>(2 * a);
        for (int b = 0; b < j; ++b) put(slot_out[a], slot_out[b], a_new.block<2, 2>(2 * a, 2 * b));
        for (int b = 0; b < nr; ++b) {
            put(slot_rest[b], slot_out[a], b_new.block<2, 2>(2 * b, 2 * a));
            put(slot_out[a], slot_rest[b], b_new.block<2, 2>(2 * b, 2 * a).transpose());
        }
    }
    for (int a = 0; a < nr; ++a) {
        mean_out.segment<2>(2 * slot_rest[a]) = beta_new.segment<2>(2 * a);
        for (int b = 0; b < nr; ++b) put(slot_rest[a], slot_rest[b], c_new.block<2, 2>(2 * a, 2 * b));
    }
    cov_out = 0.5 * (cov_out + cov_out.transpose()).eval();
    return {cov_out, mean_out};
}

std::pair<Mat, Vec> apply_map(const GaussianPure& g, const GaussianCPMap& map,
                              const std::vector<int>& target_modes) {
    return apply_map(g.cov, g.mean, map, target_modes);
}

} // namespace ngopt
