#include "ngopt/control.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace ngopt {

ControlMoments::ControlMoments(Mat c_, Vec beta_) : c(std::move(c_)), beta(std::move(beta_)) {
    if (c.rows() != c.cols() || c.rows() != beta.size() || c.rows() % 2 != 0)
        throw std::invalid_argument("ControlMoments: dimension mismatch");
    if (!is_symmetric(c, 1e-9))
        throw std::invalid_argument("ControlMoments: C not symmetric");
    if (min_eig_uncertainty(c) < -1e-9)
        throw std::invalid_argument("ControlMoments: uncertainty relation violated");
}

ControlMoments ControlMoments::from_state(const GaussianPure& g, int signal_modes) {
    const int k = g.modes - signal_modes;
    ControlMoments m;
    m.c = g.cov.bottomRightCorner(2 * k, 2 * k);
    m.beta = g.mean.tail(2 * k);
    return m;
}

namespace {

cplx delta0_in_frame(double cc, double d, const Vec2& bb) {
    const double root = std::sqrt(cc * d - 1.0);
    return 2.0 / root *
           cplx(std::sqrt((d + 1.0) / (cc + 1.0)) * bb(0),
                -std::sqrt((cc + 1.0) / (d + 1.0)) * bb(1));
}

} // namespace

void control_eigenframe(const Mat2& c, const Vec2& beta, Mat2& o, double& cmax, double& dmin) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(c);
    dmin = es.eigenvalues()(0);
    cmax = es.eigenvalues()(1);
    if (cmax - dmin < 1e-12 * std::max(1.0, std::abs(cmax))) {
        o.setIdentity(); // isotropic block: keep the natural frame
    } else {
        o.row(0) = es.eigenvectors().col(1).transpose();
        o.row(1) = es.eigenvectors().col(0).transpose();
        if (o.determinant() < 0) o.row(1) *= -1.0;
    }
    if (cmax * dmin - 1.0 <= 1e-12) return;
    const cplx d0 = delta0_in_frame(cmax, dmin, o * beta);
    const double re = d0.real(), im = d0.imag();
    if (re < -1e-13 || (std::abs(re) <= 1e-13 && im < -1e-13)) o = -o;
}

SingleModeParams control_params_single(const Mat2& c, const Vec2& beta) {
    Mat2 o;
    double cc, d;
    control_eigenframe(c, beta, o, cc, d);

    SingleModeParams p;
    const double cd1 = cc * d - 1.0;
    if (cd1 <= 1e-12) {
        p.defined = false;
        return p;
    }
    p.s0 = (cc - d) / cd1;
    p.delta0 = delta0_in_frame(cc, d, o * beta);
    return p;
}

ControlParams control_params_multi(const ControlMoments& m) {
    ControlParams out;
    for (int i = 0; i < m.k(); ++i)
        out.mode.push_back(control_params_single(m.mode_block(i), m.mode_mean(i)));
    return out;
}

SingleModeParams invariant_control_params(const GaussianPure& g, int signal_modes, int mode) {
    const int k = g.modes - signal_modes;
    if (mode < 0 || mode >= k) throw std::invalid_argument("invariant_control_params: bad mode");
    Mat cov = g.cov;
    Vec mean = g.mean;
    GaussianCPMap vac = vacuum_projection_choi();
    // project other control modes, highest index first so positions stay valid
    for (int m = k - 1; m >= 0; --m) {
        if (m == mode) continue;
        auto [c2, m2] = apply_map(cov, mean, vac, {signal_modes + m});
        cov = std::move(c2);
        mean = std::move(m2);
    }
    const int last = static_cast<int>(mean.size()) / 2 - 1;
    return control_params_single(cov.block<2, 2>(2 * last, 2 * last), mean.segment<2>(2 * last));
}

ControlMoments rotation_transform(const ControlMoments& m, const std::vector<double>& thetas) {
    const int k = m.k();
    if (static_cast<int>(thetas.size()) != k)
        throw std::invalid_argument("rotation_transform: angle count mismatch");
    Mat o = Mat::Zero(2 * k, 2 * k);
    for (int i = 0; i < k; ++i) {
        const double ct = std::cos(thetas[i]), st = std::sin(thetas[i]);
        o(2 * i, 2 * i) = ct;
        o(2 * i, 2 * i + 1) = st;
        o(2 * i + 1, 2 * i) = -st;
        o(2 * i + 1, 2 * i + 1) = ct;
    }
    ControlMoments out;
    out.c = o * m.c * o.transpose();
    out.c = 0.5 * (out.c + out.c.transpose()).eval();
    out.beta = o * m.beta;
    return out;
}

ControlMoments damping_transform(const ControlMoments& m, const std::vector<double>& t) {
    const int k = m.k();
    if (static_cast<int>(t.size()) != k)
        throw std::invalid_argument("damping_transform: t count mismatch");
    std::vector<int> finite;
    std::vector<double> tf;
    for (int i = 0; i < k; ++i)
        if (!std::isinf(t[i])) {
            finite.push_back(i);
            tf.push_back(t[i]);
        }
    if (finite.empty()) return m;
    if (!damping_domain_check(m.c, t))
        throw std::domain_error("damping_transform: t outside the admissible domain");
    auto [c2, b2] = apply_map(m.c, m.beta, damping_choi(tf), finite);
    ControlMoments out;
    out.c = std::move(c2);
    out.beta = std::move(b2);
    return out;
}

bool damping_domain_check(const Mat& c, const std::vector<double>& t) {
    const int k = static_cast<int>(c.rows()) / 2;
    if (static_cast<int>(t.size()) != k) return false;
    std::vector<int> finite;
    std::vector<double> tf;
    for (int i = 0; i < k; ++i) {
        if (std::isinf(t[i])) continue;
        if (std::abs(t[i]) <= 1.0) return false;
        finite.push_back(i);
        tf.push_back(t[i]);
    }
    if (finite.empty()) return true;
    try {
        Vec beta = Vec::Zero(2 * k);
        auto [c2, b2] = apply_map(c, beta, damping_choi(tf), finite);
        (void)b2;
        Eigen::SelfAdjointEigenSolver<Mat> es(c2, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff() > 0.0;
    } catch (const std::exception&) {
        return false;
    }
}

RegimeReport classify(double s0, cplx delta0, int n) {
    constexpr double tol = 1e-9;
    RegimeReport r;
    if (std::abs(s0 - 1.0) <= tol)
        r.regime = Regime::critical;
    else if (s0 > 1.0)
        r.regime = Regime::subtracted;
    else
        r.regime = Regime::added;

    const double d0 = std::abs(delta0);
    if (d0 <= tol && s0 >= 1.0 - tol) {
        r.cat_parity = (n % 2 == 0) ? 1 : -1;
        r.cat_amplitude = std::sqrt((n + 0.5) / s0);
    }
    if (s0 <= tol && d0 > tol) {
        r.cps_p0 = 2.0 * std::sqrt(n + 0.5);
        r.cps_gamma = 1.0 / (24.0 * std::sqrt(n + 0.5));
    }
    r.fock_state = (s0 <= tol && d0 <= tol);
    return r;
}

bool convertible(const ControlMoments& from, const ControlMoments& to) {
    if (from.k() != to.k()) throw std::invalid_argument("convertible: mode count mismatch");
    Mat diff = from.c - to.c;
    Eigen::SelfAdjointEigenSolver<Mat> es(diff, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9) return false;
    Vec db = from.beta - to.beta;
    const double scale = std::max(1.0, db.norm());
    Eigen::BDCSVD<Mat> svd(diff, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    Vec x = svd.solve(db);
    return (diff * x - db).norm() < 1e-8 * scale;
}

bool convertible_params(double s0, cplx delta0, double s0_to, cplx delta0_to, int n) {
    (void)delta0_to;
    if (n < 2) throw std::invalid_argument("convertible_params: requires n >= 2");
    constexpr double tol = 1e-9;
    if (s0 >= 0.0 && s0 < 1.0 - tol) return true;
    if (s0_to > s0 + tol) return true;
    if (std::abs(s0 - 1.0) <= tol && std::abs(s0_to - 1.0) <= tol &&
        std::abs(delta0.real()) <= tol)
        return true;
    return false;
}

void GeneratorSpec::check_valid() const {
    if (static_cast<int>(photons.size()) != moments.k())
        throw std::invalid_argument("GeneratorSpec: photon pattern length mismatch");
    for (int n : photons)
        if (n < 0) throw std::invalid_argument("GeneratorSpec: negative photon count");
}

} // namespace ngopt
