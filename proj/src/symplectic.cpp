#include "ngopt/symplectic.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace ngopt {

Mat omega(int modes) {
    Mat w = Mat::Zero(2 * modes, 2 * modes);
    for (int m = 0; m < modes; ++m) {
        w(2 * m, 2 * m + 1) = 1.0;
        w(2 * m + 1, 2 * m) = -1.0;
    }
    return w;
}

Mat zmat(int modes) {
    Vec d(2 * modes);
    for (int m = 0; m < modes; ++m) {
        d(2 * m) = 1.0;
        d(2 * m + 1) = -1.0;
    }
    return d.asDiagonal();
}

double min_eig_uncertainty(const Mat& m) {
    const int n = static_cast<int>(m.rows());
    CMat h = m.cast<cplx>() + cplx(0, 1) * omega(n / 2).cast<cplx>();
    Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool is_symmetric(const Mat& m, double tol) {
    return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

Mat interleaved_from_block(const Mat& m) {
    const int n = static_cast<int>(m.rows()) / 2;
    Mat p = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        p(2 * i, i) = 1.0;       // x_i comes from row i
        p(2 * i + 1, n + i) = 1.0; // p_i comes from row n+i
    }
    return p * m * p.transpose();
}

Vec interleaved_from_block(const Vec& v) {
    const int n = static_cast<int>(v.size()) / 2;
    Vec out(2 * n);
    for (int i = 0; i < n; ++i) {
        out(2 * i) = v(i);
        out(2 * i + 1) = v(n + i);
    }
    return out;
}

Mat block_from_interleaved(const Mat& m) {
    const int n = static_cast<int>(m.rows()) / 2;
    Mat p = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        p(i, 2 * i) = 1.0;
        p(n + i, 2 * i + 1) = 1.0;
    }
    return p * m * p.transpose();
}

Vec block_from_interleaved(const Vec& v) {
    const int n = static_cast<int>(v.size()) / 2;
    Vec out(2 * n);
    for (int i = 0; i < n; ++i) {
        out(i) = v(2 * i);
        out(n + i) = v(2 * i + 1);
    }
    return out;
}

GaussianPure::GaussianPure(Mat sigma, Vec gamma)
    : modes(static_cast<int>(gamma.size()) / 2), cov(std::move(sigma)), mean(std::move(gamma)) {
    check_valid();
}

GaussianPure GaussianPure::vacuum(int modes) {
    GaussianPure g;
    g.modes = modes;
    g.cov = Mat::Identity(2 * modes, 2 * modes);
    g.mean = Vec::Zero(2 * modes);
    return g;
}

GaussianPure GaussianPure::tmss(double a) {
    if (a <= 1.0) throw std::invalid_argument("tmss: parameter a must exceed 1");
    const double nu = (a * a + 1.0) / (2.0 * a);
    const double mu = (a * a - 1.0) / (2.0 * a);
    Mat sigma = Mat::Identity(4, 4) * nu;
    sigma(0, 2) = sigma(2, 0) = mu;
    sigma(1, 3) = sigma(3, 1) = -mu;
    return GaussianPure(sigma, Vec::Zero(4));
}

bool GaussianPure::is_pure(double tol) const {
    Mat so = cov * omega(modes);
    return (so * so + Mat::Identity(2 * modes, 2 * modes)).cwiseAbs().maxCoeff() <= tol;
}

void GaussianPure::check_valid() const {
    if (cov.rows() != 2 * modes || cov.cols() != 2 * modes || mean.size() != 2 * modes)
        throw std::invalid_argument("GaussianPure: dimension mismatch");
    if (!is_symmetric(cov))
        throw std::invalid_argument("GaussianPure: covariance not symmetric");
    if (min_eig_uncertainty(cov) < -kSymTol)
        throw std::invalid_argument("GaussianPure: uncertainty relation violated");
    if (!is_pure())
        throw std::invalid_argument("GaussianPure: state not pure");
}

GaussianUnitary::GaussianUnitary(Mat s, Vec d) : symplectic(std::move(s)), displacement(std::move(d)) {
    const int n = static_cast<int>(displacement.size()) / 2;
    Mat w = omega(n);
    if ((symplectic * w * symplectic.transpose() - w).cwiseAbs().maxCoeff() > kSymTol)
        throw std::invalid_argument("GaussianUnitary: matrix not symplectic");
}

GaussianUnitary GaussianUnitary::identity(int modes) {
    GaussianUnitary u;
    u.symplectic = Mat::Identity(2 * modes, 2 * modes);
    u.displacement = Vec::Zero(2 * modes);
    return u;
}

GaussianUnitary GaussianUnitary::rotation(double theta) {
    Mat s(2, 2);
    s << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
    return GaussianUnitary(s, Vec::Zero(2));
}

GaussianUnitary GaussianUnitary::squeezer(double r) {
    Mat s(2, 2);
    s << std::exp(-r), 0.0, 0.0, std::exp(r);
    return GaussianUnitary(s, Vec::Zero(2));
}

GaussianUnitary GaussianUnitary::displace(const Vec& d) {
    return GaussianUnitary(Mat::Identity(d.size(), d.size()), d);
}

GaussianUnitary GaussianUnitary::beamsplitter(int modes, int mode_a, int mode_b, double reflectance) {
    const double t = std::sqrt(1.0 - reflectance);
    const double r = std::sqrt(reflectance);
    Mat s = Mat::Identity(2 * modes, 2 * modes);
    for (int q = 0; q < 2; ++q) {
        const int ia = 2 * mode_a + q, ib = 2 * mode_b + q;
        s(ia, ia) = t;
        s(ia, ib) = -r;
        s(ib, ia) = r;
        s(ib, ib) = t;
    }
    return GaussianUnitary(s, Vec::Zero(2 * modes));
}

GaussianUnitary GaussianUnitary::embed(const GaussianUnitary& u1, int modes, int mode) {
    Mat s = Mat::Identity(2 * modes, 2 * modes);
    s.block<2, 2>(2 * mode, 2 * mode) = u1.symplectic;
    Vec d = Vec::Zero(2 * modes);
    d.segment<2>(2 * mode) = u1.displacement;
    return GaussianUnitary(std::move(s), std::move(d));
}

GaussianUnitary GaussianUnitary::then(const GaussianUnitary& next) const {
    return GaussianUnitary(next.symplectic * symplectic,
                           next.symplectic * displacement + next.displacement);
}

GaussianUnitary GaussianUnitary::inverse() const {
    Mat si = symplectic.inverse();
    return GaussianUnitary(si, -si * displacement);
}

GaussianPure GaussianUnitary::apply(const GaussianPure& g) const {
    GaussianPure out;
    out.modes = g.modes;
    out.cov = symplectic * g.cov * symplectic.transpose();
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    out.mean = symplectic * g.mean + displacement;
    return out;
}

bool GaussianUnitary::is_symplectic(double tol) const {
    const int n = modes();
    Mat w = omega(n);
    return (symplectic * w * symplectic.transpose() - w).cwiseAbs().maxCoeff() <= tol;
}

Mat WilliamsonResult::diagonal() const {
    const int k = static_cast<int>(eigenvalues.size());
    Vec d(2 * k);
    for (int m = 0; m < k; ++m) d.segment<2>(2 * m).setConstant(eigenvalues(m));
    return d.asDiagonal();
}

bool check_uncertainty(const Mat& cov) {
    if (cov.rows() != cov.cols() || cov.rows() % 2 != 0 || cov.rows() == 0)
        throw std::invalid_argument("check_uncertainty: need square even-dimension matrix");
    if (!is_symmetric(cov, 1e-9))
        throw std::invalid_argument("check_uncertainty: matrix not symmetric");
    return min_eig_uncertainty(cov) >= -1e-10;
}

WilliamsonResult williamson(const Mat& cov) {
    const int k = static_cast<int>(cov.rows()) / 2;
    Eigen::SelfAdjointEigenSolver<Mat> es(cov);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("williamson: matrix not positive definite");
    Mat root = es.operatorSqrt();

    CMat kmat = root.cast<cplx>() * (cplx(0, 1) * omega(k).cast<cplx>()) * root.cast<cplx>();
    Eigen::SelfAdjointEigenSolver<CMat> ks(kmat);

    // Positive half of the +/-nu spectrum, descending.
    std::vector<int> idx;
    for (int i = 0; i < 2 * k; ++i)
        if (ks.eigenvalues()(i) > 0) idx.push_back(i);
    if (static_cast<int>(idx.size()) != k)
        throw std::runtime_error("williamson: spectrum not paired");
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return ks.eigenvalues()(a) > ks.eigenvalues()(b); });

    WilliamsonResult res;
    res.eigenvalues.resize(k);
    res.symplectic.resize(2 * k, 2 * k);
    for (int m = 0; m < k; ++m) {
        const double nu = ks.eigenvalues()(idx[m]);
        res.eigenvalues(m) = nu;
        CVec u = ks.eigenvectors().col(idx[m]);
        // deterministic phase: largest component real positive
        int imax = 0;
        for (int i = 1; i < 2 * k; ++i)
            if (std::abs(u(i)) > std::abs(u(imax))) imax = i;
        u *= std::abs(u(imax)) / u(imax);
        CVec v = root.cast<cplx>() * u;
        res.symplectic.col(2 * m) = std::sqrt(2.0 / nu) * v.real();
        res.symplectic.col(2 * m + 1) = -std::sqrt(2.0 / nu) * v.imag();
    }
    return res;
}

namespace {

// Real symplectic-orthogonal matrix corresponding to a complex unitary acting
// on the mode operators, interleaved quadrature ordering.
Mat realify(const CMat& u) {
    const int n = static_cast<int>(u.rows());
    Mat o(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            o(2 * i, 2 * j) = u(i, j).real();
            o(2 * i, 2 * j + 1) = -u(i, j).imag();
            o(2 * i + 1, 2 * j) = u(i, j).imag();
            o(2 * i + 1, 2 * j + 1) = u(i, j).real();
        }
    return o;
}

Mat symplectic_inverse(const Mat& s) {
    const int n = static_cast<int>(s.rows()) / 2;
    Mat w = omega(n);
    return -w * s.transpose() * w;
}

} // namespace

CanonicalForm canonical_form(const GaussianPure& g, int signal_modes, int control_modes) {
    const int l = signal_modes, k = control_modes;
    if (l + k != g.modes) throw std::invalid_argument("canonical_form: split does not match mode count");
    if (!g.is_pure()) throw std::invalid_argument("canonical_form: state not pure");

    const Mat sigma = g.cov;
    const Mat c = sigma.bottomRightCorner(2 * k, 2 * k);
    const Mat a = sigma.topLeftCorner(2 * l, 2 * l);
    const Mat b = sigma.bottomLeftCorner(2 * k, 2 * l); // control x signal

    WilliamsonResult wc = williamson(c);
    WilliamsonResult wa = williamson(a);
    const double rank_tol = 1e-8;
    int r = 0;
    while (r < k && wc.eigenvalues(r) > 1.0 + rank_tol) ++r;
    if (r > l) throw std::runtime_error("canonical_form: Schmidt rank exceeds signal mode count");
    for (int m = 0; m < r; ++m)
        if (std::abs(wa.eigenvalues(m) - wc.eigenvalues(m)) > 1e-6)
            throw std::runtime_error("canonical_form: signal/control Schmidt spectra disagree");

    // Both marginals in Williamson frames: cross block must be mu Z times an
    // orthogonal symplectic block commuting with D, confined to the first r pairs.
    const Mat bt = symplectic_inverse(wc.symplectic) * b *
                   symplectic_inverse(wa.symplectic).transpose();
    double off = 0.0;
    if (r < k) off = std::max(off, bt.bottomRows(2 * (k - r)).cwiseAbs().maxCoeff());
    if (r < l) off = std::max(off, bt.rightCols(2 * (l - r)).cwiseAbs().maxCoeff());
    if (off > 1e-6) {
        std::ostringstream os;
        os << "canonical_form: residual correlations outside the entangled sector (" << off
           << "); control eigenvalues:";
        for (int m = 0; m < k; ++m) os << " " << wc.eigenvalues(m);
        throw std::runtime_error(os.str());
    }

    CanonicalForm cf;
    cf.schmidt_rank = r;
    for (int m = 0; m < r; ++m) {
        const double nu = wc.eigenvalues(m);
        cf.a.push_back(nu + std::sqrt(nu * nu - 1.0));
    }

    Mat sr = Mat::Identity(2 * r, 2 * r);
    for (int m = 0; m < r; ++m) {
        const double nu = wc.eigenvalues(m);
        const double mu = std::sqrt(nu * nu - 1.0);
        sr.row(2 * m) = bt.row(2 * m).head(2 * r) / mu;
        sr.row(2 * m + 1) = -bt.row(2 * m + 1).head(2 * r) / mu; // undo Z
    }
    const Mat wr = omega(r);
    const double orth_dev = (sr * sr.transpose() - Mat::Identity(2 * r, 2 * r)).cwiseAbs().maxCoeff();
    const double symp_dev = (sr * wr * sr.transpose() - wr).cwiseAbs().maxCoeff();
    if (std::max(orth_dev, symp_dev) > 1e-6) {
        std::ostringstream os;
        os << "canonical_form: degenerate-eigenvalue branch failure (deviation "
           << std::max(orth_dev, symp_dev) << "); colliding eigenvalues:";
        for (int m = 0; m < k; ++m) os << " " << wc.eigenvalues(m);
        throw std::runtime_error(os.str());
    }

    Mat ts = Mat::Identity(2 * l, 2 * l);
    ts.topLeftCorner(2 * r, 2 * r) = sr.transpose();
    Mat ss = wa.symplectic * ts;

    cf.u_signal = GaussianUnitary(ss, g.mean.head(2 * l));
    cf.u_control = GaussianUnitary(wc.symplectic, g.mean.tail(2 * k));
    return cf;
}

GaussianPure canonical_reconstruct(const CanonicalForm& cf, int signal_modes, int control_modes) {
    const int l = signal_modes, k = control_modes;
    const int n = l + k;
    const int r = cf.schmidt_rank;
    Mat sigma = Mat::Identity(2 * n, 2 * n);
    for (int m = 0; m < r; ++m) {
        const double a = cf.a[m];
        const double nu = (a * a + 1.0) / (2.0 * a);
        const double mu = (a * a - 1.0) / (2.0 * a);
        const int is = 2 * m, ic = 2 * (l + m);
        sigma(is, is) = sigma(is + 1, is + 1) = nu;
        sigma(ic, ic) = sigma(ic + 1, ic + 1) = nu;
        sigma(is, ic) = sigma(ic, is) = mu;
        sigma(is + 1, ic + 1) = sigma(ic + 1, is + 1) = -mu;
    }
    Mat s = Mat::Identity(2 * n, 2 * n);
    s.topLeftCorner(2 * l, 2 * l) = cf.u_signal.symplectic;
    s.bottomRightCorner(2 * k, 2 * k) = cf.u_control.symplectic;
    Vec d(2 * n);
    d.head(2 * l) = cf.u_signal.displacement;
    d.tail(2 * k) = cf.u_control.displacement;
    Mat out = s * sigma * s.transpose();
    GaussianPure g;
    g.modes = n;
    g.cov = 0.5 * (out + out.transpose());
    g.mean = d;
    return g;
}

GaussianPure canonical_purification(const Mat& c, const Vec& beta, int* signal_modes_out) {
    const int k = static_cast<int>(c.rows()) / 2;
    WilliamsonResult wc = williamson(c);
    const double rank_tol = 1e-8;
    int r = 0;
    while (r < k && wc.eigenvalues(r) > 1.0 + rank_tol) ++r;
    const int l = std::max(r, 1); // keep at least one signal mode

    CanonicalForm cf;
    cf.schmidt_rank = r;
    for (int m = 0; m < r; ++m) {
        const double nu = wc.eigenvalues(m);
        cf.a.push_back(nu + std::sqrt(nu * nu - 1.0));
    }
    cf.u_signal = GaussianUnitary::identity(l);
    cf.u_control = GaussianUnitary(wc.symplectic, beta);
    if (signal_modes_out) *signal_modes_out = l;
    return canonical_reconstruct(cf, l, k);
}

void cayley(const Mat& c, const Vec& beta, Mat& ct, Vec& bt) {
    const int n = static_cast<int>(c.rows());
    Mat cpi = c + Mat::Identity(n, n);
    Eigen::PartialPivLU<Mat> lu(cpi);
    if (std::abs(lu.determinant()) < 1e-14)
        throw std::invalid_argument("cayley: C + I singular");
    ct = lu.solve(c - Mat::Identity(n, n));
    bt = lu.solve(beta);
}

void inverse_cayley(const Mat& ct, const Vec& bt, Mat& c, Vec& beta) {
    const int n = static_cast<int>(ct.rows());
    Mat imc = Mat::Identity(n, n) - ct;
    Eigen::PartialPivLU<Mat> lu(imc);
    if (std::abs(lu.determinant()) < 1e-14)
        throw std::invalid_argument("inverse_cayley: I - Ct singular");
    // C (I - Ct) = I + Ct  =>  C = (I + Ct) (I - Ct)^{-1}
    c = (Mat::Identity(n, n) + ct) * lu.inverse();
    beta = (c + Mat::Identity(n, n)) * bt;
}

GaussianPure condition_homodyne_x(const GaussianPure& g, int mode, double outcome) {
    const int n = g.modes;
    std::vector<int> keep;
    for (int m = 0; m < n; ++m)
        if (m != mode) keep.push_back(m);

    Mat srr(2 * (n - 1), 2 * (n - 1));
    Mat srj(2 * (n - 1), 2);
    Vec gr(2 * (n - 1));
    for (int i = 0; i < n - 1; ++i) {
        gr.segment<2>(2 * i) = g.mean.segment<2>(2 * keep[i]);
        srj.block<2, 2>(2 * i, 0) = g.cov.block<2, 2>(2 * keep[i], 2 * mode);
        for (int j = 0; j < n - 1; ++j)
            srr.block<2, 2>(2 * i, 2 * j) = g.cov.block<2, 2>(2 * keep[i], 2 * keep[j]);
    }
    const double sxx = g.cov(2 * mode, 2 * mode);
    if (sxx <= 0) throw std::runtime_error("condition_homodyne_x: degenerate x variance");
    Vec cx = srj.col(0); // correlations with the measured x quadrature
    Mat cov = srr - cx * cx.transpose() / sxx;
    Vec mean = gr + cx * ((outcome - g.mean(2 * mode)) / sxx);
    GaussianPure out;
    out.modes = n - 1;
    out.cov = 0.5 * (cov + cov.transpose());
    out.mean = mean;
    return out;
}

GaussianPure random_generator(int k_signal, int k_control, double r_max, double d_max,
                              std::uint64_t seed) {
    if (r_max < 0 || d_max < 0) throw std::invalid_argument("random_generator: negative range");
    const int n = k_signal + k_control;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    auto haar_orthosymplectic = [&]() {
        CMat ginibre(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) ginibre(i, j) = cplx(gauss(rng), gauss(rng));
        Eigen::HouseholderQR<CMat> qr(ginibre);
        CMat q = qr.householderQ();
        CMat rmat = q.adjoint() * ginibre;
        for (int j = 0; j < n; ++j) {
            cplx d = rmat(j, j);
            q.col(j) *= d / std::abs(d);
        }
        return realify(q);
    };

    Mat w = haar_orthosymplectic();
    Mat v = haar_orthosymplectic();
    Vec sq(2 * n);
    for (int m = 0; m < n; ++m) {
        const double r = r_max * unif(rng);
        sq(2 * m) = std::exp(r);
        sq(2 * m + 1) = std::exp(-r);
    }
    Mat s = w * sq.asDiagonal() * v;
    Vec d(2 * n);
    for (int i = 0; i < 2 * n; ++i) d(i) = d_max * unif(rng);

    GaussianPure g;
    g.modes = n;
    Mat cov = s * s.transpose();
    g.cov = 0.5 * (cov + cov.transpose());
    g.mean = d;
    return g;
}

} // namespace ngopt
