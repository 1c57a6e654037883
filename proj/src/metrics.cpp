#include "ngopt/metrics.hpp"

#include <cmath>

namespace ngopt {

namespace {

constexpr double kPi = 3.14159265358979323846;

// dense log-grid scan followed by golden refinement; the comb objectives are
// multimodal in lambda
template <typename F>
double grid_min(F f, double lo, double hi, int npts, double tol = 1e-8) {
    double best = lo, fbest = f(lo);
    for (int i = 1; i <= npts; ++i) {
        const double x = lo * std::pow(hi / lo, double(i) / npts);
        const double fx = f(x);
        if (fx < fbest) {
            fbest = fx;
            best = x;
        }
    }
    const double step = std::pow(hi / lo, 1.0 / npts);
    double a = std::max(lo, best / step), b = std::min(hi, best * step);
    const double g = 0.6180339887498949;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol * (1.0 + a + b)) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

// golden-section minimizer on [lo, hi]
template <typename F>
double golden_min(F f, double lo, double hi, double tol = 1e-8) {
    const double g = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol * (1.0 + std::abs(a) + std::abs(b))) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

CVec apply_x(const CVec& v) {
    const int n = static_cast<int>(v.size());
    CVec out = CVec::Zero(n + 1);
    for (int j = 0; j < n; ++j) {
        out(j + 1) += std::sqrt(double(j + 1)) * v(j);
        if (j > 0) out(j - 1) += std::sqrt(double(j)) * v(j);
    }
    return out;
}

CVec apply_p(const CVec& v) {
    const int n = static_cast<int>(v.size());
    CVec out = CVec::Zero(n + 1);
    const cplx i(0, 1);
    for (int j = 0; j < n; ++j) {
        out(j + 1) += i * std::sqrt(double(j + 1)) * v(j);
        if (j > 0) out(j - 1) += -i * std::sqrt(double(j)) * v(j);
    }
    return out;
}

cplx expect(const CVec& a, const CVec& b) {
    const int n = std::min(a.size(), b.size());
    return a.head(n).dot(b.head(n));
}

} // namespace

MetricResult xi_cat(const FockVector& v) {
    auto m = quadrature_moments_x(v, 4);
    const double x2 = m[1], x4 = m[3];
    MetricResult r;
    r.value = 1.0 - x2 * x2 / x4;
    r.lambda = std::sqrt(x4 / x2); // optimal 1/lambda^2 = <x^2>/<x^4>
    r.convention = MetricConvention::hbar2;
    return r;
}

MetricResult xi_cps(const FockVector& v) {
    // hbar=1 rescaling: quadratures divided by sqrt2 relative to hbar=2 ops
    const CVec psi = v.amps / std::sqrt(v.norm2());
    const CVec pp = apply_p(psi) / std::sqrt(2.0);
    const CVec pxx = apply_x(apply_x(psi)) / 2.0;

    auto value_at = [&](double l) {
        // O = l p - x^2/(sqrt2 l^2) - d, optimal d = <O>
        CVec o = CVec::Zero(pxx.size());
        o.head(pp.size()) = l * pp;
        o -= pxx / (std::sqrt(2.0) * l * l);
        const cplx mean = expect(psi, o);
        CVec shifted = o;
        shifted.head(psi.size()) -= mean * psi;
        return shifted.squaredNorm();
    };
    MetricResult r;
    r.lambda = grid_min(value_at, 0.05, 20.0, 160);
    r.value = value_at(r.lambda);
    CVec o = CVec::Zero(pxx.size());
    o.head(pp.size()) = r.lambda * pp;
    o -= pxx / (std::sqrt(2.0) * r.lambda * r.lambda);
    r.d = expect(psi, o).real();
    r.convention = MetricConvention::hbar1;
    return r;
}

MetricResult xi_gkp(const FockVector& v, MetricConvention convention) {
    const CVec psi = v.amps / std::sqrt(v.norm2());
    const int n = v.cutoff();
    const double scale = convention == MetricConvention::hbar1 ? 1.0 / std::sqrt(2.0) : 1.0;

    // <e^{i a x}> = <D(i a/2 * 2)> with x = a + a^dag: displacement amplitude ia;
    // <e^{i b p}> corresponds to amplitude -b (p = -i(a - a^dag))
    auto char_x = [&](double a) {
        CMat d = displacement_matrix(cplx(0, a * scale), n);
        return (psi.adjoint() * d * psi)(0, 0);
    };
    auto char_p = [&](double b) {
        CMat d = displacement_matrix(cplx(-b * scale, 0), n);
        return (psi.adjoint() * d * psi)(0, 0);
    };
    // phase minimization is analytic: min_phi <cos(u + 2phi)> = -|<e^{iu}>|
    auto value_at = [&](double l) {
        const double ax = std::sqrt(kPi) * l;
        const double bp = std::sqrt(kPi) / l;
        return 2.0 - std::abs(char_x(ax)) - std::abs(char_p(bp));
    };
    MetricResult r;
    r.lambda = grid_min(value_at, 0.2, 5.0, 240);
    r.value = value_at(r.lambda);
    r.phi1 = 0.5 * (kPi - std::arg(char_x(std::sqrt(kPi) * r.lambda)));
    r.phi2 = 0.5 * (kPi - std::arg(char_p(std::sqrt(kPi) / r.lambda)));
    r.convention = convention;
    return r;
}

} // namespace ngopt
