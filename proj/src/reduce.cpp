#include "ngopt/reduce.hpp"

#include "ngopt/fock.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ngopt {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double fock_wavefunction(int n, double x) {
    double prev = 0.0;
    double cur = std::pow(2.0 * kPi, -0.25) * std::exp(-x * x / 4.0);
    for (int m = 1; m <= n; ++m) {
        const double next = (x * cur - std::sqrt(m - 1.0) * prev) / std::sqrt(double(m));
        prev = cur;
        cur = next;
    }
    return cur;
}

double fock_wavefunction_deriv(int n, double x) {
    // a phi_n = sqrt(n) phi_{n-1} with a = x/2 + d/dx
    const double lower = (n > 0) ? std::sqrt(double(n)) * fock_wavefunction(n - 1, x) : 0.0;
    return lower - 0.5 * x * fock_wavefunction(n, x);
}

double local_momentum(int n, double x) {
    const double v = 4.0 * n + 2.0 - x * x;
    return v > 0 ? std::sqrt(v) : 0.0;
}

double turning_point(int n) { return std::sqrt(4.0 * n + 2.0); }

double largest_root(int n) {
    if (n <= 1) return 0.0;
    const double xt = turning_point(n);
    const double step = xt / (12.0 * n);
    double hi = xt;
    double fhi = fock_wavefunction(n, hi);
    double lo = hi;
    while (lo > 0.0) {
        lo = std::max(0.0, hi - step);
        const double flo = fock_wavefunction(n, lo);
        if (flo == 0.0) return lo;
        if ((flo > 0) != (fhi > 0)) break;
        hi = lo;
        fhi = flo;
    }
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = fock_wavefunction(n, mid);
        if ((fm > 0) == (fhi > 0)) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::pair<double, double> match_parity(int n, int n_prime) {
    if ((n - n_prime) % 2 != 0)
        throw std::invalid_argument("match_parity: n and n' must share parity");
    return {std::sqrt((2.0 * n + 1.0) / (2.0 * n_prime + 1.0)), 0.0};
}

namespace {

// proportional-initial-conditions residual for Method 1 at fixed k
double method1_residual(int n, int np, double x0, double k, double u) {
    return fock_wavefunction(n, x0) * k * fock_wavefunction_deriv(np, u) -
           fock_wavefunction_deriv(n, x0) * fock_wavefunction(np, u);
}

} // namespace

std::vector<MatchCandidate> method1(int n, int n_prime, double x0) {
    const double p2 = 4.0 * n + 2.0 - x0 * x0;
    if (p2 <= 0.0) throw std::domain_error("method1: x0 beyond the turning point");
    const double k_par = std::sqrt((2.0 * n + 1.0) / (2.0 * n_prime + 1.0));
    const double k_min = std::sqrt(p2 / (4.0 * n_prime + 2.0)) * (1.0 + 1e-12);

    std::vector<MatchCandidate> out;
    for (int branch = 0; branch < 2; ++branch) {
        const double sgn = branch == 0 ? 1.0 : -1.0;
        auto resid = [&](double k) {
            const double u2 = 4.0 * n_prime + 2.0 - p2 / (k * k);
            const double u = sgn * std::sqrt(std::max(u2, 0.0));
            return method1_residual(n, n_prime, x0, k, u);
        };
        auto push = [&](double k) {
            const double u2 = 4.0 * n_prime + 2.0 - p2 / (k * k);
            const double u = sgn * std::sqrt(std::max(u2, 0.0));
            MatchCandidate cand;
            cand.k = k;
            cand.d = k * x0 - u;
            cand.deriv_mismatch = std::abs(k * k * k * u - x0) / std::sqrt(p2);
            bool dup = false;
            for (const auto& c : out)
                dup = dup || (std::abs(c.k - cand.k) < 1e-6 && std::abs(c.d - cand.d) < 1e-6);
            if (!dup) out.push_back(cand);
        };
        // the domain edge u = 0 (p-match saturated) can itself be a root
        {
            const double kb = std::sqrt(p2 / (4.0 * n_prime + 2.0));
            const double edge = method1_residual(n, n_prime, x0, kb, 0.0);
            const double ref = std::abs(fock_wavefunction(n, x0)) +
                               std::abs(fock_wavefunction_deriv(n, x0));
            if (std::abs(edge) < 1e-10 * ref && kb >= 0.3 * k_par && kb <= 3.0 * k_par) push(kb);
        }
        // dense scan: bisection on sign changes plus golden-section refinement
        // of tangential near-zeros (the residual can touch zero without crossing)
        const double lo = std::max(0.3 * k_par, k_min), hi = 3.0 * k_par;
        if (lo >= hi) continue;
        const int ns = 400;
        std::vector<double> ks(ns + 1), fs(ns + 1);
        double scale = 0.0;
        for (int i = 0; i <= ns; ++i) {
            ks[i] = lo * std::pow(hi / lo, double(i) / ns);
            fs[i] = resid(ks[i]);
            scale = std::max(scale, std::abs(fs[i]));
        }
        for (int i = 1; i <= ns; ++i) {
            if (fs[i - 1] == 0.0 || (fs[i - 1] > 0) != (fs[i] > 0)) {
                double a = ks[i - 1], b = ks[i], fa = fs[i - 1];
                for (int it = 0; it < 60; ++it) {
                    const double m = 0.5 * (a + b);
                    const double fm = resid(m);
                    if ((fm > 0) == (fa > 0)) {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                push(0.5 * (a + b));
            } else if (i >= 2 && std::abs(fs[i - 1]) < std::abs(fs[i - 2]) &&
                       std::abs(fs[i - 1]) < std::abs(fs[i]) &&
                       std::abs(fs[i - 1]) < 1e-2 * scale) {
                double a = ks[i - 2], b = ks[i];
                for (int it = 0; it < 80; ++it) {
                    const double m1 = a + 0.382 * (b - a), m2 = a + 0.618 * (b - a);
                    if (std::abs(resid(m1)) < std::abs(resid(m2)))
                        b = m2;
                    else
                        a = m1;
                }
                const double k = 0.5 * (a + b);
                if (std::abs(resid(k)) < 1e-9 * scale) push(k);
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const MatchCandidate& a, const MatchCandidate& b) {
        return a.deriv_mismatch < b.deriv_mismatch;
    });
    return out;
}

std::pair<double, double> method2(int n, int n_prime, double x0) {
    // (4n'+2) kap^3 - (4n+2 - x0^2) kap^2 - x0^2 = 0,  kap = k^2
    const double a3 = 4.0 * n_prime + 2.0;
    const double a2 = -(4.0 * n + 2.0 - x0 * x0);
    const double a0 = -x0 * x0;
    Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
    comp(1, 0) = 1.0;
    comp(2, 1) = 1.0;
    comp(0, 2) = -a0 / a3;
    comp(1, 2) = 0.0;
    comp(2, 2) = -a2 / a3;
    Eigen::EigenSolver<Eigen::Matrix3d> es(comp);
    const double kap_par = (2.0 * n + 1.0) / (2.0 * n_prime + 1.0);
    double best = -1.0;
    for (int i = 0; i < 3; ++i) {
        const cplx root = es.eigenvalues()(i);
        if (std::abs(root.imag()) > 1e-9 * std::max(1.0, std::abs(root)) || root.real() <= 1e-12)
            continue;
        if (best < 0 || std::abs(root.real() - kap_par) < std::abs(best - kap_par))
            best = root.real();
    }
    if (best < 0)
        throw std::domain_error("method2: no real positive root (infeasible reduction)");
    const double k = std::sqrt(best);
    const double u = x0 / (k * k * k);
    return {k, k * x0 - u};
}

namespace {

GaussianUnitary correction_unitary(double k, double d) {
    // wavefunction map psi(x) -> sqrt(k) psi(kx - d): mean x -> (x + d)/k
    Mat s(2, 2);
    s << 1.0 / k, 0.0, 0.0, k;
    Vec shift(2);
    shift << d / k, 0.0;
    return GaussianUnitary(s, shift);
}

cplx reduced_delta0(double s0, cplx delta0, double k, double d) {
    const double dx = delta0.real(), dp = delta0.imag();
    const double f = std::sqrt((s0 + 1.0) / (s0 + k * k));
    return f * cplx(k * k * dx, dp) - cplx(0.0, s0 * d / (k * std::sqrt(s0 + k * k)));
}

cplx delta0_of_frame(double cc, double dd, const Vec2& bb) {
    const double root = std::sqrt(cc * dd - 1.0);
    return 2.0 / root *
           cplx(std::sqrt((dd + 1.0) / (cc + 1.0)) * bb(0),
                -std::sqrt((cc + 1.0) / (dd + 1.0)) * bb(1));
}

// Choi operator of the wave-form purification of a diagonal-frame block:
// transpose of U^(p->w) K_p, where K_p is the vacuum-preserving ladder map
// (a; a^dag) -> [[sqrt(eta), 0], [s0/sqrt(eta), 1/sqrt(eta)]] + (0; delta0/sqrt(eta)).
FilterMatrixRep wave_choi_op(double cc, double dd, cplx delta0) {
    const double cd1 = cc * dd - 1.0;
    if (cd1 <= 1e-12) throw std::domain_error("wave_choi_op: pure uncorrelated control block");
    const double s0 = (cc - dd) / cd1;
    const double eta = (cc + 1.0) * (dd + 1.0) / cd1;
    const double re = std::sqrt(eta);
    FilterMatrixRep kp;
    kp.s_matrix = CMat::Zero(2, 2);
    kp.s_matrix(0, 0) = re;
    kp.s_matrix(1, 0) = s0 / re;
    kp.s_matrix(1, 1) = 1.0 / re;
    kp.b = CVec::Zero(2);
    kp.b(1) = delta0 / re;
    FilterMatrixRep kw =
        compose_filters(kp, FilterMatrixRep::unitary(p_to_w_unitary(s0, delta0)));
    return kw.transpose();
}

} // namespace

ReductionPlan plan_reduction(double s0, cplx delta0, int n, int n_prime) {
    if (n_prime > n) throw std::invalid_argument("plan_reduction: n' must not exceed n");
    if (s0 < 0) throw std::invalid_argument("plan_reduction: s0 must be nonnegative");

    ReductionPlan plan;
    plan.n = n;
    plan.n_prime = n_prime;

    // Eq.-(23)-literal parameters map to the wave-form envelope label as
    // delta0/2; the reduction geometry lives in the wave representation.
    cplx d_wave = delta0 / 2.0;
    double x0 = 0.0;
    const bool cps_regime = s0 <= 1e-9;
    if (cps_regime && std::abs(d_wave) > 1e-12) {
        // rotate the mode so the wave label is purely imaginary (envelope
        // tilted towards +x); the center degenerates to the turning point
        plan.pre_rotation = kPi / 2.0 - std::arg(d_wave);
        d_wave = cplx(0.0, std::abs(d_wave));
        x0 = turning_point(n);
    } else if (!cps_regime) {
        x0 = std::sqrt(s0 + 1.0) / s0 * d_wave.imag();
    }

    if (n_prime == n && std::abs(x0) < 1e-12) {
        plan.k = 1.0;
        plan.d = 0.0;
        plan.method_used = MatchMethod::analytic_parity;
    } else if (std::abs(x0) < 1e-12 && (n - n_prime) % 2 == 0) {
        auto [k, d] = match_parity(n, n_prime);
        plan.k = k;
        plan.d = d;
        plan.method_used = MatchMethod::analytic_parity;
    } else {
        const double xz = largest_root(n);
        const double xt = turning_point(n);
        if (std::abs(x0) < xz) {
            auto cands = method1(n, n_prime, x0);
            if (cands.empty())
                throw std::domain_error("plan_reduction: infeasible reduction (method 1)");
            // among the matching candidates take the one with the best actual
            // wave-form overlap; the derivative mismatch alone can mislead at
            // small n
            double best_overlap = -1.0;
            plan.k = cands.front().k;
            plan.d = cands.front().d;
            for (size_t ci = 0; ci < cands.size() && ci < 6; ++ci) {
                const double kk = cands[ci].k, dd = cands[ci].d;
                try {
                    const cplx dw = reduced_delta0(s0, d_wave, kk, dd);
                    auto w_full = wave_form(s0, std::conj(d_wave), n);
                    auto w_red = wave_form(s0 / (kk * kk), std::conj(dw), n_prime);
                    auto w_corr = apply_gaussian_unitary_fock(correction_unitary(kk, dd), w_red);
                    const double f = fidelity(w_full, w_corr);
                    if (f > best_overlap) {
                        best_overlap = f;
                        plan.k = kk;
                        plan.d = dd;
                    }
                } catch (const std::exception&) {
                    // extreme candidates can overflow the comparison cutoff
                }
            }
            plan.method_used = MatchMethod::method1;
        } else if (std::abs(x0) <= xt) {
            const double xc = x0 >= 0 ? xt : -xt;
            auto [k, d] = method2(n, n_prime, xc);
            plan.k = k;
            plan.d = d;
            plan.method_used = MatchMethod::method2_at_turning;
        } else {
            auto [k, d] = method2(n, n_prime, x0);
            plan.k = k;
            plan.d = d;
            plan.method_used = MatchMethod::method2;
        }
    }

    plan.s0_prime = s0 / (plan.k * plan.k);
    plan.delta0_prime = 2.0 * reduced_delta0(s0, d_wave, plan.k, plan.d);
    plan.correction = correction_unitary(plan.k, plan.d);
    return plan;
}

GaussianCPMap build_filter(const Mat2& c_m, const Vec2& beta_m, int n, const ReductionPlan& plan) {
    (void)n;
    Mat2 o;
    double cc, dd;
    control_eigenframe(c_m, beta_m, o, cc, dd);
    if (cc * dd - 1.0 <= 1e-12)
        throw std::domain_error("build_filter: undefined control parameters (cd = 1)");

    // total frame rotation: eigenframe, then the plan's pre-rotation
    Mat2 o_pre;
    {
        const double ct = std::cos(plan.pre_rotation), st = std::sin(plan.pre_rotation);
        o_pre << ct, st, -st, ct;
    }
    const Mat2 o_tot = o_pre * o;
    const Vec2 bb = o_tot * beta_m;
    const double s0 = (cc - dd) / (cc * dd - 1.0);
    const cplx d_wave = delta0_of_frame(cc, dd, bb) / 2.0; // wave-form label

    // target block with the same symplectic eigenvalue as C
    const double nu = std::sqrt(cc * dd);
    const double spread = plan.s0_prime * (nu * nu - 1.0);
    const double cp = 0.5 * (spread + std::sqrt(spread * spread + 4.0 * nu * nu));
    const double dp = nu * nu / cp;
    const cplx d0p_wave = reduced_delta0(s0, d_wave, plan.k, plan.d);

    // the particle-level label entering K_p is the conjugate of the wave label
    FilterMatrixRep g_old = wave_choi_op(cc, dd, std::conj(d_wave));
    FilterMatrixRep g_new = wave_choi_op(cp, dp, std::conj(d0p_wave));
    FilterMatrixRep ucorr_t = FilterMatrixRep::unitary(plan.correction).transpose();
    FilterMatrixRep m_frame = compose_filters(compose_filters(g_old.inverse(), ucorr_t), g_new);

    // conjugate back into the physical frame
    GaussianUnitary rot(Mat(o_tot), Vec::Zero(2));
    FilterMatrixRep rot_rep = FilterMatrixRep::unitary(rot);
    FilterMatrixRep m_total = compose_filters(compose_filters(rot_rep, m_frame), rot_rep.inverse());
    return filter_to_choi(m_total);
}

ControlMoments apply_reduction(const ControlMoments& m, int mode, const ReductionPlan& plan) {
    auto choi = build_filter(m.mode_block(mode), m.mode_mean(mode), plan.n, plan);
    auto [c2, b2] = apply_map(m.c, m.beta, choi, {mode});
    return ControlMoments(std::move(c2), std::move(b2));
}

} // namespace ngopt
