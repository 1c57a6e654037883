#include "ngopt/fock.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace ngopt {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double FockVector::tail_mass() const {
    const double n2 = norm2();
    if (n2 == 0.0) return 0.0;
    return std::norm(amps(amps.size() - 1)) / n2;
}

FockVector FockVector::normalize() const {
    FockVector out;
    out.amps = amps / std::sqrt(norm2());
    out.normalized = true;
    return out;
}

FockVector FockTensor::as_vector() const {
    if (modes() != 1) throw std::logic_error("FockTensor::as_vector: not single-mode");
    FockVector v;
    v.amps = amps;
    return v;
}

double tail_tolerance() {
    if (const char* env = std::getenv("NGOPT_TAIL_TOL")) {
        const double t = std::atof(env);
        if (t > 0) return t;
    }
    return 1e-8;
}

BargmannForm bargmann_form(const GaussianPure& g) {
    const int n = g.modes;
    Mat q = g.cov + Mat::Identity(2 * n, 2 * n);
    Eigen::LLT<Mat> llt(q);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("bargmann_form: covariance + I not positive definite");
    Mat p = llt.solve(Mat::Identity(2 * n, 2 * n));
    Vec pg = llt.solve(g.mean);

    BargmannForm f;
    f.a.resize(n, n);
    f.b.resize(n);
    for (int m = 0; m < n; ++m) {
        f.b(m) = cplx(pg(2 * m), pg(2 * m + 1));
        for (int j = 0; j < n; ++j) {
            const double re = p(2 * m, 2 * j) - p(2 * m + 1, 2 * j + 1);
            const double im = p(2 * m, 2 * j + 1) + p(2 * m + 1, 2 * j);
            f.a(m, j) = -cplx(re, im);
        }
    }
    // |<0|psi>|^2 = 2^n det(Sigma+I)^{-1/2} exp(-gamma^T P gamma / 2)
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double log_c2 = n * std::log(2.0) - 0.5 * logdet - 0.5 * g.mean.dot(pg);
    f.c = std::exp(0.5 * log_c2);
    return f;
}

namespace {

struct BoxShape {
    std::vector<int> dims;
    std::vector<std::int64_t> strides; // row-major, last index fastest
    std::int64_t total = 1;

    explicit BoxShape(const std::vector<int>& cutoffs) {
        const int n = static_cast<int>(cutoffs.size());
        dims.resize(n);
        strides.assign(n, 1);
        for (int i = 0; i < n; ++i) dims[i] = cutoffs[i] + 1;
        for (int i = n - 2; i >= 0; --i) strides[i] = strides[i + 1] * dims[i + 1];
        for (int i = 0; i < n; ++i) total *= dims[i];
    }
};

// One recurrence step: t[m] from already-filled lower shells.
inline cplx recurrence_entry(const BargmannForm& f, const BoxShape& box, const CVec& t,
                             const int* idx, std::int64_t flat) {
    const int n = static_cast<int>(box.dims.size());
    int j = 0;
    while (idx[j] == 0) ++j;
    const std::int64_t base = flat - box.strides[j];
    cplx acc = f.b(j) * t(base);
    for (int k = 0; k < n; ++k) {
        const int mk = idx[k] - (k == j ? 1 : 0);
        if (mk > 0) acc += f.a(j, k) * std::sqrt(static_cast<double>(mk)) * t(base - box.strides[k]);
    }
    return acc / std::sqrt(static_cast<double>(idx[j]));
}

void fill_serial(const BargmannForm& f, const BoxShape& box, CVec& t) {
    const int n = static_cast<int>(box.dims.size());
    std::vector<int> idx(n, 0);
    t(0) = f.c;
    for (std::int64_t flat = 1; flat < box.total; ++flat) {
        // advance mixed-radix counter (last index fastest)
        int pos = n - 1;
        while (++idx[pos] == box.dims[pos]) {
            idx[pos] = 0;
            --pos;
        }
        t(flat) = recurrence_entry(f, box, t, idx.data(), flat);
    }
}

void fill_parallel(const BargmannForm& f, const BoxShape& box, CVec& t) {
    const int n = static_cast<int>(box.dims.size());
    int max_shell = 0;
    for (int d : box.dims) max_shell += d - 1;

    // bucket flat indices by total degree
    std::vector<std::int64_t> shell_count(max_shell + 1, 0);
    {
        std::vector<int> idx(n, 0);
        shell_count[0]++;
        for (std::int64_t flat = 1; flat < box.total; ++flat) {
            int pos = n - 1;
            while (++idx[pos] == box.dims[pos]) {
                idx[pos] = 0;
                --pos;
            }
            shell_count[std::accumulate(idx.begin(), idx.end(), 0)]++;
        }
    }
    std::vector<std::int64_t> offset(max_shell + 2, 0);
    for (int s = 0; s <= max_shell; ++s) offset[s + 1] = offset[s] + shell_count[s];
    std::vector<std::int64_t> order(box.total);
    {
        std::vector<std::int64_t> cursor(offset.begin(), offset.end() - 1);
        std::vector<int> idx(n, 0);
        order[cursor[0]++] = 0;
        for (std::int64_t flat = 1; flat < box.total; ++flat) {
            int pos = n - 1;
            while (++idx[pos] == box.dims[pos]) {
                idx[pos] = 0;
                --pos;
            }
            const int deg = std::accumulate(idx.begin(), idx.end(), 0);
            order[cursor[deg]++] = flat;
        }
    }

    t(0) = f.c;
    std::vector<int> scratch(n);
    for (int s = 1; s <= max_shell; ++s) {
        const std::int64_t lo = offset[s], hi = offset[s + 1];
#pragma omp parallel for schedule(static) firstprivate(scratch)
        for (std::int64_t w = lo; w < hi; ++w) {
            const std::int64_t flat = order[w];
            std::int64_t rem = flat;
            for (int i = 0; i < n; ++i) {
                scratch[i] = static_cast<int>(rem / box.strides[i]);
                rem %= box.strides[i];
            }
            t(flat) = recurrence_entry(f, box, t, scratch.data(), flat);
        }
    }
}

FockTensor fill_amplitudes(const GaussianPure& g, const std::vector<int>& cutoffs, bool parallel) {
    if (static_cast<int>(cutoffs.size()) != g.modes)
        throw std::invalid_argument("gaussian_fock_amplitudes: cutoff count mismatch");
    for (int c : cutoffs)
        if (c < 0) throw std::invalid_argument("gaussian_fock_amplitudes: negative cutoff");
    BargmannForm f = bargmann_form(g);
    BoxShape box(cutoffs);
    FockTensor t;
    t.dims = box.dims;
    t.amps.resize(box.total);
    if (parallel && box.total > 200000)
        fill_parallel(f, box, t.amps);
    else
        fill_serial(f, box, t.amps);
    return t;
}

} // namespace

FockTensor gaussian_fock_amplitudes(const GaussianPure& g, const std::vector<int>& cutoffs,
                                    bool parallel) {
    return fill_amplitudes(g, cutoffs, parallel);
}

FockTensor gaussian_fock_amplitudes_serial(const GaussianPure& g, const std::vector<int>& cutoffs) {
    return fill_amplitudes(g, cutoffs, false);
}

HeraldResult herald(const GaussianPure& g, int signal_modes, const std::vector<int>& n_pattern,
                    std::optional<int> cutoff) {
    const int l = signal_modes;
    const int k = g.modes - l;
    if (static_cast<int>(n_pattern.size()) != k)
        throw std::invalid_argument("herald: pattern length must match control mode count");
    const int total_photons = std::accumulate(n_pattern.begin(), n_pattern.end(), 0);

    int sig_cut = cutoff ? *cutoff : std::max(40, 3 * total_photons);
    if (!cutoff && l > 1) sig_cut = std::max(24, total_photons + 16); // multimode boxes grow fast
    const double tol = tail_tolerance();

    for (int attempt = 0;; ++attempt) {
        std::vector<int> cuts(g.modes);
        for (int m = 0; m < l; ++m) cuts[m] = sig_cut;
        for (int m = 0; m < k; ++m) cuts[l + m] = n_pattern[m];
        FockTensor full = gaussian_fock_amplitudes(g, cuts);

        // slice signal amplitudes at the measured pattern
        BoxShape box(cuts);
        std::int64_t ctrl_off = 0;
        for (int m = 0; m < k; ++m) ctrl_off += box.strides[l + m] * n_pattern[m];
        std::vector<int> sdims(l, sig_cut);
        BoxShape sig_box(sdims);
        FockTensor sig;
        sig.dims = sig_box.dims;
        sig.amps.resize(sig_box.total);
        for (std::int64_t i = 0; i < sig_box.total; ++i) {
            std::int64_t rem = i, src = ctrl_off;
            for (int m = 0; m < l; ++m) {
                src += (rem / sig_box.strides[m]) * box.strides[m];
                rem %= sig_box.strides[m];
            }
            sig.amps(i) = full.amps(src);
        }

        const double p = sig.norm2();
        if (p < 1e-300) throw std::runtime_error("herald: probability underflow");

        // boundary mass per signal mode
        double boundary = 0.0;
        for (int m = 0; m < l; ++m) {
            double slice = 0.0;
            for (std::int64_t i = 0; i < sig_box.total; ++i)
                if ((i / sig_box.strides[m]) % sig_box.dims[m] == sig_box.dims[m] - 1)
                    slice += std::norm(sig.amps(i));
            boundary = std::max(boundary, slice / p);
        }
        if (boundary < tol || attempt >= 4 ||
            (cutoff && attempt >= 1)) {
            HeraldResult res;
            res.probability = p;
            sig.amps /= std::sqrt(p);
            res.signal = std::move(sig);
            res.cutoffs_used = cuts;
            return res;
        }
        sig_cut *= 2;
    }
}

namespace {

// Exact diagonal matrix element <n|rho|n> of a Gaussian state via the
// recurrence on the two-sided (bra/ket) holomorphic form of rho.
double mixed_diagonal_probability(const Mat& c, const Vec& beta, const std::vector<int>& n_pattern,
                                  bool parallel = true) {
    const int k = static_cast<int>(c.rows()) / 2;
    Mat q = c + Mat::Identity(2 * k, 2 * k);
    Eigen::LLT<Mat> llt(q);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("success_probability: moments + I not positive definite");
    Mat p = llt.solve(Mat::Identity(2 * k, 2 * k));
    Vec pb = llt.solve(beta);

    // variables (wbar_1..wbar_k, z_1..z_k): coherent-label continuation with
    // x = z + wbar, p = -i z + i wbar per mode
    auto tvec = [&](int m, bool ket) {
        CVec t = CVec::Zero(2 * k);
        t(2 * m) = 1.0;
        t(2 * m + 1) = ket ? cplx(0, -1) : cplx(0, 1);
        return t;
    };
    BargmannForm f;
    f.a.resize(2 * k, 2 * k);
    f.b.resize(2 * k);
    for (int i = 0; i < 2 * k; ++i) {
        const CVec ti = tvec(i % k, i >= k);
        f.b(i) = (ti.transpose() * pb.cast<cplx>())(0, 0);
        for (int j = 0; j < 2 * k; ++j) {
            const CVec tj = tvec(j % k, j >= k);
            f.a(i, j) = -(ti.transpose() * p.cast<cplx>() * tj)(0, 0);
            if (i % k == j % k && (i >= k) != (j >= k)) f.a(i, j) += 1.0; // |mu|^2 continuation
        }
    }
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    f.c = std::exp(k * std::log(2.0) - 0.5 * logdet - 0.5 * beta.dot(pb));

    std::vector<int> cuts(2 * k);
    for (int m = 0; m < k; ++m) cuts[m] = cuts[k + m] = n_pattern[m];
    BoxShape box(cuts);
    CVec t(box.total);
    if (parallel && box.total > 200000)
        fill_parallel(f, box, t);
    else
        fill_serial(f, box, t);
    std::int64_t idx = 0;
    for (int m = 0; m < k; ++m) idx += (box.strides[m] + box.strides[k + m]) * n_pattern[m];
    const cplx val = t(idx);
    if (std::abs(val.imag()) > 1e-10 * std::max(1.0, std::abs(val.real())))
        throw std::runtime_error("success_probability: non-real diagonal element");
    return std::max(val.real(), 0.0);
}

} // namespace

double success_probability(const Mat& c, const Vec& beta, const std::vector<int>& n_pattern,
                           std::optional<int> cutoff, double tail_tol) {
    if (!check_uncertainty(c))
        throw std::invalid_argument("success_probability: moments violate uncertainty");
    const double tol = tail_tol > 0 ? tail_tol : 1e-9;

    // small patterns: exact two-sided recurrence, no truncation at all
    double doubled_cost = 1.0;
    for (int n : n_pattern) doubled_cost *= double(n + 1) * double(n + 1);
    if (!cutoff && doubled_cost <= 4e6) return mixed_diagonal_probability(c, beta, n_pattern);
    int l = 0;
    GaussianPure pur = canonical_purification(c, beta, &l);
    const int k = static_cast<int>(n_pattern.size());
    const int total = std::accumulate(n_pattern.begin(), n_pattern.end(), 0);

    int sig_cut = cutoff ? *cutoff : total + 24;
    double prev = -1.0;
    for (int attempt = 0;; ++attempt) {
        std::vector<int> cuts(l + k);
        for (int m = 0; m < l; ++m) cuts[m] = sig_cut;
        for (int m = 0; m < k; ++m) cuts[l + m] = n_pattern[m];
        FockTensor full = gaussian_fock_amplitudes(pur, cuts);

        BoxShape box(cuts);
        std::int64_t ctrl_off = 0;
        for (int m = 0; m < k; ++m) ctrl_off += box.strides[l + m] * n_pattern[m];
        std::vector<int> sdims(l, sig_cut);
        BoxShape sig_box(sdims);
        double p = 0.0, boundary = 0.0;
        for (std::int64_t i = 0; i < sig_box.total; ++i) {
            std::int64_t rem = i, src = ctrl_off;
            bool on_edge = false;
            for (int m = 0; m < l; ++m) {
                const std::int64_t q = rem / sig_box.strides[m];
                if (q == sig_box.dims[m] - 1) on_edge = true;
                src += q * box.strides[m];
                rem %= sig_box.strides[m];
            }
            const double w = std::norm(full.amps(src));
            p += w;
            if (on_edge) boundary += w;
        }
        const bool converged = p > 0 && boundary / p < tol &&
                               (prev < 0 || std::abs(p - prev) <= 10 * tol * p);
        if (converged || cutoff) return p;
        if (attempt >= 5) {
            if (p > 0 && boundary / p < 1e-3) return p; // mild tail, accept
            throw std::runtime_error("success_probability: non-convergent tail at cutoff");
        }
        prev = p;
        sig_cut *= 2;
    }
}

FockVector particle_form(double s0, cplx delta0, int n, int cutoff) {
    if (s0 < 0) throw std::invalid_argument("particle_form: s0 must be nonnegative");
    const int len = std::max(cutoff, n) + 1;
    CVec v = CVec::Zero(len), w = CVec::Zero(len);
    v(0) = 1.0;
    for (int it = 0; it < n; ++it) {
        w.setZero();
        for (int m = 0; m <= it; ++m) {
            const cplx a = v(m);
            if (a == cplx(0)) continue;
            w(m + 1) += std::sqrt(double(m + 1)) * a; // a^dag
            if (m > 0) w(m - 1) += s0 * std::sqrt(double(m)) * a;
            w(m) += delta0 * a;
        }
        v.swap(w);
    }
    FockVector out;
    out.amps = v / std::sqrt(v.squaredNorm());
    out.normalized = true;
    return out;
}

GaussianUnitary p_to_w_unitary(double s0, cplx delta0) {
    // Unitary quotient of the wave filter against the particle filter.  The
    // wave filter realizing U * particle(delta0) is the exponential product
    //   K_w = exp(-ex p/(2 rt)) exp(rt ep x/2) exp(-s0 x^2/4)
    // evaluated at the conjugate label (ex, ep) = (Re, Im) conj(delta0),
    // rt = sqrt(s0+1).  With K_p the particle ladder map
    // [[sqrt(eta),0],[s0/sqrt(eta),1/sqrt(eta)]] + (0; delta0/sqrt(eta)),
    // U = K_w G K_p^{-1} is unitary for the Fock-diagonal G with
    // w = i sqrt(eta/(1+s0)); eta cancels from the result.
    const double rt = std::sqrt(s0 + 1.0);
    const double eta = 4.0;
    const double re = std::sqrt(eta);
    const cplx w = cplx(0.0, 1.0) * std::sqrt(eta / (1.0 + s0));
    const cplx wave_label = std::conj(delta0);

    CMat sp = CMat::Zero(2, 2); // ladder rep of K_p
    sp(0, 0) = re;
    sp(1, 0) = s0 / re;
    sp(1, 1) = 1.0 / re;
    CVec bp = CVec::Zero(2);
    bp(1) = delta0 / re;

    // ladder rep of K_w from the exponential primitives
    const double cx = rt * wave_label.imag() / 2.0;
    const cplx cp = -wave_label.real() / (2.0 * rt);
    CMat sw(2, 2);
    sw << 1.0 + s0 / 2.0, s0 / 2.0, -s0 / 2.0, 1.0 - s0 / 2.0;
    CVec u(2);
    u(0) = -cx - cplx(0, 1) * cp;
    u(1) = cx - cplx(0, 1) * cp;
    CVec bw = sw * u;

    CMat sp_inv = sp.inverse();
    CMat gamma = CMat::Zero(2, 2);
    gamma(0, 0) = w;
    gamma(1, 1) = 1.0 / w;
    CMat s_rep = sp_inv * gamma * sw;
    CVec b_rep = sp_inv * (gamma * bw - bp);

    // ladder -> quadrature, then rep -> state action
    CMat v(2, 2);
    v << 0.5, cplx(0, 0.5), 0.5, cplx(0, -0.5);
    CMat s_xp = v.inverse() * s_rep * v;
    CVec b_xp = v.inverse() * b_rep;
    if (s_xp.imag().cwiseAbs().maxCoeff() > 1e-9 || b_xp.imag().cwiseAbs().maxCoeff() > 1e-9)
        throw std::logic_error("p_to_w_unitary: non-unitary quotient");
    Mat s_state = s_xp.real().inverse();
    Vec d_state = -s_state * b_xp.real();
    return GaussianUnitary(s_state, d_state);
}

FockVector wave_form(double s0, cplx delta0, int n, int cutoff) {
    FockVector p = particle_form(s0, delta0, n, cutoff);
    return apply_gaussian_unitary_fock(p_to_w_unitary(s0, delta0), p);
}

FockVector apply_gaussian_unitary_fock(const GaussianUnitary& u, const FockVector& v) {
    if (u.modes() != 1) throw std::invalid_argument("apply_gaussian_unitary_fock: single mode only");
    const int nin = v.cutoff();

    // ladder action of U a^dag U^{-1} = mu a^dag + nu a + c0
    const Mat m = u.symplectic.inverse();
    const Vec sh = -m * u.displacement;
    const cplx cx(m(0, 0), -m(1, 0));
    const cplx cp(m(0, 1), -m(1, 1));
    const cplx mu = 0.5 * (cx + cplx(0, 1) * cp);
    const cplx nu = 0.5 * (cx - cplx(0, 1) * cp);
    const cplx c0 = 0.5 * cplx(sh(0), -sh(1));

    int work = std::max(2 * nin + 24, 48);
    for (int attempt = 0;; ++attempt) {
        // U|0> from its Gaussian moments
        GaussianPure g0;
        g0.modes = 1;
        g0.cov = u.symplectic * u.symplectic.transpose();
        g0.mean = u.displacement;
        FockTensor base = gaussian_fock_amplitudes(g0, {work});

        CVec cur = base.amps, next(work + 1);
        CVec out = CVec::Zero(work + 1);
        out += v.amps(0) * cur;
        for (int n = 1; n <= nin; ++n) {
            next.setZero();
            for (int j = 0; j <= work; ++j) {
                const cplx a = cur(j);
                if (a == cplx(0)) continue;
                if (j + 1 <= work) next(j + 1) += mu * std::sqrt(double(j + 1)) * a;
                if (j > 0) next(j - 1) += nu * std::sqrt(double(j)) * a;
                next(j) += c0 * a;
            }
            next /= std::sqrt(double(n));
            cur.swap(next);
            out += v.amps(n) * cur;
        }

        const double loss = std::abs(out.squaredNorm() - v.norm2());
        const double tail = std::norm(out(work)) + (work > 0 ? std::norm(out(work - 1)) : 0.0);
        const double tail_tol = std::min(tail_tolerance(), 1e-12);
        if ((loss < 1e-10 * std::max(1.0, v.norm2()) && tail < tail_tol) || attempt >= 3) {
            if (attempt >= 3 && loss > 1e-6)
                throw std::runtime_error("apply_gaussian_unitary_fock: norm loss above tolerance");
            FockVector res;
            res.amps = std::move(out);
            res.normalized = v.normalized;
            return res;
        }
        work *= 2;
    }
}

double fidelity(const FockVector& u, const FockVector& v) {
    const int n = std::min(u.amps.size(), v.amps.size());
    const cplx ip = u.amps.head(n).dot(v.amps.head(n)); // conjugates u
    return std::norm(ip) / (u.norm2() * v.norm2());
}

double fidelity(const FockTensor& u, const FockTensor& v) {
    if (u.modes() != v.modes()) throw std::invalid_argument("fidelity: mode count mismatch");
    std::vector<int> dims(u.modes());
    for (int i = 0; i < u.modes(); ++i) dims[i] = std::min(u.dims[i], v.dims[i]);
    // common-box inner product
    std::vector<std::int64_t> su(u.modes(), 1), sv(u.modes(), 1);
    for (int i = u.modes() - 2; i >= 0; --i) {
        su[i] = su[i + 1] * u.dims[i + 1];
        sv[i] = sv[i + 1] * v.dims[i + 1];
    }
    std::int64_t total = 1;
    for (int d : dims) total *= d;
    cplx ip = 0;
    std::vector<int> idx(u.modes(), 0);
    for (std::int64_t flat = 0; flat < total; ++flat) {
        std::int64_t iu = 0, iv = 0;
        for (int m = 0; m < u.modes(); ++m) {
            iu += idx[m] * su[m];
            iv += idx[m] * sv[m];
        }
        ip += std::conj(u.amps(iu)) * v.amps(iv);
        int pos = u.modes() - 1;
        if (flat + 1 < total)
            while (++idx[pos] == dims[pos]) {
                idx[pos] = 0;
                --pos;
            }
    }
    return std::norm(ip) / (u.norm2() * v.norm2());
}

namespace {

CVec apply_ladder_x(const CVec& v) {
    const int n = static_cast<int>(v.size());
    CVec out = CVec::Zero(n + 1);
    for (int j = 0; j < n; ++j) {
        if (v(j) == cplx(0)) continue;
        out(j + 1) += std::sqrt(double(j + 1)) * v(j);
        if (j > 0) out(j - 1) += std::sqrt(double(j)) * v(j);
    }
    return out;
}

CVec apply_ladder_p(const CVec& v) {
    const int n = static_cast<int>(v.size());
    CVec out = CVec::Zero(n + 1);
    const cplx i(0, 1);
    for (int j = 0; j < n; ++j) {
        if (v(j) == cplx(0)) continue;
        out(j + 1) += i * std::sqrt(double(j + 1)) * v(j);
        if (j > 0) out(j - 1) += -i * std::sqrt(double(j)) * v(j);
    }
    return out;
}

std::vector<double> moments_impl(const FockVector& v, int max_power, bool use_p) {
    std::vector<double> res;
    CVec cur = v.amps;
    for (int k = 1; k <= max_power; ++k) {
        cur = use_p ? apply_ladder_p(cur) : apply_ladder_x(cur);
        const int n = std::min(cur.size(), v.amps.size());
        res.push_back((v.amps.head(n).dot(cur.head(n))).real() / v.norm2());
    }
    return res;
}

} // namespace

std::vector<double> quadrature_moments_x(const FockVector& v, int max_power) {
    return moments_impl(v, max_power, false);
}

std::vector<double> quadrature_moments_p(const FockVector& v, int max_power) {
    return moments_impl(v, max_power, true);
}

CVec x_wavefunction(const FockVector& v, const Vec& xs) {
    const int n = v.cutoff();
    CVec out = CVec::Zero(xs.size());
    for (int i = 0; i < xs.size(); ++i) {
        const double x = xs(i);
        double phi_prev = 0.0;
        double phi = std::pow(2.0 * kPi, -0.25) * std::exp(-x * x / 4.0);
        cplx acc = v.amps(0) * phi;
        for (int m = 1; m <= n; ++m) {
            const double phi_next = (x * phi - std::sqrt(double(m - 1)) * phi_prev) / std::sqrt(double(m));
            phi_prev = phi;
            phi = phi_next;
            acc += v.amps(m) * phi;
        }
        out(i) = acc;
    }
    return out;
}

CMat displacement_matrix(cplx beta, int n) {
    CMat d(n + 1, n + 1);
    const double b2 = std::norm(beta);
    std::vector<double> lgf(n + 2, 0.0);
    for (int i = 1; i <= n + 1; ++i) lgf[i] = lgf[i - 1] + std::log(double(i));
    // columns by diagonal offset: generalized Laguerre recurrence in the row index
    for (int off = 0; off <= n; ++off) {
        // entries D(m, m-off) (lower triangle incl diag) and D(m-off, m)
        double l_prev = 0.0, l_cur = 1.0; // L_0^{(off)}
        for (int k = 0; k + off <= n; ++k) {
            if (k > 0) {
                const double l_next =
                    ((2 * k - 1 + off - b2) * l_cur - (k - 1 + off) * l_prev) / double(k);
                l_prev = l_cur;
                l_cur = l_next;
            }
            const int mlo = k, mhi = k + off;
            const double mag = std::exp(0.5 * (lgf[mlo] - lgf[mhi]) - 0.5 * b2);
            const cplx bp = std::pow(beta, off);
            d(mhi, mlo) = mag * bp * l_cur;
            if (off > 0) d(mlo, mhi) = mag * std::pow(-std::conj(beta), off) * l_cur;
        }
    }
    return d;
}

namespace {

Mat wigner_impl(const FockVector& v, const Vec& xs, const Vec& ps, bool parallel) {
    const int n = v.cutoff();
    const double inv_norm = 1.0 / v.norm2();
    Mat w(ps.size(), xs.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int ip = 0; ip < ps.size(); ++ip) {
        for (int ix = 0; ix < xs.size(); ++ix) {
            const cplx beta(xs(ix), ps(ip));
            CMat d2 = displacement_matrix(beta, n);
            cplx acc = 0;
            for (int a = 0; a <= n; ++a) {
                if (v.amps(a) == cplx(0)) continue;
                const double sign = (a % 2 == 0) ? 1.0 : -1.0;
                cplx row = 0;
                for (int b = 0; b <= n; ++b) row += std::conj(v.amps(b)) * d2(b, a);
                acc += sign * v.amps(a) * row;
            }
            w(ip, ix) = acc.real() * inv_norm / (2.0 * kPi);
        }
    }
    return w;
}

} // namespace

Mat wigner_grid(const FockVector& v, const Vec& xs, const Vec& ps, bool parallel) {
    return wigner_impl(v, xs, ps, parallel);
}

Mat wigner_grid_serial(const FockVector& v, const Vec& xs, const Vec& ps) {
    return wigner_impl(v, xs, ps, false);
}

} // namespace ngopt
