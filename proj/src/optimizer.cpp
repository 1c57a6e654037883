#include "ngopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace ngopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double probability_of(const GeneratorSpec& spec, const std::vector<int>& photons,
                      double tail_tol = -1.0) {
    return success_probability(spec.moments.c, spec.moments.beta, photons, std::nullopt, tail_tol);
}

// Nelder-Mead on R^dim, bounded iterations, penalty-aware.
template <typename F>
std::pair<Vec, double> nelder_mead(F f, const Vec& start, double step, int max_iter) {
    const int dim = static_cast<int>(start.size());
    std::vector<Vec> pts(dim + 1, start);
    std::vector<double> val(dim + 1);
    for (int i = 1; i <= dim; ++i) pts[i](i - 1) += step;
    for (int i = 0; i <= dim; ++i) val[i] = f(pts[i]);

    auto order = [&] {
        std::vector<int> idx(dim + 1);
        for (int i = 0; i <= dim; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return val[a] < val[b]; });
        std::vector<Vec> p2(dim + 1);
        std::vector<double> v2(dim + 1);
        for (int i = 0; i <= dim; ++i) {
            p2[i] = pts[idx[i]];
            v2[i] = val[idx[i]];
        }
        pts = std::move(p2);
        val = std::move(v2);
    };

    for (int it = 0; it < max_iter; ++it) {
        order();
        if (std::abs(val[dim] - val[0]) < 1e-10 * (1.0 + std::abs(val[0]))) break;
        Vec centroid = Vec::Zero(dim);
        for (int i = 0; i < dim; ++i) centroid += pts[i];
        centroid /= dim;

        Vec xr = centroid + (centroid - pts[dim]);
        double fr = f(xr);
        if (fr < val[0]) {
            Vec xe = centroid + 2.0 * (centroid - pts[dim]);
            double fe = f(xe);
            if (fe < fr) {
                pts[dim] = xe;
                val[dim] = fe;
            } else {
                pts[dim] = xr;
                val[dim] = fr;
            }
        } else if (fr < val[dim - 1]) {
            pts[dim] = xr;
            val[dim] = fr;
        } else {
            Vec xc = centroid + 0.5 * (pts[dim] - centroid);
            double fc = f(xc);
            if (fc < val[dim]) {
                pts[dim] = xc;
                val[dim] = fc;
            } else {
                for (int i = 1; i <= dim; ++i) {
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                    val[i] = f(pts[i]);
                }
            }
        }
    }
    order();
    return {pts[0], val[0]};
}

} // namespace

GeneratorSpec reduce_photons(const GeneratorSpec& spec, const std::vector<int>& target,
                             std::vector<ReductionPlan>* plans_out,
                             GaussianPure* tracked_state) {
    spec.check_valid();
    const int k = spec.moments.k();
    if (static_cast<int>(target.size()) != k)
        throw std::invalid_argument("reduce_photons: target pattern length mismatch");
    for (int m = 0; m < k; ++m)
        if (target[m] > spec.photons[m])
            throw std::invalid_argument("reduce_photons: target exceeds current photon number");

    GeneratorSpec out = spec;
    for (int m = 0; m < k; ++m) {
        if (target[m] == out.photons[m]) continue;
        auto p = control_params_single(out.moments.mode_block(m), out.moments.mode_mean(m));
        if (!p.defined) {
            std::ostringstream os;
            os << "reduce_photons: control parameters undefined on mode " << m;
            throw std::domain_error(os.str());
        }
        ReductionPlan plan;
        try {
            plan = plan_reduction(p.s0, p.delta0, out.photons[m], target[m]);
            auto choi = build_filter(out.moments.mode_block(m), out.moments.mode_mean(m),
                                     out.photons[m], plan);
            auto [c2, b2] = apply_map(out.moments.c, out.moments.beta, choi, {m});
            out.moments = ControlMoments(std::move(c2), std::move(b2));
            if (tracked_state) {
                const int off = tracked_state->modes - k;
                auto [cf, mf] = apply_map(tracked_state->cov, tracked_state->mean, choi, {off + m});
                tracked_state->cov = std::move(cf);
                tracked_state->mean = std::move(mf);
            }
        } catch (const std::domain_error& e) {
            std::ostringstream os;
            os << "reduce_photons: infeasible reduction on mode " << m << ": " << e.what();
            throw std::domain_error(os.str());
        }
        out.photons[m] = target[m];
        if (plans_out) plans_out->push_back(plan);
    }
    return out;
}

std::pair<GeneratorSpec, std::vector<double>> maximize_probability(
    const GeneratorSpec& spec, const OptimizationOptions& opts) {
    spec.check_valid();
    const int k = spec.moments.k();
    const double p_id = probability_of(spec, spec.photons, opts.search_tail_tol);

    auto eval = [&](const std::vector<double>& t) -> double {
        if (!damping_domain_check(spec.moments.c, t)) return 1e100;
        try {
            ControlMoments m = damping_transform(spec.moments, t);
            if (min_eig_uncertainty(m.c) < -1e-9) return 1e100;
            const double p = success_probability(m.c, m.beta, spec.photons, std::nullopt,
                                                 opts.search_tail_tol);
            return -std::log(std::max(p, 1e-300));
        } catch (const std::exception&) {
            return 1e100;
        }
    };

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto to_t = [&](const Vec& u, const std::vector<int>& signs) {
        std::vector<double> t(k);
        for (int m = 0; m < k; ++m) {
            const double lam = signs[m] * std::exp(u(m));
            t[m] = 1.0 / std::tanh(lam);
        }
        return t;
    };

    double best_obj = -std::log(std::max(p_id, 1e-300));
    std::vector<double> best_t(k, kInf);

    // both uniform sign patterns first (the optimum often sits on the
    // unphysical branch), then random sign/seed restarts; restarts are
    // independent and run concurrently
    const int total_restarts = std::max(2, opts.restarts + 1);
    std::vector<std::vector<int>> all_signs(total_restarts, std::vector<int>(k, 1));
    std::vector<Vec> all_u0(total_restarts, Vec::Constant(k, std::log(0.1)));
    std::vector<bool> ok(total_restarts, false);
    ok[0] = eval(to_t(all_u0[0], all_signs[0])) < 1e99;
    for (int restart = 1; restart < total_restarts; ++restart) {
        auto& signs = all_signs[restart];
        auto& u0 = all_u0[restart];
        for (int tries = 0; tries < 60 && !ok[restart]; ++tries) {
            for (int m = 0; m < k; ++m) {
                signs[m] = (restart == 1) ? -1 : (unif(rng) < 0.4 ? -1 : 1);
                u0(m) = std::log(0.02) + unif(rng) * (std::log(2.0) - std::log(0.02));
            }
            ok[restart] = eval(to_t(u0, signs)) < 1e99;
        }
    }
    std::vector<double> res_obj(total_restarts, 1e100);
    std::vector<Vec> res_u(total_restarts);
#pragma omp parallel for schedule(dynamic)
    for (int restart = 0; restart < total_restarts; ++restart) {
        if (!ok[restart]) continue;
        auto objective = [&](const Vec& u) { return eval(to_t(u, all_signs[restart])); };
        auto [u_best, f_best] = nelder_mead(objective, all_u0[restart], 0.5, 70 * k + 60);
        res_obj[restart] = f_best;
        res_u[restart] = u_best;
    }
    for (int restart = 0; restart < total_restarts; ++restart) {
        if (res_obj[restart] < best_obj) {
            best_obj = res_obj[restart];
            best_t = to_t(res_u[restart], all_signs[restart]);
        }
    }

    // coordinate sweep refinement from the best point (or from scratch when
    // the simplex found nothing)
    {
        std::vector<double> t0 = best_t;
        Vec u(k);
        std::vector<int> signs(k, 1);
        bool usable = true;
        for (int m = 0; m < k; ++m) {
            if (std::isinf(t0[m])) {
                u(m) = std::log(0.05); // near identity
            } else {
                signs[m] = t0[m] > 0 ? 1 : -1;
                const double lam = std::atanh(1.0 / t0[m]) * signs[m];
                if (!(lam > 0)) usable = false;
                u(m) = std::log(std::max(lam, 1e-6));
            }
        }
        if (usable) {
            for (int pass = 0; pass < 1; ++pass) {
                for (int m = 0; m < k; ++m) {
                    double lo = u(m) - 1.5, hi = u(m) + 1.5;
                    for (int it = 0; it < 28; ++it) {
                        const double m1 = lo + 0.382 * (hi - lo), m2 = lo + 0.618 * (hi - lo);
                        Vec ua = u, ub = u;
                        ua(m) = m1;
                        ub(m) = m2;
                        if (eval(to_t(ua, signs)) < eval(to_t(ub, signs)))
                            hi = m2;
                        else
                            lo = m1;
                    }
                    u(m) = 0.5 * (lo + hi);
                }
            }
            const double f = eval(to_t(u, signs));
            if (f < best_obj) {
                best_obj = f;
                best_t = to_t(u, signs);
            }
        }
    }

    GeneratorSpec out = spec;
    bool any_finite = false;
    for (double t : best_t) any_finite = any_finite || !std::isinf(t);
    if (any_finite) {
        // final full-accuracy comparison; keep the identity if not an improvement
        ControlMoments damped = damping_transform(spec.moments, best_t);
        GeneratorSpec cand = spec;
        cand.moments = damped;
        const double p_new = probability_of(cand, cand.photons);
        const double p_old = probability_of(spec, spec.photons);
        if (p_new >= p_old) {
            out = cand;
        } else {
            best_t.assign(k, kInf);
        }
    }
    return {out, best_t};
}

OptimizationReport optimize(const GeneratorSpec& spec, const std::vector<int>& target,
                            const OptimizationOptions& opts, const GaussianPure* full_state) {
    OptimizationReport rep;
    rep.before = spec;
    rep.params_before = control_params_multi(spec.moments);
    rep.p_before = probability_of(spec, spec.photons);

    GaussianPure g = full_state ? *full_state
                                : canonical_purification(spec.moments.c, spec.moments.beta);
    rep.herald_before = herald(g, g.modes - spec.moments.k(), spec.photons, opts.cutoff);

    GaussianPure g_work = g;
    rep.reduced = reduce_photons(spec, target, &rep.plans, &g_work);
    rep.p_reduced = probability_of(rep.reduced, rep.reduced.photons);

    auto [damped, t_star] = maximize_probability(rep.reduced, opts);
    rep.after = damped;
    rep.t_star = t_star;
    rep.p_after = probability_of(rep.after, rep.after.photons);
    rep.params_after = control_params_multi(rep.after.moments);

    // apply the accepted damping to the tracked full state
    std::vector<int> ctrl(spec.moments.k());
    const int off = g_work.modes - spec.moments.k();
    std::vector<int> finite_modes;
    std::vector<double> finite_t;
    for (int m = 0; m < spec.moments.k(); ++m) {
        ctrl[m] = off + m;
        if (!std::isinf(t_star[m])) {
            finite_modes.push_back(off + m);
            finite_t.push_back(t_star[m]);
        }
    }
    if (!finite_modes.empty()) {
        auto [cf, mf] = apply_map(g_work.cov, g_work.mean, damping_choi(finite_t), finite_modes);
        g_work.cov = std::move(cf);
        g_work.mean = std::move(mf);
    }
    rep.herald_after = herald(g_work, g_work.modes - spec.moments.k(), rep.after.photons, opts.cutoff);
    rep.fidelity = fidelity(rep.herald_before.signal, rep.herald_after.signal);
    rep.state_after = std::move(g_work);
    return rep;
}

std::vector<int> choose_targets(const GeneratorSpec& spec, double min_overlap) {
    spec.check_valid();
    const int k = spec.moments.k();
    std::vector<int> target = spec.photons;
    for (int m = 0; m < k; ++m) {
        auto p = control_params_single(spec.moments.mode_block(m), spec.moments.mode_mean(m));
        if (!p.defined) continue;
        const int n = spec.photons[m];
        for (int np = 0; np < n; ++np) {
            try {
                auto plan = plan_reduction(p.s0, p.delta0, n, np);
                auto w_full = wave_form(p.s0, std::conj(p.delta0) / 2.0, n);
                auto w_red =
                    wave_form(plan.s0_prime, std::conj(plan.delta0_prime) / 2.0, np);
                auto w_corr = apply_gaussian_unitary_fock(plan.correction, w_red);
                if (fidelity(w_full, w_corr) >= min_overlap) {
                    target[m] = np;
                    break;
                }
            } catch (const std::exception&) {
            }
        }
    }
    return target;
}

GaussianPure permute_modes(const GaussianPure& g, const std::vector<int>& new_order) {
    const int n = g.modes;
    if (static_cast<int>(new_order.size()) != n)
        throw std::invalid_argument("permute_modes: order length mismatch");
    Mat p = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        p(2 * i, 2 * new_order[i]) = 1.0;
        p(2 * i + 1, 2 * new_order[i] + 1) = 1.0;
    }
    GaussianPure out;
    out.modes = n;
    out.cov = p * g.cov * p.transpose();
    out.mean = p * g.mean;
    return out;
}

} // namespace ngopt
