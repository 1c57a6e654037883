#include "doctest.h"

#include "ngopt/fock.hpp"
#include "ngopt/reduce.hpp"

#include <cmath>

using namespace ngopt;

namespace {

Mat diag2(double a, double b) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

// mean vector realizing a given delta0 in the diagonal frame
Vec2 beta_for_delta0(double cc, double dd, cplx delta0) {
    const double root = std::sqrt(cc * dd - 1.0);
    Vec2 b;
    b(0) = delta0.real() * root / 2.0 / std::sqrt((dd + 1.0) / (cc + 1.0));
    b(1) = -delta0.imag() * root / 2.0 / std::sqrt((cc + 1.0) / (dd + 1.0));
    return b;
}

} // namespace

TEST_CASE("wavefunction helpers") {
    CHECK(turning_point(7) == doctest::Approx(std::sqrt(30.0)).epsilon(1e-14));
    CHECK(largest_root(1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(local_momentum(5, 0.0) == doctest::Approx(std::sqrt(22.0)).epsilon(1e-14));
    // phi_2 ~ (x^2 - 1) exp(-x^2/4) in hbar=2 units: largest zero at x = 1
    CHECK(std::abs(fock_wavefunction(2, largest_root(2))) < 1e-10);
    CHECK(largest_root(2) == doctest::Approx(1.0).epsilon(1e-8));
    // derivative consistent with a finite difference
    const double x = 1.3, h = 1e-6;
    CHECK(fock_wavefunction_deriv(6, x) ==
          doctest::Approx((fock_wavefunction(6, x + h) - fock_wavefunction(6, x - h)) / (2 * h))
              .epsilon(1e-6));
}

TEST_CASE("parity match closed form") {
    auto [k1, d1] = match_parity(15, 5);
    CHECK(k1 == doctest::Approx(std::sqrt(31.0 / 11.0)).epsilon(1e-14));
    CHECK(k1 == doctest::Approx(1.6787).epsilon(1e-4));
    CHECK(d1 == 0.0);
    auto [k2, d2] = match_parity(16, 6);
    CHECK(k2 == doctest::Approx(std::sqrt(33.0 / 13.0)).epsilon(1e-14));
    CHECK(k2 == doctest::Approx(1.5935).epsilon(1e-4));
    auto [k3, d3] = match_parity(9, 9);
    CHECK(k3 == 1.0);
    CHECK_THROWS_AS(match_parity(8, 5), std::invalid_argument);
    (void)d2;
    (void)d3;
}

TEST_CASE("methods recover the closed form at x0 = 0") {
    const int n = 14, np = 6;
    const double k_ref = std::sqrt((2.0 * n + 1.0) / (2.0 * np + 1.0));
    SUBCASE("method 2") {
        auto [k, d] = method2(n, np, 0.0);
        CHECK(k == doctest::Approx(k_ref).epsilon(1e-10));
        CHECK(std::abs(d) < 1e-10);
    }
    SUBCASE("method 1 contains it among candidates") {
        auto cands = method1(n, np, 0.0);
        REQUIRE_FALSE(cands.empty());
        double best = 1e9;
        for (const auto& c : cands) best = std::min(best, std::abs(c.k - k_ref) + std::abs(c.d));
        CHECK(best < 1e-8);
    }
}

TEST_CASE("method 2 beyond the turning point") {
    const int n = 20, np = 7;
    const double x0 = turning_point(n) + 1.0;
    auto [k, d] = method2(n, np, x0);
    CHECK(k > 0.0);
    CHECK(std::isfinite(d));
    // p and p' matched: verify the defining equations
    const double u = k * x0 - d;
    const double p2 = 4.0 * n + 2.0 - x0 * x0;
    const double pt2 = k * k * (4.0 * np + 2.0 - u * u);
    CHECK(p2 == doctest::Approx(pt2).epsilon(1e-8));
    CHECK(x0 == doctest::Approx(k * k * k * u).epsilon(1e-8));
}

TEST_CASE("plan_reduction") {
    SUBCASE("odd cat 15 -> 5") {
        const double s0 = (2.88 - 0.60) / (2.88 * 0.60 - 1.0);
        auto plan = plan_reduction(s0, cplx(0, 0), 15, 5);
        CHECK(plan.method_used == MatchMethod::analytic_parity);
        CHECK(plan.s0_prime == doctest::Approx(s0 * 11.0 / 31.0).epsilon(1e-12));
        CHECK(plan.s0_prime == doctest::Approx(1.11).epsilon(0.005));
        CHECK(std::abs(plan.delta0_prime) < 1e-12);
    }
    SUBCASE("identity when n' = n") {
        auto plan = plan_reduction(2.0, cplx(0, 0), 7, 7);
        CHECK(plan.k == 1.0);
        CHECK(plan.d == 0.0);
        CHECK(plan.s0_prime == 2.0);
    }
    SUBCASE("CPS 20 -> 7 shrinks |delta0| by the method-2 scale") {
        const cplx d0(2.809, 0.0); // canonical Eq.-literal value
        auto plan = plan_reduction(0.0, d0, 20, 7);
        CHECK(plan.method_used == MatchMethod::method2_at_turning);
        const double k_ref = std::pow(41.0 / 15.0, 1.0 / 6.0);
        CHECK(plan.k == doctest::Approx(k_ref).epsilon(1e-10));
        CHECK(plan.s0_prime == 0.0);
        CHECK(std::abs(plan.delta0_prime) == doctest::Approx(std::abs(d0) / k_ref).epsilon(1e-10));
    }
    SUBCASE("s0' < s0 whenever k > 1") {
        for (int np : {5, 9, 13}) {
            auto plan = plan_reduction(3.0, cplx(0, 0), 15, np);
            CHECK(plan.k > 1.0);
            CHECK(plan.s0_prime < 3.0);
        }
    }
}

TEST_CASE("wave-form overlap after the correction unitary") {
    // |<psi^w_{s0,0,n} | U_corr psi^w_{s0',0,n'}>|^2 >= 0.98 in the parity regime
    for (auto [n, np] : std::vector<std::pair<int, int>>{{15, 5}, {16, 6}, {12, 6}, {20, 8}}) {
        const double s0 = 2.5;
        auto plan = plan_reduction(s0, cplx(0, 0), n, np);
        auto w_full = wave_form(s0, cplx(0, 0), n);
        auto w_red = wave_form(plan.s0_prime, plan.delta0_prime, np);
        auto w_corr = apply_gaussian_unitary_fock(plan.correction, w_red);
        CHECK(fidelity(w_full, w_corr) >= 0.98);
    }
}

TEST_CASE("wave-form Choi operator reproduces the purification moments") {
    // J block of Choi(G) must equal the control block, eps its mean.
    for (auto [cc, dd, d0] : std::vector<std::tuple<double, double, cplx>>{
             {2.88, 0.60, cplx(0, 0)},
             {2.2, 0.8, cplx(0.7, -0.4)},
             {1.74, 1.74, cplx(0, 1.2)},
         }) {
        // private helper exercised through build_filter: compare via an
        // identity-plan filter, which must leave moments untouched
        Vec2 bb = beta_for_delta0(cc, dd, d0);
        ControlMoments m(diag2(cc, dd), Vec(bb));
        auto plan = plan_reduction(control_params_single(m.mode_block(0), m.mode_mean(0)).s0,
                                   control_params_single(m.mode_block(0), m.mode_mean(0)).delta0,
                                   9, 9);
        auto m2 = apply_reduction(m, 0, plan);
        CHECK((m2.c - m.c).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((m2.beta - m.beta).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("apply_reduction reproduces the planned parameters") {
    SUBCASE("cat-like block") {
        ControlMoments m(diag2(0.60, 2.88), Vec::Zero(2));
        auto p = control_params_single(m.mode_block(0), m.mode_mean(0));
        auto plan = plan_reduction(p.s0, p.delta0, 15, 5);
        auto m2 = apply_reduction(m, 0, plan);
        auto p2 = control_params_single(m2.mode_block(0), m2.mode_mean(0));
        CHECK(p2.s0 == doctest::Approx(plan.s0_prime).epsilon(1e-6));
        CHECK(std::abs(p2.delta0 - plan.delta0_prime) < 1e-6);
        // symplectic eigenvalue preserved
        auto w = williamson(m2.c);
        CHECK(w.eigenvalues(0) == doctest::Approx(std::sqrt(0.60 * 2.88)).epsilon(1e-8));
    }
    SUBCASE("displaced block via method 2") {
        const double cc = 1.9, dd = 1.9;
        Vec2 bb = beta_for_delta0(cc, dd, cplx(0.0, 2.4));
        ControlMoments m(diag2(cc, dd), Vec(bb));
        auto p = control_params_single(m.mode_block(0), m.mode_mean(0));
        REQUIRE(p.defined);
        auto plan = plan_reduction(p.s0, p.delta0, 18, 7);
        auto m2 = apply_reduction(m, 0, plan);
        auto p2 = control_params_single(m2.mode_block(0), m2.mode_mean(0));
        CHECK(p2.s0 == doctest::Approx(plan.s0_prime).epsilon(1e-6));
        CHECK(std::min(std::abs(p2.delta0 - plan.delta0_prime),
                       std::abs(p2.delta0 + plan.delta0_prime)) < 1e-6);
    }
}

TEST_CASE("two-mode reduction preserves the heralded state") {
    // odd-cat moments, 15 -> 5: herald via the canonical purification before
    // and after the filter; the filter carries its own signal correction
    ControlMoments m(diag2(0.60, 2.88), Vec::Zero(2));
    auto pur = canonical_purification(m.c, m.beta);
    auto before = herald(pur, pur.modes - 1, {15});

    auto p = control_params_single(m.mode_block(0), m.mode_mean(0));
    auto plan = plan_reduction(p.s0, p.delta0, 15, 5);
    auto choi = build_filter(m.mode_block(0), m.mode_mean(0), 15, plan);
    auto [c2, mean2] = apply_map(pur.cov, pur.mean, choi, {pur.modes - 1});
    GaussianPure pur2;
    pur2.modes = pur.modes;
    pur2.cov = c2;
    pur2.mean = mean2;
    CHECK(pur2.is_pure(1e-6));
    auto after = herald(pur2, pur.modes - 1, {5});
    CHECK(fidelity(before.signal, after.signal) >= 0.99);
    CHECK(after.probability > before.probability);
}

TEST_CASE("reduction commutes with a prior control rotation") {
    ControlMoments m(diag2(0.7, 2.4), (Vec(2) << 0.5, -0.2).finished());
    auto pur = canonical_purification(m.c, m.beta);
    const int ctrl = pur.modes - 1;

    auto reduce_then_herald = [&](const GaussianPure& g) {
        auto mm = ControlMoments::from_state(g, g.modes - 1);
        auto p = control_params_single(mm.mode_block(0), mm.mode_mean(0));
        auto plan = plan_reduction(p.s0, p.delta0, 12, 6);
        auto choi = build_filter(mm.mode_block(0), mm.mode_mean(0), 12, plan);
        auto [c2, mean2] = apply_map(g.cov, g.mean, choi, {ctrl});
        GaussianPure g2;
        g2.modes = g.modes;
        g2.cov = c2;
        g2.mean = mean2;
        return herald(g2, g.modes - 1, {6});
    };

    auto base = reduce_then_herald(pur);
    auto rot = GaussianUnitary::embed(GaussianUnitary::rotation(0.9), pur.modes, ctrl);
    auto rotated = reduce_then_herald(rot.apply(pur));
    CHECK(fidelity(base.signal, rotated.signal) >= 1.0 - 1e-6);
}
