#include "doctest.h"

#include "ngopt/control.hpp"
#include "ngopt/fock.hpp"

#include <cmath>
#include <random>

using namespace ngopt;

namespace {

Mat diag2(double a, double b) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

ControlMoments random_moments(std::mt19937_64& rng, int k = 1) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto g = random_generator(k, k, 1.0, 0.5, rng());
    return ControlMoments::from_state(g, k);
}

double delta_dist(cplx a, cplx b) { return std::min(std::abs(a - b), std::abs(a + b)); }

} // namespace

TEST_CASE("single-mode control parameters") {
    SUBCASE("odd-cat original block") {
        auto p = control_params_single(diag2(2.88, 0.60), Vec2::Zero());
        CHECK(p.defined);
        CHECK(p.s0 == doctest::Approx((2.88 - 0.60) / (2.88 * 0.60 - 1.0)).epsilon(1e-12));
        CHECK(p.s0 == doctest::Approx(3.13).epsilon(0.01));
        CHECK(std::abs(p.delta0) < 1e-12);
    }
    SUBCASE("odd-cat final block") {
        auto p = control_params_single(diag2(21.09, 0.91), Vec2::Zero());
        CHECK(p.s0 == doctest::Approx(1.11).epsilon(0.01));
    }
    SUBCASE("TMSS block has s0 = 0") {
        auto p = control_params_single(3.0 * Mat2::Identity(), Vec2::Zero());
        CHECK(p.s0 == doctest::Approx(0.0));
        CHECK(std::abs(p.delta0) < 1e-12);
    }
    SUBCASE("pure uncorrelated mode is undefined") {
        auto p = control_params_single(diag2(2.0, 0.5), Vec2::Zero());
        CHECK_FALSE(p.defined);
    }
    SUBCASE("CPS block: Eq.-literal delta0 is real with magnitude ~2.81") {
        Vec2 b;
        b << 2.0, 0.0;
        auto p = control_params_single(1.74 * Mat2::Identity(), b);
        CHECK(p.s0 == doctest::Approx(0.0).epsilon(1e-10));
        CHECK(p.delta0.real() == doctest::Approx(4.0 / std::sqrt(1.74 * 1.74 - 1.0)).epsilon(1e-10));
        CHECK(p.delta0.real() == doctest::Approx(2.81).epsilon(0.01));
        CHECK(std::abs(p.delta0.imag()) < 1e-12);
    }
}

TEST_CASE("multi-mode parameters use raw diagonal blocks") {
    // GKP-style per-mode blocks
    Mat c = Mat::Zero(4, 4);
    c.topLeftCorner(2, 2) = diag2(0.45, 5.47);
    c.bottomRightCorner(2, 2) = diag2(0.89, 25.12);
    ControlMoments m(c, Vec::Zero(4));
    auto p = control_params_multi(m);
    CHECK(p.mode[0].s0 == doctest::Approx(3.43).epsilon(0.005));
    CHECK(p.mode[1].s0 == doctest::Approx(1.135).epsilon(0.01));
}

TEST_CASE("rotation transform") {
    SUBCASE("theta = 0 is the identity") {
        std::mt19937_64 rng(2);
        auto m = random_moments(rng);
        auto m2 = rotation_transform(m, {0.0});
        CHECK((m2.c - m.c).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("pi/2 swaps the diagonal") {
        ControlMoments m(diag2(0.60, 2.88), Vec::Zero(2));
        auto m2 = rotation_transform(m, {M_PI / 2});
        CHECK((m2.c - diag2(2.88, 0.60)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("damping transform") {
    SUBCASE("closed form and Cayley route agree") {
        ControlMoments m(3.0 * Mat::Identity(2, 2), (Vec(2) << 0.4, -0.6).finished());
        auto md = damping_transform(m, {2.0});
        CHECK((md.c - 1.4 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
        // Cayley route: Ct' = sqrt(Tt) Ct sqrt(Tt), bt' = sqrt(Tt) bt
        Mat ct;
        Vec bt;
        cayley(m.c, m.beta, ct, bt);
        const double tt = (2.0 - 1.0) / (2.0 + 1.0);
        Mat ct2 = tt * ct;
        Vec bt2 = std::sqrt(tt) * bt;
        Mat c_ref;
        Vec b_ref;
        inverse_cayley(ct2, bt2, c_ref, b_ref);
        CHECK((md.c - c_ref).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((md.beta - b_ref).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("t to infinity is the identity") {
        std::mt19937_64 rng(3);
        auto m = random_moments(rng);
        auto m2 = damping_transform(m, {std::numeric_limits<double>::infinity()});
        CHECK((m2.c - m.c).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("parameters invariant under damping and rotation, 200 draws") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        int checked = 0;
        while (checked < 200) {
            auto m = random_moments(rng);
            auto p0 = control_params_single(m.mode_block(0), m.mode_mean(0));
            if (!p0.defined) continue;
            const double theta = 2 * M_PI * u(rng);
            double t = 1.0 + 0.2 + 3.0 * u(rng);
            if (u(rng) < 0.3) t = -t; // try the unphysical branch too
            if (!damping_domain_check(m.c, {t})) continue;
            auto m2 = damping_transform(rotation_transform(m, {theta}), {t});
            auto p2 = control_params_single(m2.mode_block(0), m2.mode_mean(0));
            REQUIRE(p2.defined);
            CHECK(std::abs(p2.s0 - p0.s0) < 1e-8);
            CHECK(delta_dist(p2.delta0, p0.delta0) < 1e-8);
            ++checked;
        }
    }
}

TEST_CASE("damping domain check") {
    Mat c = 3.0 * Mat::Identity(2, 2);
    CHECK(damping_domain_check(c, {2.0}));
    CHECK_FALSE(damping_domain_check(c, {0.5}));
    CHECK_FALSE(damping_domain_check(c, {-2.0})); // needs t < -3
    CHECK(damping_domain_check(c, {-4.0}));
}

TEST_CASE("invariant parameters") {
    SUBCASE("k = 1 equals the single-mode parameters") {
        std::mt19937_64 rng(9);
        auto g = random_generator(1, 1, 1.0, 0.5, 55);
        auto m = ControlMoments::from_state(g, 1);
        auto p_raw = control_params_single(m.mode_block(0), m.mode_mean(0));
        auto p_inv = invariant_control_params(g, 1, 0);
        if (p_raw.defined) {
            CHECK(std::abs(p_inv.s0 - p_raw.s0) < 1e-9);
            CHECK(delta_dist(p_inv.delta0, p_raw.delta0) < 1e-9);
        }
        (void)rng;
    }
    SUBCASE("invariant under damping applied to the other modes") {
        auto g = random_generator(1, 2, 1.0, 0.3, 21);
        auto p0 = invariant_control_params(g, 1, 0);
        // damp control mode 1 (the second control mode) of the full state
        auto choi = damping_choi({1.8});
        auto [c2, m2] = apply_map(g.cov, g.mean, choi, {2});
        GaussianPure g2;
        g2.modes = 3;
        g2.cov = c2;
        g2.mean = m2;
        auto p1 = invariant_control_params(g2, 1, 0);
        REQUIRE(p0.defined);
        REQUIRE(p1.defined);
        CHECK(std::abs(p1.s0 - p0.s0) < 1e-8);
        CHECK(delta_dist(p1.delta0, p0.delta0) < 1e-8);
    }
}

TEST_CASE("classification") {
    SUBCASE("odd cat at s0 = 1.11") {
        auto r = classify(1.11, cplx(0, 0), 5);
        CHECK(r.regime == Regime::subtracted);
        REQUIRE(r.cat_amplitude.has_value());
        CHECK(*r.cat_amplitude == doctest::Approx(std::sqrt(5.5 / 1.11)).epsilon(1e-12));
        CHECK(*r.cat_amplitude == doctest::Approx(2.226).epsilon(1e-3));
        CHECK(*r.cat_parity == -1);
    }
    SUBCASE("fock regime") {
        auto r = classify(0.0, cplx(0, 0), 4);
        CHECK(r.fock_state);
        CHECK(r.regime == Regime::added);
    }
    SUBCASE("critical with amplitude sqrt(n+1/2)") {
        auto r = classify(1.0, cplx(0, 0), 6);
        CHECK(r.regime == Regime::critical);
        CHECK(*r.cat_amplitude == doctest::Approx(std::sqrt(6.5)).epsilon(1e-12));
        CHECK(*r.cat_parity == 1);
    }
    SUBCASE("CPS parameters") {
        auto r = classify(0.0, cplx(0, 1.2), 20);
        REQUIRE(r.cps_p0.has_value());
        CHECK(*r.cps_p0 == doctest::Approx(2.0 * std::sqrt(20.5)).epsilon(1e-12));
        CHECK(*r.cps_gamma == doctest::Approx(1.0 / (24.0 * std::sqrt(20.5))).epsilon(1e-12));
    }
    SUBCASE("cat amplitude matches a Fock-engine fit within 5% for n >= 6") {
        for (double s0 : {1.0, 1.5}) {
            for (int n : {6, 8}) {
                auto w = wave_form(s0, cplx(0, 0), n);
                auto r = classify(s0, cplx(0, 0), n);
                // fit: maximize fidelity to squeezed cat(i alpha) over alpha
                auto cat_fid = [&](double alpha) {
                    const int cut = w.cutoff();
                    FockVector plus;  // coherent(i alpha) +- coherent(-i alpha)
                    plus.amps = CVec::Zero(cut + 1);
                    for (int m = 0; m <= cut; ++m) {
                        const double mag =
                            std::exp(-0.5 * alpha * alpha + m * std::log(alpha) -
                                     0.5 * std::lgamma(m + 1.0));
                        const cplx im_pow = std::pow(cplx(0, 1), m);
                        plus.amps(m) = im_pow * mag * (1.0 + ((n + m) % 2 == 0 ? 1.0 : -1.0));
                    }
                    // squeeze x -> x/sqrt(s0) as in the classification map
                    auto sq = GaussianUnitary::squeezer(0.5 * std::log(s0));
                    auto cat = apply_gaussian_unitary_fock(sq, plus);
                    return fidelity(w, cat);
                };
                double best_a = 0, best_f = -1;
                for (double a = 0.5 * *r.cat_amplitude; a < 2.0 * *r.cat_amplitude; a += 0.01) {
                    const double f = cat_fid(a);
                    if (f > best_f) {
                        best_f = f;
                        best_a = a;
                    }
                }
                CHECK(std::abs(best_a - *r.cat_amplitude) / *r.cat_amplitude < 0.05);
            }
        }
    }
}

TEST_CASE("convertibility") {
    SUBCASE("moments to themselves") {
        std::mt19937_64 rng(31);
        auto m = random_moments(rng);
        CHECK(convertible(m, m));
    }
    SUBCASE("parameter form") {
        CHECK(convertible_params(0.5, cplx(0, 0), 3.0, cplx(0.2, 0), 4));
        CHECK_FALSE(convertible_params(2.0, cplx(0, 0), 1.5, cplx(0, 0), 4));
        CHECK(convertible_params(2.0, cplx(0, 0), 2.5, cplx(0, 0), 4));
        CHECK(convertible_params(1.0, cplx(0, 0.4), 1.0, cplx(0, 0.9), 4));
        CHECK_THROWS_AS(convertible_params(2.0, cplx(0, 0), 1.5, cplx(0, 0), 1),
                        std::invalid_argument);
    }
    SUBCASE("strict monotone failure in moments") {
        // C' has a direction strictly above C: not convertible
        ControlMoments a(diag2(2.0, 1.2), Vec::Zero(2));
        ControlMoments b(diag2(2.5, 1.1), Vec::Zero(2));
        CHECK_FALSE(convertible(a, b));
    }
}
