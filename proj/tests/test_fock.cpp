#include "doctest.h"

#include "ngopt/fock.hpp"

#include <cmath>
#include <random>

using namespace ngopt;

namespace {
double lfact(int n) { return std::lgamma(n + 1.0); }
constexpr double kPi = 3.14159265358979323846;
} // namespace

TEST_CASE("vacuum amplitudes") {
    auto t = gaussian_fock_amplitudes(GaussianPure::vacuum(1), {8});
    CHECK(std::abs(t.amps(0) - cplx(1, 0)) < 1e-12);
    CHECK(t.amps.tail(8).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("TMSS amplitudes match the closed form") {
    for (double a : {1.5, 3.0, 10.0}) {
        auto g = GaussianPure::tmss(a);
        auto t = gaussian_fock_amplitudes(g, {20, 20});
        const double q = (a - 1.0) / (a + 1.0);
        const double c0 = 2.0 * std::sqrt(a) / (a + 1.0);
        for (int j = 0; j <= 20; ++j) {
            const double expect = c0 * std::pow(q, j);
            CHECK(std::abs(t.amps(j * 21 + j) - cplx(expect, 0)) < 1e-10);
            if (j > 0) CHECK(std::abs(t.amps(j * 21)) < 1e-12); // off-diagonal vanishes
        }
    }
}

TEST_CASE("displaced vacuum gives coherent amplitudes") {
    GaussianPure g = GaussianPure::vacuum(1);
    g.mean << 2.0, 0.0; // alpha = 1
    auto t = gaussian_fock_amplitudes(g, {24});
    for (int n = 0; n <= 24; ++n) {
        const double expect = std::exp(-0.5) / std::sqrt(std::exp(lfact(n)));
        CHECK(std::abs(t.amps(n) - cplx(expect, 0)) < 1e-10);
    }
}

TEST_CASE("parallel recurrence matches the serial reference bit for bit") {
    auto g = random_generator(2, 1, 1.0, 0.5, 31);
    std::vector<int> cuts{9, 8, 7};
    auto a = gaussian_fock_amplitudes_serial(g, cuts);
    auto b = gaussian_fock_amplitudes(g, cuts, true);
    CHECK((a.amps - b.amps).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("herald on TMSS") {
    SUBCASE("n=1 gives the Fock state |1> with p = 0.1875") {
        auto res = herald(GaussianPure::tmss(3.0), 1, {1});
        CHECK(res.probability == doctest::Approx(0.1875).epsilon(1e-10));
        CHECK(std::abs(res.signal.amps(1)) == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("n=0 gives vacuum with p = 4a/(a+1)^2") {
        for (double a : {1.5, 3.0, 10.0}) {
            auto res = herald(GaussianPure::tmss(a), 1, {0});
            CHECK(res.probability == doctest::Approx(4 * a / ((a + 1) * (a + 1))).epsilon(1e-10));
            CHECK(std::abs(res.signal.amps(0)) == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
    SUBCASE("herald probabilities match the TMSS closed form") {
        for (double a : {1.5, 3.0, 10.0}) {
            auto g = GaussianPure::tmss(a);
            const double q = (a - 1.0) / (a + 1.0);
            for (int n : {2, 5, 9}) {
                auto res = herald(g, 1, {n});
                const double expect = 4 * a / ((a + 1) * (a + 1)) * std::pow(q, 2 * n);
                CHECK(res.probability == doctest::Approx(expect).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("success probability equals the herald probability") {
    SUBCASE("TMSS control block closed form") {
        for (double a : {2.0, 4.0}) {
            const double nu = (a * a + 1) / (2 * a);
            Mat c = nu * Mat::Identity(2, 2);
            const double q = (a - 1) / (a + 1);
            for (int n : {0, 1, 3}) {
                const double p = success_probability(c, Vec::Zero(2), {n});
                const double expect = 4 * a / ((a + 1) * (a + 1)) * std::pow(q, 2 * n);
                CHECK(p == doctest::Approx(expect).epsilon(1e-9));
            }
        }
    }
    SUBCASE("vacuum moments, n = 0") {
        CHECK(success_probability(Mat::Identity(2, 2), Vec::Zero(2), {0}) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("dual oracle on random two-mode generators") {
        for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u}) {
            auto g = random_generator(1, 1, 1.0, 0.5, seed);
            for (int n : {0, 2}) {
                auto h = herald(g, 1, {n});
                const double p2 = success_probability(g.cov.bottomRightCorner(2, 2),
                                                      g.mean.tail(2), {n});
                CHECK(p2 == doctest::Approx(h.probability).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("particle form") {
    SUBCASE("n=1 with delta0") {
        auto v = particle_form(0.0, cplx(0.5, 0.0), 1);
        CHECK(std::abs(v.amps(0) / v.amps(1) - cplx(0.5, 0)) < 1e-12);
    }
    SUBCASE("n=2 critical") {
        auto v = particle_form(1.0, cplx(0, 0), 2);
        CHECK(std::abs(v.amps(2) / v.amps(0) - cplx(std::sqrt(2.0), 0)) < 1e-12);
        CHECK(v.norm2() == doctest::Approx(1.0));
        CHECK(std::abs(v.amps(1)) < 1e-14);
    }
    SUBCASE("coefficient ratio identities") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 50; ++i) {
            const double s0 = 3.0 * u(rng);
            const cplx d0(u(rng) - 0.3, u(rng) - 0.5);
            const int n = 2 + static_cast<int>(u(rng) * 7); // up to 8
            auto v = particle_form(s0, d0, n);
            const cplx r1 = v.amps(n - 1) / v.amps(n);
            const cplx r2 = v.amps(n - 2) / v.amps(n);
            CHECK(std::abs(r1 - d0 * std::sqrt(double(n))) < 1e-8);
            CHECK(std::abs(r2 - (s0 + d0 * d0) * std::sqrt(double(n) * (n - 1)) / 2.0) < 1e-8);
        }
    }
    SUBCASE("support ends exactly at n") {
        auto v = particle_form(1.7, cplx(0.2, 0.1), 5, 12);
        for (int m = 6; m <= 12; ++m) CHECK(std::abs(v.amps(m)) < 1e-14);
    }
}

TEST_CASE("apply_gaussian_unitary_fock") {
    SUBCASE("identity") {
        auto v = particle_form(1.0, cplx(0, 0), 3);
        auto w = apply_gaussian_unitary_fock(GaussianUnitary::identity(1), v);
        CHECK(fidelity(v, w) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("displacement of vacuum gives a coherent state") {
        FockVector vac;
        vac.amps = CVec::Zero(1);
        vac.amps(0) = 1.0;
        Vec d(2);
        d << 2.0, 0.0; // alpha = 1
        auto w = apply_gaussian_unitary_fock(GaussianUnitary::displace(d), vac);
        for (int n = 0; n < 10; ++n) {
            const double expect = std::exp(-0.5) / std::sqrt(std::exp(lfact(n)));
            CHECK(std::abs(std::abs(w.amps(n)) - expect) < 1e-9);
        }
    }
    SUBCASE("squeezed vacuum has even support only") {
        FockVector vac;
        vac.amps = CVec::Zero(1);
        vac.amps(0) = 1.0;
        auto w = apply_gaussian_unitary_fock(GaussianUnitary::squeezer(0.5), vac);
        for (int n = 1; n < static_cast<int>(w.amps.size()); n += 2)
            CHECK(std::abs(w.amps(n)) < 1e-12);
        CHECK(w.norm2() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("wave form") {
    SUBCASE("s0 = 0, delta0 = 0 is |n> up to phase") {
        auto w = wave_form(0.0, cplx(0, 0), 4);
        CHECK(std::abs(w.amps(4)) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("x-wavefunction is phi_n(x) exp(-s0 x^2 / 4) for delta0 = 0") {
        const double s0 = 1.3;
        const int n = 5;
        auto w = wave_form(s0, cplx(0, 0), n);
        Vec xs(7);
        xs << -2.3, -1.1, -0.4, 0.2, 0.9, 1.7, 2.6;
        CVec psi = x_wavefunction(w, xs);
        auto phi_n = [&](double x) {
            double prev = 0.0, cur = std::pow(2 * kPi, -0.25) * std::exp(-x * x / 4);
            for (int m = 1; m <= n; ++m) {
                double next = (x * cur - std::sqrt(m - 1.0) * prev) / std::sqrt(double(m));
                prev = cur;
                cur = next;
            }
            return cur;
        };
        const cplx scale = psi(0) / (phi_n(xs(0)) * std::exp(-s0 * xs(0) * xs(0) / 4));
        for (int i = 1; i < xs.size(); ++i) {
            const double ref = phi_n(xs(i)) * std::exp(-s0 * xs(i) * xs(i) / 4);
            CHECK(std::abs(psi(i) - scale * ref) < 1e-7);
        }
    }
    SUBCASE("unitary relation holds by construction") {
        const double s0 = 0.8;
        const cplx d0(0.4, -0.3);
        auto p = particle_form(s0, d0, 4);
        auto w = wave_form(s0, d0, 4);
        auto w2 = apply_gaussian_unitary_fock(p_to_w_unitary(s0, d0), p);
        CHECK(fidelity(w, w2) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("quadrature moments") {
    SUBCASE("<x^2> of |n> is 2n+1") {
        for (int n : {0, 1, 4, 9}) {
            FockVector v;
            v.amps = CVec::Zero(n + 1);
            v.amps(n) = 1.0;
            auto mx = quadrature_moments_x(v, 2);
            CHECK(mx[1] == doctest::Approx(2.0 * n + 1.0).epsilon(1e-12));
            auto mp = quadrature_moments_p(v, 2);
            CHECK(mp[1] == doctest::Approx(2.0 * n + 1.0).epsilon(1e-12));
        }
    }
    SUBCASE("<x^4> of vacuum is 3") {
        FockVector v;
        v.amps = CVec::Zero(1);
        v.amps(0) = 1.0;
        auto mx = quadrature_moments_x(v, 4);
        CHECK(mx[3] == doctest::Approx(3.0).epsilon(1e-12));
    }
}

TEST_CASE("fidelity basics") {
    auto v = particle_form(1.2, cplx(0.3, 0.1), 6);
    CHECK(fidelity(v, v) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("wigner grid") {
    FockVector vac;
    vac.amps = CVec::Zero(1);
    vac.amps(0) = 1.0;
    Vec xs = Vec::LinSpaced(61, -5.0, 5.0);
    Vec ps = Vec::LinSpaced(61, -5.0, 5.0);
    Mat w = wigner_grid(vac, xs, ps);
    CHECK(w(30, 30) == doctest::Approx(1.0 / (2 * kPi)).epsilon(1e-10));
    const double dx = xs(1) - xs(0);
    CHECK(w.sum() * dx * dx == doctest::Approx(1.0).epsilon(0.02));

    SUBCASE("|1> at the origin is -1/(2pi)") {
        FockVector one;
        one.amps = CVec::Zero(2);
        one.amps(1) = 1.0;
        Vec origin(1);
        origin << 0.0;
        Mat w1 = wigner_grid(one, origin, origin);
        CHECK(w1(0, 0) == doctest::Approx(-1.0 / (2 * kPi)).epsilon(1e-10));
    }
    SUBCASE("parallel equals serial") {
        auto v = particle_form(1.5, cplx(0, 0), 7);
        Vec g = Vec::LinSpaced(21, -4.0, 4.0);
        Mat a = wigner_grid(v, g, g, true);
        Mat b = wigner_grid_serial(v, g, g);
        CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("displacement matrix is unitary and reduces to coherent column") {
    const cplx beta(0.7, -0.4);
    CMat d = displacement_matrix(beta, 40);
    // unitarity away from the truncation edge
    CHECK((d.adjoint() * d - CMat::Identity(41, 41)).topLeftCorner(16, 16).cwiseAbs().maxCoeff() <
          1e-10);
    for (int n = 0; n < 8; ++n) {
        const double expect = std::exp(-0.5 * std::norm(beta)) * std::pow(std::abs(beta), n) /
                              std::sqrt(std::exp(lfact(n)));
        CHECK(std::abs(std::abs(d(n, 0)) - expect) < 1e-12);
    }
}
