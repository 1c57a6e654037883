#include "ngopt/scenarios.hpp"

#include "json.hpp" // vendored nlohmann/json

#include <omp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace ngopt {

using ordered_json = nlohmann::ordered_json;

double db_to_rnat(double r_db) { return r_db * std::log(10.0) / 20.0; }

namespace {

// two-mode generalized-photon-subtraction stage: squeezed pair through a
// beamsplitter of reflectance R, signal = mode 0, control = mode 1
GaussianPure gps_stage(double r1_db, double r2_db, double reflectance) {
    auto g = GaussianPure::vacuum(2);
    // r > 0 dB means the x variance of that input is 10^{r/10}
    auto sq0 = GaussianUnitary::embed(GaussianUnitary::squeezer(-db_to_rnat(r1_db)), 2, 0);
    auto sq1 = GaussianUnitary::embed(GaussianUnitary::squeezer(-db_to_rnat(r2_db)), 2, 1);
    auto bs = GaussianUnitary::beamsplitter(2, 0, 1, reflectance);
    return bs.apply(sq1.apply(sq0.apply(g)));
}

Scenario make_cat(bool odd) {
    Scenario s;
    s.full_state = gps_stage(5.0, -5.0, 0.10);
    // orient the output so the cat peaks lie along x (the x^2-squeezing frame)
    s.full_state =
        GaussianUnitary::embed(GaussianUnitary::rotation(M_PI / 2), 2, 0).apply(s.full_state);
    s.spec.moments = ControlMoments::from_state(s.full_state, 1);
    s.spec.signal_modes = 1;
    s.spec.signal_unitary = GaussianUnitary::identity(1);
    s.spec.photons = {odd ? 15 : 16};
    s.default_target = {odd ? 5 : 6};
    s.metric = "cat";
    return s;
}

Scenario make_cps() {
    Scenario s;
    GaussianPure g = gps_stage(5.0, -5.0, 0.50);
    // displacements applied after the beamsplitter; alpha_2 = 1 on the control
    // mode, alpha_1 = 3.40 centers the heralded output
    Vec d(4);
    d << -2.0 * 3.40, 0.0, 2.0 * 1.00, 0.0;
    g = GaussianUnitary::displace(d).apply(g);
    // orient the output so the parabolic structure sits as p versus x^2
    s.full_state = GaussianUnitary::embed(GaussianUnitary::rotation(M_PI / 2), 2, 0).apply(g);
    s.spec.moments = ControlMoments::from_state(s.full_state, 1);
    s.spec.signal_modes = 1;
    s.spec.signal_unitary = GaussianUnitary::identity(1);
    s.spec.photons = {20};
    s.default_target = {7};
    s.metric = "cps";
    return s;
}

Scenario make_random(std::uint64_t seed) {
    Scenario s;
    s.full_state = random_generator(3, 4, 1.0, 0.5, seed);
    s.spec.moments = ControlMoments::from_state(s.full_state, 3);
    s.spec.signal_modes = 3;
    s.spec.signal_unitary = GaussianUnitary::identity(3);
    s.spec.photons = {3, 3, 3, 3};
    s.default_target = choose_targets(s.spec);
    s.metric = "";
    return s;
}

Scenario make_custom(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("custom scenario: cannot open " + file);
    ordered_json j = ordered_json::parse(in);
    const std::string ordering = j.value("ordering", "block");
    const int l = j.at("signal_modes").get<int>();
    std::vector<int> photons = j.at("photons").get<std::vector<int>>();
    const int k = static_cast<int>(photons.size());
    Mat c(2 * k, 2 * k);
    auto rows = j.at("C");
    for (int i = 0; i < 2 * k; ++i)
        for (int q = 0; q < 2 * k; ++q) c(i, q) = rows.at(i).at(q).get<double>();
    Vec beta = Vec::Zero(2 * k);
    if (j.contains("beta"))
        for (int i = 0; i < 2 * k; ++i) beta(i) = j.at("beta").at(i).get<double>();
    if (ordering == "block") {
        c = interleaved_from_block(c);
        beta = interleaved_from_block(beta);
    } else if (ordering != "interleaved") {
        throw std::runtime_error("custom scenario: ordering must be block or interleaved");
    }
    Scenario s;
    s.spec.moments = ControlMoments(c, beta);
    s.spec.photons = photons;
    s.spec.signal_modes = l;
    s.spec.signal_unitary = GaussianUnitary::identity(l);
    s.full_state = canonical_purification(c, beta);
    // canonical purification may use fewer signal modes than requested; that
    // only changes Gaussian-unitary freedom, not the report quantities
    s.spec.signal_modes = s.full_state.modes - k;
    s.default_target = photons;
    s.metric = j.value("metric", "");
    return s;
}

} // namespace

Scenario build_gkp_breeding(double cat_s0, int photons) {
    // solve the cat-stage reflectance for the requested s0 at r = 8 dB
    const double r = db_to_rnat(8.0);
    const double z = std::exp(2.0 * r);
    auto s0_of = [&](double refl) {
        const double vx = refl * z + (1.0 - refl) / z;
        const double vp = refl / z + (1.0 - refl) * z;
        const double cc = std::max(vx, vp), dd = std::min(vx, vp);
        return (cc - dd) / (cc * dd - 1.0);
    };
    double lo = 1e-4, hi = 0.5 - 1e-9;
    // s0 decreases towards 0 at R = 1/2 and grows without bound as R -> 0
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (s0_of(mid) > cat_s0)
            lo = mid;
        else
            hi = mid;
    }
    const double refl = 0.5 * (lo + hi);

    // three cat pairs (s_i, c_i) in mode order s0,c0,s1,c1,s2,c2
    GaussianPure g = GaussianPure::vacuum(6);
    for (int i = 0; i < 3; ++i) {
        auto sqs = GaussianUnitary::embed(GaussianUnitary::squeezer(-r), 6, 2 * i);
        auto sqc = GaussianUnitary::embed(GaussianUnitary::squeezer(r), 6, 2 * i + 1);
        g = sqc.apply(sqs.apply(g));
        g = GaussianUnitary::beamsplitter(6, 2 * i, 2 * i + 1, refl).apply(g);
    }
    // breed the signal arms: (s0,s1) at R=1/2 combining into s1, then (s1,s2)
    // at R=1/3 combining into s1; condition the leftover arms on x = 0
    g = GaussianUnitary::beamsplitter(6, 0, 2, 0.5).apply(g);
    g = GaussianUnitary::beamsplitter(6, 2, 4, 1.0 / 3.0).apply(g);
    g = condition_homodyne_x(g, 4, 0.0); // drop s2 slot
    g = condition_homodyne_x(g, 0, 0.0); // drop s0 slot
    // remaining order: (c0, s1, c1, c2) -> reorder to signal-first
    g = permute_modes(g, {1, 0, 2, 3});

    Scenario s;
    s.full_state = g;
    s.spec.moments = ControlMoments::from_state(g, 1);
    s.spec.signal_modes = 1;
    s.spec.signal_unitary = GaussianUnitary::identity(1);
    s.spec.photons = {photons, photons, photons};
    s.default_target = {photons / 3, photons / 3, photons / 3};
    s.metric = "gkp";
    std::ostringstream os;
    os << "breeding of three cat states with s0 = " << cat_s0 << " (r = 8.00 dB, R = " << refl
       << "); the 18-per-mode pattern reproduces the published probability row, the appendix"
       << " table prints 20 -> 7 for the same values";
    s.notes = os.str();
    return s;
}

Scenario build_scenario(const ScenarioConfig& config) {
    if (config.scenario == "cat-odd") return make_cat(true);
    if (config.scenario == "cat-even") return make_cat(false);
    if (config.scenario == "cps") return make_cps();
    if (config.scenario == "gkp") return build_gkp_breeding(1.0, 18);
    if (config.scenario == "random") return make_random(config.seed);
    if (config.scenario == "custom") return make_custom(config.custom_file);
    throw std::invalid_argument("unknown scenario: " + config.scenario);
}

namespace {

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

ordered_json vec_json(const Vec& v) {
    ordered_json a = ordered_json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(fmt_double(v(i)));
    return a;
}

ordered_json mat_json(const Mat& m) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(fmt_double(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

ordered_json spec_json(const GeneratorSpec& s) {
    ordered_json j;
    j["photons"] = s.photons;
    j["signal_modes"] = s.signal_modes;
    j["C"] = mat_json(s.moments.c);
    j["beta"] = vec_json(s.moments.beta);
    return j;
}

ordered_json params_json_of(const ControlParams& p) {
    ordered_json arr = ordered_json::array();
    for (const auto& m : p.mode) {
        ordered_json j;
        j["defined"] = m.defined;
        j["s0"] = fmt_double(m.defined ? m.s0 : 0.0);
        j["delta0_re"] = fmt_double(m.defined ? m.delta0.real() : 0.0);
        j["delta0_im"] = fmt_double(m.defined ? m.delta0.imag() : 0.0);
        arr.push_back(j);
    }
    return arr;
}

void write_wigner_csv(const std::string& path, const FockVector& v) {
    // grid extent from the second moments
    auto mx = quadrature_moments_x(v, 2);
    auto mp = quadrature_moments_p(v, 2);
    const double sx = std::sqrt(std::max(mx[1] - mx[0] * mx[0], 1.0));
    const double sp = std::sqrt(std::max(mp[1] - mp[0] * mp[0], 1.0));
    const double ex = std::abs(mx[0]) + 4.5 * sx;
    const double ep = std::abs(mp[0]) + 4.5 * sp;
    const int npts = 161;
    Vec xs = Vec::LinSpaced(npts, -ex, ex);
    Vec ps = Vec::LinSpaced(npts, -ep, ep);
    Mat w = wigner_grid(v, xs, ps);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(10);
    for (int i = 0; i < npts; ++i) out << "," << xs(i);
    out << "\n";
    for (int ip = 0; ip < npts; ++ip) {
        out << ps(ip);
        for (int ix = 0; ix < npts; ++ix) out << "," << w(ip, ix);
        out << "\n";
    }
}

std::string photons_str(const std::vector<int>& n) {
    std::ostringstream os;
    for (size_t i = 0; i < n.size(); ++i) os << (i ? "," : "") << n[i];
    return os.str();
}

} // namespace

std::string report_to_json(const OptimizationReport& rep, const std::string& metric,
                           double xi_before, double xi_after, const std::string& notes) {
    ordered_json j;
    j["before"] = spec_json(rep.before);
    j["reduced"] = spec_json(rep.reduced);
    j["after"] = spec_json(rep.after);
    j["p_before"] = fmt_double(rep.p_before);
    j["p_reduced"] = fmt_double(rep.p_reduced);
    j["p_after"] = fmt_double(rep.p_after);
    j["fidelity"] = fmt_double(rep.fidelity);
    j["params_before"] = params_json_of(rep.params_before);
    j["params_after"] = params_json_of(rep.params_after);
    ordered_json plans = ordered_json::array();
    for (const auto& p : rep.plans) {
        ordered_json pj;
        pj["n"] = p.n;
        pj["n_prime"] = p.n_prime;
        pj["k"] = fmt_double(p.k);
        pj["d"] = fmt_double(p.d);
        pj["s0_prime"] = fmt_double(p.s0_prime);
        pj["delta0_prime_re"] = fmt_double(p.delta0_prime.real());
        pj["delta0_prime_im"] = fmt_double(p.delta0_prime.imag());
        const char* names[] = {"analytic-parity", "method1", "method2", "method2-at-turning"};
        pj["method"] = names[static_cast<int>(p.method_used)];
        plans.push_back(pj);
    }
    j["plans"] = plans;
    ordered_json ts = ordered_json::array();
    for (double t : rep.t_star) ts.push_back(std::isinf(t) ? "inf" : fmt_double(t));
    j["t_star"] = ts;
    j["metric"] = metric;
    if (!metric.empty()) {
        j["xi_before"] = fmt_double(xi_before);
        j["xi_after"] = fmt_double(xi_after);
    }
    if (!notes.empty()) j["notes"] = notes;
    return j.dump(2) + "\n";
}

std::string reemit_report_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    return j.dump(2) + "\n";
}

int run_scenario(const ScenarioConfig& config) {
    if (config.jobs > 0) omp_set_num_threads(config.jobs);
    Scenario sc;
    OptimizationReport rep;
    try {
        sc = build_scenario(config);
        std::vector<int> target = config.target;
        if (target.empty()) target = sc.default_target;
        if (target.size() == 1 && target[0] == -1) {
            target = sc.spec.photons;
            for (int& t : target) t /= 2;
        }
        OptimizationOptions opts;
        opts.cutoff = config.cutoff;
        rep = optimize(sc.spec, target, opts, &sc.full_state);
    } catch (const std::domain_error& e) {
        std::cerr << "infeasible optimization: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid scenario: " << e.what() << "\n";
        return 2;
    }

    try {
        namespace fs = std::filesystem;
        fs::create_directories(config.output_dir);
        auto path = [&](const char* name) { return (fs::path(config.output_dir) / name).string(); };

        double xi_before = 0.0, xi_after = 0.0;
        const bool single_mode_out = rep.herald_before.signal.modes() == 1;
        if (!sc.metric.empty() && single_mode_out) {
            auto vb = rep.herald_before.signal.as_vector();
            auto va = rep.herald_after.signal.as_vector();
            if (sc.metric == "cat") {
                xi_before = xi_cat(vb).value;
                xi_after = xi_cat(va).value;
            } else if (sc.metric == "cps") {
                xi_before = xi_cps(vb).value;
                xi_after = xi_cps(va).value;
            } else if (sc.metric == "gkp") {
                xi_before = xi_gkp(vb, config.gkp_convention).value;
                xi_after = xi_gkp(va, config.gkp_convention).value;
            }
        }

        {
            std::ofstream out(path("report.json"));
            if (!out) throw std::runtime_error("cannot write report.json");
            out << report_to_json(rep, sc.metric, xi_before, xi_after, sc.notes);
        }
        {
            ordered_json j;
            j["scenario"] = config.scenario;
            j["target"] = rep.after.photons;
            j["cutoff"] = config.cutoff ? ordered_json(*config.cutoff) : ordered_json(nullptr);
            j["seed"] = config.seed;
            j["output_dir"] = config.output_dir;
            j["jobs"] = config.jobs;
            j["sweep_s0"] = config.sweep_s0;
            j["gkp_convention"] = config.gkp_convention == MetricConvention::hbar1 ? "hbar1" : "hbar2";
            j["tail_tolerance"] = fmt_double(tail_tolerance());
            std::ofstream out(path("params.json"));
            if (!out) throw std::runtime_error("cannot write params.json");
            out << j.dump(2) << "\n";
        }
        {
            std::ofstream out(path("tables.csv"));
            if (!out) throw std::runtime_error("cannot write tables.csv");
            out << "stage,photons,probability,s0,delta0,xi,fidelity\n";
            out.precision(12);
            auto row = [&](const char* stage, const GeneratorSpec& s, double p, double xi) {
                out << stage << ",\"" << photons_str(s.photons) << "\"," << p << ",";
                auto cp = control_params_multi(s.moments);
                if (cp.mode[0].defined) {
                    out << cp.mode[0].s0 << ",";
                    out << cp.mode[0].delta0.real() << (cp.mode[0].delta0.imag() < 0 ? "-" : "+")
                        << std::abs(cp.mode[0].delta0.imag()) << "i,";
                } else {
                    out << ",,";
                }
                out << xi << "," << rep.fidelity << "\n";
            };
            row("before", rep.before, rep.p_before, xi_before);
            row("after", rep.after, rep.p_after, xi_after);
        }
        if (single_mode_out) {
            write_wigner_csv(path("wigner_before.csv"), rep.herald_before.signal.as_vector());
            write_wigner_csv(path("wigner_after.csv"), rep.herald_after.signal.as_vector());
        }
        if (config.sweep_s0 && config.scenario == "gkp") {
            std::ofstream out(path("sweep_s0.csv"));
            if (!out) throw std::runtime_error("cannot write sweep_s0.csv");
            out << "n,cat_s0,s_tilde0,xi_gkp\n";
            out.precision(10);
            const std::vector<int> ns{2, 4, 6};
            const std::vector<double> s0s{0.2, 0.4, 0.6, 0.8, 1.0, 1.3, 1.6, 2.0, 2.5, 3.0};
            const int ni = static_cast<int>(ns.size()), nq = static_cast<int>(s0s.size());
            std::vector<std::string> lines(ni * nq);
#pragma omp parallel for collapse(2) schedule(dynamic)
            for (int i = 0; i < ni; ++i) {
                for (int q = 0; q < nq; ++q) {
                    Scenario bred = build_gkp_breeding(s0s[q], ns[i]);
                    auto inv = invariant_control_params(bred.full_state, 1, 0);
                    auto h = herald(bred.full_state, 1, bred.spec.photons);
                    auto xi = xi_gkp(h.signal.as_vector(), config.gkp_convention);
                    std::ostringstream os;
                    os.precision(10);
                    os << ns[i] << "," << s0s[q] << "," << inv.s0 << "," << xi.value << "\n";
                    lines[i * nq + q] = os.str();
                }
            }
            for (const auto& l : lines) out << l;
        }
    } catch (const std::exception& e) {
        std::cerr << "output failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

} // namespace ngopt
