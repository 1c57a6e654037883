#include "ngopt/scenarios.hpp"

#include "acceptance_core.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    CLI::App app{"heralded non-Gaussian state generator optimizer"};
    app.require_subcommand(1);

    ngopt::ScenarioConfig cfg;
    std::string target_arg;
    std::string convention = "hbar2";

    auto* run = app.add_subcommand("run", "optimize a state-generation scenario");
    run->add_option("scenario", cfg.scenario, "cat-odd | cat-even | cps | gkp | random | custom")
        ->required();
    run->add_option("--target", target_arg,
                    "target photon pattern N[,N...] or 'auto' (halve each count)");
    run->add_option("--cutoff", [&cfg](const std::vector<std::string>& v) {
        cfg.cutoff = std::stoi(v[0]);
        return true;
    }, "Fock cutoff override for heralding");
    run->add_option("--seed", cfg.seed, "seed for the random scenario");
    run->add_option("--out", cfg.output_dir, "output directory")->capture_default_str();
    run->add_option("--jobs", cfg.jobs, "worker threads for sweeps and grids");
    run->add_flag("--sweep-s0", cfg.sweep_s0, "also write the GKP squeezing sweep CSV");
    run->add_option("--spec", cfg.custom_file, "JSON file for the custom scenario");
    run->add_option("--gkp-convention", convention, "hbar1 | hbar2 (metric calibration)")
        ->check(CLI::IsMember({"hbar1", "hbar2"}));

    std::string verify_filter;
    auto* verify = app.add_subcommand("verify", "run the acceptance suite");
    verify->add_option("filter", verify_filter, "criterion number or name substring");

    CLI11_PARSE(app, argc, argv);

    if (verify->parsed()) {
        const int failures = ngopt::acceptance::run_all(verify_filter);
        if (failures > 0) std::fprintf(stderr, "%d criterion(s) failed\n", failures);
        return failures == 0 ? 0 : 1;
    }

    cfg.gkp_convention = convention == "hbar1" ? ngopt::MetricConvention::hbar1
                                               : ngopt::MetricConvention::hbar2;
    if (!target_arg.empty()) {
        if (target_arg == "auto") {
            cfg.target = {-1};
        } else {
            cfg.target.clear();
            std::stringstream ss(target_arg);
            std::string tok;
            while (std::getline(ss, tok, ',')) cfg.target.push_back(std::stoi(tok));
        }
    }
    return ngopt::run_scenario(cfg);
}
