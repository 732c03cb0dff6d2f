#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ewc/checks.hpp"
#include "ewc/config.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> replicates;
    std::optional<std::string> out_dir;
    std::optional<int> threads;
    bool dump_counts = false;
    bool dump_gaussians = false;
};

int run(const CliOptions& opt, const std::vector<std::string>& checks, bool print_expansion) {
    ewc::ExperimentConfig cfg = ewc::load_config(opt.config_path);
    if (opt.seed) cfg.master_seed = *opt.seed;
    if (opt.replicates) {
        if (*opt.replicates < 2) throw ewc::ConfigError("--replicates must be >= 2");
        cfg.replicates = *opt.replicates;
        if (cfg.converge) cfg.converge->replicates_per_side = *opt.replicates;
        if (cfg.gaussianity) cfg.gaussianity->replicates = std::max<std::int64_t>(*opt.replicates, 1000);
    }
    if (opt.out_dir) cfg.out_dir = *opt.out_dir;
    if (opt.threads) cfg.threads = *opt.threads;
    cfg.dump_counts = opt.dump_counts;
    cfg.dump_gaussians = opt.dump_gaussians;

    const ewc::RunResult res =
        ewc::run_experiment(cfg, checks, print_expansion ? &std::cout : nullptr);
    for (const ewc::CheckOutcome& o : res.outcomes)
        std::cerr << (o.pass ? "[PASS] " : "[FAIL] ") << o.id << ": " << o.detail << '\n';
    std::cerr << "results written to " << cfg.out_dir << '\n';
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo toolkit for empirical measures in a triangular-array scheme and "
                 "their Wiener-chaos limits"};
    app.require_subcommand(1);

    CliOptions opt;
    app.add_option("--seed", opt.seed, "override the master seed");
    app.add_option("--replicates", opt.replicates, "override replicate counts for all checks");
    app.add_option("--out-dir", opt.out_dir, "override the output directory");
    app.add_option("--threads", opt.threads, "worker threads (0 = hardware)");
    app.add_flag("--dump-counts", opt.dump_counts, "emit occupancy-count debug CSVs");
    app.add_flag("--dump-gaussians", opt.dump_gaussians, "emit Gaussian-cell debug CSVs");

    struct Sub {
        const char* name;
        const char* help;
        std::vector<std::string> checks;
        bool expansion = false;
    };
    const std::vector<Sub> subs = {
        {"validate", "check the schedule assumptions on the configured n grid", {"validate"}, false},
        {"moments", "Monte Carlo cross moments vs exact finite-n targets and limits", {"moments"}, false},
        {"mean", "Monte Carlo means vs the exact mean formula", {"mean"}, false},
        {"diagram-check", "realization-wise product-decomposition identity; prints the term table",
         {"diagram-check"}, true},
        {"flimits", "deterministic sweeps of the bilinear form F_l", {"flimits"}, false},
        {"converge", "two-sample KS comparison of truncated chaos vs the limit chaos", {"converge"}, false},
        {"gaussianity", "skewness/kurtosis CLT check for the normalized empirical measure",
         {"gaussianity"}, false},
        {"all", "run every check listed in the config", {}, false},
    };

    std::string chosen;
    for (const Sub& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->fallthrough();  // global flags may follow the subcommand
        sub->add_option("config", opt.config_path, "experiment config JSON")->required();
        sub->callback([&chosen, name = std::string(s.name)]() { chosen = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (const Sub& s : subs) {
            if (chosen == s.name) {
                if (chosen == "all") {
                    ewc::ExperimentConfig probe = ewc::load_config(opt.config_path);
                    return run(opt, probe.checks, false);
                }
                return run(opt, s.checks, s.expansion);
            }
        }
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const ewc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
