#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "basket/config.hpp"
#include "basket/parallel.hpp"
#include "basket/pipeline.hpp"

namespace {

// 0 success, 1 bad configuration, 2 bad command line, 3 failure while running.
enum Exit { kOk = 0, kConfig = 1, kUsage = 2, kRuntime = 3 };

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Basket trial design: prior optimization, calibration and simulation"};
    app.set_version_flag("--version", std::string(basket::tool_version()));

    std::string command;
    std::string config_path;
    std::string preset;
    std::uint64_t seed = 0;
    int reps = 0;
    unsigned threads = basket::default_threads();
    std::string out_dir;
    bool dump_chains = false;
    bool list_presets = false;
    bool quiet = false;

    app.add_option("command", command, "optimize-prior | calibrate | simulate | oc-table")
        ->check(CLI::IsMember({"optimize-prior", "calibrate", "simulate", "oc-table"}));
    auto* cfg = app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--preset", preset, "embedded configuration, e.g. paper-4arm")->excludes(cfg);
    auto* seed_opt = app.add_option("--seed", seed, "base seed for replicates");
    auto* reps_opt = app.add_option("--reps", reps, "Monte Carlo replicates per scenario")->check(CLI::PositiveNumber);
    app.add_option("--threads", threads, "worker threads (default: BASKET_THREADS or hardware)")
        ->check(CLI::PositiveNumber);
    auto* out_opt = app.add_option("--out", out_dir, "output directory");
    app.add_flag("--dump-chains", dump_chains, "write one MCMC chain per hierarchical design");
    app.add_flag("--list-presets", list_presets, "print embedded preset names and exit");
    app.add_flag("-q,--quiet", quiet, "no progress output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    if (list_presets) {
        for (const auto& name : basket::preset_names()) std::cout << name << '\n';
        return kOk;
    }
    if (command.empty()) {
        std::cerr << "missing command\n" << app.help();
        return kUsage;
    }
    if (config_path.empty() && preset.empty()) {
        std::cerr << "one of --config or --preset is required\n";
        return kUsage;
    }

    basket::RunConfig config;
    try {
        config = config_path.empty() ? basket::load_preset(preset) : basket::load_config(config_path);
    } catch (const basket::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    }
    if (*seed_opt) config.base_seed = seed;
    if (*reps_opt) config.n_reps = reps;
    if (*out_opt) config.output_dir = out_dir;

    basket::PipelineOptions opts;
    opts.threads = threads;
    opts.dump_chains = dump_chains;
    opts.log = quiet ? nullptr : &std::cerr;
    try {
        const auto result = basket::run_pipeline(config, *basket::parse_command(command), opts);
        if (result.exit_code == 0) {
            for (const auto& path : result.artifacts) std::cout << path << '\n';
        }
        return result.exit_code == 0 ? kOk : kRuntime;
    } catch (const basket::InvalidArgument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
}
