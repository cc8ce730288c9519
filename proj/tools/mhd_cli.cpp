#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "mhd/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitRuntimeError = 2;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> trials;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON config file");
    cmd->add_option("--seed", args.seed, "base RNG seed");
    cmd->add_option("--out", args.out, "output directory");
    cmd->add_option("--trials", args.trials, "number of trials/seeds");
}

nlohmann::json load_config(const CommonArgs& args) {
    if (args.config_path.empty()) return nlohmann::json::object();
    std::ifstream in(args.config_path);
    if (!in) throw mhd::ConfigError("cannot open config file " + args.config_path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw mhd::ConfigError(std::string("config parse error: ") + e.what());
    }
}

template <typename Config>
void apply_overrides(Config& cfg, const CommonArgs& args) {
    if (args.seed) cfg.seed = *args.seed;
    if (args.out) cfg.out_dir = *args.out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiple-hypothesis dropout experiment harness"};
    app.require_subcommand(1);

    CommonArgs sweep_args, sine_args, gmm_args, multipoint_args, vq_args;
    CLI::App* sweep = app.add_subcommand("sweep", "subset-ratio sweep over SWTA and baselines");
    add_common(sweep, sweep_args);
    CLI::App* sine = app.add_subcommand("sine", "inverse sine wave mixture fit");
    add_common(sine, sine_args);
    CLI::App* gmm = app.add_subcommand("gmm", "Gaussian-mixture fit");
    add_common(gmm, gmm_args);
    CLI::App* multipoint = app.add_subcommand("multipoint", "multi-target coverage study");
    add_common(multipoint, multipoint_args);
    CLI::App* vq = app.add_subcommand("vq-compare", "VQ vs MH-VQ autoencoder comparison");
    add_common(vq, vq_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) {
            mhd::SweepConfig cfg = mhd::parse_sweep_config(load_config(sweep_args));
            apply_overrides(cfg, sweep_args);
            if (sweep_args.trials) cfg.trials = *sweep_args.trials;
            mhd::SweepResult result = mhd::run_subset_ratio_sweep(cfg);
            mhd::write_sweep_outputs(result, cfg);
            std::cout << "sweep: wrote " << cfg.out_dir << "/sweep.csv\n";
        } else if (sine->parsed()) {
            mhd::SineConfig cfg = mhd::parse_sine_config(load_config(sine_args));
            apply_overrides(cfg, sine_args);
            mhd::SineResult result = mhd::run_sine_experiment(cfg);
            std::cout << "sine: max_branch_error=" << result.max_branch_error
                      << " sample_coverage=" << result.sample_coverage << "\n";
        } else if (gmm->parsed()) {
            mhd::GmmConfig cfg = mhd::parse_gmm_config(load_config(gmm_args));
            apply_overrides(cfg, gmm_args);
            mhd::GmmResult result = mhd::run_gaussian_mixture_experiment(cfg);
            std::cout << "gmm: wrote " << cfg.out_dir << "/gmm_components.csv ("
                      << result.mom.size() << " components)\n";
        } else if (multipoint->parsed()) {
            mhd::MultipointConfig cfg = mhd::parse_multipoint_config(load_config(multipoint_args));
            apply_overrides(cfg, multipoint_args);
            if (multipoint_args.trials) cfg.seeds = *multipoint_args.trials;
            mhd::MultipointResult result = mhd::run_multipoint_experiment(cfg);
            mhd::write_multipoint_outputs(result, cfg);
            std::cout << "multipoint: frozen=" << result.frac_seeds_with_frozen_predictor
                      << " covered=" << result.frac_seeds_all_targets_covered << "\n";
        } else if (vq->parsed()) {
            mhd::VqCompareConfig cfg = mhd::parse_vq_compare_config(load_config(vq_args));
            apply_overrides(cfg, vq_args);
            mhd::VqCompareResult result = mhd::run_vq_comparison(cfg);
            mhd::write_vq_compare_outputs(result, cfg);
            std::cout << "vq-compare: wrote " << cfg.out_dir << "/vq_compare.csv\n";
        }
    } catch (const mhd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
    return kExitOk;
}
