#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "mhd/datasets.hpp"
#include "mhd/io.hpp"
#include "mhd/mhvq.hpp"
#include "mhd/mom.hpp"

namespace mhd {

struct TrialResult {
    std::size_t trial = 0;
    std::string metric;
    double value = 0.0;
    double duration_ms = 0.0;
};

// ---------------------------------------------------------------- sweep ----

struct SweepConfig {
    std::vector<double> ratios = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::size_t trials = 30;   // K
    std::uint64_t seed = 42;
    std::size_t steps = 4000;
    double learning_rate = 0.5;
    std::size_t n_targets = 5;
    std::size_t threads = 0;   // 0 = hardware concurrency
    std::string out_dir = "out";
};

struct SweepCell {
    std::string method;  // swta | mc_dropout | wta
    double ratio = 0.0;
    std::vector<double> trial_sdd;
    std::vector<double> trial_ms;
    MeanCi ci;
};

struct SweepResult {
    std::vector<SweepCell> cells;

    const SweepCell& find(const std::string& method, double ratio) const;
};

SweepResult run_subset_ratio_sweep(const SweepConfig& cfg);
void write_sweep_outputs(const SweepResult& result, const SweepConfig& cfg);

// ----------------------------------------------------------- multipoint ----

struct MultipointConfig {
    std::size_t seeds = 20;
    std::uint64_t seed = 42;
    std::size_t steps = 20000;
    double learning_rate = 0.5;
    std::size_t n_targets = 5;
    double tolerance = 0.05;
    std::string out_dir = "out";
};

struct MultipointResult {
    // (a) independent 16-FFN ensemble under vanilla WTA.
    std::vector<std::size_t> frozen_predictors_per_seed;
    double frac_seeds_with_frozen_predictor = 0.0;
    // (b) 22-parameter MH Dropout network under vanilla WTA.
    std::vector<bool> all_targets_covered_per_seed;
    double frac_seeds_all_targets_covered = 0.0;
};

MultipointResult run_multipoint_experiment(const MultipointConfig& cfg);
void write_multipoint_outputs(const MultipointResult& result, const MultipointConfig& cfg);

// ----------------------------------------------------------------- sine ----

struct SineConfig {
    std::size_t data_count = 1000;
    std::uint64_t seed = 42;
    std::size_t steps = 400000;
    double learning_rate = 0.05;
    std::size_t components = 3;       // M
    double subset_ratio = 0.1;        // r; T = max(1, round(r * 2^D))
    double lambda = 0.1;
    std::size_t samples_per_x = 400;
    std::vector<double> eval_xs;      // default: interior of the multivalued region
    std::string out_dir = "out";
};

struct SineResult {
    double max_branch_error = 0.0;   // worst min-distance of a component mean to a branch
    double sample_coverage = 0.0;    // fraction of MoM samples within 0.1 of a branch
    bool ffn_between_branches = true;
    std::vector<double> eval_xs;
};

SineResult run_sine_experiment(const SineConfig& cfg);
void write_sine_outputs(const SineResult& result, const SineConfig& cfg);

// ------------------------------------------------------------------ gmm ----

struct GmmConfig {
    std::size_t data_count = 4000;
    std::uint64_t seed = 42;
    std::size_t steps = 40000;
    double learning_rate = 0.1;
    double subset_ratio = 0.25;  // r over 2^4 subnetworks -> T = 4
    double lambda = 0.1;
    std::size_t sample_count = 6000;
    std::string out_dir = "out";
};

struct GmmComponentReport {
    std::size_t model_component = 0;  // matched MoM component
    double mean_error = 0.0;          // L2 distance to the true mean
    double variance_ratio = 0.0;      // sample variance / true variance, averaged over dims
    std::size_t sample_count = 0;
};

struct GmmResult {
    std::vector<GmmComponentReport> mom;       // per true component
    std::vector<GmmComponentReport> baseline;  // MC-dropout mixture
};

GmmResult run_gaussian_mixture_experiment(const GmmConfig& cfg);
void write_gmm_outputs(const GmmResult& result, const GmmConfig& cfg);

// ----------------------------------------------------------- vq-compare ----

struct VqCompareConfig {
    std::uint64_t seed = 42;
    std::size_t data_count = 2000;
    std::size_t steps = 20000;
    double learning_rate = 0.05;
    std::vector<std::size_t> codebook_grid = {4, 8, 16};  // total entries K
    std::size_t subset_size = 4;  // T
    std::size_t generate_count = 4000;
    std::string out_dir = "out";
};

struct VqCompareRow {
    std::string model;  // vq | mhvq
    std::size_t total_entries = 0;
    double reconstruction_mse = 0.0;
    double spread_ratio = 0.0;  // generated per-cluster spread / data spread
    double max_token_latent_spread = 0.0;  // exactly 0 for plain VQ
};

struct VqCompareResult {
    std::vector<VqCompareRow> rows;
};

VqCompareResult run_vq_comparison(const VqCompareConfig& cfg);
void write_vq_compare_outputs(const VqCompareResult& result, const VqCompareConfig& cfg);

// --------------------------------------------------------------- config ----

// Strict parsers: unknown keys are rejected with ConfigError.
SweepConfig parse_sweep_config(const nlohmann::json& j);
MultipointConfig parse_multipoint_config(const nlohmann::json& j);
SineConfig parse_sine_config(const nlohmann::json& j);
GmmConfig parse_gmm_config(const nlohmann::json& j);
VqCompareConfig parse_vq_compare_config(const nlohmann::json& j);

// T = max(1, round(r * total)); r must lie in (0, 1].
std::size_t subset_size_from_ratio(double ratio, std::size_t total_subnetworks);

}  // namespace mhd
