#include <set>

#include "mhd/experiments.hpp"

namespace mhd {

namespace {

using nlohmann::json;

void require_known_keys(const json& j, const std::set<std::string>& known,
                        const std::string& what) {
    if (!j.is_object()) throw ConfigError(what + ": config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError(what + ": unknown config key \"" + it.key() + "\"");
}

template <typename T>
void read_into(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string(key) + ": " + e.what());
    }
}

void check_positive(double v, const char* key) {
    if (!(v > 0.0)) throw ConfigError(std::string(key) + " must be positive");
}

void check_positive(std::size_t v, const char* key) {
    if (v == 0) throw ConfigError(std::string(key) + " must be positive");
}

}  // namespace

SweepConfig parse_sweep_config(const json& j) {
    require_known_keys(j,
                       {"ratios", "trials", "seed", "steps", "learning_rate", "n_targets",
                        "threads", "out_dir"},
                       "sweep");
    SweepConfig cfg;
    read_into(j, "ratios", cfg.ratios);
    read_into(j, "trials", cfg.trials);
    read_into(j, "seed", cfg.seed);
    read_into(j, "steps", cfg.steps);
    read_into(j, "learning_rate", cfg.learning_rate);
    read_into(j, "n_targets", cfg.n_targets);
    read_into(j, "threads", cfg.threads);
    read_into(j, "out_dir", cfg.out_dir);
    if (cfg.ratios.empty()) throw ConfigError("ratios must be non-empty");
    for (double r : cfg.ratios)
        if (r <= 0.0 || r > 1.0) throw ConfigError("each ratio must lie in (0, 1]");
    check_positive(cfg.trials, "trials");
    check_positive(cfg.steps, "steps");
    check_positive(cfg.learning_rate, "learning_rate");
    check_positive(cfg.n_targets, "n_targets");
    return cfg;
}

MultipointConfig parse_multipoint_config(const json& j) {
    require_known_keys(
        j, {"seeds", "seed", "steps", "learning_rate", "n_targets", "tolerance", "out_dir"},
        "multipoint");
    MultipointConfig cfg;
    read_into(j, "seeds", cfg.seeds);
    read_into(j, "seed", cfg.seed);
    read_into(j, "steps", cfg.steps);
    read_into(j, "learning_rate", cfg.learning_rate);
    read_into(j, "n_targets", cfg.n_targets);
    read_into(j, "tolerance", cfg.tolerance);
    read_into(j, "out_dir", cfg.out_dir);
    check_positive(cfg.seeds, "seeds");
    check_positive(cfg.steps, "steps");
    check_positive(cfg.learning_rate, "learning_rate");
    check_positive(cfg.n_targets, "n_targets");
    check_positive(cfg.tolerance, "tolerance");
    return cfg;
}

SineConfig parse_sine_config(const json& j) {
    require_known_keys(j,
                       {"data_count", "seed", "steps", "learning_rate", "components",
                        "subset_ratio", "lambda", "samples_per_x", "eval_xs", "out_dir"},
                       "sine");
    SineConfig cfg;
    read_into(j, "data_count", cfg.data_count);
    read_into(j, "seed", cfg.seed);
    read_into(j, "steps", cfg.steps);
    read_into(j, "learning_rate", cfg.learning_rate);
    read_into(j, "components", cfg.components);
    read_into(j, "subset_ratio", cfg.subset_ratio);
    read_into(j, "lambda", cfg.lambda);
    read_into(j, "samples_per_x", cfg.samples_per_x);
    read_into(j, "eval_xs", cfg.eval_xs);
    read_into(j, "out_dir", cfg.out_dir);
    if (cfg.data_count < 2) throw ConfigError("data_count must be at least 2");
    check_positive(cfg.steps, "steps");
    check_positive(cfg.learning_rate, "learning_rate");
    check_positive(cfg.components, "components");
    if (cfg.subset_ratio <= 0.0 || cfg.subset_ratio > 1.0)
        throw ConfigError("subset_ratio must lie in (0, 1]");
    check_positive(cfg.lambda, "lambda");
    check_positive(cfg.samples_per_x, "samples_per_x");
    return cfg;
}

GmmConfig parse_gmm_config(const json& j) {
    require_known_keys(j,
                       {"data_count", "seed", "steps", "learning_rate", "subset_ratio", "lambda",
                        "sample_count", "out_dir"},
                       "gmm");
    GmmConfig cfg;
    read_into(j, "data_count", cfg.data_count);
    read_into(j, "seed", cfg.seed);
    read_into(j, "steps", cfg.steps);
    read_into(j, "learning_rate", cfg.learning_rate);
    read_into(j, "subset_ratio", cfg.subset_ratio);
    read_into(j, "lambda", cfg.lambda);
    read_into(j, "sample_count", cfg.sample_count);
    read_into(j, "out_dir", cfg.out_dir);
    check_positive(cfg.data_count, "data_count");
    check_positive(cfg.steps, "steps");
    check_positive(cfg.learning_rate, "learning_rate");
    if (cfg.subset_ratio <= 0.0 || cfg.subset_ratio > 1.0)
        throw ConfigError("subset_ratio must lie in (0, 1]");
    check_positive(cfg.lambda, "lambda");
    check_positive(cfg.sample_count, "sample_count");
    return cfg;
}

VqCompareConfig parse_vq_compare_config(const json& j) {
    require_known_keys(j,
                       {"seed", "data_count", "steps", "learning_rate", "codebook_grid",
                        "subset_size", "generate_count", "out_dir"},
                       "vq-compare");
    VqCompareConfig cfg;
    read_into(j, "seed", cfg.seed);
    read_into(j, "data_count", cfg.data_count);
    read_into(j, "steps", cfg.steps);
    read_into(j, "learning_rate", cfg.learning_rate);
    read_into(j, "codebook_grid", cfg.codebook_grid);
    read_into(j, "subset_size", cfg.subset_size);
    read_into(j, "generate_count", cfg.generate_count);
    read_into(j, "out_dir", cfg.out_dir);
    check_positive(cfg.data_count, "data_count");
    check_positive(cfg.steps, "steps");
    check_positive(cfg.learning_rate, "learning_rate");
    if (cfg.codebook_grid.empty()) throw ConfigError("codebook_grid must be non-empty");
    for (std::size_t k : cfg.codebook_grid)
        if (k < 2) throw ConfigError("each codebook size must be at least 2");
    check_positive(cfg.subset_size, "subset_size");
    check_positive(cfg.generate_count, "generate_count");
    return cfg;
}

}  // namespace mhd
