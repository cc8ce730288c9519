#include "mhd/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <thread>

namespace mhd {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t x = base;
    for (std::uint64_t v : {a, b, c})
        x ^= v + 0x9e3779b97f4a7c15ull + (x << 6) + (x >> 2);
    return x;
}

double l2_distance(const Tensor& a, const Tensor& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double single_trial_sdd(const std::vector<Tensor>& predicted, const std::vector<Tensor>& targets) {
    return sdd({predicted}, {targets});
}

std::filesystem::path ensure_out_dir(const std::string& out_dir) {
    std::filesystem::path p(out_dir);
    std::filesystem::create_directories(p);
    return p;
}

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValueError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

}  // namespace

std::size_t subset_size_from_ratio(double ratio, std::size_t total_subnetworks) {
    if (ratio <= 0.0 || ratio > 1.0)
        throw ConfigError("subset ratio must lie in (0, 1], got " + std::to_string(ratio));
    auto t = static_cast<std::size_t>(std::llround(ratio * double(total_subnetworks)));
    return std::max<std::size_t>(1, t);
}

// ---------------------------------------------------------------- sweep ----

namespace {

MHDropoutNetwork make_sweep_net(Rng& rng) {
    MHDropoutNetwork net;
    net.net = make_mlp(2,
                       {{4, Activation::Sigmoid, true},
                        {2, Activation::Sigmoid, false}},
                       rng, 1.0);
    net.keep_prob = 0.5;
    return net;
}

void train_swta(MHDropoutNetwork& net, const MultipointDataset& ds, std::size_t steps, double lr,
                Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, ds.targets.size() - 1);
    for (std::size_t s = 0; s < steps; ++s) {
        std::size_t ti = pick(rng);
        Tape tape;
        WtaResult res = swta_loss(net, tape, tape.constant(ds.input),
                                  tape.constant(ds.targets[ti]), rng);
        tape.backward(res.loss);
        sgd_step(net.parameters(), lr);
    }
}

void train_mc_dropout(MHDropoutNetwork& net, const MultipointDataset& ds, std::size_t steps,
                      double lr, Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, ds.targets.size() - 1);
    for (std::size_t s = 0; s < steps; ++s) {
        std::size_t ti = pick(rng);
        Tape tape;
        std::vector<DropoutMask> mask = sample_masks(net, 1, rng);
        Var out = net.forward_masked(tape, tape.constant(ds.input), mask[0]);
        Var loss = tape.squared_l2(out, tape.constant(ds.targets[ti]));
        tape.backward(loss);
        sgd_step(net.parameters(), lr);
    }
}

// Diversity of the trained model: sd over the full hypothesis set, so the
// measurement does not depend on how many masks a method samples at inference.
double eval_sweep_sdd(const MHDropoutNetwork& net, const MultipointDataset& ds) {
    return single_trial_sdd(hypotheses_values(net, ds.input, enumerate_masks(net)), ds.targets);
}

struct SweepTrialRow {
    std::vector<double> swta_sdd;  // per ratio
    std::vector<double> swta_ms;
    std::vector<double> wta_sdd;
    std::vector<double> wta_ms;
    std::vector<double> mc_sdd;
    std::vector<double> mc_ms;
};

SweepTrialRow run_sweep_trial(const SweepConfig& cfg, std::size_t k) {
    SweepTrialRow row;
    Rng data_rng(mix_seed(cfg.seed, k, 1, 0));
    MultipointDataset ds = gen_multipoint(cfg.n_targets, data_rng);

    // Vanilla-WTA baseline: SWTA with the full enumerated subset, trained with
    // the same seed as the r = 1.0 SWTA run so the two coincide.
    Rng wta_rng(mix_seed(cfg.seed, k, 2, 1000));
    MHDropoutNetwork wta_net = make_sweep_net(wta_rng);
    wta_net.subset_size = wta_net.subnetwork_count();
    {
        auto start = Clock::now();
        train_swta(wta_net, ds, cfg.steps, cfg.learning_rate, wta_rng);
        double ms = ms_since(start);
        double sdd_value = eval_sweep_sdd(wta_net, ds);
        for (std::size_t i = 0; i < cfg.ratios.size(); ++i) {
            row.wta_sdd.push_back(sdd_value);
            row.wta_ms.push_back(ms / double(cfg.ratios.size()));
        }
    }

    Rng mc_rng(mix_seed(cfg.seed, k, 3, 0));
    MHDropoutNetwork mc_net = make_sweep_net(mc_rng);
    {
        auto start = Clock::now();
        train_mc_dropout(mc_net, ds, cfg.steps, cfg.learning_rate, mc_rng);
        double ms = ms_since(start);
        double sdd_value = eval_sweep_sdd(mc_net, ds);
        for (std::size_t i = 0; i < cfg.ratios.size(); ++i) {
            row.mc_sdd.push_back(sdd_value);
            row.mc_ms.push_back(ms / double(cfg.ratios.size()));
        }
    }

    for (double r : cfg.ratios) {
        std::uint64_t rkey = std::uint64_t(std::llround(r * 1000));
        Rng train_rng(mix_seed(cfg.seed, k, 2, rkey));
        MHDropoutNetwork net = make_sweep_net(train_rng);
        net.subset_size = subset_size_from_ratio(r, net.subnetwork_count());
        auto start = Clock::now();
        train_swta(net, ds, cfg.steps, cfg.learning_rate, train_rng);
        row.swta_sdd.push_back(eval_sweep_sdd(net, ds));
        row.swta_ms.push_back(ms_since(start));
    }
    return row;
}

}  // namespace

const SweepCell& SweepResult::find(const std::string& method, double ratio) const {
    for (const SweepCell& c : cells)
        if (c.method == method && std::abs(c.ratio - ratio) < 1e-12) return c;
    throw ValueError("SweepResult: no cell for " + method + " at ratio " + std::to_string(ratio));
}

SweepResult run_subset_ratio_sweep(const SweepConfig& cfg) {
    if (cfg.trials < 1) throw ConfigError("sweep: trials must be >= 1");
    std::vector<SweepTrialRow> rows(cfg.trials);

    std::size_t workers = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
    workers = std::max<std::size_t>(1, std::min(workers, cfg.trials));
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> futures;
    for (std::size_t w = 0; w < workers; ++w)
        futures.push_back(std::async(std::launch::async, [&] {
            for (std::size_t k = next.fetch_add(1); k < cfg.trials; k = next.fetch_add(1))
                rows[k] = run_sweep_trial(cfg, k);
        }));
    for (auto& f : futures) f.get();

    SweepResult result;
    auto collect = [&](const std::string& method, auto member_sdd, auto member_ms) {
        for (std::size_t ri = 0; ri < cfg.ratios.size(); ++ri) {
            SweepCell cell;
            cell.method = method;
            cell.ratio = cfg.ratios[ri];
            for (std::size_t k = 0; k < cfg.trials; ++k) {
                cell.trial_sdd.push_back((rows[k].*member_sdd)[ri]);
                cell.trial_ms.push_back((rows[k].*member_ms)[ri]);
            }
            cell.ci = mean_ci95(cell.trial_sdd);
            result.cells.push_back(std::move(cell));
        }
    };
    collect("swta", &SweepTrialRow::swta_sdd, &SweepTrialRow::swta_ms);
    collect("mc_dropout", &SweepTrialRow::mc_sdd, &SweepTrialRow::mc_ms);
    collect("wta", &SweepTrialRow::wta_sdd, &SweepTrialRow::wta_ms);
    return result;
}

void write_sweep_outputs(const SweepResult& result, const SweepConfig& cfg) {
    auto dir = ensure_out_dir(cfg.out_dir);
    CsvWriter csv((dir / "sweep.csv").string(), {"method", "ratio", "trial", "sdd"});
    // Wall-clock timings vary run to run, so they live in a separate file and
    // the canonical CSV stays byte-reproducible.
    CsvWriter timings((dir / "sweep_timings.csv").string(),
                      {"method", "ratio", "trial", "duration_ms"});
    for (const SweepCell& cell : result.cells)
        for (std::size_t k = 0; k < cell.trial_sdd.size(); ++k) {
            csv.write_row({cell.method, fmt_double(cell.ratio), std::to_string(k),
                           fmt_double(cell.trial_sdd[k])});
            timings.write_row({cell.method, fmt_double(cell.ratio), std::to_string(k),
                               fmt_double(cell.trial_ms[k])});
        }

    nlohmann::json summary;
    summary["config"] = {{"ratios", cfg.ratios},     {"trials", cfg.trials},
                         {"seed", cfg.seed},         {"steps", cfg.steps},
                         {"learning_rate", cfg.learning_rate}, {"n_targets", cfg.n_targets}};
    nlohmann::json cells = nlohmann::json::array();
    for (const SweepCell& cell : result.cells)
        cells.push_back({{"method", cell.method},
                         {"ratio", cell.ratio},
                         {"mean_sdd", cell.ci.mean},
                         {"ci_low", cell.ci.ci_low},
                         {"ci_high", cell.ci.ci_high}});
    summary["cells"] = cells;
    write_json_file(summary, dir / "sweep_summary.json");
}

// ----------------------------------------------------------- multipoint ----

namespace {

Mlp make_small_ffn(Rng& rng) {
    return make_mlp(2, {{4, Activation::Sigmoid, false}, {2, Activation::Sigmoid, false}}, rng,
                    1.0);
}

MHDropoutNetwork make_appendix_net(Rng& rng) {
    MHDropoutNetwork net;
    net.net = make_mlp(
        2, {{4, Activation::Sigmoid, true}, {2, Activation::Sigmoid, false}}, rng, 1.0);
    net.keep_prob = 0.5;
    net.subset_size = net.subnetwork_count();
    return net;
}

}  // namespace

MultipointResult run_multipoint_experiment(const MultipointConfig& cfg) {
    MultipointResult result;
    std::size_t n_frozen_seeds = 0;
    std::size_t n_covered_seeds = 0;

    for (std::size_t k = 0; k < cfg.seeds; ++k) {
        Rng data_rng(mix_seed(cfg.seed, k, 1, 0));
        MultipointDataset ds = gen_multipoint(cfg.n_targets, data_rng);

        // (a) 16 independent predictors under vanilla WTA.
        Rng ens_rng(mix_seed(cfg.seed, k, 2, 0));
        std::vector<Mlp> predictors;
        for (int i = 0; i < 16; ++i) predictors.push_back(make_small_ffn(ens_rng));
        std::vector<Tensor> init_outputs;
        for (Mlp& p : predictors) init_outputs.push_back(p.forward_value(ds.input));

        std::uniform_int_distribution<std::size_t> pick(0, ds.targets.size() - 1);
        for (std::size_t s = 0; s < cfg.steps; ++s) {
            std::size_t ti = pick(ens_rng);
            Tape tape;
            Var x = tape.constant(ds.input);
            std::vector<Var> hyps;
            for (Mlp& p : predictors) hyps.push_back(p.forward(tape, x));
            WtaResult res = wta_loss(tape, hyps, tape.constant(ds.targets[ti]));
            tape.backward(res.loss);
            for (Mlp& p : predictors) sgd_step(p.parameters(), cfg.learning_rate);
        }
        std::size_t frozen = 0;
        for (std::size_t i = 0; i < predictors.size(); ++i)
            if (l2_distance(predictors[i].forward_value(ds.input), init_outputs[i]) <
                cfg.tolerance)
                ++frozen;
        result.frozen_predictors_per_seed.push_back(frozen);
        if (frozen >= 1) ++n_frozen_seeds;

        // (b) the 22-parameter MH Dropout network under vanilla WTA.
        Rng mh_rng(mix_seed(cfg.seed, k, 3, 0));
        MHDropoutNetwork net = make_appendix_net(mh_rng);
        std::vector<DropoutMask> all_masks = enumerate_masks(net);
        for (std::size_t s = 0; s < cfg.steps; ++s) {
            std::size_t ti = pick(mh_rng);
            Tape tape;
            WtaResult res = swta_loss_with_masks(net, tape, tape.constant(ds.input),
                                                 tape.constant(ds.targets[ti]), all_masks);
            tape.backward(res.loss);
            sgd_step(net.parameters(), cfg.learning_rate);
        }
        std::vector<Tensor> hyps = hypotheses_values(net, ds.input, all_masks);
        bool covered = true;
        for (const Tensor& target : ds.targets) {
            double best = l2_distance(hyps[0], target);
            for (const Tensor& h : hyps) best = std::min(best, l2_distance(h, target));
            if (best >= cfg.tolerance) covered = false;
        }
        result.all_targets_covered_per_seed.push_back(covered);
        if (covered) ++n_covered_seeds;
    }

    result.frac_seeds_with_frozen_predictor = double(n_frozen_seeds) / double(cfg.seeds);
    result.frac_seeds_all_targets_covered = double(n_covered_seeds) / double(cfg.seeds);
    return result;
}

void write_multipoint_outputs(const MultipointResult& result, const MultipointConfig& cfg) {
    auto dir = ensure_out_dir(cfg.out_dir);
    CsvWriter csv((dir / "multipoint.csv").string(),
                  {"seed", "frozen_predictors", "all_targets_covered"});
    for (std::size_t k = 0; k < result.frozen_predictors_per_seed.size(); ++k)
        csv.write_row({std::to_string(k), std::to_string(result.frozen_predictors_per_seed[k]),
                       result.all_targets_covered_per_seed[k] ? "1" : "0"});
    nlohmann::json summary = {
        {"config",
         {{"seeds", cfg.seeds},
          {"seed", cfg.seed},
          {"steps", cfg.steps},
          {"learning_rate", cfg.learning_rate},
          {"n_targets", cfg.n_targets},
          {"tolerance", cfg.tolerance}}},
        {"frac_seeds_with_frozen_predictor", result.frac_seeds_with_frozen_predictor},
        {"frac_seeds_all_targets_covered", result.frac_seeds_all_targets_covered}};
    write_json_file(summary, dir / "multipoint_summary.json");
}

// ----------------------------------------------------------------- sine ----

namespace {

std::vector<LayerSpec> tanh_stack(std::size_t layers, std::size_t units) {
    return std::vector<LayerSpec>(layers, LayerSpec{units, Activation::Tanh, false});
}

MoMModel make_sine_mom(const SineConfig& cfg, Rng& rng) {
    MoMConfig mc;
    mc.input_dim = 1;
    mc.output_dim = 1;
    mc.components = cfg.components;
    mc.encoder_hidden = tanh_stack(5, 6);
    mc.gate_hidden = tanh_stack(1, 6);
    mc.head_hidden_units = 4;
    mc.head_activation = Activation::Tanh;
    mc.subset_size = subset_size_from_ratio(cfg.subset_ratio, 16);
    mc.lambda = cfg.lambda;
    MoMModel model = make_mom(mc, rng);
    model.variance_samples = 16;  // enumerate for stable spread estimates
    // Report the center of the hypothesis cloud, not the raw encoder half.
    model.predictive_mean_inference = true;
    return model;
}

struct McMixture {
    std::vector<MHDropoutNetwork> nets;
    Mlp gate;

    std::vector<Parameter*> parameters() {
        std::vector<Parameter*> ps;
        for (MHDropoutNetwork& n : nets)
            for (Parameter* p : n.parameters()) ps.push_back(p);
        for (Parameter* p : gate.parameters()) ps.push_back(p);
        return ps;
    }
};

// Mixture of FFNs with standard dropout: one sampled mask per component per
// step, mixture-WTA across components.
void mc_mixture_train_step(McMixture& mix, const Tensor& x, const Tensor& y, double lr,
                           Rng& rng) {
    Tape tape;
    Var xc = tape.constant(x);
    std::vector<Var> hyps;
    for (MHDropoutNetwork& n : mix.nets)
        hyps.push_back(n.forward_masked(tape, xc, sample_masks(n, 1, rng)[0]));
    Var phi = tape.softmax(mix.gate.forward(tape, xc));
    WtaResult res = mixture_wta_loss(tape, hyps, phi, tape.constant(y));
    tape.backward(res.loss);
    sgd_step(mix.parameters(), lr);
}

std::pair<std::size_t, Tensor> mc_mixture_sample(const McMixture& mix, const Tensor& x,
                                                 Rng& rng) {
    Tape tape;
    Tensor phi = tape.value(tape.softmax(mix.gate.forward(tape, tape.constant(x))));
    std::discrete_distribution<std::size_t> pick(phi.data.begin(), phi.data.end());
    std::size_t m = pick(rng);
    const MHDropoutNetwork& net = mix.nets[m];
    return {m, net.forward_masked_value(x, sample_masks(net, 1, rng)[0])};
}

}  // namespace

SineResult run_sine_experiment(const SineConfig& cfg) {
    Rng data_rng(mix_seed(cfg.seed, 0, 1, 0));
    std::vector<SinePoint> data = gen_inverse_sine(cfg.data_count, data_rng);

    SineResult result;
    result.eval_xs = cfg.eval_xs;
    if (result.eval_xs.empty()) {
        auto [lo, hi] = sine_multivalued_region();
        double a = lo + 0.2 * (hi - lo), b = hi - 0.2 * (hi - lo);
        for (int i = 0; i < 7; ++i) result.eval_xs.push_back(a + (b - a) * double(i) / 6.0);
    }

    // (a) plain FFN.
    Rng ffn_rng(mix_seed(cfg.seed, 0, 2, 0));
    std::vector<LayerSpec> ffn_spec = tanh_stack(5, 6);
    ffn_spec.push_back({1, Activation::Identity, false});
    Mlp ffn = make_mlp(1, ffn_spec, ffn_rng, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    for (std::size_t s = 0; s < cfg.steps; ++s) {
        const SinePoint& p = data[pick(ffn_rng)];
        Tape tape;
        Var out = ffn.forward(tape, tape.constant(Tensor::scalar(p.x)));
        Var loss = tape.squared_l2(out, tape.constant(Tensor::scalar(p.y)));
        tape.backward(loss);
        sgd_step(ffn.parameters(), cfg.learning_rate);
    }

    // (b) mixture of FFNs with MC dropout.
    Rng mc_rng(mix_seed(cfg.seed, 0, 3, 0));
    McMixture mc;
    for (std::size_t m = 0; m < cfg.components; ++m) {
        MHDropoutNetwork net;
        std::vector<LayerSpec> spec(5, LayerSpec{6, Activation::Tanh, true});
        spec.push_back({1, Activation::Identity, false});
        net.net = make_mlp(1, spec, mc_rng, 1.0);
        net.keep_prob = 0.5;
        net.subset_size = 1;
        mc.nets.push_back(std::move(net));
    }
    std::vector<LayerSpec> gate_spec = tanh_stack(1, 6);
    gate_spec.push_back({cfg.components, Activation::Identity, false});
    mc.gate = make_mlp(1, gate_spec, mc_rng, 1.0);
    for (std::size_t s = 0; s < cfg.steps; ++s) {
        const SinePoint& p = data[pick(mc_rng)];
        mc_mixture_train_step(mc, Tensor::scalar(p.x), Tensor::scalar(p.y), cfg.learning_rate,
                              mc_rng);
    }

    // (c) MoM.
    Rng mom_rng(mix_seed(cfg.seed, 0, 4, 0));
    MoMModel mom = make_sine_mom(cfg, mom_rng);
    for (std::size_t s = 0; s < cfg.steps; ++s) {
        const SinePoint& p = data[pick(mom_rng)];
        train_step(mom, Tensor::scalar(p.x), Tensor::scalar(p.y), cfg.learning_rate, mom_rng);
    }

    // Branch metrics.
    Rng eval_rng(mix_seed(cfg.seed, 0, 5, 0));
    double worst_branch_error = 0.0;
    std::size_t covered_samples = 0, total_samples = 0;
    bool ffn_between = true;
    for (double x : result.eval_xs) {
        std::vector<double> branches = sine_branches(x);
        Tensor input = Tensor::scalar(x);
        std::vector<double> means;
        for (std::size_t m = 0; m < mom.components(); ++m)
            means.push_back(component_stats(mom, m, input, eval_rng).mean[0]);
        for (double branch : branches) {
            double best = std::abs(means[0] - branch);
            for (double mval : means) best = std::min(best, std::abs(mval - branch));
            worst_branch_error = std::max(worst_branch_error, best);
        }
        for (const MoMSample& s : infer(mom, input, eval_rng, cfg.samples_per_x)) {
            double best = std::abs(s.value[0] - branches[0]);
            for (double branch : branches) best = std::min(best, std::abs(s.value[0] - branch));
            if (best <= 0.1) ++covered_samples;
            ++total_samples;
        }
        double pred = ffn.forward_value(input)[0];
        double lo = *std::min_element(branches.begin(), branches.end());
        double hi = *std::max_element(branches.begin(), branches.end());
        if (!(pred > lo && pred < hi)) ffn_between = false;
    }
    result.max_branch_error = worst_branch_error;
    result.sample_coverage = total_samples ? double(covered_samples) / double(total_samples) : 0.0;
    result.ffn_between_branches = ffn_between;

    // Curve and sample dumps.
    auto dir = ensure_out_dir(cfg.out_dir);
    {
        std::vector<std::string> header = {"x", "ffn"};
        for (std::size_t m = 0; m < mom.components(); ++m) header.push_back("mom_mean_" + std::to_string(m));
        for (std::size_t m = 0; m < mom.components(); ++m) header.push_back("phi_" + std::to_string(m));
        CsvWriter curve((dir / "sine_curve.csv").string(), header);
        Rng curve_rng(mix_seed(cfg.seed, 0, 6, 0));
        for (int i = 0; i <= 200; ++i) {
            double x = double(i) / 200.0;
            Tensor input = Tensor::scalar(x);
            std::vector<std::string> row = {fmt_double(x),
                                            fmt_double(ffn.forward_value(input)[0])};
            Tensor phi = mixture_coefficients(mom, input);
            for (std::size_t m = 0; m < mom.components(); ++m)
                row.push_back(fmt_double(component_stats(mom, m, input, curve_rng).mean[0]));
            for (std::size_t m = 0; m < mom.components(); ++m)
                row.push_back(fmt_double(phi[m]));
            curve.write_row(row);
        }
    }
    {
        CsvWriter samples((dir / "sine_samples.csv").string(),
                          {"x", "model", "component", "value"});
        Rng dump_rng(mix_seed(cfg.seed, 0, 7, 0));
        for (double x : result.eval_xs) {
            Tensor input = Tensor::scalar(x);
            for (const MoMSample& s : infer(mom, input, dump_rng, 100))
                samples.write_row({fmt_double(x), "mom", std::to_string(s.component),
                                   fmt_double(s.value[0])});
            for (int i = 0; i < 100; ++i) {
                auto [m, v] = mc_mixture_sample(mc, input, dump_rng);
                samples.write_row({fmt_double(x), "mc_dropout", std::to_string(m),
                                   fmt_double(v[0])});
            }
        }
    }
    nlohmann::json summary = {
        {"config",
         {{"data_count", cfg.data_count},
          {"seed", cfg.seed},
          {"steps", cfg.steps},
          {"learning_rate", cfg.learning_rate},
          {"components", cfg.components},
          {"subset_ratio", cfg.subset_ratio},
          {"lambda", cfg.lambda},
          {"samples_per_x", cfg.samples_per_x}}},
        {"eval_xs", result.eval_xs},
        {"max_branch_error", result.max_branch_error},
        {"sample_coverage", result.sample_coverage},
        {"ffn_between_branches", result.ffn_between_branches}};
    write_json_file(summary, dir / "sine_summary.json");
    return result;
}

void write_sine_outputs(const SineResult&, const SineConfig&) {
    // run_sine_experiment writes its outputs while the trained models are live.
}

// ------------------------------------------------------------------ gmm ----

namespace {

MoMModel make_gmm_mom(const GmmConfig& cfg, Rng& rng) {
    MoMConfig mc;
    mc.input_dim = 2;
    mc.output_dim = 2;
    mc.components = 3;
    mc.encoder_hidden = {{4, Activation::Tanh, false}};
    mc.gate_hidden = {{4, Activation::Tanh, false}};
    mc.head_hidden_units = 4;
    mc.head_activation = Activation::Tanh;
    mc.subset_size = subset_size_from_ratio(cfg.subset_ratio, 16);
    mc.lambda = cfg.lambda;
    MoMModel model = make_mom(mc, rng);
    model.variance_samples = 16;
    model.predictive_mean_inference = true;
    return model;
}

// Best assignment of model components to true components by total mean distance.
std::vector<std::size_t> match_components(const std::vector<Tensor>& model_means,
                                          const GaussianMixtureSpec& truth) {
    std::vector<std::size_t> perm(model_means.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::vector<std::size_t> best = perm;
    double best_cost = -1.0;
    std::sort(perm.begin(), perm.end());
    do {
        double cost = 0.0;
        for (std::size_t c = 0; c < truth.components.size(); ++c)
            cost += l2_distance(model_means[perm[c]], truth.components[c].mean);
        if (best_cost < 0.0 || cost < best_cost) {
            best_cost = cost;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;  // best[c] = model component matched to true component c
}

std::vector<GmmComponentReport> gmm_report(const std::vector<Tensor>& model_means,
                                           const std::vector<std::vector<Tensor>>& samples_by_comp,
                                           const GaussianMixtureSpec& truth) {
    std::vector<std::size_t> match = match_components(model_means, truth);
    std::vector<GmmComponentReport> reports;
    for (std::size_t c = 0; c < truth.components.size(); ++c) {
        GmmComponentReport rep;
        rep.model_component = match[c];
        rep.mean_error = l2_distance(model_means[match[c]], truth.components[c].mean);
        const std::vector<Tensor>& samples = samples_by_comp[match[c]];
        rep.sample_count = samples.size();
        if (samples.size() >= 10) {
            Tensor sd = elementwise_sd(samples);
            double ratio = 0.0;
            for (std::size_t d = 0; d < sd.size(); ++d) {
                double true_var = truth.components[c].sd[d] * truth.components[c].sd[d];
                ratio += (sd[d] * sd[d]) / true_var;
            }
            rep.variance_ratio = ratio / double(sd.size());
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

}  // namespace

GmmResult run_gaussian_mixture_experiment(const GmmConfig& cfg) {
    Rng data_rng(mix_seed(cfg.seed, 0, 1, 0));
    GmmDataset ds = gen_gaussian_mixture(data_rng, cfg.data_count);
    Tensor input = Tensor::zeros({2});
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : input.data) v = normal(data_rng);

    std::uniform_int_distribution<std::size_t> pick(0, ds.samples.size() - 1);

    // MoM.
    Rng mom_rng(mix_seed(cfg.seed, 0, 2, 0));
    MoMModel mom = make_gmm_mom(cfg, mom_rng);
    for (std::size_t s = 0; s < cfg.steps; ++s)
        train_step(mom, input, ds.samples[pick(mom_rng)], cfg.learning_rate, mom_rng);

    Rng eval_rng(mix_seed(cfg.seed, 0, 3, 0));
    std::vector<Tensor> mom_means;
    for (std::size_t m = 0; m < mom.components(); ++m)
        mom_means.push_back(component_stats(mom, m, input, eval_rng).mean);
    std::vector<std::vector<Tensor>> mom_samples(mom.components());
    for (const MoMSample& s : infer(mom, input, eval_rng, cfg.sample_count))
        mom_samples[s.component].push_back(s.value);

    // MC-dropout mixture baseline.
    Rng mc_rng(mix_seed(cfg.seed, 0, 4, 0));
    McMixture mc;
    for (int m = 0; m < 3; ++m) {
        MHDropoutNetwork net;
        net.net = make_mlp(2, {{4, Activation::Tanh, true}, {2, Activation::Identity, false}},
                           mc_rng, 1.0);
        net.keep_prob = 0.5;
        net.subset_size = 1;
        mc.nets.push_back(std::move(net));
    }
    mc.gate = make_mlp(2, {{4, Activation::Tanh, false}, {3, Activation::Identity, false}},
                       mc_rng, 1.0);
    for (std::size_t s = 0; s < cfg.steps; ++s)
        mc_mixture_train_step(mc, input, ds.samples[pick(mc_rng)], cfg.learning_rate, mc_rng);

    Rng mc_eval_rng(mix_seed(cfg.seed, 0, 5, 0));
    std::vector<Tensor> mc_means;
    for (const MHDropoutNetwork& net : mc.nets) {
        std::vector<Tensor> outs =
            hypotheses_values(net, input, enumerate_masks(net));
        mc_means.push_back(predictive_mean(outs));
    }
    std::vector<std::vector<Tensor>> mc_samples(mc.nets.size());
    for (std::size_t s = 0; s < cfg.sample_count; ++s) {
        auto [m, v] = mc_mixture_sample(mc, input, mc_eval_rng);
        mc_samples[m].push_back(v);
    }

    GmmResult result;
    result.mom = gmm_report(mom_means, mom_samples, ds.truth);
    result.baseline = gmm_report(mc_means, mc_samples, ds.truth);

    auto dir = ensure_out_dir(cfg.out_dir);
    CsvWriter csv((dir / "gmm_components.csv").string(),
                  {"model", "true_component", "model_component", "mean_error", "variance_ratio",
                   "samples"});
    for (std::size_t c = 0; c < result.mom.size(); ++c)
        csv.write_row({"mom", std::to_string(c), std::to_string(result.mom[c].model_component),
                       fmt_double(result.mom[c].mean_error),
                       fmt_double(result.mom[c].variance_ratio),
                       std::to_string(result.mom[c].sample_count)});
    for (std::size_t c = 0; c < result.baseline.size(); ++c)
        csv.write_row({"mc_dropout", std::to_string(c),
                       std::to_string(result.baseline[c].model_component),
                       fmt_double(result.baseline[c].mean_error),
                       fmt_double(result.baseline[c].variance_ratio),
                       std::to_string(result.baseline[c].sample_count)});

    CsvWriter samples_csv((dir / "gmm_samples.csv").string(), {"model", "component", "y0", "y1"});
    auto dump = [&](const char* name, const std::vector<std::vector<Tensor>>& groups) {
        for (std::size_t m = 0; m < groups.size(); ++m)
            for (std::size_t i = 0; i < groups[m].size() && i < 500; ++i)
                samples_csv.write_row({name, std::to_string(m), fmt_double(groups[m][i][0]),
                                       fmt_double(groups[m][i][1])});
    };
    dump("mom", mom_samples);
    dump("mc_dropout", mc_samples);

    nlohmann::json summary;
    summary["config"] = {{"data_count", cfg.data_count}, {"seed", cfg.seed},
                         {"steps", cfg.steps},           {"learning_rate", cfg.learning_rate},
                         {"subset_ratio", cfg.subset_ratio}, {"lambda", cfg.lambda},
                         {"sample_count", cfg.sample_count}};
    auto report_json = [](const std::vector<GmmComponentReport>& reps) {
        nlohmann::json arr = nlohmann::json::array();
        for (const GmmComponentReport& r : reps)
            arr.push_back({{"model_component", r.model_component},
                           {"mean_error", r.mean_error},
                           {"variance_ratio", r.variance_ratio},
                           {"samples", r.sample_count}});
        return arr;
    };
    summary["mom"] = report_json(result.mom);
    summary["mc_dropout"] = report_json(result.baseline);
    write_json_file(summary, dir / "gmm_summary.json");
    return result;
}

void write_gmm_outputs(const GmmResult&, const GmmConfig&) {
    // run_gaussian_mixture_experiment writes its outputs directly.
}

// ----------------------------------------------------------- vq-compare ----

namespace {

GaussianMixtureSpec four_cluster_spec() {
    GaussianMixtureSpec spec;
    spec.components = {
        {Tensor::vector({0.2, 0.2}), Tensor::vector({0.05, 0.05}), 0.25},
        {Tensor::vector({0.2, 0.8}), Tensor::vector({0.05, 0.05}), 0.25},
        {Tensor::vector({0.8, 0.2}), Tensor::vector({0.05, 0.05}), 0.25},
        {Tensor::vector({0.8, 0.8}), Tensor::vector({0.05, 0.05}), 0.25},
    };
    return spec;
}

MHVQModel make_toy_vq(std::size_t primary, std::size_t secondary, std::size_t subset, Rng& rng) {
    MHVQConfig vc;
    vc.input_dim = 2;
    vc.latent_dim = 2;
    vc.primary_entries = primary;
    vc.secondary_entries = secondary;
    vc.encoder_hidden = {{8, Activation::Tanh, false}};
    vc.decoder_hidden = {{8, Activation::Tanh, false}};
    vc.subset_size = subset;
    return make_mhvq(vc, rng);
}

double mhvq_reconstruction_mse(const MHVQModel& model, const std::vector<Tensor>& data,
                               bool use_offsets) {
    std::vector<DropoutMask> all = enumerate_masks(model.offset);
    double acc = 0.0;
    for (const Tensor& x : data) {
        Tensor y = model.encoder.forward_value(x);
        Tensor e = quantize(model.primary, y).second;
        Tensor latent = e;
        if (use_offsets) {
            Tensor y2 = model.secondary_encoder.forward_value(x);
            Tensor e2 = quantize(model.secondary, y2).second;
            double best = -1.0;
            for (const Tensor& h : hypotheses_values(model.offset, e2, all)) {
                Tensor cand = e;
                for (std::size_t i = 0; i < cand.size(); ++i) cand[i] += h[i];
                double d = l2_distance(cand, y);
                if (best < 0.0 || d < best) {
                    best = d;
                    latent = cand;
                }
            }
        }
        Tensor rec = model.decoder.forward_value(latent);
        double err = 0.0;
        for (std::size_t i = 0; i < rec.size(); ++i) {
            double d = rec[i] - x[i];
            err += d * d;
        }
        acc += err;
    }
    return acc / double(data.size());
}

double cluster_spread_ratio(const std::vector<Tensor>& generated,
                            const GaussianMixtureSpec& truth) {
    std::vector<std::vector<Tensor>> groups(truth.components.size());
    for (const Tensor& g : generated) {
        std::size_t best = 0;
        double best_d = l2_distance(g, truth.components[0].mean);
        for (std::size_t c = 1; c < truth.components.size(); ++c) {
            double d = l2_distance(g, truth.components[c].mean);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        groups[best].push_back(g);
    }
    double acc = 0.0;
    std::size_t counted = 0;
    for (std::size_t c = 0; c < groups.size(); ++c) {
        if (groups[c].size() < 10) continue;
        Tensor sd = elementwise_sd(groups[c]);
        for (std::size_t d = 0; d < sd.size(); ++d)
            acc += sd[d] / truth.components[c].sd[d];
        counted += truth.components[c].mean.size();
    }
    return counted ? acc / double(counted) : 0.0;
}

}  // namespace

VqCompareResult run_vq_comparison(const VqCompareConfig& cfg) {
    Rng data_rng(mix_seed(cfg.seed, 0, 1, 0));
    GmmDataset ds = gen_gaussian_mixture(data_rng, cfg.data_count, four_cluster_spec());
    std::uniform_int_distribution<std::size_t> pick(0, ds.samples.size() - 1);

    VqCompareResult result;
    for (std::size_t total : cfg.codebook_grid) {
        // Plain VQ with all entries in the primary codebook.
        Rng vq_rng(mix_seed(cfg.seed, total, 2, 0));
        MHVQModel vq = make_toy_vq(total, 1, cfg.subset_size, vq_rng);
        for (std::size_t s = 0; s < cfg.steps; ++s)
            vq_train_step(vq, ds.samples[pick(vq_rng)], cfg.learning_rate);

        // MH-VQ with a matched budget split between the two codebooks.
        Rng mh_rng(mix_seed(cfg.seed, total, 3, 0));
        std::size_t primary = std::max<std::size_t>(1, total / 2);
        MHVQModel mh = make_toy_vq(primary, total - primary, cfg.subset_size, mh_rng);
        for (std::size_t s = 0; s < cfg.steps; ++s)
            mhvq_train_step(mh, ds.samples[pick(mh_rng)], cfg.learning_rate, mh_rng);

        Rng gen_rng(mix_seed(cfg.seed, total, 4, 0));
        PosteriorTable vq_post = fit_categorical_posterior(vq, ds.samples);
        PosteriorTable mh_post = fit_categorical_posterior(mh, ds.samples);

        VqCompareRow vq_row;
        vq_row.model = "vq";
        vq_row.total_entries = total;
        vq_row.reconstruction_mse = mhvq_reconstruction_mse(vq, ds.samples, false);
        vq_row.spread_ratio =
            cluster_spread_ratio(generate_vq(vq, vq_post, gen_rng, cfg.generate_count), ds.truth);
        vq_row.max_token_latent_spread = 0.0;  // codebook point mass
        result.rows.push_back(vq_row);

        VqCompareRow mh_row;
        mh_row.model = "mhvq";
        mh_row.total_entries = total;
        mh_row.reconstruction_mse = mhvq_reconstruction_mse(mh, ds.samples, true);
        GeneratedLatents latents = generate_latents(mh, mh_post, gen_rng, cfg.generate_count);
        std::vector<Tensor> decoded;
        decoded.reserve(latents.latents.size());
        for (const auto& [pair, latent] : latents.latents)
            decoded.push_back(mh.decoder.forward_value(latent));
        mh_row.spread_ratio = cluster_spread_ratio(decoded, ds.truth);
        for (const auto& [pair, gaussian] : latents.stats)
            for (double v : gaussian.variance.data)
                mh_row.max_token_latent_spread = std::max(mh_row.max_token_latent_spread, v);
        result.rows.push_back(mh_row);
    }
    return result;
}

void write_vq_compare_outputs(const VqCompareResult& result, const VqCompareConfig& cfg) {
    auto dir = ensure_out_dir(cfg.out_dir);
    CsvWriter csv((dir / "vq_compare.csv").string(),
                  {"model", "total_entries", "reconstruction_mse", "spread_ratio",
                   "max_token_latent_spread"});
    for (const VqCompareRow& row : result.rows)
        csv.write_row({row.model, std::to_string(row.total_entries),
                       fmt_double(row.reconstruction_mse), fmt_double(row.spread_ratio),
                       fmt_double(row.max_token_latent_spread)});
    nlohmann::json summary;
    summary["config"] = {{"seed", cfg.seed},
                         {"data_count", cfg.data_count},
                         {"steps", cfg.steps},
                         {"learning_rate", cfg.learning_rate},
                         {"codebook_grid", cfg.codebook_grid},
                         {"subset_size", cfg.subset_size},
                         {"generate_count", cfg.generate_count}};
    nlohmann::json rows = nlohmann::json::array();
    for (const VqCompareRow& row : result.rows)
        rows.push_back({{"model", row.model},
                        {"total_entries", row.total_entries},
                        {"reconstruction_mse", row.reconstruction_mse},
                        {"spread_ratio", row.spread_ratio},
                        {"max_token_latent_spread", row.max_token_latent_spread}});
    summary["rows"] = rows;
    write_json_file(summary, dir / "vq_compare_summary.json");
}

}  // namespace mhd
