#include "mhd/mom.hpp"

namespace mhd {

std::vector<Parameter*> MoMModel::parameters() {
    std::vector<Parameter*> ps;
    for (Mlp& enc : encoders)
        for (Parameter* p : enc.parameters()) ps.push_back(p);
    for (MHDropoutNetwork& head : heads)
        for (Parameter* p : head.parameters()) ps.push_back(p);
    for (Parameter* p : gate.parameters()) ps.push_back(p);
    return ps;
}

MoMModel make_mom(const MoMConfig& cfg, Rng& rng) {
    if (cfg.components == 0) throw ValueError("make_mom: need at least one component");
    MoMModel model;
    model.lambda = cfg.lambda;
    std::size_t half = cfg.output_dim;
    for (std::size_t m = 0; m < cfg.components; ++m) {
        std::vector<LayerSpec> enc = cfg.encoder_hidden;
        enc.push_back({2 * half, Activation::Identity, false});
        model.encoders.push_back(make_mlp(cfg.input_dim, enc, rng, cfg.init_scale));

        MHDropoutNetwork head;
        head.net = make_mlp(half,
                            {{cfg.head_hidden_units, cfg.head_activation, true},
                             {half, Activation::Identity, false}},
                            rng, cfg.init_scale);
        head.keep_prob = cfg.keep_prob;
        head.subset_size = cfg.subset_size;
        model.heads.push_back(std::move(head));
    }
    std::vector<LayerSpec> gate = cfg.gate_hidden;
    gate.push_back({cfg.components, Activation::Identity, false});
    model.gate = make_mlp(cfg.input_dim, gate, rng, cfg.init_scale);
    return model;
}

std::pair<Var, Var> encode_split(const MoMModel& model, Tape& tape, std::size_t m, Var input) {
    if (m >= model.components()) throw ValueError("encode_split: component index out of range");
    Var z = model.encoders[m].forward(tape, input);
    std::size_t len = tape.value(z).size();
    if (len % 2 != 0)
        throw DimensionError("encode_split: latent length " + std::to_string(len) + " is odd");
    std::size_t half = len / 2;
    return {tape.slice(z, 0, half), tape.slice(z, half, half)};
}

std::pair<Tensor, Tensor> encode_split_value(const MoMModel& model, std::size_t m,
                                             const Tensor& input) {
    Tape tape;
    auto [e, ep] = encode_split(model, tape, m, tape.constant(input));
    return {tape.value(e), tape.value(ep)};
}

std::vector<std::vector<Var>> train_hypotheses_with_masks(
    const MoMModel& model, Tape& tape, Var input,
    const std::vector<std::vector<DropoutMask>>& masks) {
    if (masks.size() != model.components())
        throw DimensionError("train_hypotheses: mask grid has " + std::to_string(masks.size()) +
                             " rows for " + std::to_string(model.components()) + " components");
    std::vector<std::vector<Var>> grid(model.components());
    for (std::size_t m = 0; m < model.components(); ++m) {
        auto [e, ep] = encode_split(model, tape, m, input);
        for (const DropoutMask& mask : masks[m])
            grid[m].push_back(tape.add(e, model.heads[m].forward_masked(tape, ep, mask)));
    }
    return grid;
}

std::vector<std::vector<Var>> train_hypotheses(const MoMModel& model, Tape& tape, Var input,
                                               Rng& rng) {
    std::vector<std::vector<DropoutMask>> masks;
    masks.reserve(model.components());
    for (const MHDropoutNetwork& head : model.heads)
        masks.push_back(sample_masks(head, head.subset_size, rng));
    return train_hypotheses_with_masks(model, tape, input, masks);
}

MoMStepResult train_step(MoMModel& model, const Tensor& input, const Tensor& target,
                         double learning_rate, Rng& rng) {
    Tape tape;
    Var x = tape.constant(input);
    auto grid = train_hypotheses(model, tape, x, rng);
    Var phi = tape.softmax(model.gate.forward(tape, x));
    MomLossResult res = mom_loss(tape, grid, phi, tape.constant(target), model.lambda);
    double loss = tape.value(res.loss)[0];
    tape.backward(res.loss);
    sgd_step(model.parameters(), learning_rate);
    return {loss, res.winner};
}

Tensor mixture_coefficients(const MoMModel& model, const Tensor& input) {
    Tape tape;
    Var phi = tape.softmax(model.gate.forward(tape, tape.constant(input)));
    return tape.value(phi);
}

ComponentStats component_stats(const MoMModel& model, std::size_t m, const Tensor& input,
                               Rng& rng) {
    auto [e, ep] = encode_split_value(model, m, input);
    const MHDropoutNetwork& head = model.heads[m];
    std::size_t draws = model.variance_samples ? model.variance_samples : head.subset_size;
    std::vector<DropoutMask> masks = draws >= head.subnetwork_count()
                                         ? enumerate_masks(head)
                                         : sample_masks(head, draws, rng);
    std::vector<Tensor> outs = hypotheses_values(head, ep, masks);
    ComponentStats stats;
    stats.variance = predictive_variance(outs);
    if (model.predictive_mean_inference) {
        Tensor offset = predictive_mean(outs);
        stats.mean = e;
        for (std::size_t i = 0; i < stats.mean.size(); ++i) stats.mean[i] += offset[i];
    } else {
        stats.mean = e;
    }
    return stats;
}

std::vector<MoMSample> infer(const MoMModel& model, const Tensor& input, Rng& rng,
                             std::size_t count) {
    if (count == 0) throw ValueError("infer: sample count must be positive");
    Tensor phi = mixture_coefficients(model, input);
    std::discrete_distribution<std::size_t> component(phi.data.begin(), phi.data.end());
    std::normal_distribution<double> unit(0.0, 1.0);

    std::vector<MoMSample> samples;
    samples.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        std::size_t m = component(rng);
        ComponentStats stats = component_stats(model, m, input, rng);
        Tensor draw = stats.mean;
        for (std::size_t i = 0; i < draw.size(); ++i)
            draw[i] += std::sqrt(stats.variance[i]) * unit(rng);
        samples.push_back({m, std::move(draw)});
    }
    return samples;
}

}  // namespace mhd
