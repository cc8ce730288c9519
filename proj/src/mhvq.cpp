#include "mhd/mhvq.hpp"

#include <cmath>

namespace mhd {

std::vector<Parameter*> Codebook::parameters() {
    std::vector<Parameter*> ps;
    for (Parameter& p : embeddings) ps.push_back(&p);
    return ps;
}

Codebook make_codebook(std::size_t entries, std::size_t dim, Rng& rng, double spread) {
    if (entries == 0) throw ValueError("make_codebook: need at least one embedding");
    Codebook cb;
    std::normal_distribution<double> dist(0.0, spread);
    for (std::size_t k = 0; k < entries; ++k) {
        Tensor e = Tensor::zeros({dim});
        for (double& v : e.data) v = dist(rng);
        cb.embeddings.emplace_back(std::move(e), static_cast<int>(k));
    }
    return cb;
}

std::pair<std::size_t, Tensor> quantize(const Codebook& codebook, const Tensor& y) {
    if (codebook.embeddings.empty()) throw ValueError("quantize: empty codebook");
    std::size_t best = 0;
    double best_dist = 0.0;
    for (std::size_t k = 0; k < codebook.size(); ++k) {
        const Tensor& e = codebook.embeddings[k].value;
        require_same_shape(e, y, "quantize");
        double d = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            double diff = y[i] - e[i];
            d += diff * diff;
        }
        if (k == 0 || d < best_dist) {
            best = k;
            best_dist = d;
        }
    }
    return {best, codebook.embeddings[best].value};
}

Var codebook_loss(Tape& tape, Var y, Var y_hat, double beta) {
    if (beta <= 0.0) throw ValueError("codebook_loss: beta must be positive");
    Var embed_term = tape.squared_l2(tape.detach(y), y_hat);
    Var commit_term = tape.squared_l2(y, tape.detach(y_hat));
    return tape.add(embed_term, tape.scale(commit_term, beta));
}

std::vector<Parameter*> MHVQModel::parameters() {
    std::vector<Parameter*> ps = primary_branch_parameters();
    for (Parameter* p : secondary_encoder.parameters()) ps.push_back(p);
    for (Parameter* p : secondary.parameters()) ps.push_back(p);
    for (Parameter* p : offset.parameters()) ps.push_back(p);
    return ps;
}

std::vector<Parameter*> MHVQModel::primary_branch_parameters() {
    std::vector<Parameter*> ps;
    for (Parameter* p : encoder.parameters()) ps.push_back(p);
    for (Parameter* p : decoder.parameters()) ps.push_back(p);
    for (Parameter* p : primary.parameters()) ps.push_back(p);
    return ps;
}

MHVQModel make_mhvq(const MHVQConfig& cfg, Rng& rng) {
    MHVQModel model;
    std::vector<LayerSpec> enc = cfg.encoder_hidden;
    enc.push_back({cfg.latent_dim, Activation::Identity, false});
    model.encoder = make_mlp(cfg.input_dim, enc, rng, cfg.init_scale);
    model.secondary_encoder = make_mlp(cfg.input_dim, enc, rng, cfg.init_scale);

    std::vector<LayerSpec> dec = cfg.decoder_hidden;
    dec.push_back({cfg.input_dim, Activation::Identity, false});
    model.decoder = make_mlp(cfg.latent_dim, dec, rng, cfg.init_scale);

    model.primary = make_codebook(cfg.primary_entries, cfg.latent_dim, rng, cfg.codebook_spread);
    model.secondary =
        make_codebook(cfg.secondary_entries, cfg.latent_dim, rng, cfg.codebook_spread);

    model.offset.net = make_mlp(cfg.latent_dim,
                                {{cfg.offset_hidden_units, cfg.offset_activation, true},
                                 {cfg.latent_dim, Activation::Identity, false}},
                                rng, cfg.init_scale);
    model.offset.keep_prob = cfg.keep_prob;
    model.offset.subset_size = cfg.subset_size;

    model.beta = cfg.beta;
    model.latent_wta_weight = cfg.latent_wta_weight;
    model.latent_wta_enabled = cfg.latent_wta_enabled;
    return model;
}

VqStepResult mhvq_train_step(MHVQModel& model, const Tensor& x, double learning_rate, Rng& rng) {
    Tape tape;
    Var xc = tape.constant(x);
    Var y = model.encoder.forward(tape, xc);
    Var y2 = model.secondary_encoder.forward(tape, xc);

    std::size_t z = quantize(model.primary, tape.value(y)).first;
    std::size_t z2 = quantize(model.secondary, tape.value(y2)).first;
    Var e = tape.leaf(model.primary.embeddings[z]);
    Var e2 = tape.leaf(model.secondary.embeddings[z2]);

    const MHDropoutNetwork& head = model.offset;
    std::vector<DropoutMask> masks = head.subset_size >= head.subnetwork_count()
                                         ? enumerate_masks(head)
                                         : sample_masks(head, head.subset_size, rng);
    std::vector<Var> hyps;
    hyps.reserve(masks.size());
    for (const DropoutMask& m : masks)
        hyps.push_back(tape.add(e, head.forward_masked(tape, e2, m)));

    // Winner: hypothesis nearest to the primary encoded vector y.
    WtaResult latent = wta_loss(tape, hyps, y);
    Var winner_hyp = hyps[latent.selection.winner_index];

    Var decoded = model.decoder.forward(tape, tape.straight_through(y, tape.value(winner_hyp)));
    Var recon = tape.squared_l2(xc, decoded);
    Var cb1 = codebook_loss(tape, y, e, model.beta);
    Var cb2 = codebook_loss(tape, y2, e2, model.beta);

    Var total = tape.add(recon, tape.add(cb1, cb2));
    if (model.latent_wta_enabled)
        total = tape.add(total, tape.scale(latent.loss, model.latent_wta_weight));

    VqStepResult result;
    result.reconstruction = tape.value(recon)[0];
    result.codebook_primary = tape.value(cb1)[0];
    result.codebook_secondary = tape.value(cb2)[0];
    result.latent_wta = tape.value(latent.loss)[0];
    result.winner = latent.selection.winner_index;
    result.tokens = {z, z2};

    tape.backward(total);
    sgd_step(model.parameters(), learning_rate);
    return result;
}

VqStepResult vq_train_step(MHVQModel& model, const Tensor& x, double learning_rate) {
    Tape tape;
    Var xc = tape.constant(x);
    Var y = model.encoder.forward(tape, xc);
    std::size_t z = quantize(model.primary, tape.value(y)).first;
    Var e = tape.leaf(model.primary.embeddings[z]);

    Var decoded = model.decoder.forward(tape, tape.straight_through(y, tape.value(e)));
    Var recon = tape.squared_l2(xc, decoded);
    Var cb = codebook_loss(tape, y, e, model.beta);
    Var total = tape.add(recon, cb);

    VqStepResult result;
    result.reconstruction = tape.value(recon)[0];
    result.codebook_primary = tape.value(cb)[0];
    result.tokens = {z, 0};

    tape.backward(total);
    sgd_step(model.primary_branch_parameters(), learning_rate);
    return result;
}

TokenPair encode_tokens(const MHVQModel& model, const Tensor& x) {
    std::size_t z = quantize(model.primary, model.encoder.forward_value(x)).first;
    std::size_t z2 = quantize(model.secondary, model.secondary_encoder.forward_value(x)).first;
    return {z, z2};
}

TokenPair PosteriorTable::sample(Rng& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    double acc = 0.0;
    for (const auto& [pair, p] : probabilities) {
        acc += p;
        if (u <= acc) return pair;
    }
    return probabilities.rbegin()->first;
}

PosteriorTable fit_categorical_posterior(const MHVQModel& model, const std::vector<Tensor>& data) {
    if (data.empty()) throw ValueError("fit_categorical_posterior: empty dataset");
    PosteriorTable table;
    for (const Tensor& x : data) table.probabilities[encode_tokens(model, x)] += 1.0;
    for (auto& [pair, p] : table.probabilities) p /= double(data.size());
    return table;
}

GeneratedLatents generate_latents(const MHVQModel& model, const PosteriorTable& posterior,
                                  Rng& rng, std::size_t count) {
    if (posterior.probabilities.empty())
        throw ValueError("generate_latents: empty posterior table");
    GeneratedLatents out;
    out.latents.reserve(count);
    std::normal_distribution<double> unit(0.0, 1.0);
    for (std::size_t s = 0; s < count; ++s) {
        TokenPair pair = posterior.sample(rng);
        auto it = out.stats.find(pair);
        if (it == out.stats.end()) {
            const Tensor& mean = model.primary.embeddings[pair.primary].value;
            const Tensor& e2 = model.secondary.embeddings[pair.secondary].value;
            const MHDropoutNetwork& head = model.offset;
            std::vector<DropoutMask> masks = head.subset_size >= head.subnetwork_count()
                                                 ? enumerate_masks(head)
                                                 : sample_masks(head, head.subset_size, rng);
            LatentGaussian g;
            g.mean = mean;
            g.variance = predictive_variance(hypotheses_values(head, e2, masks));
            it = out.stats.emplace(pair, std::move(g)).first;
        }
        Tensor draw = it->second.mean;
        for (std::size_t i = 0; i < draw.size(); ++i)
            draw[i] += std::sqrt(it->second.variance[i]) * unit(rng);
        out.latents.emplace_back(pair, std::move(draw));
    }
    return out;
}

std::vector<Tensor> generate(const MHVQModel& model, const PosteriorTable& posterior, Rng& rng,
                             std::size_t count) {
    GeneratedLatents latents = generate_latents(model, posterior, rng, count);
    std::vector<Tensor> out;
    out.reserve(count);
    for (const auto& [pair, latent] : latents.latents)
        out.push_back(model.decoder.forward_value(latent));
    return out;
}

std::vector<Tensor> generate_vq(const MHVQModel& model, const PosteriorTable& posterior, Rng& rng,
                                std::size_t count) {
    if (posterior.probabilities.empty()) throw ValueError("generate_vq: empty posterior table");
    std::vector<Tensor> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        TokenPair pair = posterior.sample(rng);
        out.push_back(model.decoder.forward_value(model.primary.embeddings[pair.primary].value));
    }
    return out;
}

}  // namespace mhd
