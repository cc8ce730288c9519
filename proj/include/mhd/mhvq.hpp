#pragma once

#include <map>
#include <utility>

#include "mhd/losses.hpp"

namespace mhd {

// K learnable embeddings of equal length with nearest-neighbor lookup.
struct Codebook {
    std::vector<Parameter> embeddings;

    std::size_t size() const { return embeddings.size(); }
    std::size_t dim() const { return embeddings.front().value.size(); }
    std::vector<Parameter*> parameters();
};

Codebook make_codebook(std::size_t entries, std::size_t dim, Rng& rng, double spread = 1.0);

// argmin_k ||y - e_k||_2, ties to the lowest index.
std::pair<std::size_t, Tensor> quantize(const Codebook& codebook, const Tensor& y);

// sq(sg[y] - y_hat) + beta * sq(y - sg[y_hat]); the first term trains the
// embedding, the second (commitment) the encoder.
Var codebook_loss(Tape& tape, Var y, Var y_hat, double beta);

struct TokenPair {
    std::size_t primary = 0;
    std::size_t secondary = 0;
    auto operator<=>(const TokenPair&) const = default;
};

// Vector-quantized autoencoder with an optional secondary branch whose
// dropout head turns each primary embedding into a cluster with learned spread.
struct MHVQModel {
    Mlp encoder;             // x -> y in R^d
    Mlp secondary_encoder;   // x -> y' in R^d
    Mlp decoder;             // R^d -> x
    Codebook primary;
    Codebook secondary;
    MHDropoutNetwork offset;  // e'* -> primary-latent offset
    double beta = 0.25;
    double latent_wta_weight = 1.0;
    bool latent_wta_enabled = true;

    std::vector<Parameter*> parameters();
    std::vector<Parameter*> primary_branch_parameters();  // encoder, decoder, primary codebook
};

struct MHVQConfig {
    std::size_t input_dim = 2;
    std::size_t latent_dim = 2;
    std::size_t primary_entries = 4;
    std::size_t secondary_entries = 4;
    std::vector<LayerSpec> encoder_hidden;
    std::vector<LayerSpec> decoder_hidden;
    std::size_t offset_hidden_units = 4;
    Activation offset_activation = Activation::Tanh;
    double keep_prob = 0.5;
    std::size_t subset_size = 4;  // T
    double beta = 0.25;
    double latent_wta_weight = 1.0;
    bool latent_wta_enabled = true;
    double init_scale = 1.0;
    double codebook_spread = 0.5;
};

MHVQModel make_mhvq(const MHVQConfig& cfg, Rng& rng);

struct VqStepResult {
    double reconstruction = 0.0;
    double codebook_primary = 0.0;
    double codebook_secondary = 0.0;
    double latent_wta = 0.0;
    std::size_t winner = 0;
    TokenPair tokens;
};

// Full MH-VQ step: quantize both branches, build T hypotheses e* + f^t(e'*),
// decode the winner through the straight-through estimator, optimize
// reconstruction + both codebook losses (+ the latent winner distance when
// enabled).
VqStepResult mhvq_train_step(MHVQModel& model, const Tensor& x, double learning_rate, Rng& rng);

// Plain VQ baseline step on the primary branch only.
VqStepResult vq_train_step(MHVQModel& model, const Tensor& x, double learning_rate);

TokenPair encode_tokens(const MHVQModel& model, const Tensor& x);

// Empirical joint frequency of (primary, secondary) tokens over a dataset.
struct PosteriorTable {
    std::map<TokenPair, double> probabilities;
    TokenPair sample(Rng& rng) const;
};

PosteriorTable fit_categorical_posterior(const MHVQModel& model, const std::vector<Tensor>& data);

struct LatentGaussian {
    Tensor mean;
    Tensor variance;
};

struct GeneratedLatents {
    std::vector<std::pair<TokenPair, Tensor>> latents;
    // The per-token-pair Gaussian actually sampled from in this call.
    std::map<TokenPair, LatentGaussian> stats;
};

// Latent draws: sample a token pair, then a diagonal Gaussian with mean e*
// and the predictive variance of T subnetwork hypotheses from e'*. The
// variance estimate is drawn once per token pair per call.
GeneratedLatents generate_latents(const MHVQModel& model, const PosteriorTable& posterior,
                                  Rng& rng, std::size_t count);

// Decoded samples.
std::vector<Tensor> generate(const MHVQModel& model, const PosteriorTable& posterior, Rng& rng,
                             std::size_t count);

// Plain VQ generation: decode the primary embedding of a sampled pair (point mass).
std::vector<Tensor> generate_vq(const MHVQModel& model, const PosteriorTable& posterior, Rng& rng,
                                std::size_t count);

}  // namespace mhd
