#pragma once

#include "mhd/losses.hpp"

namespace mhd {

// Mixture of Multiple-Output functions: M encoders feeding M dropout-based
// multiple-output heads plus a mixture-coefficient network over the raw input.
struct MoMModel {
    std::vector<Mlp> encoders;             // input -> latent of length 2*half
    std::vector<MHDropoutNetwork> heads;   // half -> half offsets
    Mlp gate;                              // input -> M logits
    double lambda = 0.1;
    // Inference mean: the encoder half e by default; when true, e plus the
    // average head output instead.
    bool predictive_mean_inference = false;
    // Subnetwork draws used for the variance estimate at inference.
    // 0 means use the head's subset size; the full subnetwork count switches
    // to enumeration.
    std::size_t variance_samples = 0;

    std::size_t components() const { return encoders.size(); }
    std::size_t latent_half() const { return encoders.front().output_dim() / 2; }
    std::vector<Parameter*> parameters();
};

struct MoMConfig {
    std::size_t input_dim = 2;
    std::size_t output_dim = 2;   // = latent half
    std::size_t components = 3;   // M
    std::vector<LayerSpec> encoder_hidden;  // hidden layers; a linear 2*half head is appended
    std::vector<LayerSpec> gate_hidden;     // hidden layers; a linear M head is appended
    std::size_t head_hidden_units = 4;      // maskable layer width of each dropout head
    Activation head_activation = Activation::Tanh;
    double keep_prob = 0.5;
    std::size_t subset_size = 4;  // T
    double lambda = 0.1;
    double init_scale = 1.0;
};

MoMModel make_mom(const MoMConfig& cfg, Rng& rng);

// z = q^m(input), split into equal halves (e, e').
std::pair<Var, Var> encode_split(const MoMModel& model, Tape& tape, std::size_t m, Var input);
std::pair<Tensor, Tensor> encode_split_value(const MoMModel& model, std::size_t m,
                                             const Tensor& input);

// grid[m][t] = e + f^{m,t}(e') over T sampled masks per component.
std::vector<std::vector<Var>> train_hypotheses(const MoMModel& model, Tape& tape, Var input,
                                               Rng& rng);
// Same with the mask draw made explicit (frozen-mask training and testing).
std::vector<std::vector<Var>> train_hypotheses_with_masks(
    const MoMModel& model, Tape& tape, Var input,
    const std::vector<std::vector<DropoutMask>>& masks);

struct MoMStepResult {
    double loss = 0.0;
    MomWinner winner;
};

// One SGD step of the combined loss.
MoMStepResult train_step(MoMModel& model, const Tensor& input, const Tensor& target,
                         double learning_rate, Rng& rng);

struct MoMSample {
    std::size_t component = 0;
    Tensor value;
};

// Softmax of the gate logits.
Tensor mixture_coefficients(const MoMModel& model, const Tensor& input);

// Draws `count` samples: component from the multinomial over the mixture
// coefficients, then a diagonal Gaussian around that component's mean with
// the predictive variance of its subnetwork outputs. Fresh masks per draw.
std::vector<MoMSample> infer(const MoMModel& model, const Tensor& input, Rng& rng,
                             std::size_t count);

// Mean and diagonal variance of one component at one input (enumerates masks
// when variance_samples covers the full subnetwork count).
struct ComponentStats {
    Tensor mean;
    Tensor variance;
};
ComponentStats component_stats(const MoMModel& model, std::size_t m, const Tensor& input,
                               Rng& rng);

}  // namespace mhd
