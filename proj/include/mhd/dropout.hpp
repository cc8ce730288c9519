#pragma once

#include <cstdint>
#include <vector>

#include "mhd/network.hpp"

namespace mhd {

// One realization of the Bernoulli gating variables: a 0/1 vector for each
// maskable layer, plus the integer encoding of the whole bit pattern
// (first maskable unit = least significant bit).
struct DropoutMask {
    std::vector<Tensor> layer_bits;  // one binary vector per maskable layer
    std::uint32_t realization_index = 0;
};

// A base network treated as an implicit ensemble of 2^D subnetworks, where
// D is the number of maskable hidden units.
struct MHDropoutNetwork {
    Mlp net;
    double keep_prob = 0.5;     // per-unit keep probability
    std::size_t subset_size = 1;  // T, hypotheses per SWTA pass

    std::size_t mask_unit_count() const;     // D
    std::size_t subnetwork_count() const;    // 2^D

    Var forward_masked(Tape& tape, Var input, const DropoutMask& mask) const;
    Tensor forward_masked_value(const Tensor& input, const DropoutMask& mask) const;

    std::vector<Parameter*> parameters() { return net.parameters(); }
};

DropoutMask decode_mask(const MHDropoutNetwork& net, std::uint32_t realization_index);
std::uint32_t encode_mask(const MHDropoutNetwork& net, const DropoutMask& mask);

// T i.i.d. masks, each unit kept independently with probability keep_prob.
std::vector<DropoutMask> sample_masks(const MHDropoutNetwork& net, std::size_t count, Rng& rng);

// All 2^D masks in realization-index order. D is capped at 20.
std::vector<DropoutMask> enumerate_masks(const MHDropoutNetwork& net);

// One output per mask, order preserving, taped.
std::vector<Var> hypotheses(const MHDropoutNetwork& net, Tape& tape, Var input,
                            const std::vector<DropoutMask>& masks);
std::vector<Tensor> hypotheses_values(const MHDropoutNetwork& net, const Tensor& input,
                                      const std::vector<DropoutMask>& masks);

Tensor predictive_mean(const std::vector<Tensor>& outputs);
// Population variance (divide by T) around the predictive mean. Needs >= 2 outputs.
Tensor predictive_variance(const std::vector<Tensor>& outputs);

// Deterministic forward with masks off and maskable-layer outputs scaled by
// the keep probability (classic weight-scaling dropout inference).
Tensor mc_dropout_inference(const MHDropoutNetwork& net, const Tensor& input);

}  // namespace mhd
