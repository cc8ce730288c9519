#pragma once

#include <random>
#include <vector>

#include "mhd/autodiff.hpp"

namespace mhd {

using Rng = std::mt19937_64;

struct DenseLayer {
    Parameter weights;  // d_out x d_in
    Parameter bias;     // d_out
    Activation act = Activation::Identity;
    bool maskable = false;

    std::size_t in_dim() const { return weights.value.shape[1]; }
    std::size_t out_dim() const { return weights.value.shape[0]; }
};

// Plain fully connected network.
struct Mlp {
    std::vector<DenseLayer> layers;

    std::size_t input_dim() const { return layers.front().in_dim(); }
    std::size_t output_dim() const { return layers.back().out_dim(); }

    Var forward(Tape& tape, Var input) const;
    Tensor forward_value(const Tensor& input) const;

    std::vector<Parameter*> parameters();
    std::size_t parameter_count() const;
};

struct LayerSpec {
    std::size_t units;
    Activation act = Activation::Identity;
    bool maskable = false;
};

// Builds an MLP with N(0, init_scale/sqrt(fan_in)) weights and zero biases.
Mlp make_mlp(std::size_t input_dim, const std::vector<LayerSpec>& specs, Rng& rng,
             double init_scale = 1.0);

}  // namespace mhd
