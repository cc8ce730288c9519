#pragma once

#include <array>

#include "mhd/network.hpp"

namespace mhd {

// One shared input with N alternative targets.
struct MultipointDataset {
    Tensor input;                 // drawn from N(0,1) per coordinate
    std::vector<Tensor> targets;  // i.i.d. uniform on [0,1] per coordinate
};

MultipointDataset gen_multipoint(std::size_t n_targets, Rng& rng, std::size_t input_dim = 2,
                                 std::size_t output_dim = 2);

// Inverse sine wave: the model sees x and predicts y, where
// x = y + 0.3 sin(2 pi y) + eps, eps ~ U(-0.1, 0.1).
struct SinePoint {
    double x;  // model input
    double y;  // model target
};

std::vector<SinePoint> gen_inverse_sine(std::size_t count, Rng& rng);

double sine_forward(double y);  // y + 0.3 sin(2 pi y)

// All y in (0,1) with sine_forward(y) == x, found by dense scan + bisection.
std::vector<double> sine_branches(double x, std::size_t grid = 4096);

// The x-interval where the inverse sine has three branches.
std::pair<double, double> sine_multivalued_region();

struct GaussianComponent {
    Tensor mean;
    Tensor sd;  // per-dimension (diagonal covariance)
    double weight;
};

struct GaussianMixtureSpec {
    std::vector<GaussianComponent> components;
};

// Three well-separated components inside the unit box.
GaussianMixtureSpec default_gmm_spec();

struct GmmDataset {
    std::vector<Tensor> samples;
    GaussianMixtureSpec truth;
};

GmmDataset gen_gaussian_mixture(Rng& rng, std::size_t count,
                                const GaussianMixtureSpec& spec = default_gmm_spec());

// Elementwise population standard deviation of a set of equally shaped vectors.
Tensor elementwise_sd(const std::vector<Tensor>& set);

// Standard Deviation Distance: (1/K) sum_k || sd(predicted_k) - sd(targets_k) ||_2.
double sdd(const std::vector<std::vector<Tensor>>& predicted,
           const std::vector<std::vector<Tensor>>& targets);

}  // namespace mhd
