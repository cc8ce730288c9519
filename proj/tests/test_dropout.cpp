#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "mhd/dropout.hpp"

using namespace mhd;

namespace {

MHDropoutNetwork make_242(Rng& rng, double keep = 0.5) {
    MHDropoutNetwork net;
    net.net = make_mlp(2, {{4, Activation::Sigmoid, true}, {2, Activation::Sigmoid, false}}, rng,
                       1.0);
    net.keep_prob = keep;
    net.subset_size = 4;
    return net;
}

}  // namespace

TEST_CASE("appendix network has 22 parameters and 16 subnetworks") {
    Rng rng(1);
    MHDropoutNetwork net = make_242(rng);
    CHECK(net.net.parameter_count() == 22);
    CHECK(net.mask_unit_count() == 4);
    CHECK(net.subnetwork_count() == 16);
}

TEST_CASE("sample_masks determinism and keep-rate") {
    Rng rng(5);
    MHDropoutNetwork net = make_242(rng);

    Rng a(42), b(42);
    auto ma = sample_masks(net, 10, a);
    auto mb = sample_masks(net, 10, b);
    REQUIRE(ma.size() == 10);
    for (std::size_t i = 0; i < 10; ++i)
        CHECK(ma[i].realization_index == mb[i].realization_index);

    // Empirical per-unit keep rate over 1e5 draws stays near 0.5.
    Rng c(7);
    auto many = sample_masks(net, 100000, c);
    for (std::size_t unit = 0; unit < 4; ++unit) {
        double kept = 0;
        for (const DropoutMask& m : many) kept += m.layer_bits[0][unit];
        CHECK(std::abs(kept / 100000.0 - 0.5) < 0.01);
    }
}

TEST_CASE("sample_masks near keep probability one yields mostly all-ones masks") {
    Rng rng(5);
    MHDropoutNetwork net = make_242(rng, 1.0 - 1e-9);
    Rng draw(3);
    auto masks = sample_masks(net, 1000, draw);
    std::size_t ones = 0;
    for (const DropoutMask& m : masks)
        if (m.realization_index == 15) ++ones;
    CHECK(ones == 1000);
}

TEST_CASE("enumerate_masks sizes and ordering") {
    Rng rng(2);
    MHDropoutNetwork one;
    one.net = make_mlp(1, {{1, Activation::Identity, true}, {1, Activation::Identity, false}},
                       rng, 1.0);
    auto two = enumerate_masks(one);
    REQUIRE(two.size() == 2);
    CHECK(two[0].layer_bits[0][0] == 0.0);
    CHECK(two[1].layer_bits[0][0] == 1.0);

    MHDropoutNetwork net = make_242(rng);
    auto sixteen = enumerate_masks(net);
    REQUIRE(sixteen.size() == 16);
    std::set<std::uint32_t> indices;
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(sixteen[i].realization_index == i);
        indices.insert(sixteen[i].realization_index);
    }
    CHECK(indices.size() == 16);
}

TEST_CASE("sampled masks always appear in the enumeration") {
    Rng rng(2);
    MHDropoutNetwork net;
    net.net = make_mlp(2, {{3, Activation::Tanh, true}, {2, Activation::Identity, false}}, rng,
                       1.0);
    auto all = enumerate_masks(net);
    REQUIRE(all.size() == 8);
    Rng draw(9);
    for (const DropoutMask& m : sample_masks(net, 200, draw)) {
        REQUIRE(m.realization_index < 8);
        const DropoutMask& ref = all[m.realization_index];
        CHECK(ref.layer_bits[0].data == m.layer_bits[0].data);
        CHECK(encode_mask(net, m) == m.realization_index);
    }
}

TEST_CASE("enumerate_masks rejects explosive mask counts") {
    Rng rng(2);
    MHDropoutNetwork net;
    net.net = make_mlp(2, {{21, Activation::Tanh, true}, {1, Activation::Identity, false}}, rng,
                       1.0);
    CHECK_THROWS_AS(enumerate_masks(net), CapacityError);
}

TEST_CASE("forward_masked all-ones equals plain forward, all-zeros is bias path") {
    Rng rng(8);
    MHDropoutNetwork net = make_242(rng);
    Tensor x = Tensor::vector({0.4, -0.9});

    DropoutMask ones = decode_mask(net, 15);
    Tensor masked = net.forward_masked_value(x, ones);
    Tensor plain = net.net.forward_value(x);
    CHECK(masked.data == plain.data);

    DropoutMask zeros = decode_mask(net, 0);
    Tensor biased = net.forward_masked_value(x, zeros);
    // Equivalent to pushing a zero hidden vector through the output layer.
    const DenseLayer& out = net.net.layers.back();
    for (std::size_t r = 0; r < 2; ++r) {
        double z = out.bias.value[r];
        double expect = 1.0 / (1.0 + std::exp(-z));
        CHECK(biased[r] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("forward_masked matches hand trace for mask 5") {
    Rng rng(8);
    MHDropoutNetwork net = make_242(rng);
    Tensor x = Tensor::vector({0.4, -0.9});
    // Mask index 5 = binary 0101: hidden units 0 and 2 active.
    DropoutMask m5 = decode_mask(net, 5);
    CHECK(m5.layer_bits[0].data == std::vector<double>{1, 0, 1, 0});

    const DenseLayer& h = net.net.layers[0];
    const DenseLayer& out = net.net.layers[1];
    Tensor hidden = Tensor::zeros({4});
    for (std::size_t r = 0; r < 4; ++r) {
        double z = h.bias.value[r];
        for (std::size_t c = 0; c < 2; ++c) z += h.weights.value.at(r, c) * x[c];
        double act = 1.0 / (1.0 + std::exp(-z));
        hidden[r] = (r == 0 || r == 2) ? act : 0.0;
    }
    for (std::size_t r = 0; r < 2; ++r) {
        double z = out.bias.value[r];
        for (std::size_t c = 0; c < 4; ++c) z += out.weights.value.at(r, c) * hidden[c];
        double expect = 1.0 / (1.0 + std::exp(-z));
        CHECK(net.forward_masked_value(x, m5)[r] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("hypotheses preserve order and match per-mask forward") {
    Rng rng(4);
    MHDropoutNetwork net = make_242(rng);
    Tensor x = Tensor::vector({1.0, 1.0});
    auto all = enumerate_masks(net);
    auto outs = hypotheses_values(net, x, all);
    REQUIRE(outs.size() == 16);
    for (std::size_t i = 0; i < 16; ++i)
        CHECK(outs[i].data == net.forward_masked_value(x, all[i]).data);

    auto single = hypotheses_values(net, x, {all[7]});
    REQUIRE(single.size() == 1);
    CHECK(single[0].data == net.forward_masked_value(x, all[7]).data);

    std::vector<DropoutMask> repeated(3, all[2]);
    auto rep = hypotheses_values(net, x, repeated);
    CHECK(rep[0].data == rep[1].data);
    CHECK(rep[1].data == rep[2].data);
}

TEST_CASE("predictive mean and variance") {
    std::vector<Tensor> pair = {Tensor::vector({0, 0}), Tensor::vector({2, 2})};
    Tensor mean = predictive_mean(pair);
    CHECK(mean[0] == 1.0);
    CHECK(mean[1] == 1.0);

    std::vector<Tensor> single = {Tensor::vector({3, 4})};
    CHECK(predictive_mean(single).data == single[0].data);

    std::vector<Tensor> scalar_pair = {Tensor::vector({0}), Tensor::vector({2})};
    CHECK(predictive_variance(scalar_pair)[0] == doctest::Approx(1.0));

    std::vector<Tensor> same = {Tensor::vector({5, 5}), Tensor::vector({5, 5})};
    Tensor var = predictive_variance(same);
    CHECK(var[0] == 0.0);
    CHECK(var[1] == 0.0);

    CHECK_THROWS_AS(predictive_mean(std::vector<Tensor>{}), ValueError);
    CHECK_THROWS_AS(predictive_variance(single), ValueError);
}

TEST_CASE("predictive mean and variance match enumeration oracle") {
    Rng rng(12);
    MHDropoutNetwork net = make_242(rng);
    Tensor x = Tensor::vector({-0.2, 0.8});
    auto outs = hypotheses_values(net, x, enumerate_masks(net));
    Tensor mean = predictive_mean(outs);
    Tensor var = predictive_variance(outs);
    for (std::size_t d = 0; d < 2; ++d) {
        double m = 0.0;
        for (const Tensor& o : outs) m += o[d];
        m /= 16.0;
        double v = 0.0;
        for (const Tensor& o : outs) v += (o[d] - m) * (o[d] - m);
        v /= 16.0;
        CHECK(mean[d] == doctest::Approx(m).epsilon(1e-14));
        CHECK(var[d] == doctest::Approx(v).epsilon(1e-12));
        CHECK(var[d] >= 0.0);
    }
}

TEST_CASE("variance is shift invariant, mean is shift covariant") {
    Rng rng(13);
    MHDropoutNetwork net = make_242(rng);
    auto outs = hypotheses_values(net, Tensor::vector({0.1, 0.2}), enumerate_masks(net));
    Tensor shift = Tensor::vector({3.7, -1.2});
    std::vector<Tensor> shifted;
    for (Tensor o : outs) {
        for (std::size_t d = 0; d < 2; ++d) o[d] += shift[d];
        shifted.push_back(std::move(o));
    }
    Tensor m0 = predictive_mean(outs), m1 = predictive_mean(shifted);
    Tensor v0 = predictive_variance(outs), v1 = predictive_variance(shifted);
    for (std::size_t d = 0; d < 2; ++d) {
        CHECK(m1[d] == doctest::Approx(m0[d] + shift[d]).epsilon(1e-12));
        CHECK(v1[d] == doctest::Approx(v0[d]).epsilon(1e-9));
    }
}

TEST_CASE("mc_dropout_inference weight scaling") {
    Rng rng(21);
    // keep probability ~1: equals the plain forward.
    MHDropoutNetwork net = make_242(rng, 1.0 - 1e-12);
    Tensor x = Tensor::vector({0.5, 0.5});
    Tensor scaled = mc_dropout_inference(net, x);
    Tensor plain = net.net.forward_value(x);
    for (std::size_t d = 0; d < 2; ++d)
        CHECK(scaled[d] == doctest::Approx(plain[d]).epsilon(1e-9));
}

TEST_CASE("mc_dropout_inference closed form on a linear net") {
    // Single maskable linear layer into a linear output: scaling the hidden
    // output by p must equal p times the hidden contribution plus output bias.
    Rng rng(22);
    MHDropoutNetwork net;
    net.net = make_mlp(1, {{2, Activation::Identity, true}, {1, Activation::Identity, false}},
                       rng, 1.0);
    net.keep_prob = 0.5;
    Tensor x = Tensor::vector({1.0});
    Tensor full = net.net.forward_value(x);
    double out_bias = net.net.layers[1].bias.value[0];
    Tensor scaled = mc_dropout_inference(net, x);
    CHECK(scaled[0] == doctest::Approx(out_bias + 0.5 * (full[0] - out_bias)).epsilon(1e-12));

    // On a linear net the enumeration mean coincides with weight scaling.
    Tensor mean = predictive_mean(hypotheses_values(net, x, enumerate_masks(net)));
    CHECK(scaled[0] == doctest::Approx(mean[0]).epsilon(1e-10));
}
