#include "mhd/dropout.hpp"

namespace mhd {

std::size_t MHDropoutNetwork::mask_unit_count() const {
    std::size_t d = 0;
    for (const DenseLayer& l : net.layers)
        if (l.maskable) d += l.out_dim();
    return d;
}

std::size_t MHDropoutNetwork::subnetwork_count() const {
    return std::size_t{1} << mask_unit_count();
}

Var MHDropoutNetwork::forward_masked(Tape& tape, Var input, const DropoutMask& mask) const {
    Var h = input;
    std::size_t mi = 0;
    for (const DenseLayer& layer : net.layers) {
        auto& l = const_cast<DenseLayer&>(layer);
        h = tape.affine(h, tape.leaf(l.weights), tape.leaf(l.bias));
        if (layer.act != Activation::Identity) h = tape.activation(h, layer.act);
        if (layer.maskable) {
            if (mi >= mask.layer_bits.size())
                throw DimensionError("forward_masked: mask has too few layers");
            h = tape.mask_apply(h, mask.layer_bits[mi++]);
        }
    }
    if (mi != mask.layer_bits.size())
        throw DimensionError("forward_masked: mask has too many layers");
    return h;
}

Tensor MHDropoutNetwork::forward_masked_value(const Tensor& input, const DropoutMask& mask) const {
    Tape tape;
    Var out = forward_masked(tape, tape.constant(input), mask);
    return tape.value(out);
}

DropoutMask decode_mask(const MHDropoutNetwork& net, std::uint32_t realization_index) {
    DropoutMask mask;
    mask.realization_index = realization_index;
    std::size_t bit = 0;
    for (const DenseLayer& l : net.net.layers) {
        if (!l.maskable) continue;
        Tensor bits = Tensor::zeros({l.out_dim()});
        for (std::size_t u = 0; u < l.out_dim(); ++u, ++bit)
            bits[u] = (realization_index >> bit) & 1u ? 1.0 : 0.0;
        mask.layer_bits.push_back(std::move(bits));
    }
    return mask;
}

std::uint32_t encode_mask(const MHDropoutNetwork& net, const DropoutMask& mask) {
    std::uint32_t index = 0;
    std::size_t bit = 0;
    std::size_t li = 0;
    for (const DenseLayer& l : net.net.layers) {
        if (!l.maskable) continue;
        const Tensor& bits = mask.layer_bits.at(li++);
        for (std::size_t u = 0; u < l.out_dim(); ++u, ++bit)
            if (bits[u] != 0.0) index |= (1u << bit);
    }
    return index;
}

std::vector<DropoutMask> sample_masks(const MHDropoutNetwork& net, std::size_t count, Rng& rng) {
    std::vector<DropoutMask> masks;
    masks.reserve(count);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < count; ++i) {
        DropoutMask m;
        for (const DenseLayer& l : net.net.layers) {
            if (!l.maskable) continue;
            Tensor bits = Tensor::zeros({l.out_dim()});
            for (std::size_t u = 0; u < l.out_dim(); ++u)
                bits[u] = unif(rng) < net.keep_prob ? 1.0 : 0.0;
            m.layer_bits.push_back(std::move(bits));
        }
        m.realization_index = encode_mask(net, m);
        masks.push_back(std::move(m));
    }
    return masks;
}

std::vector<DropoutMask> enumerate_masks(const MHDropoutNetwork& net) {
    std::size_t d = net.mask_unit_count();
    if (d > 20)
        throw CapacityError("enumerate_masks: " + std::to_string(d) +
                            " maskable units exceed the enumeration cap of 20");
    std::vector<DropoutMask> masks;
    std::size_t total = std::size_t{1} << d;
    masks.reserve(total);
    for (std::uint32_t i = 0; i < total; ++i) masks.push_back(decode_mask(net, i));
    return masks;
}

std::vector<Var> hypotheses(const MHDropoutNetwork& net, Tape& tape, Var input,
                            const std::vector<DropoutMask>& masks) {
    if (masks.empty()) throw ValueError("hypotheses: empty mask list");
    std::vector<Var> outs;
    outs.reserve(masks.size());
    for (const DropoutMask& m : masks) outs.push_back(net.forward_masked(tape, input, m));
    return outs;
}

std::vector<Tensor> hypotheses_values(const MHDropoutNetwork& net, const Tensor& input,
                                      const std::vector<DropoutMask>& masks) {
    if (masks.empty()) throw ValueError("hypotheses: empty mask list");
    std::vector<Tensor> outs;
    outs.reserve(masks.size());
    for (const DropoutMask& m : masks) outs.push_back(net.forward_masked_value(input, m));
    return outs;
}

Tensor predictive_mean(const std::vector<Tensor>& outputs) {
    if (outputs.empty()) throw ValueError("predictive_mean: empty output list");
    Tensor mean = Tensor::zeros(outputs.front().shape);
    for (const Tensor& t : outputs) {
        require_same_shape(mean, t, "predictive_mean");
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += t[i];
    }
    for (double& v : mean.data) v /= double(outputs.size());
    return mean;
}

Tensor predictive_variance(const std::vector<Tensor>& outputs) {
    if (outputs.size() < 2)
        throw ValueError("predictive_variance: need at least 2 outputs, got " +
                         std::to_string(outputs.size()));
    Tensor mean = predictive_mean(outputs);
    Tensor var = Tensor::zeros(mean.shape);
    for (const Tensor& t : outputs)
        for (std::size_t i = 0; i < var.size(); ++i) {
            double d = t[i] - mean[i];
            var[i] += d * d;
        }
    for (double& v : var.data) v /= double(outputs.size());
    return var;
}

Tensor mc_dropout_inference(const MHDropoutNetwork& net, const Tensor& input) {
    Tape tape;
    Var h = tape.constant(input);
    for (const DenseLayer& layer : net.net.layers) {
        auto& l = const_cast<DenseLayer&>(layer);
        h = tape.affine(h, tape.leaf(l.weights), tape.leaf(l.bias));
        if (layer.act != Activation::Identity) h = tape.activation(h, layer.act);
        if (layer.maskable) h = tape.scale(h, net.keep_prob);
    }
    return tape.value(h);
}

}  // namespace mhd
