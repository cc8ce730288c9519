#include "mhd/network.hpp"

namespace mhd {

Var Mlp::forward(Tape& tape, Var input) const {
    Var h = input;
    for (const DenseLayer& layer : layers) {
        auto& l = const_cast<DenseLayer&>(layer);  // leaves record Parameter references
        h = tape.affine(h, tape.leaf(l.weights), tape.leaf(l.bias));
        if (layer.act != Activation::Identity) h = tape.activation(h, layer.act);
    }
    return h;
}

Tensor Mlp::forward_value(const Tensor& input) const {
    Tape tape;
    Var out = forward(tape, tape.constant(input));
    return tape.value(out);
}

std::vector<Parameter*> Mlp::parameters() {
    std::vector<Parameter*> ps;
    for (DenseLayer& l : layers) {
        ps.push_back(&l.weights);
        ps.push_back(&l.bias);
    }
    return ps;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const DenseLayer& l : layers) n += l.weights.value.size() + l.bias.value.size();
    return n;
}

Mlp make_mlp(std::size_t input_dim, const std::vector<LayerSpec>& specs, Rng& rng,
             double init_scale) {
    Mlp net;
    std::size_t d_in = input_dim;
    int next_id = 0;
    for (const LayerSpec& spec : specs) {
        std::normal_distribution<double> dist(0.0, init_scale / std::sqrt(double(d_in)));
        Tensor w = Tensor::zeros({spec.units, d_in});
        for (double& v : w.data) v = dist(rng);
        DenseLayer layer;
        layer.weights = Parameter(std::move(w), next_id++);
        layer.bias = Parameter(Tensor::zeros({spec.units}), next_id++);
        layer.act = spec.act;
        layer.maskable = spec.maskable;
        net.layers.push_back(std::move(layer));
        d_in = spec.units;
    }
    return net;
}

}  // namespace mhd
