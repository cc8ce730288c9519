#include "mhd/autodiff.hpp"

#include <cmath>

namespace mhd {

Var Tape::push(Node n) {
    n.grad = Tensor::zeros(n.value.shape);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Parameter& p) {
    Node n;
    n.op = Op::Leaf;
    n.value = p.value;
    n.param = &p;
    return push(std::move(n));
}

Var Tape::constant(Tensor t) {
    Node n;
    n.op = Op::Constant;
    n.value = std::move(t);
    return push(std::move(n));
}

Var Tape::affine(Var input, Var weights, Var bias) {
    const Tensor& x = nodes_[input.id].value;
    const Tensor& w = nodes_[weights.id].value;
    const Tensor& b = nodes_[bias.id].value;
    if (x.shape.size() != 1 || w.shape.size() != 2 || b.shape.size() != 1 ||
        w.shape[1] != x.shape[0] || w.shape[0] != b.shape[0])
        throw DimensionError("affine: incompatible shapes W=" + w.shape_str() + " x=" +
                             x.shape_str() + " b=" + b.shape_str());
    std::size_t rows = w.shape[0], cols = w.shape[1];
    Tensor out = Tensor::zeros({rows});
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = b[r];
        for (std::size_t c = 0; c < cols; ++c) acc += w.at(r, c) * x[c];
        out[r] = acc;
    }
    Node n;
    n.op = Op::Affine;
    n.value = std::move(out);
    n.in = {input.id, weights.id, bias.id};
    return push(std::move(n));
}

Var Tape::activation(Var input, Activation kind) {
    const Tensor& x = nodes_[input.id].value;
    Tensor out = x;
    for (double& v : out.data) {
        switch (kind) {
            case Activation::Identity: break;
            case Activation::Sigmoid: v = 1.0 / (1.0 + std::exp(-v)); break;
            case Activation::Tanh: v = std::tanh(v); break;
            case Activation::Relu: v = v > 0.0 ? v : 0.0; break;
        }
    }
    Node n;
    n.op = Op::Activation;
    n.value = std::move(out);
    n.in = {input.id, -1, -1};
    n.act = kind;
    return push(std::move(n));
}

Var Tape::mask_apply(Var input, const Tensor& mask) {
    const Tensor& x = nodes_[input.id].value;
    require_same_shape(x, mask, "mask_apply");
    for (double m : mask.data)
        if (m != 0.0 && m != 1.0)
            throw ValueError("mask_apply: mask entries must be 0 or 1");
    Tensor out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
    Node n;
    n.op = Op::MaskApply;
    n.value = std::move(out);
    n.in = {input.id, -1, -1};
    n.aux = mask;
    return push(std::move(n));
}

Var Tape::softmax(Var input) {
    const Tensor& x = nodes_[input.id].value;
    if (x.size() < 1) throw DimensionError("softmax: empty input");
    double mx = x[0];
    for (double v : x.data) mx = std::max(mx, v);
    Tensor out = x;
    double sum = 0.0;
    for (double& v : out.data) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : out.data) v /= sum;
    Node n;
    n.op = Op::Softmax;
    n.value = std::move(out);
    n.in = {input.id, -1, -1};
    return push(std::move(n));
}

Var Tape::squared_l2(Var a, Var b) {
    const Tensor& ta = nodes_[a.id].value;
    const Tensor& tb = nodes_[b.id].value;
    require_same_shape(ta, tb, "squared_l2");
    double acc = 0.0;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        double d = ta[i] - tb[i];
        acc += d * d;
    }
    Node n;
    n.op = Op::SquaredL2;
    n.value = Tensor::scalar(acc);
    n.in = {a.id, b.id, -1};
    return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
    const Tensor& ta = nodes_[a.id].value;
    const Tensor& tb = nodes_[b.id].value;
    require_same_shape(ta, tb, "add");
    Tensor out = ta;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += tb[i];
    Node n;
    n.op = Op::Add;
    n.value = std::move(out);
    n.in = {a.id, b.id, -1};
    return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
    const Tensor& ta = nodes_[a.id].value;
    const Tensor& tb = nodes_[b.id].value;
    require_same_shape(ta, tb, "mul");
    Tensor out = ta;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= tb[i];
    Node n;
    n.op = Op::Mul;
    n.value = std::move(out);
    n.in = {a.id, b.id, -1};
    return push(std::move(n));
}

Var Tape::scale(Var a, double c) {
    Tensor out = nodes_[a.id].value;
    for (double& v : out.data) v *= c;
    Node n;
    n.op = Op::Scale;
    n.value = std::move(out);
    n.in = {a.id, -1, -1};
    n.c = c;
    return push(std::move(n));
}

Var Tape::scale_units(Var a, const Tensor& factors) {
    const Tensor& ta = nodes_[a.id].value;
    require_same_shape(ta, factors, "scale_units");
    Tensor out = ta;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factors[i];
    Node n;
    n.op = Op::ScaleUnits;
    n.value = std::move(out);
    n.in = {a.id, -1, -1};
    n.aux = factors;
    return push(std::move(n));
}

Var Tape::select(Var v, std::size_t index) {
    const Tensor& t = nodes_[v.id].value;
    if (index >= t.size())
        throw DimensionError("select: index " + std::to_string(index) + " out of range for " +
                             t.shape_str());
    Node n;
    n.op = Op::Select;
    n.value = Tensor::scalar(t[index]);
    n.in = {v.id, -1, -1};
    n.index = index;
    return push(std::move(n));
}

Var Tape::log(Var v) {
    Tensor out = nodes_[v.id].value;
    for (double& x : out.data) {
        if (x <= 0.0) throw ValueError("log: non-positive input");
        x = std::log(x);
    }
    Node n;
    n.op = Op::Log;
    n.value = std::move(out);
    n.in = {v.id, -1, -1};
    return push(std::move(n));
}

Var Tape::slice(Var v, std::size_t offset, std::size_t length) {
    const Tensor& t = nodes_[v.id].value;
    if (t.shape.size() != 1 || offset + length > t.size())
        throw DimensionError("slice: range [" + std::to_string(offset) + "," +
                             std::to_string(offset + length) + ") out of " + t.shape_str());
    Tensor out = Tensor::zeros({length});
    for (std::size_t i = 0; i < length; ++i) out[i] = t[offset + i];
    Node n;
    n.op = Op::Slice;
    n.value = std::move(out);
    n.in = {v.id, -1, -1};
    n.index = offset;
    n.length = length;
    return push(std::move(n));
}

Var Tape::detach(Var v) {
    Node n;
    n.op = Op::Detach;
    n.value = nodes_[v.id].value;
    n.in = {v.id, -1, -1};
    return push(std::move(n));
}

Var Tape::straight_through(Var input, const Tensor& forward_value) {
    const Tensor& x = nodes_[input.id].value;
    require_same_shape(x, forward_value, "straight_through");
    Node n;
    n.op = Op::StraightThrough;
    n.value = forward_value;
    n.in = {input.id, -1, -1};
    return push(std::move(n));
}

void Tape::backward(Var loss) {
    if (loss.id < 0 || loss.id >= static_cast<int>(nodes_.size()))
        throw ValueError("backward: loss is not on this tape");
    Node& top = nodes_[loss.id];
    if (!top.value.is_scalar())
        throw ValueError("backward: loss must be scalar, got shape " + top.value.shape_str());
    top.grad[0] = 1.0;

    for (int i = loss.id; i >= 0; --i) {
        Node& n = nodes_[i];
        const Tensor& g = n.grad;
        switch (n.op) {
            case Op::Leaf:
            case Op::Constant:
                break;
            case Op::Affine: {
                Node& xin = nodes_[n.in[0]];
                Node& win = nodes_[n.in[1]];
                Node& bin = nodes_[n.in[2]];
                const Tensor& x = xin.value;
                const Tensor& w = win.value;
                std::size_t rows = w.shape[0], cols = w.shape[1];
                for (std::size_t r = 0; r < rows; ++r) {
                    double gr = g[r];
                    bin.grad[r] += gr;
                    for (std::size_t c = 0; c < cols; ++c) {
                        win.grad.at(r, c) += gr * x[c];
                        xin.grad[c] += gr * w.at(r, c);
                    }
                }
                break;
            }
            case Op::Activation: {
                Node& xin = nodes_[n.in[0]];
                for (std::size_t k = 0; k < g.size(); ++k) {
                    double d = 1.0;
                    switch (n.act) {
                        case Activation::Identity: d = 1.0; break;
                        case Activation::Sigmoid: d = n.value[k] * (1.0 - n.value[k]); break;
                        case Activation::Tanh: d = 1.0 - n.value[k] * n.value[k]; break;
                        case Activation::Relu: d = xin.value[k] > 0.0 ? 1.0 : 0.0; break;
                    }
                    xin.grad[k] += g[k] * d;
                }
                break;
            }
            case Op::MaskApply: {
                Node& xin = nodes_[n.in[0]];
                for (std::size_t k = 0; k < g.size(); ++k) xin.grad[k] += g[k] * n.aux[k];
                break;
            }
            case Op::Softmax: {
                Node& xin = nodes_[n.in[0]];
                double dot = 0.0;
                for (std::size_t k = 0; k < g.size(); ++k) dot += g[k] * n.value[k];
                for (std::size_t k = 0; k < g.size(); ++k)
                    xin.grad[k] += n.value[k] * (g[k] - dot);
                break;
            }
            case Op::SquaredL2: {
                Node& ain = nodes_[n.in[0]];
                Node& bin = nodes_[n.in[1]];
                double gs = g[0];
                for (std::size_t k = 0; k < ain.value.size(); ++k) {
                    double d = 2.0 * (ain.value[k] - bin.value[k]) * gs;
                    ain.grad[k] += d;
                    bin.grad[k] -= d;
                }
                break;
            }
            case Op::Add: {
                Node& ain = nodes_[n.in[0]];
                Node& bin = nodes_[n.in[1]];
                for (std::size_t k = 0; k < g.size(); ++k) {
                    ain.grad[k] += g[k];
                    bin.grad[k] += g[k];
                }
                break;
            }
            case Op::Mul: {
                Node& ain = nodes_[n.in[0]];
                Node& bin = nodes_[n.in[1]];
                for (std::size_t k = 0; k < g.size(); ++k) {
                    ain.grad[k] += g[k] * bin.value[k];
                    bin.grad[k] += g[k] * ain.value[k];
                }
                break;
            }
            case Op::Scale: {
                Node& ain = nodes_[n.in[0]];
                for (std::size_t k = 0; k < g.size(); ++k) ain.grad[k] += g[k] * n.c;
                break;
            }
            case Op::ScaleUnits: {
                Node& ain = nodes_[n.in[0]];
                for (std::size_t k = 0; k < g.size(); ++k) ain.grad[k] += g[k] * n.aux[k];
                break;
            }
            case Op::Select: {
                nodes_[n.in[0]].grad[n.index] += g[0];
                break;
            }
            case Op::Log: {
                Node& ain = nodes_[n.in[0]];
                for (std::size_t k = 0; k < g.size(); ++k) ain.grad[k] += g[k] / ain.value[k];
                break;
            }
            case Op::Slice: {
                Node& ain = nodes_[n.in[0]];
                for (std::size_t k = 0; k < n.length; ++k) ain.grad[n.index + k] += g[k];
                break;
            }
            case Op::Detach:
                break;
            case Op::StraightThrough: {
                Node& ain = nodes_[n.in[0]];
                for (std::size_t k = 0; k < g.size(); ++k) ain.grad[k] += g[k];
                break;
            }
        }
    }

    for (Node& n : nodes_)
        if (n.op == Op::Leaf && n.param)
            for (std::size_t k = 0; k < n.grad.size(); ++k) n.param->gradient[k] += n.grad[k];

    clear();
}

void Tape::clear() { nodes_.clear(); }

void sgd_step(const std::vector<Parameter*>& params, double learning_rate) {
    if (learning_rate <= 0.0)
        throw ValueError("sgd_step: learning rate must be positive");
    for (Parameter* p : params) {
        for (std::size_t i = 0; i < p->value.size(); ++i)
            p->value[i] -= learning_rate * p->gradient[i];
        p->zero_gradient();
    }
}

void zero_gradients(const std::vector<Parameter*>& params) {
    for (Parameter* p : params) p->zero_gradient();
}

}  // namespace mhd
