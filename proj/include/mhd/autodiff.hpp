#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mhd/tensor.hpp"

namespace mhd {

enum class Activation { Identity, Sigmoid, Tanh, Relu };

// A trainable value. The gradient buffer always mirrors the value's shape
// and is populated by Tape::backward, consumed by sgd_step.
struct Parameter {
    Tensor value;
    Tensor gradient;
    int id = -1;

    Parameter() = default;
    explicit Parameter(Tensor v, int ident = -1)
        : value(std::move(v)), gradient(Tensor::zeros(value.shape)), id(ident) {}

    void zero_gradient() { std::fill(gradient.data.begin(), gradient.data.end(), 0.0); }
};

// Handle to a node on a Tape.
struct Var {
    int id = -1;
};

// Record of one forward pass. Owns intermediate values and their gradient
// buffers; backward replays the recorded primitives in reverse and
// accumulates leaf gradients into the referenced Parameters.
class Tape {
  public:
    Var leaf(Parameter& p);
    Var constant(Tensor t);

    // W x + b, W is d_out x d_in, x and b vectors.
    Var affine(Var input, Var weights, Var bias);
    Var activation(Var input, Activation kind);
    // Elementwise product with a binary (0/1) constant mask.
    Var mask_apply(Var input, const Tensor& mask);
    Var softmax(Var input);
    Var squared_l2(Var a, Var b);

    Var add(Var a, Var b);
    Var mul(Var a, Var b);           // elementwise, same shape
    Var scale(Var a, double c);      // constant scaling
    Var scale_units(Var a, const Tensor& factors);  // elementwise constant factors
    Var select(Var v, std::size_t index);           // scalar pick from a vector
    Var log(Var v);                  // elementwise natural log
    Var slice(Var v, std::size_t offset, std::size_t length);
    Var detach(Var v);               // stop-gradient
    // Forward value is `forward_value`; backward passes the incoming gradient
    // to `input` unchanged (straight-through estimator).
    Var straight_through(Var input, const Tensor& forward_value);

    const Tensor& value(Var v) const { return nodes_[v.id].value; }

    // Seeds d(loss)/d(loss)=1, sweeps the tape in reverse, adds each leaf's
    // gradient into its Parameter, then clears the tape.
    void backward(Var loss);

    void clear();
    std::size_t size() const { return nodes_.size(); }

  private:
    enum class Op {
        Leaf,
        Constant,
        Affine,
        Activation,
        MaskApply,
        Softmax,
        SquaredL2,
        Add,
        Mul,
        Scale,
        ScaleUnits,
        Select,
        Log,
        Slice,
        Detach,
        StraightThrough,
    };

    struct Node {
        Tensor value;
        Tensor grad;
        Op op;
        std::array<int, 3> in{-1, -1, -1};
        Parameter* param = nullptr;
        Tensor aux;            // mask / unit factors
        double c = 0.0;        // scale constant
        std::size_t index = 0; // select / slice offset
        std::size_t length = 0;
        Activation act = Activation::Identity;
    };

    Var push(Node n);
    std::vector<Node> nodes_;
};

// value <- value - lr * gradient for each parameter, then zero gradients.
void sgd_step(const std::vector<Parameter*>& params, double learning_rate);
void zero_gradients(const std::vector<Parameter*>& params);

}  // namespace mhd
