#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "prog/tensor.hpp"

namespace prog::diff {

using prog::ModelParams;
using prog::Tensor;

// Reverse-mode tape over dense tensors. Each op records its inputs and
// enough auxiliary data for an exact vector-Jacobian product. Tapes are
// per-sample and never shared across threads; parameters enter as leaves
// bound to a ModelParams slot so gradients can be accumulated externally.
class Tape {
public:
    enum class Op : std::uint8_t {
        Input,       // constant leaf
        Param,       // trainable leaf, aux_i0 = param slot
        MatVec,      // inputs: {W [m x n], x [n]} -> [m]
        Add,         // elementwise a + b
        Sub,         // elementwise a - b
        Mul,         // elementwise a * b
        Scale,       // aux_d0 * a
        AddScalar,   // a + aux_d0
        Slice,       // aux_i0 = offset, aux_i1 = length
        Sigmoid,
        Tanh,
        Elu,         // alpha = 1
        Softplus,    // overflow-safe log(1 + e^x)
        Exp,
        Log,
        Square,
        Relu,        // max(x, 0); hinge building block
        Sum,         // reduce to scalar
        Dot,         // inputs {a, b} -> scalar
        PolyExp4,    // 1 + u + u^2/2! + u^3/3! + u^4/4!, elementwise
        WeightedCe2, // inputs {logits[2]}: aux_i0 = label, aux_d0 = class weight
        GammaMean,   // inputs {lambda[1], k[1]} -> lambda * Gamma(1 + 1/k)
    };

    struct Node {
        Op op;
        int in0 = -1;
        int in1 = -1;
        int aux_i0 = 0;
        int aux_i1 = 0;
        double aux_d0 = 0.0;
        Tensor value;
        Tensor grad;  // allocated lazily in backward()
    };

    // Reusing one tape across samples keeps node storage warm.
    void reset() { nodes_.clear(); }

    int input(Tensor v);
    int param(const ModelParams& params, int slot);

    int matvec(int w, int x);
    int add(int a, int b);
    int sub(int a, int b);
    int mul(int a, int b);
    int scale(int a, double c);
    int add_scalar(int a, double c);
    int neg(int a);
    int slice(int a, std::size_t offset, std::size_t len);
    int sigmoid(int a);
    int tanh_(int a);
    int elu(int a);
    int softplus(int a);
    int exp_(int a);
    int log_(int a);
    int square(int a);
    int relu(int a);
    int sum(int a);
    int dot(int a, int b);
    int poly_exp4(int a);
    int weighted_ce2(int logits, int label, double weight);
    int gamma_mean(int lambda, int k);

    const Tensor& value(int node) const { return nodes_[node].value; }
    double scalar_value(int node) const { return nodes_[node].value[0]; }
    std::size_t node_count() const { return nodes_.size(); }

    // Reverse sweep from a scalar node. Parameter-leaf gradients are added
    // into sink[slot]; sink tensors must already match parameter shapes.
    void backward(int loss_node, std::vector<Tensor>& sink);

    // Gradient of the loss w.r.t. a non-parameter node (valid after backward).
    const Tensor& node_grad(int node) const { return nodes_[node].grad; }

private:
    int push(Node n);
    std::vector<Node> nodes_;
};

// Gradient buffer shaped like a ModelParams.
std::vector<Tensor> zero_grads(const ModelParams& params);

// Sum of squares of all non-exempt parameters as a tape expression:
// the l2 penalty term shared by every training loss here.
int l2_penalty(Tape& tape, const ModelParams& params, double strength);

double softplus_stable(double x);

}  // namespace prog::diff
