#include "prog/autodiff.hpp"

#include <cmath>
#include <stdexcept>

#include "prog/weibull.hpp"

namespace prog::diff {

namespace {

void check(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

double softplus_stable(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

int Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

int Tape::input(Tensor v) {
    Node n;
    n.op = Op::Input;
    n.value = std::move(v);
    return push(std::move(n));
}

int Tape::param(const ModelParams& params, int slot) {
    Node n;
    n.op = Op::Param;
    n.aux_i0 = slot;
    n.value = params[slot];
    return push(std::move(n));
}

int Tape::matvec(int w, int x) {
    const Tensor& W = nodes_[w].value;
    const Tensor& X = nodes_[x].value;
    check(W.shape().size() == 2 && W.cols() == X.size(), "matvec: shape mismatch");
    Node n;
    n.op = Op::MatVec;
    n.in0 = w;
    n.in1 = x;
    n.value = Tensor::vector(W.rows());
    const std::size_t m = W.rows(), k = W.cols();
    for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        const double* row = W.data() + i * k;
        for (std::size_t j = 0; j < k; ++j) acc += row[j] * X[j];
        n.value[i] = acc;
    }
    return push(std::move(n));
}

int Tape::add(int a, int b) {
    const Tensor& A = nodes_[a].value;
    const Tensor& B = nodes_[b].value;
    check(A.size() == B.size(), "add: shape mismatch");
    Node n;
    n.op = Op::Add;
    n.in0 = a;
    n.in1 = b;
    n.value = A;
    for (std::size_t i = 0; i < B.size(); ++i) n.value[i] += B[i];
    return push(std::move(n));
}

int Tape::sub(int a, int b) {
    const Tensor& A = nodes_[a].value;
    const Tensor& B = nodes_[b].value;
    check(A.size() == B.size(), "sub: shape mismatch");
    Node n;
    n.op = Op::Sub;
    n.in0 = a;
    n.in1 = b;
    n.value = A;
    for (std::size_t i = 0; i < B.size(); ++i) n.value[i] -= B[i];
    return push(std::move(n));
}

int Tape::mul(int a, int b) {
    const Tensor& A = nodes_[a].value;
    const Tensor& B = nodes_[b].value;
    check(A.size() == B.size(), "mul: shape mismatch");
    Node n;
    n.op = Op::Mul;
    n.in0 = a;
    n.in1 = b;
    n.value = A;
    for (std::size_t i = 0; i < B.size(); ++i) n.value[i] *= B[i];
    return push(std::move(n));
}

int Tape::scale(int a, double c) {
    Node n;
    n.op = Op::Scale;
    n.in0 = a;
    n.aux_d0 = c;
    n.value = nodes_[a].value;
    for (auto& v : n.value.values()) v *= c;
    return push(std::move(n));
}

int Tape::add_scalar(int a, double c) {
    Node n;
    n.op = Op::AddScalar;
    n.in0 = a;
    n.aux_d0 = c;
    n.value = nodes_[a].value;
    for (auto& v : n.value.values()) v += c;
    return push(std::move(n));
}

int Tape::neg(int a) { return scale(a, -1.0); }

int Tape::slice(int a, std::size_t offset, std::size_t len) {
    const Tensor& A = nodes_[a].value;
    check(offset + len <= A.size(), "slice: out of range");
    Node n;
    n.op = Op::Slice;
    n.in0 = a;
    n.aux_i0 = static_cast<int>(offset);
    n.aux_i1 = static_cast<int>(len);
    n.value = Tensor::vector(len);
    for (std::size_t i = 0; i < len; ++i) n.value[i] = A[offset + i];
    return push(std::move(n));
}

int Tape::sigmoid(int a) {
    Node n;
    n.op = Op::Sigmoid;
    n.in0 = a;
    n.value = nodes_[a].value;
    for (auto& v : n.value.values()) v = 1.0 / (1.0 + std::exp(-v));
    return push(std::move(n));
}

int Tape::tanh_(int a) {
    Node n;
    n.op = Op::Tanh;
    n.in0 = a;
    n.value = nodes_[a].value;
    for (auto& v : n.value.values()) v = std::tanh(v);
    return push(std::move(n));
}

int Tape::elu(int a) {
    Node n;
    n.op = Op::Elu;
    n.in0 = a;
    n.value = nodes_[a].value;
    for (auto& v : n.value.values()) v = v > 0.0 ? v : std::expm1(v);
    return push(std::move(n));
}

int Tape::softplus(int a) {
    Node n;
    n.op = Op::Softplus;
    n.in0 = a;
    n.value = nodes_[a].value;
    for (auto& v : n.value.values()) v = softplus_stable(v);
    return push(std::move(n));
}

int Tape::exp_(int a) {
    Node n;
    n.op = Op::Exp;
    n.in0 = a;
    n.value = nodes_[a].value;
    for (auto& v : n.value.values()) v = std::exp(v);
    return push(std::move(n));
}

int Tape::log_(int a) {
    Node n;
    n.op = Op::Log;
    n.in0 = a;
    n.value = nodes_[a].value;
    for (auto& v : n.value.values()) v = std::log(v);
    return push(std::move(n));
}

int Tape::square(int a) {
    Node n;
    n.op = Op::Square;
    n.in0 = a;
    n.value = nodes_[a].value;
    for (auto& v : n.value.values()) v = v * v;
    return push(std::move(n));
}

int Tape::relu(int a) {
    Node n;
    n.op = Op::Relu;
    n.in0 = a;
    n.value = nodes_[a].value;
    for (auto& v : n.value.values()) v = v > 0.0 ? v : 0.0;
    return push(std::move(n));
}

int Tape::sum(int a) {
    Node n;
    n.op = Op::Sum;
    n.in0 = a;
    double acc = 0.0;
    for (double v : nodes_[a].value.values()) acc += v;
    n.value = Tensor::scalar(acc);
    return push(std::move(n));
}

int Tape::dot(int a, int b) {
    const Tensor& A = nodes_[a].value;
    const Tensor& B = nodes_[b].value;
    check(A.size() == B.size(), "dot: shape mismatch");
    Node n;
    n.op = Op::Dot;
    n.in0 = a;
    n.in1 = b;
    double acc = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) acc += A[i] * B[i];
    n.value = Tensor::scalar(acc);
    return push(std::move(n));
}

int Tape::poly_exp4(int a) {
    Node n;
    n.op = Op::PolyExp4;
    n.in0 = a;
    n.value = nodes_[a].value;
    for (auto& v : n.value.values()) {
        const double u = v;
        v = 1.0 + u + u * u / 2.0 + u * u * u / 6.0 + u * u * u * u / 24.0;
    }
    return push(std::move(n));
}

int Tape::weighted_ce2(int logits, int label, double weight) {
    const Tensor& Z = nodes_[logits].value;
    check(Z.size() == 2, "weighted_ce2: needs 2 logits");
    check(label == 0 || label == 1, "weighted_ce2: label must be 0 or 1");
    Node n;
    n.op = Op::WeightedCe2;
    n.in0 = logits;
    n.aux_i0 = label;
    n.aux_d0 = weight;
    // -w * log softmax(z)[label], computed via log-sum-exp
    const double m = std::max(Z[0], Z[1]);
    const double lse = m + std::log(std::exp(Z[0] - m) + std::exp(Z[1] - m));
    n.value = Tensor::scalar(weight * (lse - Z[label]));
    return push(std::move(n));
}

int Tape::gamma_mean(int lambda, int k) {
    const Tensor& L = nodes_[lambda].value;
    const Tensor& K = nodes_[k].value;
    check(L.size() == 1 && K.size() == 1, "gamma_mean: scalar inputs");
    Node n;
    n.op = Op::GammaMean;
    n.in0 = lambda;
    n.in1 = k;
    n.value = Tensor::scalar(L[0] * prog::weibull::gamma_fn(1.0 + 1.0 / K[0]));
    return push(std::move(n));
}

void Tape::backward(int loss_node, std::vector<Tensor>& sink) {
    check(nodes_[loss_node].value.size() == 1, "backward: loss must be scalar");
    for (auto& n : nodes_) {
        n.grad = Tensor(n.value.shape());
    }
    nodes_[loss_node].grad[0] = 1.0;

    for (int idx = loss_node; idx >= 0; --idx) {
        Node& n = nodes_[idx];
        const Tensor& g = n.grad;
        switch (n.op) {
            case Op::Input:
                break;
            case Op::Param: {
                Tensor& acc = sink[n.aux_i0];
                for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
                break;
            }
            case Op::MatVec: {
                Tensor& gw = nodes_[n.in0].grad;
                Tensor& gx = nodes_[n.in1].grad;
                const Tensor& W = nodes_[n.in0].value;
                const Tensor& X = nodes_[n.in1].value;
                const std::size_t m = W.rows(), k = W.cols();
                for (std::size_t i = 0; i < m; ++i) {
                    const double gi = g[i];
                    if (gi == 0.0) continue;
                    double* gwrow = gw.data() + i * k;
                    const double* wrow = W.data() + i * k;
                    for (std::size_t j = 0; j < k; ++j) {
                        gwrow[j] += gi * X[j];
                        gx[j] += gi * wrow[j];
                    }
                }
                break;
            }
            case Op::Add: {
                Tensor& ga = nodes_[n.in0].grad;
                Tensor& gb = nodes_[n.in1].grad;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i];
                    gb[i] += g[i];
                }
                break;
            }
            case Op::Sub: {
                Tensor& ga = nodes_[n.in0].grad;
                Tensor& gb = nodes_[n.in1].grad;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i];
                    gb[i] -= g[i];
                }
                break;
            }
            case Op::Mul: {
                Tensor& ga = nodes_[n.in0].grad;
                Tensor& gb = nodes_[n.in1].grad;
                const Tensor& A = nodes_[n.in0].value;
                const Tensor& B = nodes_[n.in1].value;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i] * B[i];
                    gb[i] += g[i] * A[i];
                }
                break;
            }
            case Op::Scale: {
                Tensor& ga = nodes_[n.in0].grad;
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.aux_d0;
                break;
            }
            case Op::AddScalar: {
                Tensor& ga = nodes_[n.in0].grad;
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                break;
            }
            case Op::Slice: {
                Tensor& ga = nodes_[n.in0].grad;
                const std::size_t off = static_cast<std::size_t>(n.aux_i0);
                for (std::size_t i = 0; i < g.size(); ++i) ga[off + i] += g[i];
                break;
            }
            case Op::Sigmoid: {
                Tensor& ga = nodes_[n.in0].grad;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const double y = n.value[i];
                    ga[i] += g[i] * y * (1.0 - y);
                }
                break;
            }
            case Op::Tanh: {
                Tensor& ga = nodes_[n.in0].grad;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const double y = n.value[i];
                    ga[i] += g[i] * (1.0 - y * y);
                }
                break;
            }
            case Op::Elu: {
                Tensor& ga = nodes_[n.in0].grad;
                const Tensor& X = nodes_[n.in0].value;
                for (std::size_t i = 0; i < g.size(); ++i)
                    ga[i] += g[i] * (X[i] > 0.0 ? 1.0 : n.value[i] + 1.0);
                break;
            }
            case Op::Softplus: {
                Tensor& ga = nodes_[n.in0].grad;
                const Tensor& X = nodes_[n.in0].value;
                for (std::size_t i = 0; i < g.size(); ++i)
                    ga[i] += g[i] / (1.0 + std::exp(-X[i]));
                break;
            }
            case Op::Exp: {
                Tensor& ga = nodes_[n.in0].grad;
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.value[i];
                break;
            }
            case Op::Log: {
                Tensor& ga = nodes_[n.in0].grad;
                const Tensor& X = nodes_[n.in0].value;
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / X[i];
                break;
            }
            case Op::Square: {
                Tensor& ga = nodes_[n.in0].grad;
                const Tensor& X = nodes_[n.in0].value;
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * 2.0 * X[i];
                break;
            }
            case Op::Relu: {
                Tensor& ga = nodes_[n.in0].grad;
                const Tensor& X = nodes_[n.in0].value;
                for (std::size_t i = 0; i < g.size(); ++i)
                    ga[i] += X[i] > 0.0 ? g[i] : 0.0;
                break;
            }
            case Op::Sum: {
                Tensor& ga = nodes_[n.in0].grad;
                for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[0];
                break;
            }
            case Op::Dot: {
                Tensor& ga = nodes_[n.in0].grad;
                Tensor& gb = nodes_[n.in1].grad;
                const Tensor& A = nodes_[n.in0].value;
                const Tensor& B = nodes_[n.in1].value;
                for (std::size_t i = 0; i < A.size(); ++i) {
                    ga[i] += g[0] * B[i];
                    gb[i] += g[0] * A[i];
                }
                break;
            }
            case Op::PolyExp4: {
                Tensor& ga = nodes_[n.in0].grad;
                const Tensor& U = nodes_[n.in0].value;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const double u = U[i];
                    ga[i] += g[i] * (1.0 + u + u * u / 2.0 + u * u * u / 6.0);
                }
                break;
            }
            case Op::WeightedCe2: {
                Tensor& gz = nodes_[n.in0].grad;
                const Tensor& Z = nodes_[n.in0].value;
                const double m = std::max(Z[0], Z[1]);
                const double e0 = std::exp(Z[0] - m), e1 = std::exp(Z[1] - m);
                const double p0 = e0 / (e0 + e1), p1 = e1 / (e0 + e1);
                const double w = n.aux_d0;
                gz[0] += g[0] * w * (p0 - (n.aux_i0 == 0 ? 1.0 : 0.0));
                gz[1] += g[0] * w * (p1 - (n.aux_i0 == 1 ? 1.0 : 0.0));
                break;
            }
            case Op::GammaMean: {
                Tensor& gl = nodes_[n.in0].grad;
                Tensor& gk = nodes_[n.in1].grad;
                const double lam = nodes_[n.in0].value[0];
                const double k = nodes_[n.in1].value[0];
                const double x = 1.0 + 1.0 / k;
                const double gam = prog::weibull::gamma_fn(x);
                // d/dk Gamma(1 + 1/k) = -Gamma(x) psi(x) / k^2
                gl[0] += g[0] * gam;
                gk[0] += g[0] * (-lam * gam * prog::weibull::digamma(x) / (k * k));
                break;
            }
        }
    }
}

std::vector<Tensor> zero_grads(const ModelParams& params) {
    std::vector<Tensor> g;
    g.reserve(params.count());
    for (std::size_t i = 0; i < params.count(); ++i)
        g.emplace_back(params[static_cast<int>(i)].shape());
    return g;
}

int l2_penalty(Tape& tape, const ModelParams& params, double strength) {
    int acc = tape.input(Tensor::scalar(0.0));
    if (strength == 0.0) return acc;
    for (std::size_t i = 0; i < params.count(); ++i) {
        const int slot = static_cast<int>(i);
        if (params.l2_exempt(slot)) continue;
        int leaf = tape.param(params, slot);
        acc = tape.add(acc, tape.sum(tape.square(leaf)));
    }
    return tape.scale(acc, strength);
}

}  // namespace prog::diff
