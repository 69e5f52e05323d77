#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tvlm/tensor.hpp"

namespace tvlm {

// Trainable (or frozen) model weight. grad always has the same shape as value
// and is all-zero after zero_grad().
class Parameter {
public:
    Parameter(std::string name, Tensor value, bool trainable = true)
        : name(std::move(name)), value(std::move(value)), grad(this->value.shape()), trainable(trainable) {}

    void zero_grad() { grad.fill(0.0); }

    std::string name;
    Tensor value;
    Tensor grad;
    bool trainable;
};

using ParamPtr = std::shared_ptr<Parameter>;

struct Node;
using Var = std::shared_ptr<Node>;

// One value in a recorded forward computation. Ops append nodes eagerly;
// backward() walks the recorded graph in reverse topological order.
struct Node {
    Tensor value;
    Tensor grad;  // empty until this node receives gradient during backward
    bool needs_grad = false;
    const char* op = "leaf";
    ParamPtr param;  // set on parameter leaves only
    std::vector<Var> inputs;
    std::function<void(Node&)> backprop;
};

Var constant(Tensor value);
Var leaf(const ParamPtr& p);

// Standard matrix product. Supports batched leading dimensions: either both
// operands carry identical leading dims, or exactly one of them is 2-d and is
// applied to every batch of the other. Any other mismatch is a hard error.
Var matmul(const Var& a, const Var& b);

// c = a + b where b's shape equals a trailing suffix of a's shape (equal
// shapes included). No other broadcasting.
Var add(const Var& a, const Var& b);

// Elementwise product, identical shapes.
Var mul(const Var& a, const Var& b);

Var scale(const Var& a, double s);

// Swap the last two axes.
Var transpose2(const Var& a);

Var reshape(const Var& a, Shape shape);

// [L, H*Dh] -> [H, L, Dh] and back.
Var split_heads(const Var& a, std::int64_t heads);
Var merge_heads(const Var& a);

// Max-subtracted softmax along `axis` (negative axes allowed).
Var softmax(const Var& a, int axis);

// Zero-mean unit-variance over the last axis (population variance,
// epsilon 1e-5), then elementwise affine with gain/bias of that size.
Var layer_norm(const Var& x, const Var& gain, const Var& bias);

Var gelu(const Var& a);

// Rows of `table` selected by ids; gradient scatters back into the table.
Var embedding_rows(const Var& table, const std::vector<int>& ids);

// Concatenate along axis 0; trailing dims must agree.
Var concat_rows(const std::vector<Var>& parts);

// Rows [begin, end) along axis 0.
Var slice_rows(const Var& a, std::int64_t begin, std::int64_t end);

// Mean negative log-likelihood of `targets` under row-wise log-softmax of
// `logits` ([L, V]), restricted to positions where mask is true.
// Throws DomainError("no supervised tokens") when the mask is all-false.
Var cross_entropy_lm(const Var& logits, const std::vector<int>& targets, const std::vector<bool>& mask);

Var reduce_sum(const Var& a);

constexpr double kLayerNormEps = 1e-5;
// Additive attention-mask value for blocked positions. Finite by design so the
// all-finite tensor invariant holds; exp(-1e9 + s - max) underflows to exactly
// zero for any realistic score s, making masked attention exact.
constexpr double kMaskedScore = -1e9;

// Reverse-mode sweep from a recorded scalar. Populates Parameter::grad for
// every parameter leaf reachable from `root`. Throws StructuralError if root
// is not scalar or reaches no parameter.
void backward(const Var& root);

void zero_grads(const std::vector<ParamPtr>& params);

}  // namespace tvlm
