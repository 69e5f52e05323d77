#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tvlm/autograd.hpp"
#include "tvlm/rng.hpp"

namespace tvlm {

// Owning registry for a model's parameters, in creation order. Creation order
// is the checkpoint manifest order, so construction must be deterministic.
struct ParamSet {
    std::vector<ParamPtr> all;

    ParamPtr add(std::string name, Tensor value, bool trainable);
    ParamPtr normal(std::string name, Shape shape, Rng& rng, double stddev = 0.02, bool trainable = true);
    ParamPtr zeros(std::string name, Shape shape, bool trainable = true);
    ParamPtr ones(std::string name, Shape shape, bool trainable = true);

    std::vector<ParamPtr> trainable() const;
};

// y = x W^T + b with W stored [out, in]. An attached low-rank adapter adds
// (alpha/r) x A^T B^T; B starts at zero so attaching is output-preserving.
struct Linear {
    ParamPtr weight;
    ParamPtr bias;
    ParamPtr lora_a;  // [r, in]
    ParamPtr lora_b;  // [out, r]
    double lora_scale = 0.0;

    Var apply(const Var& x) const;
    void attach_lora(ParamSet& params, const std::string& prefix, std::int64_t rank, double alpha, Rng& rng);
    // Folds the adapter into the base weight and detaches it.
    void merge_lora();
    std::int64_t in_dim() const { return weight->value.dim(1); }
    std::int64_t out_dim() const { return weight->value.dim(0); }
};

Linear make_linear(ParamSet& params, const std::string& prefix, std::int64_t in, std::int64_t out, Rng& rng,
                   bool trainable = true);

struct LayerNorm {
    ParamPtr gain;
    ParamPtr bias;
    Var apply(const Var& x) const;
};

LayerNorm make_layer_norm(ParamSet& params, const std::string& prefix, std::int64_t dim, bool trainable = true);

// Scaled dot-product attention with `heads` heads over model dim D.
// `mask` (optional) is an additive [Lq, Lk] tensor applied to every head's
// score matrix before softmax.
struct MultiHeadAttention {
    Linear q, k, v, o;
    std::int64_t heads = 1;

    Var apply(const Var& queries, const Var& keys, const Var& values, const Tensor* mask) const;
    Var self_apply(const Var& x, const Tensor* mask) const { return apply(x, x, x, mask); }
};

MultiHeadAttention make_attention(ParamSet& params, const std::string& prefix, std::int64_t dim, std::int64_t heads,
                                  Rng& rng, bool trainable = true);

struct FeedForward {
    Linear fc1, fc2;
    Var apply(const Var& x) const;
};

FeedForward make_feed_forward(ParamSet& params, const std::string& prefix, std::int64_t dim, std::int64_t hidden,
                              Rng& rng, bool trainable = true);

// Pre-norm transformer block: self-attention, optional cross-attention,
// feed-forward, each with a residual connection. When `cross_rows` >= 0 only
// the first `cross_rows` rows of the sequence attend to the cross input; the
// remaining rows pass through the cross stage untouched.
struct TransformerBlock {
    LayerNorm ln_self;
    MultiHeadAttention self_attn;
    bool has_cross = false;
    LayerNorm ln_cross;
    MultiHeadAttention cross_attn;
    LayerNorm ln_ffn;
    FeedForward ffn;

    Var apply(const Var& x, const Tensor* self_mask, const Var* cross_kv, std::int64_t cross_rows = -1) const;
};

TransformerBlock make_block(ParamSet& params, const std::string& prefix, std::int64_t dim, std::int64_t heads,
                            std::int64_t ffn_hidden, bool with_cross, Rng& rng, bool trainable = true);

// Additive causal mask: 0 on and below the diagonal, kMaskedScore above.
Tensor causal_mask(std::int64_t n);

}  // namespace tvlm
