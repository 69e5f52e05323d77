#include "tvlm/layers.hpp"

#include <cmath>

#include "tvlm/errors.hpp"

namespace tvlm {

ParamPtr ParamSet::add(std::string name, Tensor value, bool trainable) {
    auto p = std::make_shared<Parameter>(std::move(name), std::move(value), trainable);
    all.push_back(p);
    return p;
}

ParamPtr ParamSet::normal(std::string name, Shape shape, Rng& rng, double stddev, bool trainable) {
    Tensor t(std::move(shape));
    for (auto& v : t.values()) v = rng.normal(0.0, stddev);
    return add(std::move(name), std::move(t), trainable);
}

ParamPtr ParamSet::zeros(std::string name, Shape shape, bool trainable) {
    return add(std::move(name), Tensor(std::move(shape)), trainable);
}

ParamPtr ParamSet::ones(std::string name, Shape shape, bool trainable) {
    return add(std::move(name), Tensor::full(std::move(shape), 1.0), trainable);
}

std::vector<ParamPtr> ParamSet::trainable() const {
    std::vector<ParamPtr> out;
    for (const auto& p : all) {
        if (p->trainable) out.push_back(p);
    }
    return out;
}

Var Linear::apply(const Var& x) const {
    Var y = add(matmul(x, transpose2(leaf(weight))), leaf(bias));
    if (lora_a && lora_b) {
        Var low = matmul(matmul(x, transpose2(leaf(lora_a))), transpose2(leaf(lora_b)));
        y = add(y, scale(low, lora_scale));
    }
    return y;
}

void Linear::attach_lora(ParamSet& params, const std::string& prefix, std::int64_t rank, double alpha, Rng& rng) {
    if (rank <= 0) throw ConfigError("adapter rank must be positive, got " + std::to_string(rank));
    lora_a = params.normal(prefix + ".lora_a", {rank, in_dim()}, rng, 0.02, true);
    lora_b = params.zeros(prefix + ".lora_b", {out_dim(), rank}, true);
    lora_scale = alpha / static_cast<double>(rank);
}

void Linear::merge_lora() {
    if (!lora_a || !lora_b) return;
    const std::int64_t out = out_dim(), in = in_dim(), r = lora_a->value.dim(0);
    // W += scale * B A
    for (std::int64_t o = 0; o < out; ++o) {
        for (std::int64_t i = 0; i < in; ++i) {
            double s = 0.0;
            for (std::int64_t k = 0; k < r; ++k) s += lora_b->value[o * r + k] * lora_a->value[k * in + i];
            weight->value[o * in + i] += lora_scale * s;
        }
    }
    lora_a.reset();
    lora_b.reset();
    lora_scale = 0.0;
}

Linear make_linear(ParamSet& params, const std::string& prefix, std::int64_t in, std::int64_t out, Rng& rng,
                   bool trainable) {
    Linear l;
    l.weight = params.normal(prefix + ".weight", {out, in}, rng, 0.02, trainable);
    l.bias = params.zeros(prefix + ".bias", {out}, trainable);
    return l;
}

Var LayerNorm::apply(const Var& x) const { return layer_norm(x, leaf(gain), leaf(bias)); }

LayerNorm make_layer_norm(ParamSet& params, const std::string& prefix, std::int64_t dim, bool trainable) {
    LayerNorm ln;
    ln.gain = params.ones(prefix + ".gain", {dim}, trainable);
    ln.bias = params.zeros(prefix + ".bias", {dim}, trainable);
    return ln;
}

Var MultiHeadAttention::apply(const Var& queries, const Var& keys, const Var& values, const Tensor* mask) const {
    const std::int64_t dh = q.out_dim() / heads;
    Var qh = split_heads(q.apply(queries), heads);
    Var kh = split_heads(k.apply(keys), heads);
    Var vh = split_heads(v.apply(values), heads);
    Var scores = scale(matmul(qh, transpose2(kh)), 1.0 / std::sqrt(static_cast<double>(dh)));
    if (mask) scores = add(scores, constant(*mask));
    Var attn = softmax(scores, -1);
    return o.apply(merge_heads(matmul(attn, vh)));
}

MultiHeadAttention make_attention(ParamSet& params, const std::string& prefix, std::int64_t dim, std::int64_t heads,
                                  Rng& rng, bool trainable) {
    if (dim % heads != 0) {
        throw ConfigError("model dim " + std::to_string(dim) + " not divisible by heads " + std::to_string(heads));
    }
    MultiHeadAttention a;
    a.q = make_linear(params, prefix + ".q", dim, dim, rng, trainable);
    a.k = make_linear(params, prefix + ".k", dim, dim, rng, trainable);
    a.v = make_linear(params, prefix + ".v", dim, dim, rng, trainable);
    a.o = make_linear(params, prefix + ".o", dim, dim, rng, trainable);
    a.heads = heads;
    return a;
}

Var FeedForward::apply(const Var& x) const { return fc2.apply(gelu(fc1.apply(x))); }

FeedForward make_feed_forward(ParamSet& params, const std::string& prefix, std::int64_t dim, std::int64_t hidden,
                              Rng& rng, bool trainable) {
    FeedForward f;
    f.fc1 = make_linear(params, prefix + ".fc1", dim, hidden, rng, trainable);
    f.fc2 = make_linear(params, prefix + ".fc2", hidden, dim, rng, trainable);
    return f;
}

Var TransformerBlock::apply(const Var& x, const Tensor* self_mask, const Var* cross_kv,
                            std::int64_t cross_rows) const {
    Var h = add(x, self_attn.self_apply(ln_self.apply(x), self_mask));
    if (cross_kv) {
        if (!has_cross) throw StructuralError("block has no cross-attention weights");
        const std::int64_t rows = h->value.dim(0);
        const std::int64_t nq = cross_rows < 0 ? rows : cross_rows;
        Var normed = ln_cross.apply(h);
        if (nq == rows) {
            h = add(h, cross_attn.apply(normed, *cross_kv, *cross_kv, nullptr));
        } else {
            // only the first nq rows see the cross input; the rest get a zero
            // residual so they stay bitwise independent of it
            Var attended = cross_attn.apply(slice_rows(normed, 0, nq), *cross_kv, *cross_kv, nullptr);
            Var pad = constant(Tensor({rows - nq, h->value.dim(1)}));
            h = add(h, concat_rows({attended, pad}));
        }
    }
    return add(h, ffn.apply(ln_ffn.apply(h)));
}

TransformerBlock make_block(ParamSet& params, const std::string& prefix, std::int64_t dim, std::int64_t heads,
                            std::int64_t ffn_hidden, bool with_cross, Rng& rng, bool trainable) {
    TransformerBlock b;
    b.ln_self = make_layer_norm(params, prefix + ".ln_self", dim, trainable);
    b.self_attn = make_attention(params, prefix + ".self", dim, heads, rng, trainable);
    b.has_cross = with_cross;
    if (with_cross) {
        b.ln_cross = make_layer_norm(params, prefix + ".ln_cross", dim, trainable);
        b.cross_attn = make_attention(params, prefix + ".cross", dim, heads, rng, trainable);
    }
    b.ln_ffn = make_layer_norm(params, prefix + ".ln_ffn", dim, trainable);
    b.ffn = make_feed_forward(params, prefix + ".ffn", dim, ffn_hidden, rng, trainable);
    return b;
}

Tensor causal_mask(std::int64_t n) {
    Tensor m({n, n});
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t j = i + 1; j < n; ++j) m[i * n + j] = kMaskedScore;
    }
    return m;
}

}  // namespace tvlm
