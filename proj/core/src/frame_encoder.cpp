#include "tvlm/frame_encoder.hpp"

#include <cmath>
#include <cstdio>

#include "tvlm/errors.hpp"

namespace tvlm {

void VideoClip::validate() const {
    if (frames.empty()) throw DomainError("clip has no frames");
    if (timestamps.size() != frames.size()) {
        throw ShapeError("clip has " + std::to_string(frames.size()) + " frames but " +
                         std::to_string(timestamps.size()) + " timestamps");
    }
    if (duration <= 0.0) throw DomainError("clip duration must be positive");
    double prev = 0.0;
    for (std::size_t i = 0; i < timestamps.size(); ++i) {
        const double t = timestamps[i];
        if (t < 0.0 || t > duration) {
            throw DomainError("timestamp " + std::to_string(t) + " outside [0, " + std::to_string(duration) + "]");
        }
        if (i > 0 && t < prev) throw DomainError("timestamps must be non-decreasing");
        prev = t;
        if (frames[i].rank() != 3 || frames[i].dim(2) != 3) {
            throw ShapeError("frame " + std::to_string(i) + " must be [H, W, 3], got " + frames[i].shape_string());
        }
    }
}

std::string render_timestamp(double t) {
    if (t < 0.0) throw DomainError("timestamp must be non-negative, got " + std::to_string(t));
    char buf[64];
    if (t == std::floor(t) && std::abs(t) < 1e15) {
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(t));
    } else {
        std::snprintf(buf, sizeof(buf), "%.1f", t);
    }
    return std::string("This frame is sampled at ") + buf + "s.";
}

FrameEncoder::FrameEncoder(const FrameEncoderConfig& cfg, ParamSet& params, Rng& rng) : cfg_(cfg) {
    if (cfg.frame_height % cfg.patch != 0 || cfg.frame_width % cfg.patch != 0) {
        throw ConfigError("frame size " + std::to_string(cfg.frame_height) + "x" + std::to_string(cfg.frame_width) +
                          " not divisible by patch " + std::to_string(cfg.patch));
    }
    n_patches_ = (cfg.frame_height / cfg.patch) * (cfg.frame_width / cfg.patch);
    const std::int64_t patch_in = cfg.patch * cfg.patch * 3;

    // vision trunk stands in for a pretrained encoder, so it stays frozen
    patch_w_ = params.normal("vision.patch.weight", {cfg.enc_dim, patch_in}, rng, 0.02, false);
    patch_b_ = params.zeros("vision.patch.bias", {cfg.enc_dim}, false);
    patch_pos_ = params.normal("vision.pos", {n_patches_, cfg.enc_dim}, rng, 0.02, false);
    for (std::int64_t i = 0; i < cfg.vit_layers; ++i) {
        vit_blocks_.push_back(make_block(params, "vision.block" + std::to_string(i), cfg.enc_dim, cfg.vit_heads,
                                         cfg.enc_dim * 4, false, rng, false));
    }
    vit_ln_ = make_layer_norm(params, "vision.ln", cfg.enc_dim, false);

    queries_ = params.normal("image_qf.queries", {cfg.image_queries, cfg.q_dim}, rng, 0.02, true);
    text_embed_ = params.normal("image_qf.text_embed", {Tokenizer::kVocabSize, cfg.q_dim}, rng, 0.02, true);
    text_pos_ = params.normal("image_qf.text_pos", {cfg.max_timestamp_tokens, cfg.q_dim}, rng, 0.02, true);
    vis_proj_ = make_linear(params, "image_qf.vis_proj", cfg.enc_dim, cfg.q_dim, rng, true);
    for (std::int64_t i = 0; i < cfg.qf_layers; ++i) {
        qf_blocks_.push_back(make_block(params, "image_qf.block" + std::to_string(i), cfg.q_dim, cfg.qf_heads,
                                        cfg.q_dim * 4, true, rng, true));
    }
    qf_ln_ = make_layer_norm(params, "image_qf.ln", cfg.q_dim, true);
}

Var FrameEncoder::patch_embed(const Tensor& frame) const {
    if (frame.rank() != 3 || frame.dim(0) != cfg_.frame_height || frame.dim(1) != cfg_.frame_width ||
        frame.dim(2) != 3) {
        throw ShapeError("expected frame [" + std::to_string(cfg_.frame_height) + ", " +
                         std::to_string(cfg_.frame_width) + ", 3], got " + frame.shape_string());
    }
    const std::int64_t p = cfg_.patch;
    const std::int64_t cols = cfg_.frame_width / p;
    const std::int64_t patch_in = p * p * 3;
    Tensor patches({n_patches_, patch_in});
    for (std::int64_t idx = 0; idx < n_patches_; ++idx) {
        const std::int64_t r0 = (idx / cols) * p, c0 = (idx % cols) * p;
        double* dst = patches.data() + idx * patch_in;
        for (std::int64_t r = 0; r < p; ++r) {
            const double* src = frame.data() + ((r0 + r) * cfg_.frame_width + c0) * 3;
            std::copy(src, src + p * 3, dst + r * p * 3);
        }
    }
    return add(matmul(constant(std::move(patches)), transpose2(leaf(patch_w_))), leaf(patch_b_));
}

Var FrameEncoder::vision_trunk(const Var& patch_tokens) const {
    Var x = add(patch_tokens, leaf(patch_pos_));
    for (const auto& b : vit_blocks_) x = b.apply(x, nullptr, nullptr);
    return vit_ln_.apply(x);
}

Tensor FrameEncoder::frame_features(const Tensor& frame) const {
    return vision_trunk(patch_embed(frame))->value;
}

Var FrameEncoder::encode_frame(const Var& frame_tokens, const std::string& timestamp_text) const {
    const std::int64_t ni = cfg_.image_queries;
    Var x = leaf(queries_);
    if (!cfg_.timestamp_off) {
        std::vector<int> ids = tokenizer_.tokenize(timestamp_text);
        if (ids.empty()) throw DomainError("timestamp text produced no tokens");
        if (static_cast<std::int64_t>(ids.size()) > cfg_.max_timestamp_tokens) {
            throw DomainError("timestamp text longer than " + std::to_string(cfg_.max_timestamp_tokens) + " tokens");
        }
        std::vector<int> pos(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) pos[i] = static_cast<int>(i);
        Var text = add(embedding_rows(leaf(text_embed_), ids), embedding_rows(leaf(text_pos_), pos));
        x = concat_rows({x, text});
    }
    Var kv = vis_proj_.apply(frame_tokens);
    for (const auto& b : qf_blocks_) x = b.apply(x, nullptr, &kv, ni);
    return qf_ln_.apply(slice_rows(x, 0, ni));
}

Var FrameEncoder::encode_frame_at(const Tensor& frame, double t) const {
    return encode_frame(vision_trunk(patch_embed(frame)), render_timestamp(t));
}

std::vector<Var> FrameEncoder::encode_video(const VideoClip& clip, std::vector<Tensor>* trunk_cache) const {
    clip.validate();
    const std::int64_t t = clip.frame_count();
    if (trunk_cache && !trunk_cache->empty() && static_cast<std::int64_t>(trunk_cache->size()) != t) {
        throw ShapeError("trunk cache holds " + std::to_string(trunk_cache->size()) + " frames, clip has " +
                         std::to_string(t));
    }
    const bool cache_hit = trunk_cache && !trunk_cache->empty();
    std::vector<Var> out;
    out.reserve(clip.frames.size());
    for (std::int64_t i = 0; i < t; ++i) {
        Var tokens;
        if (cache_hit) {
            tokens = constant((*trunk_cache)[i]);
        } else {
            tokens = vision_trunk(patch_embed(clip.frames[i]));
            if (trunk_cache) trunk_cache->push_back(tokens->value);
        }
        out.push_back(encode_frame(tokens, render_timestamp(clip.timestamps[i])));
    }
    return out;
}

}  // namespace tvlm
