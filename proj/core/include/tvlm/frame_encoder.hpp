#pragma once

#include <string>
#include <vector>

#include "tvlm/layers.hpp"
#include "tvlm/tokenizer.hpp"

namespace tvlm {

// Decoded video frames plus their sampling times.
struct VideoClip {
    std::vector<Tensor> frames;  // each [H, W, 3], values in [0,1]
    std::vector<double> timestamps;  // seconds, non-decreasing
    double duration = 0.0;

    std::int64_t frame_count() const { return static_cast<std::int64_t>(frames.size()); }
    // Throws DomainError/ShapeError on violated invariants.
    void validate() const;
};

// "This frame is sampled at {t}s." — integral t renders without a decimal
// point, fractional t with exactly one decimal place. Negative t is an error.
std::string render_timestamp(double t);

struct FrameEncoderConfig {
    std::int64_t frame_height = 28;
    std::int64_t frame_width = 28;
    std::int64_t patch = 14;
    std::int64_t enc_dim = 64;
    std::int64_t vit_layers = 1;
    std::int64_t vit_heads = 2;
    std::int64_t q_dim = 64;
    std::int64_t image_queries = 8;  // N_I
    std::int64_t qf_layers = 2;
    std::int64_t qf_heads = 2;
    std::int64_t max_timestamp_tokens = 64;
    bool timestamp_off = false;
};

// Per-frame encoder: a small frozen vision trunk distilled through a stack of
// learnable queries. The frame's sampling time enters as text tokens that sit
// next to the queries in self-attention; cross-attention reads frame patches
// through the query rows only, so the output is always exactly N_I rows and
// with `timestamp_off` it is bitwise independent of the timestamp string.
class FrameEncoder {
public:
    FrameEncoder(const FrameEncoderConfig& cfg, ParamSet& params, Rng& rng);

    // Linear patchify only: [H, W, 3] -> [N_P, enc_dim]. A zero frame maps to
    // the bias rows exactly.
    Var patch_embed(const Tensor& frame) const;

    // Adds patch-position embeddings and runs the self-attention trunk.
    Var vision_trunk(const Var& patch_tokens) const;

    // Frozen-trunk features for one frame (patch_embed + vision_trunk).
    Tensor frame_features(const Tensor& frame) const;

    // frame_tokens: [N_P, enc_dim] trunk output. Returns [N_I, q_dim].
    Var encode_frame(const Var& frame_tokens, const std::string& timestamp_text) const;

    // Full chain for one frame at sampling time t.
    Var encode_frame_at(const Tensor& frame, double t) const;

    // One [N_I, q_dim] entry per frame; frame i depends only on frame i and
    // timestamp i. `trunk_cache`, when non-null, supplies/receives
    // frame_features results so repeated epochs skip the frozen trunk.
    std::vector<Var> encode_video(const VideoClip& clip, std::vector<Tensor>* trunk_cache = nullptr) const;

    std::int64_t n_patches() const { return n_patches_; }
    const FrameEncoderConfig& config() const { return cfg_; }

private:
    FrameEncoderConfig cfg_;
    std::int64_t n_patches_;
    Tokenizer tokenizer_;

    // frozen vision trunk
    ParamPtr patch_w_;  // [enc_dim, patch*patch*3]
    ParamPtr patch_b_;  // [enc_dim]
    ParamPtr patch_pos_;  // [N_P, enc_dim]
    std::vector<TransformerBlock> vit_blocks_;
    LayerNorm vit_ln_;

    // trainable query former
    ParamPtr queries_;  // [N_I, q_dim]
    ParamPtr text_embed_;  // [vocab, q_dim]
    ParamPtr text_pos_;  // [max_timestamp_tokens, q_dim]
    Linear vis_proj_;  // enc_dim -> q_dim for cross-attention keys/values
    std::vector<TransformerBlock> qf_blocks_;
    LayerNorm qf_ln_;
};

}  // namespace tvlm
