#pragma once

#include <vector>

#include "tvlm/layers.hpp"

namespace tvlm {

enum class WindowMode { sliding, fixed };

struct SlidingConfig {
    std::int64_t window_len = 4;  // L_W frames
    std::int64_t stride = 4;      // S frames
    std::int64_t n_queries = 4;   // N_V
    WindowMode mode = WindowMode::sliding;
    bool strict = false;  // require frame count to be a multiple of stride
};

// Frame index range [begin, end).
struct Window {
    std::int64_t begin = 0;
    std::int64_t end = 0;
    std::int64_t length() const { return end - begin; }
};

// Sliding mode: windows start at 0, S, 2S, ...; each covers
// min(L_W, T - start) frames; count = ceil(T/S). The short tail window keeps
// every frame rather than dropping the remainder. Fixed mode: one window over
// the whole video.
std::vector<Window> make_windows(std::int64_t frame_count, const SlidingConfig& cfg);

// Original visual tokens divided by final video tokens. Fixed-window designs
// grow with the frame count, T*N_P/N_V; the sliding design is the constant
// S*N_P/N_V.
double compression_rate(std::int64_t frames, std::int64_t n_patches, std::int64_t n_queries, std::int64_t stride,
                        WindowMode mode);

struct VideoTokens {
    Var tokens;  // [M, llm_dim], ordered by window then query index
    std::vector<std::int64_t> window_index;  // per token row
    std::int64_t windows = 0;
    std::int64_t count() const { return static_cast<std::int64_t>(window_index.size()); }
};

struct VideoQFormerConfig {
    std::int64_t q_dim = 64;
    std::int64_t llm_dim = 64;
    std::int64_t image_queries = 8;  // N_I rows per incoming frame
    std::int64_t layers = 2;
    std::int64_t heads = 2;
    SlidingConfig sliding;
};

// Temporal fusion: one shared query former squeezes each window of per-frame
// token sets down to N_V tokens, then a linear map lifts q_dim -> llm_dim.
// Frames inside a window get learned position embeddings (their offset within
// the window); windows themselves carry no index embedding — time identity
// rides on the upstream timestamp conditioning, which keeps window outputs
// content-only and weight-shared.
class VideoQFormer {
public:
    VideoQFormer(const VideoQFormerConfig& cfg, ParamSet& params, Rng& rng);

    // frame_tokens: per-frame [N_I, q_dim] entries for one window (L <= L_W).
    // Returns [N_V, q_dim]; no timestamp input by design.
    Var fuse_window(const std::vector<Var>& frame_tokens) const;

    // encoded: per-frame [N_I, q_dim] for the whole clip.
    VideoTokens compress(const std::vector<Var>& encoded) const;

    const VideoQFormerConfig& config() const { return cfg_; }

private:
    VideoQFormerConfig cfg_;
    ParamPtr queries_;    // [N_V, q_dim]
    ParamPtr frame_pos_;  // [L_W, q_dim], index = frame offset within window
    std::vector<TransformerBlock> blocks_;
    LayerNorm ln_;
    Linear proj_;  // q_dim -> llm_dim
};

}  // namespace tvlm
