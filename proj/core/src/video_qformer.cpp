#include "tvlm/video_qformer.hpp"

#include "tvlm/errors.hpp"

namespace tvlm {

std::vector<Window> make_windows(std::int64_t frame_count, const SlidingConfig& cfg) {
    if (frame_count < 1) throw DomainError("frame count must be >= 1, got " + std::to_string(frame_count));
    if (cfg.window_len < 1 || cfg.stride < 1 || cfg.n_queries < 1) {
        throw ConfigError("window-len, stride and n-queries must all be >= 1");
    }
    if (cfg.mode == WindowMode::fixed) return {{0, frame_count}};
    if (cfg.strict && frame_count % cfg.stride != 0) {
        throw ConfigError("strict windows: frame count " + std::to_string(frame_count) +
                          " is not a multiple of stride " + std::to_string(cfg.stride));
    }
    std::vector<Window> out;
    for (std::int64_t start = 0; start < frame_count; start += cfg.stride) {
        out.push_back({start, start + std::min(cfg.window_len, frame_count - start)});
    }
    return out;
}

double compression_rate(std::int64_t frames, std::int64_t n_patches, std::int64_t n_queries, std::int64_t stride,
                        WindowMode mode) {
    if (frames < 1 || n_patches < 1 || n_queries < 1 || stride < 1) {
        throw DomainError("compression rate arguments must all be positive");
    }
    if (mode == WindowMode::fixed) {
        return static_cast<double>(frames * n_patches) / static_cast<double>(n_queries);
    }
    return static_cast<double>(stride * n_patches) / static_cast<double>(n_queries);
}

VideoQFormer::VideoQFormer(const VideoQFormerConfig& cfg, ParamSet& params, Rng& rng) : cfg_(cfg) {
    queries_ = params.normal("video_qf.queries", {cfg.sliding.n_queries, cfg.q_dim}, rng, 0.02, true);
    frame_pos_ = params.normal("video_qf.frame_pos", {cfg.sliding.window_len, cfg.q_dim}, rng, 0.02, true);
    for (std::int64_t i = 0; i < cfg.layers; ++i) {
        blocks_.push_back(make_block(params, "video_qf.block" + std::to_string(i), cfg.q_dim, cfg.heads,
                                     cfg.q_dim * 4, true, rng, true));
    }
    ln_ = make_layer_norm(params, "video_qf.ln", cfg.q_dim, true);
    proj_ = make_linear(params, "proj", cfg.q_dim, cfg.llm_dim, rng, true);
}

Var VideoQFormer::fuse_window(const std::vector<Var>& frame_tokens) const {
    if (frame_tokens.empty()) throw DomainError("window has no frames");
    const std::int64_t l = static_cast<std::int64_t>(frame_tokens.size());
    // fixed mode can hand us windows longer than L_W; position ids then wrap,
    // which keeps the embedding table at L_W rows
    std::vector<Var> rows;
    rows.reserve(frame_tokens.size());
    for (std::int64_t i = 0; i < l; ++i) {
        const std::int64_t ni = frame_tokens[static_cast<std::size_t>(i)]->value.dim(0);
        std::vector<int> pos(static_cast<std::size_t>(ni), static_cast<int>(i % cfg_.sliding.window_len));
        rows.push_back(add(frame_tokens[static_cast<std::size_t>(i)], embedding_rows(leaf(frame_pos_), pos)));
    }
    Var kv = rows.size() == 1 ? rows[0] : concat_rows(rows);
    Var x = leaf(queries_);
    for (const auto& b : blocks_) x = b.apply(x, nullptr, &kv);
    return ln_.apply(x);
}

VideoTokens VideoQFormer::compress(const std::vector<Var>& encoded) const {
    const std::vector<Window> windows = make_windows(static_cast<std::int64_t>(encoded.size()), cfg_.sliding);
    std::vector<Var> fused;
    VideoTokens out;
    out.windows = static_cast<std::int64_t>(windows.size());
    for (std::size_t w = 0; w < windows.size(); ++w) {
        std::vector<Var> span(encoded.begin() + windows[w].begin, encoded.begin() + windows[w].end);
        fused.push_back(fuse_window(span));
        for (std::int64_t q = 0; q < cfg_.sliding.n_queries; ++q) {
            out.window_index.push_back(static_cast<std::int64_t>(w));
        }
    }
    Var all = fused.size() == 1 ? fused[0] : concat_rows(fused);
    out.tokens = proj_.apply(all);
    return out;
}

}  // namespace tvlm
