#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace tvlm {

// Every tunable in one flat struct. The toy profile is the default; the
// `paper` profile swaps in the reference hyper-parameters for budget reports
// and config completeness (full-scale training is out of scope here).
struct Config {
    // frame sampling / vision trunk
    std::int64_t frames = 8;  // T frames sampled per video
    std::int64_t frame_height = 28;
    std::int64_t frame_width = 28;
    std::int64_t patch = 14;
    std::int64_t enc_dim = 64;  // D_enc
    std::int64_t vit_layers = 1;
    std::int64_t vit_heads = 2;

    // per-frame query former
    std::int64_t q_dim = 64;  // D_Q
    std::int64_t image_queries = 8;  // N_I
    std::int64_t image_qf_layers = 2;
    std::int64_t qf_heads = 2;
    bool timestamp_off = false;

    // temporal fusion
    std::int64_t window_len = 4;  // L_W
    std::int64_t stride = 4;      // S
    std::int64_t video_queries = 4;  // N_V
    std::int64_t video_qf_layers = 2;
    std::string window_mode = "sliding";  // sliding | fixed
    bool strict_windows = false;          // require frames % stride == 0

    // decoder
    std::int64_t llm_dim = 64;  // D_LLM
    std::int64_t dec_layers = 2;
    std::int64_t dec_heads = 2;
    std::int64_t dec_ffn = 256;
    std::int64_t max_seq_len = 256;

    // low-rank adapters
    std::int64_t lora_rank = 8;
    double lora_alpha = 16.0;

    // optimization
    std::int64_t batch_size = 4;
    std::int64_t steps = 2000;
    std::int64_t epochs = 3;
    double lr = 1e-2;
    double warmup_lr = 1e-6;
    std::int64_t warmup_steps = 50;
    std::string lr_schedule = "cosine";  // cosine (to 0 over `steps`) | constant
    double weight_decay = 0.05;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double grad_clip = 1.0;
    std::uint64_t seed = 7;

    // evaluation
    double hit_threshold = 4.0;
    double clip_length = 2.0;

    static Config toy() { return Config{}; }
    // Reference hyper-parameters: 96 frames at 224x224/patch 14, windows of
    // 32 with stride 32 and 32 queries, rank-32 adapters, lr 3e-5 with 1e-6
    // warm-up, weight decay 0.05, batch 32, max text length 2048.
    static Config paper();

    // Kebab-case key access used by the CLI and the key=value config file.
    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;
    static std::vector<std::string> keys();

    // Resolved-config record: one JSON object with every field.
    std::string to_json() const;

    // key=value lines ('#' comments and blank lines ignored), applied on top
    // of *this.
    void apply_file(const std::string& path);

    // Reads a resolved-config record back, bit-exact for doubles (unlike the
    // text format, which goes through decimal strings).
    void apply_json_file(const std::string& path);

    // Cross-field invariants (divisibility, strict windows, positive dims).
    void validate() const;

    std::int64_t patches_per_frame() const;  // N_P
};

}  // namespace tvlm
