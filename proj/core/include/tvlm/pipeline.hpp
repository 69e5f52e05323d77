#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tvlm/config.hpp"
#include "tvlm/decoder.hpp"
#include "tvlm/frame_encoder.hpp"
#include "tvlm/grad_check.hpp"
#include "tvlm/instruct_data.hpp"
#include "tvlm/metrics.hpp"
#include "tvlm/optimizer.hpp"
#include "tvlm/response_parser.hpp"
#include "tvlm/video_qformer.hpp"

namespace tvlm {

// Component configs carved out of the one flat Config.
FrameEncoderConfig frame_encoder_config(const Config& cfg);
VideoQFormerConfig video_qformer_config(const Config& cfg);
DecoderConfig decoder_config(const Config& cfg);

// The assembled model: timestamp-aware frame encoder -> sliding window
// fusion -> projection -> causal decoder. Construction is deterministic for
// a given config (one seeded generator, fixed draw order), so two models
// built from the same config start bitwise identical. Adapters attach in the
// constructor when lora_rank > 0.
class Model {
public:
    explicit Model(const Config& cfg);
    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;

    const Config& config() const { return cfg_; }
    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }
    const FrameEncoder& frame_encoder() const { return *frame_encoder_; }
    const VideoQFormer& video_qformer() const { return *video_qformer_; }
    Decoder& decoder() { return *decoder_; }
    const Tokenizer& tokenizer() const { return tokenizer_; }

    // Frame encoder + temporal fusion. `trunk_cache` (optional, one slot per
    // frame) skips the frozen vision trunk on reuse.
    VideoTokens encode_clip(const VideoClip& clip, std::vector<Tensor>* trunk_cache = nullptr) const;

    // Mean answer-token NLL for one (clip, instruction, answer) triple.
    Var sample_loss(const VideoClip& clip, const std::string& instruction, const std::string& answer,
                    std::vector<Tensor>* trunk_cache = nullptr) const;

    // Greedy decoding of a response to `instruction` over the clip.
    std::string generate(const VideoClip& clip, const std::string& instruction, std::int64_t max_new_tokens,
                         std::vector<Tensor>* trunk_cache = nullptr) const;

    void save(const std::string& path) const;
    void load(const std::string& path);

private:
    Config cfg_;
    ParamSet params_;
    Tokenizer tokenizer_;
    std::unique_ptr<FrameEncoder> frame_encoder_;
    std::unique_ptr<VideoQFormer> video_qformer_;
    std::unique_ptr<Decoder> decoder_;
};

// Builds the model from `dir`/resolved_config.json + `dir`/model.ckpt.
std::unique_ptr<Model> load_model(const std::string& dir);

inline constexpr const char* kCheckpointFile = "model.ckpt";
inline constexpr const char* kResolvedConfigFile = "resolved_config.json";

struct TrainOptions {
    std::int64_t max_steps = 2000;
    std::int64_t batch_size = 4;
    double grad_clip = 1.0;
    WarmupSchedule schedule;
    AdamWConfig adam;
    std::uint64_t seed = 7;

    // Early stop: every probe_every steps (0 = never) measure the fraction
    // of samples whose answer the model reproduces exactly; stop when it
    // reaches target_match. The probe is teacher-forced argmax agreement at
    // every answer position, which for a full-length match is equivalent to
    // greedy decoding emitting the answer verbatim (the decoded prefix then
    // never diverges from the forced one).
    double target_match = 0.9;
    std::int64_t probe_every = 50;
    std::int64_t probe_after = 100;

    std::function<void(std::int64_t step, double loss, double lr)> on_step;  // optional progress hook
};

TrainOptions train_options_from(const Config& cfg);

struct TrainResult {
    std::int64_t steps = 0;
    double first_loss = 0.0;
    double final_loss = 0.0;
    double exact_match = 0.0;  // greedy-decode match fraction after training
    bool reached_target = false;
    std::vector<double> loss_history;  // one batch loss per step

    nlohmann::json to_json() const;  // summary fields only, not the history
};

// Deterministic overfit loop: cycles the samples in seeded shuffled order,
// averages the per-sample losses over each batch, clips the global gradient
// norm, and applies warmup-scheduled AdamW. Frozen parameters stay bitwise
// untouched. A non-finite loss aborts with the producing op named.
TrainResult train(Model& model, const std::vector<InstructionRecord>& records,
                  const std::map<std::string, VideoClip>& clips, const TrainOptions& options);

// Fraction of records whose greedy-decoded response equals the stored answer
// byte for byte.
double exact_match_rate(const Model& model, const std::vector<InstructionRecord>& records,
                        const std::map<std::string, VideoClip>& clips, std::int64_t max_new_tokens,
                        std::map<std::string, std::vector<Tensor>>* trunk_caches = nullptr);

// Raw model output for one instruction, before any parsing.
struct GenerationRecord {
    std::string video;
    Task task = Task::dense_captioning;
    std::string instruction;
    std::string response;
};

nlohmann::json generation_to_json(const GenerationRecord& r);
GenerationRecord generation_from_json(const nlohmann::json& j);
std::vector<GenerationRecord> read_generations(const std::string& path);
void write_generations(const std::string& path, const std::vector<GenerationRecord>& records);

std::vector<GenerationRecord> run_inference(const Model& model, const std::vector<InstructionRecord>& records,
                                            const std::map<std::string, VideoClip>& clips,
                                            std::int64_t max_new_tokens);

// Structured prediction, one per generation, in reference-comparable form.
struct PredictionRecord {
    std::string video;
    Task task = Task::dense_captioning;
    std::optional<Segment> grounding;
    std::vector<TimedCaption> segments;
    SaliencySeries saliency;
    bool missed = false;
};

PredictionRecord parse_generation(const GenerationRecord& gen, std::optional<double> duration = std::nullopt);

nlohmann::json prediction_to_json(const PredictionRecord& r);
PredictionRecord prediction_from_json(const nlohmann::json& j);
std::vector<PredictionRecord> read_predictions(const std::string& path);
void write_predictions(const std::string& path, const std::vector<PredictionRecord>& records);

// Full metric report. Predictions pair with references by (task, video) in
// reference order, k-th with k-th; a reference without a prediction scores
// as a miss, a prediction without a reference slot is an error. Sections:
//   grounding            recall_at_1 at IoU 0.5/0.7, mean_iou
//   dense_captioning,
//   step_localization,
//   transcribed_speech   f1, cider, soda_c
//   highlight,
//   summarization        map, hit_at_1 (clips of clip_length starting at the
//                        annotated times; references keep times with
//                        saliency >= hit_threshold)
// plus counts {references, predictions, videos, parser_misses,
// zero_reference_queries, hit_out_of_range} and a per_video breakdown.
// Field names are a stable interface.
nlohmann::json evaluate(const std::vector<PredictionRecord>& preds, const std::vector<AnnotationRecord>& refs,
                        double hit_threshold, double clip_length);

// Window count and token budget for the configured clip length:
// {windows, video_tokens, rate_sliding, rate_fixed}. Integral rates are
// emitted as integers.
nlohmann::json token_budget(const Config& cfg);

// Finite-difference check of the full forward + loss on one deterministic
// synthetic sample built from the config's seed.
GradCheckReport model_grad_check(const Config& cfg, std::int64_t coords = 200, double epsilon = 1e-4);

nlohmann::json grad_report_to_json(const GradCheckReport& report, double threshold = 1e-4);

}  // namespace tvlm
