#include "tvlm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <set>

#include "tvlm/checkpoint.hpp"
#include "tvlm/errors.hpp"
#include "tvlm/synth.hpp"

namespace tvlm {

namespace {

template <typename T, typename FromJson>
std::vector<T> read_jsonl(const std::string& path, FromJson from_json) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    std::vector<T> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError(path + ":" + std::to_string(lineno) + ": invalid JSON: " + e.what());
        }
        try {
            out.push_back(from_json(j));
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

template <typename T, typename ToJson>
void write_jsonl(const std::string& path, const std::vector<T>& records, ToJson to_json) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    for (const auto& r : records) os << to_json(r).dump() << "\n";
    if (!os) throw IoError("write failed: " + path);
}

void check_schema(const nlohmann::json& j) {
    if (!j.contains("schema") || !j.at("schema").is_number_integer() || j.at("schema").get<int>() != 1) {
        throw SchemaError("schema mismatch: expected 1, found " +
                          (j.contains("schema") ? j.at("schema").dump() : std::string("nothing")));
    }
}

}  // namespace

FrameEncoderConfig frame_encoder_config(const Config& cfg) {
    FrameEncoderConfig f;
    f.frame_height = cfg.frame_height;
    f.frame_width = cfg.frame_width;
    f.patch = cfg.patch;
    f.enc_dim = cfg.enc_dim;
    f.vit_layers = cfg.vit_layers;
    f.vit_heads = cfg.vit_heads;
    f.q_dim = cfg.q_dim;
    f.image_queries = cfg.image_queries;
    f.qf_layers = cfg.image_qf_layers;
    f.qf_heads = cfg.qf_heads;
    f.timestamp_off = cfg.timestamp_off;
    return f;
}

VideoQFormerConfig video_qformer_config(const Config& cfg) {
    VideoQFormerConfig v;
    v.q_dim = cfg.q_dim;
    v.llm_dim = cfg.llm_dim;
    v.image_queries = cfg.image_queries;
    v.layers = cfg.video_qf_layers;
    v.heads = cfg.qf_heads;
    v.sliding.window_len = cfg.window_len;
    v.sliding.stride = cfg.stride;
    v.sliding.n_queries = cfg.video_queries;
    v.sliding.mode = cfg.window_mode == "fixed" ? WindowMode::fixed : WindowMode::sliding;
    v.sliding.strict = cfg.strict_windows;
    return v;
}

DecoderConfig decoder_config(const Config& cfg) {
    DecoderConfig d;
    d.layers = cfg.dec_layers;
    d.heads = cfg.dec_heads;
    d.dim = cfg.llm_dim;
    d.ffn = cfg.dec_ffn;
    d.max_seq_len = cfg.max_seq_len;
    return d;
}

Model::Model(const Config& cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(cfg_.seed);
    frame_encoder_ = std::make_unique<FrameEncoder>(frame_encoder_config(cfg_), params_, rng);
    video_qformer_ = std::make_unique<VideoQFormer>(video_qformer_config(cfg_), params_, rng);
    decoder_ = std::make_unique<Decoder>(decoder_config(cfg_), params_, rng);
    if (cfg_.lora_rank > 0) decoder_->attach_lora(params_, cfg_.lora_rank, cfg_.lora_alpha, rng);
}

VideoTokens Model::encode_clip(const VideoClip& clip, std::vector<Tensor>* trunk_cache) const {
    return video_qformer_->compress(frame_encoder_->encode_video(clip, trunk_cache));
}

Var Model::sample_loss(const VideoClip& clip, const std::string& instruction, const std::string& answer,
                       std::vector<Tensor>* trunk_cache) const {
    const VideoTokens vt = encode_clip(clip, trunk_cache);
    return decoder_->loss(vt.tokens, tokenizer_.tokenize(instruction), tokenizer_.tokenize(answer));
}

std::string Model::generate(const VideoClip& clip, const std::string& instruction, std::int64_t max_new_tokens,
                            std::vector<Tensor>* trunk_cache) const {
    const VideoTokens vt = encode_clip(clip, trunk_cache);
    return tokenizer_.detokenize(decoder_->greedy_decode(vt.tokens, tokenizer_.tokenize(instruction), max_new_tokens));
}

void Model::save(const std::string& path) const { save_checkpoint(path, params_.all); }

void Model::load(const std::string& path) { load_checkpoint(path, params_.all); }

std::unique_ptr<Model> load_model(const std::string& dir) {
    namespace fs = std::filesystem;
    Config cfg;
    cfg.apply_json_file((fs::path(dir) / kResolvedConfigFile).string());
    auto model = std::make_unique<Model>(cfg);
    model->load((fs::path(dir) / kCheckpointFile).string());
    return model;
}

TrainOptions train_options_from(const Config& cfg) {
    TrainOptions o;
    o.max_steps = cfg.steps;
    o.batch_size = cfg.batch_size;
    o.grad_clip = cfg.grad_clip;
    o.schedule.warmup_lr = cfg.warmup_lr;
    o.schedule.peak_lr = cfg.lr;
    o.schedule.warmup_steps = cfg.warmup_steps;
    o.schedule.decay_steps = cfg.lr_schedule == "cosine" ? cfg.steps : 0;
    o.adam = {cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, cfg.weight_decay};
    o.seed = cfg.seed;
    return o;
}

nlohmann::json TrainResult::to_json() const {
    return {{"schema", 1},
            {"steps", steps},
            {"first_loss", first_loss},
            {"final_loss", final_loss},
            {"exact_match", exact_match},
            {"reached_target", reached_target}};
}

namespace {

struct TrainSample {
    const VideoClip* clip = nullptr;
    std::string video;
    std::vector<int> query_ids;
    std::vector<int> answer_ids;
    std::string answer;
};

std::vector<TrainSample> make_samples(const Model& model, const std::vector<InstructionRecord>& records,
                                      const std::map<std::string, VideoClip>& clips) {
    if (records.empty()) throw EmptyInputError("no training records");
    std::vector<TrainSample> out;
    for (const auto& r : records) {
        const auto it = clips.find(r.video);
        if (it == clips.end()) throw ValidationError("record references unknown video '" + r.video + "'");
        TrainSample s;
        s.clip = &it->second;
        s.video = r.video;
        s.query_ids = model.tokenizer().tokenize(r.instruction);
        s.answer_ids = model.tokenizer().tokenize(r.answer);
        s.answer = r.answer;
        out.push_back(std::move(s));
    }
    return out;
}

// Teacher-forced probe: argmax agreement at every answer position (closing
// EOS included). Cheap stand-in for greedy decoding during training; the two
// agree whenever the match is full-length, since a fully matching forced
// prefix is exactly what greedy decoding feeds back.
bool forced_exact(Model& model, const TrainSample& s, std::vector<Tensor>* cache) {
    const VideoTokens vt = model.encode_clip(*s.clip, cache);
    const Var logits = model.decoder().answer_logits(vt.tokens, s.query_ids, s.answer_ids);
    const std::int64_t rows = logits->value.dim(0), vocab = logits->value.dim(1);
    for (std::int64_t i = 0; i < rows; ++i) {
        const double* row = logits->value.data() + i * vocab;
        std::int64_t best = 0;
        for (std::int64_t v = 1; v < vocab; ++v) {
            if (row[v] > row[best]) best = v;
        }
        const std::int64_t want =
            i + 1 < rows ? s.answer_ids[static_cast<std::size_t>(i)] : Tokenizer::kEos;
        if (best != want) return false;
    }
    return true;
}

}  // namespace

TrainResult train(Model& model, const std::vector<InstructionRecord>& records,
                  const std::map<std::string, VideoClip>& clips, const TrainOptions& options) {
    if (options.max_steps < 1) throw ConfigError("max_steps must be >= 1");
    if (options.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    const std::vector<TrainSample> samples = make_samples(model, records, clips);

    std::map<std::string, std::vector<Tensor>> trunk_caches;
    AdamW opt(model.params().all, options.adam);
    Rng rng(options.seed);
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::size_t cursor = order.size();  // trigger a shuffle on first use

    std::int64_t max_answer = 0;
    for (const auto& s : samples) {
        max_answer = std::max(max_answer, static_cast<std::int64_t>(s.answer_ids.size()));
    }

    TrainResult result;
    for (std::int64_t step = 0; step < options.max_steps; ++step) {
        Var total;
        for (std::int64_t b = 0; b < options.batch_size; ++b) {
            if (cursor == order.size()) {
                for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                    const std::int64_t j = static_cast<std::int64_t>(i) +
                                           rng.uniform_int(static_cast<std::int64_t>(order.size() - i));
                    std::swap(order[i], order[static_cast<std::size_t>(j)]);
                }
                cursor = 0;
            }
            const TrainSample& s = samples[order[cursor++]];
            const VideoTokens vt = model.encode_clip(*s.clip, &trunk_caches[s.video]);
            const Var l = model.decoder().loss(vt.tokens, s.query_ids, s.answer_ids);
            total = total ? add(total, l) : l;
        }
        const Var loss = scale(total, 1.0 / static_cast<double>(options.batch_size));

        zero_grads(model.params().all);
        backward(loss);
        clip_grad_norm(model.params().all, options.grad_clip);
        const double lr = options.schedule.lr_at(step);
        opt.step(lr);

        const double loss_value = loss->value.scalar_value();
        result.loss_history.push_back(loss_value);
        result.steps = step + 1;
        if (options.on_step) options.on_step(step + 1, loss_value, lr);

        if (options.probe_every > 0 && step + 1 >= options.probe_after &&
            (step + 1) % options.probe_every == 0) {
            std::int64_t hits = 0;
            for (const auto& s : samples) {
                if (forced_exact(model, s, &trunk_caches[s.video])) ++hits;
            }
            if (static_cast<double>(hits) >=
                options.target_match * static_cast<double>(samples.size())) {
                break;
            }
        }
    }

    result.first_loss = result.loss_history.front();
    result.final_loss = result.loss_history.back();
    // the reported match comes from real greedy decoding, not the probe
    std::int64_t hits = 0;
    for (const auto& s : samples) {
        const std::string got = model.generate(*s.clip, model.tokenizer().detokenize(s.query_ids), max_answer + 8,
                                               &trunk_caches[s.video]);
        if (got == s.answer) ++hits;
    }
    result.exact_match = static_cast<double>(hits) / static_cast<double>(samples.size());
    result.reached_target = result.exact_match >= options.target_match;
    return result;
}

double exact_match_rate(const Model& model, const std::vector<InstructionRecord>& records,
                        const std::map<std::string, VideoClip>& clips, std::int64_t max_new_tokens,
                        std::map<std::string, std::vector<Tensor>>* trunk_caches) {
    if (records.empty()) throw EmptyInputError("no records to match");
    std::int64_t hits = 0;
    for (const auto& r : records) {
        const auto it = clips.find(r.video);
        if (it == clips.end()) throw ValidationError("record references unknown video '" + r.video + "'");
        std::vector<Tensor>* cache = trunk_caches ? &(*trunk_caches)[r.video] : nullptr;
        if (model.generate(it->second, r.instruction, max_new_tokens, cache) == r.answer) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

nlohmann::json generation_to_json(const GenerationRecord& r) {
    return {{"schema", 1}, {"video", r.video}, {"task", task_name(r.task)}, {"instruction", r.instruction},
            {"response", r.response}};
}

GenerationRecord generation_from_json(const nlohmann::json& j) {
    check_schema(j);
    GenerationRecord r;
    r.video = j.at("video").get<std::string>();
    r.task = task_from_name(j.at("task").get<std::string>());
    r.instruction = j.at("instruction").get<std::string>();
    r.response = j.at("response").get<std::string>();
    return r;
}

std::vector<GenerationRecord> read_generations(const std::string& path) {
    return read_jsonl<GenerationRecord>(path, generation_from_json);
}

void write_generations(const std::string& path, const std::vector<GenerationRecord>& records) {
    write_jsonl(path, records, generation_to_json);
}

std::vector<GenerationRecord> run_inference(const Model& model, const std::vector<InstructionRecord>& records,
                                            const std::map<std::string, VideoClip>& clips,
                                            std::int64_t max_new_tokens) {
    std::map<std::string, std::vector<Tensor>> caches;
    std::vector<GenerationRecord> out;
    for (const auto& r : records) {
        const auto it = clips.find(r.video);
        if (it == clips.end()) throw ValidationError("record references unknown video '" + r.video + "'");
        GenerationRecord g;
        g.video = r.video;
        g.task = r.task;
        g.instruction = r.instruction;
        g.response = model.generate(it->second, r.instruction, max_new_tokens, &caches[r.video]);
        out.push_back(std::move(g));
    }
    return out;
}

PredictionRecord parse_generation(const GenerationRecord& gen, std::optional<double> duration) {
    const ParsedPrediction p = parse_response(gen.task, gen.response, duration);
    PredictionRecord r;
    r.video = gen.video;
    r.task = gen.task;
    r.grounding = p.grounding;
    r.segments = p.segments;
    r.saliency = p.saliency;
    r.missed = p.missed();
    return r;
}

nlohmann::json prediction_to_json(const PredictionRecord& r) {
    nlohmann::json j;
    j["schema"] = 1;
    j["video"] = r.video;
    j["task"] = task_name(r.task);
    j["missed"] = r.missed;
    if (r.grounding) {
        j["grounding"] = {{"start", r.grounding->start}, {"end", r.grounding->end}};
    } else {
        j["grounding"] = nullptr;
    }
    j["segments"] = nlohmann::json::array();
    for (const auto& c : r.segments) {
        j["segments"].push_back({{"start", c.seg.start}, {"end", c.seg.end}, {"text", c.text}});
    }
    j["saliency"] = {{"times", r.saliency.times}, {"scores", r.saliency.scores}};
    return j;
}

PredictionRecord prediction_from_json(const nlohmann::json& j) {
    check_schema(j);
    PredictionRecord r;
    r.video = j.at("video").get<std::string>();
    r.task = task_from_name(j.at("task").get<std::string>());
    r.missed = j.at("missed").get<bool>();
    if (j.contains("grounding") && !j.at("grounding").is_null()) {
        r.grounding = Segment{j.at("grounding").at("start").get<double>(), j.at("grounding").at("end").get<double>()};
    }
    for (const auto& c : j.at("segments")) {
        r.segments.push_back(
            {{c.at("start").get<double>(), c.at("end").get<double>()}, c.at("text").get<std::string>()});
    }
    r.saliency.times = j.at("saliency").at("times").get<std::vector<double>>();
    r.saliency.scores = j.at("saliency").at("scores").get<std::vector<double>>();
    return r;
}

std::vector<PredictionRecord> read_predictions(const std::string& path) {
    return read_jsonl<PredictionRecord>(path, prediction_from_json);
}

void write_predictions(const std::string& path, const std::vector<PredictionRecord>& records) {
    write_jsonl(path, records, prediction_to_json);
}

namespace {

bool is_caption_task(Task t) {
    return t == Task::dense_captioning || t == Task::step_localization || t == Task::transcribed_speech;
}

bool is_saliency_task(Task t) { return t == Task::summarization || t == Task::highlight; }

std::vector<TimedCaption> ref_captions(const AnnotationRecord& ref) {
    std::vector<TimedCaption> out;
    for (const auto& s : ref.segments) out.push_back({{s.start.value, s.end.value}, s.text});
    return out;
}

std::vector<Segment> caption_segments(const std::vector<TimedCaption>& caps) {
    std::vector<Segment> out;
    for (const auto& c : caps) out.push_back(c.seg);
    return out;
}

nlohmann::json round_rate(double r) {
    if (std::floor(r) == r && std::abs(r) < 1e15) return static_cast<std::int64_t>(r);
    return r;
}

}  // namespace

nlohmann::json evaluate(const std::vector<PredictionRecord>& preds, const std::vector<AnnotationRecord>& refs,
                        double hit_threshold, double clip_length) {
    if (refs.empty()) throw EmptyInputError("evaluate: no references");
    if (!(clip_length > 0.0)) throw DomainError("clip_length must be positive");

    std::map<std::pair<int, std::string>, std::deque<const PredictionRecord*>> queue;
    for (const auto& p : preds) queue[{static_cast<int>(p.task), p.video}].push_back(&p);

    // per-task accumulators
    std::vector<std::optional<Segment>> g_preds;
    std::vector<Segment> g_gts;
    std::map<Task, std::vector<std::vector<TimedCaption>>> cap_preds, cap_gts;
    std::map<Task, std::vector<std::vector<ScoredMoment>>> sal_preds;
    std::map<Task, std::vector<std::vector<Segment>>> sal_gts;
    std::map<Task, std::int64_t> sal_hits, sal_queries, sal_range_misses;
    std::set<std::string> videos;
    std::int64_t parser_misses = 0;
    nlohmann::json per_video = nlohmann::json::object();

    for (const auto& ref : refs) {
        ref.validate();
        videos.insert(ref.video);
        const PredictionRecord* p = nullptr;
        auto it = queue.find({static_cast<int>(ref.task), ref.video});
        if (it != queue.end() && !it->second.empty()) {
            p = it->second.front();
            it->second.pop_front();
        }
        if (!p || p->missed) ++parser_misses;

        nlohmann::json entry;
        if (ref.task == Task::grounding) {
            const Segment gt{ref.segments[0].start.value, ref.segments[0].end.value};
            const std::optional<Segment> pred = p ? p->grounding : std::nullopt;
            g_preds.push_back(pred);
            g_gts.push_back(gt);
            entry["iou"] = pred ? iou(*pred, gt) : 0.0;
        } else if (is_caption_task(ref.task)) {
            const std::vector<TimedCaption> pc = p ? p->segments : std::vector<TimedCaption>();
            const std::vector<TimedCaption> gc = ref_captions(ref);
            cap_preds[ref.task].push_back(pc);
            cap_gts[ref.task].push_back(gc);
            entry["predictions"] = pc.size();
            entry["references"] = gc.size();
            entry["f1"] = dvc_f1({caption_segments(pc)}, {caption_segments(gc)});
        } else {
            std::vector<std::pair<double, double>> clip_scores;
            std::vector<Segment> gt_moments;
            for (std::size_t i = 0; i < ref.sal_times.size(); ++i) {
                const double t = ref.sal_times[i].value, s = ref.sal_scores[i].value;
                clip_scores.emplace_back(t, s);
                if (s >= hit_threshold) gt_moments.push_back({t, t + clip_length});
            }
            SaliencySeries series = p ? p->saliency : SaliencySeries{};
            std::vector<ScoredMoment> moments;
            for (std::size_t i = 0; i < series.times.size(); ++i) {
                moments.push_back({{series.times[i], series.times[i] + clip_length}, series.scores[i]});
            }
            const HitResult hr = hit_at_1(series, clip_scores, hit_threshold, clip_length);
            sal_hits[ref.task] += hr.hit ? 1 : 0;
            sal_range_misses[ref.task] += hr.out_of_range ? 1 : 0;
            sal_queries[ref.task] += 1;
            sal_preds[ref.task].push_back(std::move(moments));
            sal_gts[ref.task].push_back(std::move(gt_moments));
            entry["hit"] = hr.hit;
            entry["out_of_range"] = hr.out_of_range;
        }
        per_video[ref.video][task_name(ref.task)].push_back(entry);
    }

    for (const auto& [key, q] : queue) {
        if (!q.empty()) {
            throw ValidationError("prediction without a matching reference: task '" +
                                  std::string(task_name(static_cast<Task>(key.first))) + "', video '" + key.second +
                                  "'");
        }
    }

    nlohmann::json report;
    report["schema"] = 1;
    report["hit_threshold"] = hit_threshold;
    report["clip_length"] = clip_length;

    std::int64_t zero_ref = 0, range_misses = 0;

    if (!g_gts.empty()) {
        double iou_sum = 0.0;
        for (std::size_t i = 0; i < g_gts.size(); ++i) {
            iou_sum += g_preds[i] ? iou(*g_preds[i], g_gts[i]) : 0.0;
        }
        report["grounding"] = {
            {"queries", static_cast<std::int64_t>(g_gts.size())},
            {"recall_at_1", {{"iou_0.5", recall_at_1(g_preds, g_gts, 0.5)}, {"iou_0.7", recall_at_1(g_preds, g_gts, 0.7)}}},
            {"mean_iou", iou_sum / static_cast<double>(g_gts.size())}};
    }

    for (const auto& [task, gts] : cap_gts) {
        const auto& ps = cap_preds[task];
        std::vector<std::vector<Segment>> pseg, gseg;
        for (const auto& v : ps) pseg.push_back(caption_segments(v));
        for (const auto& v : gts) gseg.push_back(caption_segments(v));
        report[task_name(task)] = {{"videos", static_cast<std::int64_t>(gts.size())},
                                   {"f1", dvc_f1(pseg, gseg)},
                                   {"cider", dvc_cider(ps, gts)},
                                   {"soda_c", soda_c(ps, gts)}};
    }

    for (const auto& [task, gts] : sal_gts) {
        const MapResult mr = highlight_map(sal_preds[task], gts);
        zero_ref += mr.zero_reference_queries;
        range_misses += sal_range_misses[task];
        report[task_name(task)] = {
            {"queries", sal_queries[task]},
            {"map", mr.map},
            {"hit_at_1", 100.0 * static_cast<double>(sal_hits[task]) / static_cast<double>(sal_queries[task])},
            {"hit_out_of_range", sal_range_misses[task]},
            {"zero_reference_queries", mr.zero_reference_queries}};
    }

    report["counts"] = {{"references", static_cast<std::int64_t>(refs.size())},
                        {"predictions", static_cast<std::int64_t>(preds.size())},
                        {"videos", static_cast<std::int64_t>(videos.size())},
                        {"parser_misses", parser_misses},
                        {"zero_reference_queries", zero_ref},
                        {"hit_out_of_range", range_misses}};
    report["per_video"] = std::move(per_video);
    return report;
}

nlohmann::json token_budget(const Config& cfg) {
    cfg.validate();
    const VideoQFormerConfig vq = video_qformer_config(cfg);
    const std::int64_t windows = static_cast<std::int64_t>(make_windows(cfg.frames, vq.sliding).size());
    const std::int64_t n_patches = cfg.patches_per_frame();
    nlohmann::json j;
    j["windows"] = windows;
    j["video_tokens"] = windows * cfg.video_queries;
    j["rate_sliding"] =
        round_rate(compression_rate(cfg.frames, n_patches, cfg.video_queries, cfg.stride, WindowMode::sliding));
    j["rate_fixed"] =
        round_rate(compression_rate(cfg.frames, n_patches, cfg.video_queries, cfg.stride, WindowMode::fixed));
    return j;
}

GradCheckReport model_grad_check(const Config& cfg, std::int64_t coords, double epsilon) {
    Model model(cfg);
    SynthSpec spec;
    spec.videos = 1;
    spec.tasks = {Task::grounding};
    spec.seed = cfg.seed;
    const SynthCorpus corpus = synth_corpus(spec);
    const auto dataset = build_dataset(corpus.annotations, TemplateSet::builtin(), cfg.seed);
    const VideoClip clip = render_clip(corpus.videos[0], cfg.frames, cfg.frame_height, cfg.frame_width);

    // frozen-trunk cache stays valid: the check only perturbs trainables
    std::vector<Tensor> cache;
    const std::string instruction = dataset[0].instruction;
    const std::string answer = dataset[0].answer;
    auto forward = [&]() { return model.sample_loss(clip, instruction, answer, &cache); };
    Rng rng(cfg.seed + 1);
    return grad_check(forward, model.params().trainable(), rng, coords, epsilon);
}

nlohmann::json grad_report_to_json(const GradCheckReport& report, double threshold) {
    return {{"max_rel_err", report.max_rel_err},
            {"coords_checked", report.coords_checked},
            {"worst_param", report.worst_param},
            {"worst_index", report.worst_index},
            {"worst_analytic", report.worst_analytic},
            {"worst_numeric", report.worst_numeric},
            {"threshold", threshold},
            {"passed", report.passed(threshold)}};
}

}  // namespace tvlm
