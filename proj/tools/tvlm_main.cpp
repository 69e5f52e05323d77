#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tvlm/errors.hpp"
#include "tvlm/pipeline.hpp"
#include "tvlm/synth.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ConfigArgs {
    std::string profile = "toy";
    std::string config_file;
    std::vector<std::pair<std::string, CLI::Option*>> options;
    std::map<std::string, std::string> values;
};

// Registers --profile, --config, and one flag per config key on `cmd`.
// Precedence: profile defaults < config file < explicit flags.
void add_config_flags(CLI::App* cmd, ConfigArgs& args, const std::string& default_profile = "toy") {
    args.profile = default_profile;
    cmd->add_option("--profile", args.profile, "Base hyper-parameter profile")
        ->check(CLI::IsMember({"toy", "paper"}))
        ->capture_default_str();
    cmd->add_option("--config", args.config_file, "key=value config file applied over the profile");
    for (const auto& key : tvlm::Config::keys()) {
        auto* opt = cmd->add_option("--" + key, args.values[key]);
        opt->group("Model configuration");
        args.options.emplace_back(key, opt);
    }
}

tvlm::Config resolve_config(const ConfigArgs& args) {
    tvlm::Config cfg = args.profile == "paper" ? tvlm::Config::paper() : tvlm::Config::toy();
    if (!args.config_file.empty()) cfg.apply_file(args.config_file);
    for (const auto& [key, opt] : args.options) {
        if (opt->count() > 0) cfg.set(key, args.values.at(key));
    }
    cfg.validate();
    std::cerr << "resolved-config: " << json::parse(cfg.to_json()).dump() << "\n";
    return cfg;
}

std::vector<tvlm::Task> parse_task_list(const std::string& csv) {
    std::vector<tvlm::Task> out;
    std::size_t begin = 0;
    while (begin <= csv.size()) {
        const std::size_t comma = csv.find(',', begin);
        const std::string name = csv.substr(begin, comma == std::string::npos ? std::string::npos : comma - begin);
        if (!name.empty()) out.push_back(tvlm::task_from_name(name));
        if (comma == std::string::npos) break;
        begin = comma + 1;
    }
    if (out.empty()) throw tvlm::ValidationError("empty task list");
    return out;
}

template <typename T>
std::vector<T> filter_tasks(const std::vector<T>& records, const std::vector<tvlm::Task>& tasks) {
    std::vector<T> out;
    for (const auto& r : records) {
        for (tvlm::Task t : tasks) {
            if (r.task == t) {
                out.push_back(r);
                break;
            }
        }
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw tvlm::IoError("cannot open " + path + " for writing");
    os << text;
    if (!text.empty() && text.back() != '\n') os << "\n";
    if (!os) throw tvlm::IoError("write failed: " + path);
}

void emit(const std::string& out_path, const json& j) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        write_text(out_path, j.dump(2));
    }
}

int cmd_synth(const ConfigArgs& cargs, const tvlm::SynthSpec& spec_in, const std::string& tasks_csv,
              const std::string& out_dir) {
    const tvlm::Config cfg = resolve_config(cargs);
    tvlm::SynthSpec spec = spec_in;
    spec.frame_height = cfg.frame_height;
    spec.frame_width = cfg.frame_width;
    if (!tasks_csv.empty()) spec.tasks = parse_task_list(tasks_csv);
    const tvlm::SynthCorpus corpus = tvlm::synth_corpus(spec);
    tvlm::write_corpus(out_dir, corpus, cfg.frames, cfg.frame_height, cfg.frame_width);
    json summary = {{"videos", static_cast<std::int64_t>(corpus.videos.size())},
                    {"annotations", static_cast<std::int64_t>(corpus.annotations.size())},
                    {"frames_per_clip", cfg.frames},
                    {"out", out_dir}};
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_build_data(const std::string& annotations_path, const std::string& templates_path, std::uint64_t seed,
                   const std::string& out_path, const std::string& stats_path) {
    const auto annotations = tvlm::read_annotations(annotations_path);
    const tvlm::TemplateSet templates =
        templates_path.empty() ? tvlm::TemplateSet::builtin() : tvlm::TemplateSet::from_json_file(templates_path);
    const auto dataset = tvlm::build_dataset(annotations, templates, seed);
    tvlm::write_instructions(out_path, dataset);
    const json stats = tvlm::dataset_stats(annotations).to_json();
    if (!stats_path.empty()) write_text(stats_path, stats.dump(2));
    std::cout << stats.dump(2) << "\n";
    return 0;
}

int cmd_train_toy(const ConfigArgs& cargs, const std::string& data_dir, const std::string& tasks_csv,
                  const std::string& templates_path, const std::string& out_dir, std::int64_t log_every) {
    const tvlm::Config cfg = resolve_config(cargs);
    auto annotations = tvlm::read_annotations((fs::path(data_dir) / "annotations.jsonl").string());
    annotations = filter_tasks(annotations, parse_task_list(tasks_csv));
    if (annotations.empty()) throw tvlm::ValidationError("no annotations left after task filter '" + tasks_csv + "'");
    const tvlm::TemplateSet templates =
        templates_path.empty() ? tvlm::TemplateSet::builtin() : tvlm::TemplateSet::from_json_file(templates_path);
    const auto dataset = tvlm::build_dataset(annotations, templates, cfg.seed);
    const auto clips = tvlm::load_clips(data_dir);

    tvlm::Model model(cfg);
    tvlm::TrainOptions options = tvlm::train_options_from(cfg);
    if (log_every > 0) {
        options.on_step = [log_every](std::int64_t step, double loss, double lr) {
            if (step % log_every == 0) {
                std::cerr << "step " << step << "  loss " << loss << "  lr " << lr << "\n";
            }
        };
    }
    const tvlm::TrainResult result = tvlm::train(model, dataset, clips, options);

    fs::create_directories(out_dir);
    model.save((fs::path(out_dir) / tvlm::kCheckpointFile).string());
    write_text((fs::path(out_dir) / tvlm::kResolvedConfigFile).string(), cfg.to_json());
    write_text((fs::path(out_dir) / "train_report.json").string(), result.to_json().dump(2));
    tvlm::write_instructions((fs::path(out_dir) / "train_instructions.jsonl").string(), dataset);
    std::cout << result.to_json().dump(2) << "\n";
    return result.reached_target ? 0 : 1;
}

int cmd_infer(const std::string& model_dir, const std::string& data_dir, const std::string& instructions_path,
              const std::string& tasks_csv, std::int64_t max_new_tokens, const std::string& out_path) {
    const auto model = tvlm::load_model(model_dir);
    auto records = tvlm::read_instructions(instructions_path);
    if (!tasks_csv.empty()) records = filter_tasks(records, parse_task_list(tasks_csv));
    if (records.empty()) throw tvlm::ValidationError("no instruction records to run");
    const auto clips = tvlm::load_clips(data_dir);
    const auto generations = tvlm::run_inference(*model, records, clips, max_new_tokens);
    tvlm::write_generations(out_path, generations);
    std::cerr << "wrote " << generations.size() << " generations to " << out_path << "\n";
    return 0;
}

int cmd_parse(const std::string& generations_path, const std::string& annotations_path, const std::string& out_path) {
    const auto generations = tvlm::read_generations(generations_path);
    std::map<std::string, double> durations;
    if (!annotations_path.empty()) {
        for (const auto& a : tvlm::read_annotations(annotations_path)) durations.emplace(a.video, a.duration);
    }
    std::vector<tvlm::PredictionRecord> predictions;
    std::int64_t misses = 0;
    for (const auto& g : generations) {
        std::optional<double> duration;
        const auto it = durations.find(g.video);
        if (it != durations.end()) duration = it->second;
        predictions.push_back(tvlm::parse_generation(g, duration));
        if (predictions.back().missed) ++misses;
    }
    tvlm::write_predictions(out_path, predictions);
    std::cerr << "parsed " << predictions.size() << " generations (" << misses << " misses) to " << out_path << "\n";
    return 0;
}

int cmd_eval(const ConfigArgs& cargs, const std::string& predictions_path, const std::string& references_path,
             const std::string& out_path) {
    const tvlm::Config cfg = resolve_config(cargs);
    const auto predictions = tvlm::read_predictions(predictions_path);
    const auto references = tvlm::read_annotations(references_path);
    const json report = tvlm::evaluate(predictions, references, cfg.hit_threshold, cfg.clip_length);
    emit(out_path, report);
    return 0;
}

int cmd_tokens(const ConfigArgs& cargs, const std::string& out_path) {
    const tvlm::Config cfg = resolve_config(cargs);
    emit(out_path, tvlm::token_budget(cfg));
    return 0;
}

int cmd_grad_check(const ConfigArgs& cargs, std::int64_t coords, double epsilon, double threshold,
                   const std::string& out_path) {
    const tvlm::Config cfg = resolve_config(cargs);
    const tvlm::GradCheckReport report = tvlm::model_grad_check(cfg, coords, epsilon);
    emit(out_path, tvlm::grad_report_to_json(report, threshold));
    return report.passed(threshold) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-aware video-language model toolkit"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic clip corpus with exact annotations");
    ConfigArgs synth_cfg;
    tvlm::SynthSpec spec;
    std::string synth_tasks, synth_out;
    synth->add_option("--out", synth_out, "Corpus output directory")->required();
    synth->add_option("--videos", spec.videos, "Number of videos")->capture_default_str();
    synth->add_option("--min-duration", spec.min_duration)->capture_default_str();
    synth->add_option("--max-duration", spec.max_duration)->capture_default_str();
    synth->add_option("--min-events", spec.min_events)->capture_default_str();
    synth->add_option("--max-events", spec.max_events)->capture_default_str();
    synth->add_option("--patterns", spec.patterns, "Visual vocabulary size")->capture_default_str();
    synth->add_option("--synth-seed", spec.seed, "Corpus generator seed")->capture_default_str();
    synth->add_option("--tasks", synth_tasks, "Comma-separated task subset (default: all six)");
    synth->add_flag("--strict", spec.strict, "Reject overlapping events");
    add_config_flags(synth, synth_cfg);

    // build-data
    auto* build = app.add_subcommand("build-data", "Compile annotations into instruction/answer pairs");
    std::string build_annotations, build_templates, build_out, build_stats;
    std::uint64_t build_seed = 7;
    build->add_option("--annotations", build_annotations, "Annotation JSONL input")->required();
    build->add_option("--templates", build_templates, "Instruction template JSON (default: built-in set)");
    build->add_option("--seed", build_seed, "Template sampling seed")->capture_default_str();
    build->add_option("--out", build_out, "Instruction JSONL output")->required();
    build->add_option("--stats", build_stats, "Also write dataset stats JSON here");

    // train-toy
    auto* train = app.add_subcommand("train-toy", "Overfit the toy model on a synthetic corpus");
    ConfigArgs train_cfg;
    std::string train_data, train_tasks = "grounding", train_templates, train_out;
    std::int64_t train_log_every = 50;
    train->add_option("--data", train_data, "Corpus directory from `synth`")->required();
    train->add_option("--out", train_out, "Run directory (checkpoint, resolved config, report)")->required();
    train->add_option("--tasks", train_tasks, "Comma-separated tasks to train on")->capture_default_str();
    train->add_option("--templates", train_templates, "Instruction template JSON (default: built-in set)");
    train->add_option("--log-every", train_log_every, "Progress log cadence in steps (0 = quiet)")
        ->capture_default_str();
    add_config_flags(train, train_cfg);

    // infer
    auto* infer = app.add_subcommand("infer", "Greedy-decode responses for instruction records");
    std::string infer_model, infer_data, infer_instructions, infer_tasks, infer_out;
    std::int64_t infer_budget = 128;
    infer->add_option("--model", infer_model, "Run directory from `train-toy`")->required();
    infer->add_option("--data", infer_data, "Corpus directory with the referenced clips")->required();
    infer->add_option("--instructions", infer_instructions, "Instruction JSONL input")->required();
    infer->add_option("--tasks", infer_tasks, "Comma-separated task subset");
    infer->add_option("--max-new-tokens", infer_budget)->capture_default_str();
    infer->add_option("--out", infer_out, "Generation JSONL output")->required();

    // parse
    auto* parse = app.add_subcommand("parse", "Extract structured predictions from generations");
    std::string parse_generations, parse_annotations, parse_out;
    parse->add_option("--generations", parse_generations, "Generation JSONL input")->required();
    parse->add_option("--annotations", parse_annotations, "Annotation JSONL supplying durations for clamping");
    parse->add_option("--out", parse_out, "Prediction JSONL output")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "Score predictions against reference annotations");
    ConfigArgs eval_cfg;
    std::string eval_predictions, eval_references, eval_out;
    eval->add_option("--predictions", eval_predictions, "Prediction JSONL input")->required();
    eval->add_option("--references", eval_references, "Annotation JSONL references")->required();
    eval->add_option("--out", eval_out, "Report JSON output (default: stdout)");
    add_config_flags(eval, eval_cfg);

    // tokens
    auto* tokens = app.add_subcommand("tokens", "Report window count, token count, and compression rates");
    ConfigArgs tokens_cfg;
    std::string tokens_out;
    tokens->add_option("--out", tokens_out, "Budget JSON output (default: stdout)");
    add_config_flags(tokens, tokens_cfg, "paper");

    // grad-check
    auto* gradcheck = app.add_subcommand("grad-check", "Finite-difference check of the full forward + loss");
    ConfigArgs grad_cfg;
    std::int64_t grad_coords = 200;
    double grad_epsilon = 1e-4, grad_threshold = 1e-4;
    std::string grad_out;
    gradcheck->add_option("--coords", grad_coords, "Parameter coordinates to sample")->capture_default_str();
    gradcheck->add_option("--epsilon", grad_epsilon, "Central-difference step")->capture_default_str();
    gradcheck->add_option("--threshold", grad_threshold, "Max relative error to pass")->capture_default_str();
    gradcheck->add_option("--out", grad_out, "Report JSON output (default: stdout)");
    add_config_flags(gradcheck, grad_cfg);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(synth_cfg, spec, synth_tasks, synth_out);
        if (build->parsed()) return cmd_build_data(build_annotations, build_templates, build_seed, build_out,
                                                   build_stats);
        if (train->parsed()) return cmd_train_toy(train_cfg, train_data, train_tasks, train_templates, train_out,
                                                  train_log_every);
        if (infer->parsed()) return cmd_infer(infer_model, infer_data, infer_instructions, infer_tasks, infer_budget,
                                              infer_out);
        if (parse->parsed()) return cmd_parse(parse_generations, parse_annotations, parse_out);
        if (eval->parsed()) return cmd_eval(eval_cfg, eval_predictions, eval_references, eval_out);
        if (tokens->parsed()) return cmd_tokens(tokens_cfg, tokens_out);
        if (gradcheck->parsed()) return cmd_grad_check(grad_cfg, grad_coords, grad_epsilon, grad_threshold, grad_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
