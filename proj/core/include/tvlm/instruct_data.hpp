#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tvlm {

enum class Task {
    dense_captioning,
    grounding,
    summarization,
    highlight,
    step_localization,
    transcribed_speech,
};

inline constexpr Task kAllTasks[] = {Task::dense_captioning, Task::grounding,        Task::summarization,
                                     Task::highlight,        Task::step_localization, Task::transcribed_speech};

const char* task_name(Task t);
Task task_from_name(const std::string& name);  // throws ValidationError on unknown names

// A numeric value that remembers whether the source wrote it with a decimal
// point, so formatted answers reproduce the style ("90" vs "90.0"). Decimal
// numbers render with exactly one decimal place.
struct Number {
    double value = 0.0;
    bool decimal = false;

    std::string str() const;
    static Number integer(double v) { return {v, false}; }
    static Number with_decimal(double v) { return {v, true}; }
};

struct AnnSegment {
    Number start, end;
    std::string text;
};

// One normalized annotation. Which fields apply depends on the task:
// segment tasks fill `segments`, saliency tasks fill the two parallel lists,
// grounding/highlight carry a query.
struct AnnotationRecord {
    std::string video;
    double duration = 0.0;
    Task task = Task::dense_captioning;
    std::vector<AnnSegment> segments;
    std::vector<Number> sal_times;
    std::vector<Number> sal_scores;
    std::string query;
    std::string source;

    // Throws ValidationError listing every violated field path at once.
    void validate() const;
};

inline constexpr const char* kQueryPlaceholder = "<query_placeholder>";

// Exactly six instruction wordings per task. Grounding and highlight
// templates must contain the query placeholder.
class TemplateSet {
public:
    static const TemplateSet& builtin();
    static TemplateSet from_json_file(const std::string& path);

    const std::vector<std::string>& for_task(Task t) const;
    void validate() const;

private:
    std::map<Task, std::vector<std::string>> by_task_;
};

// Byte-exact answer rendering per task (validates the record first):
//   segment tasks     "{start} - {end} seconds, {text}." joined by single spaces
//   grounding         "The given query happens in {start} - {end} seconds."
//   summarization     "The key timestamps are in the {t...} seconds, Their
//                      saliency scores are {s...}."
//   highlight         "There are {n} highlight moments in the {t...} seconds,
//                      Their saliency scores are {s...}."
//   transcribed       "Transcribed speech: " + segment-task rendering
std::string format_answer(const AnnotationRecord& record);

struct InstructionRecord {
    std::string video;
    Task task = Task::dense_captioning;
    std::string instruction;
    std::string answer;
    std::string source;
};

// Pairs each record with a template drawn uniformly by the seeded generator,
// substitutes the query placeholder, and formats the answer. Deterministic
// for a given seed; input order is preserved.
std::vector<InstructionRecord> build_dataset(const std::vector<AnnotationRecord>& records,
                                             const TemplateSet& templates, std::uint64_t seed);

struct DatasetStats {
    std::map<Task, std::int64_t> per_task;
    std::int64_t total = 0;
    std::optional<double> avg_duration;  // absent (not 0) for empty input

    nlohmann::json to_json() const;
};

DatasetStats dataset_stats(const std::vector<AnnotationRecord>& records);

// JSONL schemas, both versioned with "schema": 1. A record with any other
// schema value is rejected naming expected vs found.
nlohmann::json annotation_to_json(const AnnotationRecord& r);
AnnotationRecord annotation_from_json(const nlohmann::json& j);
std::vector<AnnotationRecord> read_annotations(const std::string& path);
void write_annotations(const std::string& path, const std::vector<AnnotationRecord>& records);

nlohmann::json instruction_to_json(const InstructionRecord& r);
InstructionRecord instruction_from_json(const nlohmann::json& j);
std::vector<InstructionRecord> read_instructions(const std::string& path);
void write_instructions(const std::string& path, const std::vector<InstructionRecord>& records);

}  // namespace tvlm
