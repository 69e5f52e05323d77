#include "tvlm/instruct_data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tvlm/errors.hpp"
#include "tvlm/rng.hpp"

namespace tvlm {

namespace {

constexpr int kSchemaVersion = 1;

void check_schema(const nlohmann::json& j, const char* what) {
    if (!j.contains("schema")) throw SchemaError(std::string(what) + " record lacks a schema field");
    const auto v = j.at("schema");
    if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
        throw SchemaError(std::string(what) + " schema mismatch: expected " + std::to_string(kSchemaVersion) +
                          ", found " + v.dump());
    }
}

std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    const auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

bool is_segment_task(Task t) {
    return t == Task::dense_captioning || t == Task::step_localization || t == Task::transcribed_speech;
}

bool is_saliency_task(Task t) { return t == Task::summarization || t == Task::highlight; }

std::string join_numbers(const std::vector<Number>& nums) {
    std::string out;
    for (std::size_t i = 0; i < nums.size(); ++i) {
        if (i) out += ", ";
        out += nums[i].str();
    }
    return out;
}

std::string render_segments(const std::vector<AnnSegment>& segs) {
    std::string out;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (i) out += " ";
        out += segs[i].start.str() + " - " + segs[i].end.str() + " seconds, " + segs[i].text + ".";
    }
    return out;
}

}  // namespace

const char* task_name(Task t) {
    switch (t) {
        case Task::dense_captioning: return "dense_captioning";
        case Task::grounding: return "grounding";
        case Task::summarization: return "summarization";
        case Task::highlight: return "highlight";
        case Task::step_localization: return "step_localization";
        case Task::transcribed_speech: return "transcribed_speech";
    }
    throw ValidationError("unreachable task value");
}

Task task_from_name(const std::string& name) {
    for (Task t : kAllTasks) {
        if (name == task_name(t)) return t;
    }
    throw ValidationError("unknown task '" + name + "'");
}

std::string Number::str() const {
    char buf[64];
    if (decimal) {
        std::snprintf(buf, sizeof(buf), "%.1f", value);
    } else {
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(std::llround(value)));
    }
    return buf;
}

void AnnotationRecord::validate() const {
    std::vector<std::string> bad;
    auto flag = [&](const std::string& path, const std::string& why) { bad.push_back(path + " (" + why + ")"); };

    if (video.empty()) flag("video", "empty");
    if (!(duration > 0.0)) flag("duration", "must be positive");

    auto check_segment = [&](const AnnSegment& s, const std::string& path, bool need_text) {
        if (s.start.value < 0.0) flag(path + ".start", "negative");
        if (s.end.value < s.start.value) flag(path + ".end", "before start");
        if (duration > 0.0 && s.end.value > duration) flag(path + ".end", "exceeds duration");
        if (need_text && trimmed(s.text).empty()) flag(path + ".text", "empty");
    };

    if (is_segment_task(task)) {
        if (segments.empty()) flag("segments", "empty");
        for (std::size_t i = 0; i < segments.size(); ++i) {
            check_segment(segments[i], "segments[" + std::to_string(i) + "]", true);
        }
        if (!sal_times.empty() || !sal_scores.empty()) flag("saliency", "set on a segment task");
    } else if (task == Task::grounding) {
        if (segments.size() != 1) {
            flag("segments", "grounding needs exactly one target segment, has " + std::to_string(segments.size()));
        }
        for (std::size_t i = 0; i < segments.size(); ++i) {
            check_segment(segments[i], "segments[" + std::to_string(i) + "]", false);
        }
        if (trimmed(query).empty()) flag("query", "empty");
    } else if (is_saliency_task(task)) {
        if (sal_times.empty()) flag("saliency.times", "empty");
        if (sal_times.size() != sal_scores.size()) {
            flag("saliency.scores", "length " + std::to_string(sal_scores.size()) + " != times length " +
                                        std::to_string(sal_times.size()));
        }
        for (std::size_t i = 0; i < sal_times.size(); ++i) {
            const double t = sal_times[i].value;
            if (t < 0.0 || (duration > 0.0 && t > duration)) {
                flag("saliency.times[" + std::to_string(i) + "]", "outside [0, duration]");
            }
            if (i > 0 && t <= sal_times[i - 1].value) {
                flag("saliency.times[" + std::to_string(i) + "]", "not strictly increasing");
            }
        }
        if (task == Task::highlight && trimmed(query).empty()) flag("query", "empty");
        if (!segments.empty()) flag("segments", "set on a saliency task");
    }

    if (!bad.empty()) {
        std::string msg = "invalid annotation for video '" + video + "': ";
        for (std::size_t i = 0; i < bad.size(); ++i) {
            if (i) msg += ", ";
            msg += bad[i];
        }
        throw ValidationError(msg);
    }
}

const TemplateSet& TemplateSet::builtin() {
    // first wording per task is the canonical one; the remaining five are
    // house paraphrases
    static const TemplateSet set = [] {
        TemplateSet s;
        s.by_task_[Task::dense_captioning] = {
            "Localize a series of activity events in the video, output the start and end timestamp for each "
            "event, and describe each event with sentences.",
            "Identify every distinct event in the video, giving the start and end time of each one together with "
            "a sentence describing it.",
            "Break the video into its component activities and report each activity's time span and a short "
            "description.",
            "List all notable events that occur in the video; for each, state when it begins, when it ends, and "
            "what happens.",
            "Find the events in this video and write out their start and end timestamps followed by sentences "
            "explaining them.",
            "Detect each activity shown in the video and produce its temporal boundaries along with a caption "
            "for the activity.",
        };
        s.by_task_[Task::grounding] = {
            "Detect and report the start and end timestamps of the video segment that semantically matches the "
            "given textual query <query_placeholder>.",
            "Find the video segment that corresponds to the query <query_placeholder> and state its start and "
            "end timestamps.",
            "Locate when <query_placeholder> occurs in the video and give the segment's start and end time in "
            "seconds.",
            "Given the query <query_placeholder>, return the start and end timestamps of the matching moment in "
            "the video.",
            "At what time does the video show <query_placeholder>? Provide the start and end of that segment.",
            "Report the temporal boundary, start and end in seconds, of the part of the video described by "
            "<query_placeholder>.",
        };
        s.by_task_[Task::summarization] = {
            "Generate a summarized version of the video, focusing on extracting key frames that best represent "
            "the overall narrative. The output should be a list of timestamps in seconds and their corresponding "
            "salient scores.",
            "Summarize the video by selecting the key moments; list their timestamps in seconds with a salient "
            "score for each.",
            "Pick out the frames that best capture the video's storyline and output their times along with "
            "saliency scores.",
            "Produce a condensed view of this video: a list of important timestamps and the corresponding "
            "saliency scores.",
            "Extract the most representative moments of the video and report each moment's time in seconds and "
            "its salience.",
            "Which timestamps carry the video's narrative? List them in seconds together with their saliency "
            "scores.",
        };
        s.by_task_[Task::highlight] = {
            "Watch the provided video and mark out the scenes that stand out based on the description: "
            "<query_placeholder>. Document the timestamps of these highlights and evaluate their saliency "
            "scores.",
            "Find the highlight moments matching the description <query_placeholder> and list their timestamps "
            "and saliency scores.",
            "Using the description <query_placeholder>, mark the standout scenes with their times in seconds and "
            "rate each one's saliency.",
            "Locate the clips relevant to <query_placeholder>; report when they occur and how salient each clip "
            "is.",
            "Identify the moments of the video that match <query_placeholder>, giving a timestamp list and a "
            "score list.",
            "Scan the video for highlights described by <query_placeholder> and output their timestamps with "
            "saliency scores.",
        };
        s.by_task_[Task::step_localization] = {
            "Identify and mark the video segments corresponding to a series of actions or steps, specifying the "
            "timestamps and describing the steps.",
            "Mark each step performed in the video, giving its start and end timestamps and a short description "
            "of the step.",
            "Segment the procedure shown in the video into steps and report every step's time span and what it "
            "involves.",
            "List the actions carried out in the video in order, with the start and end time of each action.",
            "For every step in the video, state when it starts, when it ends, and describe the step briefly.",
            "Find the sequence of steps in this video and output their temporal boundaries together with step "
            "descriptions.",
        };
        s.by_task_[Task::transcribed_speech] = {
            "Watch the video, transcribe the speech, and indicate when each segment starts and ends.",
            "Transcribe the spoken content of the video and give the start and end time of every speech "
            "segment.",
            "Write out the speech in the video, marking when each utterance begins and ends.",
            "Produce a time-aligned transcript: each speech segment's start and end in seconds followed by its "
            "text.",
            "Listen to the video and report the transcribed speech with timestamps for every segment.",
            "Generate the video's speech transcript, indicating the start and end seconds of each spoken "
            "segment.",
        };
        s.validate();
        return s;
    }();
    return set;
}

TemplateSet TemplateSet::from_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open template file: " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("template file " + path + " is not valid JSON: " + e.what());
    }
    check_schema(j, "template");
    TemplateSet s;
    for (Task t : kAllTasks) {
        const std::string name = task_name(t);
        if (!j.contains(name)) throw ValidationError("template file missing task '" + name + "'");
        s.by_task_[t] = j.at(name).get<std::vector<std::string>>();
    }
    s.validate();
    return s;
}

const std::vector<std::string>& TemplateSet::for_task(Task t) const {
    auto it = by_task_.find(t);
    if (it == by_task_.end()) throw ValidationError(std::string("no templates for task ") + task_name(t));
    return it->second;
}

void TemplateSet::validate() const {
    std::vector<std::string> bad;
    for (Task t : kAllTasks) {
        const std::string name = task_name(t);
        auto it = by_task_.find(t);
        if (it == by_task_.end()) {
            bad.push_back(name + " (missing)");
            continue;
        }
        if (it->second.size() != 6) {
            bad.push_back(name + " (has " + std::to_string(it->second.size()) + " templates, needs exactly 6)");
        }
        if (t == Task::grounding || t == Task::highlight) {
            for (std::size_t i = 0; i < it->second.size(); ++i) {
                if (it->second[i].find(kQueryPlaceholder) == std::string::npos) {
                    bad.push_back(name + "[" + std::to_string(i) + "] (missing query placeholder)");
                }
            }
        }
    }
    if (!bad.empty()) {
        std::string msg = "invalid template set: ";
        for (std::size_t i = 0; i < bad.size(); ++i) {
            if (i) msg += ", ";
            msg += bad[i];
        }
        throw ValidationError(msg);
    }
}

std::string format_answer(const AnnotationRecord& record) {
    record.validate();
    switch (record.task) {
        case Task::dense_captioning:
        case Task::step_localization:
            return render_segments(record.segments);
        case Task::grounding:
            return "The given query happens in " + record.segments[0].start.str() + " - " +
                   record.segments[0].end.str() + " seconds.";
        case Task::summarization:
            return "The key timestamps are in the " + join_numbers(record.sal_times) +
                   " seconds, Their saliency scores are " + join_numbers(record.sal_scores) + ".";
        case Task::highlight:
            return "There are " + std::to_string(record.sal_times.size()) + " highlight moments in the " +
                   join_numbers(record.sal_times) + " seconds, Their saliency scores are " +
                   join_numbers(record.sal_scores) + ".";
        case Task::transcribed_speech:
            return "Transcribed speech: " + render_segments(record.segments);
    }
    throw ValidationError("unreachable task value");
}

std::vector<InstructionRecord> build_dataset(const std::vector<AnnotationRecord>& records,
                                             const TemplateSet& templates, std::uint64_t seed) {
    templates.validate();
    Rng rng(seed);
    std::vector<InstructionRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        r.validate();
        const auto& options = templates.for_task(r.task);
        std::string instruction = options[static_cast<std::size_t>(rng.uniform_int(6))];
        for (auto pos = instruction.find(kQueryPlaceholder); pos != std::string::npos;
             pos = instruction.find(kQueryPlaceholder, pos)) {
            instruction.replace(pos, std::string(kQueryPlaceholder).size(), r.query);
            pos += r.query.size();
        }
        out.push_back({r.video, r.task, std::move(instruction), format_answer(r), r.source});
    }
    return out;
}

DatasetStats dataset_stats(const std::vector<AnnotationRecord>& records) {
    DatasetStats s;
    double dur = 0.0;
    for (const auto& r : records) {
        ++s.per_task[r.task];
        ++s.total;
        dur += r.duration;
    }
    if (s.total > 0) s.avg_duration = dur / static_cast<double>(s.total);
    return s;
}

nlohmann::json DatasetStats::to_json() const {
    nlohmann::json j;
    j["schema"] = kSchemaVersion;
    j["total"] = total;
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [task, count] : per_task) per[task_name(task)] = count;
    j["per_task"] = per;
    if (avg_duration) {
        j["avg_duration"] = *avg_duration;
    } else {
        j["avg_duration"] = nullptr;
    }
    return j;
}

namespace {

nlohmann::json number_to_json(const Number& n) {
    if (n.decimal) return n.value;
    return static_cast<std::int64_t>(std::llround(n.value));
}

Number number_from_json(const nlohmann::json& j, const std::string& path) {
    if (j.is_number_integer() || j.is_number_unsigned()) return Number::integer(j.get<double>());
    if (j.is_number_float()) return Number::with_decimal(j.get<double>());
    throw SchemaError("expected a number at " + path + ", found " + j.dump());
}

}  // namespace

nlohmann::json annotation_to_json(const AnnotationRecord& r) {
    nlohmann::json j;
    j["schema"] = kSchemaVersion;
    j["video"] = r.video;
    j["duration"] = r.duration;
    j["task"] = task_name(r.task);
    if (!r.segments.empty()) {
        nlohmann::json segs = nlohmann::json::array();
        for (const auto& s : r.segments) {
            nlohmann::json e;
            e["start"] = number_to_json(s.start);
            e["end"] = number_to_json(s.end);
            if (!s.text.empty()) e["text"] = s.text;
            segs.push_back(std::move(e));
        }
        j["segments"] = std::move(segs);
    }
    if (!r.sal_times.empty()) {
        nlohmann::json times = nlohmann::json::array(), scores = nlohmann::json::array();
        for (const auto& t : r.sal_times) times.push_back(number_to_json(t));
        for (const auto& sc : r.sal_scores) scores.push_back(number_to_json(sc));
        j["saliency"] = {{"times", std::move(times)}, {"scores", std::move(scores)}};
    }
    if (!r.query.empty()) j["query"] = r.query;
    if (!r.source.empty()) j["source"] = r.source;
    return j;
}

AnnotationRecord annotation_from_json(const nlohmann::json& j) {
    check_schema(j, "annotation");
    AnnotationRecord r;
    r.video = j.at("video").get<std::string>();
    r.duration = j.at("duration").get<double>();
    r.task = task_from_name(j.at("task").get<std::string>());
    if (j.contains("segments")) {
        std::size_t i = 0;
        for (const auto& e : j.at("segments")) {
            AnnSegment s;
            const std::string path = "segments[" + std::to_string(i) + "]";
            s.start = number_from_json(e.at("start"), path + ".start");
            s.end = number_from_json(e.at("end"), path + ".end");
            if (e.contains("text")) s.text = e.at("text").get<std::string>();
            r.segments.push_back(std::move(s));
            ++i;
        }
    }
    if (j.contains("saliency")) {
        const auto& sal = j.at("saliency");
        std::size_t i = 0;
        for (const auto& e : sal.at("times")) {
            r.sal_times.push_back(number_from_json(e, "saliency.times[" + std::to_string(i++) + "]"));
        }
        i = 0;
        for (const auto& e : sal.at("scores")) {
            r.sal_scores.push_back(number_from_json(e, "saliency.scores[" + std::to_string(i++) + "]"));
        }
    }
    if (j.contains("query")) r.query = j.at("query").get<std::string>();
    if (j.contains("source")) r.source = j.at("source").get<std::string>();
    return r;
}

namespace {

template <typename T, typename FromJson>
std::vector<T> read_jsonl(const std::string& path, const char* what, FromJson from) {
    std::ifstream is(path);
    if (!is) throw IoError(std::string("cannot open ") + what + " file: " + path);
    std::vector<T> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (trimmed(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError(path + ":" + std::to_string(lineno) + ": invalid JSON: " + e.what());
        }
        try {
            out.push_back(from(j));
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

template <typename T, typename ToJson>
void write_jsonl(const std::string& path, const std::vector<T>& records, const char* what, ToJson to) {
    std::ofstream os(path);
    if (!os) throw IoError(std::string("cannot open ") + what + " file for writing: " + path);
    for (const auto& r : records) os << to(r).dump() << "\n";
    if (!os) throw IoError(std::string("write failed for ") + what + " file: " + path);
}

}  // namespace

std::vector<AnnotationRecord> read_annotations(const std::string& path) {
    return read_jsonl<AnnotationRecord>(path, "annotation", annotation_from_json);
}

void write_annotations(const std::string& path, const std::vector<AnnotationRecord>& records) {
    write_jsonl(path, records, "annotation", annotation_to_json);
}

nlohmann::json instruction_to_json(const InstructionRecord& r) {
    nlohmann::json j;
    j["schema"] = kSchemaVersion;
    j["video"] = r.video;
    j["task"] = task_name(r.task);
    j["instruction"] = r.instruction;
    j["answer"] = r.answer;
    j["source"] = r.source;
    return j;
}

InstructionRecord instruction_from_json(const nlohmann::json& j) {
    check_schema(j, "instruction");
    InstructionRecord r;
    r.video = j.at("video").get<std::string>();
    r.task = task_from_name(j.at("task").get<std::string>());
    r.instruction = j.at("instruction").get<std::string>();
    r.answer = j.at("answer").get<std::string>();
    if (j.contains("source")) r.source = j.at("source").get<std::string>();
    return r;
}

std::vector<InstructionRecord> read_instructions(const std::string& path) {
    return read_jsonl<InstructionRecord>(path, "instruction", instruction_from_json);
}

void write_instructions(const std::string& path, const std::vector<InstructionRecord>& records) {
    write_jsonl(path, records, "instruction", instruction_to_json);
}

}  // namespace tvlm
