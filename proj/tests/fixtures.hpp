#pragma once

// Loads a paraphrase fixture file and scores the parser against it. Each
// fixture carries model-style responses plus the numeric fields a correct
// parse must recover (compared at 1e-9).

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tvlm/errors.hpp"
#include "tvlm/response_parser.hpp"

namespace fixtures {

struct Outcome {
    int total = 0;
    int passed = 0;
    std::vector<std::string> failures;  // one line per failed case

    double pass_rate() const { return total == 0 ? 0.0 : static_cast<double>(passed) / total; }
};

inline bool close(double a, double b) { return std::abs(a - b) <= 1e-9; }

inline Outcome run_paraphrases(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw tvlm::IoError("cannot open fixture file: " + path);
    nlohmann::json j;
    is >> j;
    if (j.at("schema").get<int>() != 1) throw tvlm::SchemaError("fixture schema mismatch in " + path);

    const tvlm::Task task = tvlm::task_from_name(j.at("task").get<std::string>());
    std::optional<double> duration;
    if (j.contains("duration") && !j.at("duration").is_null()) duration = j.at("duration").get<double>();

    Outcome out;
    for (const auto& c : j.at("cases")) {
        ++out.total;
        const std::string text = c.at("text").get<std::string>();
        const auto parsed = tvlm::parse_response(task, text, duration);
        bool ok = true;
        std::string why;

        if (task == tvlm::Task::grounding) {
            if (!parsed.grounding) {
                ok = false;
                why = "no segment found";
            } else if (!close(parsed.grounding->start, c.at("start").get<double>()) ||
                       !close(parsed.grounding->end, c.at("end").get<double>())) {
                ok = false;
                why = "got " + std::to_string(parsed.grounding->start) + " - " +
                      std::to_string(parsed.grounding->end);
            }
        } else if (task == tvlm::Task::summarization || task == tvlm::Task::highlight) {
            const auto& times = c.at("times");
            const auto& scores = c.at("scores");
            if (parsed.saliency.size() != times.size()) {
                ok = false;
                why = "got " + std::to_string(parsed.saliency.size()) + " entries, want " +
                      std::to_string(times.size());
            } else {
                for (std::size_t i = 0; i < times.size(); ++i) {
                    if (!close(parsed.saliency.times[i], times[i].get<double>()) ||
                        !close(parsed.saliency.scores[i], scores[i].get<double>())) {
                        ok = false;
                        why = "entry " + std::to_string(i) + " drifted";
                        break;
                    }
                }
            }
        } else {
            const auto& segs = c.at("segments");
            if (parsed.segments.size() != segs.size()) {
                ok = false;
                why = "got " + std::to_string(parsed.segments.size()) + " segments, want " +
                      std::to_string(segs.size());
            } else {
                for (std::size_t i = 0; i < segs.size(); ++i) {
                    if (!close(parsed.segments[i].seg.start, segs[i][0].get<double>()) ||
                        !close(parsed.segments[i].seg.end, segs[i][1].get<double>())) {
                        ok = false;
                        why = "segment " + std::to_string(i) + " drifted";
                        break;
                    }
                }
            }
        }

        if (ok) {
            ++out.passed;
        } else {
            out.failures.push_back(path + " case " + std::to_string(out.total - 1) + ": " + why +
                                   " | text: " + text);
        }
    }
    return out;
}

}  // namespace fixtures
