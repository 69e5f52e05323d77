#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tvlm/instruct_data.hpp"

namespace tvlm {

struct Segment {
    double start = 0.0;
    double end = 0.0;
    double length() const { return end - start; }
};

struct TimedCaption {
    Segment seg;
    std::string text;
};

struct SaliencySeries {
    std::vector<double> times;
    std::vector<double> scores;
    bool empty() const { return times.empty(); }
    std::size_t size() const { return times.size(); }
};

// Accepts "90", "90.0", "90s", "90 seconds", "1:30" (90.0) and
// "01:02:03" (3723.0). Anything else (word numerals included) raises
// TimeParseError; callers decide whether to skip the token.
double normalize_time(const std::string& token);

// Scans free-form text for the rule set
//   "{t1} - {t2} seconds, {description}"
//   "from {t1} to {t2} [seconds]"
//   "{t1}s to {t2}s"
// in textual order. Times are clamped to [0, duration] when a duration is
// given; segments that are empty or inverted after clamping are dropped.
// Unparseable text yields an empty list, never an error.
std::vector<TimedCaption> parse_segments(const std::string& text, std::optional<double> duration = std::nullopt);

// First segment found; when the text contains "happens in", the scan starts
// there (models front-load the committed answer). No segment -> nullopt,
// which metrics score as a miss.
std::optional<Segment> parse_grounding(const std::string& text, std::optional<double> duration = std::nullopt);

// Extracts the timestamp list (numbers after "in the", stopping at
// "second(s)" or at the score phrase; a count like "16 highlight moments" is
// excluded) and the score list (numbers after "scores are"). Pairs by
// position, truncating to the shorter list; sorts by time and keeps the max
// score for duplicate times. Either list missing -> empty series.
SaliencySeries parse_saliency(const std::string& text);

// Task-dispatched parse used by the CLI and the evaluator.
struct ParsedPrediction {
    Task task = Task::dense_captioning;
    std::optional<Segment> grounding;      // grounding
    std::vector<TimedCaption> segments;    // dense captioning / steps / speech
    SaliencySeries saliency;               // summarization / highlight
    bool missed() const;
};

ParsedPrediction parse_response(Task task, const std::string& text,
                                std::optional<double> duration = std::nullopt);

}  // namespace tvlm
