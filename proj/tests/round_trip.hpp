#pragma once

// Random annotation records whose formatted answers must parse back with
// every numeric field intact. Values are drawn on a 0.1s grid (or whole
// seconds for integer-styled records) so the one-decimal rendering is
// lossless, and caption texts avoid digits so they cannot fake a time range.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "tvlm/instruct_data.hpp"
#include "tvlm/response_parser.hpp"
#include "tvlm/rng.hpp"

namespace round_trip {

inline std::string random_text(tvlm::Rng& rng) {
    static const char* kWords[] = {"pour", "water",  "glass", "open", "door",  "walk", "across", "room",
                                   "lift", "box",    "stir",  "pan",  "wipe",  "the",  "table",  "fold",
                                   "a",    "towel",  "slice", "an",   "apple", "tie",  "both",   "shoes"};
    const int n = 3 + static_cast<int>(rng.uniform_int(5));
    std::string out;
    for (int i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += kWords[rng.uniform_int(static_cast<std::int64_t>(std::size(kWords)))];
    }
    return out;
}

// value on the 0.1 grid in [lo, hi); decimal numbers render as "%.1f"
inline tvlm::Number random_number(tvlm::Rng& rng, double lo, double hi, bool decimal) {
    if (decimal) {
        const std::int64_t k = rng.uniform_int(static_cast<std::int64_t>((hi - lo) * 10.0));
        return tvlm::Number::with_decimal(std::round(lo * 10.0 + static_cast<double>(k)) / 10.0);
    }
    return tvlm::Number::integer(std::floor(lo) + static_cast<double>(rng.uniform_int(
                                                      std::max<std::int64_t>(1, static_cast<std::int64_t>(hi - lo)))));
}

inline tvlm::AnnotationRecord random_record(tvlm::Task task, tvlm::Rng& rng) {
    using tvlm::Number;
    tvlm::AnnotationRecord r;
    r.video = "video" + std::to_string(rng.uniform_int(100000));
    r.duration = static_cast<double>(40 + rng.uniform_int(160));
    r.task = task;
    const bool decimal = rng.uniform_int(2) == 0;

    const bool segment_task = task == tvlm::Task::dense_captioning || task == tvlm::Task::step_localization ||
                              task == tvlm::Task::transcribed_speech;
    if (segment_task || task == tvlm::Task::grounding) {
        const int n = task == tvlm::Task::grounding ? 1 : 1 + static_cast<int>(rng.uniform_int(4));
        double cursor = 0.0;
        for (int i = 0; i < n; ++i) {
            tvlm::AnnSegment seg;
            const double slack = (r.duration - cursor) / static_cast<double>(2 * (n - i));
            seg.start = random_number(rng, cursor, cursor + std::max(1.0, slack), decimal);
            // durations are whole seconds, so these clamps stay on the 0.1 grid
            if (seg.start.value > r.duration - 2.0) seg.start.value = r.duration - 2.0;
            seg.end = random_number(rng, seg.start.value + 1.0, seg.start.value + std::max(2.0, slack), decimal);
            if (seg.end.value > r.duration) seg.end.value = r.duration;
            if (!(seg.end.value > seg.start.value)) seg.end.value = seg.start.value + 1.0;
            cursor = seg.end.value;
            if (segment_task) seg.text = random_text(rng);
            r.segments.push_back(std::move(seg));
        }
        if (task == tvlm::Task::grounding) r.query = random_text(rng);
    } else {
        const int n = 1 + static_cast<int>(rng.uniform_int(8));
        std::set<std::int64_t> grid;
        const std::int64_t cells = decimal ? static_cast<std::int64_t>(r.duration * 10.0)
                                           : static_cast<std::int64_t>(r.duration);
        while (static_cast<int>(grid.size()) < n) grid.insert(rng.uniform_int(cells));
        for (std::int64_t k : grid) {
            r.sal_times.push_back(decimal ? Number::with_decimal(static_cast<double>(k) / 10.0)
                                          : Number::integer(static_cast<double>(k)));
            r.sal_scores.push_back(random_number(rng, 0.0, 5.0, true));
        }
        if (task == tvlm::Task::highlight) r.query = random_text(rng);
    }
    return r;
}

// parse(format(r)) must recover every numeric field bit-for-bit
inline bool survives(const tvlm::AnnotationRecord& r, std::string* why = nullptr) {
    const std::string text = tvlm::format_answer(r);
    const auto parsed = tvlm::parse_response(r.task, text, r.duration);
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg + " | answer: " + text;
        return false;
    };

    if (r.task == tvlm::Task::grounding) {
        if (!parsed.grounding) return fail("grounding segment missing");
        if (parsed.grounding->start != r.segments[0].start.value || parsed.grounding->end != r.segments[0].end.value) {
            return fail("grounding bounds drifted");
        }
        return true;
    }
    if (!r.segments.empty()) {
        if (parsed.segments.size() != r.segments.size()) return fail("segment count drifted");
        for (std::size_t i = 0; i < r.segments.size(); ++i) {
            if (parsed.segments[i].seg.start != r.segments[i].start.value ||
                parsed.segments[i].seg.end != r.segments[i].end.value) {
                return fail("segment " + std::to_string(i) + " bounds drifted");
            }
        }
        return true;
    }
    if (parsed.saliency.size() != r.sal_times.size()) return fail("saliency count drifted");
    for (std::size_t i = 0; i < r.sal_times.size(); ++i) {
        if (parsed.saliency.times[i] != r.sal_times[i].value || parsed.saliency.scores[i] != r.sal_scores[i].value) {
            return fail("saliency entry " + std::to_string(i) + " drifted");
        }
    }
    return true;
}

}  // namespace round_trip
