#include "tvlm/response_parser.hpp"

#include <algorithm>
#include <map>
#include <regex>

#include "tvlm/errors.hpp"

namespace tvlm {

namespace {

// plain number or clock notation; kept as one token for normalize_time
const char* kTimeToken = R"((?:\d+:\d{1,2}(?::\d{1,2}(?:\.\d+)?)?|\d+(?:\.\d+)?))";

double clock_to_seconds(const std::string& s) {
    double parts[3] = {0, 0, 0};
    int n = 0;
    std::size_t begin = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == ':') {
            parts[n++] = std::stod(s.substr(begin, i - begin));
            begin = i + 1;
            if (n == 3) break;
        }
    }
    if (n == 2) return parts[0] * 60.0 + parts[1];
    return parts[0] * 3600.0 + parts[1] * 60.0 + parts[2];
}

}  // namespace

double normalize_time(const std::string& token) {
    static const std::regex clock(R"(^\s*(\d+:\d{1,2}(?::\d{1,2}(?:\.\d+)?)?)\s*$)");
    static const std::regex plain(R"(^\s*(\d+(?:\.\d+)?)\s*(?:s\b|secs?\b|seconds?\b)?\s*\.?\s*$)");
    std::smatch m;
    if (std::regex_match(token, m, clock)) return clock_to_seconds(m[1].str());
    if (std::regex_match(token, m, plain)) return std::stod(m[1].str());
    throw TimeParseError("cannot parse time token '" + token + "'");
}

namespace {

struct RangeHit {
    std::size_t begin, end;  // byte span of the matched range pattern
    double t1, t2;
};

std::vector<RangeHit> find_ranges(const std::string& text) {
    // alternation order matters: "from x to y" must win over the bare
    // "x to y" rule that would start later inside it
    static const std::regex pattern(
        std::string() +
        R"((?:\bfrom\s+()" + kTimeToken + R"()\s+to\s+()" + kTimeToken + "))" +
        R"(|()" + kTimeToken + R"()\s*-\s*()" + kTimeToken + R"())" +
        R"(|()" + kTimeToken + R"()s?\s+to\s+()" + kTimeToken + R"()s?)");
    std::vector<RangeHit> out;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), pattern); it != std::sregex_iterator(); ++it) {
        const std::smatch& m = *it;
        std::string a, b;
        if (m[1].matched) {
            a = m[1].str();
            b = m[2].str();
        } else if (m[3].matched) {
            a = m[3].str();
            b = m[4].str();
        } else {
            a = m[5].str();
            b = m[6].str();
        }
        RangeHit hit;
        hit.begin = static_cast<std::size_t>(m.position(0));
        hit.end = hit.begin + static_cast<std::size_t>(m.length(0));
        try {
            hit.t1 = normalize_time(a);
            hit.t2 = normalize_time(b);
        } catch (const TimeParseError&) {
            continue;  // token matched the shape but not the value rules
        }
        out.push_back(hit);
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    const auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

// consume an optional unit word and list punctuation after a range match
std::size_t skip_unit(const std::string& text, std::size_t pos) {
    static const std::regex unit(R"(^\s*(?:seconds?|secs?|s\b)?\s*[,:]?\s*)");
    std::smatch m;
    const std::string rest = text.substr(pos);
    if (std::regex_search(rest, m, unit) && m.position(0) == 0) return pos + static_cast<std::size_t>(m.length(0));
    return pos;
}

}  // namespace

std::vector<TimedCaption> parse_segments(const std::string& text, std::optional<double> duration) {
    const std::vector<RangeHit> hits = find_ranges(text);
    std::vector<TimedCaption> out;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        double a = hits[i].t1, b = hits[i].t2;
        if (duration) {
            a = std::clamp(a, 0.0, *duration);
            b = std::clamp(b, 0.0, *duration);
        }
        if (!(b > a)) continue;  // inverted or empty after clamping

        const std::size_t desc_begin = skip_unit(text, hits[i].end);
        const std::size_t desc_end = (i + 1 < hits.size()) ? hits[i + 1].begin : text.size();
        std::string desc = desc_begin < desc_end ? trim(text.substr(desc_begin, desc_end - desc_begin)) : "";
        if (!desc.empty() && desc.back() == '.') desc.pop_back();
        out.push_back({{a, b}, trim(desc)});
    }
    return out;
}

std::optional<Segment> parse_grounding(const std::string& text, std::optional<double> duration) {
    const auto anchor = text.find("happens in");
    if (anchor != std::string::npos) {
        auto segs = parse_segments(text.substr(anchor), duration);
        if (!segs.empty()) return segs.front().seg;
    }
    auto segs = parse_segments(text, duration);
    if (!segs.empty()) return segs.front().seg;
    return std::nullopt;
}

namespace {

std::vector<double> numbers_in(const std::string& text, std::size_t begin, std::size_t end,
                               bool drop_counts = false) {
    static const std::regex num(R"(\d+(?:\.\d+)?)");
    std::vector<double> out;
    const std::string region = text.substr(begin, end - begin);
    for (auto it = std::sregex_iterator(region.begin(), region.end(), num); it != std::sregex_iterator(); ++it) {
        if (drop_counts) {
            // a count like "16 highlight moments" is not a timestamp
            static const std::regex highlight_after(R"(^\s*highlight)");
            const std::string after = region.substr(static_cast<std::size_t>(it->position(0) + it->length(0)));
            if (std::regex_search(after, highlight_after)) continue;
        }
        out.push_back(std::stod(it->str()));
    }
    return out;
}

}  // namespace

SaliencySeries parse_saliency(const std::string& text) {
    SaliencySeries out;
    static const std::regex scores_phrase(R"(scores?\s+are)");
    std::smatch sm;
    if (!std::regex_search(text, sm, scores_phrase)) return out;
    const std::size_t scores_begin = static_cast<std::size_t>(sm.position(0));
    const std::size_t scores_end = scores_begin + static_cast<std::size_t>(sm.length(0));

    std::size_t t_begin = 0;
    const auto in_the = text.find("in the");
    if (in_the != std::string::npos && in_the < scores_begin) t_begin = in_the + 6;
    std::size_t t_end = scores_begin;
    static const std::regex second_word(R"(\bseconds?\b)");
    std::smatch secm;
    const std::string times_region = text.substr(t_begin, scores_begin - t_begin);
    if (std::regex_search(times_region, secm, second_word)) {
        t_end = t_begin + static_cast<std::size_t>(secm.position(0));
    }

    std::vector<double> times = numbers_in(text, t_begin, t_end, /*drop_counts=*/true);
    std::vector<double> scores = numbers_in(text, scores_end, text.size());
    if (times.empty() || scores.empty()) return out;

    const std::size_t n = std::min(times.size(), scores.size());
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    // duplicate times keep the max score
    std::map<double, double> keep;
    for (std::size_t i : order) {
        auto [it, fresh] = keep.emplace(times[i], scores[i]);
        if (!fresh) it->second = std::max(it->second, scores[i]);
    }
    for (const auto& [t, s] : keep) {
        out.times.push_back(t);
        out.scores.push_back(s);
    }
    return out;
}

bool ParsedPrediction::missed() const {
    switch (task) {
        case Task::grounding: return !grounding.has_value();
        case Task::summarization:
        case Task::highlight: return saliency.empty();
        default: return segments.empty();
    }
}

ParsedPrediction parse_response(Task task, const std::string& text, std::optional<double> duration) {
    ParsedPrediction p;
    p.task = task;
    switch (task) {
        case Task::grounding: p.grounding = parse_grounding(text, duration); break;
        case Task::summarization:
        case Task::highlight: p.saliency = parse_saliency(text); break;
        default: p.segments = parse_segments(text, duration); break;
    }
    return p;
}

}  // namespace tvlm
