#include "tvlm/synth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tvlm/errors.hpp"

namespace tvlm {

namespace {

constexpr const char* kColors[8] = {"red", "green", "blue", "yellow", "purple", "orange", "teal", "pink"};
constexpr double kColorRgb[8][3] = {
    {0.90, 0.10, 0.10}, {0.10, 0.80, 0.10}, {0.10, 0.20, 0.90}, {0.90, 0.90, 0.10},
    {0.60, 0.10, 0.80}, {0.95, 0.55, 0.10}, {0.10, 0.80, 0.80}, {0.95, 0.50, 0.70},
};
constexpr double kBackground = 0.1;
constexpr int kMaxPatterns = 16;  // 8 colors x {solid, striped}

const char* pattern_color(int pattern) { return kColors[(pattern / 2) % 8]; }
bool pattern_striped(int pattern) { return pattern % 2 == 1; }
const char* pattern_style(int pattern) { return pattern_striped(pattern) ? "striped" : "solid"; }

void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

void put_f32(std::ostream& os, float v) { put_u32(os, std::bit_cast<std::uint32_t>(v)); }
float get_f32(std::istream& is) { return std::bit_cast<float>(get_u32(is)); }

}  // namespace

std::vector<double> sample_frames(double duration, std::int64_t t) {
    if (t < 1) throw DomainError("frame count must be >= 1");
    if (!(duration > 0.0)) throw DomainError("duration must be positive");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(t));
    for (std::int64_t i = 0; i < t; ++i) {
        out.push_back((static_cast<double>(i) + 0.5) * duration / static_cast<double>(t));
    }
    return out;
}

std::string pattern_description(int pattern) {
    return std::string("a ") + pattern_color(pattern) + " " + pattern_style(pattern) + " panel fills the screen";
}

std::string pattern_step_description(int pattern) {
    return std::string("begin to display the ") + pattern_color(pattern) + " " + pattern_style(pattern) + " panel";
}

namespace {

Number grid_number(double v, bool decimal) {
    return decimal ? Number::with_decimal(v) : Number::integer(v);
}

}  // namespace

SynthCorpus synth_corpus(const SynthSpec& spec) {
    if (spec.videos < 1) throw ConfigError("need at least one video");
    if (spec.patterns < 1 || spec.patterns > kMaxPatterns) {
        throw ConfigError("patterns must be in [1, " + std::to_string(kMaxPatterns) + "], got " +
                          std::to_string(spec.patterns));
    }
    if (spec.min_events < 1 || spec.max_events < spec.min_events) throw ConfigError("bad event count range");
    if (spec.max_events > spec.patterns) {
        throw ConfigError("max events " + std::to_string(spec.max_events) + " exceeds distinct patterns " +
                          std::to_string(spec.patterns));
    }
    if (!(spec.min_duration > 0.0) || spec.max_duration < spec.min_duration) {
        throw ConfigError("bad duration range");
    }

    Rng rng(spec.seed);

    // Each video gets a signature pattern from a shuffled global order, cycling
    // when videos outnumber patterns.  Grounding queries target the signature
    // event, so query text stays unique across the corpus whenever it can be.
    std::vector<int> signature_order(static_cast<std::size_t>(spec.patterns));
    for (std::size_t i = 0; i < signature_order.size(); ++i) signature_order[i] = static_cast<int>(i);
    for (std::size_t i = 0; i + 1 < signature_order.size(); ++i) {
        std::swap(signature_order[i],
                  signature_order[static_cast<std::size_t>(
                      i + rng.uniform_int(static_cast<std::int64_t>(signature_order.size() - i)))]);
    }

    SynthCorpus out;
    for (std::int64_t v = 0; v < spec.videos; ++v) {
        const int signature = signature_order[static_cast<std::size_t>(v % spec.patterns)];
        SynthVideo video;
        video.id = "video" + std::to_string(v);
        video.decimal_times = v % 2 == 1;  // alternate the written number style
        const std::int64_t dur_lo = static_cast<std::int64_t>(std::ceil(spec.min_duration));
        const std::int64_t dur_hi = static_cast<std::int64_t>(std::floor(spec.max_duration));
        video.duration = static_cast<double>(dur_lo + rng.uniform_int(std::max<std::int64_t>(1, dur_hi - dur_lo + 1)));

        const std::int64_t n_events = spec.min_events + rng.uniform_int(spec.max_events - spec.min_events + 1);

        // distinct patterns per video so caption text identifies one segment
        std::vector<int> palette(static_cast<std::size_t>(spec.patterns));
        for (std::size_t i = 0; i < palette.size(); ++i) palette[i] = static_cast<int>(i);
        for (std::size_t i = 0; i + 1 < palette.size(); ++i) {
            std::swap(palette[i], palette[static_cast<std::size_t>(i + rng.uniform_int(
                                              static_cast<std::int64_t>(palette.size() - i)))]);
        }
        // make sure the signature pattern lands on one of the n_events slots
        const auto sig_at = static_cast<std::size_t>(
            std::find(palette.begin(), palette.end(), signature) - palette.begin());
        if (sig_at >= static_cast<std::size_t>(n_events)) {
            std::swap(palette[static_cast<std::size_t>(rng.uniform_int(n_events))], palette[sig_at]);
        }

        // one event per equal slot, shrunk from both ends on a half-second
        // grid so events never touch
        const double slot = video.duration / static_cast<double>(n_events);
        for (std::int64_t e = 0; e < n_events; ++e) {
            const double slot_begin = slot * static_cast<double>(e);
            const double slot_end = slot * static_cast<double>(e + 1);
            const double grid = video.decimal_times ? 0.5 : 1.0;
            double start = std::ceil(slot_begin / grid) * grid + grid * static_cast<double>(rng.uniform_int(2));
            double end = std::floor(slot_end / grid) * grid - grid * static_cast<double>(rng.uniform_int(2));
            if (end - start < grid) {  // degenerate slot; take the whole slot on grid
                start = std::ceil(slot_begin / grid) * grid;
                end = std::max(start + grid, std::floor(slot_end / grid) * grid);
            }
            end = std::min(end, video.duration);
            SynthEvent ev;
            ev.pattern = palette[static_cast<std::size_t>(e)];
            ev.start = start;
            ev.end = end;
            video.events.push_back(ev);
        }
        if (spec.strict) {
            for (std::size_t e = 1; e < video.events.size(); ++e) {
                if (video.events[e].start < video.events[e - 1].end) {
                    throw DomainError("overlapping events in strict mode for " + video.id);
                }
            }
        }

        const bool dec = video.decimal_times;
        for (Task task : spec.tasks) {
            AnnotationRecord r;
            r.video = video.id;
            r.duration = video.duration;
            r.task = task;
            r.source = "synth";
            switch (task) {
                case Task::dense_captioning:
                case Task::step_localization:
                case Task::transcribed_speech:
                    for (const auto& ev : video.events) {
                        AnnSegment s;
                        s.start = grid_number(ev.start, dec);
                        s.end = grid_number(ev.end, dec);
                        if (task == Task::dense_captioning) {
                            s.text = pattern_description(ev.pattern);
                        } else if (task == Task::step_localization) {
                            s.text = pattern_step_description(ev.pattern);
                        } else {
                            s.text = "the narrator points out " + pattern_description(ev.pattern).substr(2);
                        }
                        r.segments.push_back(std::move(s));
                    }
                    break;
                case Task::grounding: {
                    const auto ev_it = std::find_if(video.events.begin(), video.events.end(),
                                                    [&](const SynthEvent& e) { return e.pattern == signature; });
                    const auto& ev = *ev_it;
                    AnnSegment s;
                    s.start = grid_number(ev.start, dec);
                    s.end = grid_number(ev.end, dec);
                    r.segments.push_back(std::move(s));
                    r.query = pattern_description(ev.pattern);
                    break;
                }
                case Task::summarization:
                case Task::highlight: {
                    int best_pattern = video.events.front().pattern;
                    double best_score = -1.0;
                    for (const auto& ev : video.events) {
                        const double mid = 0.5 * (ev.start + ev.end);
                        const double t = dec ? std::round(mid * 2.0) / 2.0 : std::round(mid);
                        // scores on a 1.0..5.0 scale with one decimal
                        const double score = 1.0 + 0.1 * static_cast<double>(rng.uniform_int(41));
                        r.sal_times.push_back(grid_number(t, dec));
                        r.sal_scores.push_back(Number::with_decimal(score));
                        if (score > best_score) {
                            best_score = score;
                            best_pattern = ev.pattern;
                        }
                    }
                    if (task == Task::highlight) r.query = pattern_description(best_pattern);
                    break;
                }
            }
            r.validate();
            out.annotations.push_back(std::move(r));
        }
        out.videos.push_back(std::move(video));
    }
    return out;
}

Tensor render_frame(const SynthVideo& video, double t, std::int64_t height, std::int64_t width) {
    Tensor frame({height, width, 3});
    frame.fill(kBackground);
    const SynthEvent* active = nullptr;
    for (const auto& ev : video.events) {
        if (t >= ev.start && t < ev.end) {
            active = &ev;
            break;
        }
    }
    if (!active) return frame;
    const double* rgb = kColorRgb[(active->pattern / 2) % 8];
    const bool striped = pattern_striped(active->pattern);
    for (std::int64_t r = 0; r < height; ++r) {
        if (striped && (r / 2) % 2 == 1) continue;  // stripe gap keeps background
        for (std::int64_t c = 0; c < width; ++c) {
            double* px = frame.data() + (r * width + c) * 3;
            px[0] = rgb[0];
            px[1] = rgb[1];
            px[2] = rgb[2];
        }
    }
    return frame;
}

VideoClip render_clip(const SynthVideo& video, std::int64_t frames, std::int64_t height, std::int64_t width) {
    VideoClip clip;
    clip.duration = video.duration;
    clip.timestamps = sample_frames(video.duration, frames);
    clip.frames.reserve(clip.timestamps.size());
    for (double t : clip.timestamps) clip.frames.push_back(render_frame(video, t, height, width));
    return clip;
}

void write_frames(const std::string& path, const VideoClip& clip) {
    clip.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open frame dump for writing: " + path);
    const std::int64_t t = clip.frame_count();
    const std::int64_t h = clip.frames[0].dim(0), w = clip.frames[0].dim(1);
    put_u32(os, static_cast<std::uint32_t>(t));
    put_u32(os, static_cast<std::uint32_t>(h));
    put_u32(os, static_cast<std::uint32_t>(w));
    for (const auto& f : clip.frames) {
        if (f.dim(0) != h || f.dim(1) != w) throw ShapeError("ragged frame sizes in clip");
        for (double v : f.values()) put_f32(os, static_cast<float>(v));
    }
    if (!os) throw IoError("write failed for frame dump: " + path);
}

VideoClip read_frames(const std::string& path, double duration) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open frame dump: " + path);
    const std::int64_t t = get_u32(is);
    const std::int64_t h = get_u32(is);
    const std::int64_t w = get_u32(is);
    if (!is || t < 1 || h < 1 || w < 1) throw IoError("bad frame dump header: " + path);
    VideoClip clip;
    clip.duration = duration;
    clip.timestamps = sample_frames(duration, t);
    for (std::int64_t i = 0; i < t; ++i) {
        Tensor f({h, w, 3});
        for (auto& v : f.values()) v = static_cast<double>(get_f32(is));
        if (!is) throw IoError("truncated frame dump: " + path);
        clip.frames.push_back(std::move(f));
    }
    return clip;
}

void write_corpus(const std::string& dir, const SynthCorpus& corpus, std::int64_t frames_per_clip,
                  std::int64_t frame_height, std::int64_t frame_width) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    fs::create_directories(root / "clips");

    nlohmann::json index;
    index["schema"] = 1;
    index["clips"] = nlohmann::json::array();
    for (const auto& video : corpus.videos) {
        const std::string file = "clips/" + video.id + ".frames";
        const VideoClip clip = render_clip(video, frames_per_clip, frame_height, frame_width);
        write_frames((root / file).string(), clip);
        index["clips"].push_back({{"video", video.id},
                                  {"file", file},
                                  {"duration", video.duration},
                                  {"frames", frames_per_clip}});
    }
    std::ofstream os(root / "clips" / "index.json");
    if (!os) throw IoError("cannot write clip index in " + dir);
    os << index.dump(2) << "\n";

    write_annotations((root / "annotations.jsonl").string(), corpus.annotations);
}

std::vector<ClipIndexEntry> read_clip_index(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path path = fs::path(dir) / "clips" / "index.json";
    std::ifstream is(path);
    if (!is) throw IoError("cannot open clip index: " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("clip index is not valid JSON: " + std::string(e.what()));
    }
    if (!j.contains("schema") || !j.at("schema").is_number_integer() || j.at("schema").get<int>() != 1) {
        throw SchemaError("clip index schema mismatch: expected 1, found " +
                          (j.contains("schema") ? j.at("schema").dump() : std::string("nothing")));
    }
    std::vector<ClipIndexEntry> out;
    for (const auto& e : j.at("clips")) {
        out.push_back({e.at("video").get<std::string>(), e.at("file").get<std::string>(),
                       e.at("duration").get<double>(), e.at("frames").get<std::int64_t>()});
    }
    return out;
}

std::map<std::string, VideoClip> load_clips(const std::string& dir) {
    namespace fs = std::filesystem;
    std::map<std::string, VideoClip> out;
    for (const auto& e : read_clip_index(dir)) {
        out.emplace(e.video, read_frames((fs::path(dir) / e.file).string(), e.duration));
    }
    return out;
}

}  // namespace tvlm
