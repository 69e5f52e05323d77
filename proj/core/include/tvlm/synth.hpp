#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tvlm/frame_encoder.hpp"
#include "tvlm/instruct_data.hpp"
#include "tvlm/rng.hpp"

namespace tvlm {

// Frame timestamps at the centers of T equal bins: (i + 0.5) * duration / T.
// Strictly increasing, and never exactly 0 or duration.
std::vector<double> sample_frames(double duration, std::int64_t t);

struct SynthSpec {
    std::int64_t videos = 16;
    double min_duration = 16.0;
    double max_duration = 32.0;
    std::int64_t min_events = 2;
    std::int64_t max_events = 3;
    std::int64_t patterns = 16;  // size of the visual vocabulary
    std::int64_t frame_height = 28;
    std::int64_t frame_width = 28;
    std::vector<Task> tasks = {Task::dense_captioning, Task::grounding,        Task::summarization,
                               Task::highlight,        Task::step_localization, Task::transcribed_speech};
    std::uint64_t seed = 7;
    bool strict = false;  // reject overlapping events
};

// One ground-truth event: visual pattern `pattern` fills the frame during
// [start, end).
struct SynthEvent {
    int pattern = 0;
    double start = 0.0;
    double end = 0.0;
};

struct SynthVideo {
    std::string id;
    double duration = 0.0;
    bool decimal_times = false;  // whether annotation numbers carry a decimal
    std::vector<SynthEvent> events;
};

struct SynthCorpus {
    std::vector<SynthVideo> videos;
    std::vector<AnnotationRecord> annotations;
};

// Human-readable description of a visual pattern, stable across runs. Used as
// caption/query text so ground truth is exact by construction.
std::string pattern_description(int pattern);
std::string pattern_step_description(int pattern);

// Deterministic per seed: event layouts never overlap, annotations are
// emitted per enabled task in video order.
SynthCorpus synth_corpus(const SynthSpec& spec);

// Renders the frame visible at time t: background gray, or the active
// event's pattern (solid fill for even codes, horizontal stripes for odd).
Tensor render_frame(const SynthVideo& video, double t, std::int64_t height, std::int64_t width);

// T bin-center frames rendered into a clip.
VideoClip render_clip(const SynthVideo& video, std::int64_t frames, std::int64_t height, std::int64_t width);

// Raw frame-dump file: header of three little-endian u32 (T, H, W), body of
// T*H*W*3 little-endian float32, channels last.
void write_frames(const std::string& path, const VideoClip& clip);
VideoClip read_frames(const std::string& path, double duration);

// Directory layout written by the corpus generator:
//   clips/<id>.frames  one dump per video
//   clips/index.json   {"schema":1, "clips":[{video,file,duration,frames}]}
//   annotations.jsonl  normalized records
void write_corpus(const std::string& dir, const SynthCorpus& corpus, std::int64_t frames_per_clip,
                  std::int64_t frame_height = 28, std::int64_t frame_width = 28);

struct ClipIndexEntry {
    std::string video;
    std::string file;
    double duration = 0.0;
    std::int64_t frames = 0;
};

std::vector<ClipIndexEntry> read_clip_index(const std::string& dir);
// Loads every clip in the index keyed by video id.
std::map<std::string, VideoClip> load_clips(const std::string& dir);

}  // namespace tvlm
