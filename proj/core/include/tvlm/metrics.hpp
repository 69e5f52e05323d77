#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tvlm/response_parser.hpp"

namespace tvlm {

// Temporal intersection over union; 0 when both segments are degenerate.
double iou(const Segment& a, const Segment& b);

// Percentage of queries whose single prediction reaches IoU >= mu against its
// reference. A missing prediction counts as a miss. Empty query set is an
// error, not 0.
double recall_at_1(const std::vector<std::optional<Segment>>& preds, const std::vector<Segment>& gts, double mu);

inline constexpr double kF1Thresholds[] = {0.3, 0.5, 0.7, 0.9};

// One-to-one greedy matching by descending IoU within each video (ties broken
// by prediction then reference order). Returns matched (pred, gt) index pairs
// whose IoU clears `threshold`.
std::vector<std::pair<std::size_t, std::size_t>> greedy_iou_match(const std::vector<Segment>& preds,
                                                                  const std::vector<Segment>& gts,
                                                                  double threshold);

// Event-localization F1: per threshold in {0.3,0.5,0.7,0.9}, precision =
// matched / total predictions and recall = matched / total references pooled
// over videos; P and R are averaged over thresholds first, then combined as
// 2PR/(P+R) (0 when both are 0). Percentage.
double dvc_f1(const std::vector<std::vector<Segment>>& preds, const std::vector<std::vector<Segment>>& gts);

// Corpus statistics for the TF-IDF weighting: document frequency of every
// 1..4-gram over the reference set.
struct IdfStats {
    std::map<std::vector<std::string>, std::int64_t> doc_freq;
    std::int64_t documents = 0;
};

std::vector<std::string> caption_tokens(const std::string& text);
IdfStats build_idf(const std::vector<std::string>& references);

// Consensus captioning similarity on a 0..10 scale: for n = 1..4, n-gram
// vectors weighted by count * (log N - log max(1, df)), clipped cosine
// against the reference, averaged over n and scaled by 10. A caption scores
// 10 against itself when it has at least four tokens (shorter ones lack
// higher-order n-grams by construction). No length penalty.
double cider_pair(const std::string& candidate, const std::string& reference, const IdfStats& idf);

// Mean pair score over parallel candidate/reference lists.
double cider(const std::vector<std::string>& candidates, const std::vector<std::string>& references,
             const IdfStats& idf);

// Caption quality restricted to localization-matched pairs: at each IoU
// threshold the greedy matching above pairs captions, the pair scores are
// averaged (empty pair set contributes 0), and the four thresholds are
// averaged. IDF comes from all reference captions.
double dvc_cider(const std::vector<std::vector<TimedCaption>>& preds,
                 const std::vector<std::vector<TimedCaption>>& gts);

// Story-level score: per video, an order-preserving one-to-one matching
// (dynamic program over the two start-time-ordered lists) maximizes the sum
// of iou * cider_pair over matched pairs. Precision divides by the
// prediction count, recall by the reference count, combined harmonically and
// averaged over videos, x100. The scale follows the pair similarity: a
// prediction list identical to its references scores 10 per video before the
// x100, so the identity ceiling is 1000.
double soda_c(const std::vector<std::vector<TimedCaption>>& preds,
              const std::vector<std::vector<TimedCaption>>& gts);

struct ScoredMoment {
    Segment seg;
    double confidence = 0.0;
};

inline constexpr double kMapThresholds[] = {0.5, 0.75};

struct MapResult {
    double map = 0.0;  // percentage over queries and thresholds
    std::int64_t queries_scored = 0;
    std::int64_t zero_reference_queries = 0;  // excluded, reported
};

// Average precision per query and IoU threshold: predictions sorted by
// confidence (ties -> earlier start), each greedily matched to the
// highest-IoU unmatched reference above the threshold; AP is the exact area
// under the monotone-interpolated precision-recall curve.
MapResult highlight_map(const std::vector<std::vector<ScoredMoment>>& preds,
                        const std::vector<std::vector<Segment>>& gts);

struct HitResult {
    bool hit = false;
    bool out_of_range = false;  // top moment fell outside every annotated clip
};

// Top-scored predicted time (ties -> earliest) lands in a ground-truth clip
// [t0, t0 + clip_length) with saliency >= hit_threshold (inclusive).
HitResult hit_at_1(const SaliencySeries& pred, const std::vector<std::pair<double, double>>& clip_scores,
                   double hit_threshold, double clip_length);

}  // namespace tvlm
