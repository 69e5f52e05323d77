#include "tvlm/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "tvlm/errors.hpp"

namespace tvlm {

double iou(const Segment& a, const Segment& b) {
    const double inter = std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
    const double uni = std::max(a.end, b.end) - std::min(a.start, b.start);
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

double recall_at_1(const std::vector<std::optional<Segment>>& preds, const std::vector<Segment>& gts, double mu) {
    if (gts.empty()) throw EmptyInputError("recall@1 over an empty query set is undefined");
    if (preds.size() != gts.size()) {
        throw ShapeError("recall@1: " + std::to_string(preds.size()) + " predictions vs " +
                         std::to_string(gts.size()) + " references");
    }
    std::int64_t hits = 0;
    for (std::size_t i = 0; i < gts.size(); ++i) {
        if (preds[i] && iou(*preds[i], gts[i]) >= mu) ++hits;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(gts.size());
}

std::vector<std::pair<std::size_t, std::size_t>> greedy_iou_match(const std::vector<Segment>& preds,
                                                                  const std::vector<Segment>& gts,
                                                                  double threshold) {
    struct Cand {
        double v;
        std::size_t p, g;
    };
    std::vector<Cand> cands;
    for (std::size_t p = 0; p < preds.size(); ++p) {
        for (std::size_t g = 0; g < gts.size(); ++g) {
            const double v = iou(preds[p], gts[g]);
            if (v >= threshold && v > 0.0) cands.push_back({v, p, g});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.v != b.v) return a.v > b.v;
        if (a.p != b.p) return a.p < b.p;
        return a.g < b.g;
    });
    std::vector<bool> p_used(preds.size()), g_used(gts.size());
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& c : cands) {
        if (p_used[c.p] || g_used[c.g]) continue;
        p_used[c.p] = g_used[c.g] = true;
        out.push_back({c.p, c.g});
    }
    return out;
}

double dvc_f1(const std::vector<std::vector<Segment>>& preds, const std::vector<std::vector<Segment>>& gts) {
    if (preds.size() != gts.size()) {
        throw ShapeError("f1: " + std::to_string(preds.size()) + " prediction lists vs " +
                         std::to_string(gts.size()) + " reference lists");
    }
    double p_sum = 0.0, r_sum = 0.0;
    for (double t : kF1Thresholds) {
        std::int64_t matched = 0, n_pred = 0, n_gt = 0;
        for (std::size_t v = 0; v < preds.size(); ++v) {
            matched += static_cast<std::int64_t>(greedy_iou_match(preds[v], gts[v], t).size());
            n_pred += static_cast<std::int64_t>(preds[v].size());
            n_gt += static_cast<std::int64_t>(gts[v].size());
        }
        p_sum += n_pred > 0 ? static_cast<double>(matched) / static_cast<double>(n_pred) : 0.0;
        r_sum += n_gt > 0 ? static_cast<double>(matched) / static_cast<double>(n_gt) : 0.0;
    }
    const std::size_t k = std::size(kF1Thresholds);
    const double p = p_sum / static_cast<double>(k);
    const double r = r_sum / static_cast<double>(k);
    if (p + r == 0.0) return 0.0;
    return 100.0 * 2.0 * p * r / (p + r);
}

std::vector<std::string> caption_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        const unsigned char u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

namespace {

constexpr int kMaxN = 4;

using Ngram = std::vector<std::string>;
using NgramCounts = std::map<Ngram, std::int64_t>;

std::vector<NgramCounts> count_ngrams(const std::vector<std::string>& tokens) {
    std::vector<NgramCounts> by_n(kMaxN);
    for (int n = 1; n <= kMaxN; ++n) {
        if (static_cast<int>(tokens.size()) < n) break;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            ++by_n[n - 1][Ngram(tokens.begin() + i, tokens.begin() + i + n)];
        }
    }
    return by_n;
}

}  // namespace

IdfStats build_idf(const std::vector<std::string>& references) {
    if (references.empty()) throw EmptyInputError("idf corpus is empty");
    IdfStats idf;
    idf.documents = static_cast<std::int64_t>(references.size());
    for (const auto& ref : references) {
        const auto by_n = count_ngrams(caption_tokens(ref));
        for (const auto& counts : by_n) {
            for (const auto& [gram, c] : counts) ++idf.doc_freq[gram];
        }
    }
    return idf;
}

double cider_pair(const std::string& candidate, const std::string& reference, const IdfStats& idf) {
    if (idf.documents <= 0) throw EmptyInputError("idf corpus is empty");
    const auto cand = count_ngrams(caption_tokens(candidate));
    const auto ref = count_ngrams(caption_tokens(reference));
    // document count is smoothed by one so an n-gram present in every
    // reference (or in the sole reference) still carries positive weight;
    // otherwise a single-reference corpus would zero out entirely
    const double log_docs = std::log(static_cast<double>(idf.documents) + 1.0);

    auto weight = [&](const Ngram& gram, std::int64_t count) {
        double df = 0.0;
        auto it = idf.doc_freq.find(gram);
        if (it != idf.doc_freq.end()) df = static_cast<double>(it->second);
        return static_cast<double>(count) * (log_docs - std::log(std::max(1.0, df)));
    };

    double total = 0.0;
    for (int n = 0; n < kMaxN; ++n) {
        double dot = 0.0, cand_sq = 0.0, ref_sq = 0.0;
        for (const auto& [gram, c] : cand[n]) {
            const double w = weight(gram, c);
            cand_sq += w * w;
        }
        for (const auto& [gram, c] : ref[n]) {
            const double w = weight(gram, c);
            ref_sq += w * w;
            auto it = cand[n].find(gram);
            if (it != cand[n].end()) {
                // clip the candidate count by the reference count
                dot += weight(gram, std::min(it->second, c)) * w;
            }
        }
        if (cand_sq > 0.0 && ref_sq > 0.0) total += dot / (std::sqrt(cand_sq) * std::sqrt(ref_sq));
    }
    return 10.0 * total / static_cast<double>(kMaxN);
}

double cider(const std::vector<std::string>& candidates, const std::vector<std::string>& references,
             const IdfStats& idf) {
    if (candidates.size() != references.size()) {
        throw ShapeError("cider: " + std::to_string(candidates.size()) + " candidates vs " +
                         std::to_string(references.size()) + " references");
    }
    if (candidates.empty()) throw EmptyInputError("cider over an empty pair set is undefined");
    double sum = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) sum += cider_pair(candidates[i], references[i], idf);
    return sum / static_cast<double>(candidates.size());
}

namespace {

std::vector<Segment> segments_of(const std::vector<TimedCaption>& caps) {
    std::vector<Segment> out;
    out.reserve(caps.size());
    for (const auto& c : caps) out.push_back(c.seg);
    return out;
}

IdfStats idf_from_references(const std::vector<std::vector<TimedCaption>>& gts) {
    std::vector<std::string> texts;
    for (const auto& video : gts) {
        for (const auto& cap : video) texts.push_back(cap.text);
    }
    if (texts.empty()) throw EmptyInputError("reference captions are empty");
    return build_idf(texts);
}

}  // namespace

double dvc_cider(const std::vector<std::vector<TimedCaption>>& preds,
                 const std::vector<std::vector<TimedCaption>>& gts) {
    if (preds.size() != gts.size()) {
        throw ShapeError("cider: " + std::to_string(preds.size()) + " prediction lists vs " +
                         std::to_string(gts.size()) + " reference lists");
    }
    const IdfStats idf = idf_from_references(gts);
    double total = 0.0;
    for (double t : kF1Thresholds) {
        double sum = 0.0;
        std::int64_t pairs = 0;
        for (std::size_t v = 0; v < preds.size(); ++v) {
            const auto matches = greedy_iou_match(segments_of(preds[v]), segments_of(gts[v]), t);
            for (const auto& [p, g] : matches) {
                sum += cider_pair(preds[v][p].text, gts[v][g].text, idf);
                ++pairs;
            }
        }
        if (pairs > 0) total += sum / static_cast<double>(pairs);
    }
    return total / static_cast<double>(std::size(kF1Thresholds));
}

double soda_c(const std::vector<std::vector<TimedCaption>>& preds,
              const std::vector<std::vector<TimedCaption>>& gts) {
    if (preds.size() != gts.size()) {
        throw ShapeError("soda: " + std::to_string(preds.size()) + " prediction lists vs " +
                         std::to_string(gts.size()) + " reference lists");
    }
    if (preds.empty()) throw EmptyInputError("soda over an empty video set is undefined");
    const IdfStats idf = idf_from_references(gts);

    double score_sum = 0.0;
    for (std::size_t v = 0; v < preds.size(); ++v) {
        std::vector<TimedCaption> p = preds[v], g = gts[v];
        auto by_start = [](const TimedCaption& a, const TimedCaption& b) { return a.seg.start < b.seg.start; };
        std::stable_sort(p.begin(), p.end(), by_start);
        std::stable_sort(g.begin(), g.end(), by_start);
        const std::size_t n = p.size(), m = g.size();
        if (n == 0 || m == 0) continue;  // precision or recall is 0 -> harmonic 0

        // order-preserving optimal matching over the sorted lists
        std::vector<std::vector<double>> dp(n + 1, std::vector<double>(m + 1, 0.0));
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 1; j <= m; ++j) {
                const double w = iou(p[i - 1].seg, g[j - 1].seg) * cider_pair(p[i - 1].text, g[j - 1].text, idf);
                dp[i][j] = std::max({dp[i - 1][j], dp[i][j - 1], dp[i - 1][j - 1] + w});
            }
        }
        const double total = dp[n][m];
        const double prec = total / static_cast<double>(n);
        const double rec = total / static_cast<double>(m);
        if (prec + rec > 0.0) score_sum += 2.0 * prec * rec / (prec + rec);
    }
    return 100.0 * score_sum / static_cast<double>(preds.size());
}

namespace {

double average_precision(const std::vector<ScoredMoment>& preds, const std::vector<Segment>& gts,
                         double threshold) {
    if (gts.empty()) throw EmptyInputError("average precision needs references");
    std::vector<std::size_t> order(preds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (preds[a].confidence != preds[b].confidence) return preds[a].confidence > preds[b].confidence;
        if (preds[a].seg.start != preds[b].seg.start) return preds[a].seg.start < preds[b].seg.start;
        return a < b;
    });

    std::vector<bool> g_used(gts.size());
    std::vector<bool> is_tp;
    is_tp.reserve(order.size());
    for (std::size_t idx : order) {
        double best = threshold;
        std::ptrdiff_t best_g = -1;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (g_used[g]) continue;
            const double v = iou(preds[idx].seg, gts[g]);
            if (v >= best && (best_g < 0 || v > best)) {
                best = v;
                best_g = static_cast<std::ptrdiff_t>(g);
            }
        }
        if (best_g >= 0) {
            g_used[static_cast<std::size_t>(best_g)] = true;
            is_tp.push_back(true);
        } else {
            is_tp.push_back(false);
        }
    }

    std::vector<double> precision, recall;
    std::int64_t tp = 0;
    for (std::size_t i = 0; i < is_tp.size(); ++i) {
        if (is_tp[i]) ++tp;
        precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(gts.size()));
    }

    // exact area under the monotone-interpolated curve
    double ap = 0.0, prev_recall = 0.0;
    for (std::size_t i = 0; i < precision.size(); ++i) {
        double p_interp = 0.0;
        for (std::size_t j = i; j < precision.size(); ++j) p_interp = std::max(p_interp, precision[j]);
        ap += (recall[i] - prev_recall) * p_interp;
        prev_recall = recall[i];
    }
    return ap;
}

}  // namespace

MapResult highlight_map(const std::vector<std::vector<ScoredMoment>>& preds,
                        const std::vector<std::vector<Segment>>& gts) {
    if (preds.size() != gts.size()) {
        throw ShapeError("map: " + std::to_string(preds.size()) + " prediction lists vs " +
                         std::to_string(gts.size()) + " reference lists");
    }
    MapResult out;
    double sum = 0.0;
    for (std::size_t q = 0; q < preds.size(); ++q) {
        if (gts[q].empty()) {
            ++out.zero_reference_queries;
            continue;
        }
        for (double t : kMapThresholds) sum += average_precision(preds[q], gts[q], t);
        ++out.queries_scored;
    }
    if (out.queries_scored == 0) throw EmptyInputError("no query has references; mAP is undefined");
    out.map = 100.0 * sum / (static_cast<double>(out.queries_scored) * static_cast<double>(std::size(kMapThresholds)));
    return out;
}

HitResult hit_at_1(const SaliencySeries& pred, const std::vector<std::pair<double, double>>& clip_scores,
                   double hit_threshold, double clip_length) {
    HitResult out;
    if (pred.empty()) return out;  // miss
    std::size_t best = 0;
    for (std::size_t i = 1; i < pred.size(); ++i) {
        if (pred.scores[i] > pred.scores[best]) best = i;  // ties keep the earliest time
    }
    const double t = pred.times[best];
    for (const auto& [t0, saliency] : clip_scores) {
        if (t >= t0 && t < t0 + clip_length) {
            out.hit = saliency >= hit_threshold;
            return out;
        }
    }
    out.out_of_range = true;
    return out;
}

}  // namespace tvlm
