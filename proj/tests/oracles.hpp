#pragma once

// Reference implementations used only by tests. Each one recomputes a library
// result through a structurally different algorithm (direct definition,
// exhaustive search, or a different recurrence) so shared bugs are unlikely.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tvlm/metrics.hpp"
#include "tvlm/tensor.hpp"

namespace oracle {

// Plain triple-loop matrix product, no blocking, no transpose variants.
inline tvlm::Tensor matmul(const tvlm::Tensor& a, const tvlm::Tensor& b) {
    const std::int64_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
    tvlm::Tensor out({n, m});
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (std::int64_t p = 0; p < k; ++p) acc += a.at2(i, p) * b.at2(p, j);
            out.at2(i, j) = acc;
        }
    }
    return out;
}

// Softmax of one row straight from the definition (max-subtracted).
inline std::vector<double> softmax_row(const std::vector<double>& x) {
    const double mx = *std::max_element(x.begin(), x.end());
    std::vector<double> out(x.size());
    double z = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) z += (out[i] = std::exp(x[i] - mx));
    for (double& v : out) v /= z;
    return out;
}

// Mean NLL over masked rows via an explicit log-sum-exp per row.
inline double masked_mean_nll(const tvlm::Tensor& logits, const std::vector<int>& targets,
                              const std::vector<bool>& mask) {
    const std::int64_t rows = logits.dim(0), vocab = logits.dim(1);
    double total = 0.0;
    std::int64_t used = 0;
    for (std::int64_t r = 0; r < rows; ++r) {
        if (!mask[static_cast<std::size_t>(r)]) continue;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::int64_t v = 0; v < vocab; ++v) mx = std::max(mx, logits.at2(r, v));
        double z = 0.0;
        for (std::int64_t v = 0; v < vocab; ++v) z += std::exp(logits.at2(r, v) - mx);
        const double logp = logits.at2(r, targets[static_cast<std::size_t>(r)]) - mx - std::log(z);
        total -= logp;
        ++used;
    }
    return total / static_cast<double>(used);
}

// One-to-one greedy matching by repeated global-maximum scan (no sort).
// Same tie rules as the library: higher IoU, then lower pred, then lower gt.
inline std::vector<std::pair<std::size_t, std::size_t>> greedy_match(const std::vector<tvlm::Segment>& preds,
                                                                     const std::vector<tvlm::Segment>& gts,
                                                                     double threshold) {
    std::vector<bool> p_used(preds.size()), g_used(gts.size());
    std::vector<std::pair<std::size_t, std::size_t>> out;
    while (true) {
        double best = -1.0;
        std::size_t bp = 0, bg = 0;
        bool found = false;
        for (std::size_t p = 0; p < preds.size(); ++p) {
            if (p_used[p]) continue;
            for (std::size_t g = 0; g < gts.size(); ++g) {
                if (g_used[g]) continue;
                const double v = tvlm::iou(preds[p], gts[g]);
                if (v >= threshold && v > 0.0 && v > best) {
                    best = v;
                    bp = p;
                    bg = g;
                    found = true;
                }
            }
        }
        if (!found) break;
        p_used[bp] = g_used[bg] = true;
        out.push_back({bp, bg});
    }
    std::sort(out.begin(), out.end());
    return out;
}

// F1 from oracle matching, mirroring the library's averaging order
// (precision/recall pooled per threshold, averaged, then harmonic).
inline double dvc_f1(const std::vector<std::vector<tvlm::Segment>>& preds,
                     const std::vector<std::vector<tvlm::Segment>>& gts) {
    double p_sum = 0.0, r_sum = 0.0;
    for (double t : tvlm::kF1Thresholds) {
        std::int64_t matched = 0, n_pred = 0, n_gt = 0;
        for (std::size_t v = 0; v < preds.size(); ++v) {
            matched += static_cast<std::int64_t>(greedy_match(preds[v], gts[v], t).size());
            n_pred += static_cast<std::int64_t>(preds[v].size());
            n_gt += static_cast<std::int64_t>(gts[v].size());
        }
        p_sum += n_pred > 0 ? static_cast<double>(matched) / static_cast<double>(n_pred) : 0.0;
        r_sum += n_gt > 0 ? static_cast<double>(matched) / static_cast<double>(n_gt) : 0.0;
    }
    const double p = p_sum / 4.0;
    const double r = r_sum / 4.0;
    if (p + r == 0.0) return 0.0;
    return 100.0 * 2.0 * p * r / (p + r);
}

// Best order-preserving matching by exhaustive recursion over both lists
// (feasible for the <= 4x4 instances used in tests). Sums are folded
// left-to-right in prediction order, the same association order as the
// library's dynamic program, so optimal totals agree bitwise.
inline double best_monotone_total(const std::vector<std::vector<double>>& w, std::size_t i, std::size_t j,
                                  double acc) {
    if (i == w.size() || j == w[0].size()) return acc;
    double best = best_monotone_total(w, i + 1, j, acc);          // skip prediction i
    best = std::max(best, best_monotone_total(w, i, j + 1, acc)); // skip reference j
    best = std::max(best, best_monotone_total(w, i + 1, j + 1, acc + w[i][j]));
    return best;
}

// Story-level score recomputed with the exhaustive matcher; pair weights and
// the final combination reuse the library's building blocks.
inline double soda_c(const std::vector<std::vector<tvlm::TimedCaption>>& preds,
                     const std::vector<std::vector<tvlm::TimedCaption>>& gts) {
    std::vector<std::string> texts;
    for (const auto& video : gts) {
        for (const auto& cap : video) texts.push_back(cap.text);
    }
    const tvlm::IdfStats idf = tvlm::build_idf(texts);

    double score_sum = 0.0;
    for (std::size_t v = 0; v < preds.size(); ++v) {
        std::vector<tvlm::TimedCaption> p = preds[v], g = gts[v];
        auto by_start = [](const tvlm::TimedCaption& a, const tvlm::TimedCaption& b) {
            return a.seg.start < b.seg.start;
        };
        std::stable_sort(p.begin(), p.end(), by_start);
        std::stable_sort(g.begin(), g.end(), by_start);
        if (p.empty() || g.empty()) continue;
        std::vector<std::vector<double>> w(p.size(), std::vector<double>(g.size()));
        for (std::size_t i = 0; i < p.size(); ++i) {
            for (std::size_t j = 0; j < g.size(); ++j) {
                w[i][j] = tvlm::iou(p[i].seg, g[j].seg) * tvlm::cider_pair(p[i].text, g[j].text, idf);
            }
        }
        const double total = best_monotone_total(w, 0, 0, 0.0);
        const double prec = total / static_cast<double>(p.size());
        const double rec = total / static_cast<double>(g.size());
        if (prec + rec > 0.0) score_sum += 2.0 * prec * rec / (prec + rec);
    }
    return 100.0 * score_sum / static_cast<double>(preds.size());
}

// Average precision recomputed with a right-to-left interpolated-precision
// suffix pass instead of the library's per-point rescan.
inline double average_precision(const std::vector<tvlm::ScoredMoment>& preds, const std::vector<tvlm::Segment>& gts,
                                double threshold) {
    std::vector<std::size_t> order(preds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (preds[a].confidence != preds[b].confidence) return preds[a].confidence > preds[b].confidence;
        if (preds[a].seg.start != preds[b].seg.start) return preds[a].seg.start < preds[b].seg.start;
        return a < b;
    });
    std::vector<bool> g_used(gts.size());
    std::vector<bool> is_tp;
    for (std::size_t idx : order) {
        double best = threshold;
        std::ptrdiff_t best_g = -1;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (g_used[g]) continue;
            const double v = tvlm::iou(preds[idx].seg, gts[g]);
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

    const std::size_t n = is_tp.size();
    std::vector<double> precision(n), recall(n);
    std::int64_t tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_tp[i]) ++tp;
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp) / static_cast<double>(gts.size());
    }
    std::vector<double> interp(n);
    double run = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        run = std::max(run, precision[i]);
        interp[i] = run;
    }
    double ap = 0.0, prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ap += (recall[i] - prev) * interp[i];
        prev = recall[i];
    }
    return ap;
}

inline double highlight_map(const std::vector<std::vector<tvlm::ScoredMoment>>& preds,
                            const std::vector<std::vector<tvlm::Segment>>& gts) {
    double sum = 0.0;
    std::int64_t scored = 0;
    for (std::size_t q = 0; q < preds.size(); ++q) {
        if (gts[q].empty()) continue;
        for (double t : tvlm::kMapThresholds) sum += average_precision(preds[q], gts[q], t);
        ++scored;
    }
    return 100.0 * sum / (static_cast<double>(scored) * 2.0);
}

// Raw n-gram counts via substring loops, for checking the tokenizer-side
// plumbing of the captioning metric.
inline std::map<std::vector<std::string>, std::int64_t> ngram_counts(const std::vector<std::string>& tokens,
                                                                     int n) {
    std::map<std::vector<std::string>, std::int64_t> out;
    if (static_cast<int>(tokens.size()) < n) return out;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
        ++out[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                       tokens.begin() + static_cast<std::ptrdiff_t>(i) + n)];
    }
    return out;
}

}  // namespace oracle
