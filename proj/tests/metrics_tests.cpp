#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tvlm/errors.hpp"
#include "tvlm/metrics.hpp"
#include "tvlm/rng.hpp"

using namespace tvlm;

namespace {

// half-second grid keeps IoU ratios exact and makes ties genuinely common
Segment random_segment(Rng& rng) {
    const double start = static_cast<double>(rng.uniform_int(40)) / 2.0;
    const double len = static_cast<double>(1 + rng.uniform_int(20)) / 2.0;
    return {start, start + len};
}

std::vector<Segment> random_segments(Rng& rng, std::int64_t max_count) {
    std::vector<Segment> out;
    const std::int64_t n = rng.uniform_int(max_count + 1);
    for (std::int64_t i = 0; i < n; ++i) out.push_back(random_segment(rng));
    return out;
}

std::string random_caption(Rng& rng) {
    static const char* kWords[] = {"pan", "fry", "egg", "cut", "mix", "stir", "pour", "wash"};
    const int n = 1 + static_cast<int>(rng.uniform_int(6));
    std::string out;
    for (int i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += kWords[rng.uniform_int(static_cast<std::int64_t>(std::size(kWords)))];
    }
    return out;
}

std::vector<TimedCaption> random_captions(Rng& rng, std::int64_t max_count) {
    std::vector<TimedCaption> out;
    const std::int64_t n = rng.uniform_int(max_count + 1);
    for (std::int64_t i = 0; i < n; ++i) out.push_back({random_segment(rng), random_caption(rng)});
    return out;
}

}  // namespace

TEST_CASE("iou basics") {
    CHECK(iou({0.0, 10.0}, {0.0, 10.0}) == 1.0);
    CHECK(iou({0.0, 10.0}, {20.0, 30.0}) == 0.0);
    CHECK(iou({0.0, 10.0}, {5.0, 15.0}) == doctest::Approx(5.0 / 15.0).epsilon(1e-12));
    CHECK(iou({0.0, 10.0}, {2.0, 4.0}) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(iou({5.0, 5.0}, {5.0, 5.0}) == 0.0);  // degenerate on both sides
    CHECK(iou({0.0, 10.0}, {10.0, 20.0}) == 0.0);  // touching, no overlap
}

TEST_CASE("recall@1 flips across the threshold at an exact IoU") {
    // prediction overlaps 6 of the reference's 10 seconds: IoU exactly 0.6
    const std::vector<std::optional<Segment>> preds = {Segment{10.0, 16.0}};
    const std::vector<Segment> gts = {{10.0, 20.0}};
    CHECK(recall_at_1(preds, gts, 0.5) == 100.0);
    CHECK(recall_at_1(preds, gts, 0.6) == 100.0);  // inclusive
    CHECK(recall_at_1(preds, gts, 0.7) == 0.0);

    const std::vector<std::optional<Segment>> with_miss = {Segment{10.0, 16.0}, std::nullopt};
    const std::vector<Segment> two = {{10.0, 20.0}, {30.0, 40.0}};
    CHECK(recall_at_1(with_miss, two, 0.5) == 50.0);

    CHECK_THROWS_AS(recall_at_1({}, {}, 0.5), EmptyInputError);
    CHECK_THROWS_AS(recall_at_1(with_miss, gts, 0.5), ShapeError);
}

TEST_CASE("greedy matching agrees with the repeated-scan oracle") {
    Rng rng(301);
    for (int iter = 0; iter < 4000; ++iter) {
        const auto preds = random_segments(rng, 4);
        const auto gts = random_segments(rng, 4);
        const double threshold = kF1Thresholds[rng.uniform_int(4)];
        auto got = greedy_iou_match(preds, gts, threshold);
        std::sort(got.begin(), got.end());
        const auto want = oracle::greedy_match(preds, gts, threshold);
        CHECK(got == want);
    }
}

TEST_CASE("event F1 equals the oracle exactly") {
    Rng rng(302);
    for (int iter = 0; iter < 3000; ++iter) {
        const std::size_t videos = 1 + static_cast<std::size_t>(rng.uniform_int(3));
        std::vector<std::vector<Segment>> preds(videos), gts(videos);
        for (std::size_t v = 0; v < videos; ++v) {
            preds[v] = random_segments(rng, 4);
            gts[v] = random_segments(rng, 4);
        }
        CHECK(dvc_f1(preds, gts) == oracle::dvc_f1(preds, gts));
    }
    SUBCASE("identical lists score 100") {
        const std::vector<std::vector<Segment>> same = {{{0.0, 5.0}, {6.0, 9.0}}};
        CHECK(dvc_f1(same, same) == 100.0);
    }
    SUBCASE("empty predictions everywhere score 0") {
        CHECK(dvc_f1({{}}, {{{0.0, 5.0}}}) == 0.0);
    }
}

TEST_CASE("story matching equals the exhaustive oracle exactly") {
    Rng rng(303);
    for (int iter = 0; iter < 800; ++iter) {
        const std::size_t videos = 1 + static_cast<std::size_t>(rng.uniform_int(2));
        std::vector<std::vector<TimedCaption>> preds(videos), gts(videos);
        bool any_ref = false;
        for (std::size_t v = 0; v < videos; ++v) {
            preds[v] = random_captions(rng, 4);
            gts[v] = random_captions(rng, 4);
            any_ref = any_ref || !gts[v].empty();
        }
        if (!any_ref) gts[0].push_back({random_segment(rng), random_caption(rng)});
        CHECK(soda_c(preds, gts) == oracle::soda_c(preds, gts));
    }
    SUBCASE("shape and emptiness are rejected") {
        CHECK_THROWS_AS(soda_c({{}}, {{}, {}}), ShapeError);
        CHECK_THROWS_AS(soda_c({}, {}), EmptyInputError);
    }
    SUBCASE("identity hits the ceiling") {
        const std::vector<std::vector<TimedCaption>> refs = {
            {{{0.0, 4.0}, "crack the eggs into a bowl"}, {{4.0, 9.0}, "whisk them with a pinch of salt"}},
        };
        CHECK(soda_c(refs, refs) == doctest::Approx(1000.0).epsilon(1e-9));
    }
}

TEST_CASE("highlight mAP equals the suffix-max oracle exactly") {
    Rng rng(304);
    for (int iter = 0; iter < 2500; ++iter) {
        const std::size_t queries = 1 + static_cast<std::size_t>(rng.uniform_int(3));
        std::vector<std::vector<ScoredMoment>> preds(queries);
        std::vector<std::vector<Segment>> gts(queries);
        bool any_ref = false;
        for (std::size_t q = 0; q < queries; ++q) {
            const std::int64_t n = rng.uniform_int(5);
            for (std::int64_t i = 0; i < n; ++i) {
                // quarter-step confidences force plenty of ties
                preds[q].push_back({random_segment(rng), static_cast<double>(rng.uniform_int(8)) / 4.0});
            }
            gts[q] = random_segments(rng, 4);
            any_ref = any_ref || !gts[q].empty();
        }
        if (!any_ref) gts[0].push_back(random_segment(rng));
        const MapResult got = highlight_map(preds, gts);
        CHECK(got.map == oracle::highlight_map(preds, gts));
    }
    SUBCASE("reference-free queries are excluded but reported") {
        const std::vector<std::vector<ScoredMoment>> preds = {{{{0.0, 2.0}, 1.0}}, {{{0.0, 2.0}, 1.0}}};
        const std::vector<std::vector<Segment>> gts = {{{0.0, 2.0}}, {}};
        const MapResult r = highlight_map(preds, gts);
        CHECK(r.queries_scored == 1);
        CHECK(r.zero_reference_queries == 1);
        CHECK(r.map == 100.0);
    }
    SUBCASE("no scorable query is an error") {
        CHECK_THROWS_AS(highlight_map({{}}, {{}}), EmptyInputError);
    }
}

TEST_CASE("caption similarity scores a caption against itself at 10") {
    const std::vector<std::string> corpus = {
        "crack the eggs into a bowl",
        "whisk them with a pinch of salt",
        "pour the mixture into a hot pan",
        "fold the omelette and serve",
    };
    const IdfStats idf = build_idf(corpus);
    for (const auto& caption : corpus) {
        CHECK(cider_pair(caption, caption, idf) == doctest::Approx(10.0).epsilon(1e-9));
    }
    // shorter captions lack higher-order n-grams: only two of four scales fire
    CHECK(cider_pair("pour water", "pour water", idf) == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(cider_pair("taste", "taste", idf) == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(cider_pair("crack the eggs into a bowl", "fold the omelette and serve", idf) <
          cider_pair("crack the eggs into a bowl", "crack the eggs into a bowl", idf));
}

TEST_CASE("caption similarity matches a closed-form two-gram case") {
    const std::vector<std::string> corpus = {"a b c d", "a b x y"};
    const IdfStats idf = build_idf(corpus);
    const double w = std::log(3.0) - std::log(2.0);  // grams shared by both documents
    const double u = std::log(3.0);                  // grams unique to one document

    const double cos1 = 2.0 * w * w / (std::sqrt(2.0 * w * w) * std::sqrt(2.0 * w * w + 2.0 * u * u));
    const double cos2 = w * w / (w * std::sqrt(w * w + 2.0 * u * u));
    const double want = 10.0 * (cos1 + cos2) / 4.0;
    CHECK(cider_pair("a b", "a b c d", idf) == doctest::Approx(want).epsilon(1e-12));

    CHECK(cider_pair("x y", "a b c d", idf) == 0.0);  // no shared grams at any scale
}

TEST_CASE("corpus-level caption scores average the pairs") {
    const std::vector<std::string> refs = {"crack the eggs into a bowl", "pour the mixture into a hot pan"};
    const std::vector<std::string> cands = {"crack the eggs into a bowl", "pour the mixture"};
    const IdfStats idf = build_idf(refs);
    const double want = (cider_pair(cands[0], refs[0], idf) + cider_pair(cands[1], refs[1], idf)) / 2.0;
    CHECK(cider(cands, refs, idf) == doctest::Approx(want).epsilon(1e-12));

    CHECK_THROWS_AS(cider({"one"}, refs, idf), ShapeError);
    CHECK_THROWS_AS(cider({}, {}, idf), EmptyInputError);
    CHECK_THROWS_AS(build_idf({}), EmptyInputError);
}

TEST_CASE("matched-pair caption quality is 10 for a perfect system") {
    const std::vector<std::vector<TimedCaption>> refs = {
        {{{0.0, 4.0}, "crack the eggs into a bowl"}, {{4.0, 9.0}, "whisk them with a pinch of salt"}},
        {{{1.0, 6.0}, "pour the mixture into a hot pan"}},
    };
    CHECK(dvc_cider(refs, refs) == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(dvc_cider({{}, {}}, refs) == 0.0);  // nothing matched at any threshold
    CHECK_THROWS_AS(dvc_cider({{}}, refs), ShapeError);
}

TEST_CASE("caption tokens are lowercased alphanumeric runs") {
    CHECK(caption_tokens("Crack the EGGS!") == std::vector<std::string>{"crack", "the", "eggs"});
    CHECK(caption_tokens("at 9.3 seconds") == std::vector<std::string>{"at", "9", "3", "seconds"});
    CHECK(caption_tokens("") == std::vector<std::string>{});
    CHECK(caption_tokens("  ...  ") == std::vector<std::string>{});
}

TEST_CASE("hit@1 takes the top-scored moment, inclusive at the bar") {
    // ground-truth clips start every 2 seconds; saliency annotated per clip
    const std::vector<std::pair<double, double>> clips = {{0.0, 2.7}, {2.0, 4.0}, {4.0, 4.2}};

    SaliencySeries pred;
    pred.times = {1.0, 2.5, 5.0};
    pred.scores = {1.0, 5.0, 2.0};
    SUBCASE("top moment in a salient clip hits") {
        const HitResult r = hit_at_1(pred, clips, 4.0, 2.0);
        CHECK(r.hit);  // top time 2.5 falls in the clip scored exactly 4.0
        CHECK_FALSE(r.out_of_range);
    }
    SUBCASE("top moment in a dull clip misses") {
        pred.scores = {5.0, 1.0, 2.0};  // top time now 1.0 -> clip scored 2.7
        const HitResult r = hit_at_1(pred, clips, 4.0, 2.0);
        CHECK_FALSE(r.hit);
        CHECK_FALSE(r.out_of_range);
    }
    SUBCASE("score ties keep the earliest time") {
        pred.scores = {5.0, 5.0, 2.0};
        const HitResult r = hit_at_1(pred, clips, 4.0, 2.0);
        CHECK_FALSE(r.hit);  // earliest top time 1.0 -> clip scored 2.7
    }
    SUBCASE("a time past every clip is out of range") {
        pred.times = {30.0};
        pred.scores = {5.0};
        const HitResult r = hit_at_1(pred, clips, 4.0, 2.0);
        CHECK_FALSE(r.hit);
        CHECK(r.out_of_range);
    }
    SUBCASE("clip intervals are half-open") {
        pred.times = {6.0};  // clip [4,6) excludes 6.0
        pred.scores = {5.0};
        CHECK(hit_at_1(pred, clips, 4.0, 2.0).out_of_range);
    }
    SUBCASE("an empty prediction is a plain miss") {
        const HitResult r = hit_at_1(SaliencySeries{}, clips, 4.0, 2.0);
        CHECK_FALSE(r.hit);
        CHECK_FALSE(r.out_of_range);
    }
}
