#include <benchmark/benchmark.h>

#include <map>
#include <string>
#include <vector>

#include "tvlm/pipeline.hpp"
#include "tvlm/synth.hpp"

using namespace tvlm;

namespace {

Tensor random_tensor(Shape shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (auto& v : t.values()) v = rng.normal(0.0, 1.0);
    return t;
}

// one shared toy-scale workload so every benchmark sees the same data
struct Workload {
    Config cfg = Config::toy();
    Model model{cfg};
    VideoClip clip;
    std::string instruction;
    std::string answer;

    Workload() {
        SynthSpec spec;
        spec.videos = 1;
        spec.tasks = {Task::grounding};
        const SynthCorpus corpus = synth_corpus(spec);
        const auto dataset = build_dataset(corpus.annotations, TemplateSet::builtin(), cfg.seed);
        clip = render_clip(corpus.videos[0], cfg.frames, cfg.frame_height, cfg.frame_width);
        instruction = dataset[0].instruction;
        answer = dataset[0].answer;
    }
};

Workload& workload() {
    static Workload w;
    return w;
}

void bm_matmul(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    Rng rng(1);
    const Var a = constant(random_tensor({n, n}, rng));
    const Var b = constant(random_tensor({n, n}, rng));
    for (auto _ : state) {
        benchmark::DoNotOptimize(matmul(a, b)->value.data());
    }
    state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(bm_matmul)->Arg(64)->Arg(128)->Arg(256);

void bm_softmax_rows(benchmark::State& state) {
    Rng rng(2);
    const Var a = constant(random_tensor({state.range(0), 128}, rng));
    for (auto _ : state) {
        benchmark::DoNotOptimize(softmax(a, -1)->value.data());
    }
}
BENCHMARK(bm_softmax_rows)->Arg(64)->Arg(256);

void bm_encode_clip_cold(benchmark::State& state) {
    Workload& w = workload();
    for (auto _ : state) {
        benchmark::DoNotOptimize(w.model.encode_clip(w.clip).tokens->value.data());
    }
}
BENCHMARK(bm_encode_clip_cold);

void bm_encode_clip_cached_trunk(benchmark::State& state) {
    Workload& w = workload();
    std::vector<Tensor> cache;
    w.model.encode_clip(w.clip, &cache);  // prime the frozen-trunk cache
    for (auto _ : state) {
        benchmark::DoNotOptimize(w.model.encode_clip(w.clip, &cache).tokens->value.data());
    }
}
BENCHMARK(bm_encode_clip_cached_trunk);

void bm_loss_forward(benchmark::State& state) {
    Workload& w = workload();
    std::vector<Tensor> cache;
    for (auto _ : state) {
        benchmark::DoNotOptimize(w.model.sample_loss(w.clip, w.instruction, w.answer, &cache)->value.scalar_value());
    }
}
BENCHMARK(bm_loss_forward);

void bm_train_step(benchmark::State& state) {
    Workload& w = workload();
    std::vector<Tensor> cache;
    AdamW opt(w.model.params().all, {});
    for (auto _ : state) {
        const Var loss = w.model.sample_loss(w.clip, w.instruction, w.answer, &cache);
        zero_grads(w.model.params().all);
        backward(loss);
        clip_grad_norm(w.model.params().all, 1.0);
        opt.step(1e-4);
    }
}
BENCHMARK(bm_train_step);

void bm_greedy_decode(benchmark::State& state) {
    Workload& w = workload();
    std::vector<Tensor> cache;
    for (auto _ : state) {
        benchmark::DoNotOptimize(w.model.generate(w.clip, w.instruction, state.range(0), &cache));
    }
}
BENCHMARK(bm_greedy_decode)->Arg(16)->Arg(48);

void bm_parse_dense_response(benchmark::State& state) {
    const std::string text =
        "90 - 102 seconds, spread margarine on two slices of white bread in the video. "
        "114.0 - 127.0 seconds, place a slice of cheese on the bread.";
    for (auto _ : state) {
        benchmark::DoNotOptimize(parse_response(Task::dense_captioning, text, 180.0).segments.size());
    }
}
BENCHMARK(bm_parse_dense_response);

std::vector<std::vector<TimedCaption>> bench_captions(std::uint64_t seed, std::size_t videos) {
    static const char* words[] = {"pour", "stir", "cut", "water", "bread", "slice", "pan", "mix"};
    Rng rng(seed);
    std::vector<std::vector<TimedCaption>> out(videos);
    for (auto& video : out) {
        const std::int64_t n = 1 + rng.uniform_int(4);
        for (std::int64_t i = 0; i < n; ++i) {
            const double start = static_cast<double>(rng.uniform_int(40)) / 2.0;
            const double len = static_cast<double>(1 + rng.uniform_int(20)) / 2.0;
            std::string text;
            for (std::int64_t k = 0, kw = 1 + rng.uniform_int(6); k < kw; ++k) {
                if (k) text += ' ';
                text += words[rng.uniform_int(8)];
            }
            video.push_back({{start, start + len}, text});
        }
    }
    return out;
}

void bm_soda_c(benchmark::State& state) {
    const auto preds = bench_captions(3, static_cast<std::size_t>(state.range(0)));
    const auto gts = bench_captions(4, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(soda_c(preds, gts));
    }
}
BENCHMARK(bm_soda_c)->Arg(4)->Arg(16);

void bm_evaluate_grounding(benchmark::State& state) {
    std::vector<AnnotationRecord> refs;
    std::vector<PredictionRecord> preds;
    Rng rng(5);
    for (int i = 0; i < 64; ++i) {
        AnnotationRecord r;
        r.video = "v" + std::to_string(i);
        r.duration = 60.0;
        r.task = Task::grounding;
        const double start = static_cast<double>(rng.uniform_int(40));
        r.segments = {{Number::integer(start), Number::integer(start + 10.0), ""}};
        r.query = "a panel";
        r.source = "bench";
        refs.push_back(r);
        PredictionRecord p;
        p.video = r.video;
        p.task = Task::grounding;
        p.grounding = Segment{start + 1.0, start + 11.0};
        preds.push_back(p);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate(preds, refs, 4.0, 2.0).size());
    }
}
BENCHMARK(bm_evaluate_grounding);

}  // namespace

BENCHMARK_MAIN();
