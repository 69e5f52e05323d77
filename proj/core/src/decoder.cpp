#include "tvlm/decoder.hpp"

#include "tvlm/errors.hpp"

namespace tvlm {

Decoder::Decoder(const DecoderConfig& cfg, ParamSet& params, Rng& rng) : cfg_(cfg) {
    if (cfg.dim % cfg.heads != 0) throw ConfigError("decoder dim not divisible by heads");
    tok_embed_ = params.normal("decoder.tok_embed", {cfg.vocab, cfg.dim}, rng, 0.02, false);
    pos_embed_ = params.normal("decoder.pos_embed", {cfg.max_seq_len, cfg.dim}, rng, 0.02, false);
    for (std::int64_t i = 0; i < cfg.layers; ++i) {
        blocks_.push_back(make_block(params, "decoder.block" + std::to_string(i), cfg.dim, cfg.heads, cfg.ffn,
                                     false, rng, false));
    }
    final_ln_ = make_layer_norm(params, "decoder.ln", cfg.dim, false);
    lm_head_ = make_linear(params, "decoder.lm_head", cfg.dim, cfg.vocab, rng, false);

    for (auto& b : blocks_) {
        adaptable_.push_back(&b.self_attn.q);
        adaptable_.push_back(&b.self_attn.k);
        adaptable_.push_back(&b.self_attn.v);
        adaptable_.push_back(&b.self_attn.o);
        adaptable_.push_back(&b.ffn.fc1);
        adaptable_.push_back(&b.ffn.fc2);
    }
    adaptable_.push_back(&lm_head_);
}

void Decoder::attach_lora(ParamSet& params, std::int64_t rank, double alpha, Rng& rng) {
    for (Linear* l : adaptable_) {
        // adapter params inherit the base linear's prefix (strip ".weight")
        const std::string prefix = l->weight->name.substr(0, l->weight->name.size() - 7);
        l->attach_lora(params, prefix, rank, alpha, rng);
    }
}

void Decoder::merge_lora() {
    for (Linear* l : adaptable_) l->merge_lora();
}

Var Decoder::hidden(const Var& video_tokens, const std::vector<int>& query_ids,
                    const std::vector<int>& answer_ids) const {
    const std::int64_t n_video = video_tokens ? video_tokens->value.dim(0) : 0;
    const std::int64_t n_query = static_cast<std::int64_t>(query_ids.size());
    const std::int64_t n_answer = static_cast<std::int64_t>(answer_ids.size());
    const std::int64_t total = n_video + 1 + n_query + 1 + n_answer;
    if (total > cfg_.max_seq_len) {
        throw DomainError("sequence too long: video " + std::to_string(n_video) + " + query " +
                          std::to_string(n_query) + " + answer " + std::to_string(n_answer) +
                          " + 2 separators = " + std::to_string(total) + " > max " +
                          std::to_string(cfg_.max_seq_len));
    }

    std::vector<int> text_ids;
    text_ids.reserve(static_cast<std::size_t>(1 + n_query + 1 + n_answer));
    text_ids.push_back(Tokenizer::kSep);
    text_ids.insert(text_ids.end(), query_ids.begin(), query_ids.end());
    text_ids.push_back(Tokenizer::kSep);
    text_ids.insert(text_ids.end(), answer_ids.begin(), answer_ids.end());
    Var text = embedding_rows(leaf(tok_embed_), text_ids);

    Var x = (n_video > 0) ? concat_rows({video_tokens, text}) : text;
    std::vector<int> pos(static_cast<std::size_t>(total));
    for (std::int64_t i = 0; i < total; ++i) pos[static_cast<std::size_t>(i)] = static_cast<int>(i);
    x = add(x, embedding_rows(leaf(pos_embed_), pos));

    const Tensor mask = causal_mask(total);
    for (const auto& b : blocks_) x = b.apply(x, &mask, nullptr);
    return final_ln_.apply(x);
}

Var Decoder::answer_logits(const Var& video_tokens, const std::vector<int>& query_ids,
                           const std::vector<int>& answer_ids) const {
    const std::int64_t n_video = video_tokens ? video_tokens->value.dim(0) : 0;
    const std::int64_t n_query = static_cast<std::int64_t>(query_ids.size());
    const std::int64_t n_answer = static_cast<std::int64_t>(answer_ids.size());
    Var h = hidden(video_tokens, query_ids, answer_ids);
    // the second separator predicts answer[0]; answer[i] predicts answer[i+1];
    // the last answer token predicts EOS
    const std::int64_t begin = n_video + 1 + n_query;
    return lm_head_.apply(slice_rows(h, begin, begin + n_answer + 1));
}

Var Decoder::loss(const Var& video_tokens, const std::vector<int>& query_ids,
                  const std::vector<int>& answer_ids) const {
    Var logits = answer_logits(video_tokens, query_ids, answer_ids);
    std::vector<int> targets(answer_ids);
    targets.push_back(Tokenizer::kEos);
    std::vector<bool> mask(targets.size(), true);
    return cross_entropy_lm(logits, targets, mask);
}

std::vector<int> Decoder::greedy_decode(const Var& video_tokens, const std::vector<int>& query_ids,
                                        std::int64_t max_new_tokens) const {
    if (max_new_tokens < 1) throw DomainError("max_new_tokens must be >= 1");
    std::vector<int> out;
    while (static_cast<std::int64_t>(out.size()) < max_new_tokens) {
        Var logits = answer_logits(video_tokens, query_ids, out);
        const Tensor& t = logits->value;
        const std::int64_t rows = t.dim(0), v = t.dim(1);
        const double* last = t.data() + (rows - 1) * v;
        int best = 0;
        for (std::int64_t i = 1; i < v; ++i) {
            if (last[i] > last[best]) best = static_cast<int>(i);
        }
        if (best == Tokenizer::kEos) break;
        out.push_back(best);
    }
    return out;
}

}  // namespace tvlm
