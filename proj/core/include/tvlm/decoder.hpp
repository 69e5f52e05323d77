#pragma once

#include <string>
#include <vector>

#include "tvlm/layers.hpp"
#include "tvlm/tokenizer.hpp"

namespace tvlm {

struct DecoderConfig {
    std::int64_t layers = 2;
    std::int64_t heads = 2;
    std::int64_t dim = 64;  // model dim, shared with the video-token projection
    std::int64_t ffn = 256;
    std::int64_t max_seq_len = 256;
    std::int64_t vocab = Tokenizer::kVocabSize;
};

// Small causal decoder standing in for a frozen LLM. The input sequence is
// [video tokens][SEP][query tokens][SEP][answer tokens]; supervision covers
// the answer span (plus its closing EOS) only. All base weights are created
// frozen; capacity for adaptation comes from low-rank adapters attached to
// every linear map.
class Decoder {
public:
    Decoder(const DecoderConfig& cfg, ParamSet& params, Rng& rng);
    // adaptable_ holds pointers into this object, so it must stay put
    Decoder(const Decoder&) = delete;
    Decoder& operator=(const Decoder&) = delete;

    void attach_lora(ParamSet& params, std::int64_t rank, double alpha, Rng& rng);
    // Folds every adapter into its base weight (outputs preserved to ~1e-9).
    void merge_lora();

    // Logits for the answer span: row i predicts answer token i, with one
    // extra final row predicting EOS. Shape [len(answer)+1, vocab].
    Var answer_logits(const Var& video_tokens, const std::vector<int>& query_ids,
                      const std::vector<int>& answer_ids) const;

    // Mean NLL of answer_ids + EOS under answer_logits.
    Var loss(const Var& video_tokens, const std::vector<int>& query_ids, const std::vector<int>& answer_ids) const;

    // Argmax decoding until EOS or the budget; returns generated ids
    // (EOS excluded).
    std::vector<int> greedy_decode(const Var& video_tokens, const std::vector<int>& query_ids,
                                   std::int64_t max_new_tokens) const;

    const DecoderConfig& config() const { return cfg_; }

private:
    // hidden states for the assembled sequence; n_video/n_query fixed by inputs
    Var hidden(const Var& video_tokens, const std::vector<int>& query_ids, const std::vector<int>& answer_ids) const;

    DecoderConfig cfg_;
    ParamPtr tok_embed_;  // [vocab, dim]
    ParamPtr pos_embed_;  // [max_seq_len, dim]
    std::vector<TransformerBlock> blocks_;
    LayerNorm final_ln_;
    Linear lm_head_;
    std::vector<Linear*> adaptable_;  // every linear map, for adapter attach/merge
};

}  // namespace tvlm
