#pragma once

#include <string>
#include <vector>

namespace tvlm {

// Character-level tokenizer over 7-bit ASCII. Four special ids sit below the
// byte range, so id = byte + 4 for ordinary characters. Round trips are
// lossless for any ASCII string.
class Tokenizer {
public:
    static constexpr int kPad = 0;
    static constexpr int kBos = 1;
    static constexpr int kEos = 2;
    static constexpr int kSep = 3;
    static constexpr int kSpecials = 4;
    static constexpr int kVocabSize = kSpecials + 128;

    // Throws EncodingError naming the byte offset of the first byte >= 0x80.
    std::vector<int> tokenize(const std::string& text) const;

    // Specials are dropped; character ids map back to their bytes.
    std::string detokenize(const std::vector<int>& ids) const;

    int vocab_size() const { return kVocabSize; }
};

}  // namespace tvlm
