#include "tvlm/tokenizer.hpp"

#include "tvlm/errors.hpp"

namespace tvlm {

std::vector<int> Tokenizer::tokenize(const std::string& text) const {
    std::vector<int> ids;
    ids.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        const unsigned char b = static_cast<unsigned char>(text[i]);
        if (b >= 0x80) {
            throw EncodingError("non-ASCII byte 0x" + [b] {
                static const char* hex = "0123456789abcdef";
                return std::string{hex[b >> 4], hex[b & 0xf]};
            }() + " at offset " + std::to_string(i));
        }
        ids.push_back(static_cast<int>(b) + kSpecials);
    }
    return ids;
}

std::string Tokenizer::detokenize(const std::vector<int>& ids) const {
    std::string out;
    out.reserve(ids.size());
    for (int id : ids) {
        if (id < 0 || id >= kVocabSize) {
            throw EncodingError("token id " + std::to_string(id) + " outside vocabulary of size " +
                                std::to_string(kVocabSize));
        }
        if (id < kSpecials) continue;
        out.push_back(static_cast<char>(id - kSpecials));
    }
    return out;
}

}  // namespace tvlm
