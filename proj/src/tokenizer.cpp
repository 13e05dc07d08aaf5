#include "vulnreach/tokenizer.hpp"

namespace vulnreach {

namespace {

constexpr bool is_word_byte(unsigned char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '$' ||
           c >= 0x80;
}

constexpr bool is_space_byte(unsigned char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

} // namespace

std::size_t LexicalTokenizer::count(std::string_view text) const {
    std::size_t n = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        if (is_word_byte(c)) {
            if (!in_word)
                ++n;
            in_word = true;
        } else {
            in_word = false;
            if (!is_space_byte(c))
                ++n;
        }
    }
    return n;
}

const Tokenizer& default_tokenizer() {
    static const LexicalTokenizer instance;
    return instance;
}

} // namespace vulnreach
