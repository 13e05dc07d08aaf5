#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace vulnreach {

/// Measures text length in tokens. Block sizes and the segmentation threshold
/// are expressed in whatever unit the active tokenizer counts.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::size_t count(std::string_view text) const = 0;
    virtual std::string name() const = 0;
};

/// Default tokenizer: each maximal run of word characters ([A-Za-z0-9_$] and
/// any byte >= 0x80) is one token, every other non-whitespace byte is one token.
class LexicalTokenizer final : public Tokenizer {
public:
    std::size_t count(std::string_view text) const override;
    std::string name() const override { return "lexical-v1"; }
};

const Tokenizer& default_tokenizer();

} // namespace vulnreach
