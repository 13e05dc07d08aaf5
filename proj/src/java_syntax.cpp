#include "vulnreach/java_syntax.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "vulnreach/errors.hpp"

namespace vulnreach::java {

namespace {

constexpr bool is_word_byte(unsigned char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '$' ||
           c >= 0x80;
}

constexpr bool is_digit(unsigned char c) noexcept { return c >= '0' && c <= '9'; }

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    LexResult run() {
        LexResult out;
        while (pos_ < src_.size()) {
            const unsigned char c = src_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
                ++pos_;
            } else if (c == '/' && peek(1) == '/') {
                Comment cm{pos_, pos_, line_, line_};
                while (pos_ < src_.size() && src_[pos_] != '\n')
                    ++pos_;
                cm.end = pos_;
                out.comments.push_back(cm);
            } else if (c == '/' && peek(1) == '*') {
                Comment cm{pos_, pos_, line_, line_};
                pos_ += 2;
                while (pos_ < src_.size() && !(src_[pos_] == '*' && peek(1) == '/'))
                    advance();
                pos_ = std::min(pos_ + 2, src_.size());
                cm.end = pos_;
                cm.end_line = line_;
                out.comments.push_back(cm);
            } else if (c == '"' && peek(1) == '"' && peek(2) == '"') {
                out.tokens.push_back(text_block());
            } else if (c == '"' || c == '\'') {
                out.tokens.push_back(quoted(c));
            } else if (is_word_byte(c)) {
                Token t{is_digit(c) ? TokenKind::Number : TokenKind::Identifier, pos_, pos_, line_, line_};
                while (pos_ < src_.size() && is_word_byte(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
                t.end = pos_;
                out.tokens.push_back(t);
            } else {
                out.tokens.push_back(Token{TokenKind::Punct, pos_, pos_ + 1, line_, line_});
                ++pos_;
            }
        }
        return out;
    }

private:
    char peek(std::size_t ahead) const noexcept {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void advance() noexcept {
        if (src_[pos_] == '\n')
            ++line_;
        ++pos_;
    }

    Token text_block() {
        Token t{TokenKind::TextBlock, pos_, pos_, line_, line_};
        pos_ += 3;
        while (pos_ < src_.size()) {
            if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) {
                advance();
                advance();
                continue;
            }
            if (src_[pos_] == '"' && peek(1) == '"' && peek(2) == '"') {
                pos_ += 3;
                break;
            }
            advance();
        }
        t.end = pos_;
        t.end_line = line_;
        return t;
    }

    // Unterminated literals stop at the end of the line.
    Token quoted(char quote) {
        Token t{quote == '"' ? TokenKind::String : TokenKind::Char, pos_, pos_, line_, line_};
        ++pos_;
        while (pos_ < src_.size() && src_[pos_] != '\n') {
            if (src_[pos_] == '\\' && pos_ + 1 < src_.size() && src_[pos_ + 1] != '\n') {
                pos_ += 2;
                continue;
            }
            if (src_[pos_] == quote) {
                ++pos_;
                break;
            }
            ++pos_;
        }
        t.end = pos_;
        return t;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

constexpr std::array<std::string_view, 13> kModifiers{
    "public", "protected", "private", "static", "final", "abstract", "synchronized",
    "native", "strictfp", "transient", "volatile", "default", "sealed",
};

struct Parsed {
    SyntaxNode node;
    std::size_t next = 0;
};

struct GroupEnd {
    std::size_t index;
    bool ok;
};

class Parser {
public:
    Parser(std::string_view src, const std::vector<Token>& tokens) : src_(src), t_(tokens), n_(tokens.size()) {}

    SyntaxNode parse_unit() {
        SyntaxNode root;
        root.kind = SyntaxKind::CompilationUnit;
        root.first_token = 0;
        root.last_token = n_ == 0 ? 0 : n_ - 1;
        std::size_t j = 0;
        while (j < n_) {
            if (punct(j, ';')) {
                ++j;
                continue;
            }
            if (word(j, "package") || word(j, "import")) {
                Parsed p = statement(j, word(j, "package") ? SyntaxKind::PackageDeclaration
                                                           : SyntaxKind::ImportDeclaration);
                root.children.push_back(std::move(p.node));
                j = p.next;
                continue;
            }
            if (punct(j, '}')) {
                root.children.push_back(make(SyntaxKind::Error, j, j));
                ++j;
                continue;
            }
            Parsed p = member(j, "", false);
            if (p.node.kind != SyntaxKind::TypeDeclaration) {
                p.node.kind = SyntaxKind::Error;
                p.node.children.clear();
            }
            root.children.push_back(std::move(p.node));
            j = p.next;
        }
        return root;
    }

private:
    std::string_view text(std::size_t i) const { return src_.substr(t_[i].begin, t_[i].end - t_[i].begin); }

    bool punct(std::size_t i, char c) const {
        return i < n_ && t_[i].kind == TokenKind::Punct && src_[t_[i].begin] == c;
    }

    bool word(std::size_t i, std::string_view w) const {
        return i < n_ && t_[i].kind == TokenKind::Identifier && text(i) == w;
    }

    bool ident(std::size_t i) const { return i < n_ && t_[i].kind == TokenKind::Identifier; }

    bool modifier(std::size_t i) const {
        return ident(i) && std::find(kModifiers.begin(), kModifiers.end(), text(i)) != kModifiers.end();
    }

    SyntaxNode make(SyntaxKind kind, std::size_t first, std::size_t last, std::string name = {}) const {
        SyntaxNode node;
        node.kind = kind;
        node.name = std::move(name);
        node.first_token = first;
        node.last_token = last;
        node.line_start = t_[first].line;
        node.line_end = t_[last].end_line;
        return node;
    }

    // Matches a parenthesized group. Braces may nest inside (annotation array
    // values, lambdas); a ';' outside braces or an unopened '}' aborts.
    GroupEnd skip_parens(std::size_t open) const {
        int paren = 0;
        int brace = 0;
        for (std::size_t k = open; k < n_; ++k) {
            if (t_[k].kind != TokenKind::Punct)
                continue;
            switch (src_[t_[k].begin]) {
            case '(':
                ++paren;
                break;
            case ')':
                if (--paren == 0 && brace == 0)
                    return {k, true};
                break;
            case '{':
                ++brace;
                break;
            case '}':
                if (brace == 0)
                    return {k, false};
                --brace;
                break;
            case ';':
                if (brace == 0)
                    return {k, false};
                break;
            default:
                break;
            }
        }
        return {n_, false};
    }

    std::size_t skip_braces(std::size_t open) const {
        int depth = 0;
        for (std::size_t k = open; k < n_; ++k) {
            if (punct(k, '{')) {
                ++depth;
            } else if (punct(k, '}')) {
                if (--depth == 0)
                    return k;
            }
        }
        return npos;
    }

    std::size_t skip_annotation(std::size_t at) const {
        std::size_t k = at + 1;
        if (ident(k))
            ++k;
        while (punct(k, '.') && ident(k + 1))
            k += 2;
        if (punct(k, '(')) {
            GroupEnd g = skip_parens(k);
            if (g.ok)
                return g.index + 1;
        }
        return k;
    }

    Parsed statement(std::size_t start, SyntaxKind kind) const {
        for (std::size_t k = start + 1; k < n_; ++k) {
            if (punct(k, ';'))
                return {make(kind, start, k, qualified_name(start + 1, k)), k + 1};
            if (punct(k, '{') || punct(k, '}'))
                return {make(SyntaxKind::Error, start, k - 1), k};
        }
        return {make(SyntaxKind::Error, start, n_ - 1), n_};
    }

    std::string qualified_name(std::size_t first, std::size_t end) const {
        std::string name;
        for (std::size_t k = first; k < end; ++k)
            if (t_[k].kind != TokenKind::Punct || src_[t_[k].begin] == '.' || src_[t_[k].begin] == '*')
                name.append(text(k));
        return name;
    }

    bool record_header(std::size_t i) const {
        return word(i, "record") && ident(i + 1) && (punct(i + 2, '(') || punct(i + 2, '<'));
    }

    // Parses one member of a type body (or a top-level declaration) starting at
    // `start`, which must not be '}'.
    Parsed member(std::size_t start, std::string_view type_name, bool in_record) {
        bool seen_eq = false;
        bool seen_paren = false;
        std::string name;
        std::size_t annotation_end = npos;
        bool ctor = false;

        std::size_t j = start;
        while (j < n_) {
            if (punct(j, '@') && !seen_eq && !seen_paren) {
                if (word(j + 1, "interface"))
                    return type_declaration(start, j + 1);
                if (ident(j + 1)) {
                    j = skip_annotation(j);
                    annotation_end = j - 1;
                    continue;
                }
            }
            if (!seen_eq && !seen_paren && ident(j) && !(j > start && punct(j - 1, '.'))) {
                if (word(j, "class") || word(j, "interface") || word(j, "enum") || record_header(j))
                    return type_declaration(start, j);
            }
            if (punct(j, '}'))
                return {make(SyntaxKind::Error, start, j - 1), j};
            if (punct(j, ';')) {
                if (seen_paren && !seen_eq)
                    return {make(SyntaxKind::MethodDeclaration, start, j, name), j + 1};
                if (name.empty())
                    name = last_ident(start, j);
                return {make(SyntaxKind::FieldDeclaration, start, j, name), j + 1};
            }
            if (punct(j, '=') && !seen_eq) {
                if (name.empty() && !seen_paren)
                    name = last_ident(start, j);
                seen_eq = true;
            } else if (punct(j, '(')) {
                if (!seen_eq && !seen_paren) {
                    seen_paren = true;
                    if (j > start && ident(j - 1)) {
                        name = std::string(text(j - 1));
                        const std::size_t before = j - 1;
                        ctor = name == type_name &&
                               (before == start || modifier(before - 1) || punct(before - 1, '>') ||
                                (annotation_end != npos && before - 1 == annotation_end));
                    }
                }
                GroupEnd g = skip_parens(j);
                if (!g.ok) {
                    if (g.index >= n_)
                        return {make(SyntaxKind::Error, start, n_ - 1), n_};
                    if (punct(g.index, ';'))
                        return {make(SyntaxKind::Error, start, g.index), g.index + 1};
                    return {make(SyntaxKind::Error, start, g.index - 1), g.index};
                }
                j = g.index + 1;
                continue;
            } else if (punct(j, '{')) {
                const std::size_t close = skip_braces(j);
                if (close == npos)
                    return {make(SyntaxKind::Error, start, n_ - 1), n_};
                if (seen_eq) {
                    j = close + 1;
                    continue;
                }
                if (seen_paren) {
                    return {make(ctor ? SyntaxKind::ConstructorDeclaration : SyntaxKind::MethodDeclaration, start,
                                 close, name),
                            close + 1};
                }
                // Compact canonical constructor: `public Point { ... }`.
                if (in_record && j > start && ident(j - 1) && text(j - 1) == type_name)
                    return {make(SyntaxKind::ConstructorDeclaration, start, close, std::string(type_name)),
                            close + 1};
                return {make(SyntaxKind::Initializer, start, close), close + 1};
            } else if (punct(j, ',') && !seen_eq && !seen_paren && name.empty()) {
                name = last_ident(start, j);
            }
            ++j;
        }
        return {make(SyntaxKind::Error, start, n_ - 1), n_};
    }

    std::string last_ident(std::size_t first, std::size_t end) const {
        for (std::size_t k = end; k > first; --k)
            if (ident(k - 1))
                return std::string(text(k - 1));
        return {};
    }

    Parsed type_declaration(std::size_t start, std::size_t keyword) {
        const bool is_enum = word(keyword, "enum");
        const bool is_record = word(keyword, "record");
        std::string name = ident(keyword + 1) ? std::string(text(keyword + 1)) : std::string{};

        std::size_t k = keyword + 1;
        std::size_t open = npos;
        while (k < n_) {
            if (punct(k, '{')) {
                open = k;
                break;
            }
            if (punct(k, '(')) {
                GroupEnd g = skip_parens(k);
                if (!g.ok) {
                    if (g.index >= n_)
                        return {make(SyntaxKind::Error, start, n_ - 1), n_};
                    if (punct(g.index, ';'))
                        return {make(SyntaxKind::Error, start, g.index), g.index + 1};
                    return {make(SyntaxKind::Error, start, g.index - 1), g.index};
                }
                k = g.index + 1;
                continue;
            }
            if (punct(k, ';'))
                return {make(SyntaxKind::Error, start, k), k + 1};
            if (punct(k, '}'))
                return {make(SyntaxKind::Error, start, k - 1), k};
            ++k;
        }
        if (open == npos)
            return {make(SyntaxKind::Error, start, n_ - 1), n_};

        SyntaxNode node = make(SyntaxKind::TypeDeclaration, start, open, name);
        node.body_open = open;

        std::size_t j = open + 1;
        if (is_enum)
            j = enum_constants(node, j);
        while (true) {
            if (j >= n_) {
                node.last_token = n_ - 1;
                node.line_end = t_[n_ - 1].end_line;
                return {std::move(node), n_};
            }
            if (punct(j, '}')) {
                node.body_close = j;
                node.last_token = j;
                node.line_end = t_[j].end_line;
                return {std::move(node), j + 1};
            }
            if (punct(j, ';')) {
                ++j;
                continue;
            }
            Parsed p = member(j, name, is_record);
            node.children.push_back(std::move(p.node));
            j = p.next;
        }
    }

    std::size_t enum_constants(SyntaxNode& type, std::size_t from) {
        std::size_t k = from;
        while (k < n_) {
            if (punct(k, '}')) {
                if (k > from)
                    type.children.push_back(make(SyntaxKind::EnumConstants, from, k - 1));
                return k;
            }
            if (punct(k, ';')) {
                if (k > from)
                    type.children.push_back(make(SyntaxKind::EnumConstants, from, k));
                return k + 1;
            }
            if (punct(k, '(')) {
                GroupEnd g = skip_parens(k);
                if (!g.ok) {
                    if (g.index >= n_)
                        break;
                    type.children.push_back(
                        make(SyntaxKind::Error, from, punct(g.index, ';') ? g.index : g.index - 1));
                    return punct(g.index, ';') ? g.index + 1 : g.index;
                }
                k = g.index + 1;
                continue;
            }
            if (punct(k, '{')) {
                const std::size_t close = skip_braces(k);
                if (close == npos)
                    break;
                k = close + 1;
                continue;
            }
            ++k;
        }
        if (from < n_)
            type.children.push_back(make(SyntaxKind::Error, from, n_ - 1));
        return n_;
    }

    std::string_view src_;
    const std::vector<Token>& t_;
    std::size_t n_;
};

void collect_errors(const SyntaxNode& node, std::vector<const SyntaxNode*>& out) {
    if (node.kind == SyntaxKind::Error)
        out.push_back(&node);
    for (const auto& child : node.children)
        collect_errors(child, out);
}

} // namespace

std::string_view to_string(SyntaxKind kind) noexcept {
    switch (kind) {
    case SyntaxKind::CompilationUnit: return "CompilationUnit";
    case SyntaxKind::PackageDeclaration: return "PackageDeclaration";
    case SyntaxKind::ImportDeclaration: return "ImportDeclaration";
    case SyntaxKind::TypeDeclaration: return "TypeDeclaration";
    case SyntaxKind::FieldDeclaration: return "FieldDeclaration";
    case SyntaxKind::MethodDeclaration: return "MethodDeclaration";
    case SyntaxKind::ConstructorDeclaration: return "ConstructorDeclaration";
    case SyntaxKind::Initializer: return "Initializer";
    case SyntaxKind::EnumConstants: return "EnumConstants";
    case SyntaxKind::Error: return "Error";
    }
    return "?";
}

LexResult lex(std::string_view source) { return Lexer(source).run(); }

CompilationUnit::CompilationUnit(std::string file_path, std::string source)
    : file_path_(std::move(file_path)), source_(std::move(source)), lex_(lex(source_)) {
    line_offsets_.push_back(0);
    for (std::size_t i = 0; i < source_.size(); ++i)
        if (source_[i] == '\n' && i + 1 < source_.size())
            line_offsets_.push_back(i + 1);
    if (source_.empty())
        line_offsets_.clear();
    line_offsets_.push_back(source_.size());

    root_ = Parser(source_, lex_.tokens).parse_unit();
    root_.line_start = 1;
    root_.line_end = std::max(1, line_count());
}

std::string_view CompilationUnit::lines(int first, int last) const {
    if (first < 1 || last < first || last > line_count())
        return {};
    const std::size_t b = line_offsets_[static_cast<std::size_t>(first - 1)];
    const std::size_t e = line_offsets_[static_cast<std::size_t>(last)];
    return std::string_view(source_).substr(b, e - b);
}

std::string_view CompilationUnit::token_text(std::size_t index) const {
    const Token& t = lex_.tokens.at(index);
    return std::string_view(source_).substr(t.begin, t.end - t.begin);
}

std::string_view CompilationUnit::node_text(const SyntaxNode& node) const {
    if (lex_.tokens.empty())
        return {};
    const std::size_t b = lex_.tokens.at(node.first_token).begin;
    const std::size_t e = lex_.tokens.at(node.last_token).end;
    return std::string_view(source_).substr(b, e - b);
}

int CompilationUnit::leading_line(const SyntaxNode& node) const {
    const auto& toks = lex_.tokens;
    if (toks.empty())
        return node.line_start;
    const std::size_t f = node.first_token;
    const std::size_t prev_end = f > 0 ? toks[f - 1].end : 0;
    const int prev_line = f > 0 ? toks[f - 1].end_line : 0;
    int line = node.line_start;
    auto it = std::lower_bound(lex_.comments.begin(), lex_.comments.end(), prev_end,
                               [](const Comment& c, std::size_t pos) { return c.begin < pos; });
    for (; it != lex_.comments.end() && it->end <= toks[f].begin; ++it)
        if (it->line > prev_line)
            line = std::min(line, it->line);
    return line;
}

std::vector<const SyntaxNode*> CompilationUnit::errors() const {
    std::vector<const SyntaxNode*> out;
    collect_errors(root_, out);
    return out;
}

std::vector<CompilationUnit> parse_source(std::string file_path, std::string source) {
    if (const auto nul = source.find('\0'); nul != std::string::npos) {
        const int line = 1 + static_cast<int>(std::count(source.begin(), source.begin() + nul, '\n'));
        throw ParseError(file_path, line, "binary content (NUL byte) in source file");
    }
    std::vector<CompilationUnit> units;
    units.emplace_back(std::move(file_path), std::move(source));
    return units;
}

} // namespace vulnreach::java
