#pragma once

// Error-tolerant, declaration-level Java parser.
//
// The parser recognizes package/import declarations, type declarations
// (class, interface, enum, record, @interface) and their members. Method and
// initializer bodies are skipped by brace matching; their contents are not
// parsed. Malformed regions become Error nodes and parsing resumes at the
// next recognizable boundary, so every token ends up inside exactly one node.

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace vulnreach::java {

enum class TokenKind { Identifier, Number, String, Char, TextBlock, Punct };

struct Token {
    TokenKind kind = TokenKind::Punct;
    std::size_t begin = 0;
    std::size_t end = 0;
    int line = 1;
    int end_line = 1;
};

struct Comment {
    std::size_t begin = 0;
    std::size_t end = 0;
    int line = 1;
    int end_line = 1;
};

struct LexResult {
    std::vector<Token> tokens;
    std::vector<Comment> comments;
};

LexResult lex(std::string_view source);

enum class SyntaxKind {
    CompilationUnit,
    PackageDeclaration,
    ImportDeclaration,
    TypeDeclaration,
    FieldDeclaration,
    MethodDeclaration,
    ConstructorDeclaration,
    Initializer,
    EnumConstants,
    Error,
};

std::string_view to_string(SyntaxKind kind) noexcept;

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

struct SyntaxNode {
    SyntaxKind kind = SyntaxKind::Error;
    std::string name;
    std::size_t first_token = 0;
    std::size_t last_token = 0; // inclusive
    int line_start = 1;
    int line_end = 1;
    // Type declarations only: token indices of the body braces. body_close is
    // npos when the file ends before the body is closed.
    std::size_t body_open = npos;
    std::size_t body_close = npos;
    std::vector<SyntaxNode> children;

    bool empty_range() const noexcept { return first_token > last_token; }
};

/// One parsed source file. Owns its text; nodes refer into it by token index.
class CompilationUnit {
public:
    CompilationUnit(std::string file_path, std::string source);

    const std::string& file_path() const noexcept { return file_path_; }
    std::string_view source() const noexcept { return source_; }
    const std::vector<Token>& tokens() const noexcept { return lex_.tokens; }
    const std::vector<Comment>& comments() const noexcept { return lex_.comments; }
    const SyntaxNode& root() const noexcept { return root_; }

    /// Number of lines; 0 for empty text. A trailing newline does not open a new line.
    int line_count() const noexcept { return static_cast<int>(line_offsets_.size()) - 1; }

    /// Byte range [begin, end) of lines first..last (1-based, inclusive), terminators included.
    std::string_view lines(int first, int last) const;

    std::string_view token_text(std::size_t index) const;
    /// Source text from the first to the last token of `node`.
    std::string_view node_text(const SyntaxNode& node) const;

    /// First line of `node` once the comments directly above it are included.
    int leading_line(const SyntaxNode& node) const;

    /// Error nodes anywhere in the tree, in source order.
    std::vector<const SyntaxNode*> errors() const;

private:
    std::string file_path_;
    std::string source_;
    LexResult lex_;
    std::vector<std::size_t> line_offsets_;
    SyntaxNode root_;
};

/// Parses one Java file. Always yields exactly one compilation unit; throws
/// ParseError only when the text is not source code at all (contains NUL).
std::vector<CompilationUnit> parse_source(std::string file_path, std::string source);

} // namespace vulnreach::java
