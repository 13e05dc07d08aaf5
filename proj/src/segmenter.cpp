#include "vulnreach/segmenter.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <atomic>
#include <optional>
#include <thread>

#include "vulnreach/errors.hpp"
#include "vulnreach/json_io.hpp"

namespace vulnreach {

namespace fs = std::filesystem;
using java::SyntaxKind;
using java::SyntaxNode;

void SegmenterConfig::validate() const {
    if (theta < 1)
        throw ConfigError("theta must be >= 1");
}

namespace {

struct Piece {
    NodeKind kind;
    int line_start;
    int line_end;
    std::optional<std::string> enclosing_class;
    std::optional<std::string> enclosing_method;
};

struct Span {
    NodeKind kind;
    int line_start;
    int line_end;
    std::optional<std::string> enclosing_class;
    std::optional<std::string> enclosing_method;
};

class PieceCollector {
public:
    PieceCollector(const java::CompilationUnit& unit, const SegmenterConfig& cfg, const Tokenizer& tokenizer)
        : unit_(unit), cfg_(cfg), tokenizer_(tokenizer) {}

    std::vector<Piece> collect() {
        for (const SyntaxNode& child : unit_.root().children) {
            switch (child.kind) {
            case SyntaxKind::ImportDeclaration:
                add(child, NodeKind::ImportDeclaration, std::nullopt, std::nullopt);
                break;
            case SyntaxKind::TypeDeclaration:
                decompose(child, child.name);
                break;
            default:
                add(child, NodeKind::Other, std::nullopt, std::nullopt);
                break;
            }
        }
        return std::move(pieces_);
    }

private:
    void add(const SyntaxNode& node, NodeKind kind, std::optional<std::string> cls, std::optional<std::string> method) {
        pieces_.push_back(Piece{kind, unit_.leading_line(node), node.line_end, std::move(cls), std::move(method)});
    }

    void decompose(const SyntaxNode& type, const std::string& qualified) {
        const auto& tokens = unit_.tokens();
        // Type header: annotations and modifiers through the opening brace.
        SyntaxNode header = type;
        header.last_token = type.body_open;
        header.line_end = tokens[type.body_open].end_line;
        add(header, NodeKind::Other, qualified, std::nullopt);

        for (const SyntaxNode& m : type.children) {
            switch (m.kind) {
            case SyntaxKind::FieldDeclaration:
                add(m, NodeKind::FieldDeclaration, qualified, std::nullopt);
                break;
            case SyntaxKind::MethodDeclaration:
                add(m, NodeKind::MethodDeclaration, qualified, m.name);
                break;
            case SyntaxKind::ConstructorDeclaration:
                add(m, NodeKind::ConstructorDeclaration, qualified, m.name);
                break;
            case SyntaxKind::TypeDeclaration: {
                const std::string nested = qualified + "." + m.name;
                if (tokenizer_.count(unit_.node_text(m)) >= cfg_.theta)
                    decompose(m, nested);
                else
                    add(m, NodeKind::Other, nested, std::nullopt);
                break;
            }
            default:
                add(m, NodeKind::Other, qualified, std::nullopt);
                break;
            }
        }
    }

    const java::CompilationUnit& unit_;
    const SegmenterConfig& cfg_;
    const Tokenizer& tokenizer_;
    std::vector<Piece> pieces_;
};

// Turns ordered pieces into disjoint line spans that cover [1, line_count].
std::vector<Span> assign_lines(const std::vector<Piece>& pieces, int line_count) {
    std::vector<Span> spans;
    for (const Piece& p : pieces) {
        if (!spans.empty()) {
            Span& back = spans.back();
            const bool same_run = (p.kind == NodeKind::Other && back.kind == NodeKind::Other) ||
                                  (p.kind == NodeKind::ImportDeclaration && back.kind == NodeKind::ImportDeclaration);
            if (same_run) {
                back.line_end = std::max(back.line_end, p.line_end);
                if (!back.enclosing_class)
                    back.enclosing_class = p.enclosing_class;
                continue;
            }
            const int start = std::max(p.line_start, back.line_end + 1);
            if (p.line_end < start)
                continue; // shares all its lines with the previous block
            spans.push_back(Span{p.kind, start, p.line_end, p.enclosing_class, p.enclosing_method});
            continue;
        }
        spans.push_back(Span{p.kind, p.line_start, p.line_end, p.enclosing_class, p.enclosing_method});
    }
    if (spans.empty())
        return spans;
    spans.front().line_start = 1;
    for (std::size_t i = 1; i < spans.size(); ++i)
        spans[i - 1].line_end = spans[i].line_start - 1;
    spans.back().line_end = line_count;
    return spans;
}

CodeBlock make_block(const java::CompilationUnit& unit, const Span& span, const SegmenterConfig& cfg,
                     const Tokenizer& tokenizer) {
    CodeBlock b;
    b.file_path = unit.file_path();
    b.line_start = span.line_start;
    b.line_end = span.line_end;
    b.node_kind = span.kind;
    b.source = std::string(unit.lines(span.line_start, span.line_end));
    b.enclosing_class = span.enclosing_class;
    b.enclosing_method = span.enclosing_method;
    b.size = static_cast<std::uint32_t>(tokenizer.count(b.source));
    b.oversize = b.size >= cfg.theta;
    b.id = make_block_id(b.file_path, b.line_start, b.line_end, b.node_kind);
    return b;
}

std::optional<std::string> first_type_name(const java::CompilationUnit& unit) {
    for (const SyntaxNode& child : unit.root().children)
        if (child.kind == SyntaxKind::TypeDeclaration && !child.name.empty())
            return child.name;
    return std::nullopt;
}

} // namespace

std::vector<CodeBlock> segment_unit(const java::CompilationUnit& unit, const SegmenterConfig& cfg,
                                    const Tokenizer& tokenizer) {
    cfg.validate();
    const std::string_view text = unit.source();
    if (text.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos)
        return {};

    const int lines = unit.line_count();
    if (tokenizer.count(text) < cfg.theta) {
        Span whole{NodeKind::CompilationUnit, 1, lines, first_type_name(unit), std::nullopt};
        return {make_block(unit, whole, cfg, tokenizer)};
    }

    std::vector<Span> spans = assign_lines(PieceCollector(unit, cfg, tokenizer).collect(), lines);
    if (spans.empty()) // nothing but comments
        spans.push_back(Span{NodeKind::Other, 1, lines, std::nullopt, std::nullopt});

    std::vector<CodeBlock> blocks;
    blocks.reserve(spans.size());
    for (const Span& s : spans)
        blocks.push_back(make_block(unit, s, cfg, tokenizer));
    return blocks;
}

std::vector<CodeBlock> segment_source(const std::string& file_path, const std::string& source,
                                      const SegmenterConfig& cfg, const Tokenizer& tokenizer) {
    std::vector<CodeBlock> out;
    for (const auto& unit : java::parse_source(file_path, source)) {
        auto blocks = segment_unit(unit, cfg, tokenizer);
        out.insert(out.end(), std::make_move_iterator(blocks.begin()), std::make_move_iterator(blocks.end()));
    }
    return out;
}

bool is_ignored(const std::string& relative_path, const std::vector<std::string>& globs) {
    for (const auto& glob : globs) {
        std::size_t pos = 0;
        while (true) {
            if (fnmatch(glob.c_str(), relative_path.c_str() + pos, 0) == 0)
                return true;
            const std::size_t slash = relative_path.find('/', pos);
            if (slash == std::string::npos)
                break;
            pos = slash + 1;
        }
    }
    return false;
}

std::vector<std::string> discover_sources(const fs::path& root, const std::vector<std::string>& globs) {
    std::error_code ec;
    if (!fs::is_directory(root, ec))
        throw IoError("not a readable directory: " + root.string());
    std::vector<std::string> files;
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
    if (ec)
        throw IoError("cannot list " + root.string() + ": " + ec.message());
    for (const fs::recursive_directory_iterator end; it != end; it.increment(ec)) {
        if (ec)
            break;
        if (!it->is_regular_file(ec) || it->path().extension() != ".java")
            continue;
        std::string rel = fs::relative(it->path(), root, ec).generic_string();
        if (ec || is_ignored(rel, globs))
            continue;
        files.push_back(std::move(rel));
    }
    std::sort(files.begin(), files.end());
    return files;
}

ProjectSegments segment_project(const fs::path& root, const SegmenterConfig& cfg, const Tokenizer& tokenizer) {
    cfg.validate();
    const std::vector<std::string> files = discover_sources(root, cfg.ignore_globs);
    if (files.empty())
        throw EmptyProject();

    struct Result {
        std::vector<CodeBlock> blocks;
        std::optional<FileError> error;
    };
    std::vector<Result> results(files.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < files.size(); i = next++) {
            try {
                const std::string source = read_file((root / files[i]).string());
                results[i].blocks = segment_source(files[i], source, cfg, tokenizer);
            } catch (const Error& e) {
                results[i].error = FileError{files[i], e.what()};
            }
        }
    };
    unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(files.size()));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t)
            pool.emplace_back(work);
        work();
    }

    ProjectSegments out;
    out.file_count = files.size();
    for (auto& r : results) {
        if (r.error)
            out.errors.push_back(std::move(*r.error));
        out.blocks.insert(out.blocks.end(), std::make_move_iterator(r.blocks.begin()),
                          std::make_move_iterator(r.blocks.end()));
    }
    std::stable_sort(out.blocks.begin(), out.blocks.end(), block_location_less);
    return out;
}

} // namespace vulnreach
