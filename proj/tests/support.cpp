#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "vulnreach/segmenter.hpp"
#include "vulnreach/tokenizer.hpp"

namespace vulnreach::testing {

namespace fs = std::filesystem;

fs::path fixture_dir() { return fs::path(VULNREACH_FIXTURES); }

TempDir::TempDir(const std::string& tag) {
    static std::atomic<unsigned> n{0};
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(n++) + "-" + std::to_string(std::random_device{}()));
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string JavaCorpusGenerator::ident(const char* prefix) { return prefix + std::to_string(counter_++); }

std::string JavaCorpusGenerator::statement(int depth) {
    const std::string v = ident("v");
    switch (pick(depth < 2 ? 8 : 5)) {
    case 0:
        return "int " + v + " = " + std::to_string(pick(1000)) + " + count * " + std::to_string(pick(9) + 1) + ";";
    case 1:
        return "String " + v + " = \"value " + std::to_string(pick(100)) + " { not a brace }\";";
    case 2:
        return "helper(" + std::to_string(pick(50)) + ", \"" + v + "\");";
    case 3:
        return "// note about " + v + " with a stray } brace";
    case 4:
        return "total += items.size() > " + std::to_string(pick(10)) + " ? 1 : 0;";
    case 5:
        return "if (count > " + std::to_string(pick(100)) + ") {\n    " + statement(depth + 1) + "\n} else {\n    " +
               statement(depth + 1) + "\n}";
    case 6:
        return "for (int i = 0; i < " + std::to_string(pick(20) + 1) + "; i++) {\n    " + statement(depth + 1) +
               "\n    " + statement(depth + 1) + "\n}";
    default:
        return "Runnable " + v + " = () -> {\n    " + statement(depth + 1) + "\n};";
    }
}

std::string JavaCorpusGenerator::method(const std::string& cls, std::size_t statements, const std::string& indent) {
    std::string out;
    if (chance(40))
        out += indent + "/**\n" + indent + " * Does some work.\n" + indent + " */\n";
    if (chance(25))
        out += indent + "@Override\n";
    const bool ctor = chance(12);
    const std::string name = ctor ? cls : ident("method");
    out += indent + (chance(50) ? "public " : "private ") + (ctor ? "" : (chance(50) ? "int " : "void ")) + name +
           "(int count, java.util.List<String> items)" + (chance(20) ? " throws Exception" : "") + " {\n";
    std::string body;
    for (std::size_t i = 0; i < statements; ++i)
        body += statement(0) + "\n";
    if (out.find(" int " + name) != std::string::npos)
        body += "return total;\n";
    std::size_t pos = 0;
    while (pos < body.size()) {
        std::size_t nl = body.find('\n', pos);
        out += indent + "    " + body.substr(pos, nl - pos) + "\n";
        pos = nl + 1;
    }
    out += indent + "}\n";
    return out;
}

std::string JavaCorpusGenerator::type_body(const std::string& cls, std::size_t target_tokens,
                                           const std::string& indent, int depth) {
    const auto& tok = default_tokenizer();
    std::string out;
    out += indent + "private int total = 0;\n";
    if (chance(50))
        out += indent + "private static final String NAME = \"" + cls + "\";\n";
    if (chance(30))
        out += indent + "private final java.util.Map<String, Integer> cache =\n" + indent +
               "        new java.util.HashMap<>();\n";
    out += "\n";
    while (tok.count(out) < target_tokens) {
        const std::uint32_t what = pick(100);
        if (what < 70) {
            out += method(cls, 2 + pick(chance(15) ? 120 : 14), indent) + "\n";
        } else if (what < 78 && depth < 2) {
            const std::string inner = ident("Inner");
            out += indent + "static class " + inner + " {\n" +
                   type_body(inner, 40 + pick(chance(20) ? 1500 : 200), indent + "    ", depth + 1) + indent + "}\n\n";
        } else if (what < 84) {
            out += indent + "enum " + ident("Mode") + " { FAST, SLOW, NONE }\n\n";
        } else if (what < 88) {
            out += indent + "interface " + ident("Listener") + " {\n" + indent + "    void onEvent(String e);\n" +
                   indent + "}\n\n";
        } else if (what < 92) {
            out += indent + "record " + ident("Pair") + "(int left, int right) {}\n\n";
        } else if (what < 96) {
            out += indent + "static {\n" + indent + "    System.setProperty(\"k\", \"v\");\n" + indent + "}\n\n";
        } else {
            out += indent + "private static final String " + ident("TEXT") + " = \"\"\"\n" + indent +
                   "    multi-line } text { block\n" + indent + "    \"\"\";\n\n";
        }
    }
    return out;
}

std::string JavaCorpusGenerator::file(const std::string& class_name, std::size_t target_tokens) {
    std::string out;
    if (chance(60))
        out += "/*\n * Generated fixture " + class_name + ".\n */\n";
    out += "package fixture.gen" + std::to_string(pick(5)) + ";\n\n";
    const std::size_t imports = pick(6);
    for (std::size_t i = 0; i < imports; ++i)
        out += "import java.util." + ident("Type") + ";\n";
    if (imports)
        out += "\n";
    if (chance(30))
        out += "@SuppressWarnings(\"unchecked\")\n";
    out += "public class " + class_name + (chance(30) ? " extends Base" : "") + " {\n\n";
    out += type_body(class_name, target_tokens, "    ", 0);
    out += "}\n";
    if (chance(15))
        out += "\nclass " + class_name + "Helper {\n    int helper() { return 1; }\n}\n";
    if (chance(10))
        out += "\n// trailing comment\n";
    return out;
}

std::vector<std::string> JavaCorpusGenerator::write_corpus(const fs::path& root, std::size_t count) {
    std::vector<std::string> paths;
    for (std::size_t i = 0; i < count; ++i) {
        const std::string cls = "Gen" + std::to_string(i);
        // Spread sizes over the whole threshold grid.
        const std::size_t target = 50 + pick(7000);
        const std::string rel = "src/main/java/fixture/p" + std::to_string(i % 4) + "/" + cls + ".java";
        write_text(root / rel, file(cls, target));
        paths.push_back(rel);
    }
    std::sort(paths.begin(), paths.end());
    return paths;
}

std::string reassemble(const std::vector<CodeBlock>& blocks, const std::string& file_path) {
    std::vector<const CodeBlock*> mine;
    for (const auto& b : blocks)
        if (b.file_path == file_path)
            mine.push_back(&b);
    std::sort(mine.begin(), mine.end(), [](auto* a, auto* b) { return a->line_start < b->line_start; });
    std::string out;
    for (const auto* b : mine)
        out += b->source;
    return out;
}

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int count_lines(const std::string& text) {
    if (text.empty())
        return 0;
    int n = 1;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n' && i + 1 < text.size())
            ++n;
        else if (text[i] == '\r' && i + 1 < text.size() && text[i + 1] != '\n')
            ++n;
    }
    return n;
}

} // namespace

LawReport check_segmentation_laws(const fs::path& root, const std::vector<std::string>& files, unsigned theta) {
    LawReport r;
    SegmenterConfig cfg;
    cfg.theta = theta;
    const auto& tok = default_tokenizer();
    auto fail = [&](const std::string& file, const std::string& what) {
        r.violations.push_back(file + " (theta " + std::to_string(theta) + "): " + what);
    };
    for (const auto& rel : files) {
        const std::string text = slurp(root / rel);
        const auto blocks = segment_source(rel, text, cfg);
        r.blocks += blocks.size();
        const int lines = count_lines(text);

        // Coverage: ranges tile [1, lines] in order.
        int expected_start = 1;
        for (const auto& b : blocks) {
            if (b.line_start != expected_start)
                fail(rel, "block starts at " + std::to_string(b.line_start) + ", expected " +
                              std::to_string(expected_start));
            if (b.line_end < b.line_start)
                fail(rel, "empty range");
            expected_start = b.line_end + 1;
        }
        if (expected_start != lines + 1)
            fail(rel, "coverage ends at " + std::to_string(expected_start - 1) + " of " + std::to_string(lines));

        if (reassemble(blocks, rel) != text)
            fail(rel, "reassembly differs");

        const std::size_t unit_tokens = tok.count(text);
        const bool single = blocks.size() == 1 && blocks[0].node_kind == NodeKind::CompilationUnit;
        if (unit_tokens < theta && !blocks.empty() && !single)
            fail(rel, "unit below theta was split");
        if (unit_tokens >= theta) {
            for (const auto& b : blocks)
                if (b.node_kind == NodeKind::CompilationUnit)
                    fail(rel, "unit at or above theta kept whole");
        }
        for (const auto& b : blocks) {
            if (b.size != tok.count(b.source))
                fail(rel, "size field disagrees with tokenizer");
            if (b.oversize != (b.size >= theta))
                fail(rel, "oversize flag wrong");
            if (single && b.size >= theta)
                fail(rel, "single-block branch produced a block at or above theta");
            if (b.id != make_block_id(b.file_path, b.line_start, b.line_end, b.node_kind))
                fail(rel, "id mismatch");
        }
    }
    return r;
}

LawReport check_monotonicity(const fs::path& root, const std::vector<std::string>& files,
                             const std::vector<unsigned>& thetas) {
    LawReport r;
    for (const auto& rel : files) {
        const std::string text = slurp(root / rel);
        std::size_t previous = std::numeric_limits<std::size_t>::max();
        for (unsigned theta : thetas) {
            SegmenterConfig cfg;
            cfg.theta = theta;
            const std::size_t n = segment_source(rel, text, cfg).size();
            r.blocks += n;
            if (n > previous)
                r.violations.push_back(rel + ": " + std::to_string(n) + " blocks at theta " + std::to_string(theta) +
                                       ", more than " + std::to_string(previous) + " at the previous theta");
            previous = n;
        }
    }
    return r;
}

CodeBlock synthetic_block(std::size_t i) {
    CodeBlock b;
    b.file_path = "src/p" + std::to_string(i % 7) + "/F" + std::to_string(i % 13) + ".java";
    b.line_start = static_cast<int>(i) + 1;
    b.line_end = b.line_start + static_cast<int>(i % 5);
    b.node_kind = (i % 3 == 0) ? NodeKind::MethodDeclaration : NodeKind::FieldDeclaration;
    b.enclosing_class = (i % 4 == 0) ? std::optional<std::string>("Outer.C" + std::to_string(i % 3))
                                     : std::optional<std::string>("C" + std::to_string(i % 3));
    if (b.node_kind == NodeKind::MethodDeclaration)
        b.enclosing_method = "m" + std::to_string(i % 6);
    b.source = "// block " + std::to_string(i) + "\n";
    b.size = 4;
    b.id = make_block_id(b.file_path, b.line_start, b.line_end, b.node_kind);
    return b;
}

EmbeddingVector random_unit(std::mt19937& rng, Eigen::Index dims) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd v(dims);
    for (Eigen::Index d = 0; d < dims; ++d)
        v[d] = g(rng);
    return EmbeddingVector::normalized(v);
}

std::vector<SearchHit> brute_force_search(const std::vector<StoreEntry>& entries, const EmbeddingVector& query,
                                          std::size_t k, double tau, const ScopeFilter& scope) {
    std::vector<SearchHit> all;
    for (const auto& e : entries) {
        double dot = 0.0;
        for (Eigen::Index d = 0; d < query.dims(); ++d)
            dot += e.vector.values()[d] * query.values()[d];
        if (dot >= tau && scope.matches(e.block))
            all.push_back(SearchHit{e.block, dot});
    }
    std::stable_sort(all.begin(), all.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score)
            return a.score > b.score;
        if (a.block.file_path != b.block.file_path)
            return a.block.file_path < b.block.file_path;
        if (a.block.line_start != b.block.line_start)
            return a.block.line_start < b.block.line_start;
        return a.block.id < b.block.id;
    });
    if (all.size() > k)
        all.resize(k);
    return all;
}

std::string compare_hits(const std::vector<SearchHit>& got, const std::vector<SearchHit>& want, double tol) {
    if (got.size() != want.size())
        return "got " + std::to_string(got.size()) + " hits, want " + std::to_string(want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        if (std::abs(got[i].score - want[i].score) > tol)
            return "score " + std::to_string(i) + " differs: " + std::to_string(got[i].score) + " vs " +
                   std::to_string(want[i].score);
        if (got[i].block.id == want[i].block.id)
            continue;
        // Accept a swap only between scores that tie within tolerance.
        bool tied = false;
        for (const auto& w : want)
            tied = tied || (w.block.id == got[i].block.id && std::abs(w.score - got[i].score) <= tol);
        if (!tied)
            return "rank " + std::to_string(i) + ": " + got[i].block.id + " vs " + want[i].block.id;
    }
    return {};
}

} // namespace vulnreach::testing
