#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vulnreach/core.hpp"
#include "vulnreach/vector_store.hpp"

namespace vulnreach::testing {

std::filesystem::path fixture_dir();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "vr");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& text);

/// Random but reproducible Java sources: packages, imports, comments, fields,
/// constructors, methods of varying length, nested and local types, enums,
/// interfaces, records, annotations, text blocks and the odd blank line.
class JavaCorpusGenerator {
public:
    explicit JavaCorpusGenerator(std::uint32_t seed) : rng_(seed) {}

    /// One compilation unit of roughly `target_tokens` lexical tokens.
    std::string file(const std::string& class_name, std::size_t target_tokens);

    /// Writes `count` files below `root` and returns their relative paths.
    std::vector<std::string> write_corpus(const std::filesystem::path& root, std::size_t count);

private:
    std::uint32_t pick(std::uint32_t n) { return static_cast<std::uint32_t>(rng_() % n); }
    bool chance(std::uint32_t percent) { return pick(100) < percent; }
    std::string ident(const char* prefix);
    std::string statement(int depth);
    std::string method(const std::string& cls, std::size_t statements, const std::string& indent);
    std::string type_body(const std::string& cls, std::size_t target_tokens, const std::string& indent, int depth);

    std::mt19937 rng_;
    unsigned counter_ = 0;
};

/// Concatenation of the block sources of one file, in line order.
std::string reassemble(const std::vector<CodeBlock>& blocks, const std::string& file_path);

struct LawReport {
    std::vector<std::string> violations;
    std::size_t blocks = 0;
};

/// Segments each file with `theta` and checks coverage, reassembly, the
/// threshold law and block metadata consistency.
LawReport check_segmentation_laws(const std::filesystem::path& root, const std::vector<std::string>& files,
                                  unsigned theta);

/// Per-file block counts for each theta in `thetas`; violations list every
/// file whose count grows with theta.
LawReport check_monotonicity(const std::filesystem::path& root, const std::vector<std::string>& files,
                             const std::vector<unsigned>& thetas);

/// Synthetic block with a unique id; metadata varies with `i`.
CodeBlock synthetic_block(std::size_t i);

/// Random unit vector of `dims` components.
EmbeddingVector random_unit(std::mt19937& rng, Eigen::Index dims);

/// Top-k by a plain loop over every entry: the reference for VectorStore::search.
std::vector<SearchHit> brute_force_search(const std::vector<StoreEntry>& entries, const EmbeddingVector& query,
                                          std::size_t k, double tau, const ScopeFilter& scope = {});

/// Empty when `got` equals `want` in order (ids exact, scores within `tol`), else a description.
std::string compare_hits(const std::vector<SearchHit>& got, const std::vector<SearchHit>& want, double tol);

} // namespace vulnreach::testing
