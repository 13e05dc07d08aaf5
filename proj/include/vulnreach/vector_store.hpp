#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "vulnreach/core.hpp"

namespace vulnreach {

struct StoreEntry {
    CodeBlock block;
    EmbeddingVector vector;
};

/// Metadata constraints for a search. Absent fields match everything.
struct ScopeFilter {
    std::optional<std::string> class_name;  // enclosing class, simple or dotted suffix
    std::optional<std::string> method_name; // enclosing method, exact
    std::optional<std::string> file_glob;   // glob over the block's relative path

    bool empty() const noexcept { return !class_name && !method_name && !file_glob; }
    bool matches(const CodeBlock& block) const;

    bool operator==(const ScopeFilter&) const = default;
};

struct SearchHit {
    CodeBlock block;
    double score = 0.0;
};

/// Provenance recorded in the index sidecar.
struct IndexInfo {
    std::string encoder;
    std::string tokenizer;
    unsigned theta = 0;
    std::string corpus_hash;

    bool operator==(const IndexInfo&) const = default;
};

/// (block, vector) pairs with exact cosine top-k search.
///
/// On disk a store is two files: `<path>` holds a versioned binary header and
/// fixed-width vector records; `<path>.meta.json` holds the block metadata in
/// record order. Readers may run concurrently; insert takes an exclusive lock.
class VectorStore {
public:
    static constexpr char kMagic[6] = {'V', 'R', 'I', 'D', 'X', '\0'};
    static constexpr std::uint8_t kFormatVersion = 1;
    static constexpr std::size_t kIdField = 32;

    /// Store that lives only in memory.
    explicit VectorStore(Eigen::Index dims, IndexInfo info = {});

    /// Creates (or truncates) the store files at `path`.
    static VectorStore create(const std::string& path, Eigen::Index dims, IndexInfo info = {});
    /// Opens an existing store. Throws FormatError for corrupt or newer files.
    static VectorStore open(const std::string& path);

    static std::string sidecar_path(const std::string& path) { return path + ".meta.json"; }

    Eigen::Index dims() const noexcept { return dims_; }
    std::size_t count() const;
    bool empty() const { return count() == 0; }
    const IndexInfo& info() const noexcept { return info_; }
    const std::string& path() const noexcept { return path_; }

    /// Adds entries and persists when file-backed. Entries already stored with
    /// an identical vector are skipped. Returns how many were new.
    /// Throws DimsMismatch or DuplicateIdConflict without modifying the store.
    std::size_t insert(std::span<const StoreEntry> entries);

    /// Entries in scope with score >= tau, best first, ties by (file_path,
    /// line_start, id), at most k. Requires 0 <= tau <= 1.
    std::vector<SearchHit> search(const EmbeddingVector& query, std::size_t k, double tau,
                                  const ScopeFilter& scope = {}) const;

    /// Cosine between `query` and the stored vector for `block_id`, if present.
    std::optional<double> similarity(const std::string& block_id, const EmbeddingVector& query) const;

    std::optional<CodeBlock> find(const std::string& block_id) const;
    std::vector<StoreEntry> entries() const;

private:
    VectorStore(std::string path, Eigen::Index dims, IndexInfo info);
    void persist() const;

    std::string path_;
    Eigen::Index dims_;
    IndexInfo info_;
    std::vector<CodeBlock> blocks_;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> vectors_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::unique_ptr<std::shared_mutex> mutex_ = std::make_unique<std::shared_mutex>();
};

/// Scores every row of `rows` against `query`: the dense kernel behind search.
template <typename RowsDerived, typename QueryDerived>
Eigen::VectorXd score_rows(const Eigen::MatrixBase<RowsDerived>& rows, const Eigen::MatrixBase<QueryDerived>& query) {
    return rows * query;
}

bool glob_matches_path(const std::string& glob, const std::string& path);

} // namespace vulnreach
