#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "vulnreach/embedding.hpp"
#include "vulnreach/segmenter.hpp"
#include "vulnreach/vector_store.hpp"

namespace vulnreach {

struct IndexResult {
    VectorStore store;
    std::vector<FileError> errors;
    std::size_t file_count = 0;
};

/// Hex FNV-1a over every block's path and source, in block order. Two
/// segmentations of the same files with the same theta hash equal.
std::string corpus_hash(std::span<const CodeBlock> blocks);

/// Segments the project under `root`, embeds every block and stores the result.
/// With `out_path` the store is written to disk, otherwise it stays in memory.
IndexResult index_project(const std::filesystem::path& root, const SegmenterConfig& cfg, EncoderProvider& encoder,
                          const std::optional<std::string>& out_path = std::nullopt, const RetryPolicy& retry = {});

/// Same, for blocks that are already segmented.
VectorStore index_blocks(std::span<const CodeBlock> blocks, unsigned theta, EncoderProvider& encoder,
                         const std::optional<std::string>& out_path = std::nullopt, const RetryPolicy& retry = {});

} // namespace vulnreach
