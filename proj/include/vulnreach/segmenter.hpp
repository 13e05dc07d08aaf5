#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vulnreach/core.hpp"
#include "vulnreach/java_syntax.hpp"
#include "vulnreach/tokenizer.hpp"

namespace vulnreach {

enum class Language { Java };

struct SegmenterConfig {
    static constexpr unsigned kDefaultTheta = 2500;

    /// Maximum block size in tokens for the single-block branch.
    unsigned theta = kDefaultTheta;
    Language language = Language::Java;
    /// Matched against each path suffix that starts at a directory boundary,
    /// so "target/*" skips any `target` directory.
    std::vector<std::string> ignore_globs{".git/*", "target/*"};
    /// Worker threads for segment_project; 0 picks the hardware concurrency.
    unsigned threads = 0;

    /// Throws ConfigError for theta == 0.
    void validate() const;
};

/// Splits one compilation unit into line-aligned blocks.
///
/// Units smaller than theta tokens become a single CompilationUnit block.
/// Larger units are split into import, field, method and constructor blocks;
/// everything else is grouped into Other blocks, one per contiguous run.
/// Lines holding only trivia (blank lines, comments, `}` and `;`) are folded
/// into the preceding block. The result covers every line exactly once.
std::vector<CodeBlock> segment_unit(const java::CompilationUnit& unit, const SegmenterConfig& cfg,
                                    const Tokenizer& tokenizer = default_tokenizer());

/// parse_source + segment_unit for one in-memory file.
std::vector<CodeBlock> segment_source(const std::string& file_path, const std::string& source,
                                      const SegmenterConfig& cfg, const Tokenizer& tokenizer = default_tokenizer());

struct FileError {
    std::string file_path;
    std::string message;
};

struct ProjectSegments {
    std::vector<CodeBlock> blocks; // ordered by (file_path, line_start)
    std::vector<FileError> errors;
    std::size_t file_count = 0;
};

/// True when `relative_path` (with '/' separators) matches one of the globs.
bool is_ignored(const std::string& relative_path, const std::vector<std::string>& globs);

/// Relative paths of all `*.java` files under `root`, sorted, ignore globs applied.
std::vector<std::string> discover_sources(const std::filesystem::path& root, const std::vector<std::string>& globs);

/// Segments every Java file under `root`. Unreadable or unparseable files are
/// reported in `errors`; throws EmptyProject when no source file is found and
/// IoError when `root` is not a readable directory.
ProjectSegments segment_project(const std::filesystem::path& root, const SegmenterConfig& cfg,
                                const Tokenizer& tokenizer = default_tokenizer());

} // namespace vulnreach
