#include "vulnreach/indexer.hpp"

#include "vulnreach/hash.hpp"

namespace vulnreach {

std::string corpus_hash(std::span<const CodeBlock> blocks) {
    std::uint64_t h = kFnvOffset;
    for (const auto& b : blocks) {
        h = fnv1a64(b.file_path, h);
        h = fnv1a64(std::string_view("\0", 1), h);
        h = fnv1a64(b.source, h);
    }
    return to_hex(h);
}

VectorStore index_blocks(std::span<const CodeBlock> blocks, unsigned theta, EncoderProvider& encoder,
                         const std::optional<std::string>& out_path, const RetryPolicy& retry) {
    IndexInfo info{encoder.name(), std::string(default_tokenizer().name()), theta, corpus_hash(blocks)};

    std::vector<std::string> texts;
    texts.reserve(blocks.size());
    for (const auto& b : blocks)
        texts.push_back(b.source);
    // Blocks that are only whitespace cannot be embedded and are never useful hits.
    std::vector<std::size_t> keep;
    std::vector<std::string> kept_texts;
    for (std::size_t i = 0; i < texts.size(); ++i)
        if (!normalize_for_encoding(texts[i]).empty()) {
            keep.push_back(i);
            kept_texts.push_back(std::move(texts[i]));
        }
    const auto vectors = embed(encoder, kept_texts, retry);

    std::vector<StoreEntry> entries;
    entries.reserve(keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j)
        entries.push_back(StoreEntry{blocks[keep[j]], vectors[j]});

    VectorStore store = out_path ? VectorStore::create(*out_path, encoder.dims(), info)
                                 : VectorStore(encoder.dims(), info);
    store.insert(entries);
    return store;
}

IndexResult index_project(const std::filesystem::path& root, const SegmenterConfig& cfg, EncoderProvider& encoder,
                          const std::optional<std::string>& out_path, const RetryPolicy& retry) {
    ProjectSegments seg = segment_project(root, cfg);
    VectorStore store = index_blocks(seg.blocks, cfg.theta, encoder, out_path, retry);
    return IndexResult{std::move(store), std::move(seg.errors), seg.file_count};
}

} // namespace vulnreach
