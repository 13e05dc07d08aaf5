#include "vulnreach/vector_store.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "vulnreach/errors.hpp"
#include "vulnreach/json_io.hpp"
#include "vulnreach/segmenter.hpp"

namespace vulnreach {

namespace {

constexpr std::size_t kHeaderSize = 20; // magic(5) version(1) reserved(2) dims(4) count(8)
constexpr double kSameVectorTolerance = 1e-9;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t at, int bytes = 8) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + static_cast<std::size_t>(i)])) << (8 * i);
    return v;
}

bool hit_before(const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score)
        return a.score > b.score;
    return std::tie(a.block.file_path, a.block.line_start, a.block.id) <
           std::tie(b.block.file_path, b.block.line_start, b.block.id);
}

} // namespace

void to_json(Json& j, const IndexInfo& info) {
    j = Json{{"encoder", info.encoder},
             {"tokenizer", info.tokenizer},
             {"theta", info.theta},
             {"corpus_hash", info.corpus_hash}};
}

void from_json(const Json& j, IndexInfo& info) {
    info.encoder = j.value("encoder", std::string{});
    info.tokenizer = j.value("tokenizer", std::string{});
    info.theta = j.value("theta", 0u);
    info.corpus_hash = j.value("corpus_hash", std::string{});
}

bool glob_matches_path(const std::string& glob, const std::string& path) { return is_ignored(path, {glob}); }

bool ScopeFilter::matches(const CodeBlock& block) const {
    if (class_name) {
        if (!block.enclosing_class)
            return false;
        const std::string& cls = *block.enclosing_class;
        const bool exact = cls == *class_name;
        const bool nested = cls.size() > class_name->size() &&
                            cls.compare(cls.size() - class_name->size(), class_name->size(), *class_name) == 0 &&
                            cls[cls.size() - class_name->size() - 1] == '.';
        if (!exact && !nested)
            return false;
    }
    if (method_name && block.enclosing_method != method_name)
        return false;
    if (file_glob && !glob_matches_path(*file_glob, block.file_path))
        return false;
    return true;
}

VectorStore::VectorStore(Eigen::Index dims, IndexInfo info) : VectorStore(std::string{}, dims, std::move(info)) {}

VectorStore::VectorStore(std::string path, Eigen::Index dims, IndexInfo info)
    : path_(std::move(path)), dims_(dims), info_(std::move(info)), vectors_(0, dims) {
    if (dims_ <= 0)
        throw std::invalid_argument("store dims must be positive");
}

VectorStore VectorStore::create(const std::string& path, Eigen::Index dims, IndexInfo info) {
    VectorStore store(path, dims, std::move(info));
    store.persist();
    return store;
}

VectorStore VectorStore::open(const std::string& path) {
    const std::string bin = read_file(path);
    if (bin.size() < kHeaderSize || std::memcmp(bin.data(), kMagic, 5) != 0)
        throw FormatError(path + ": not a vector index");
    const auto version = static_cast<std::uint8_t>(bin[5]);
    if (version > kFormatVersion)
        throw FormatError(path + ": index format version " + std::to_string(version) +
                          " is newer than supported version " + std::to_string(kFormatVersion));
    const auto dims = static_cast<Eigen::Index>(get_u64(bin, 8, 4));
    const auto count = get_u64(bin, 12);
    if (dims <= 0)
        throw FormatError(path + ": invalid dims");
    const std::size_t record = kIdField + static_cast<std::size_t>(dims) * 8;
    if (bin.size() != kHeaderSize + count * record)
        throw FormatError(path + ": truncated or oversized index (" + std::to_string(bin.size()) + " bytes)");

    const Json meta = read_json_file(sidecar_path(path));
    VectorStore store(path, dims, meta.value("info", IndexInfo{}));
    if (meta.value("dims", Eigen::Index{0}) != dims)
        throw FormatError(path + ": sidecar dims disagree with index");
    const Json& blocks = meta.at("blocks");
    if (blocks.size() != count)
        throw FormatError(path + ": sidecar has " + std::to_string(blocks.size()) + " blocks, index has " +
                          std::to_string(count));

    store.vectors_.resize(static_cast<Eigen::Index>(count), dims);
    store.blocks_.reserve(count);
    for (std::size_t r = 0; r < count; ++r) {
        const std::size_t at = kHeaderSize + r * record;
        std::string id(bin.data() + at, kIdField);
        id.resize(std::strlen(id.c_str()));
        CodeBlock block = blocks[r].get<CodeBlock>();
        if (block.id != id)
            throw FormatError(path + ": record " + std::to_string(r) + " id mismatch");
        for (Eigen::Index d = 0; d < dims; ++d)
            store.vectors_(static_cast<Eigen::Index>(r), d) =
                std::bit_cast<double>(get_u64(bin, at + kIdField + static_cast<std::size_t>(d) * 8));
        store.by_id_.emplace(block.id, r);
        store.blocks_.push_back(std::move(block));
    }
    return store;
}

void VectorStore::persist() const {
    if (path_.empty())
        return;
    std::string bin;
    const std::size_t record = kIdField + static_cast<std::size_t>(dims_) * 8;
    bin.reserve(kHeaderSize + blocks_.size() * record);
    bin.append(kMagic, 5);
    bin.push_back(static_cast<char>(kFormatVersion));
    bin.append(2, '\0');
    put_u32(bin, static_cast<std::uint32_t>(dims_));
    put_u64(bin, blocks_.size());
    for (std::size_t r = 0; r < blocks_.size(); ++r) {
        std::string id = blocks_[r].id;
        id.resize(kIdField, '\0');
        bin += id;
        for (Eigen::Index d = 0; d < dims_; ++d)
            put_u64(bin, std::bit_cast<std::uint64_t>(vectors_(static_cast<Eigen::Index>(r), d)));
    }

    Json meta{{"format_version", kFormatVersion}, {"dims", dims_}, {"info", info_}, {"blocks", blocks_}};
    write_file_atomic(sidecar_path(path_), meta.dump(1) + "\n");
    write_file_atomic(path_, bin);
}

std::size_t VectorStore::count() const {
    std::shared_lock lock(*mutex_);
    return blocks_.size();
}

std::size_t VectorStore::insert(std::span<const StoreEntry> entries) {
    std::unique_lock lock(*mutex_);

    std::vector<const StoreEntry*> fresh;
    std::unordered_map<std::string, const StoreEntry*> batch;
    for (const StoreEntry& e : entries) {
        if (e.vector.dims() != dims_)
            throw DimsMismatch(dims_, e.vector.dims());
        if (auto it = by_id_.find(e.block.id); it != by_id_.end()) {
            const auto row = vectors_.row(static_cast<Eigen::Index>(it->second)).transpose();
            if ((row - e.vector.values()).cwiseAbs().maxCoeff() > kSameVectorTolerance)
                throw DuplicateIdConflict(e.block.id);
            continue;
        }
        if (auto [it, added] = batch.emplace(e.block.id, &e); !added) {
            if ((it->second->vector.values() - e.vector.values()).cwiseAbs().maxCoeff() > kSameVectorTolerance)
                throw DuplicateIdConflict(e.block.id);
            continue;
        }
        fresh.push_back(&e);
    }
    if (fresh.empty())
        return 0;

    const auto old_rows = vectors_.rows();
    vectors_.conservativeResize(old_rows + static_cast<Eigen::Index>(fresh.size()), Eigen::NoChange);
    for (std::size_t i = 0; i < fresh.size(); ++i) {
        vectors_.row(old_rows + static_cast<Eigen::Index>(i)) = fresh[i]->vector.values().transpose();
        by_id_.emplace(fresh[i]->block.id, blocks_.size());
        blocks_.push_back(fresh[i]->block);
    }
    persist();
    return fresh.size();
}

std::vector<SearchHit> VectorStore::search(const EmbeddingVector& query, std::size_t k, double tau,
                                           const ScopeFilter& scope) const {
    if (!(tau >= 0.0 && tau <= 1.0))
        throw std::invalid_argument("tau must lie in [0, 1]");
    if (k == 0)
        throw std::invalid_argument("k must be positive");
    std::shared_lock lock(*mutex_);
    if (query.dims() != dims_)
        throw DimsMismatch(dims_, query.dims());

    const Eigen::VectorXd scores = score_rows(vectors_, query.values());
    std::vector<SearchHit> hits;
    for (Eigen::Index r = 0; r < scores.size(); ++r) {
        const auto& block = blocks_[static_cast<std::size_t>(r)];
        if (scores[r] >= tau && scope.matches(block))
            hits.push_back(SearchHit{block, scores[r]});
    }
    const std::size_t keep = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), hit_before);
    hits.resize(keep);
    return hits;
}

std::optional<double> VectorStore::similarity(const std::string& block_id, const EmbeddingVector& query) const {
    std::shared_lock lock(*mutex_);
    if (query.dims() != dims_)
        throw DimsMismatch(dims_, query.dims());
    auto it = by_id_.find(block_id);
    if (it == by_id_.end())
        return std::nullopt;
    return vectors_.row(static_cast<Eigen::Index>(it->second)).dot(query.values());
}

std::optional<CodeBlock> VectorStore::find(const std::string& block_id) const {
    std::shared_lock lock(*mutex_);
    auto it = by_id_.find(block_id);
    if (it == by_id_.end())
        return std::nullopt;
    return blocks_[it->second];
}

std::vector<StoreEntry> VectorStore::entries() const {
    std::shared_lock lock(*mutex_);
    std::vector<StoreEntry> out;
    out.reserve(blocks_.size());
    for (std::size_t r = 0; r < blocks_.size(); ++r)
        out.push_back(StoreEntry{blocks_[r], EmbeddingVector::from_unit(
                                                 vectors_.row(static_cast<Eigen::Index>(r)).transpose())});
    return out;
}

} // namespace vulnreach
