#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "proofloop/corpus.hpp"

namespace proofloop::retrieval {

// Embedding vectors are always L2-normalized; dim is fixed per provider and
// per index.
using EmbeddingVector = Eigen::VectorXf;

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual int dim() = 0;
    // One normalized vector per text, in order. Throws EmbedderUnavailable on
    // transport failure.
    virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) = 0;
};

// Embeds one non-empty text.
EmbeddingVector embed(const std::string& text, EmbeddingProvider& provider);

// Deterministic, dependency-free test provider: character trigrams hashed
// into a fixed-dim signed bag, then L2-normalized. Identical texts always
// embed identically.
class TrigramEmbedder : public EmbeddingProvider {
public:
    explicit TrigramEmbedder(int dim = 256) : dim_(dim) {}
    int dim() override { return dim_; }
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

private:
    int dim_;
};

// Remote embedding service: POST {base_url}/embed with {texts: [...]},
// response {vectors: [[...]]}. Vectors are re-normalized on receipt.
class HttpEmbedder : public EmbeddingProvider {
public:
    explicit HttpEmbedder(std::string base_url, std::string api_key = "");
    int dim() override;
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

private:
    std::string base_url_;
    std::string api_key_;
    int dim_ = 0;  // discovered from the first response
};

struct MemoryEntry {
    std::string proof_ref;       // stable reference to the verified proof
    std::string statement_text;  // the embedded key
    std::string proof_text;      // payload shown in prompt reference slots
    std::uint64_t insert_seq = 0;
};

// Immutable snapshot of the proof memory. Vectors live in one row-major
// matrix so a query is a single matrix-vector product.
class RetrievalIndex {
public:
    using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    RetrievalIndex(std::uint64_t snapshot_id, int dim, std::vector<MemoryEntry> entries,
                   Matrix vectors);

    std::uint64_t snapshot_id() const { return snapshot_id_; }
    int dim() const { return dim_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::vector<MemoryEntry>& entries() const { return entries_; }
    const Matrix& vectors() const { return vectors_; }

    // Binary vector file (little-endian header + float32 rows) plus a JSONL
    // sidecar of entry metadata at base path + ".meta.jsonl".
    void save(const std::filesystem::path& path) const;
    static std::shared_ptr<const RetrievalIndex> load(const std::filesystem::path& path);

private:
    std::uint64_t snapshot_id_;
    int dim_;
    std::vector<MemoryEntry> entries_;
    Matrix vectors_;
};

using IndexSnapshot = std::shared_ptr<const RetrievalIndex>;

struct ScoredEntry {
    MemoryEntry entry;
    float similarity = 0.0f;
};

// Exhaustive top-k by cosine similarity, descending; ties break toward the
// smaller insert_seq. Returns min(k, |index|) results.
std::vector<ScoredEntry> query_topk(const RetrievalIndex& index, const std::string& query_text,
                                    std::size_t k, EmbeddingProvider& provider);

// Builds a fresh snapshot over every verified proof in the corpus, embedding
// each proof's statement text as the key. snapshot_id = prev_snapshot_id + 1;
// existing snapshots are untouched.
IndexSnapshot rebuild_index(const corpus::Corpus& corpus, EmbeddingProvider& provider,
                            std::uint64_t prev_snapshot_id = 0);

struct SpreadStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t sample_count = 0;
};

// Distribution of top-5 similarities over a set of probe queries; a
// discriminative index shows a wide spread, a collapsed one a narrow band.
SpreadStats similarity_spread(const RetrievalIndex& index,
                              const std::vector<std::string>& probe_queries,
                              EmbeddingProvider& provider);

}  // namespace proofloop::retrieval
