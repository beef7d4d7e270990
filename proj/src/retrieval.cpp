#include "proofloop/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <httplib.h>
#include <json.hpp>

#include "proofloop/errors.hpp"
#include "proofloop/jsonl.hpp"
#include "proofloop/text.hpp"

namespace proofloop::retrieval {

namespace {

using nlohmann::json;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (i * 8)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (i * 8)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
           std::uint32_t(p[3]) << 24;
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

constexpr char kMagic[4] = {'P', 'L', 'I', 'X'};

}  // namespace

EmbeddingVector embed(const std::string& text, EmbeddingProvider& provider) {
    if (text.empty()) throw DomainError("cannot embed an empty text");
    auto vs = provider.embed_batch({text});
    if (vs.size() != 1) throw EmbedderUnavailable("provider returned wrong vector count");
    return vs[0];
}

std::vector<EmbeddingVector> TrigramEmbedder::embed_batch(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        EmbeddingVector v = EmbeddingVector::Zero(dim_);
        auto add_feature = [&](std::string_view f) {
            std::uint64_t h = text::fnv1a64(f);
            int idx = static_cast<int>(h % static_cast<std::uint64_t>(dim_));
            float sign = ((h >> 32) & 1) ? 1.0f : -1.0f;
            v[idx] += sign;
        };
        if (t.size() < 3) {
            add_feature(t);
        } else {
            for (std::size_t i = 0; i + 3 <= t.size(); ++i)
                add_feature(std::string_view(t).substr(i, 3));
        }
        float n = v.norm();
        if (n < 1e-12f) {
            // Pathological sign cancellation; fall back to a one-hot vector.
            v.setZero();
            v[static_cast<int>(text::fnv1a64(t) % static_cast<std::uint64_t>(dim_))] = 1.0f;
        } else {
            v /= n;
        }
        out.push_back(std::move(v));
    }
    return out;
}

HttpEmbedder::HttpEmbedder(std::string base_url, std::string api_key)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)) {}

int HttpEmbedder::dim() {
    if (dim_ == 0) embed_batch({"."});  // probe once to discover the dimension
    return dim_;
}

std::vector<EmbeddingVector> HttpEmbedder::embed_batch(const std::vector<std::string>& texts) {
    httplib::Client client(base_url_);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(300, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    json body{{"texts", texts}};
    auto res = client.Post("/embed", headers, body.dump(), "application/json");
    if (!res) throw EmbedderUnavailable("embedding endpoint unreachable: " + base_url_);
    if (res->status != 200)
        throw EmbedderUnavailable("embedding endpoint returned HTTP " +
                                  std::to_string(res->status));
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("vectors"))
        throw EmbedderUnavailable("malformed embedding response");

    std::vector<EmbeddingVector> out;
    for (const auto& jv : parsed["vectors"]) {
        EmbeddingVector v(jv.size());
        for (std::size_t i = 0; i < jv.size(); ++i) v[static_cast<int>(i)] = jv[i].get<float>();
        if (dim_ == 0) dim_ = static_cast<int>(v.size());
        if (v.size() != dim_)
            throw DimMismatch("embedding dim changed from " + std::to_string(dim_) + " to " +
                              std::to_string(v.size()));
        float n = v.norm();
        if (n > 1e-12f) v /= n;
        out.push_back(std::move(v));
    }
    if (out.size() != texts.size())
        throw EmbedderUnavailable("embedding response count mismatch");
    return out;
}

// ---------------------------------------------------------------------------
// RetrievalIndex

RetrievalIndex::RetrievalIndex(std::uint64_t snapshot_id, int dim,
                               std::vector<MemoryEntry> entries, Matrix vectors)
    : snapshot_id_(snapshot_id), dim_(dim), entries_(std::move(entries)),
      vectors_(std::move(vectors)) {
    if (vectors_.rows() != static_cast<Eigen::Index>(entries_.size()) ||
        (entries_.size() > 0 && vectors_.cols() != dim_))
        throw DomainError("index entries and vector matrix disagree");
}

void RetrievalIndex::save(const std::filesystem::path& path) const {
    std::string buf;
    buf.append(kMagic, 4);
    put_u32(buf, 1);  // version
    put_u32(buf, static_cast<std::uint32_t>(dim_));
    put_u64(buf, snapshot_id_);
    put_u64(buf, entries_.size());
    for (Eigen::Index r = 0; r < vectors_.rows(); ++r) {
        for (Eigen::Index c = 0; c < vectors_.cols(); ++c) {
            std::uint32_t bits;
            float f = vectors_(r, c);
            std::memcpy(&bits, &f, 4);
            put_u32(buf, bits);
        }
    }
    jsonl::write_text_file(path, buf);

    std::vector<json> meta;
    meta.reserve(entries_.size());
    for (const auto& e : entries_)
        meta.push_back(json{{"proof_ref", e.proof_ref},
                            {"statement_text", e.statement_text},
                            {"proof_text", e.proof_text},
                            {"insert_seq", e.insert_seq}});
    jsonl::write_file(path.string() + ".meta.jsonl", meta);
}

IndexSnapshot RetrievalIndex::load(const std::filesystem::path& path) {
    std::string buf = jsonl::read_text_file(path);
    if (buf.size() < 28 || std::memcmp(buf.data(), kMagic, 4) != 0)
        throw IoError("not an index file: " + path.string());
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
    std::uint32_t version = get_u32(p + 4);
    if (version != 1) throw IoError("unsupported index version");
    int dim = static_cast<int>(get_u32(p + 8));
    std::uint64_t snapshot_id = get_u64(p + 12);
    std::uint64_t count = get_u64(p + 20);
    std::size_t need = 28 + static_cast<std::size_t>(count) * dim * 4;
    if (buf.size() < need) throw IoError("truncated index file: " + path.string());

    Matrix vectors(count, dim);
    const unsigned char* cur = p + 28;
    for (std::uint64_t r = 0; r < count; ++r) {
        for (int c = 0; c < dim; ++c) {
            std::uint32_t bits = get_u32(cur);
            float f;
            std::memcpy(&f, &bits, 4);
            vectors(static_cast<Eigen::Index>(r), c) = f;
            cur += 4;
        }
    }

    auto meta = jsonl::read_file(path.string() + ".meta.jsonl");
    if (meta.size() != count) throw IoError("index sidecar entry count mismatch");
    std::vector<MemoryEntry> entries;
    entries.reserve(count);
    for (const auto& j : meta) {
        MemoryEntry e;
        e.proof_ref = j.at("proof_ref").get<std::string>();
        e.statement_text = j.at("statement_text").get<std::string>();
        e.proof_text = j.value("proof_text", "");
        e.insert_seq = j.at("insert_seq").get<std::uint64_t>();
        entries.push_back(std::move(e));
    }
    return std::make_shared<const RetrievalIndex>(snapshot_id, dim, std::move(entries),
                                                  std::move(vectors));
}

std::vector<ScoredEntry> query_topk(const RetrievalIndex& index, const std::string& query_text,
                                    std::size_t k, EmbeddingProvider& provider) {
    if (index.empty() || k == 0) return {};
    if (provider.dim() != index.dim())
        throw DimMismatch("provider dim " + std::to_string(provider.dim()) +
                          " != index dim " + std::to_string(index.dim()));
    EmbeddingVector q = embed(query_text, provider);

    Eigen::VectorXf sims = index.vectors() * q;
    // Normalized inputs put the cosine in [-1, 1]; shave float spill.
    sims = sims.cwiseMax(-1.0f).cwiseMin(1.0f);
    std::vector<std::size_t> order(index.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        float sa = sims[static_cast<Eigen::Index>(a)];
        float sb = sims[static_cast<Eigen::Index>(b)];
        if (sa != sb) return sa > sb;
        return index.entries()[a].insert_seq < index.entries()[b].insert_seq;
    });

    std::size_t take = std::min(k, index.size());
    std::vector<ScoredEntry> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i)
        out.push_back({index.entries()[order[i]], sims[static_cast<Eigen::Index>(order[i])]});
    return out;
}

IndexSnapshot rebuild_index(const corpus::Corpus& corpus, EmbeddingProvider& provider,
                            std::uint64_t prev_snapshot_id) {
    auto proofs = corpus.proofs();
    std::vector<MemoryEntry> entries;
    std::vector<std::string> keys;
    entries.reserve(proofs.size());
    keys.reserve(proofs.size());
    for (std::size_t i = 0; i < proofs.size(); ++i) {
        const auto& p = proofs[i];
        auto stmt = corpus.find_statement(p.statement_id);
        if (!stmt) continue;  // cannot happen through ingest_verified
        MemoryEntry e;
        e.proof_ref = corpus::proof_ref(p.statement_id, p.proof_text);
        e.statement_text = stmt->lean_statement;
        e.proof_text = p.proof_text;
        e.insert_seq = entries.size();
        keys.push_back(e.statement_text);
        entries.push_back(std::move(e));
    }

    int dim = provider.dim();
    RetrievalIndex::Matrix vectors(entries.size(), dim);
    if (!entries.empty()) {
        auto embedded = provider.embed_batch(keys);
        for (std::size_t i = 0; i < embedded.size(); ++i) {
            if (embedded[i].size() != dim) throw DimMismatch("provider returned mixed dims");
            vectors.row(static_cast<Eigen::Index>(i)) = embedded[i].transpose();
        }
    }
    return std::make_shared<const RetrievalIndex>(prev_snapshot_id + 1, dim, std::move(entries),
                                                  std::move(vectors));
}

SpreadStats similarity_spread(const RetrievalIndex& index,
                              const std::vector<std::string>& probe_queries,
                              EmbeddingProvider& provider) {
    if (index.empty()) throw EmptyIndex("similarity_spread over an empty index");
    if (probe_queries.empty()) throw DomainError("similarity_spread needs at least one probe");

    std::vector<double> sims;
    for (const auto& probe : probe_queries) {
        auto top = query_topk(index, probe, 5, provider);
        for (const auto& s : top) sims.push_back(static_cast<double>(s.similarity));
    }
    SpreadStats st;
    st.sample_count = sims.size();
    st.min = *std::min_element(sims.begin(), sims.end());
    st.max = *std::max_element(sims.begin(), sims.end());
    double sum = 0.0;
    for (double s : sims) sum += s;
    st.mean = sum / static_cast<double>(sims.size());
    double var = 0.0;
    for (double s : sims) var += (s - st.mean) * (s - st.mean);
    st.stddev = std::sqrt(var / static_cast<double>(sims.size()));
    return st;
}

}  // namespace proofloop::retrieval
