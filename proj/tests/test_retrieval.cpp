#include <doctest.h>

#include <algorithm>
#include <random>

#include "proofloop/corpus.hpp"
#include "proofloop/errors.hpp"
#include "proofloop/jsonl.hpp"
#include "proofloop/retrieval.hpp"
#include "test_support.hpp"

using namespace proofloop;

namespace {

// Builds an index straight from (key, payload) pairs.
retrieval::IndexSnapshot index_of(const std::vector<std::string>& keys,
                                  retrieval::EmbeddingProvider& provider,
                                  std::uint64_t snapshot_id = 1) {
    std::vector<retrieval::MemoryEntry> entries;
    retrieval::RetrievalIndex::Matrix vectors(keys.size(), provider.dim());
    if (!keys.empty()) {
        auto embedded = provider.embed_batch(keys);
        for (std::size_t i = 0; i < keys.size(); ++i) {
            entries.push_back({"ref" + std::to_string(i), keys[i], "proof " + keys[i], i});
            vectors.row(static_cast<Eigen::Index>(i)) = embedded[i].transpose();
        }
    }
    return std::make_shared<const retrieval::RetrievalIndex>(snapshot_id, provider.dim(),
                                                             std::move(entries),
                                                             std::move(vectors));
}

// Independent ranking oracle: cosine of every entry, stable-sorted descending
// with insert_seq tie-break.
std::vector<std::size_t> brute_force_ranking(const retrieval::RetrievalIndex& index,
                                             const std::string& query,
                                             retrieval::EmbeddingProvider& provider) {
    auto q = retrieval::embed(query, provider);
    std::vector<std::pair<float, std::size_t>> scored;
    for (std::size_t i = 0; i < index.size(); ++i) {
        float dot = 0.0f;
        for (int d = 0; d < index.dim(); ++d)
            dot += index.vectors()(static_cast<Eigen::Index>(i), d) * q[d];
        scored.push_back({dot, i});
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::size_t> order;
    for (const auto& [sim, i] : scored) order.push_back(i);
    return order;
}

}  // namespace

TEST_CASE("trigram embedder") {
    retrieval::TrigramEmbedder emb;

    SUBCASE("deterministic") {
        auto a = retrieval::embed("theorem t : True := by trivial", emb);
        auto b = retrieval::embed("theorem t : True := by trivial", emb);
        CHECK((a - b).norm() == 0.0f);
    }
    SUBCASE("unit norm") {
        for (const char* t : {"x", "ab", "abc", "a longer theorem statement with tokens"})
            CHECK(retrieval::embed(t, emb).norm() == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("disjoint-trigram texts sit near the collision baseline, below self-similarity") {
        auto a = retrieval::embed("theorem alpha : 1 + 1 = 2 := by decide", emb);
        auto b = retrieval::embed("zzz qqq www", emb);
        double cosine = a.dot(b);
        CHECK(cosine == doctest::Approx(-0.102868907).epsilon(1e-6));
        CHECK(cosine < 0.5);
        CHECK(a.dot(a) == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("empty text is refused") {
        CHECK_THROWS_AS(retrieval::embed("", emb), DomainError);
    }
}

TEST_CASE("query_topk") {
    retrieval::TrigramEmbedder emb;
    std::vector<std::string> keys = {
        "theorem add_comm (a b : Nat) : a + b = b + a",
        "theorem mul_comm (a b : Nat) : a * b = b * a",
        "theorem zero_add (n : Nat) : 0 + n = n",
        "lemma union_comm (s t : Set X) : s ∪ t = t ∪ s",
        "theorem add_comm_int (a b : Int) : a + b = b + a",
    };
    auto index = index_of(keys, emb);

    SUBCASE("self query ranks the stored key first with similarity 1") {
        auto top = retrieval::query_topk(*index, keys[2], 3, emb);
        REQUIRE(!top.empty());
        CHECK(top[0].entry.statement_text == keys[2]);
        CHECK(top[0].similarity == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("k beyond the index returns everything, fully sorted") {
        auto top = retrieval::query_topk(*index, keys[0], 50, emb);
        CHECK(top.size() == keys.size());
        for (std::size_t i = 1; i < top.size(); ++i)
            CHECK(top[i - 1].similarity >= top[i].similarity);
    }
    SUBCASE("ordering equals the brute-force oracle") {
        auto oracle = brute_force_ranking(*index, keys[0], emb);
        auto top = retrieval::query_topk(*index, keys[0], keys.size(), emb);
        REQUIRE(top.size() == oracle.size());
        for (std::size_t i = 0; i < top.size(); ++i)
            CHECK(top[i].entry.insert_seq == oracle[i]);
    }
    SUBCASE("identical keys tie-break by insertion order") {
        auto dup = index_of({"same text", "same text", "same text"}, emb);
        auto top = retrieval::query_topk(*dup, "same text", 3, emb);
        REQUIRE(top.size() == 3);
        CHECK(top[0].entry.insert_seq == 0);
        CHECK(top[1].entry.insert_seq == 1);
        CHECK(top[2].entry.insert_seq == 2);
    }
    SUBCASE("k = 0 and empty index") {
        CHECK(retrieval::query_topk(*index, keys[0], 0, emb).empty());
        auto empty = index_of({}, emb);
        CHECK(retrieval::query_topk(*empty, "anything", 4, emb).empty());
    }
    SUBCASE("provider dim mismatch is refused") {
        retrieval::TrigramEmbedder other(64);
        CHECK_THROWS_AS(retrieval::query_topk(*index, keys[0], 2, other), DimMismatch);
    }
}

TEST_CASE("topk is a sorted prefix of the full ranking on random indices") {
    retrieval::TrigramEmbedder emb(64);
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t n = 1 + rng() % 100;
        std::vector<std::string> keys;
        for (std::size_t i = 0; i < n; ++i)
            keys.push_back("stmt " + std::to_string(rng() % 50) + " body " +
                           std::to_string(rng() % 7));
        auto index = index_of(keys, emb);
        std::string query = "stmt " + std::to_string(rng() % 50);
        std::size_t k = 1 + rng() % (n + 2);

        auto oracle = brute_force_ranking(*index, query, emb);
        auto top = retrieval::query_topk(*index, query, k, emb);
        REQUIRE(top.size() == std::min(k, n));
        for (std::size_t i = 0; i < top.size(); ++i)
            CHECK(top[i].entry.insert_seq == oracle[i]);
    }
}

TEST_CASE("rebuild_index") {
    retrieval::TrigramEmbedder emb;
    corpus::Corpus c;

    SUBCASE("empty corpus yields an empty index") {
        auto index = retrieval::rebuild_index(c, emb, 0);
        CHECK(index->size() == 0);
        CHECK(index->snapshot_id() == 1);
    }

    corpus::TheoremStatement s;
    s.id = "s1";
    s.lean_statement = "theorem s1 : True";
    c.add_statements({s});
    for (int i = 0; i < 3; ++i) {
        corpus::VerifiedProof p;
        p.statement_id = "s1";
        p.proof_text = "proof variant " + std::to_string(i);
        c.ingest_verified({p});
    }

    SUBCASE("one entry per verified proof, snapshot id increments") {
        auto index = retrieval::rebuild_index(c, emb, 7);
        CHECK(index->size() == 3);
        CHECK(index->snapshot_id() == 8);
        CHECK(index->entries()[0].statement_text == "theorem s1 : True");
    }

    SUBCASE("a failing embedder leaves the previous snapshot live") {
        auto old_index = retrieval::rebuild_index(c, emb, 0);
        struct Flaky : retrieval::EmbeddingProvider {
            int dim() override { return 256; }
            std::vector<retrieval::EmbeddingVector> embed_batch(
                const std::vector<std::string>&) override {
                throw EmbedderUnavailable("flaky");
            }
        } flaky;
        CHECK_THROWS_AS(retrieval::rebuild_index(c, flaky, old_index->snapshot_id()),
                        EmbedderUnavailable);
        CHECK(old_index->size() == 3);  // untouched
        auto top = retrieval::query_topk(*old_index, "theorem s1 : True", 1, emb);
        CHECK(top.size() == 1);
    }
}

TEST_CASE("similarity_spread") {
    retrieval::TrigramEmbedder emb;

    SUBCASE("single entry probed by its own key") {
        auto index = index_of({"only entry text"}, emb);
        auto st = retrieval::similarity_spread(*index, {"only entry text"}, emb);
        CHECK(st.min == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(st.max == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("identical entries have zero spread") {
        auto index = index_of({"same", "same", "same"}, emb);
        auto st = retrieval::similarity_spread(*index, {"same"}, emb);
        CHECK(st.stddev == doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("statistics equal a brute-force recomputation") {
        std::vector<std::string> keys;
        for (int i = 0; i < 10; ++i) keys.push_back("entry number " + std::to_string(i * 37));
        auto index = index_of(keys, emb);
        std::vector<std::string> probes = {"entry number 0", "entry number 111", "other text"};
        auto st = retrieval::similarity_spread(*index, probes, emb);

        std::vector<double> sims;
        for (const auto& p : probes) {
            auto order = brute_force_ranking(*index, p, emb);
            auto q = retrieval::embed(p, emb);
            for (std::size_t i = 0; i < 5 && i < order.size(); ++i) {
                double dot = 0.0;
                for (int d = 0; d < index->dim(); ++d)
                    dot += index->vectors()(static_cast<Eigen::Index>(order[i]), d) * q[d];
                sims.push_back(dot);
            }
        }
        double mean = 0;
        for (double v : sims) mean += v;
        mean /= sims.size();
        double var = 0;
        for (double v : sims) var += (v - mean) * (v - mean);
        // The index path accumulates in float32 (Eigen), the oracle in
        // double; agreement is up to single precision.
        CHECK(st.sample_count == sims.size());
        CHECK(st.mean == doctest::Approx(mean).epsilon(1e-6));
        CHECK(st.stddev == doctest::Approx(std::sqrt(var / sims.size())).epsilon(1e-6));
        CHECK(st.min == doctest::Approx(*std::min_element(sims.begin(), sims.end())).epsilon(1e-6));
        CHECK(st.max == doctest::Approx(*std::max_element(sims.begin(), sims.end())).epsilon(1e-6));
    }
    SUBCASE("empty index is an error") {
        retrieval::TrigramEmbedder e2;
        auto empty = index_of({}, e2);
        CHECK_THROWS_AS(retrieval::similarity_spread(*empty, {"probe"}, e2), EmptyIndex);
    }
    SUBCASE("no probes is an error") {
        auto index = index_of({"x"}, emb);
        CHECK_THROWS_AS(retrieval::similarity_spread(*index, {}, emb), DomainError);
    }
}

TEST_CASE("index persistence and snapshot immutability") {
    retrieval::TrigramEmbedder emb;
    testsupport::TempDir dir("index");

    corpus::Corpus c;
    corpus::TheoremStatement s;
    s.id = "s1";
    s.lean_statement = "theorem s1 : True";
    c.add_statements({s});
    corpus::VerifiedProof p;
    p.statement_id = "s1";
    p.proof_text = "proof one";
    c.ingest_verified({p});

    auto index = retrieval::rebuild_index(c, emb, 0);
    auto file = dir / "snap.bin";
    index->save(file);

    SUBCASE("load round-trips losslessly") {
        auto loaded = retrieval::RetrievalIndex::load(file);
        CHECK(loaded->snapshot_id() == index->snapshot_id());
        CHECK(loaded->dim() == index->dim());
        REQUIRE(loaded->size() == index->size());
        CHECK(loaded->entries()[0].proof_ref == index->entries()[0].proof_ref);
        CHECK(loaded->entries()[0].proof_text == "proof one");
        CHECK((loaded->vectors() - index->vectors()).norm() == 0.0f);
    }

    SUBCASE("a rebuild never mutates the existing snapshot") {
        auto before_bytes = jsonl::read_text_file(file);
        auto before_query = retrieval::query_topk(*index, "theorem s1 : True", 5, emb);

        corpus::VerifiedProof q;
        q.statement_id = "s1";
        q.proof_text = "proof two";
        c.ingest_verified({q});
        auto rebuilt = retrieval::rebuild_index(c, emb, index->snapshot_id());
        CHECK(rebuilt->size() == 2);
        CHECK(rebuilt->snapshot_id() == index->snapshot_id() + 1);

        index->save(file);  // re-serialize the old snapshot
        CHECK(jsonl::read_text_file(file) == before_bytes);
        auto after_query = retrieval::query_topk(*index, "theorem s1 : True", 5, emb);
        REQUIRE(after_query.size() == before_query.size());
        for (std::size_t i = 0; i < after_query.size(); ++i) {
            CHECK(after_query[i].entry.proof_ref == before_query[i].entry.proof_ref);
            CHECK(after_query[i].similarity == before_query[i].similarity);
        }
    }
}
