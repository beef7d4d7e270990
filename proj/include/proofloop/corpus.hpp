#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

namespace proofloop::policy {
class PolicyClient;
}

namespace proofloop::corpus {

using json = nlohmann::json;

enum class StatementSource { Public, Synthesized, Rollout };

std::string to_string(StatementSource s);
StatementSource statement_source_from_string(const std::string& s);

// The ten mathematical domains and four difficulty tiers a statement can be
// labeled with. Labels outside these lists are invalid.
const std::vector<std::string>& domain_labels();
const std::vector<std::string>& difficulty_labels();

struct TheoremStatement {
    std::string id;
    std::string lean_statement;
    StatementSource source = StatementSource::Public;
    std::optional<std::string> domain_label;
    std::optional<std::string> difficulty_label;
    std::optional<std::string> label_rationale;
    json extra = json::object();  // unknown fields, preserved on round-trip

    json to_json() const;
    static TheoremStatement from_json(const json& j);
};

struct VerifiedProof {
    std::string statement_id;
    std::string proof_text;
    int verified_at_iteration = 0;
    std::string verifier_metadata;
    json extra = json::object();

    json to_json() const;
    static VerifiedProof from_json(const json& j);
};

struct RepairExample {
    std::string statement_id;
    std::vector<std::string> retrieved_ids;
    std::string prev_proof;
    std::string prev_feedback;
    std::string target_proof;
    std::string source_trajectory;
    int round_index = 2;
    json extra = json::object();

    json to_json() const;
    static RepairExample from_json(const json& j);
};

struct CorpusStats {
    std::size_t statement_count = 0;
    std::size_t verified_proof_count = 0;
    std::size_t trajectory_count = 0;
    std::size_t repair_example_count = 0;
    std::map<std::string, std::size_t> domain_histogram;
    std::map<std::string, std::size_t> difficulty_histogram;

    json to_json() const;
};

struct CorpusDelta {
    std::size_t added = 0;
    std::size_t skipped = 0;
    std::size_t rejected = 0;
    std::vector<std::string> rejected_ids;
};

// Content-addressed id: hash of the normalized statement text, so the same
// statement gets the same id across runs and ingestion orders.
std::string statement_id_for(std::string_view lean_statement);

// Stable reference to one (statement, proof text) pair.
std::string proof_ref(const std::string& statement_id, std::string_view proof_text);

// Statement-level dedup: two statements are duplicates iff their normalized
// signatures (comments stripped, whitespace collapsed) are byte-equal. Keeps
// the first occurrence of each class, preserving order.
std::vector<TheoremStatement> dedup_statements(const std::vector<TheoremStatement>& statements);

struct StatementLabels {
    std::string domain;
    std::string difficulty;
    std::string rationale;
};

// The offline classification prompt, with {FORMAL_STATEMENT} substituted.
std::string render_classification_prompt(const std::string& lean_statement);

// Asks the labeler to classify the statement and writes the labels onto it.
// Throws LabelParseError when the response does not contain exactly one valid
// single-line object, LabelerUnavailable on transport failure.
StatementLabels classify_statement(TheoremStatement& statement, policy::PolicyClient& labeler);

// Persistent store for statements, verified proofs, trajectories (opaque
// records owned by the engine) and repair examples. Backed by append-only
// JSONL files under a directory; a default-constructed corpus is memory-only.
//
// Single-writer, multi-reader: mutations serialize through one writer lock;
// reads take shared locks and return copies.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::filesystem::path dir);

    // Loads existing record files from `dir` (missing files are fine).
    static Corpus open(const std::filesystem::path& dir);

    // Appends statements, skipping ids already present and rejecting records
    // with an empty lean_statement. Assigns content-addressed ids when absent.
    CorpusDelta add_statements(std::vector<TheoremStatement> statements);

    // Appends proofs. A proof is skipped iff an identical (statement_id,
    // proof_text) pair already exists; an unresolved statement_id rejects the
    // record and ingestion continues.
    CorpusDelta ingest_verified(const std::vector<VerifiedProof>& proofs);

    void add_trajectories(const std::vector<json>& trajectories);
    CorpusDelta add_repairs(const std::vector<RepairExample>& repairs);

    // Last-writer-wins relabeling. Both labels must be valid categories.
    void set_labels(const std::string& statement_id, const StatementLabels& labels);

    std::optional<TheoremStatement> find_statement(const std::string& id) const;
    std::vector<TheoremStatement> statements() const;
    std::vector<VerifiedProof> proofs() const;  // insertion order
    std::vector<RepairExample> repairs() const;
    std::vector<json> trajectories() const;
    std::size_t proof_count() const;
    std::size_t statement_count() const;

    CorpusStats stats() const;

    // Rewrites the record files from the in-memory state, squeezing out
    // superseded label records.
    void compact() const;

    const std::filesystem::path& dir() const { return dir_; }

    Corpus(const Corpus&) = delete;
    Corpus& operator=(const Corpus&) = delete;
    Corpus(Corpus&&) noexcept;
    Corpus& operator=(Corpus&&) noexcept;

private:
    void append_statement_record(const TheoremStatement& s);
    bool persistent() const { return !dir_.empty(); }

    std::filesystem::path dir_;
    std::vector<TheoremStatement> statements_;
    std::unordered_map<std::string, std::size_t> statement_index_;
    std::vector<VerifiedProof> proofs_;
    std::unordered_set<std::string> proof_keys_;
    std::vector<RepairExample> repairs_;
    std::unordered_set<std::string> repair_keys_;
    std::vector<json> trajectories_;
    mutable std::shared_mutex mutex_;
};

}  // namespace proofloop::corpus
