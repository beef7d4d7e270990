#include "proofloop/corpus.hpp"

#include <algorithm>
#include <mutex>

#include "proofloop/errors.hpp"
#include "proofloop/jsonl.hpp"
#include "proofloop/policy.hpp"
#include "proofloop/text.hpp"

namespace proofloop::corpus {

namespace {

constexpr const char* kStatementsFile = "statements.jsonl";
constexpr const char* kProofsFile = "proofs.jsonl";
constexpr const char* kTrajectoriesFile = "trajectories.jsonl";
constexpr const char* kRepairsFile = "repairs.jsonl";

std::string proof_key(const std::string& statement_id, const std::string& proof_text) {
    return statement_id + '\x1f' + proof_text;
}

std::string repair_key(const RepairExample& r) {
    return r.prev_proof + '\x1f' + r.prev_feedback + '\x1f' + r.target_proof;
}

json take_extra(const json& j, std::initializer_list<const char*> known) {
    json extra = json::object();
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool is_known = false;
        for (const char* k : known)
            if (it.key() == k) { is_known = true; break; }
        if (!is_known) extra[it.key()] = it.value();
    }
    return extra;
}

}  // namespace

std::string to_string(StatementSource s) {
    switch (s) {
        case StatementSource::Public: return "public";
        case StatementSource::Synthesized: return "synthesized";
        case StatementSource::Rollout: return "rollout";
    }
    return "public";
}

StatementSource statement_source_from_string(const std::string& s) {
    if (s == "public") return StatementSource::Public;
    if (s == "synthesized") return StatementSource::Synthesized;
    if (s == "rollout") return StatementSource::Rollout;
    throw IoError("unknown statement source: " + s);
}

const std::vector<std::string>& domain_labels() {
    static const std::vector<std::string> kLabels = {
        "Algebra",       "NumberTheory",          "Analysis", "Topology",
        "Geometry",      "Combinatorics",         "ProbabilityStatistics",
        "LogicFoundations", "Computation",        "Other",
    };
    return kLabels;
}

const std::vector<std::string>& difficulty_labels() {
    static const std::vector<std::string> kLabels = {
        "Elementary", "HighSchool", "Undergraduate", "GraduatePlus"};
    return kLabels;
}

json TheoremStatement::to_json() const {
    json j = extra;
    j["id"] = id;
    j["lean_statement"] = lean_statement;
    j["source"] = corpus::to_string(source);
    if (domain_label) j["domain_label"] = *domain_label;
    if (difficulty_label) j["difficulty_label"] = *difficulty_label;
    if (label_rationale) j["label_rationale"] = *label_rationale;
    return j;
}

TheoremStatement TheoremStatement::from_json(const json& j) {
    TheoremStatement s;
    s.id = j.value("id", "");
    s.lean_statement = j.at("lean_statement").get<std::string>();
    if (s.id.empty()) s.id = statement_id_for(s.lean_statement);
    s.source = statement_source_from_string(j.value("source", "public"));
    if (j.contains("domain_label")) s.domain_label = j["domain_label"].get<std::string>();
    if (j.contains("difficulty_label")) s.difficulty_label = j["difficulty_label"].get<std::string>();
    if (j.contains("label_rationale")) s.label_rationale = j["label_rationale"].get<std::string>();
    // Labels come in pairs; a half-labeled record is malformed.
    if (s.domain_label.has_value() != s.difficulty_label.has_value())
        throw IoError("statement " + s.id + " has only one of domain/difficulty labels");
    s.extra = take_extra(j, {"id", "lean_statement", "source", "domain_label", "difficulty_label",
                             "label_rationale"});
    return s;
}

json VerifiedProof::to_json() const {
    json j = extra;
    j["statement_id"] = statement_id;
    j["proof_text"] = proof_text;
    j["verified_at_iteration"] = verified_at_iteration;
    j["verifier_metadata"] = verifier_metadata;
    return j;
}

VerifiedProof VerifiedProof::from_json(const json& j) {
    VerifiedProof p;
    p.statement_id = j.at("statement_id").get<std::string>();
    p.proof_text = j.at("proof_text").get<std::string>();
    p.verified_at_iteration = j.value("verified_at_iteration", 0);
    p.verifier_metadata = j.value("verifier_metadata", "");
    p.extra = take_extra(j, {"statement_id", "proof_text", "verified_at_iteration",
                             "verifier_metadata"});
    return p;
}

json RepairExample::to_json() const {
    json j = extra;
    j["statement_id"] = statement_id;
    j["retrieved_ids"] = retrieved_ids;
    j["prev_proof"] = prev_proof;
    j["prev_feedback"] = prev_feedback;
    j["target_proof"] = target_proof;
    j["source_trajectory"] = source_trajectory;
    j["round_index"] = round_index;
    return j;
}

RepairExample RepairExample::from_json(const json& j) {
    RepairExample r;
    r.statement_id = j.at("statement_id").get<std::string>();
    if (j.contains("retrieved_ids")) r.retrieved_ids = j["retrieved_ids"].get<std::vector<std::string>>();
    r.prev_proof = j.at("prev_proof").get<std::string>();
    r.prev_feedback = j.at("prev_feedback").get<std::string>();
    r.target_proof = j.at("target_proof").get<std::string>();
    r.source_trajectory = j.value("source_trajectory", "");
    r.round_index = j.value("round_index", 2);
    r.extra = take_extra(j, {"statement_id", "retrieved_ids", "prev_proof", "prev_feedback",
                             "target_proof", "source_trajectory", "round_index"});
    return r;
}

json CorpusStats::to_json() const {
    return json{{"statement_count", statement_count},
                {"verified_proof_count", verified_proof_count},
                {"trajectory_count", trajectory_count},
                {"repair_example_count", repair_example_count},
                {"domain_histogram", domain_histogram},
                {"difficulty_histogram", difficulty_histogram}};
}

std::string statement_id_for(std::string_view lean_statement) {
    return "s" + text::hex64(text::fnv1a64(text::normalize_statement(lean_statement)));
}

std::string proof_ref(const std::string& statement_id, std::string_view proof_text) {
    return statement_id + "#" + text::hex64(text::fnv1a64(proof_text));
}

std::vector<TheoremStatement> dedup_statements(const std::vector<TheoremStatement>& statements) {
    std::vector<TheoremStatement> out;
    std::unordered_set<std::string> seen;
    out.reserve(statements.size());
    for (const auto& s : statements) {
        std::string sig = text::normalize_statement(s.lean_statement);
        if (seen.insert(sig).second) out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Classification

namespace {

// Offline labeling prompt; {FORMAL_STATEMENT} is the only substitution slot.
const char* kClassificationPrompt =
    R"PROMPT(**Instruction: Lean 4 Statement Classification (Mathematical Domain & Difficulty Level)**

You are an expert mathematician and Lean 4 specialist. You will receive a Lean 4
formal statement. Your task is to classify it along two dimensions:
1. **Mathematical Domain** (one of 10 categories)
2. **Difficulty Level** (one of 4 levels, by mathematical sophistication required,
 NOT by Lean proof length)

---

**DIMENSION 1: MATHEMATICAL DOMAIN**

Choose **exactly one** primary domain. If the statement spans multiple domains,
pick the most central one.

- **Algebra**: abstract algebra, groups/rings/fields, linear algebra, polynomials,
algebraic identities, algebraic inequalities
- **NumberTheory**: divisibility, congruences, primes, Diophantine equations,
modular arithmetic, analytic number theory
- **Analysis**: real/complex/functional analysis, calculus, limits, continuity,
series, (non-probabilistic) measure theory, analytic inequalities
- **Topology**: general topology, algebraic topology, differential topology,
topological spaces, continuity in topological settings
- **Geometry**: planar/solid/analytic geometry, differential geometry,
geometric inequalities, classical geometry problems
- **Combinatorics**: combinatorial identities, graph theory, counting,
discrete mathematics, Ramsey-style problems
- **ProbabilityStatistics**: probability theory, statistics, probabilistic
inequalities, stochastic processes
- **LogicFoundations**: logic, set theory, type theory, model theory,
foundational results, definability
- **Computation**: algorithms, complexity, formal languages, information
theory, CS-flavor mathematics
- **Other**: anything that does not fit the above, including trivially true
statements, malformed statements, or non-mathematical content.

---

**DIMENSION 2: DIFFICULTY LEVEL**

Choose **exactly one** level based on the mathematical sophistication required
to prove the statement. Do NOT base difficulty on the length or syntactic
complexity of the Lean proof.

- **Elementary**: middle-school level or below; basic arithmetic, simple
algebraic manipulations, elementary number facts, basic geometric facts.
- **HighSchool**: high-school level math; standard algebra/trigonometry/
precalculus, basic combinatorics, standard introductory contests
(AMC, AIME, Chinese gaokao).
- **Undergraduate**: standard undergraduate mathematics; linear algebra,
single/multi-variable calculus, introductory abstract algebra,
introductory real analysis, introductory topology.
- **GraduatePlus**: graduate-level or research mathematics; advanced topology,
functional analysis, algebraic geometry, advanced number theory.
Also includes olympiad-level problems (e.g., IMO, USAMO, Putnam) that
require nontrivial mathematical insight beyond standard curriculum.

*Note 1: When in doubt between two adjacent levels, prefer the lower level
unless the statement clearly requires the higher one.*
*Note 2: For statements that are trivially true (e.g., `True`, `0 = 0`),
malformed, or otherwise not meaningful mathematical claims, classify the
domain as `Other` and the difficulty as `Elementary`.*

---

**STRICT OUTPUT REQUIREMENTS:**
1. Output **ONLY** a single JSON object on a single line.
2. Do **NOT** include any explanation, markdown formatting (no ```json fences),
 or extra text outside the JSON.
3. All three fields are required.

**Output format (single JSON object):**

{"domain": "<one of the 10 domains above>", "difficulty": "<one of the 4 levels above>",
"rationale": "<one short sentence, max 25 words, explaining the classification>"}

---

**EXAMPLES**

**Example 1 (Elementary, Algebra):**
Statement:
theorem ex (a b : Nat) : a + b = b + a := by ring
Output: {"domain": "Algebra", "difficulty": "Elementary", "rationale": "Basic commutativity of
natural number addition, taught at elementary level."}

**Example 2 (HighSchool, Combinatorics):**
Statement:
theorem ex (n : Nat) (hn : 5 <= n) : Nat.choose n 2 = n * (n - 1) / 2 := by sorry
Output: {"domain": "Combinatorics", "difficulty": "HighSchool", "rationale": "Standard
binomial-coefficient identity, accessible at high-school combinatorics level."}

**Example 3 (Undergraduate, Topology):**
Statement:
theorem ex {X : Type*} [TopologicalSpace X] [CompactSpace X] [T2Space X] : NormalSpace X := by
sorry
Output: {"domain": "Topology", "difficulty": "Undergraduate", "rationale": "Standard introductory
topology result that compact Hausdorff spaces are normal."}

**Example 4 (GraduatePlus, Analysis):**
Statement:
theorem ex (f : Real -> Real) (hf : Continuous f) (h_nn : forall x, 0 <= f x)
(h_zero : Real.intervalIntegral f 0 1 = 0) : forall x in Set.Icc 0 1, f x = 0 := by sorry
Output: {"domain": "Analysis", "difficulty": "GraduatePlus", "rationale": "Standard
measure-theoretic result that a non-negative continuous function with zero integral vanishes on
the domain."}

---

**[Input Content Starts]**
{FORMAL_STATEMENT}
**[Input Content Ends]**

**Output (JSON only, single line):**
)PROMPT";

bool valid_domain(const std::string& d) {
    const auto& all = domain_labels();
    return std::find(all.begin(), all.end(), d) != all.end();
}

bool valid_difficulty(const std::string& d) {
    const auto& all = difficulty_labels();
    return std::find(all.begin(), all.end(), d) != all.end();
}

}  // namespace

std::string render_classification_prompt(const std::string& lean_statement) {
    std::string out = kClassificationPrompt;
    const std::string slot = "{FORMAL_STATEMENT}";
    auto pos = out.find(slot);
    out.replace(pos, slot.size(), lean_statement);
    return out;
}

StatementLabels classify_statement(TheoremStatement& statement, policy::PolicyClient& labeler) {
    if (statement.lean_statement.empty()) throw DomainError("cannot classify an empty statement");

    policy::GenerationRequest req;
    req.prompt = render_classification_prompt(statement.lean_statement);
    req.statement_id = statement.id;
    std::string response;
    try {
        response = labeler.generate(req);
    } catch (const PolicyUnavailable& e) {
        throw LabelerUnavailable(e.what());
    }

    // Exactly one line of the response must parse as an object carrying the
    // three required fields with valid categories.
    std::vector<StatementLabels> candidates;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= response.size(); ++i) {
        if (i != response.size() && response[i] != '\n') continue;
        std::string line = text::trim(std::string_view(response).substr(start, i - start));
        start = i + 1;
        if (line.empty() || line.front() != '{') continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) continue;
        if (!j.contains("domain") || !j.contains("difficulty") || !j.contains("rationale")) continue;
        if (!j["domain"].is_string() || !j["difficulty"].is_string() || !j["rationale"].is_string())
            continue;
        StatementLabels labels{j["domain"].get<std::string>(), j["difficulty"].get<std::string>(),
                               j["rationale"].get<std::string>()};
        if (!valid_domain(labels.domain) || !valid_difficulty(labels.difficulty)) continue;
        if (labels.rationale.empty()) continue;
        candidates.push_back(std::move(labels));
    }
    if (candidates.size() != 1) throw LabelParseError(response);

    statement.domain_label = candidates[0].domain;
    statement.difficulty_label = candidates[0].difficulty;
    statement.label_rationale = candidates[0].rationale;
    return candidates[0];
}

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (persistent()) std::filesystem::create_directories(dir_);
}

Corpus::Corpus(Corpus&& other) noexcept { *this = std::move(other); }

Corpus& Corpus::operator=(Corpus&& other) noexcept {
    if (this != &other) {
        std::unique_lock lock(other.mutex_);
        dir_ = std::move(other.dir_);
        statements_ = std::move(other.statements_);
        statement_index_ = std::move(other.statement_index_);
        proofs_ = std::move(other.proofs_);
        proof_keys_ = std::move(other.proof_keys_);
        repairs_ = std::move(other.repairs_);
        repair_keys_ = std::move(other.repair_keys_);
        trajectories_ = std::move(other.trajectories_);
    }
    return *this;
}

Corpus Corpus::open(const std::filesystem::path& dir) {
    Corpus c(dir);
    auto load = [&](const char* file) -> std::vector<json> {
        auto path = dir / file;
        if (!std::filesystem::exists(path)) return {};
        return jsonl::read_file(path);
    };
    // Later statement records with the same id supersede earlier ones
    // (append-only relabeling).
    for (const auto& j : load(kStatementsFile)) {
        auto s = TheoremStatement::from_json(j);
        auto it = c.statement_index_.find(s.id);
        if (it != c.statement_index_.end()) {
            c.statements_[it->second] = std::move(s);
        } else {
            c.statement_index_[s.id] = c.statements_.size();
            c.statements_.push_back(std::move(s));
        }
    }
    for (const auto& j : load(kProofsFile)) {
        auto p = VerifiedProof::from_json(j);
        if (c.proof_keys_.insert(proof_key(p.statement_id, p.proof_text)).second)
            c.proofs_.push_back(std::move(p));
    }
    for (const auto& j : load(kRepairsFile)) {
        auto r = RepairExample::from_json(j);
        if (c.repair_keys_.insert(repair_key(r)).second) c.repairs_.push_back(std::move(r));
    }
    c.trajectories_ = load(kTrajectoriesFile);
    return c;
}

CorpusDelta Corpus::add_statements(std::vector<TheoremStatement> statements) {
    std::unique_lock lock(mutex_);
    CorpusDelta delta;
    std::vector<json> appended;
    for (auto& s : statements) {
        if (s.lean_statement.empty()) {
            ++delta.rejected;
            delta.rejected_ids.push_back(s.id);
            continue;
        }
        if (s.id.empty()) s.id = statement_id_for(s.lean_statement);
        if (statement_index_.count(s.id)) {
            ++delta.skipped;
            continue;
        }
        appended.push_back(s.to_json());
        statement_index_[s.id] = statements_.size();
        statements_.push_back(std::move(s));
        ++delta.added;
    }
    if (persistent() && !appended.empty()) jsonl::append_file(dir_ / kStatementsFile, appended);
    return delta;
}

CorpusDelta Corpus::ingest_verified(const std::vector<VerifiedProof>& proofs) {
    std::unique_lock lock(mutex_);
    CorpusDelta delta;
    std::vector<json> appended;
    for (const auto& p : proofs) {
        if (!statement_index_.count(p.statement_id) || p.proof_text.empty()) {
            ++delta.rejected;
            delta.rejected_ids.push_back(p.statement_id);
            continue;
        }
        if (!proof_keys_.insert(proof_key(p.statement_id, p.proof_text)).second) {
            ++delta.skipped;
            continue;
        }
        appended.push_back(p.to_json());
        proofs_.push_back(p);
        ++delta.added;
    }
    if (persistent() && !appended.empty()) jsonl::append_file(dir_ / kProofsFile, appended);
    return delta;
}

void Corpus::add_trajectories(const std::vector<json>& trajectories) {
    std::unique_lock lock(mutex_);
    trajectories_.insert(trajectories_.end(), trajectories.begin(), trajectories.end());
    if (persistent() && !trajectories.empty())
        jsonl::append_file(dir_ / kTrajectoriesFile, trajectories);
}

CorpusDelta Corpus::add_repairs(const std::vector<RepairExample>& repairs) {
    std::unique_lock lock(mutex_);
    CorpusDelta delta;
    std::vector<json> appended;
    for (const auto& r : repairs) {
        if (!repair_keys_.insert(repair_key(r)).second) {
            ++delta.skipped;
            continue;
        }
        appended.push_back(r.to_json());
        repairs_.push_back(r);
        ++delta.added;
    }
    if (persistent() && !appended.empty()) jsonl::append_file(dir_ / kRepairsFile, appended);
    return delta;
}

void Corpus::set_labels(const std::string& statement_id, const StatementLabels& labels) {
    std::unique_lock lock(mutex_);
    auto it = statement_index_.find(statement_id);
    if (it == statement_index_.end()) throw DomainError("unknown statement id: " + statement_id);
    if (!valid_domain(labels.domain)) throw DomainError("invalid domain label: " + labels.domain);
    if (!valid_difficulty(labels.difficulty))
        throw DomainError("invalid difficulty label: " + labels.difficulty);
    auto& s = statements_[it->second];
    s.domain_label = labels.domain;
    s.difficulty_label = labels.difficulty;
    s.label_rationale = labels.rationale;
    if (persistent()) jsonl::append_file(dir_ / kStatementsFile, {s.to_json()});
}

std::optional<TheoremStatement> Corpus::find_statement(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = statement_index_.find(id);
    if (it == statement_index_.end()) return std::nullopt;
    return statements_[it->second];
}

std::vector<TheoremStatement> Corpus::statements() const {
    std::shared_lock lock(mutex_);
    return statements_;
}

std::vector<VerifiedProof> Corpus::proofs() const {
    std::shared_lock lock(mutex_);
    return proofs_;
}

std::vector<RepairExample> Corpus::repairs() const {
    std::shared_lock lock(mutex_);
    return repairs_;
}

std::vector<json> Corpus::trajectories() const {
    std::shared_lock lock(mutex_);
    return trajectories_;
}

std::size_t Corpus::proof_count() const {
    std::shared_lock lock(mutex_);
    return proofs_.size();
}

std::size_t Corpus::statement_count() const {
    std::shared_lock lock(mutex_);
    return statements_.size();
}

CorpusStats Corpus::stats() const {
    std::shared_lock lock(mutex_);
    CorpusStats st;
    st.statement_count = statements_.size();
    st.verified_proof_count = proofs_.size();
    st.trajectory_count = trajectories_.size();
    st.repair_example_count = repairs_.size();
    for (const auto& s : statements_) {
        if (s.domain_label) ++st.domain_histogram[*s.domain_label];
        if (s.difficulty_label) ++st.difficulty_histogram[*s.difficulty_label];
    }
    return st;
}

void Corpus::compact() const {
    std::shared_lock lock(mutex_);
    if (!persistent()) return;
    std::vector<json> st, pr, rp;
    st.reserve(statements_.size());
    for (const auto& s : statements_) st.push_back(s.to_json());
    for (const auto& p : proofs_) pr.push_back(p.to_json());
    for (const auto& r : repairs_) rp.push_back(r.to_json());
    jsonl::write_file(dir_ / kStatementsFile, st);
    jsonl::write_file(dir_ / kProofsFile, pr);
    jsonl::write_file(dir_ / kRepairsFile, rp);
    jsonl::write_file(dir_ / kTrajectoriesFile, trajectories_);
}

}  // namespace proofloop::corpus
