#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>

namespace proofloop::verifier {

enum class FailureTag {
    UnsolvedGoals,
    TacticFailure,
    TypeMismatch,
    UnknownIdentifier,
    IncompleteCases,
    Timeout,
    NoLeanCodeFound,
};

std::string to_string(FailureTag tag);
FailureTag failure_tag_from_string(const std::string& s);

// Outcome of one verification request. `feedback` is the sanitized raw
// diagnostic text and is the only thing the policy ever sees; the tags are
// a coarse diagnostic overlay for reporting and simulation, never input to
// the policy.
struct Verdict {
    bool verified = false;
    std::string feedback;
    std::int64_t elapsed_ms = 0;
    std::set<FailureTag> failure_tags;
};

// Removes ANSI CSI escape sequences (ESC '[' ... final byte). Nothing else is
// altered: no truncation, no reordering, no taxonomy mapping.
std::string sanitize_feedback(std::string_view raw);

// Coarse substring tagging of a diagnostic. Multiple tags allowed; unknown
// text yields the empty set.
std::set<FailureTag> tag_feedback(std::string_view feedback);

struct VerifyOptions {
    std::int64_t timeout_ms = 240000;
    std::int64_t heartbeat_cap = 4000000;
    bool reconstruct_proofs = false;  // backend-side option, passed through opaquely
};

class VerifierClient {
public:
    virtual ~VerifierClient() = default;
    // Judges one proof attempt. `statement_id` is context for simulated
    // backends; remote backends receive only the proof. Throws
    // VerifierUnavailable when the backend cannot be reached (distinct from a
    // failed proof).
    virtual Verdict verify(const std::string& statement_id, const std::string& proof_text,
                           const VerifyOptions& options) = 0;
};

// Deterministic in-process verifier. Each statement registers a canonical
// solution; a proof verifies iff it equals that solution modulo whitespace.
// A failing proof's feedback is synthesized from the defect markers it
// contains (`sorry`, `BAD_TYPE`, `BAD_TACTIC`, `BAD_IDENT`, `BAD_CASES`), and
// a proof containing `STALL` exhausts the request deadline. verify() is a
// pure function of (statement_id, proof_text, options).
class SimulatedVerifier : public VerifierClient {
public:
    void register_statement(const std::string& statement_id, std::string canonical_solution);
    bool knows(const std::string& statement_id) const;

    // When set, raw diagnostics are wrapped in color escape codes before the
    // sanitize step, exercising the stripping path end to end.
    void set_emit_ansi(bool emit) { emit_ansi_ = emit; }

    Verdict verify(const std::string& statement_id, const std::string& proof_text,
                   const VerifyOptions& options) override;

private:
    std::map<std::string, std::string> solutions_;
    bool emit_ansi_ = false;
};

// Remote Lean-server client: POST {base_url}/verify with {proof, timeout_ms,
// heartbeat_cap, reconstruct}, response {verified, diagnostics, elapsed_ms}.
// Safe for concurrent calls; a bounded in-flight limit backpressures callers.
class HttpVerifier : public VerifierClient {
public:
    explicit HttpVerifier(std::string base_url, std::string api_key = "",
                          int max_in_flight = 32);
    ~HttpVerifier() override;

    Verdict verify(const std::string& statement_id, const std::string& proof_text,
                   const VerifyOptions& options) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace proofloop::verifier
