#include "proofloop/verifier.hpp"

#include <algorithm>
#include <cctype>
#include <semaphore>

#include <httplib.h>
#include <json.hpp>

#include "proofloop/errors.hpp"
#include "proofloop/policy.hpp"
#include "proofloop/text.hpp"

namespace proofloop::verifier {

namespace {

using nlohmann::json;

// Diagnostic bodies emitted by the simulator, one per defect marker. The
// shapes mirror what the Lean toolchain prints for the matching failure.
const char* kUnsolvedGoalsText =
    "unsolved goals\n"
    "case h\n"
    "x y : Real\n"
    "h0 : x <= y\n"
    "\xE2\x8A\xA2 False";

const char* kTypeMismatchText =
    "type mismatch\n"
    "h0\n"
    "has type\n"
    "Nat.succ ?m.123\n"
    "but is expected to have type\n"
    "Real";

const char* kTacticFailureText =
    "tactic 'linarith' failed to find a contradiction\n"
    "case h\n"
    "x y : Real\n"
    "h0 : x <= y\n"
    "h1 : y <= 0\n"
    "\xE2\x8A\xA2 False";

const char* kUnknownIdentifierText = "unknown identifier 'h_bound'";

const char* kIncompleteCasesText = "alternative 'hn' has not been provided";

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '\'';
}

bool contains(std::string_view haystack, std::string_view needle) {
    return haystack.find(needle) != std::string_view::npos;
}

// "failed" preceded by an identifier-like token (a tactic name, possibly
// quoted) counts as a tactic failure.
bool has_tactic_failure(std::string_view s) {
    std::size_t pos = 0;
    while ((pos = s.find("failed", pos)) != std::string_view::npos) {
        std::size_t i = pos;
        while (i > 0 && (s[i - 1] == ' ' || s[i - 1] == '\t')) --i;
        std::size_t end = i;
        while (i > 0 && (is_ident_char(s[i - 1]) || s[i - 1] == '\'')) --i;
        std::string_view word = s.substr(i, end - i);
        while (!word.empty() && word.front() == '\'') word.remove_prefix(1);
        while (!word.empty() && word.back() == '\'') word.remove_suffix(1);
        if (!word.empty() && word != "has" &&
            std::isalpha(static_cast<unsigned char>(word.front())))
            return true;
        pos += 6;
    }
    return false;
}

std::int64_t pseudo_latency_ms(const std::string& statement_id, const std::string& proof) {
    auto h = text::fnv1a64_mix(text::fnv1a64(statement_id), proof);
    return 1 + static_cast<std::int64_t>(h % 7);
}

}  // namespace

std::string to_string(FailureTag tag) {
    switch (tag) {
        case FailureTag::UnsolvedGoals: return "unsolved_goals";
        case FailureTag::TacticFailure: return "tactic_failure";
        case FailureTag::TypeMismatch: return "type_mismatch";
        case FailureTag::UnknownIdentifier: return "unknown_identifier";
        case FailureTag::IncompleteCases: return "incomplete_cases";
        case FailureTag::Timeout: return "timeout";
        case FailureTag::NoLeanCodeFound: return "no_lean_code_found";
    }
    return "unsolved_goals";
}

FailureTag failure_tag_from_string(const std::string& s) {
    if (s == "unsolved_goals") return FailureTag::UnsolvedGoals;
    if (s == "tactic_failure") return FailureTag::TacticFailure;
    if (s == "type_mismatch") return FailureTag::TypeMismatch;
    if (s == "unknown_identifier") return FailureTag::UnknownIdentifier;
    if (s == "incomplete_cases") return FailureTag::IncompleteCases;
    if (s == "timeout") return FailureTag::Timeout;
    if (s == "no_lean_code_found") return FailureTag::NoLeanCodeFound;
    throw IoError("unknown failure tag: " + s);
}

std::string sanitize_feedback(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    std::size_t i = 0;
    while (i < raw.size()) {
        if (raw[i] == '\x1b' && i + 1 < raw.size() && raw[i + 1] == '[') {
            std::size_t j = i + 2;
            while (j < raw.size() && !(raw[j] >= '\x40' && raw[j] <= '\x7e')) ++j;
            if (j < raw.size()) {
                i = j + 1;  // skip through the final byte
                continue;
            }
            // Unterminated sequence: drop the rest of the escape.
            i = raw.size();
            continue;
        }
        out.push_back(raw[i]);
        ++i;
    }
    return out;
}

std::set<FailureTag> tag_feedback(std::string_view feedback) {
    std::set<FailureTag> tags;
    if (contains(feedback, "unsolved goals")) tags.insert(FailureTag::UnsolvedGoals);
    if (contains(feedback, "type mismatch")) tags.insert(FailureTag::TypeMismatch);
    if (contains(feedback, "unknown identifier")) tags.insert(FailureTag::UnknownIdentifier);
    if (has_tactic_failure(feedback)) tags.insert(FailureTag::TacticFailure);
    if (contains(feedback, "alternative")) {
        auto pos = feedback.find("alternative");
        if (feedback.find("has not been provided", pos) != std::string_view::npos)
            tags.insert(FailureTag::IncompleteCases);
    }
    if (contains(feedback, "timeout") || contains(feedback, "timed out") ||
        contains(feedback, "heartbeat"))
        tags.insert(FailureTag::Timeout);
    if (contains(feedback, policy::kNoLeanCodeFound)) tags.insert(FailureTag::NoLeanCodeFound);
    return tags;
}

// ---------------------------------------------------------------------------
// SimulatedVerifier

void SimulatedVerifier::register_statement(const std::string& statement_id,
                                           std::string canonical_solution) {
    solutions_[statement_id] = std::move(canonical_solution);
}

bool SimulatedVerifier::knows(const std::string& statement_id) const {
    return solutions_.count(statement_id) > 0;
}

Verdict SimulatedVerifier::verify(const std::string& statement_id, const std::string& proof_text,
                                  const VerifyOptions& options) {
    Verdict v;
    std::int64_t latency = pseudo_latency_ms(statement_id, proof_text);

    if (contains(proof_text, "STALL") || latency > options.timeout_ms) {
        v.verified = false;
        v.elapsed_ms = options.timeout_ms;
        v.feedback = "verification timed out after " + std::to_string(options.timeout_ms) + " ms";
        v.failure_tags = tag_feedback(v.feedback);
        v.failure_tags.insert(FailureTag::Timeout);
        return v;
    }

    v.elapsed_ms = latency;
    auto it = solutions_.find(statement_id);
    if (it != solutions_.end() && text::equal_modulo_whitespace(proof_text, it->second)) {
        v.verified = true;
        return v;
    }

    std::string raw;
    auto emit = [&](const char* block) {
        if (!raw.empty()) raw += "\n\n";
        if (emit_ansi_) raw += "\x1b[1;31m";
        raw += block;
        if (emit_ansi_) raw += "\x1b[0m";
    };
    if (contains(proof_text, "BAD_TYPE")) emit(kTypeMismatchText);
    if (contains(proof_text, "BAD_TACTIC")) emit(kTacticFailureText);
    if (contains(proof_text, "BAD_IDENT")) emit(kUnknownIdentifierText);
    if (contains(proof_text, "BAD_CASES")) emit(kIncompleteCasesText);
    if (contains(proof_text, "sorry")) emit(kUnsolvedGoalsText);
    if (raw.empty()) emit(kUnsolvedGoalsText);

    v.verified = false;
    v.feedback = sanitize_feedback(raw);
    v.failure_tags = tag_feedback(v.feedback);
    return v;
}

// ---------------------------------------------------------------------------
// HttpVerifier

struct HttpVerifier::Impl {
    std::string base_url;
    std::string api_key;
    std::counting_semaphore<256> in_flight;

    Impl(std::string url, std::string key, int max_in_flight)
        : base_url(std::move(url)), api_key(std::move(key)),
          in_flight(std::max(1, std::min(max_in_flight, 256))) {}
};

HttpVerifier::HttpVerifier(std::string base_url, std::string api_key, int max_in_flight)
    : impl_(std::make_unique<Impl>(std::move(base_url), std::move(api_key), max_in_flight)) {}

HttpVerifier::~HttpVerifier() = default;

Verdict HttpVerifier::verify(const std::string& /*statement_id*/, const std::string& proof_text,
                             const VerifyOptions& options) {
    impl_->in_flight.acquire();
    struct Release {
        std::counting_semaphore<256>& sem;
        ~Release() { sem.release(); }
    } release{impl_->in_flight};

    httplib::Client client(impl_->base_url);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(options.timeout_ms / 1000 + 30, 0);
    httplib::Headers headers;
    if (!impl_->api_key.empty()) headers.emplace("Authorization", "Bearer " + impl_->api_key);

    json body{{"proof", proof_text},
              {"timeout_ms", options.timeout_ms},
              {"heartbeat_cap", options.heartbeat_cap},
              {"reconstruct", options.reconstruct_proofs}};
    auto res = client.Post("/verify", headers, body.dump(), "application/json");
    if (!res) throw VerifierUnavailable("verifier endpoint unreachable: " + impl_->base_url);
    if (res->status != 200)
        throw VerifierUnavailable("verifier endpoint returned HTTP " +
                                  std::to_string(res->status));
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("verified"))
        throw VerifierUnavailable("malformed verifier response");

    Verdict v;
    v.verified = parsed["verified"].get<bool>();
    v.feedback = sanitize_feedback(parsed.value("diagnostics", ""));
    v.elapsed_ms = parsed.value("elapsed_ms", 0);
    if (!v.verified) {
        v.failure_tags = tag_feedback(v.feedback);
        if (v.elapsed_ms >= options.timeout_ms) v.failure_tags.insert(FailureTag::Timeout);
    }
    return v;
}

}  // namespace proofloop::verifier
