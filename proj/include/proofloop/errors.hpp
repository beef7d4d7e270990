#pragma once

#include <stdexcept>
#include <string>

namespace proofloop {

// Transport-level failures. Distinct from domain outcomes: a proof that fails
// verification is a Verdict, not an exception; an unreachable backend is an
// exception, never a Verdict.
struct VerifierUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PolicyUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmbedderUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LabelerUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Labeler answered, but the response did not contain exactly one valid
// single-line object. Carries the raw response for triage.
class LabelParseError : public std::runtime_error {
public:
    explicit LabelParseError(std::string raw)
        : std::runtime_error("could not parse labeler response"), raw_response_(std::move(raw)) {}
    const std::string& raw_response() const { return raw_response_; }

private:
    std::string raw_response_;
};

struct DimMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyIndex : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyGroup : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Out-of-domain arguments to an estimator (k > n, m > n, ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NoFeasibleAllocation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A fixture world spec that is internally inconsistent (e.g. the scripted
// success-round proof does not verify under the simulator built from it).
struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace proofloop
