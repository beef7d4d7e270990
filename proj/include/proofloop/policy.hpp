#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace proofloop::policy {

// Feedback literal recorded when a completion carries no extractable code.
inline constexpr const char* kNoLeanCodeFound = "no_lean_code_found";

struct SamplingParams {
    double temperature = 1.0;
    double top_p = 0.999;
    int max_response_tokens = 32000;
    std::optional<std::uint64_t> seed;  // honored by scripted clients only
};

struct GenerationRequest {
    std::string prompt;
    SamplingParams params;
    // Routing hints consumed by scripted clients; remote clients ignore them.
    std::string statement_id;
    int round_index = 1;
    int sample_index = 0;
    std::uint64_t seed = 0;
};

class PolicyClient {
public:
    virtual ~PolicyClient() = default;
    // One completion per call. Throws PolicyUnavailable on transport failure.
    virtual std::string generate(const GenerationRequest& request) = 0;
};

// Chat-completion style remote policy: POST {base_url}/generate with
// {prompt, temperature, top_p, max_tokens}, response {text}.
class HttpPolicyClient : public PolicyClient {
public:
    HttpPolicyClient(std::string base_url, std::string api_key = "", std::string model = "");
    std::string generate(const GenerationRequest& request) override;

private:
    std::string base_url_;
    std::string api_key_;
    std::string model_;
};

// Lambda-backed client for tests and stubs.
class FunctionPolicyClient : public PolicyClient {
public:
    explicit FunctionPolicyClient(std::function<std::string(const GenerationRequest&)> fn)
        : fn_(std::move(fn)) {}
    std::string generate(const GenerationRequest& request) override { return fn_(request); }

private:
    std::function<std::string(const GenerationRequest&)> fn_;
};

// One retrieved reference as it appears in a prompt slot.
struct RetrievedReference {
    std::string statement_text;
    std::string proof_text;
    std::string ref_id;
};

// The round-t conditioning tuple as the prompt renderer sees it. At round 1
// prev_attempt and prev_feedback are empty and render as empty sections.
struct PromptState {
    std::string statement_text;
    std::vector<RetrievedReference> retrieved;
    std::string prev_attempt;
    std::string prev_feedback;
    int round_index = 1;
};

struct PromptLimits {
    std::size_t max_prompt_tokens = 14000;
    int retrieved_slots = 2;  // template exposes at most two reference slots
};

struct PromptBundle {
    std::string rendered_text;
    std::size_t statement_tokens = 0;
    std::size_t retrieved_tokens = 0;
    std::size_t feedback_tokens = 0;
    bool truncated = false;
};

// Renders the unified round template. When the result would exceed
// max_prompt_tokens, trimming applies in order: drop reference slot 2, drop
// reference slot 1, head-truncate the feedback to its final lines. The
// statement and the previous attempt are never trimmed.
PromptBundle render_prompt(const PromptState& state, const PromptLimits& limits = {});

// Content of the last fenced block labeled `lean` (or the last fenced block
// when none is labeled). nullopt when the completion has no fenced block.
std::optional<std::string> extract_proof(std::string_view completion);

}  // namespace proofloop::policy
