#include "proofloop/policy.hpp"

#include <algorithm>

#include <httplib.h>
#include <json.hpp>

#include "proofloop/errors.hpp"
#include "proofloop/text.hpp"

namespace proofloop::policy {

namespace {

using nlohmann::json;

// Unified round template. Slots: {FORMAL_STATEMENT}, {RETRIEVED_PROOF_1},
// {RETRIEVED_PROOF_2}, {PREVIOUS_PROOF_ATTEMPT}, {LEAN_ERROR_MESSAGES}.
const char* kRoundTemplate =
    R"TPL(**Current Task:**
Complete the following Lean 4 code:
{FORMAL_STATEMENT}

Before producing the Lean 4 proof, first provide a concise proof plan
summarizing the intended strategy, key lemmas, and proof structure.
If a previous attempt and Lean feedback are provided, revise the proof
accordingly.

Reference theorems and proofs:
{RETRIEVED_PROOF_1}
{RETRIEVED_PROOF_2}

Previous Failed Attempt:
{PREVIOUS_PROOF_ATTEMPT}

Lean Feedback:
{LEAN_ERROR_MESSAGES})TPL";

void substitute(std::string& s, const std::string& slot, const std::string& value) {
    auto pos = s.find(slot);
    if (pos != std::string::npos) s.replace(pos, slot.size(), value);
}

std::string reference_slot(const RetrievedReference& r) {
    return r.statement_text + "\n" + r.proof_text;
}

std::string render_once(const PromptState& state, const std::string& slot1,
                        const std::string& slot2, const std::string& feedback) {
    std::string out = kRoundTemplate;
    substitute(out, "{FORMAL_STATEMENT}", state.statement_text);
    substitute(out, "{RETRIEVED_PROOF_1}", slot1);
    substitute(out, "{RETRIEVED_PROOF_2}", slot2);
    substitute(out, "{PREVIOUS_PROOF_ATTEMPT}", state.round_index <= 1 ? "" : state.prev_attempt);
    substitute(out, "{LEAN_ERROR_MESSAGES}", state.round_index <= 1 ? "" : feedback);
    return out;
}

}  // namespace

PromptBundle render_prompt(const PromptState& state, const PromptLimits& limits) {
    int slots = std::clamp(limits.retrieved_slots, 0, 2);
    std::string slot1 =
        (slots >= 1 && !state.retrieved.empty()) ? reference_slot(state.retrieved[0]) : "";
    std::string slot2 =
        (slots >= 2 && state.retrieved.size() >= 2) ? reference_slot(state.retrieved[1]) : "";
    std::string feedback = state.round_index <= 1 ? "" : state.prev_feedback;

    PromptBundle bundle;
    std::string rendered = render_once(state, slot1, slot2, feedback);

    // Trim order: reference slot 2, reference slot 1, then feedback tail.
    if (text::count_tokens(rendered) > limits.max_prompt_tokens && !slot2.empty()) {
        slot2.clear();
        bundle.truncated = true;
        rendered = render_once(state, slot1, slot2, feedback);
    }
    if (text::count_tokens(rendered) > limits.max_prompt_tokens && !slot1.empty()) {
        slot1.clear();
        bundle.truncated = true;
        rendered = render_once(state, slot1, slot2, feedback);
    }
    if (text::count_tokens(rendered) > limits.max_prompt_tokens && !feedback.empty()) {
        std::size_t fixed = text::count_tokens(render_once(state, slot1, slot2, ""));
        std::size_t budget =
            limits.max_prompt_tokens > fixed ? limits.max_prompt_tokens - fixed : 0;
        std::string trimmed = budget == 0 ? "" : text::keep_tail_lines_within(feedback, budget);
        if (trimmed != feedback) bundle.truncated = true;
        feedback = std::move(trimmed);
        rendered = render_once(state, slot1, slot2, feedback);
        // A single over-long feedback line is kept whole; drop it if still over.
        if (text::count_tokens(rendered) > limits.max_prompt_tokens && !feedback.empty()) {
            feedback.clear();
            bundle.truncated = true;
            rendered = render_once(state, slot1, slot2, feedback);
        }
    }

    bundle.rendered_text = std::move(rendered);
    bundle.statement_tokens = text::count_tokens(state.statement_text);
    bundle.retrieved_tokens = text::count_tokens(slot1) + text::count_tokens(slot2);
    bundle.feedback_tokens = text::count_tokens(feedback);
    return bundle;
}

std::optional<std::string> extract_proof(std::string_view completion) {
    auto blocks = text::fenced_blocks(completion);
    if (blocks.empty()) return std::nullopt;
    auto is_lean = [](const text::FencedBlock& b) {
        std::string lower;
        lower.reserve(b.label.size());
        for (char c : b.label) lower.push_back(static_cast<char>(std::tolower(c)));
        return lower == "lean" || lower == "lean4" || lower == "lean 4";
    };
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it)
        if (is_lean(*it)) return it->content;
    return blocks.back().content;
}

HttpPolicyClient::HttpPolicyClient(std::string base_url, std::string api_key, std::string model)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), model_(std::move(model)) {}

std::string HttpPolicyClient::generate(const GenerationRequest& request) {
    httplib::Client client(base_url_);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(600, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    json body{{"prompt", request.prompt},
              {"temperature", request.params.temperature},
              {"top_p", request.params.top_p},
              {"max_tokens", request.params.max_response_tokens}};
    if (!model_.empty()) body["model"] = model_;

    auto res = client.Post("/generate", headers, body.dump(), "application/json");
    if (!res) throw PolicyUnavailable("policy endpoint unreachable: " + base_url_);
    if (res->status != 200)
        throw PolicyUnavailable("policy endpoint returned HTTP " + std::to_string(res->status));
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("text"))
        throw PolicyUnavailable("malformed policy response");
    std::string out = parsed["text"].get<std::string>();

    // The cap travels in the request; enforce it here too in case the server
    // ignores it (measured with the module tokenizer).
    auto toks = text::tokenize(out);
    if (toks.size() > static_cast<std::size_t>(request.params.max_response_tokens)) {
        const auto& last = toks[request.params.max_response_tokens - 1];
        out.resize(static_cast<std::size_t>(last.data() + last.size() - out.data()));
    }
    return out;
}

}  // namespace proofloop::policy
