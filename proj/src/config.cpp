#include "proofloop/config.hpp"

#include <cstdlib>
#include <fstream>

#include "proofloop/errors.hpp"
#include "proofloop/text.hpp"

namespace proofloop::config {

RunConfig RunConfig::defaults(Mode mode) {
    RunConfig cfg;
    if (mode == Mode::Rollout) {
        cfg.round_budget = 4;
        cfg.verify_timeout_ms = 120000;
        cfg.heartbeat_cap = 2000000;
    }
    return cfg;
}

void RunConfig::validate() const {
    auto choice = [](const std::string& value, std::initializer_list<const char*> allowed,
                     const char* key) {
        for (const char* a : allowed)
            if (value == a) return;
        throw ConfigError(std::string("invalid ") + key + ": " + value);
    };
    choice(policy_backend, {"remote", "scripted"}, "policy_backend");
    choice(verifier_backend, {"remote", "simulated"}, "verifier_backend");
    choice(embedder_backend, {"remote", "test"}, "embedder_backend");

    if (policy_backend == "remote" && policy_url.empty())
        throw ConfigError("policy_backend=remote requires policy_url (or PROVER_POLICY_URL)");
    if (verifier_backend == "remote" && verifier_url.empty())
        throw ConfigError("verifier_backend=remote requires verifier_url (or PROVER_VERIFIER_URL)");
    if (embedder_backend == "remote" && embed_url.empty())
        throw ConfigError("embedder_backend=remote requires embed_url (or PROVER_EMBED_URL)");

    if (round_budget < 1) throw ConfigError("round_budget must be >= 1");
    if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (k_retrieval < 0) throw ConfigError("k_retrieval must be >= 0");
    if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
    if (top_p < 0.0 || top_p > 1.0) throw ConfigError("top_p must be in [0, 1]");
    if (max_prompt_tokens < 1) throw ConfigError("max_prompt_tokens must be >= 1");
    if (max_response_tokens < 1) throw ConfigError("max_response_tokens must be >= 1");
    if (verify_timeout_ms < 1) throw ConfigError("verify_timeout_ms must be >= 1");
    if (heartbeat_cap < 1) throw ConfigError("heartbeat_cap must be >= 1");
    if (embed_dim < 1) throw ConfigError("embed_dim must be >= 1");
}

json RunConfig::to_json() const {
    json iters = json::object();
    for (const auto& [k, url] : policy_url_iters) iters[std::to_string(k)] = url;
    return json{{"policy_backend", policy_backend},
                {"verifier_backend", verifier_backend},
                {"embedder_backend", embedder_backend},
                {"policy_url", policy_url},
                {"verifier_url", verifier_url},
                {"embed_url", embed_url},
                {"api_key", api_key.empty() ? "" : "<set>"},
                {"model", model},
                {"policy_url_iters", iters},
                {"round_budget", round_budget},
                {"n_samples", n_samples},
                {"k_retrieval", k_retrieval},
                {"parallelism", parallelism},
                {"temperature", temperature},
                {"top_p", top_p},
                {"max_response_tokens", max_response_tokens},
                {"max_prompt_tokens", max_prompt_tokens},
                {"verify_timeout_ms", verify_timeout_ms},
                {"heartbeat_cap", heartbeat_cap},
                {"reconstruct_proofs", reconstruct_proofs},
                {"seed", seed},
                {"embed_dim", embed_dim},
                {"world_file", world_file},
                {"drop_solved", drop_solved}};
}

void apply_file(RunConfig& cfg, const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file: " + file.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string trimmed = text::trim(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ConfigError(file.string() + ":" + std::to_string(lineno) +
                              ": expected key = value");
        std::string key = text::trim(trimmed.substr(0, eq));
        std::string value = text::trim(trimmed.substr(eq + 1));

        auto as_int = [&](auto& field) {
            try {
                field = static_cast<std::decay_t<decltype(field)>>(std::stoll(value));
            } catch (...) {
                throw ConfigError(file.string() + ":" + std::to_string(lineno) +
                                  ": invalid integer for " + key);
            }
        };
        auto as_double = [&](double& field) {
            try {
                field = std::stod(value);
            } catch (...) {
                throw ConfigError(file.string() + ":" + std::to_string(lineno) +
                                  ": invalid number for " + key);
            }
        };
        auto as_bool = [&](bool& field) {
            if (value == "true" || value == "1")
                field = true;
            else if (value == "false" || value == "0")
                field = false;
            else
                throw ConfigError(file.string() + ":" + std::to_string(lineno) +
                                  ": invalid boolean for " + key);
        };

        if (key == "policy_backend") cfg.policy_backend = value;
        else if (key == "verifier_backend") cfg.verifier_backend = value;
        else if (key == "embedder_backend") cfg.embedder_backend = value;
        else if (key == "policy_url") cfg.policy_url = value;
        else if (key == "verifier_url") cfg.verifier_url = value;
        else if (key == "embed_url") cfg.embed_url = value;
        else if (key == "api_key") cfg.api_key = value;
        else if (key == "model") cfg.model = value;
        else if (key == "round_budget") as_int(cfg.round_budget);
        else if (key == "n_samples") as_int(cfg.n_samples);
        else if (key == "k_retrieval") as_int(cfg.k_retrieval);
        else if (key == "parallelism") as_int(cfg.parallelism);
        else if (key == "temperature") as_double(cfg.temperature);
        else if (key == "top_p") as_double(cfg.top_p);
        else if (key == "max_response_tokens") as_int(cfg.max_response_tokens);
        else if (key == "max_prompt_tokens") as_int(cfg.max_prompt_tokens);
        else if (key == "verify_timeout_ms") as_int(cfg.verify_timeout_ms);
        else if (key == "heartbeat_cap") as_int(cfg.heartbeat_cap);
        else if (key == "reconstruct_proofs") as_bool(cfg.reconstruct_proofs);
        else if (key == "seed") as_int(cfg.seed);
        else if (key == "embed_dim") as_int(cfg.embed_dim);
        else if (key == "world_file") cfg.world_file = value;
        else if (key == "drop_solved") as_bool(cfg.drop_solved);
        else if (key.rfind("policy_url_iter_", 0) == 0) {
            try {
                cfg.policy_url_iters[std::stoi(key.substr(16))] = value;
            } catch (...) {
                throw ConfigError(file.string() + ":" + std::to_string(lineno) +
                                  ": invalid iteration suffix in " + key);
            }
        } else {
            throw ConfigError(file.string() + ":" + std::to_string(lineno) +
                              ": unknown config key " + key);
        }
    }
}

void apply_env(RunConfig& cfg) {
    if (const char* v = std::getenv("PROVER_POLICY_URL")) cfg.policy_url = v;
    if (const char* v = std::getenv("PROVER_VERIFIER_URL")) cfg.verifier_url = v;
    if (const char* v = std::getenv("PROVER_EMBED_URL")) cfg.embed_url = v;
    if (const char* v = std::getenv("PROVER_API_KEY")) cfg.api_key = v;
}

RunConfig load(const std::optional<std::filesystem::path>& file, Mode mode) {
    RunConfig cfg = RunConfig::defaults(mode);
    if (file) apply_file(cfg, *file);
    apply_env(cfg);
    return cfg;
}

}  // namespace proofloop::config
