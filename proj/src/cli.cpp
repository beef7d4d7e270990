#include "proofloop/cli.hpp"

#include <algorithm>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "proofloop/coevolve.hpp"
#include "proofloop/config.hpp"
#include "proofloop/corpus.hpp"
#include "proofloop/engine.hpp"
#include "proofloop/errors.hpp"
#include "proofloop/eval.hpp"
#include "proofloop/fixtures.hpp"
#include "proofloop/jsonl.hpp"
#include "proofloop/policy.hpp"
#include "proofloop/repair.hpp"
#include "proofloop/retrieval.hpp"
#include "proofloop/rl.hpp"
#include "proofloop/verifier.hpp"

namespace proofloop::cli {

namespace {

using config::RunConfig;
using nlohmann::json;

// Flag values layered over the loaded config only when actually given.
struct Overrides {
    std::string config_file;
    std::string policy_backend, verifier_backend, embedder_backend;
    std::string policy_url, verifier_url, embed_url, api_key, model, world_file;
    int round_budget = 0, n_samples = 0, k_retrieval = 0, parallelism = 0;
    int max_prompt_tokens = 0, max_response_tokens = 0;
    double temperature = 0.0, top_p = 0.0;
    std::int64_t verify_timeout_ms = 0, heartbeat_cap = 0;
    std::uint64_t seed = 0;

    std::map<std::string, CLI::Option*> opts;

    void add_to(CLI::App* cmd) {
        opts["config"] = cmd->add_option("--config", config_file, "Config file (key = value lines)");
        opts["policy_backend"] =
            cmd->add_option("--policy-backend", policy_backend, "remote | scripted");
        opts["verifier_backend"] =
            cmd->add_option("--verifier-backend", verifier_backend, "remote | simulated");
        opts["embedder_backend"] =
            cmd->add_option("--embedder-backend", embedder_backend, "remote | test");
        opts["policy_url"] = cmd->add_option("--policy-url", policy_url, "Policy endpoint");
        opts["verifier_url"] = cmd->add_option("--verifier-url", verifier_url, "Verifier endpoint");
        opts["embed_url"] = cmd->add_option("--embed-url", embed_url, "Embedding endpoint");
        opts["api_key"] = cmd->add_option("--api-key", api_key, "Bearer token");
        opts["model"] = cmd->add_option("--model", model, "Remote policy model name");
        opts["world"] = cmd->add_option("--world", world_file, "Simulated world spec (JSONL)");
        opts["round_budget"] = cmd->add_option("--round-budget", round_budget, "Rounds per rollout");
        opts["n_samples"] = cmd->add_option("--n-samples", n_samples, "Rollouts per statement");
        opts["k_retrieval"] = cmd->add_option("--k-retrieval", k_retrieval, "Retrieved proofs per round");
        opts["parallelism"] = cmd->add_option("--parallelism", parallelism, "Worker pool size");
        opts["temperature"] = cmd->add_option("--temperature", temperature, "Sampling temperature");
        opts["top_p"] = cmd->add_option("--top-p", top_p, "Nucleus sampling mass");
        opts["max_prompt_tokens"] =
            cmd->add_option("--max-prompt-tokens", max_prompt_tokens, "Prompt token budget");
        opts["max_response_tokens"] =
            cmd->add_option("--max-response-tokens", max_response_tokens, "Response token cap");
        opts["verify_timeout_ms"] =
            cmd->add_option("--timeout-ms", verify_timeout_ms, "Verification deadline");
        opts["heartbeat_cap"] = cmd->add_option("--heartbeat-cap", heartbeat_cap, "Elaborator budget");
        opts["seed"] = cmd->add_option("--seed", seed, "Run seed");
    }

    bool given(const char* name) const {
        auto it = opts.find(name);
        return it != opts.end() && it->second->count() > 0;
    }

    RunConfig resolve(config::Mode mode) const {
        std::optional<std::filesystem::path> file;
        if (given("config")) file = config_file;
        RunConfig cfg = config::load(file, mode);
        if (given("policy_backend")) cfg.policy_backend = policy_backend;
        if (given("verifier_backend")) cfg.verifier_backend = verifier_backend;
        if (given("embedder_backend")) cfg.embedder_backend = embedder_backend;
        if (given("policy_url")) cfg.policy_url = policy_url;
        if (given("verifier_url")) cfg.verifier_url = verifier_url;
        if (given("embed_url")) cfg.embed_url = embed_url;
        if (given("api_key")) cfg.api_key = api_key;
        if (given("model")) cfg.model = model;
        if (given("world")) cfg.world_file = world_file;
        if (given("round_budget")) cfg.round_budget = round_budget;
        if (given("n_samples")) cfg.n_samples = n_samples;
        if (given("k_retrieval")) cfg.k_retrieval = k_retrieval;
        if (given("parallelism")) cfg.parallelism = parallelism;
        if (given("temperature")) cfg.temperature = temperature;
        if (given("top_p")) cfg.top_p = top_p;
        if (given("max_prompt_tokens")) cfg.max_prompt_tokens = max_prompt_tokens;
        if (given("max_response_tokens")) cfg.max_response_tokens = max_response_tokens;
        if (given("verify_timeout_ms")) cfg.verify_timeout_ms = verify_timeout_ms;
        if (given("heartbeat_cap")) cfg.heartbeat_cap = heartbeat_cap;
        if (given("seed")) cfg.seed = seed;
        cfg.validate();
        return cfg;
    }
};

struct Services {
    std::optional<fixtures::World> world;
    std::unique_ptr<retrieval::EmbeddingProvider> embedder;
    std::unique_ptr<verifier::VerifierClient> owned_verifier;
    std::unique_ptr<policy::PolicyClient> owned_policy;
    std::shared_ptr<verifier::SimulatedVerifier> sim_verifier;
    std::shared_ptr<fixtures::ScriptedPolicyClient> scripted_policy;

    verifier::VerifierClient* verifier = nullptr;
    policy::PolicyClient* policy = nullptr;
};

Services build_services(const RunConfig& cfg, bool need_policy, bool need_verifier) {
    Services s;
    bool needs_world = (need_policy && cfg.policy_backend == "scripted") ||
                       (need_verifier && cfg.verifier_backend == "simulated");
    if (needs_world) {
        if (cfg.world_file.empty())
            throw ConfigError("scripted/simulated backends need world_file (--world)");
        s.world = fixtures::load_world(cfg.world_file);
    }

    if (cfg.embedder_backend == "test")
        s.embedder = std::make_unique<retrieval::TrigramEmbedder>(cfg.embed_dim);
    else
        s.embedder = std::make_unique<retrieval::HttpEmbedder>(cfg.embed_url, cfg.api_key);

    if (need_verifier) {
        if (cfg.verifier_backend == "simulated") {
            s.sim_verifier = s.world->simulator;
            s.verifier = s.sim_verifier.get();
        } else {
            s.owned_verifier = std::make_unique<verifier::HttpVerifier>(
                cfg.verifier_url, cfg.api_key, cfg.parallelism * 2);
            s.verifier = s.owned_verifier.get();
        }
    }
    if (need_policy) {
        if (cfg.policy_backend == "scripted") {
            s.scripted_policy = s.world->prover;
            s.policy = s.scripted_policy.get();
        } else {
            s.owned_policy =
                std::make_unique<policy::HttpPolicyClient>(cfg.policy_url, cfg.api_key, cfg.model);
            s.policy = s.owned_policy.get();
        }
    }
    return s;
}

engine::BatchOptions make_batch_options(const RunConfig& cfg) {
    engine::BatchOptions o;
    o.rollout.round_budget = cfg.round_budget;
    o.rollout.k_retrieval = static_cast<std::size_t>(cfg.k_retrieval);
    o.rollout.sampling.temperature = cfg.temperature;
    o.rollout.sampling.top_p = cfg.top_p;
    o.rollout.sampling.max_response_tokens = cfg.max_response_tokens;
    o.rollout.prompt_limits.max_prompt_tokens = static_cast<std::size_t>(cfg.max_prompt_tokens);
    o.rollout.prompt_limits.retrieved_slots = std::min(cfg.k_retrieval, 2);
    o.rollout.verify.timeout_ms = cfg.verify_timeout_ms;
    o.rollout.verify.heartbeat_cap = cfg.heartbeat_cap;
    o.rollout.verify.reconstruct_proofs = cfg.reconstruct_proofs;
    o.n_samples = cfg.n_samples;
    o.parallelism = cfg.parallelism;
    o.run_seed = cfg.seed;
    return o;
}

std::vector<corpus::TheoremStatement> load_pool(const std::string& pool_file,
                                                const Services& services) {
    if (!pool_file.empty()) {
        std::vector<corpus::TheoremStatement> pool;
        for (const auto& j : jsonl::read_file(pool_file))
            pool.push_back(corpus::TheoremStatement::from_json(j));
        return pool;
    }
    if (services.world) return services.world->statements;
    throw ConfigError("no statement pool: pass --pool or a --world spec");
}

std::vector<engine::Trajectory> load_trajectories(const std::string& path) {
    std::vector<engine::Trajectory> out;
    for (const auto& j : jsonl::read_file(path)) out.push_back(engine::Trajectory::from_json(j));
    return out;
}

void write_resolved_config(const std::filesystem::path& dir, const RunConfig& cfg) {
    jsonl::write_text_file(dir / "resolved_config.json", cfg.to_json().dump(2) + "\n");
}

retrieval::IndexSnapshot build_memory(const std::string& corpus_dir,
                                      retrieval::EmbeddingProvider& embedder) {
    if (corpus_dir.empty()) {
        // No corpus: an empty snapshot, so rollouts run without references.
        return std::make_shared<const retrieval::RetrievalIndex>(
            1, embedder.dim(), std::vector<retrieval::MemoryEntry>{},
            retrieval::RetrievalIndex::Matrix(0, embedder.dim()));
    }
    auto c = corpus::Corpus::open(corpus_dir);
    return retrieval::rebuild_index(c, embedder, 0);
}

std::vector<long> parse_budgets(const std::string& csv) {
    std::vector<long> budgets;
    std::size_t start = 0;
    while (start <= csv.size()) {
        auto comma = csv.find(',', start);
        std::string tok = csv.substr(start, comma == std::string::npos ? csv.size() - start
                                                                       : comma - start);
        if (!tok.empty()) budgets.push_back(std::stol(tok));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return budgets;
}

// --- subcommand bodies ------------------------------------------------------

int cmd_prove(const Overrides& ov, const std::string& pool_file, const std::string& id,
              const std::string& corpus_dir, int sample_index, const std::string& out_file) {
    RunConfig cfg = ov.resolve(config::Mode::Evaluation);
    Services services = build_services(cfg, true, true);
    auto pool = load_pool(pool_file, services);

    const corpus::TheoremStatement* statement = nullptr;
    if (!id.empty()) {
        for (const auto& s : pool)
            if (s.id == id) statement = &s;
        if (!statement) throw ConfigError("statement id not found in pool: " + id);
    } else if (pool.size() == 1) {
        statement = &pool.front();
    } else {
        throw ConfigError("--id is required when the pool has more than one statement");
    }

    auto memory = build_memory(corpus_dir, *services.embedder);
    auto options = make_batch_options(cfg);
    auto seed = engine::rollout_seed(cfg.seed, statement->id, sample_index);
    auto traj = engine::run_rollout(*statement, options.rollout, memory, *services.embedder,
                                    *services.verifier, *services.policy, seed, sample_index);

    json out{{"trajectory", traj.to_json()}, {"resolved_config", cfg.to_json()}};
    if (out_file.empty())
        std::cout << out.dump(2) << "\n";
    else
        jsonl::write_text_file(out_file, out.dump(2) + "\n");
    return traj.outcome == engine::Outcome::Aborted ? 1 : 0;
}

int cmd_batch(const Overrides& ov, const std::string& pool_file, const std::string& out_dir,
              const std::string& corpus_dir) {
    RunConfig cfg = ov.resolve(config::Mode::Evaluation);
    Services services = build_services(cfg, true, true);
    auto pool = load_pool(pool_file, services);
    auto memory = build_memory(corpus_dir, *services.embedder);

    auto result = engine::run_batch(pool, make_batch_options(cfg), memory, *services.embedder,
                                    *services.verifier, *services.policy);

    std::filesystem::path dir(out_dir);
    std::vector<json> live, aborted;
    for (const auto& t : result.trajectories)
        (t.outcome == engine::Outcome::Aborted ? aborted : live).push_back(t.to_json());
    jsonl::write_file(dir / "trajectories.jsonl", live);
    if (!aborted.empty()) jsonl::write_file(dir / "aborted.jsonl", aborted);
    jsonl::write_text_file(dir / "batch_report.json", result.report.to_json().dump(2) + "\n");
    write_resolved_config(dir, cfg);

    std::cout << result.report.to_json().dump() << "\n";
    return 0;
}

int cmd_evaluate(const Overrides& ov, const std::string& in_file, int k,
                 const std::string& sweep_csv_arg, const std::string& out_file,
                 const std::string& csv_file) {
    RunConfig cfg = ov.resolve(config::Mode::Evaluation);
    auto trajectories = load_trajectories(in_file);
    auto tallies = eval::tally_trajectories(trajectories);

    json report{{"k", k},
                {"statements", tallies.size()},
                {"pass_at_k", eval::benchmark_pass_at_k(tallies, k)}};
    json tallies_json = json::array();
    for (const auto& t : tallies)
        tallies_json.push_back(json{{"statement_id", t.statement_id}, {"n", t.n}, {"m", t.m}});
    report["tallies"] = std::move(tallies_json);

    if (!sweep_csv_arg.empty()) {
        auto rows = eval::budget_sweep(trajectories, parse_budgets(sweep_csv_arg));
        report["sweep"] = eval::sweep_report(rows);
        if (!csv_file.empty()) jsonl::write_text_file(csv_file, eval::sweep_csv(rows));
    }

    jsonl::write_text_file(out_file, report.dump(2) + "\n");
    write_resolved_config(std::filesystem::path(out_file).parent_path(), cfg);
    std::cout << "pass@" << k << " = " << report["pass_at_k"].get<double>() << " over "
              << tallies.size() << " statements\n";
    return 0;
}

int cmd_extract_repairs(const Overrides& ov, const std::string& in_file,
                        const std::string& out_file, const std::string& report_file) {
    RunConfig cfg = ov.resolve(config::Mode::Rollout);
    auto trajectories = load_trajectories(in_file);
    auto [examples, report] = repair::extract_and_dedup(trajectories);

    std::vector<json> out;
    out.reserve(examples.size());
    for (const auto& ex : examples) out.push_back(ex.to_json());
    jsonl::write_file(out_file, out);
    if (!report_file.empty())
        jsonl::write_text_file(report_file, report.to_json().dump(2) + "\n");
    write_resolved_config(std::filesystem::path(out_file).parent_path(), cfg);
    std::cout << report.to_json().dump() << "\n";
    return 0;
}

int cmd_rl_signals(const Overrides& ov, const std::string& in_file, const std::string& out_file,
                   const std::string& hard_file, double epsilon) {
    RunConfig cfg = ov.resolve(config::Mode::Rollout);
    auto trajectories = load_trajectories(in_file);
    auto groups = rl::collect_groups(trajectories);

    std::vector<json> out;
    out.reserve(groups.size());
    for (const auto& g : groups) out.push_back(rl::group_advantages(g, epsilon).to_json());
    jsonl::write_file(out_file, out);

    if (!hard_file.empty()) {
        std::string hard;
        for (const auto& id : rl::select_hard_cases(groups)) hard += id + "\n";
        jsonl::write_text_file(hard_file, hard);
    }
    write_resolved_config(std::filesystem::path(out_file).parent_path(), cfg);
    std::cout << groups.size() << " groups\n";
    return 0;
}

int cmd_coevolve(const Overrides& ov, const std::string& pool_file, const std::string& corpus_dir,
                 int iterations, bool drop_solved) {
    RunConfig cfg = ov.resolve(config::Mode::Rollout);
    Services services = build_services(cfg, true, true);
    auto pool = load_pool(pool_file, services);

    auto corpus_store = corpus::Corpus::open(corpus_dir);

    // Per-iteration policy hot-swap: remote endpoints may differ per k.
    std::vector<std::unique_ptr<policy::PolicyClient>> iter_policies;
    coevolve::PolicyProvider policy_provider = [&](int k) -> policy::PolicyClient& {
        auto it = cfg.policy_url_iters.find(k);
        if (cfg.policy_backend == "remote" && it != cfg.policy_url_iters.end()) {
            iter_policies.push_back(
                std::make_unique<policy::HttpPolicyClient>(it->second, cfg.api_key, cfg.model));
            return *iter_policies.back();
        }
        return *services.policy;
    };

    coevolve::CoevolutionOptions options;
    options.iterations = iterations;
    options.drop_solved = drop_solved || cfg.drop_solved;
    options.iteration.batch = make_batch_options(cfg);
    options.iteration.toolchain_tag =
        cfg.verifier_backend == "simulated" ? "simulated" : "lean-server";
    options.output_root = corpus_dir;

    write_resolved_config(corpus_dir, cfg);
    auto result = coevolve::run_coevolution(pool, corpus_store, *services.embedder,
                                            *services.verifier, policy_provider, options);

    json reports = json::array();
    for (const auto& r : result.reports) reports.push_back(r.to_json());
    jsonl::write_text_file(std::filesystem::path(corpus_dir) / "coevolution_report.json",
                           reports.dump(2) + "\n");
    result.final_index->save(std::filesystem::path(corpus_dir) / "index.bin");
    std::cout << "corpus proofs: " << corpus_store.proof_count()
              << ", corpus hash: " << coevolve::corpus_content_hash(corpus_store) << "\n";
    return 0;
}

int cmd_index(const Overrides& ov, const std::string& corpus_dir, const std::string& out_file) {
    RunConfig cfg = ov.resolve(config::Mode::Evaluation);
    Services services = build_services(cfg, false, false);
    auto c = corpus::Corpus::open(corpus_dir);

    std::uint64_t prev = 0;
    if (std::filesystem::exists(out_file))
        prev = retrieval::RetrievalIndex::load(out_file)->snapshot_id();
    auto index = retrieval::rebuild_index(c, *services.embedder, prev);
    index->save(out_file);
    write_resolved_config(std::filesystem::path(out_file).parent_path(), cfg);
    std::cout << "indexed " << index->size() << " proofs, snapshot " << index->snapshot_id()
              << "\n";
    return 0;
}

int cmd_classify(const Overrides& ov, const std::string& corpus_dir, int limit) {
    RunConfig cfg = ov.resolve(config::Mode::Evaluation);
    if (cfg.policy_backend != "remote")
        throw ConfigError("classify needs a remote labeler (policy_backend=remote)");
    policy::HttpPolicyClient labeler(cfg.policy_url, cfg.api_key, cfg.model);

    auto c = corpus::Corpus::open(corpus_dir);
    std::size_t labeled = 0, failed = 0;
    for (auto& s : c.statements()) {
        if (s.domain_label) continue;
        if (limit > 0 && labeled + failed >= static_cast<std::size_t>(limit)) break;
        try {
            auto labels = corpus::classify_statement(s, labeler);
            c.set_labels(s.id, labels);
            ++labeled;
        } catch (const LabelParseError&) {
            ++failed;  // the unparseable minority; skip and continue
        }
    }
    write_resolved_config(corpus_dir, cfg);
    std::cout << "labeled " << labeled << ", parse failures " << failed << "\n";
    return 0;
}

int cmd_stats(const Overrides& ov, const std::string& corpus_dir, bool compact) {
    (void)ov;
    auto c = corpus::Corpus::open(corpus_dir);
    if (compact) c.compact();
    std::cout << c.stats().to_json().dump(2) << "\n";
    return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"Agentic theorem-proving orchestration: multi-round verifier-guided rollouts, "
                 "repair extraction, RL signals, corpus co-evolution, and pass@k evaluation"};
    app.require_subcommand(1);

    // prove
    auto* prove = app.add_subcommand("prove", "Run one rollout and print the trajectory");
    Overrides prove_ov;
    prove_ov.add_to(prove);
    std::string prove_pool, prove_id, prove_corpus, prove_out;
    int prove_sample = 0;
    prove->add_option("--pool", prove_pool, "Statement pool (JSONL)");
    prove->add_option("--id", prove_id, "Statement id");
    prove->add_option("--corpus-dir", prove_corpus, "Corpus backing the retrieval memory");
    prove->add_option("--sample", prove_sample, "Sample index (seeds the rollout)");
    prove->add_option("--out", prove_out, "Write the trajectory here instead of stdout");

    // batch
    auto* batch = app.add_subcommand("batch", "Run n rollouts per statement to trajectories.jsonl");
    Overrides batch_ov;
    batch_ov.add_to(batch);
    std::string batch_pool, batch_out, batch_corpus;
    batch->add_option("--pool", batch_pool, "Statement pool (JSONL)");
    batch->add_option("--out-dir", batch_out, "Output directory")->required();
    batch->add_option("--corpus-dir", batch_corpus, "Corpus backing the retrieval memory");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Pass@k and budget-allocation analysis");
    Overrides eval_ov;
    eval_ov.add_to(evaluate);
    std::string eval_in, eval_sweep, eval_out = "report.json", eval_csv;
    int eval_k = 32;
    evaluate->add_option("--in", eval_in, "Trajectories (JSONL)")->required();
    evaluate->add_option("--k", eval_k, "Samples per statement for pass@k");
    evaluate->add_option("--sweep", eval_sweep, "Comma-separated budgets for BestPass(B)");
    evaluate->add_option("--out", eval_out, "Report file (JSON)");
    evaluate->add_option("--csv", eval_csv, "Sweep table (CSV: B,R,k,pass,is_best)");

    // extract-repairs
    auto* extract = app.add_subcommand("extract-repairs", "Round-level repair examples");
    Overrides extract_ov;
    extract_ov.add_to(extract);
    std::string ex_in, ex_out, ex_report;
    extract->add_option("--in", ex_in, "Trajectories (JSONL)")->required();
    extract->add_option("--out", ex_out, "Repair examples (JSONL)")->required();
    extract->add_option("--report", ex_report, "Filter report (JSON)");

    // rl-signals
    auto* rl_cmd = app.add_subcommand("rl-signals", "Rewards, pooled advantages, hard cases");
    Overrides rl_ov;
    rl_ov.add_to(rl_cmd);
    std::string rl_in, rl_out, rl_hard;
    double rl_epsilon = 1e-8;
    rl_cmd->add_option("--in", rl_in, "Trajectories (JSONL)")->required();
    rl_cmd->add_option("--out", rl_out, "Advantage groups (JSONL)")->required();
    rl_cmd->add_option("--hard-out", rl_hard, "Hard-case statement ids (one per line)");
    rl_cmd->add_option("--epsilon", rl_epsilon, "Std-denominator epsilon");

    // coevolve
    auto* coev = app.add_subcommand("coevolve", "Iterated rollouts growing corpus and memory");
    Overrides coev_ov;
    coev_ov.add_to(coev);
    std::string coev_pool, coev_corpus;
    int coev_iters = 1;
    bool coev_drop = false;
    coev->add_option("--pool", coev_pool, "Theorem pool (JSONL)");
    coev->add_option("--corpus-dir", coev_corpus, "Corpus directory")->required();
    coev->add_option("--iterations", coev_iters, "Number of co-evolution iterations");
    coev->add_flag("--drop-solved", coev_drop, "Remove solved statements from the pool");

    // index
    auto* index_cmd = app.add_subcommand("index", "Rebuild the retrieval index from a corpus");
    Overrides index_ov;
    index_ov.add_to(index_cmd);
    std::string idx_corpus, idx_out;
    index_cmd->add_option("--corpus-dir", idx_corpus, "Corpus directory")->required();
    index_cmd->add_option("--out", idx_out, "Index file")->required();

    // classify
    auto* classify = app.add_subcommand("classify", "Label statements by domain and difficulty");
    Overrides classify_ov;
    classify_ov.add_to(classify);
    std::string cls_corpus;
    int cls_limit = 0;
    classify->add_option("--corpus-dir", cls_corpus, "Corpus directory")->required();
    classify->add_option("--limit", cls_limit, "Label at most N statements (0 = all)");

    // stats
    auto* stats = app.add_subcommand("stats", "Corpus counts and label histograms");
    Overrides stats_ov;
    stats_ov.add_to(stats);
    std::string st_corpus;
    bool st_compact = false;
    stats->add_option("--corpus-dir", st_corpus, "Corpus directory")->required();
    stats->add_flag("--compact", st_compact, "Rewrite record files from memory first");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (prove->parsed())
            return cmd_prove(prove_ov, prove_pool, prove_id, prove_corpus, prove_sample, prove_out);
        if (batch->parsed()) return cmd_batch(batch_ov, batch_pool, batch_out, batch_corpus);
        if (evaluate->parsed())
            return cmd_evaluate(eval_ov, eval_in, eval_k, eval_sweep, eval_out, eval_csv);
        if (extract->parsed()) return cmd_extract_repairs(extract_ov, ex_in, ex_out, ex_report);
        if (rl_cmd->parsed()) return cmd_rl_signals(rl_ov, rl_in, rl_out, rl_hard, rl_epsilon);
        if (coev->parsed())
            return cmd_coevolve(coev_ov, coev_pool, coev_corpus, coev_iters, coev_drop);
        if (index_cmd->parsed()) return cmd_index(index_ov, idx_corpus, idx_out);
        if (classify->parsed()) return cmd_classify(classify_ov, cls_corpus, cls_limit);
        if (stats->parsed()) return cmd_stats(stats_ov, st_corpus, st_compact);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

int dispatch(const std::vector<std::string>& args) {
    std::vector<std::string> full;
    full.reserve(args.size() + 1);
    full.push_back("proofloop");
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const auto& a : full) argv.push_back(a.c_str());
    return dispatch(static_cast<int>(argv.size()), argv.data());
}

}  // namespace proofloop::cli
