// Command-line front end: partition simulator, meta-rewarding training loop,
// corpus scoring, Elo tournaments, and text metrics. All artifacts are CSV or
// JSON(-lines) and embed {seed, config digest, tool version} for replay.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "mpo/corpus.hpp"
#include "mpo/elo.hpp"
#include "mpo/errors.hpp"
#include "mpo/judge.hpp"
#include "mpo/meta_loop.hpp"
#include "mpo/rouge.hpp"
#include "mpo/rubric.hpp"
#include "mpo/scoring.hpp"
#include "mpo/sim_config.hpp"
#include "mpo/text.hpp"
#include "mpo/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "mpo/0.1.0";

struct GlobalOptions {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::string judge_spec;
};

// Effective subcommand configuration: config file merged with flag overrides,
// unknown keys rejected.
struct RunConfig {
    json values = json::object();
    std::uint64_t seed = 0;
    std::string digest;

    bool has(const std::string& key) const { return values.contains(key); }

    template <typename T>
    T get(const std::string& key, T fallback) const {
        if (!values.contains(key)) return fallback;
        return values.at(key).get<T>();
    }
    std::string get_str(const std::string& key, const std::string& fallback = "") const {
        return get<std::string>(key, fallback);
    }
};

RunConfig load_run_config(const GlobalOptions& global, const json& overrides,
                          const std::vector<std::string>& known_keys) {
    json merged = json::object();
    if (!global.config_path.empty()) {
        std::ifstream in(global.config_path);
        if (!in) throw mpo::ConfigError("cannot open config " + global.config_path);
        json from_file = json::parse(in, nullptr, false);
        if (from_file.is_discarded())
            throw mpo::ConfigError("config " + global.config_path + " is not valid JSON");
        if (!from_file.is_object())
            throw mpo::ConfigError("config root must be a JSON object");
        merged = from_file;
    }
    for (auto& [key, value] : overrides.items()) merged[key] = value;

    for (auto& [key, value] : merged.items()) {
        (void)value;
        if (key == "seed" || key == "out" || key == "judge") continue;
        bool known = false;
        for (const auto& k : known_keys)
            if (k == key) {
                known = true;
                break;
            }
        if (!known) throw mpo::ConfigError("unknown config key '" + key + "'");
    }

    RunConfig cfg;
    cfg.values = merged;
    cfg.seed = merged.value("seed", global.seed);
    json for_digest = merged;
    for_digest["seed"] = cfg.seed;
    cfg.digest = mpo::fnv1a_hex(for_digest.dump());
    return cfg;
}

std::string artifact_comment(const RunConfig& cfg) {
    return "# seed=" + std::to_string(cfg.seed) + " config=" + cfg.digest +
           " tool=" + std::string(kToolVersion);
}

json artifact_meta(const RunConfig& cfg) {
    return json{{"seed", cfg.seed}, {"config", cfg.digest}, {"tool", kToolVersion}};
}

std::ofstream open_artifact(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw mpo::ConfigError("cannot write " + path.string());
    return out;
}

std::string sanitize(const std::string& name) {
    std::string out = name;
    for (char& c : out)
        if (c == '/' || c == '\\' || c == ' ') c = '_';
    return out;
}

// ---------------------------------------------------------------- simulate

void write_trace_csv(const fs::path& path, const RunConfig& cfg,
                     const std::vector<mpo::TraceRow>& trace) {
    auto out = open_artifact(path);
    out << artifact_comment(cfg) << "\n";
    out << "step,phase,obs_reward,golden_return,kl\n";
    for (const auto& row : trace) {
        out << row.step << ',' << row.phase << ',' << mpo::format_double(row.obs_reward)
            << ',' << mpo::format_double(row.golden_return) << ','
            << mpo::format_double(row.kl) << "\n";
    }
}

int cmd_simulate(const GlobalOptions& global, const RunConfig& cfg) {
    std::string problem_path = cfg.get_str("problem");
    if (problem_path.empty()) throw mpo::ConfigError("simulate needs a problem file");
    mpo::SimProblem problem = mpo::load_sim_problem_file(problem_path);

    mpo::TrainConfig train;
    train.steps = cfg.get<long>("steps", 2000);
    train.horizon = cfg.get<int>("horizon", 60);
    train.learning_rate = cfg.get<double>("learning_rate", 0.2);
    train.entropy_bonus = cfg.get<double>("entropy_bonus", 0.0);
    train.eval_interval = cfg.get<long>("eval_interval", 1);
    train.start = problem.start;

    auto vi = mpo::value_iteration(problem.mdp, problem.mdp.golden_reward, 1e-10);
    double vi_optimum = 0.0;
    for (int s = 0; s < problem.mdp.num_states; ++s)
        vi_optimum += problem.start[s] * vi.values[s];

    struct Variant {
        std::string name;
        mpo::RefinementSchedule schedule;
    };
    mpo::RefinementSchedule full_at_zero;
    if (!problem.initial_partition.all_singletons())
        full_at_zero.splits.push_back({0, {mpo::SplitRule::FullSingleton, ""}});
    std::vector<Variant> variants = {
        {"coarse", {}},
        {"scheduled", problem.schedule},
        {"refined", full_at_zero},
    };

    fs::path out_dir(cfg.get_str("out", global.out_dir));
    auto summary = open_artifact(out_dir / "summary.csv");
    summary << artifact_comment(cfg) << "\n";
    summary << "variant,final_golden_return,greedy_golden_return,vi_optimum,gap\n";

    for (const auto& variant : variants) {
        std::mt19937_64 rng(cfg.seed);
        mpo::TrainResult result = mpo::policy_train(problem.mdp, variant.schedule,
                                                    problem.initial_partition, train, rng);
        write_trace_csv(out_dir / ("trace_" + variant.name + ".csv"), cfg, result.trace);

        double final_return =
            mpo::golden_return(problem.mdp, result.final_partition, result.policy,
                               problem.start);
        double greedy_return =
            mpo::golden_return(problem.mdp, result.final_partition,
                               mpo::argmax_policy(result.policy), problem.start);
        summary << variant.name << ',' << mpo::format_double(final_return) << ','
                << mpo::format_double(greedy_return) << ','
                << mpo::format_double(vi_optimum) << ','
                << mpo::format_double(vi_optimum - final_return) << "\n";
        std::cout << variant.name << ": golden_return=" << mpo::format_double(final_return)
                  << " greedy=" << mpo::format_double(greedy_return)
                  << " optimum=" << mpo::format_double(vi_optimum) << "\n";
    }
    return 0;
}

// ----------------------------------------------------------------- mpo-run

struct PolicySource {
    // Replay corpus by default; "remote:URL" asks an endpoint for each
    // generation ({"prompt": ...} -> {"generation": ...}).
    std::vector<mpo::GenerationRecord> replay;
    std::string remote_url;

    mpo::GenerationRecord fetch(std::size_t index) const {
        const mpo::GenerationRecord& base = replay[index % replay.size()];
        if (remote_url.empty()) return base;
        mpo::GenerationRecord out = base;
        std::size_t scheme = remote_url.find("://");
        std::size_t slash =
            scheme == std::string::npos ? remote_url.find('/') : remote_url.find('/', scheme + 3);
        std::string base_url = slash == std::string::npos ? remote_url : remote_url.substr(0, slash);
        std::string path = slash == std::string::npos ? "/generate" : remote_url.substr(slash);
        httplib::Client client(base_url);
        json body{{"prompt", base.prompt}};
        auto res = client.Post(path, body.dump(), "application/json");
        if (!res || res->status != 200)
            throw mpo::TransportError("policy endpoint unreachable at " + remote_url);
        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("generation"))
            throw mpo::TransportError("policy endpoint returned no generation");
        out.generation = reply.at("generation").get<std::string>();
        return out;
    }
};

int cmd_mpo_run(const GlobalOptions& global, const RunConfig& cfg) {
    std::string judge_spec = cfg.get_str("judge", global.judge_spec);
    if (judge_spec.empty())
        throw mpo::ConfigError("mpo-run needs --judge scripted:FILE or remote:URL");
    auto judge = mpo::make_judge_backend(judge_spec);

    std::string rubric_path = cfg.get_str("rubric");
    if (rubric_path.empty()) throw mpo::ConfigError("mpo-run needs an initial rubric file");
    std::ifstream rin(rubric_path);
    if (!rin) throw mpo::ConfigError("cannot open rubric " + rubric_path);
    std::stringstream rbuf;
    rbuf << rin.rdbuf();
    mpo::Rubric initial = mpo::parse_rubric(rbuf.str());
    initial.version = 0;
    initial.source = "initial";

    std::string corpus_path = cfg.get_str("corpus");
    if (corpus_path.empty()) throw mpo::ConfigError("mpo-run needs a generation corpus");
    PolicySource policy;
    policy.replay = mpo::load_corpus_file(corpus_path);
    if (policy.replay.empty()) throw mpo::ConfigError("generation corpus is empty");
    std::string policy_spec = cfg.get_str("policy", "replay");
    if (policy_spec.rfind("remote:", 0) == 0) policy.remote_url = policy_spec.substr(7);
    else if (policy_spec != "replay")
        throw mpo::ConfigError("policy must be 'replay' or 'remote:URL'");

    mpo::MpoConfig mpo_cfg;
    mpo_cfg.k = cfg.get<long>("k", 10);
    mpo_cfg.n = cfg.get<int>("n", 4);
    mpo_cfg.analysis_max_words = cfg.get<int>("analysis_max_words", 600);
    mpo_cfg.refine_max_words = cfg.get<int>("refine_max_words", 1200);
    mpo_cfg.seed = cfg.seed;
    std::string keying = cfg.get_str("keying", "single");
    if (keying == "single") mpo_cfg.keying = mpo::ClusterKeying::Single;
    else if (keying == "by-subject-cluster")
        mpo_cfg.keying = mpo::ClusterKeying::BySubjectCluster;
    else throw mpo::ConfigError("keying must be single or by-subject-cluster");

    long steps = cfg.get<long>("steps", 20);
    int batch_size = cfg.get<int>("batch_size", 4);
    if (steps < 0 || batch_size <= 0)
        throw mpo::ConfigError("steps must be >= 0 and batch_size > 0");
    bool lenient = cfg.get<bool>("lenient_totals", false);
    std::string mode = cfg.get_str("mode", "rubric");
    if (mode != "rubric" && mode != "plan-then-execute" && mode != "math-dual")
        throw mpo::ConfigError("mode must be rubric, plan-then-execute, or math-dual");
    std::string task_description =
        cfg.get_str("task_description", "Evaluate the student's response to the prompt.");

    mpo::TrainingContext ctx(task_description, initial, mpo_cfg);
    std::mt19937_64 rng(cfg.seed);

    fs::path out_dir(cfg.get_str("out", global.out_dir));
    auto rewards = open_artifact(out_dir / "rewards.csv");
    rewards << artifact_comment(cfg) << "\n";
    rewards << "step,effective_step,mean_total,mean_normalized\n";
    auto markers = open_artifact(out_dir / "mpo_rounds.csv");
    markers << artifact_comment(cfg) << "\n";
    markers << "round,step,effective_step,cluster,version,success\n";
    auto scores_out = open_artifact(out_dir / "scores.jsonl");
    scores_out << json{{"meta", artifact_meta(cfg)}}.dump() << "\n";
    auto records_out = open_artifact(out_dir / "mpo_records.jsonl");
    records_out << json{{"meta", artifact_meta(cfg)}}.dump() << "\n";

    long round = 0;
    std::size_t cursor = 0;
    int exit_code = 0;
    std::string abort_reason;

    try {
        for (long step = 1; step <= steps; ++step) {
            std::vector<mpo::ScoredSample> batch;
            for (int b = 0; b < batch_size; ++b) {
                mpo::GenerationRecord gen = policy.fetch(cursor++);
                const mpo::Rubric& rubric = ctx.rubric_for(
                    mpo_cfg.keying == mpo::ClusterKeying::Single ? "default" : gen.cluster);

                mpo::ScoringRequest request;
                request.rubric_text = mpo::render_rubric(rubric);
                request.task_description = task_description;
                request.student_prompt = gen.prompt;
                request.student_generation = gen.generation;
                request.reference = gen.reference;

                mpo::ScoreReport report;
                if (mode == "rubric") {
                    request.mode = mpo::ScoreMode::Rubric;
                    report = mpo::score_with_rubric(*judge, request, rubric, lenient);
                } else if (mode == "plan-then-execute") {
                    request.mode = mpo::ScoreMode::PlanThenExecute;
                    report = mpo::plan_then_execute_score(*judge, request, lenient);
                } else {  // math-dual: fair coin between the two scoring modes
                    if (mpo::pick_math_mode(rng) == mpo::MathScoringMode::ExactMatch) {
                        int hit = mpo::exact_match_score(gen.generation, gen.reference);
                        report.total = hit;
                        report.attainable = 1;
                        report.normalized = hit;
                        report.raw = "exact-match";
                    } else {
                        request.mode = mpo::ScoreMode::PlanThenExecute;
                        report = mpo::plan_then_execute_score(*judge, request, lenient);
                    }
                }

                mpo::ScoredSample sample;
                sample.id = gen.id;
                sample.cluster = gen.cluster;
                sample.prompt = gen.prompt;
                sample.generation = gen.generation;
                sample.reference = gen.reference;
                sample.per_item = report.per_item;
                sample.total = report.total;
                sample.attainable = report.attainable;
                sample.normalized = report.normalized;
                batch.push_back(sample);

                json row{{"step", step},        {"id", sample.id},
                         {"cluster", sample.cluster}, {"total", sample.total},
                         {"attainable", sample.attainable},
                         {"normalized", sample.normalized}};
                if (!sample.per_item.empty()) row["per_item"] = sample.per_item;
                scores_out << row.dump() << "\n";
            }

            double mean_total = 0.0, mean_norm = 0.0;
            for (const auto& s : batch) {
                mean_total += s.total;
                mean_norm += s.normalized;
            }
            mean_total /= batch.size();
            mean_norm /= batch.size();
            mpo::accumulate(ctx, batch);
            rewards << step << ',' << step * static_cast<long>(batch_size) << ','
                    << mpo::format_double(mean_total) << ',' << mpo::format_double(mean_norm)
                    << "\n";

            if (mpo::should_trigger(ctx)) {
                for (const std::string& cluster : mpo::due_clusters(ctx)) {
                    mpo::MpoRecord record = mpo::run_mpo_step(ctx, cluster, *judge, rng);
                    ++round;
                    records_out << mpo::to_json_line(record) << "\n";
                    markers << round << ',' << step << ','
                            << step * static_cast<long>(batch_size) << ',' << cluster << ','
                            << record.merged_version << ',' << (record.success ? 1 : 0)
                            << "\n";
                }
            }
        }
    } catch (const mpo::TransportError& e) {
        abort_reason = e.what();
        exit_code = 1;
    }

    // Rubric history: one file per cluster keeps each version chain gap-free.
    for (const std::string& cluster : ctx.known_clusters()) {
        std::string suffix = mpo_cfg.keying == mpo::ClusterKeying::Single
                                 ? std::string()
                                 : "_" + sanitize(cluster);
        auto history = open_artifact(out_dir / ("rubric_history" + suffix + ".jsonl"));
        history << json{{"meta", artifact_meta(cfg)}}.dump() << "\n";
        for (const auto& entry : ctx.rubric_history(cluster))
            history << mpo::to_json_line(entry) << "\n";

        auto lengths = open_artifact(out_dir / ("rubric_lengths" + suffix + ".csv"));
        lengths << artifact_comment(cfg) << "\n";
        lengths << "version,mean_item_length\n";
        for (const auto& entry : ctx.rubric_history(cluster))
            lengths << entry.version << ',' << mpo::format_double(entry.mean_item_length)
                    << "\n";
    }

    if (exit_code != 0)
        std::cerr << "mpo-run aborted (partial outputs flushed): " << abort_reason << "\n";
    else
        std::cout << "mpo-run finished: " << round << " rounds over " << steps << " steps\n";
    return exit_code;
}

// ------------------------------------------------------------------- score

int cmd_score(const GlobalOptions& global, const RunConfig& cfg) {
    std::string judge_spec = cfg.get_str("judge", global.judge_spec);
    if (judge_spec.empty()) throw mpo::ConfigError("score needs a judge backend");
    auto judge = mpo::make_judge_backend(judge_spec);

    std::string corpus_path = cfg.get_str("corpus");
    if (corpus_path.empty()) throw mpo::ConfigError("score needs a corpus file");
    std::vector<mpo::GenerationRecord> corpus = mpo::load_corpus_file(corpus_path);
    std::string task_description =
        cfg.get_str("task_description", "Evaluate the student's response to the prompt.");
    bool lenient = cfg.get<bool>("lenient_totals", false);
    fs::path out_dir(cfg.get_str("out", global.out_dir));

    std::string history_path = cfg.get_str("rubric_history");
    if (!history_path.empty()) {
        std::vector<mpo::RubricHistoryEntry> entries =
            mpo::load_rubric_history_file(history_path);
        if (entries.empty()) throw mpo::ConfigError("rubric history is empty");
        std::vector<mpo::Rubric> history;
        for (const auto& entry : entries) {
            mpo::Rubric r = mpo::parse_rubric(entry.text);
            r.version = entry.version;
            r.source = entry.source;
            history.push_back(std::move(r));
        }
        mpo::RescoreResult rescore =
            mpo::rescore_corpus(*judge, corpus, history, task_description);

        auto means = open_artifact(out_dir / "rescore_means.csv");
        means << artifact_comment(cfg) << "\n";
        means << "version,mean_normalized_total,failures\n";
        for (std::size_t v = 0; v < rescore.versions.size(); ++v)
            means << rescore.versions[v] << ','
                  << mpo::format_double(rescore.mean_per_version[v]) << ','
                  << rescore.failures_per_version[v] << "\n";

        auto matrix = open_artifact(out_dir / "rescore_matrix.csv");
        matrix << artifact_comment(cfg) << "\n";
        matrix << "version,id,normalized\n";
        for (std::size_t v = 0; v < rescore.versions.size(); ++v)
            for (std::size_t g = 0; g < corpus.size(); ++g)
                matrix << rescore.versions[v] << ',' << corpus[g].id << ','
                       << (std::isnan(rescore.normalized[v][g])
                               ? std::string("error")
                               : mpo::format_double(rescore.normalized[v][g]))
                       << "\n";

        auto lengths = open_artifact(out_dir / "rubric_lengths.csv");
        lengths << artifact_comment(cfg) << "\n";
        lengths << "version,mean_item_length\n";
        for (const auto& entry : entries)
            lengths << entry.version << ',' << mpo::format_double(entry.mean_item_length)
                    << "\n";
        return 0;
    }

    std::string rubric_path = cfg.get_str("rubric");
    if (rubric_path.empty())
        throw mpo::ConfigError("score needs a rubric or rubric_history file");
    std::ifstream rin(rubric_path);
    if (!rin) throw mpo::ConfigError("cannot open rubric " + rubric_path);
    std::stringstream rbuf;
    rbuf << rin.rdbuf();
    mpo::Rubric rubric = mpo::parse_rubric(rbuf.str());

    auto out = open_artifact(out_dir / "scores.csv");
    out << artifact_comment(cfg) << "\n";
    out << "id,total,normalized\n";
    for (const auto& gen : corpus) {
        mpo::ScoringRequest request;
        request.rubric_text = mpo::render_rubric(rubric);
        request.task_description = task_description;
        request.student_prompt = gen.prompt;
        request.student_generation = gen.generation;
        request.mode = mpo::ScoreMode::Rubric;
        mpo::ScoreReport report = mpo::score_with_rubric(*judge, request, rubric, lenient);
        out << gen.id << ',' << report.total << ',' << mpo::format_double(report.normalized)
            << "\n";
    }
    return 0;
}

// -------------------------------------------------------------- tournament

int cmd_tournament(const GlobalOptions& global, const RunConfig& cfg) {
    std::string judge_spec = cfg.get_str("judge", global.judge_spec);
    if (judge_spec.empty()) throw mpo::ConfigError("tournament needs a judge backend");
    auto judge = mpo::make_judge_backend(judge_spec);

    if (!cfg.has("models") || !cfg.values.at("models").is_object() ||
        cfg.values.at("models").size() < 2)
        throw mpo::ConfigError("tournament needs a models object with >= 2 entries");
    std::vector<mpo::ModelCorpus> models;
    for (auto& [name, path] : cfg.values.at("models").items())
        models.push_back({name, mpo::load_corpus_file(path.get<std::string>())});

    mpo::MatchPlan plan;
    plan.comparisons = cfg.get<long>("comparisons", 10000);
    plan.position_swap = cfg.get<bool>("position_swap", true);
    plan.initial_rating = cfg.get<double>("initial_rating", 1000.0);
    plan.k_factor = cfg.get<double>("k_factor", 4.0);
    plan.seed = cfg.seed;
    std::string prompt_path = cfg.get_str("prompt_template");
    if (!prompt_path.empty()) {
        std::ifstream pin(prompt_path);
        if (!pin) throw mpo::ConfigError("cannot open prompt template " + prompt_path);
        std::stringstream pbuf;
        pbuf << pin.rdbuf();
        plan.comparison_prompt_template = pbuf.str();
    }
    int runs = cfg.get<int>("runs", 1);
    if (runs < 1) throw mpo::ConfigError("runs must be >= 1");

    fs::path out_dir(cfg.get_str("out", global.out_dir));
    std::vector<mpo::EloTable> tables;
    long skipped = 0;
    for (int run = 0; run < runs; ++run) {
        mpo::MatchPlan seeded = plan;
        seeded.seed = plan.seed + static_cast<std::uint64_t>(run);
        mpo::TournamentResult result = mpo::run_tournament(models, *judge, seeded);
        skipped += result.skipped;
        tables.push_back(std::move(result.table));
    }

    auto matches = open_artifact(out_dir / "matches.csv");
    matches << artifact_comment(cfg) << "\n";
    matches << "match,prompt_id,model_a,model_b,outcome\n";
    const auto& log = tables.front().match_log();
    for (std::size_t i = 0; i < log.size(); ++i) {
        const char* outcome = log[i].outcome == mpo::MatchOutcome::AWins   ? "a-wins"
                              : log[i].outcome == mpo::MatchOutcome::BWins ? "b-wins"
                                                                           : "draw";
        matches << i << ',' << log[i].prompt_id << ',' << log[i].a << ',' << log[i].b << ','
                << outcome << "\n";
    }

    json ratings_json;
    ratings_json["meta"] = artifact_meta(cfg);
    ratings_json["skipped"] = skipped;
    json ratings = json::object();
    for (const auto& [model, rating] : tables.front().ratings()) ratings[model] = rating;
    ratings_json["ratings"] = ratings;
    if (tables.size() >= 2) {
        json stats = json::object();
        for (const auto& [model, st] : mpo::rating_stats(tables))
            stats[model] = json{{"mean", st.mean}, {"std", st.stddev}};
        ratings_json["stats"] = stats;
    }
    auto ratings_out = open_artifact(out_dir / "ratings.json");
    ratings_out << ratings_json.dump(2) << "\n";

    for (const auto& [model, rating] : tables.front().ratings())
        std::cout << model << ": " << mpo::format_double(rating) << "\n";
    return 0;
}

// ----------------------------------------------------------------- metrics

int cmd_metrics(const GlobalOptions& global, const RunConfig& cfg) {
    fs::path out_dir(cfg.get_str("out", global.out_dir));
    std::string mode = cfg.get_str("mode", "rouge");

    if (mode == "rouge" || mode == "exact-match") {
        std::string cand_path = cfg.get_str("candidates");
        std::string ref_path = cfg.get_str("references");
        if (cand_path.empty() || ref_path.empty())
            throw mpo::ConfigError(mode + " metrics need candidates and references corpora");
        auto candidates = mpo::load_corpus_file(cand_path);
        auto references = mpo::load_corpus_file(ref_path);
        std::map<std::string, const mpo::GenerationRecord*> ref_by_id;
        for (const auto& r : references) ref_by_id[r.id] = &r;

        if (mode == "exact-match") {
            long correct = 0, total = 0;
            for (const auto& c : candidates) {
                auto it = ref_by_id.find(c.id);
                if (it == ref_by_id.end()) continue;
                ++total;
                correct += mpo::exact_match_score(c.generation, it->second->generation);
            }
            if (total == 0) throw mpo::ConfigError("no shared ids between the corpora");
            auto out = open_artifact(out_dir / "accuracy.csv");
            out << artifact_comment(cfg) << "\n";
            out << "correct,total,accuracy,rendered\n";
            out << correct << ',' << total << ','
                << mpo::format_double(static_cast<double>(correct) / total) << ",\""
                << mpo::render_accuracy(correct, total) << "\"\n";
            std::cout << mpo::render_accuracy(correct, total) << "\n";
            return 0;
        }

        auto out = open_artifact(out_dir / "rouge.csv");
        out << artifact_comment(cfg) << "\n";
        out << "id,rouge1_p,rouge1_r,rouge1_f,rouge2_p,rouge2_r,rouge2_f,"
               "rougeL_p,rougeL_r,rougeL_f,rougeLsum_p,rougeLsum_r,rougeLsum_f\n";
        std::vector<double> sums(12, 0.0);
        long counted = 0;
        for (const auto& c : candidates) {
            auto it = ref_by_id.find(c.id);
            if (it == ref_by_id.end()) continue;
            const std::string& ref = it->second->generation;
            mpo::RougeScore scores[4] = {mpo::rouge_n(c.generation, ref, 1),
                                         mpo::rouge_n(c.generation, ref, 2),
                                         mpo::rouge_l(c.generation, ref),
                                         mpo::rouge_lsum(c.generation, ref)};
            out << c.id;
            for (int m = 0; m < 4; ++m) {
                out << ',' << mpo::format_double(scores[m].precision) << ','
                    << mpo::format_double(scores[m].recall) << ','
                    << mpo::format_double(scores[m].f1);
                sums[m * 3 + 0] += scores[m].precision;
                sums[m * 3 + 1] += scores[m].recall;
                sums[m * 3 + 2] += scores[m].f1;
            }
            out << "\n";
            ++counted;
        }
        if (counted == 0) throw mpo::ConfigError("no shared ids between the corpora");
        out << "MEAN";
        for (double s : sums) out << ',' << mpo::format_double(s / counted);
        out << "\n";
        return 0;
    }

    if (mode == "accuracy") {
        std::string pred_path = cfg.get_str("predictions");
        if (pred_path.empty()) throw mpo::ConfigError("accuracy metrics need predictions");
        auto predictions = mpo::load_corpus_file(pred_path);
        long total = cfg.get<long>("total", static_cast<long>(predictions.size()));
        long correct = 0;
        for (const auto& p : predictions) {
            if (!p.score) throw mpo::ConfigError("prediction " + p.id + " lacks a 0/1 score");
            if (*p.score != 0 && *p.score != 1)
                throw mpo::ConfigError("prediction " + p.id + " is not 0/1");
            correct += *p.score;
        }
        auto out = open_artifact(out_dir / "accuracy.csv");
        out << artifact_comment(cfg) << "\n";
        out << "correct,total,accuracy,rendered\n";
        out << correct << ',' << total << ','
            << mpo::format_double(static_cast<double>(correct) / total) << ",\""
            << mpo::render_accuracy(correct, total) << "\"\n";
        std::cout << mpo::render_accuracy(correct, total) << "\n";
        return 0;
    }

    throw mpo::ConfigError("metrics mode must be rouge, exact-match, or accuracy");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meta-rewarding reward-model toolkit"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--config", global.config_path, "JSON config file");
    app.add_option("--seed", global.seed, "global random seed");
    app.add_option("--out", global.out_dir, "output directory");
    app.add_option("--judge", global.judge_spec, "judge backend: scripted:FILE | remote:URL");

    json overrides = json::object();

    auto* simulate = app.add_subcommand("simulate", "partition-refinement policy training");
    simulate->fallthrough();
    std::string problem;
    long steps = -1;
    simulate->add_option("--problem", problem, "MDP/partition/schedule file");
    simulate->add_option("--steps", steps, "training episodes");

    auto* mpo_run = app.add_subcommand("mpo-run", "rubric-evolution training loop");
    mpo_run->fallthrough();
    std::string rubric, corpus;
    long k = -1, run_steps = -1;
    int batch_size = -1;
    mpo_run->add_option("--rubric", rubric, "initial rubric file");
    mpo_run->add_option("--corpus", corpus, "replay generation corpus (JSONL)");
    mpo_run->add_option("--k", k, "MPO trigger interval in batch steps");
    mpo_run->add_option("--steps", run_steps, "batch steps to run");
    mpo_run->add_option("--batch-size", batch_size, "samples per batch step");

    auto* score = app.add_subcommand("score", "score a corpus under a rubric or history");
    score->fallthrough();
    std::string score_rubric, score_corpus, score_history;
    score->add_option("--rubric", score_rubric, "rubric file");
    score->add_option("--rubric-history", score_history, "rubric history JSONL");
    score->add_option("--corpus", score_corpus, "generation corpus (JSONL)");

    auto* tournament = app.add_subcommand("tournament", "pairwise Elo tournament");
    tournament->fallthrough();
    std::vector<std::string> model_specs;
    long comparisons = -1;
    int runs = -1;
    tournament->add_option("--model", model_specs, "model corpus as name=path (repeatable)");
    tournament->add_option("--comparisons", comparisons, "number of matches");
    tournament->add_option("--runs", runs, "seeded repetitions for rating stats");

    auto* metrics = app.add_subcommand("metrics", "ROUGE / accuracy tables");
    metrics->fallthrough();
    std::string candidates, references, predictions, metrics_mode;
    metrics->add_option("--candidates", candidates, "candidate corpus (JSONL)");
    metrics->add_option("--references", references, "reference corpus (JSONL)");
    metrics->add_option("--predictions", predictions, "0/1 predictions corpus (JSONL)");
    metrics->add_option("--mode", metrics_mode, "rouge | exact-match | accuracy");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            if (!problem.empty()) overrides["problem"] = problem;
            if (steps >= 0) overrides["steps"] = steps;
            RunConfig cfg = load_run_config(global, overrides,
                                            {"problem", "steps", "horizon", "learning_rate",
                                             "entropy_bonus", "eval_interval"});
            return cmd_simulate(global, cfg);
        }
        if (mpo_run->parsed()) {
            if (!rubric.empty()) overrides["rubric"] = rubric;
            if (!corpus.empty()) overrides["corpus"] = corpus;
            if (k >= 0) overrides["k"] = k;
            if (run_steps >= 0) overrides["steps"] = run_steps;
            if (batch_size >= 0) overrides["batch_size"] = batch_size;
            RunConfig cfg = load_run_config(
                global, overrides,
                {"rubric", "corpus", "task_description", "k", "n", "batch_size", "steps",
                 "analysis_max_words", "refine_max_words", "keying", "mode",
                 "lenient_totals", "policy"});
            return cmd_mpo_run(global, cfg);
        }
        if (score->parsed()) {
            if (!score_rubric.empty()) overrides["rubric"] = score_rubric;
            if (!score_history.empty()) overrides["rubric_history"] = score_history;
            if (!score_corpus.empty()) overrides["corpus"] = score_corpus;
            RunConfig cfg = load_run_config(global, overrides,
                                            {"rubric", "rubric_history", "corpus",
                                             "task_description", "lenient_totals"});
            return cmd_score(global, cfg);
        }
        if (tournament->parsed()) {
            if (!model_specs.empty()) {
                json models = json::object();
                for (const auto& spec : model_specs) {
                    std::size_t eq = spec.find('=');
                    if (eq == std::string::npos)
                        throw mpo::ConfigError("--model expects name=path, got " + spec);
                    models[spec.substr(0, eq)] = spec.substr(eq + 1);
                }
                overrides["models"] = models;
            }
            if (comparisons >= 0) overrides["comparisons"] = comparisons;
            if (runs >= 0) overrides["runs"] = runs;
            RunConfig cfg = load_run_config(global, overrides,
                                            {"models", "comparisons", "position_swap",
                                             "initial_rating", "k_factor", "runs",
                                             "prompt_template"});
            return cmd_tournament(global, cfg);
        }
        if (metrics->parsed()) {
            if (!candidates.empty()) overrides["candidates"] = candidates;
            if (!references.empty()) overrides["references"] = references;
            if (!predictions.empty()) overrides["predictions"] = predictions;
            if (!metrics_mode.empty()) overrides["mode"] = metrics_mode;
            RunConfig cfg = load_run_config(global, overrides,
                                            {"candidates", "references", "predictions",
                                             "total", "mode"});
            return cmd_metrics(global, cfg);
        }
    } catch (const mpo::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
