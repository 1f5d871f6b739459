// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every check runs offline against scripted judges.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "mpo/corpus.hpp"
#include "mpo/elo.hpp"
#include "mpo/errors.hpp"
#include "mpo/meta_loop.hpp"
#include "mpo/rouge.hpp"
#include "mpo/rubric.hpp"
#include "mpo/scoring.hpp"
#include "mpo/sim_config.hpp"
#include "mpo/text.hpp"
#include "mpo/trainer.hpp"
#include "support.hpp"

using namespace mpo;
using nlohmann::json;
using test_support::read_file;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(MPO_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string data(const std::string& rel) { return std::string(MPO_DATA_DIR) + "/" + rel; }

// ------------------------------------------------------------------------
// 1. Partition-resolution claim.
// ------------------------------------------------------------------------
void partition_resolution() {
    auto start_time = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240901);

    int checked = 0;
    while (checked < 50) {
        int S = 2 + static_cast<int>(rng() % 11);  // 2..12
        int A = 2 + static_cast<int>(rng() % 2);   // 2..3
        GoldenMdp mdp = test_support::random_mdp(S, A, 0.9, rng);
        std::vector<double> start = uniform_start(S);
        int cells = 1 + static_cast<int>(rng() % std::min(3, S));
        Partition coarse = test_support::random_partition(S, cells, rng);

        Partition finer = coarse;
        try {
            finer = refine(coarse, mdp.golden_reward,
                           {SplitRule::VarianceMaxBisection, ""}, rng);
        } catch (const RefinementExhausted&) {
            continue;  // nothing to refine; draw another instance
        }
        require(is_refinement_of(finer, coarse), "refine() violated the refinement property");

        if (S <= 6) {
            double best_coarse = test_support::best_deterministic_return(mdp, coarse, start);
            double best_finer = test_support::best_deterministic_return(mdp, finer, start);
            require(best_finer >= best_coarse - 1e-9,
                    "enumerated finer optimum fell below the parent optimum");
        } else {
            // Trained comparison, 5 seeds a side: a plain run on the parent
            // partition vs a paired run whose schedule applies the same split
            // late in training, children inheriting the parent cell's action
            // distribution. Both sides keep their best greedy checkpoint.
            TrainConfig config;
            config.steps = 2000;
            config.horizon = 40;
            config.learning_rate = 0.25;
            config.entropy_bonus = 0.003;
            config.start = start;
            config.eval_interval = 25;

            RefinementSchedule with_split;
            with_split.splits.push_back({1500, {SplitRule::VarianceMaxBisection, ""}});

            double best_coarse = -1e300, best_finer = -1e300;
            for (int seed = 0; seed < 5; ++seed) {
                std::mt19937_64 rng_a(1000 + seed), rng_b(1000 + seed);
                TrainResult coarse_run = policy_train(mdp, {}, coarse, config, rng_a);
                TrainResult finer_run = policy_train(mdp, with_split, coarse, config, rng_b);
                best_coarse = std::max(best_coarse, coarse_run.best_greedy_return);
                best_finer = std::max(best_finer, finer_run.best_greedy_return);
                require(is_refinement_of(finer_run.final_partition, coarse),
                        "scheduled split left a non-refining partition");
            }
            require(best_finer >= best_coarse - 1e-6,
                    "trained finer-partition return fell below the parent partition");
        }
        ++checked;
    }

    // Fully refined training reaches the value-iteration optimum on the demo.
    SimProblem demo = load_sim_problem_file(data("demo/chain3.mdp"));
    auto vi = value_iteration(demo.mdp, demo.mdp.golden_reward, 1e-12);
    double optimum = 0.0;
    for (int s = 0; s < demo.mdp.num_states; ++s) optimum += demo.start[s] * vi.values[s];

    RefinementSchedule full;
    full.splits.push_back({0, {SplitRule::FullSingleton, ""}});
    TrainConfig config;
    config.steps = 30000;
    config.horizon = 60;
    config.learning_rate = 0.5;
    config.start = demo.start;
    config.eval_interval = 10000;
    std::mt19937_64 train_rng(7);
    TrainResult trained = policy_train(demo.mdp, full, demo.initial_partition, config,
                                       train_rng);
    double reached = golden_return(demo.mdp, trained.final_partition, trained.policy,
                                   demo.start);
    require(std::abs(optimum - reached) <= 1e-3,
            "fully refined training ended " + format_double(optimum - reached) +
                " away from the optimum " + format_double(optimum));

    double elapsed = seconds_since(start_time);
    require(elapsed < 120.0, "partition-resolution suite took " + format_double(elapsed) + "s");
}

// ------------------------------------------------------------------------
// 2. Mean preservation.
// ------------------------------------------------------------------------
void mean_preservation() {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
        int S = 2 + static_cast<int>(rng() % 11);
        GoldenMdp mdp = test_support::random_mdp(S, 2, 0.9, rng);
        Partition part =
            test_support::random_partition(S, 1 + static_cast<int>(rng() % S), rng);
        double weighted = 0.0;
        for (const auto& [label, members] : part.cells())
            weighted += static_cast<double>(members.size()) *
                        observation_reward(part, mdp, label);
        double total = 0.0;
        for (double r : mdp.golden_reward) total += r;
        require(std::abs(weighted - total) < 1e-9,
                "cell-weighted observation rewards drifted from the golden total");
    }
}

// ------------------------------------------------------------------------
// 3. Rubric round-trip.
// ------------------------------------------------------------------------
void rubric_round_trip() {
    auto check_fixture = [&](const std::string& name, int expected_total) {
        Rubric r = parse_rubric(read_file(data("rubrics/" + name)));
        require(total_attainable(r) == expected_total,
                name + " totals " + std::to_string(total_attainable(r)) + ", expected " +
                    std::to_string(expected_total));
        require(r.structurally_equal(parse_rubric(render_rubric(r))),
                name + " failed the parse/render round-trip");
    };
    check_fixture("essay_v1.txt", 30);
    check_fixture("essay_v40.txt", 60);
    check_fixture("ethics_v1.txt", 20);
    check_fixture("ethics_v20.txt", 15);
    check_fixture("essay_initial.txt", 5);

    std::mt19937_64 rng(5150);
    static const std::vector<std::string> words = {"depth",  "focus", "logic", "style",
                                                   "support", "voice", "flow",  "rigor"};
    for (int trial = 0; trial < 500; ++trial) {
        Rubric rubric;
        int items = 1 + static_cast<int>(rng() % 6);
        for (int i = 0; i < items; ++i) {
            RubricItem item;
            item.name = words[rng() % words.size()] + " " + std::to_string(i);
            item.max_points = 1 + static_cast<int>(rng() % 12);
            item.explicit_points = rng() % 2 == 0;
            for (int lv = item.max_points; lv >= 0; --lv) {
                if (lv != item.max_points && lv != 0 && rng() % 2) continue;
                std::string text = words[rng() % words.size()];
                if (rng() % 3 == 0)
                    text += "\n  - Example: \"" + words[rng() % words.size()] + "\"";
                if (rng() % 7 == 0) text.clear();
                item.descriptors.push_back({lv, text});
            }
            rubric.items.push_back(std::move(item));
        }
        require(rubric.structurally_equal(parse_rubric(render_rubric(rubric))),
                "generated rubric failed the round-trip");
    }
}

// ------------------------------------------------------------------------
// 4. MPO schedule arithmetic.
// ------------------------------------------------------------------------
void schedule_arithmetic() {
    Rubric initial = parse_rubric(read_file(data("rubrics/essay_initial.txt")));

    auto stage_router = [](const std::string& prompt) {
        if (prompt.find("conduct a meta-level analysis") != std::string::npos)
            return std::string("tighten the criteria <EOE>");
        if (prompt.find("Scoring Criteria (refined)") != std::string::npos ||
            prompt.find("Scoring Criteria (combined)") != std::string::npos)
            return std::string("<rubric><item>Q\n- 1: a\n- 0: b</item></rubric> <EOE>");
        return std::string("TOTAL: 3 <EOE>");
    };

    struct Case {
        long k;
        long batch_steps;
        int batch_size;
        long expected_rounds;
    };
    // One epoch of the essay task: 400 batches of 64, rounds every 640
    // effective steps -> 40 rounds. The other rows match the summarization
    // (29), ethics (20), and math (3) schedules.
    for (const Case& c : {Case{10, 400, 64, 40}, Case{20, 590, 32, 29},
                          Case{10, 203, 64, 20}, Case{30, 117, 64, 3}}) {
        MpoConfig config;
        config.k = c.k;
        config.n = 1;
        TrainingContext ctx("task", initial, config);
        test_support::LambdaJudge judge(stage_router);
        std::mt19937_64 rng(3);

        ScoredSample sample;
        sample.id = "x";
        sample.generation = "text";
        sample.total = 3;
        sample.attainable = 5;
        sample.normalized = 0.6;

        std::vector<long> round_steps;
        for (long step = 1; step <= c.batch_steps; ++step) {
            accumulate(ctx, std::vector<ScoredSample>(c.batch_size, sample));
            if (should_trigger(ctx)) {
                for (const auto& cluster : due_clusters(ctx)) {
                    MpoRecord record = run_mpo_step(ctx, cluster, judge, rng);
                    require(record.success, "scripted MPO round failed unexpectedly");
                    round_steps.push_back(step * c.batch_size);  // effective step
                }
            }
        }
        require(static_cast<long>(round_steps.size()) == c.expected_rounds,
                "k=" + std::to_string(c.k) + " over " + std::to_string(c.batch_steps) +
                    " batch steps produced " + std::to_string(round_steps.size()) +
                    " rounds, expected " + std::to_string(c.expected_rounds));
        require(ctx.rubric_history("default").size() ==
                    static_cast<std::size_t>(c.expected_rounds) + 1,
                "history length disagrees with the round count");
        long spacing = static_cast<long>(c.k) * c.batch_size;
        for (std::size_t i = 0; i < round_steps.size(); ++i)
            require(round_steps[i] == static_cast<long>(i + 1) * spacing,
                    "rounds are not spaced " + std::to_string(spacing) +
                        " effective steps apart");
        if (c.k == 10 && c.batch_size == 64)
            require(spacing == 640, "essay-schedule rounds must land every 640 steps");
    }

    // Same arithmetic end to end through the CLI: 400 batches of 64 at k=10
    // mark 40 rounds, 640 effective steps apart.
    std::string out = test_support::scratch_dir("accept_sched");
    int rc = run_cli("--seed 9 --judge scripted:" +
                     data("scenarios/reward_hacking/script.json") + " mpo-run --rubric " +
                     data("rubrics/essay_initial.txt") + " --corpus " +
                     data("scenarios/reward_hacking/corpus.jsonl") +
                     " --k 10 --steps 400 --batch-size 64 --out " + out);
    require(rc == 0, "one-epoch CLI run exited nonzero");
    std::ifstream markers(out + "/mpo_rounds.csv");
    std::string line;
    std::getline(markers, line);  // comment
    std::getline(markers, line);  // header
    long rounds = 0, prev_effective = 0;
    while (std::getline(markers, line)) {
        ++rounds;
        std::istringstream row(line);
        std::string field;
        std::getline(row, field, ',');  // round
        std::getline(row, field, ',');  // step
        std::getline(row, field, ',');  // effective_step
        long effective = std::stol(field);
        require(effective - prev_effective == 640,
                "CLI rounds are not 640 effective steps apart");
        prev_effective = effective;
    }
    require(rounds == 40, "CLI one-epoch run marked " + std::to_string(rounds) +
                              " rounds, expected 40");
}

// ------------------------------------------------------------------------
// 5. Reward-hacking replay.
// ------------------------------------------------------------------------
void reward_hacking_replay() {
    std::string out1 = test_support::scratch_dir("accept_rh_a");
    std::string out2 = test_support::scratch_dir("accept_rh_b");
    std::string args =
        "--seed 7 --judge scripted:" + data("scenarios/reward_hacking/script.json") +
        " mpo-run --rubric " + data("rubrics/essay_initial.txt") + " --corpus " +
        data("scenarios/reward_hacking/corpus.jsonl") + " --k 10 --steps 20 --batch-size 1";
    require(run_cli(args + " --out " + out1) == 0, "scenario run 1 exited nonzero");
    require(run_cli(args + " --out " + out2) == 0, "scenario run 2 exited nonzero");

    for (const char* name : {"/rewards.csv", "/mpo_rounds.csv", "/scores.jsonl",
                             "/mpo_records.jsonl", "/rubric_history.jsonl",
                             "/rubric_lengths.csv"})
        require(read_file(out1 + name) == read_file(out2 + name),
                std::string(name) + " differs between identically seeded runs");

    std::ifstream scores(out1 + "/scores.jsonl");
    std::string line;
    std::getline(scores, line);  // meta record
    bool saw_pre = false, saw_post = false;
    while (std::getline(scores, line)) {
        json row = json::parse(line);
        long step = row.at("step").get<long>();
        if (step <= 10) {
            require(row.at("total") == 3, "pre-refinement total is not 3");
            require(std::abs(row.at("normalized").get<double>() - 0.6) < 1e-12,
                    "pre-refinement normalized score is not 0.6");
            saw_pre = true;
        } else {
            require(row.at("per_item").at("Task Alignment and Argument Clarity") == 0,
                    "post-refinement task-alignment award is not 0");
            saw_post = true;
        }
    }
    require(saw_pre && saw_post, "scenario produced no pre/post scoring rows");

    std::string history = read_file(out1 + "/rubric_history.jsonl");
    require(history.find("significantly below the required word count") != std::string::npos,
            "refined rubric lost the word-count criterion");
}

// ------------------------------------------------------------------------
// 6. Elo suite.
// ------------------------------------------------------------------------
void elo_suite() {
    auto start_time = std::chrono::steady_clock::now();

    // Zero-sum drift over 10^4 random matches.
    std::mt19937_64 rng(99);
    std::vector<std::string> models{"m0", "m1", "m2", "m3"};
    EloTable table(models);
    double before = table.total_rating();
    for (int match = 0; match < 10000; ++match) {
        std::size_t i = rng() % models.size();
        std::size_t j = rng() % models.size();
        while (j == i) j = rng() % models.size();
        elo_update(table, models[i], models[j], static_cast<MatchOutcome>(rng() % 3));
    }
    require(std::abs(table.total_rating() - before) < 1e-9, "rating mass drifted");

    // Equal ratings, K = 4: exactly +-2.
    EloTable pair({"a", "b"});
    elo_update(pair, "a", "b", MatchOutcome::AWins);
    require(pair.rating("a") == 1002.0 && pair.rating("b") == 998.0,
            "equal-rating win did not move ratings by exactly 2");

    // Planted Bradley-Terry preferences: 2,000 matches, 4 models, 100 reps.
    std::vector<ModelCorpus> corpora(4);
    std::vector<double> planted{1180.0, 1060.0, 940.0, 820.0};
    for (int m = 0; m < 4; ++m) {
        corpora[m].model_id = "model" + std::to_string(m);
        GenerationRecord g;
        g.id = "p0";
        g.prompt = "prompt";
        g.generation = "gen-by-model" + std::to_string(m);
        corpora[m].generations.push_back(g);
    }
    int recovered = 0;
    for (int rep = 0; rep < 100; ++rep) {
        std::mt19937_64 judge_rng(5000 + rep);
        test_support::LambdaJudge oracle([&](const std::string& prompt) {
            const std::string a_marker = "Response A:\ngen-by-model";
            const std::string b_marker = "Response B:\ngen-by-model";
            int a_id = prompt[prompt.find(a_marker) + a_marker.size()] - '0';
            int b_id = prompt[prompt.find(b_marker) + b_marker.size()] - '0';
            double p = 1.0 / (1.0 + std::pow(10.0, (planted[b_id] - planted[a_id]) / 400.0));
            double u = std::uniform_real_distribution<double>(0.0, 1.0)(judge_rng);
            return u < p ? std::string("WINNER: A") : std::string("WINNER: B");
        });
        MatchPlan plan;
        plan.comparisons = 2000;
        plan.seed = 900 + rep;
        plan.position_swap = false;
        TournamentResult result = run_tournament(corpora, oracle, plan);
        bool ordered = true;
        for (int m = 0; m + 1 < 4; ++m)
            ordered = ordered && result.table.rating("model" + std::to_string(m)) >
                                     result.table.rating("model" + std::to_string(m + 1));
        if (ordered) ++recovered;
    }
    require(recovered >= 95, "planted ordering recovered only " + std::to_string(recovered) +
                                 "/100 times");

    double elapsed = seconds_since(start_time);
    require(elapsed < 60.0, "Elo suite took " + format_double(elapsed) + "s");
}

// ------------------------------------------------------------------------
// 7. ROUGE oracle equivalence.
// ------------------------------------------------------------------------
void rouge_oracle_equivalence() {
    RougeScore hand = rouge_n("the cat", "the cat sat", 1);
    require(std::abs(hand.f1 - 0.8) < 1e-12, "hand-checked unigram F1 is not 0.8");

    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 1000; ++trial) {
        std::string cand = test_support::random_words(rng, 12);
        std::string ref = test_support::random_words(rng, 12);
        for (int n = 1; n <= 2; ++n) {
            RougeScore fast = rouge_n(cand, ref, n);
            test_support::OracleRouge slow = test_support::oracle_rouge_n(cand, ref, n);
            require(fast.defined == slow.defined && fast.precision == slow.precision &&
                        fast.recall == slow.recall && fast.f1 == slow.f1,
                    "rouge_n disagrees with the brute-force oracle");
        }
        auto ct = test_support::oracle_tokens(cand);
        auto rt = test_support::oracle_tokens(ref);
        RougeScore fast_l = rouge_l(cand, ref);
        if (rt.empty()) {
            require(!fast_l.defined, "rouge_l defined on an empty reference");
        } else {
            double lcs = static_cast<double>(test_support::oracle_lcs(ct, rt));
            double p = ct.empty() ? 0.0 : lcs / ct.size();
            double r = lcs / rt.size();
            require(fast_l.precision == p && fast_l.recall == r,
                    "rouge_l disagrees with the full-table LCS oracle");
        }
    }
}

// ------------------------------------------------------------------------
// 8. Accuracy rendering.
// ------------------------------------------------------------------------
void accuracy_rendering() {
    require(render_accuracy(3249, 4736) == "68.60 (3249/4736)",
            "accuracy rendering mismatch for 3249/4736");
    require(render_accuracy(2547, 5056) == "50.38 (2547/5056)",
            "accuracy rendering mismatch for 2547/5056");
    require(render_accuracy(3021, 4736) == "63.79 (3021/4736)",
            "accuracy rendering mismatch for 3021/4736");
}

// ------------------------------------------------------------------------
// 9. Determinism of the CLI entry points.
// ------------------------------------------------------------------------
void cli_determinism() {
    std::string sim1 = test_support::scratch_dir("accept_sim_a");
    std::string sim2 = test_support::scratch_dir("accept_sim_b");
    std::string sim_args =
        "--seed 42 simulate --problem " + data("demo/chain3.mdp") + " --steps 1000";
    require(run_cli(sim_args + " --out " + sim1) == 0, "simulate run 1 failed");
    require(run_cli(sim_args + " --out " + sim2) == 0, "simulate run 2 failed");
    for (const char* name : {"/trace_coarse.csv", "/trace_scheduled.csv",
                             "/trace_refined.csv", "/summary.csv"})
        require(read_file(sim1 + name) == read_file(sim2 + name),
                std::string("simulate output ") + name + " is not byte-identical");

    std::string run1 = test_support::scratch_dir("accept_run_a");
    std::string run2 = test_support::scratch_dir("accept_run_b");
    std::string run_args =
        "--seed 31 --judge scripted:" + data("scenarios/reward_hacking/script.json") +
        " mpo-run --rubric " + data("rubrics/essay_initial.txt") + " --corpus " +
        data("scenarios/reward_hacking/corpus.jsonl") + " --k 10 --steps 30 --batch-size 2";
    require(run_cli(run_args + " --out " + run1) == 0, "mpo-run run 1 failed");
    require(run_cli(run_args + " --out " + run2) == 0, "mpo-run run 2 failed");
    for (const char* name : {"/rewards.csv", "/mpo_rounds.csv", "/scores.jsonl",
                             "/mpo_records.jsonl", "/rubric_history.jsonl",
                             "/rubric_lengths.csv"})
        require(read_file(run1 + name) == read_file(run2 + name),
                std::string("mpo-run output ") + name + " is not byte-identical");
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<void()> run;
    };
    const std::vector<Criterion> criteria = {
        {"partition-resolution claim (50 random MDPs + demo optimum)", partition_resolution},
        {"mean preservation over 1000 random partitions", mean_preservation},
        {"rubric round-trip on paper fixtures + 500 generated", rubric_round_trip},
        {"MPO schedule arithmetic (40/29/20/3 rounds)", schedule_arithmetic},
        {"reward-hacking replay (scripted, byte-identical)", reward_hacking_replay},
        {"Elo suite (zero-sum, +-2 at K=4, planted ordering)", elo_suite},
        {"ROUGE oracle equivalence on 1000 random strings", rouge_oracle_equivalence},
        {"accuracy table rendering", accuracy_rendering},
        {"CLI determinism (simulate, mpo-run)", cli_determinism},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        auto start = std::chrono::steady_clock::now();
        try {
            criterion.run();
            std::cout << "PASS  " << criterion.name << "  ["
                      << format_double(seconds_since(start)) << "s]\n";
        } catch (const std::exception& e) {
            ++failures;
            std::cout << "FAIL  " << criterion.name << ": " << e.what() << "\n";
        }
    }
    if (failures) std::cout << failures << " criterion(s) failed\n";
    return failures == 0 ? 0 : 1;
}
