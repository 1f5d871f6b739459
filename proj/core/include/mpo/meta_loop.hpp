#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "mpo/corpus.hpp"
#include "mpo/judge.hpp"
#include "mpo/rubric.hpp"
#include "mpo/scoring.hpp"

namespace mpo {

/// One scored generation flowing through the training context.
struct ScoredSample {
    std::string id;
    std::string cluster;  // raw tag from the corpus; may be empty in single mode
    std::string prompt;
    std::string generation;
    std::string reference;
    std::map<std::string, int> per_item;
    int total = 0;
    int attainable = 0;
    double normalized = 0.0;
};

enum class ClusterKeying { Single, BySubjectCluster };

struct MpoConfig {
    long k = 10;                  // trigger interval in batch steps
    int n = 4;                    // samples per meta step
    int analysis_max_words = 600;
    int refine_max_words = 1200;  // also used for merging
    std::uint64_t seed = 0;
    ClusterKeying keying = ClusterKeying::Single;

    void validate() const;
};

/// "subject/index" routing key, e.g. cluster_key("algebra", 2) == "algebra/2".
std::string cluster_key(const std::string& subject, int index);

/// Per-cluster sample buffers, rubric registry, and batch-step counter.
class TrainingContext {
public:
    TrainingContext(std::string task_description, Rubric initial_rubric, MpoConfig config);

    const std::string& task_description() const { return task_description_; }
    const MpoConfig& config() const { return config_; }
    long batch_steps() const { return batch_steps_; }

    /// Routing key for a sample under the configured keying rule.
    std::string key_for(const ScoredSample& sample) const;

    /// Current rubric for a cluster (the initial rubric until the first
    /// successful meta step for that cluster).
    const Rubric& rubric_for(const std::string& cluster) const;

    std::size_t buffer_size(const std::string& cluster) const;
    std::vector<std::string> known_clusters() const;

    /// Version chain for one cluster, seeded with the initial rubric at
    /// version 0; strictly increasing and gap-free.
    const std::vector<RubricHistoryEntry>& rubric_history(const std::string& cluster) const;

private:
    friend void accumulate(TrainingContext&, const std::vector<ScoredSample>&);
    friend bool should_trigger(const TrainingContext&);
    friend std::vector<std::string> due_clusters(const TrainingContext&);
    friend std::vector<ScoredSample> sample_context(TrainingContext&, const std::string&,
                                                    int, std::mt19937_64&);
    friend struct MpoStepRunner;

    struct ClusterState {
        std::vector<ScoredSample> buffer;
        Rubric rubric;
        std::vector<RubricHistoryEntry> history;
    };

    ClusterState& state_for(const std::string& cluster);

    std::string task_description_;
    Rubric initial_rubric_;
    MpoConfig config_;
    long batch_steps_ = 0;
    std::map<std::string, ClusterState> clusters_;
};

/// Appends one batch of scored samples to their cluster buffers and advances
/// the batch-step counter by one.
void accumulate(TrainingContext& ctx, const std::vector<ScoredSample>& batch);

/// True iff the counter is positive, divisible by k, and at least one
/// cluster has samples waiting.
bool should_trigger(const TrainingContext& ctx);

/// Clusters with nonempty buffers, in deterministic (lexicographic) order.
std::vector<std::string> due_clusters(const TrainingContext& ctx);

/// Uniform sample without replacement; returns the whole (shuffled) buffer
/// when it holds fewer than n samples.
std::vector<ScoredSample> sample_context(TrainingContext& ctx, const std::string& cluster,
                                         int n, std::mt19937_64& rng);

/// Senior-instructor analysis of one scored sample under the current rubric.
std::string meta_analyze(JudgeBackend& judge, const ScoredSample& sample,
                         const Rubric& rubric, const std::string& task_description,
                         int max_words);

struct RefineOutcome {
    Rubric rubric;
    int retries = 0;
};

/// Turns an analysis into a candidate rubric; reprompts with a corrective
/// suffix on parse failures, then throws RefinementError with the raw text.
RefineOutcome meta_refine(JudgeBackend& judge, const std::string& analysis, int max_words);

/// Merges candidate rubrics (joined with "===") into one rubric whose
/// version is current_version + 1.
Rubric meta_merge(JudgeBackend& judge, const std::vector<Rubric>& candidates, int max_words,
                  int current_version);

struct MpoRecord {
    long step = 0;  // batch step at which the round fired
    std::string cluster;
    std::vector<std::string> analyses;
    std::vector<std::string> candidate_texts;
    int merged_version = 0;
    long judge_calls = 0;  // deterministic duration proxy
    int refine_retries = 0;
    bool success = false;
    std::string error;
};

std::string to_json_line(const MpoRecord& record);

/// One full meta step for a cluster: sample n, analyze and refine each,
/// merge once, install the merged rubric, append history, clear the buffer.
/// Stage errors abort the step, leave the previous rubric and buffer intact,
/// and come back as a failed record.
MpoRecord run_mpo_step(TrainingContext& ctx, const std::string& cluster,
                       JudgeBackend& judge, std::mt19937_64& rng);

struct RescoreResult {
    std::vector<int> versions;
    std::vector<std::vector<double>> normalized;  // [version][generation]; NaN = failed
    std::vector<double> mean_per_version;
    std::vector<int> failures_per_version;
};

/// Scores every generation under every rubric version in the history.
/// Per-cell scoring errors are recorded, not fatal.
RescoreResult rescore_corpus(JudgeBackend& judge,
                             const std::vector<GenerationRecord>& generations,
                             const std::vector<Rubric>& rubric_history,
                             const std::string& task_description);

}  // namespace mpo
