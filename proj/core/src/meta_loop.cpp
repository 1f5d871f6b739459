#include "mpo/meta_loop.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include <nlohmann/json.hpp>

#include "mpo/errors.hpp"
#include "mpo/prompts.hpp"
#include "mpo/text.hpp"

namespace mpo {

void MpoConfig::validate() const {
    if (k <= 0) throw ConfigError("trigger interval k must be > 0");
    if (n <= 0) throw ConfigError("sample count n must be > 0");
    if (analysis_max_words <= 0 || refine_max_words <= 0)
        throw ConfigError("max word budgets must be > 0");
}

std::string cluster_key(const std::string& subject, int index) {
    return subject + "/" + std::to_string(index);
}

TrainingContext::TrainingContext(std::string task_description, Rubric initial_rubric,
                                 MpoConfig config)
    : task_description_(std::move(task_description)),
      initial_rubric_(std::move(initial_rubric)), config_(config) {
    config_.validate();
    if (initial_rubric_.items.empty())
        throw ValidationError("initial rubric has no items");
}

std::string TrainingContext::key_for(const ScoredSample& sample) const {
    switch (config_.keying) {
        case ClusterKeying::Single:
            return "default";
        case ClusterKeying::BySubjectCluster:
            if (sample.cluster.empty())
                throw DomainError("sample " + sample.id +
                                  " carries no cluster tag under by-subject-cluster keying");
            return sample.cluster;
    }
    throw DomainError("unknown keying rule");
}

namespace {

RubricHistoryEntry history_entry_for(const Rubric& rubric, long timestamp) {
    RubricHistoryEntry entry;
    entry.version = rubric.version;
    entry.timestamp = timestamp;
    entry.source = rubric.source;
    entry.text = render_rubric(rubric);
    entry.total_attainable = total_attainable(rubric);
    entry.mean_item_length = mean_item_length(rubric);
    return entry;
}

}  // namespace

TrainingContext::ClusterState& TrainingContext::state_for(const std::string& cluster) {
    auto it = clusters_.find(cluster);
    if (it == clusters_.end()) {
        it = clusters_.emplace(cluster, ClusterState{{}, initial_rubric_, {}}).first;
        it->second.history.push_back(history_entry_for(initial_rubric_, 0));
    }
    return it->second;
}

const Rubric& TrainingContext::rubric_for(const std::string& cluster) const {
    auto it = clusters_.find(cluster);
    return it == clusters_.end() ? initial_rubric_ : it->second.rubric;
}

const std::vector<RubricHistoryEntry>& TrainingContext::rubric_history(
    const std::string& cluster) const {
    static const std::vector<RubricHistoryEntry> kEmpty;
    auto it = clusters_.find(cluster);
    return it == clusters_.end() ? kEmpty : it->second.history;
}

std::size_t TrainingContext::buffer_size(const std::string& cluster) const {
    auto it = clusters_.find(cluster);
    return it == clusters_.end() ? 0 : it->second.buffer.size();
}

std::vector<std::string> TrainingContext::known_clusters() const {
    std::vector<std::string> out;
    for (const auto& [key, _] : clusters_) out.push_back(key);
    return out;
}

void accumulate(TrainingContext& ctx, const std::vector<ScoredSample>& batch) {
    for (const ScoredSample& sample : batch)
        ctx.state_for(ctx.key_for(sample)).buffer.push_back(sample);
    ++ctx.batch_steps_;
}

bool should_trigger(const TrainingContext& ctx) {
    if (ctx.batch_steps_ <= 0 || ctx.batch_steps_ % ctx.config_.k != 0) return false;
    for (const auto& [_, state] : ctx.clusters_)
        if (!state.buffer.empty()) return true;
    std::cerr << "warning: MPO trigger at batch step " << ctx.batch_steps_
              << " skipped, no samples accumulated\n";
    return false;
}

std::vector<std::string> due_clusters(const TrainingContext& ctx) {
    std::vector<std::string> out;
    if (ctx.batch_steps_ <= 0 || ctx.batch_steps_ % ctx.config_.k != 0) return out;
    for (const auto& [key, state] : ctx.clusters_)
        if (!state.buffer.empty()) out.push_back(key);
    return out;
}

std::vector<ScoredSample> sample_context(TrainingContext& ctx, const std::string& cluster,
                                         int n, std::mt19937_64& rng) {
    auto& state = ctx.state_for(cluster);
    if (state.buffer.empty())
        throw PreconditionError("cluster " + cluster + " has an empty sample buffer");
    std::vector<ScoredSample> pool = state.buffer;
    std::shuffle(pool.begin(), pool.end(), rng);
    if (pool.size() > static_cast<std::size_t>(n)) pool.resize(n);
    return pool;
}

std::string meta_analyze(JudgeBackend& judge, const ScoredSample& sample,
                         const Rubric& rubric, const std::string& task_description,
                         int max_words) {
    std::string junior_score = std::to_string(sample.total) + " out of " +
                               std::to_string(total_attainable(rubric));
    std::string prompt = build_meta_analysis_prompt(
        task_description, sample.prompt, sample.generation, render_rubric(rubric),
        junior_score, max_words, sample.reference);
    return complete(judge, prompt);
}

namespace {

struct RubricCompletion {
    Rubric rubric;
    int retries = 0;
    long judge_calls = 0;
};

constexpr const char* kCorrectiveSuffix =
    "\n\nYour previous reply could not be parsed. You must follow the <rubric> and "
    "<item> formatting exactly as shown above, with \"- N:\" score levels.";

RubricCompletion complete_rubric(JudgeBackend& judge, const std::string& base_prompt,
                                 const char* stage) {
    const int attempts = judge.retry_policy.max_attempts;
    std::string prompt = base_prompt;
    std::string text;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        text = complete(judge, prompt);
        try {
            RubricCompletion out;
            out.rubric = parse_rubric(text);
            out.retries = attempt - 1;
            out.judge_calls = attempt;
            return out;
        } catch (const Error&) {
            prompt = base_prompt + kCorrectiveSuffix;
        }
    }
    throw RefinementError(std::string(stage) + " completion never parsed as a rubric after " +
                              std::to_string(attempts) + " attempts",
                          text);
}

}  // namespace

RefineOutcome meta_refine(JudgeBackend& judge, const std::string& analysis, int max_words) {
    if (trim(analysis).empty())
        throw PreconditionError("meta-refinement needs a nonempty analysis");
    RubricCompletion c =
        complete_rubric(judge, build_meta_refinement_prompt(analysis, max_words), "refinement");
    c.rubric.source = "meta-refined";
    return {std::move(c.rubric), c.retries};
}

Rubric meta_merge(JudgeBackend& judge, const std::vector<Rubric>& candidates, int max_words,
                  int current_version) {
    if (candidates.empty())
        throw PreconditionError("meta-merge needs at least one candidate rubric");
    std::vector<std::string> texts;
    texts.reserve(candidates.size());
    for (const Rubric& r : candidates) texts.push_back(render_rubric(r));
    RubricCompletion c =
        complete_rubric(judge, build_meta_merging_prompt(texts, max_words), "merge");
    c.rubric.version = current_version + 1;
    c.rubric.source = "meta-merged";
    return c.rubric;
}

std::string to_json_line(const MpoRecord& record) {
    nlohmann::json j;
    j["step"] = record.step;
    j["cluster"] = record.cluster;
    j["analyses"] = record.analyses;
    j["candidates"] = record.candidate_texts;
    j["merged_version"] = record.merged_version;
    j["judge_calls"] = record.judge_calls;
    j["refine_retries"] = record.refine_retries;
    j["success"] = record.success;
    if (!record.error.empty()) j["error"] = record.error;
    return j.dump();
}

struct MpoStepRunner {
    static MpoRecord run(TrainingContext& ctx, const std::string& cluster,
                         JudgeBackend& judge, std::mt19937_64& rng) {
        MpoRecord record;
        record.step = ctx.batch_steps_;
        record.cluster = cluster;

        if (ctx.batch_steps_ <= 0 || ctx.batch_steps_ % ctx.config_.k != 0)
            throw PreconditionError("MPO step fired off schedule at batch step " +
                                    std::to_string(ctx.batch_steps_));
        auto& state = ctx.state_for(cluster);
        if (state.buffer.empty())
            throw PreconditionError("cluster " + cluster + " has no accumulated samples");

        const MpoConfig& cfg = ctx.config_;
        std::size_t calls_before = 0;
        if (auto* scripted = dynamic_cast<ScriptedJudge*>(&judge))
            calls_before = scripted->calls();

        try {
            std::vector<ScoredSample> samples = sample_context(ctx, cluster, cfg.n, rng);
            std::vector<Rubric> candidates;
            for (const ScoredSample& sample : samples) {
                std::string analysis = meta_analyze(judge, sample, state.rubric,
                                                    ctx.task_description_,
                                                    cfg.analysis_max_words);
                record.analyses.push_back(analysis);
                RefineOutcome refined = meta_refine(judge, analysis, cfg.refine_max_words);
                record.refine_retries += refined.retries;
                record.candidate_texts.push_back(render_rubric(refined.rubric));
                candidates.push_back(std::move(refined.rubric));
                record.judge_calls += 2 + refined.retries;
            }
            Rubric merged = meta_merge(judge, candidates, cfg.refine_max_words,
                                       state.rubric.version);
            record.judge_calls += 1;
            record.merged_version = merged.version;

            state.history.push_back(history_entry_for(merged, ctx.batch_steps_));
            state.rubric = std::move(merged);
            state.buffer.clear();
            record.success = true;
        } catch (const Error& e) {
            record.success = false;
            record.error = e.what();
            if (auto* scripted = dynamic_cast<ScriptedJudge*>(&judge))
                record.judge_calls = static_cast<long>(scripted->calls() - calls_before);
        }
        return record;
    }
};

MpoRecord run_mpo_step(TrainingContext& ctx, const std::string& cluster,
                       JudgeBackend& judge, std::mt19937_64& rng) {
    return MpoStepRunner::run(ctx, cluster, judge, rng);
}

RescoreResult rescore_corpus(JudgeBackend& judge,
                             const std::vector<GenerationRecord>& generations,
                             const std::vector<Rubric>& rubric_history,
                             const std::string& task_description) {
    if (rubric_history.empty())
        throw PreconditionError("rescore needs a nonempty rubric history");

    RescoreResult result;
    for (const Rubric& rubric : rubric_history) {
        result.versions.push_back(rubric.version);
        std::vector<double> row;
        row.reserve(generations.size());
        int failures = 0;
        double sum = 0.0;
        int ok = 0;
        for (const GenerationRecord& gen : generations) {
            ScoringRequest request;
            request.rubric_text = render_rubric(rubric);
            request.task_description = task_description;
            request.student_prompt = gen.prompt;
            request.student_generation = gen.generation;
            request.mode = ScoreMode::Rubric;
            try {
                ScoreReport report = score_with_rubric(judge, request, rubric);
                row.push_back(report.normalized);
                sum += report.normalized;
                ++ok;
            } catch (const Error&) {
                row.push_back(std::nan(""));
                ++failures;
            }
        }
        result.normalized.push_back(std::move(row));
        result.mean_per_version.push_back(ok > 0 ? sum / ok : std::nan(""));
        result.failures_per_version.push_back(failures);
    }
    return result;
}

}  // namespace mpo
