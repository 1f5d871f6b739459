#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mpo/corpus.hpp"
#include "mpo/judge.hpp"

namespace mpo {

enum class MatchOutcome { AWins, BWins, Draw };

struct MatchRecord {
    std::string a;
    std::string b;
    MatchOutcome outcome = MatchOutcome::Draw;
    std::string prompt_id;
};

/// Sequential pairwise-comparison ratings. Updates are pairwise zero-sum by
/// construction: the loser loses exactly what the winner gains.
class EloTable {
public:
    EloTable(const std::vector<std::string>& models, double initial_rating = 1000.0,
             double k_factor = 4.0);

    double rating(const std::string& model) const;
    const std::map<std::string, double>& ratings() const { return ratings_; }
    double k_factor() const { return k_factor_; }
    const std::vector<MatchRecord>& match_log() const { return log_; }
    double total_rating() const;

private:
    friend void elo_update(EloTable&, const std::string&, const std::string&, MatchOutcome,
                           const std::string&);
    std::map<std::string, double> ratings_;
    double k_factor_;
    std::vector<MatchRecord> log_;
};

/// Win expectation 1 / (1 + 10^((rb - ra)/400)); depends only on ra - rb.
double elo_expected(double ra, double rb);

/// Applies one match result (draw counts one half) and logs it.
void elo_update(EloTable& table, const std::string& a, const std::string& b,
                MatchOutcome outcome, const std::string& prompt_id = "");

struct MatchPlan {
    long comparisons = 10000;
    std::uint64_t seed = 0;
    bool position_swap = true;  // judge each pair twice with sides swapped
    double initial_rating = 1000.0;
    double k_factor = 4.0;
    /// Override for the pairwise prompt; must bind {{prompt}}, {{response_a}},
    /// {{response_b}}. Empty selects the built-in prompt.
    std::string comparison_prompt_template;
};

struct ModelCorpus {
    std::string model_id;
    std::vector<GenerationRecord> generations;
};

const std::string& default_comparison_prompt();

/// Builds the pairwise judging prompt for one match.
std::string build_comparison_prompt(const MatchPlan& plan, const std::string& prompt,
                                    const std::string& response_a,
                                    const std::string& response_b);

/// Parses the judge's final "WINNER: A|B|TIE" line; throws JudgeFormatError.
MatchOutcome parse_verdict(const std::string& completion);

struct TournamentResult {
    EloTable table;
    long skipped = 0;  // matches dropped after unparseable verdicts
};

/// Plays plan.comparisons uniform-random matches over the shared prompt ids,
/// updating Elo strictly in match order. Deterministic given the plan seed
/// and a scripted judge.
TournamentResult run_tournament(const std::vector<ModelCorpus>& models, JudgeBackend& judge,
                                const MatchPlan& plan);

struct RatingStats {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n-1)
};

/// Per-model mean and std across repeated tournament runs.
std::map<std::string, RatingStats> rating_stats(const std::vector<EloTable>& tables);

}  // namespace mpo
