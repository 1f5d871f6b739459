#include "mpo/elo.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mpo/errors.hpp"
#include "mpo/text.hpp"

namespace mpo {

EloTable::EloTable(const std::vector<std::string>& models, double initial_rating,
                   double k_factor)
    : k_factor_(k_factor) {
    if (models.size() < 2) throw DomainError("a rating table needs at least two models");
    for (const auto& m : models)
        if (!ratings_.emplace(m, initial_rating).second)
            throw DomainError("duplicate model id " + m);
}

double EloTable::rating(const std::string& model) const {
    auto it = ratings_.find(model);
    if (it == ratings_.end()) throw DomainError("unknown model " + model);
    return it->second;
}

double EloTable::total_rating() const {
    double sum = 0.0;
    for (const auto& [_, r] : ratings_) sum += r;
    return sum;
}

double elo_expected(double ra, double rb) {
    return 1.0 / (1.0 + std::pow(10.0, (rb - ra) / 400.0));
}

void elo_update(EloTable& table, const std::string& a, const std::string& b,
                MatchOutcome outcome, const std::string& prompt_id) {
    if (a == b) throw DomainError("a model cannot play itself");
    auto ia = table.ratings_.find(a);
    auto ib = table.ratings_.find(b);
    if (ia == table.ratings_.end()) throw DomainError("unknown model " + a);
    if (ib == table.ratings_.end()) throw DomainError("unknown model " + b);

    double sa = outcome == MatchOutcome::AWins ? 1.0
                : outcome == MatchOutcome::Draw ? 0.5
                                                : 0.0;
    double ea = elo_expected(ia->second, ib->second);
    double delta = table.k_factor_ * (sa - ea);
    ia->second += delta;
    ib->second -= delta;  // exact zero-sum
    table.log_.push_back({a, b, outcome, prompt_id});
}

namespace {

const std::string kComparisonPrompt =
    R"(You are an impartial judge comparing two responses to the same prompt.

Prompt:
{{prompt}}

Response A:
{{response_a}}

Response B:
{{response_b}}

Judge which response is better overall, considering fidelity to the prompt, quality, and depth. End your reply with a final line reading exactly "WINNER: A", "WINNER: B", or "WINNER: TIE".
)";

}  // namespace

const std::string& default_comparison_prompt() { return kComparisonPrompt; }

std::string build_comparison_prompt(const MatchPlan& plan, const std::string& prompt,
                                    const std::string& response_a,
                                    const std::string& response_b) {
    const std::string& tmpl = plan.comparison_prompt_template.empty()
                                  ? kComparisonPrompt
                                  : plan.comparison_prompt_template;
    return fill_template(tmpl, {{"prompt", prompt},
                                {"response_a", response_a},
                                {"response_b", response_b}});
}

MatchOutcome parse_verdict(const std::string& completion) {
    std::vector<std::string> lines = split_lines(completion);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        std::string line = trim(*it);
        if (line.empty()) continue;
        if (line == "WINNER: A") return MatchOutcome::AWins;
        if (line == "WINNER: B") return MatchOutcome::BWins;
        if (line == "WINNER: TIE") return MatchOutcome::Draw;
        throw JudgeFormatError("verdict line is not WINNER: A|B|TIE: '" + line + "'");
    }
    throw JudgeFormatError("empty verdict completion");
}

namespace {

// Score one side of a (possibly swapped) pair of judgments.
double outcome_points(MatchOutcome o, bool as_a) {
    if (o == MatchOutcome::Draw) return 0.5;
    bool a_won = o == MatchOutcome::AWins;
    return a_won == as_a ? 1.0 : 0.0;
}

MatchOutcome judge_once(JudgeBackend& judge, const MatchPlan& plan, const std::string& prompt,
                        const std::string& ra, const std::string& rb) {
    const int attempts = judge.retry_policy.max_attempts;
    std::string text;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        text = complete(judge, build_comparison_prompt(plan, prompt, ra, rb));
        try {
            return parse_verdict(text);
        } catch (const JudgeFormatError&) {
            if (attempt == attempts) throw;
        }
    }
    throw JudgeFormatError("unreachable");
}

}  // namespace

TournamentResult run_tournament(const std::vector<ModelCorpus>& models, JudgeBackend& judge,
                                const MatchPlan& plan) {
    if (models.size() < 2) throw PreconditionError("a tournament needs at least two models");
    if (plan.comparisons <= 0) throw PreconditionError("comparison count must be > 0");

    // Generations by model and prompt id; matches draw from the shared ids.
    std::vector<std::map<std::string, const GenerationRecord*>> by_prompt(models.size());
    std::vector<std::string> ids;
    for (std::size_t m = 0; m < models.size(); ++m)
        for (const auto& g : models[m].generations) by_prompt[m][g.id] = &g;
    for (const auto& [id, _] : by_prompt[0]) {
        bool everywhere = true;
        for (std::size_t m = 1; m < models.size(); ++m)
            if (!by_prompt[m].count(id)) {
                everywhere = false;
                break;
            }
        if (everywhere) ids.push_back(id);
    }
    if (ids.empty()) throw PreconditionError("the model corpora share no prompt ids");

    std::vector<std::string> names;
    for (const auto& m : models) names.push_back(m.model_id);

    TournamentResult result{EloTable(names, plan.initial_rating, plan.k_factor), 0};
    std::mt19937_64 rng(plan.seed);
    std::uniform_int_distribution<std::size_t> pick_id(0, ids.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_model(0, models.size() - 1);

    for (long match = 0; match < plan.comparisons; ++match) {
        std::size_t i = pick_model(rng);
        std::size_t j = pick_model(rng);
        while (j == i) j = pick_model(rng);
        const std::string& id = ids[pick_id(rng)];
        const std::string& gen_i = by_prompt[i].at(id)->generation;
        const std::string& gen_j = by_prompt[j].at(id)->generation;
        const std::string& prompt = by_prompt[i].at(id)->prompt;

        try {
            double points_i = 0.0;
            MatchOutcome forward = judge_once(judge, plan, prompt, gen_i, gen_j);
            points_i += outcome_points(forward, true);
            if (plan.position_swap) {
                MatchOutcome backward = judge_once(judge, plan, prompt, gen_j, gen_i);
                points_i += outcome_points(backward, false);
                MatchOutcome combined = points_i > 1.0   ? MatchOutcome::AWins
                                        : points_i < 1.0 ? MatchOutcome::BWins
                                                         : MatchOutcome::Draw;
                elo_update(result.table, names[i], names[j], combined, id);
            } else {
                elo_update(result.table, names[i], names[j], forward, id);
            }
        } catch (const JudgeFormatError&) {
            ++result.skipped;
        }
    }
    return result;
}

std::map<std::string, RatingStats> rating_stats(const std::vector<EloTable>& tables) {
    if (tables.size() < 2)
        throw PreconditionError("rating statistics need at least two runs");
    const auto& reference = tables.front().ratings();
    for (const auto& t : tables) {
        if (t.ratings().size() != reference.size())
            throw DomainError("tables rate different model sets");
        for (const auto& [model, _] : reference)
            if (!t.ratings().count(model))
                throw DomainError("table misses model " + model);
    }

    std::map<std::string, RatingStats> out;
    const double n = static_cast<double>(tables.size());
    for (const auto& [model, _] : reference) {
        double mean = 0.0;
        for (const auto& t : tables) mean += t.rating(model);
        mean /= n;
        double ss = 0.0;
        for (const auto& t : tables) {
            double d = t.rating(model) - mean;
            ss += d * d;
        }
        out[model] = {mean, std::sqrt(ss / (n - 1.0))};
    }
    return out;
}

}  // namespace mpo
