#pragma once

#include <map>
#include <random>
#include <string>

#include "mpo/judge.hpp"
#include "mpo/rubric.hpp"

namespace mpo {

enum class ScoreMode { Rubric, PlanThenExecute, ExactMatch };

struct ScoringRequest {
    std::string rubric_text;  // rubric or meta-guidelines shown to the judge
    std::string task_description;
    std::string student_prompt;
    std::string student_generation;
    std::string reference;  // empty = absent
    ScoreMode mode = ScoreMode::Rubric;
};

struct ScoreReport {
    std::map<std::string, int> per_item;  // empty when the judge gave only a total
    int total = 0;
    int attainable = 0;
    double normalized = 0.0;
    std::string raw;  // full judge text; both phases for plan-then-execute
};

/// The fixed prompt wrapped around a rubric for scoring one generation.
std::string build_scoring_prompt(const ScoringRequest& request, const std::string& rubric_text);

/// Scores a generation against the rubric. The judge must end with a line
/// "TOTAL: N"; optional "ITEM <name>: N" lines are validated against the
/// rubric (names known, awards within max_points, sum equal to the total).
/// Completions with no extractable score are retried, then raise
/// ScoringError carrying the raw text. `lenient_total` accepts the last
/// integer anywhere in the completion as a fallback.
ScoreReport score_with_rubric(JudgeBackend& backend, const ScoringRequest& request,
                              const Rubric& rubric, bool lenient_total = false);

/// Two-phase evaluation for reference-backed tasks: first completion drafts
/// an evaluation plan from problem + reference + guidelines, second applies
/// the plan to the student solution and must end with "TOTAL: N". The
/// request's rubric text must parse as a rubric (it fixes the attainable
/// total). Both completions are retained in the report's raw field.
ScoreReport plan_then_execute_score(JudgeBackend& backend, const ScoringRequest& request,
                                    bool lenient_total = false);

/// 1 iff the generation's final answer span equals the reference after
/// whitespace normalization. The span is the content of the last \boxed{...}
/// if present, else the last non-empty line.
int exact_match_score(const std::string& generation, const std::string& reference_answer);

std::string extract_answer_span(const std::string& generation);

enum class MathScoringMode { ExactMatch, ReasoningEval };

/// Fair coin between the two math scoring modes.
MathScoringMode pick_math_mode(std::mt19937_64& rng);

}  // namespace mpo
