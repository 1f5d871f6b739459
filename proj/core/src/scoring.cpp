#include "mpo/scoring.hpp"

#include <cctype>
#include <optional>

#include "mpo/errors.hpp"
#include "mpo/text.hpp"

namespace mpo {

namespace {

std::optional<int> parse_int_after(const std::string& line, const std::string& prefix) {
    if (line.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
    std::string rest = trim(line.substr(prefix.size()));
    if (rest.empty()) return std::nullopt;
    for (char c : rest)
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    return std::stoi(rest);
}

// "ITEM <name>: N"
std::optional<std::pair<std::string, int>> parse_item_line(const std::string& line) {
    static const std::string prefix = "ITEM ";
    if (line.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
    std::size_t colon = line.rfind(':');
    if (colon == std::string::npos || colon <= prefix.size()) return std::nullopt;
    std::string name = trim(line.substr(prefix.size(), colon - prefix.size()));
    std::string value = trim(line.substr(colon + 1));
    if (name.empty() || value.empty()) return std::nullopt;
    for (char c : value)
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    return std::make_pair(name, std::stoi(value));
}

std::optional<int> last_integer(const std::string& text) {
    std::optional<int> found;
    std::size_t i = 0;
    while (i < text.size()) {
        if (std::isdigit(static_cast<unsigned char>(text[i]))) {
            std::size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            if (j - i <= 9) found = std::stoi(text.substr(i, j - i));
            i = j;
        } else {
            ++i;
        }
    }
    return found;
}

struct ParsedScore {
    std::map<std::string, int> per_item;
    int total = 0;
};

// Extracts per-item awards and the trailing total; returns nullopt when no
// score is recoverable (the retryable case). Structural violations against
// the rubric throw ValidationError immediately.
std::optional<ParsedScore> extract_score(const std::string& completion, const Rubric& rubric,
                                         bool lenient_total) {
    ParsedScore out;
    std::vector<std::string> lines = split_lines(completion);

    std::optional<int> total;
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        std::string line = trim(*it);
        if (line.empty()) continue;
        total = parse_int_after(line, "TOTAL:");
        break;
    }
    if (!total && lenient_total) total = last_integer(completion);
    if (!total) return std::nullopt;

    for (const auto& raw_line : lines) {
        std::string line = trim(raw_line);
        auto item = parse_item_line(line);
        if (!item) continue;
        const RubricItem* matched = nullptr;
        for (const auto& ri : rubric.items)
            if (ri.name == item->first) {
                matched = &ri;
                break;
            }
        if (!matched)
            throw ValidationError("judge scored unknown rubric item '" + item->first + "'");
        if (item->second > matched->max_points)
            throw ValidationError("award " + std::to_string(item->second) + " exceeds " +
                                  std::to_string(matched->max_points) + " points for item '" +
                                  item->first + "'");
        out.per_item[item->first] = item->second;
    }

    if (!out.per_item.empty()) {
        int sum = 0;
        for (const auto& [_, v] : out.per_item) sum += v;
        if (sum != *total)
            throw ValidationError("per-item awards sum to " + std::to_string(sum) +
                                  " but the judge reported TOTAL: " + std::to_string(*total));
    }
    int attainable = total_attainable(rubric);
    if (*total < 0 || *total > attainable)
        throw ValidationError("total " + std::to_string(*total) + " outside [0, " +
                              std::to_string(attainable) + "]");
    out.total = *total;
    return out;
}

}  // namespace

std::string build_scoring_prompt(const ScoringRequest& request, const std::string& rubric_text) {
    std::string p;
    p += "You are an instructor scoring a student's response against the rubric below.\n\n";
    p += "Evaluation Rubric:\n" + rubric_text + "\n\n";
    p += "Task Description:\n" + request.task_description + "\n\n";
    p += "Student's Prompt Instructions:\n" + request.student_prompt + "\n\n";
    p += "Student's Generation:\n" + request.student_generation + "\n\n";
    p += "Assess the response against every rubric item. Then output one line per item "
         "in the form \"ITEM <item name>: <awarded points>\" and end your reply with a "
         "final line \"TOTAL: <sum of awarded points>\".\n";
    return p;
}

ScoreReport score_with_rubric(JudgeBackend& backend, const ScoringRequest& request,
                              const Rubric& rubric, bool lenient_total) {
    if (request.mode != ScoreMode::Rubric)
        throw PreconditionError("score_with_rubric requires rubric mode");

    const std::string prompt = build_scoring_prompt(request, request.rubric_text);
    const int attempts = backend.retry_policy.max_attempts;
    std::string text;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        text = complete(backend, prompt);
        auto parsed = extract_score(text, rubric, lenient_total);
        if (parsed) {
            ScoreReport report;
            report.per_item = std::move(parsed->per_item);
            report.total = parsed->total;
            report.attainable = total_attainable(rubric);
            report.normalized = normalize_score(report.total, rubric);
            report.raw = text;
            return report;
        }
    }
    throw ScoringError("no \"TOTAL: N\" line after " + std::to_string(attempts) +
                           " attempts",
                       text);
}

ScoreReport plan_then_execute_score(JudgeBackend& backend, const ScoringRequest& request,
                                    bool lenient_total) {
    if (request.mode != ScoreMode::PlanThenExecute)
        throw PreconditionError("plan_then_execute_score requires plan-then-execute mode");
    if (request.reference.empty())
        throw PreconditionError("plan-then-execute scoring needs a reference solution");

    Rubric guidelines = parse_rubric(request.rubric_text);

    std::string plan_prompt;
    plan_prompt += "You are an instructor preparing to grade a student's solution.\n\n";
    plan_prompt += "Problem:\n" + request.student_prompt + "\n\n";
    plan_prompt += "Reference Solution:\n" + request.reference + "\n\n";
    plan_prompt += "Evaluation Guidelines:\n" + request.rubric_text + "\n\n";
    plan_prompt += "Write a concise evaluation plan: the checkpoints a correct solution "
                   "must pass, failure modes to look for, and how points will be "
                   "allocated under the guidelines. End with \"<EOE>\".\n";
    std::string plan = complete(backend, plan_prompt);
    if (trim(plan).empty()) throw JudgeFormatError("empty evaluation plan");

    std::string exec_prompt;
    exec_prompt += "You are an instructor grading a student's solution by executing the "
                   "evaluation plan below.\n\n";
    exec_prompt += "Evaluation Plan:\n" + plan + "\n\n";
    exec_prompt += "Evaluation Guidelines:\n" + request.rubric_text + "\n\n";
    exec_prompt += "Problem:\n" + request.student_prompt + "\n\n";
    exec_prompt += "Student's Solution:\n" + request.student_generation + "\n\n";
    exec_prompt += "Apply the plan step by step. Then output one line per guideline item "
                   "in the form \"ITEM <item name>: <awarded points>\" and end with a "
                   "final line \"TOTAL: <sum of awarded points>\".\n";

    const int attempts = backend.retry_policy.max_attempts;
    std::string text;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        text = complete(backend, exec_prompt);
        auto parsed = extract_score(text, guidelines, lenient_total);
        if (parsed) {
            ScoreReport report;
            report.per_item = std::move(parsed->per_item);
            report.total = parsed->total;
            report.attainable = total_attainable(guidelines);
            report.normalized = normalize_score(report.total, guidelines);
            report.raw = "PLAN:\n" + plan + "\nEXECUTION:\n" + text;
            return report;
        }
    }
    throw ScoringError("no \"TOTAL: N\" line in execution phase after " +
                           std::to_string(attempts) + " attempts",
                       text);
}

std::string extract_answer_span(const std::string& generation) {
    static const std::string boxed = "\\boxed{";
    std::size_t pos = generation.rfind(boxed);
    if (pos != std::string::npos) {
        std::size_t i = pos + boxed.size();
        int depth = 1;
        std::string content;
        while (i < generation.size() && depth > 0) {
            char c = generation[i];
            if (c == '{') ++depth;
            if (c == '}') {
                --depth;
                if (depth == 0) break;
            }
            content.push_back(c);
            ++i;
        }
        return content;
    }
    std::vector<std::string> lines = split_lines(generation);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        std::string t = trim(*it);
        if (!t.empty()) return t;
    }
    return "";
}

int exact_match_score(const std::string& generation, const std::string& reference_answer) {
    if (reference_answer.empty())
        throw PreconditionError("reference answer must be nonempty");
    std::string span = normalize_whitespace(extract_answer_span(generation));
    std::string ref = normalize_whitespace(reference_answer);
    return span == ref && !span.empty() ? 1 : 0;
}

MathScoringMode pick_math_mode(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.5
               ? MathScoringMode::ExactMatch
               : MathScoringMode::ReasoningEval;
}

}  // namespace mpo
