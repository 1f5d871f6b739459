#pragma once

#include <string>
#include <vector>

namespace mpo {

/// The senior-instructor prompt templates driving the three meta steps.
/// Placeholders use {{name}} and are bound by the build_* functions below.
const std::string& meta_analysis_template();
const std::string& meta_refinement_template();
const std::string& meta_merging_template();

/// Binds {{task_description}}, {{student_prompt}}, {{student_generation}},
/// {{junior_prompt}}, {{junior_score}}, {{max_words}}. A nonempty reference
/// solution is inserted as an extra context section. Throws ValidationError
/// if any placeholder survives substitution.
std::string build_meta_analysis_prompt(const std::string& task_description,
                                       const std::string& student_prompt,
                                       const std::string& student_generation,
                                       const std::string& junior_prompt,
                                       const std::string& junior_score, int max_words,
                                       const std::string& reference_solution = "");

std::string build_meta_refinement_prompt(const std::string& meta_analysis, int max_words);

/// Candidate rubric texts are joined with the "===" delimiter.
std::string build_meta_merging_prompt(const std::vector<std::string>& candidate_texts,
                                      int max_words);

}  // namespace mpo
