#include "mpo/prompts.hpp"

#include "mpo/errors.hpp"
#include "mpo/text.hpp"

namespace mpo {

namespace {

const std::string kMetaAnalysis = R"(You are a senior instructor tasked with evaluating a junior instructor's scoring of a student's generation based on a specific task and prompt instruction.
Your objective is to conduct a meta-level analysis of the junior instructor's evaluation approach, guiding them in refining their scoring criteria to ensure accurate, nuanced differentiation between high-quality and subpar generations.
Emphasize strategies for assigning lower scores to undesirable responses and higher scores to responses that adhere closely to the overall objectives of the task.

The information provided includes:

Task Description:
{{task_description}}

Student's Prompt Instructions:
{{student_prompt}}

Student's Generation:
{{student_generation}}
{{reference_section}}
Junior Instructor's Scoring Criteria:
{{junior_prompt}}

Junior Instructor's Assigned Score:
{{junior_score}}

Your task:
Critically evaluate the junior instructor's score and justification in relation to the student's response, task requirements, and prompt instructions.

1. Accuracy of Scoring
- Determine whether the student's response is receiving an inflated score despite not fully meeting the task objectives in terms of quality and content.
- Identify any elements where the response deviates from task expectations, such as misinterpretation, lack of depth, or overemphasis on irrelevant aspects.

2. Evaluation of Scoring Criteria
- Assess whether the junior instructor's criteria align with the task's overarching purpose. Are critical aspects overlooked, or do the criteria require further breakdown for clarity?
- Examine whether the distribution of points is logical and correctly sums to the total score. Flag any inconsistencies and suggest necessary adjustments.

3. Constructive Feedback for Refinement
- Provide actionable recommendations to enhance the scoring framework, ensuring it is comprehensive and consistently applied.
- Emphasize the need for strict penalization in cases of severe errors to maintain evaluation rigor.

Present the analysis concisely within {{max_words}} words. Conclude the response with: "<EOE>".

Your Analysis:
)";

const std::string kMetaRefinement = R"(Meta-Level Analysis:
{{meta_analysis}}

Based on the meta-level analysis, refine the junior instructor's scoring criteria by designing an explicit rubric-based framework with separate section items for awarding points and deducting points.
This rubric must assign specific point values for meeting given criteria, with clear deductions for any shortcomings.
Fill in any gaps in the existing criteria to cover all relevant aspects of the task. Provide a concrete example illustrating how the rubric would apply to a typical student response. Adjust the total score to match the rubric items, ensuring the sum of all criteria equals the final total.

Use the following structure:

<rubric>
<item>
Score Category Name
- X1: (Description of the criterion for achieving this score X1, followed by an example.)
- X2: (Description of the criterion for achieving this score X2, followed by an example.)
...
</item>
...
</rubric>

Your generation should be no more than {{max_words}} words. End with "<EOE>".
Important: You must follow the <rubric> and <item> formatting as shown above.

Junior Instructor's Scoring Criteria (refined):
)";

const std::string kMetaMerging = R"(Combine and refine the multiple sets of Junior Instructor's Scoring Criteria into a single, cohesive set that provides comprehensive guidelines for assessment.

Here are multiple sets of Junior Instructor's Scoring Criteria, delimited by "===":
```
{{multiple_sets}}
```

Combine the above concisely without repetition. The combined criteria should be no more than {{max_words}} words. Make sure that the points across criteria add up correctly to the total score.

Use the following structure:

<rubric>
<item>
Score Category Name
- X1: (Description of the criterion for achieving this score X1, followed by an example.)
- X2: (Description of the criterion for achieving this score X2, followed by an example.)
...
</item>
...
</rubric>

Your generation should be no more than {{max_words}} words. End with "<EOE>".
Important: You must follow the <rubric> and <item> formatting as shown above.

Junior Instructor's Scoring Criteria (combined):
)";

void check_fully_bound(const std::string& prompt) {
    std::size_t pos = prompt.find("{{");
    if (pos != std::string::npos) {
        std::size_t end = prompt.find("}}", pos);
        std::string name = end == std::string::npos ? "?"
                                                    : prompt.substr(pos + 2, end - pos - 2);
        throw ValidationError("unbound placeholder {{" + name + "}} in meta prompt");
    }
}

}  // namespace

const std::string& meta_analysis_template() { return kMetaAnalysis; }
const std::string& meta_refinement_template() { return kMetaRefinement; }
const std::string& meta_merging_template() { return kMetaMerging; }

std::string build_meta_analysis_prompt(const std::string& task_description,
                                       const std::string& student_prompt,
                                       const std::string& student_generation,
                                       const std::string& junior_prompt,
                                       const std::string& junior_score, int max_words,
                                       const std::string& reference_solution) {
    std::string reference_section;
    if (!reference_solution.empty())
        reference_section = "\nReference Solution:\n" + reference_solution + "\n";
    std::string prompt = fill_template(
        kMetaAnalysis, {{"task_description", task_description},
                        {"student_prompt", student_prompt},
                        {"student_generation", student_generation},
                        {"reference_section", reference_section},
                        {"junior_prompt", junior_prompt},
                        {"junior_score", junior_score},
                        {"max_words", std::to_string(max_words)}});
    check_fully_bound(prompt);
    return prompt;
}

std::string build_meta_refinement_prompt(const std::string& meta_analysis, int max_words) {
    std::string prompt = fill_template(kMetaRefinement,
                                       {{"meta_analysis", meta_analysis},
                                        {"max_words", std::to_string(max_words)}});
    check_fully_bound(prompt);
    return prompt;
}

std::string build_meta_merging_prompt(const std::vector<std::string>& candidate_texts,
                                      int max_words) {
    std::string joined;
    for (std::size_t i = 0; i < candidate_texts.size(); ++i) {
        if (i) joined += "\n===\n";
        joined += candidate_texts[i];
    }
    std::string prompt = fill_template(kMetaMerging,
                                       {{"multiple_sets", joined},
                                        {"max_words", std::to_string(max_words)}});
    check_fully_bound(prompt);
    return prompt;
}

}  // namespace mpo
