#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mpo {

struct RubricDescriptor {
    int level = 0;
    std::string text;  // opaque; may span lines

    bool operator==(const RubricDescriptor&) const = default;
};

struct RubricItem {
    std::string name;              // without any "(N points)" suffix
    int max_points = 0;
    bool explicit_points = false;  // name line carried "(N points)"
    std::vector<std::string> preamble;  // rare prose between name and first level
    std::vector<RubricDescriptor> descriptors;

    bool operator==(const RubricItem&) const = default;
};

/// A versioned evaluation rubric. `version` and `source` are registry
/// metadata; structural identity is about the items alone.
struct Rubric {
    int version = 0;
    std::string source = "initial";  // initial | meta-merged | loaded
    std::vector<RubricItem> items;

    bool structurally_equal(const Rubric& other) const { return items == other.items; }
};

/// Parses one <rubric>...</rubric> block. Level markers are "- N:" or
/// "- **N**:"; an explicit "(N points)" suffix on the name line overrides the
/// inferred top level. Throws ParseError (with byte offset for tag problems)
/// or ValidationError naming the offending item.
Rubric parse_rubric(const std::string& text);

/// Fixture loader for externally authored rubrics whose level markers read
/// "Criterion for Integer Score: **N**" and whose scales need not reach 0.
/// Never used on judge output.
Rubric parse_rubric_lenient(const std::string& text);

/// Canonical text form. parse_rubric(render_rubric(r)) is structurally equal
/// to r for any rubric satisfying the strict invariants.
std::string render_rubric(const Rubric& rubric);

int total_attainable(const Rubric& rubric);

/// total / total_attainable; throws DomainError outside [0, total_attainable].
double normalize_score(int total, const Rubric& rubric);

/// Mean whitespace-token count of the rendered item texts.
double mean_item_length(const Rubric& rubric);

struct RubricHistoryEntry {
    int version = 0;
    long timestamp = 0;  // logical batch step, so replays are byte-identical
    std::string source;
    std::string text;
    int total_attainable = 0;
    double mean_item_length = 0.0;
};

std::string to_json_line(const RubricHistoryEntry& entry);

/// Loads a JSON-lines history, checking versions are consecutive from the
/// first record (strictly increasing, gap-free).
std::vector<RubricHistoryEntry> load_rubric_history(std::istream& in);
std::vector<RubricHistoryEntry> load_rubric_history_file(const std::string& path);

}  // namespace mpo
