#pragma once

#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mpo/mdp.hpp"

namespace mpo {

/// Labeled partition of the state space. Cells are disjoint, jointly cover
/// every state, and remember the partition they were refined from.
class Partition {
public:
    using CellMap = std::map<std::string, std::vector<int>>;

    /// Validates cell structure; when parent is given, additionally checks
    /// that every cell sits inside a single parent cell.
    Partition(int phase, CellMap cells, int num_states,
              std::shared_ptr<const Partition> parent = nullptr);

    static Partition single_cell(int num_states, const std::string& label = "all");
    static Partition singletons(int num_states);

    int phase() const { return phase_; }
    int num_states() const { return num_states_; }
    const CellMap& cells() const { return cells_; }
    const std::shared_ptr<const Partition>& parent() const { return parent_; }

    /// Observation label of a state; throws DomainError outside [0, num_states).
    const std::string& label_of(int state) const;

    const std::vector<int>& cell(const std::string& label) const;
    bool has_cell(const std::string& label) const { return cells_.count(label) != 0; }
    bool all_singletons() const;

private:
    int phase_ = 0;
    int num_states_ = 0;
    CellMap cells_;
    std::vector<std::string> state_to_label_;
    std::shared_ptr<const Partition> parent_;
};

enum class SplitRule {
    VarianceMaxBisection,  // separate rewards above/below the cell mean
    RandomBisection,       // shuffle the cell, halve it
    FullSingleton,         // explode into one cell per state
};

SplitRule split_rule_from_string(const std::string& name);
std::string to_string(SplitRule rule);

/// One refinement instruction. An empty target means the rule selects the
/// cell itself (max-variance cell, random splittable cell, or every cell).
struct SplitDirective {
    SplitRule rule = SplitRule::FullSingleton;
    std::string target;  // "" = auto
};

struct ScheduledSplit {
    long trigger_step = 0;
    SplitDirective directive;
};

/// Ordered refinement plan; trigger steps must be strictly increasing.
struct RefinementSchedule {
    std::vector<ScheduledSplit> splits;

    void validate() const;
};

/// Label of the unique cell containing the state.
const std::string& observation_of(const Partition& partition, int state);

/// Unweighted mean of the golden reward over the labeled cell.
double observation_reward(const Partition& partition, const GoldenMdp& mdp,
                          const std::string& label);

/// Applies one split directive, producing the phase t+1 partition with the
/// input as parent. Throws RefinementExhausted when nothing can be split.
Partition refine(const Partition& partition, std::span<const double> golden_reward,
                 const SplitDirective& directive, std::mt19937_64& rng);

/// True iff every child cell is contained in some parent cell.
bool is_refinement_of(const Partition& child, const Partition& parent);

}  // namespace mpo
