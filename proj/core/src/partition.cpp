#include "mpo/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mpo/errors.hpp"

namespace mpo {

Partition::Partition(int phase, CellMap cells, int num_states,
                     std::shared_ptr<const Partition> parent)
    : phase_(phase), num_states_(num_states), cells_(std::move(cells)),
      parent_(std::move(parent)) {
    if (phase_ < 0) throw DomainError("partition phase must be >= 0");
    if (num_states_ <= 0) throw DomainError("partition needs a nonempty state space");
    state_to_label_.assign(num_states_, std::string());
    std::size_t covered = 0;
    for (auto& [label, states] : cells_) {
        if (states.empty()) throw DomainError("cell " + label + " is empty");
        std::sort(states.begin(), states.end());
        for (int s : states) {
            if (s < 0 || s >= num_states_)
                throw DomainError("cell " + label + " references state " +
                                  std::to_string(s) + " outside the state space");
            if (!state_to_label_[s].empty())
                throw DomainError("state " + std::to_string(s) +
                                  " appears in cells " + state_to_label_[s] + " and " + label);
            state_to_label_[s] = label;
            ++covered;
        }
    }
    if (covered != static_cast<std::size_t>(num_states_))
        throw DomainError("cells do not cover the state space");
    if (parent_) {
        if (parent_->num_states() != num_states_)
            throw DomainError("parent partition covers a different state space");
        for (const auto& [label, states] : cells_) {
            const std::string& owner = parent_->label_of(states.front());
            for (int s : states)
                if (parent_->label_of(s) != owner)
                    throw DomainError("cell " + label + " straddles parent cells");
        }
    }
}

Partition Partition::single_cell(int num_states, const std::string& label) {
    CellMap cells;
    std::vector<int> all(num_states);
    std::iota(all.begin(), all.end(), 0);
    cells.emplace(label, std::move(all));
    return Partition(0, std::move(cells), num_states);
}

Partition Partition::singletons(int num_states) {
    CellMap cells;
    for (int s = 0; s < num_states; ++s) cells.emplace("s" + std::to_string(s), std::vector<int>{s});
    return Partition(0, std::move(cells), num_states);
}

const std::string& Partition::label_of(int state) const {
    if (state < 0 || state >= num_states_)
        throw DomainError("state " + std::to_string(state) + " outside the state space");
    return state_to_label_[state];
}

const std::vector<int>& Partition::cell(const std::string& label) const {
    auto it = cells_.find(label);
    if (it == cells_.end()) throw DomainError("unknown observation label " + label);
    return it->second;
}

bool Partition::all_singletons() const {
    return cells_.size() == static_cast<std::size_t>(num_states_);
}

SplitRule split_rule_from_string(const std::string& name) {
    if (name == "variance-max") return SplitRule::VarianceMaxBisection;
    if (name == "random") return SplitRule::RandomBisection;
    if (name == "full") return SplitRule::FullSingleton;
    throw ConfigError("unknown split rule '" + name + "'");
}

std::string to_string(SplitRule rule) {
    switch (rule) {
        case SplitRule::VarianceMaxBisection: return "variance-max";
        case SplitRule::RandomBisection: return "random";
        case SplitRule::FullSingleton: return "full";
    }
    return "?";
}

void RefinementSchedule::validate() const {
    long prev = -1;
    for (const auto& s : splits) {
        if (s.trigger_step < 0) throw ConfigError("split trigger steps must be >= 0");
        if (s.trigger_step <= prev)
            throw ConfigError("split trigger steps must be strictly increasing");
        prev = s.trigger_step;
    }
}

const std::string& observation_of(const Partition& partition, int state) {
    return partition.label_of(state);
}

double observation_reward(const Partition& partition, const GoldenMdp& mdp,
                          const std::string& label) {
    const std::vector<int>& states = partition.cell(label);
    double sum = 0.0;
    for (int s : states) {
        if (s >= static_cast<int>(mdp.golden_reward.size()))
            throw DomainError("partition references a state without a golden reward");
        sum += mdp.golden_reward[s];
    }
    return sum / static_cast<double>(states.size());
}

namespace {

double cell_variance(const std::vector<int>& states, std::span<const double> reward) {
    double mean = 0.0;
    for (int s : states) mean += reward[s];
    mean /= static_cast<double>(states.size());
    double var = 0.0;
    for (int s : states) {
        double d = reward[s] - mean;
        var += d * d;
    }
    return var / static_cast<double>(states.size());
}

}  // namespace

Partition refine(const Partition& partition, std::span<const double> golden_reward,
                 const SplitDirective& directive, std::mt19937_64& rng) {
    if (golden_reward.size() != static_cast<std::size_t>(partition.num_states()))
        throw DomainError("golden reward size does not match the partition");
    if (!directive.target.empty() && !partition.has_cell(directive.target))
        throw DomainError("split target names unknown cell " + directive.target);

    Partition::CellMap cells = partition.cells();
    auto parent = std::make_shared<Partition>(partition);

    auto emit = [&](const std::string& label, std::vector<int> states) {
        if (!cells.emplace(label, std::move(states)).second)
            throw DomainError("split produced duplicate label " + label);
    };

    if (directive.rule == SplitRule::FullSingleton) {
        bool split_any = false;
        std::vector<std::string> targets;
        if (directive.target.empty()) {
            for (const auto& [label, states] : cells)
                if (states.size() >= 2) targets.push_back(label);
        } else if (cells.at(directive.target).size() >= 2) {
            targets.push_back(directive.target);
        }
        for (const auto& label : targets) {
            std::vector<int> states = cells.at(label);
            cells.erase(label);
            for (int s : states) emit("s" + std::to_string(s), {s});
            split_any = true;
        }
        if (!split_any)
            throw RefinementExhausted("no cell with two or more states to split");
        return Partition(partition.phase() + 1, std::move(cells), partition.num_states(),
                         std::move(parent));
    }

    // Bisection rules: pick the cell, then split it in two.
    std::string target = directive.target;
    if (target.empty()) {
        if (directive.rule == SplitRule::VarianceMaxBisection) {
            double best = 0.0;
            for (const auto& [label, states] : cells) {
                if (states.size() < 2) continue;
                double var = cell_variance(states, golden_reward);
                if (var > best) {
                    best = var;
                    target = label;
                }
            }
            if (target.empty())
                throw RefinementExhausted("no cell with reward variation to split");
        } else {
            std::vector<std::string> splittable;
            for (const auto& [label, states] : cells)
                if (states.size() >= 2) splittable.push_back(label);
            if (splittable.empty())
                throw RefinementExhausted("no cell with two or more states to split");
            std::uniform_int_distribution<std::size_t> pick(0, splittable.size() - 1);
            target = splittable[pick(rng)];
        }
    }

    std::vector<int> states = cells.at(target);
    if (states.size() < 2)
        throw RefinementExhausted("cell " + target + " has a single state");

    std::vector<int> lo, hi;
    if (directive.rule == SplitRule::VarianceMaxBisection) {
        double mean = 0.0;
        for (int s : states) mean += golden_reward[s];
        mean /= static_cast<double>(states.size());
        for (int s : states) (golden_reward[s] > mean ? hi : lo).push_back(s);
        if (lo.empty() || hi.empty())
            throw RefinementExhausted("cell " + target + " has no reward variation to separate");
    } else {
        std::shuffle(states.begin(), states.end(), rng);
        std::size_t half = (states.size() + 1) / 2;
        lo.assign(states.begin(), states.begin() + half);
        hi.assign(states.begin() + half, states.end());
    }

    cells.erase(target);
    emit(target + ".a", std::move(lo));
    emit(target + ".b", std::move(hi));
    return Partition(partition.phase() + 1, std::move(cells), partition.num_states(),
                     std::move(parent));
}

bool is_refinement_of(const Partition& child, const Partition& parent) {
    if (child.num_states() != parent.num_states())
        throw DomainError("partitions cover different state spaces");
    for (const auto& [label, states] : child.cells()) {
        const std::string& owner = parent.label_of(states.front());
        for (int s : states)
            if (parent.label_of(s) != owner) return false;
    }
    return true;
}

}  // namespace mpo
