#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mpo/mdp.hpp"
#include "mpo/partition.hpp"

namespace mpo {

/// A simulator problem bundle: MDP, start distribution, initial partition,
/// and refinement schedule, loaded from one line-oriented config file.
///
/// Schema (whitespace-separated, '#' starts a comment):
///   mdp <num_states> <num_actions> <discount>
///   reward <state> <value>                 one line per state
///   transition <s> <a> <s'> <prob>         unlisted entries are 0
///   start <state> <prob>                   optional; default uniform
///   cell <label> <state> [<state>...]      optional; default one cell "all"
///   split <trigger_step> <rule> <target>   rule: variance-max|random|full,
///                                          target: cell label or "auto"
struct SimProblem {
    GoldenMdp mdp;
    std::vector<double> start;
    Partition initial_partition = Partition::single_cell(1);
    RefinementSchedule schedule;
};

SimProblem load_sim_problem(std::istream& in);
SimProblem load_sim_problem_file(const std::string& path);

}  // namespace mpo
