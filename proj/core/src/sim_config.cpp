#include "mpo/sim_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "mpo/errors.hpp"
#include "mpo/trainer.hpp"

namespace mpo {

namespace {

[[noreturn]] void fail(int line_no, const std::string& what) {
    throw ConfigError("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

SimProblem load_sim_problem(std::istream& in) {
    SimProblem prob;
    bool have_mdp = false;
    std::vector<bool> reward_set;
    std::vector<double> start;
    Partition::CellMap cells;
    std::vector<ScheduledSplit> splits;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string keyword;
        if (!(ls >> keyword)) continue;

        if (keyword == "mdp") {
            if (have_mdp) fail(line_no, "duplicate mdp declaration");
            if (!(ls >> prob.mdp.num_states >> prob.mdp.num_actions >> prob.mdp.discount))
                fail(line_no, "expected: mdp <states> <actions> <discount>");
            if (prob.mdp.num_states <= 0 || prob.mdp.num_actions <= 0)
                fail(line_no, "state and action counts must be positive");
            prob.mdp.transition.assign(static_cast<std::size_t>(prob.mdp.num_states) *
                                           prob.mdp.num_actions * prob.mdp.num_states,
                                       0.0);
            prob.mdp.golden_reward.assign(prob.mdp.num_states, 0.0);
            reward_set.assign(prob.mdp.num_states, false);
            start.assign(prob.mdp.num_states, 0.0);
            have_mdp = true;
            continue;
        }
        if (!have_mdp) fail(line_no, "the mdp line must come first");

        if (keyword == "reward") {
            int s;
            double v;
            if (!(ls >> s >> v)) fail(line_no, "expected: reward <state> <value>");
            if (s < 0 || s >= prob.mdp.num_states) fail(line_no, "state out of range");
            prob.mdp.golden_reward[s] = v;
            reward_set[s] = true;
        } else if (keyword == "transition") {
            int s, a, s2;
            double v;
            if (!(ls >> s >> a >> s2 >> v))
                fail(line_no, "expected: transition <s> <a> <s'> <prob>");
            if (s < 0 || s >= prob.mdp.num_states || s2 < 0 || s2 >= prob.mdp.num_states ||
                a < 0 || a >= prob.mdp.num_actions)
                fail(line_no, "transition index out of range");
            prob.mdp.p(s, a, s2) = v;
        } else if (keyword == "start") {
            int s;
            double v;
            if (!(ls >> s >> v)) fail(line_no, "expected: start <state> <prob>");
            if (s < 0 || s >= prob.mdp.num_states) fail(line_no, "state out of range");
            start[s] = v;
        } else if (keyword == "cell") {
            std::string label;
            if (!(ls >> label)) fail(line_no, "expected: cell <label> <state>...");
            std::vector<int> states;
            int s;
            while (ls >> s) states.push_back(s);
            if (states.empty()) fail(line_no, "cell " + label + " lists no states");
            if (!cells.emplace(label, std::move(states)).second)
                fail(line_no, "duplicate cell label " + label);
        } else if (keyword == "split") {
            long trigger;
            std::string rule, target;
            if (!(ls >> trigger >> rule >> target))
                fail(line_no, "expected: split <trigger_step> <rule> <target|auto>");
            SplitDirective d;
            d.rule = split_rule_from_string(rule);
            d.target = target == "auto" ? "" : target;
            splits.push_back({trigger, d});
        } else {
            fail(line_no, "unknown directive '" + keyword + "'");
        }
    }

    if (!have_mdp) throw ConfigError("config declares no mdp");
    for (int s = 0; s < prob.mdp.num_states; ++s)
        if (!reward_set[s])
            throw ConfigError("no golden reward for state " + std::to_string(s));
    prob.mdp.validate();

    double start_sum = 0.0;
    for (double v : start) start_sum += v;
    if (start_sum == 0.0) {
        prob.start = uniform_start(prob.mdp.num_states);
    } else {
        if (std::abs(start_sum - 1.0) > 1e-9)
            throw ConfigError("start distribution must sum to 1");
        prob.start = start;
    }

    if (cells.empty()) {
        prob.initial_partition = Partition::single_cell(prob.mdp.num_states);
    } else {
        prob.initial_partition = Partition(0, std::move(cells), prob.mdp.num_states);
    }

    prob.schedule.splits = std::move(splits);
    prob.schedule.validate();
    return prob;
}

SimProblem load_sim_problem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    return load_sim_problem(in);
}

}  // namespace mpo
