#include "mpo/mdp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "mpo/errors.hpp"
#include "mpo/partition.hpp"

namespace mpo {

namespace {
constexpr double kProbTol = 1e-9;
}

void GoldenMdp::validate() const {
    if (num_states <= 0 || num_actions <= 0)
        throw DomainError("mdp needs at least one state and one action");
    if (!(discount > 0.0 && discount < 1.0))
        throw DomainError("discount must lie in (0,1)");
    if (golden_reward.size() != static_cast<std::size_t>(num_states))
        throw DomainError("golden reward must be defined for every state");
    if (transition.size() !=
        static_cast<std::size_t>(num_states) * num_actions * num_states)
        throw DomainError("transition table has the wrong size");
    for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < num_actions; ++a) {
            double row = 0.0;
            for (int s2 = 0; s2 < num_states; ++s2) {
                double v = p(s, a, s2);
                if (v < 0.0) throw DomainError("negative transition probability");
                row += v;
            }
            if (std::abs(row - 1.0) > kProbTol)
                throw DomainError("transition row (s=" + std::to_string(s) +
                                  ", a=" + std::to_string(a) + ") sums to " +
                                  std::to_string(row));
        }
    }
}

void TabularPolicy::validate() const {
    for (const auto& [label, dist] : probs) {
        if (dist.empty()) throw DomainError("empty action distribution for " + label);
        double sum = 0.0;
        for (double v : dist) {
            if (v < 0.0) throw DomainError("negative action probability for " + label);
            sum += v;
        }
        if (std::abs(sum - 1.0) > kProbTol)
            throw DomainError("action distribution for " + label + " sums to " +
                              std::to_string(sum));
    }
}

ValueIterationResult value_iteration(const GoldenMdp& mdp, std::span<const double> reward,
                                     double tol) {
    mdp.validate();
    if (!(tol > 0.0)) throw DomainError("value iteration tolerance must be positive");
    if (reward.size() != static_cast<std::size_t>(mdp.num_states))
        throw DomainError("reward table size mismatch");

    const int S = mdp.num_states;
    const int A = mdp.num_actions;
    ValueIterationResult res;
    res.values.assign(S, 0.0);
    res.greedy_actions.assign(S, 0);

    std::vector<double> next(S, 0.0);
    while (true) {
        double delta = 0.0;
        for (int s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
                double q = 0.0;
                for (int s2 = 0; s2 < S; ++s2) q += mdp.p(s, a, s2) * res.values[s2];
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            next[s] = reward[s] + mdp.discount * best;
            res.greedy_actions[s] = best_a;
            delta = std::max(delta, std::abs(next[s] - res.values[s]));
        }
        res.values = next;
        ++res.sweeps;
        if (delta < tol) break;
    }
    return res;
}

double golden_return(const GoldenMdp& mdp, const Partition& partition,
                     const TabularPolicy& policy, std::span<const double> start) {
    mdp.validate();
    const int S = mdp.num_states;
    const int A = mdp.num_actions;
    if (partition.num_states() != S)
        throw DomainError("partition and mdp disagree on the state count");
    if (start.size() != static_cast<std::size_t>(S))
        throw DomainError("start distribution size mismatch");

    // Induced state-level transition under the observation policy.
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(S, S);
    for (int s = 0; s < S; ++s) {
        const std::string& label = partition.label_of(s);
        auto it = policy.probs.find(label);
        if (it == policy.probs.end())
            throw DomainError("policy has no distribution for label " + label);
        if (it->second.size() != static_cast<std::size_t>(A))
            throw DomainError("policy row for " + label + " has wrong action count");
        for (int s2 = 0; s2 < S; ++s2) {
            double pss = 0.0;
            for (int a = 0; a < A; ++a) pss += it->second[a] * mdp.p(s, a, s2);
            m(s, s2) -= mdp.discount * pss;
        }
    }
    Eigen::VectorXd r(S);
    for (int s = 0; s < S; ++s) r(s) = mdp.golden_reward[s];

    Eigen::VectorXd v = m.partialPivLu().solve(r);
    double residual = (m * v - r).lpNorm<Eigen::Infinity>();
    if (residual >= 1e-9)
        throw DomainError("policy evaluation residual " + std::to_string(residual));

    double ret = 0.0;
    for (int s = 0; s < S; ++s) ret += start[s] * v(s);
    return ret;
}

double policy_kl(const TabularPolicy& policy, const TabularPolicy& reference,
                 const std::map<std::string, double>& weights) {
    if (policy.probs.size() != reference.probs.size())
        throw DomainError("policy and reference have different label sets");
    double kl = 0.0;
    for (const auto& [label, dist] : policy.probs) {
        auto ref_it = reference.probs.find(label);
        if (ref_it == reference.probs.end())
            throw DomainError("reference missing label " + label);
        auto w_it = weights.find(label);
        double w = w_it == weights.end() ? 0.0 : w_it->second;
        if (w < 0.0) throw DomainError("negative label weight for " + label);
        if (dist.size() != ref_it->second.size())
            throw DomainError("action count mismatch for label " + label);
        double local = 0.0;
        for (std::size_t a = 0; a < dist.size(); ++a) {
            double p = dist[a];
            if (p == 0.0) continue;
            double q = ref_it->second[a];
            if (q == 0.0)
                throw DomainError("reference lacks support at label " + label);
            local += p * std::log(p / q);
        }
        kl += w * local;
    }
    return kl;
}

}  // namespace mpo
