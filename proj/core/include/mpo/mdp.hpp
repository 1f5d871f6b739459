#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace mpo {

/// Finite MDP with a per-state ground-truth ("golden") reward. Transitions
/// are stored dense, row-major over (state, action, next state).
struct GoldenMdp {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> transition;     // [s * A * S + a * S + s2]
    std::vector<double> golden_reward;  // [s]
    double discount = 0.9;

    double p(int s, int a, int s2) const {
        return transition[static_cast<std::size_t>(s) * num_actions * num_states +
                          static_cast<std::size_t>(a) * num_states + s2];
    }
    double& p(int s, int a, int s2) {
        return transition[static_cast<std::size_t>(s) * num_actions * num_states +
                          static_cast<std::size_t>(a) * num_states + s2];
    }

    /// Throws DomainError unless every row is a distribution (1e-9), a golden
    /// reward exists for every state, and 0 < discount < 1.
    void validate() const;
};

/// Stochastic policy over observation labels. Map order is lexicographic,
/// which keeps every iteration over labels deterministic.
struct TabularPolicy {
    std::map<std::string, std::vector<double>> probs;

    void validate() const;  // each row a distribution within 1e-9
};

struct ValueIterationResult {
    std::vector<double> values;
    std::vector<int> greedy_actions;
    int sweeps = 0;
};

/// Value iteration for V(s) = reward(s) + discount * max_a sum_s' P(s'|s,a) V(s').
/// Iterates until one sweep moves no value by tol or more; the contraction
/// then bounds the Bellman residual of the returned table below tol.
/// Greedy ties break toward the lowest action index.
ValueIterationResult value_iteration(const GoldenMdp& mdp, std::span<const double> reward,
                                     double tol);

class Partition;

/// Exact discounted return of an observation policy measured against the
/// golden reward, via the |S| x |S| linear system (I - discount * P_pi) V = r.
double golden_return(const GoldenMdp& mdp, const Partition& partition,
                     const TabularPolicy& policy, std::span<const double> start);

/// sum_o w(o) * KL(policy(.|o) || reference(.|o)). Labels must coincide and
/// the reference must have support wherever the policy does.
double policy_kl(const TabularPolicy& policy, const TabularPolicy& reference,
                 const std::map<std::string, double>& weights);

}  // namespace mpo
