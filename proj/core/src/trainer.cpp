#include "mpo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mpo/errors.hpp"

namespace mpo {

void TrainConfig::validate(int num_states) const {
    if (steps < 0) throw ConfigError("step count must be >= 0");
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    if (!std::isfinite(learning_rate)) throw ConfigError("learning rate must be finite");
    if (entropy_bonus < 0.0) throw ConfigError("entropy bonus must be >= 0");
    if (eval_interval < 1) throw ConfigError("eval interval must be >= 1");
    if (!start.empty()) {
        if (start.size() != static_cast<std::size_t>(num_states))
            throw ConfigError("start distribution size mismatch");
        double sum = 0.0;
        for (double v : start) {
            if (v < 0.0) throw ConfigError("negative start probability");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("start distribution must sum to 1");
    }
}

std::vector<double> uniform_start(int num_states) {
    return std::vector<double>(num_states, 1.0 / num_states);
}

TabularPolicy uniform_policy(const Partition& partition, int num_actions) {
    TabularPolicy p;
    for (const auto& [label, cell] : partition.cells())
        p.probs[label] = std::vector<double>(num_actions, 1.0 / num_actions);
    return p;
}

TabularPolicy argmax_policy(const TabularPolicy& policy) {
    TabularPolicy out;
    for (const auto& [label, dist] : policy.probs) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < dist.size(); ++a)
            if (dist[a] > dist[best]) best = a;
        std::vector<double> row(dist.size(), 0.0);
        row[best] = 1.0;
        out.probs[label] = std::move(row);
    }
    return out;
}

namespace {

using LogitMap = std::map<std::string, std::vector<double>>;

std::vector<double> softmax(const std::vector<double>& logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        z += out[i];
    }
    for (double& v : out) v /= z;
    return out;
}

TabularPolicy to_policy(const LogitMap& logits) {
    TabularPolicy p;
    for (const auto& [label, row] : logits) p.probs[label] = softmax(row);
    return p;
}

int sample_index(const std::vector<double>& dist, std::mt19937_64& rng) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        acc += dist[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(dist.size()) - 1;
}

// Re-key a per-label table onto a refined partition: each new cell takes the
// row its states owned in the old partition.
LogitMap reindex(const LogitMap& table, const Partition& old_part, const Partition& new_part) {
    LogitMap out;
    for (const auto& [label, states] : new_part.cells())
        out[label] = table.at(old_part.label_of(states.front()));
    return out;
}

std::map<std::string, double> uniform_label_weights(const Partition& part) {
    std::map<std::string, double> w;
    double v = 1.0 / static_cast<double>(part.cells().size());
    for (const auto& [label, _] : part.cells()) w[label] = v;
    return w;
}

}  // namespace

TrainResult policy_train(const GoldenMdp& mdp, const RefinementSchedule& schedule,
                         const Partition& initial, const TrainConfig& config,
                         std::mt19937_64& rng) {
    mdp.validate();
    schedule.validate();
    config.validate(mdp.num_states);
    if (initial.num_states() != mdp.num_states)
        throw DomainError("partition and mdp disagree on the state count");

    const int A = mdp.num_actions;
    std::vector<double> start = config.start.empty() ? uniform_start(mdp.num_states)
                                                     : config.start;

    Partition part = initial;
    LogitMap logits;
    for (const auto& [label, _] : part.cells()) logits[label] = std::vector<double>(A, 0.0);
    LogitMap reference_logits = logits;

    auto obs_reward_cache = [&part, &mdp]() {
        std::map<std::string, double> cache;
        for (const auto& [label, _] : part.cells())
            cache[label] = observation_reward(part, mdp, label);
        return cache;
    };
    std::map<std::string, double> cell_reward = obs_reward_cache();

    TrainResult result{to_policy(logits), part, {}, {}, part, 0.0};
    result.trace.reserve(static_cast<std::size_t>(config.steps));
    bool have_best = false;
    auto consider_checkpoint = [&](const TabularPolicy& current) {
        TabularPolicy greedy = argmax_policy(current);
        double value = golden_return(mdp, part, greedy, start);
        if (!have_best || value > result.best_greedy_return) {
            result.best_greedy_policy = std::move(greedy);
            result.best_greedy_partition = part;
            result.best_greedy_return = value;
            have_best = true;
        }
    };

    std::size_t next_split = 0;
    double return_sum = 0.0;
    long return_count = 0;
    double last_golden = 0.0, last_kl = 0.0;
    bool have_eval = false;

    for (long episode = 0; episode < config.steps; ++episode) {
        while (next_split < schedule.splits.size() &&
               schedule.splits[next_split].trigger_step == episode) {
            Partition refined = refine(part, mdp.golden_reward,
                                       schedule.splits[next_split].directive, rng);
            logits = reindex(logits, part, refined);
            reference_logits = reindex(reference_logits, part, refined);
            part = refined;
            cell_reward = obs_reward_cache();
            ++next_split;
            have_eval = false;
            // The observation-reward scale changes with the partition, so the
            // baseline restarts from post-split returns.
            return_sum = 0.0;
            return_count = 0;
        }

        // Roll out one episode on observation labels only.
        std::vector<std::string> labels;
        std::vector<int> actions;
        std::vector<double> rewards;
        labels.reserve(config.horizon);
        int s = sample_index(start, rng);
        for (int t = 0; t < config.horizon; ++t) {
            const std::string& label = part.label_of(s);
            std::vector<double> dist = softmax(logits.at(label));
            int a = sample_index(dist, rng);
            labels.push_back(label);
            actions.push_back(a);
            rewards.push_back(cell_reward.at(label));
            std::vector<double> row(mdp.num_states);
            for (int s2 = 0; s2 < mdp.num_states; ++s2) row[s2] = mdp.p(s, a, s2);
            s = sample_index(row, rng);
        }

        std::vector<double> returns(rewards.size());
        double g = 0.0;
        for (std::size_t t = rewards.size(); t-- > 0;) {
            g = rewards[t] + mdp.discount * g;
            returns[t] = g;
        }
        double episode_return = returns.empty() ? 0.0 : returns.front();
        return_sum += episode_return;
        ++return_count;
        double baseline = return_sum / return_count;  // running mean return

        // Discount-weighted REINFORCE update from the episode.
        LogitMap grad;
        double weight = 1.0;
        for (std::size_t t = 0; t < labels.size(); ++t) {
            const std::string& label = labels[t];
            std::vector<double> dist = softmax(logits.at(label));
            auto& grow = grad.try_emplace(label, std::vector<double>(A, 0.0)).first->second;
            double adv = weight * (returns[t] - baseline);
            for (int a = 0; a < A; ++a) {
                double indicator = (a == actions[t]) ? 1.0 : 0.0;
                grow[a] += adv * (indicator - dist[a]);
            }
            if (config.entropy_bonus > 0.0) {
                double entropy = 0.0;
                for (int a = 0; a < A; ++a)
                    if (dist[a] > 0.0) entropy -= dist[a] * std::log(dist[a]);
                for (int a = 0; a < A; ++a)
                    if (dist[a] > 0.0)
                        grow[a] -= config.entropy_bonus * dist[a] * (std::log(dist[a]) + entropy);
            }
            weight *= mdp.discount;
        }
        for (auto& [label, grow] : grad) {
            auto& row = logits.at(label);
            for (int a = 0; a < A; ++a) row[a] += config.learning_rate * grow[a];
        }

        if (!have_eval || (episode % config.eval_interval) == 0) {
            TabularPolicy current = to_policy(logits);
            last_golden = golden_return(mdp, part, current, start);
            last_kl = policy_kl(current, to_policy(reference_logits),
                                uniform_label_weights(part));
            consider_checkpoint(current);
            have_eval = true;
        }
        result.trace.push_back({episode, part.phase(), episode_return, last_golden, last_kl});
    }

    result.policy = to_policy(logits);
    result.final_partition = part;
    if (config.steps > 0) consider_checkpoint(result.policy);
    return result;
}

}  // namespace mpo
