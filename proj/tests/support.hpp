#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mpo/judge.hpp"
#include "mpo/mdp.hpp"
#include "mpo/partition.hpp"

namespace test_support {

inline std::string data_dir() { return MPO_DATA_DIR; }
inline std::string repo_dir() { return MPO_REPO_DIR; }
inline std::string cli_path() { return MPO_CLI_PATH; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

/// Fresh scratch directory under the build tree.
inline std::string scratch_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("mpo_test_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

/// Judge backend driven by a plain function; handy when a test wants full
/// control over responses without authoring a script file.
class LambdaJudge : public mpo::JudgeBackend {
public:
    explicit LambdaJudge(std::function<std::string(const std::string&)> fn)
        : fn_(std::move(fn)) {}
    std::string kind() const override { return "scripted-mock"; }
    std::string complete_once(const std::string& prompt) override {
        ++calls;
        return fn_(prompt);
    }
    int calls = 0;

private:
    std::function<std::string(const std::string&)> fn_;
};

/// Random MDP with row-stochastic transitions and i.i.d. rewards.
inline mpo::GoldenMdp random_mdp(int num_states, int num_actions, double discount,
                                 std::mt19937_64& rng) {
    mpo::GoldenMdp mdp;
    mdp.num_states = num_states;
    mdp.num_actions = num_actions;
    mdp.discount = discount;
    mdp.transition.assign(static_cast<std::size_t>(num_states) * num_actions * num_states,
                          0.0);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < num_actions; ++a) {
            double row_sum = 0.0;
            std::vector<double> row(num_states);
            for (int s2 = 0; s2 < num_states; ++s2) {
                row[s2] = unit(rng);
                row_sum += row[s2];
            }
            for (int s2 = 0; s2 < num_states; ++s2) mdp.p(s, a, s2) = row[s2] / row_sum;
            // Renormalize exactly against accumulated rounding.
            double check = 0.0;
            for (int s2 = 0; s2 < num_states; ++s2) check += mdp.p(s, a, s2);
            mdp.p(s, a, num_states - 1) += 1.0 - check;
        }
    }
    std::uniform_real_distribution<double> reward(-2.0, 6.0);
    mdp.golden_reward.resize(num_states);
    for (int s = 0; s < num_states; ++s) mdp.golden_reward[s] = reward(rng);
    return mdp;
}

/// Random partition with the requested number of cells.
inline mpo::Partition random_partition(int num_states, int num_cells, std::mt19937_64& rng) {
    std::vector<int> states(num_states);
    for (int s = 0; s < num_states; ++s) states[s] = s;
    std::shuffle(states.begin(), states.end(), rng);
    mpo::Partition::CellMap cells;
    for (int c = 0; c < num_cells; ++c) cells["c" + std::to_string(c)] = {};
    // Every cell gets one state, the rest land uniformly.
    for (int c = 0; c < num_cells; ++c) cells["c" + std::to_string(c)].push_back(states[c]);
    std::uniform_int_distribution<int> pick(0, num_cells - 1);
    for (int i = num_cells; i < num_states; ++i)
        cells["c" + std::to_string(pick(rng))].push_back(states[i]);
    return mpo::Partition(0, std::move(cells), num_states);
}

// ---- brute-force text-metric oracles (independent of core/src/rouge.cpp) ----

inline std::vector<std::string> oracle_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

struct OracleRouge {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool defined = true;
};

/// Clipped n-gram overlap by quadratic first-fit matching.
inline OracleRouge oracle_rouge_n(const std::string& cand_text, const std::string& ref_text,
                                  int n) {
    auto grams = [&](const std::string& text) {
        std::vector<std::vector<std::string>> out;
        auto toks = oracle_tokens(text);
        for (std::size_t i = 0; i + n <= toks.size(); ++i)
            out.emplace_back(toks.begin() + i, toks.begin() + i + n);
        return out;
    };
    auto cand = grams(cand_text);
    auto ref = grams(ref_text);
    std::vector<bool> used(ref.size(), false);
    double overlap = 0.0;
    for (const auto& g : cand) {
        for (std::size_t j = 0; j < ref.size(); ++j) {
            if (!used[j] && ref[j] == g) {
                used[j] = true;
                overlap += 1.0;
                break;
            }
        }
    }
    OracleRouge s;
    if (ref.empty()) {
        s.defined = false;
        return s;
    }
    s.precision = cand.empty() ? 0.0 : overlap / cand.size();
    s.recall = overlap / ref.size();
    s.f1 = (s.precision + s.recall) == 0.0
               ? 0.0
               : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

/// Full-table LCS, written independently of the production rolling version.
inline std::size_t oracle_lcs(const std::vector<std::string>& a,
                              const std::vector<std::string>& b) {
    std::vector<std::vector<std::size_t>> dp(a.size() + 1,
                                             std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            dp[i][j] = a[i - 1] == b[j - 1] ? dp[i - 1][j - 1] + 1
                                            : std::max(dp[i - 1][j], dp[i][j - 1]);
    return dp[a.size()][b.size()];
}

inline std::string random_words(std::mt19937_64& rng, int max_tokens, bool multiline = false) {
    static const std::vector<std::string> vocab = {"the", "cat", "sat", "mat", "dog",
                                                   "ran", "a",   "b",   "c",   "d"};
    int tokens = static_cast<int>(rng() % (max_tokens + 1));
    std::string out;
    for (int i = 0; i < tokens; ++i) {
        if (i) out += (multiline && rng() % 5 == 0) ? "\n" : " ";
        out += vocab[rng() % vocab.size()];
    }
    return out;
}

/// Exhaustive best golden return over deterministic observation policies.
inline double best_deterministic_return(const mpo::GoldenMdp& mdp,
                                        const mpo::Partition& partition,
                                        const std::vector<double>& start) {
    std::vector<std::string> labels;
    for (const auto& [label, _] : partition.cells()) labels.push_back(label);
    const int L = static_cast<int>(labels.size());
    const int A = mdp.num_actions;

    double best = -1e300;
    std::vector<int> assignment(L, 0);
    while (true) {
        mpo::TabularPolicy policy;
        for (int i = 0; i < L; ++i) {
            std::vector<double> row(A, 0.0);
            row[assignment[i]] = 1.0;
            policy.probs[labels[i]] = row;
        }
        best = std::max(best, mpo::golden_return(mdp, partition, policy, start));
        int pos = 0;
        while (pos < L) {
            if (++assignment[pos] < A) break;
            assignment[pos] = 0;
            ++pos;
        }
        if (pos == L) break;
    }
    return best;
}

}  // namespace test_support
