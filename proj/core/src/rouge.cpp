#include "mpo/rouge.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "mpo/errors.hpp"
#include "mpo/text.hpp"

namespace mpo {

namespace {

RougeScore from_counts(double overlap, double cand_total, double ref_total) {
    RougeScore s;
    if (ref_total == 0.0) {
        s.defined = false;
        return s;
    }
    s.precision = cand_total == 0.0 ? 0.0 : overlap / cand_total;
    s.recall = overlap / ref_total;
    s.f1 = (s.precision + s.recall) == 0.0
               ? 0.0
               : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

std::map<std::string, int> ngram_counts(const std::vector<std::string>& tokens, int n) {
    std::map<std::string, int> counts;
    if (tokens.size() < static_cast<std::size_t>(n)) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key;
        for (int k = 0; k < n; ++k) {
            if (k) key.push_back('\x1f');
            key += tokens[i + k];
        }
        ++counts[key];
    }
    return counts;
}

// Rolling two-row LCS over token sequences.
std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                          : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace

RougeScore rouge_n(const std::string& candidate, const std::string& reference, int n) {
    if (n < 1) throw DomainError("n-gram order must be >= 1");
    auto cand = ngram_counts(tokenize_lower(candidate), n);
    auto ref = ngram_counts(tokenize_lower(reference), n);

    double cand_total = 0.0, ref_total = 0.0, overlap = 0.0;
    for (const auto& [_, c] : cand) cand_total += c;
    for (const auto& [_, c] : ref) ref_total += c;
    for (const auto& [gram, c] : cand) {
        auto it = ref.find(gram);
        if (it != ref.end()) overlap += std::min(c, it->second);
    }
    return from_counts(overlap, cand_total, ref_total);
}

RougeScore rouge_l(const std::string& candidate, const std::string& reference) {
    std::vector<std::string> cand = tokenize_lower(candidate);
    std::vector<std::string> ref = tokenize_lower(reference);
    return from_counts(static_cast<double>(lcs_length(cand, ref)),
                       static_cast<double>(cand.size()), static_cast<double>(ref.size()));
}

RougeScore rouge_lsum(const std::string& candidate, const std::string& reference) {
    std::vector<std::string> cand_lines = split_lines(candidate);
    std::vector<std::string> ref_lines = split_lines(reference);

    double lcs_sum = 0.0, cand_total = 0.0, ref_total = 0.0;
    std::size_t rows = std::max(cand_lines.size(), ref_lines.size());
    for (std::size_t i = 0; i < rows; ++i) {
        std::vector<std::string> cand =
            i < cand_lines.size() ? tokenize_lower(cand_lines[i]) : std::vector<std::string>{};
        std::vector<std::string> ref =
            i < ref_lines.size() ? tokenize_lower(ref_lines[i]) : std::vector<std::string>{};
        cand_total += static_cast<double>(cand.size());
        ref_total += static_cast<double>(ref.size());
        lcs_sum += static_cast<double>(lcs_length(cand, ref));
    }
    return from_counts(lcs_sum, cand_total, ref_total);
}

double accuracy(const std::vector<int>& predictions, long total) {
    if (total <= 0) throw DomainError("total must be > 0");
    long correct = 0;
    for (int p : predictions) {
        if (p != 0 && p != 1) throw DomainError("predictions must be 0 or 1");
        correct += p;
    }
    return static_cast<double>(correct) / static_cast<double>(total);
}

std::string render_accuracy(long correct, long total) {
    if (total <= 0) throw DomainError("total must be > 0");
    double pct = 100.0 * static_cast<double>(correct) / static_cast<double>(total);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f (%ld/%ld)", pct, correct, total);
    return std::string(buf);
}

}  // namespace mpo
