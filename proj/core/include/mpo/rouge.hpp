#pragma once

#include <string>
#include <vector>

namespace mpo {

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool defined = true;  // false when the reference has no n-grams/tokens
};

/// Clipped n-gram multiset overlap over lowercased whitespace tokens.
RougeScore rouge_n(const std::string& candidate, const std::string& reference, int n);

/// Longest-common-subsequence overlap over the full token sequences.
RougeScore rouge_l(const std::string& candidate, const std::string& reference);

/// Sentence-split variant: candidate and reference are split on newlines and
/// the i-th candidate sentence is matched against the i-th reference
/// sentence; per-sentence LCS lengths are summed (no union bookkeeping).
/// Single-line inputs reduce exactly to rouge_l.
RougeScore rouge_lsum(const std::string& candidate, const std::string& reference);

/// Fraction of correct predictions.
double accuracy(const std::vector<int>& predictions, long total);

/// The "68.60 (3249/4736)" table rendering: percent to two decimals.
std::string render_accuracy(long correct, long total);

}  // namespace mpo
