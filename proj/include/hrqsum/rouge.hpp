#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hrqsum {

struct RougeScore {
  double r2_f1 = 0.0;
  double rl_f1 = 0.0;
};

/// Single-reference ROUGE-2 (clipped bigram overlap) and ROUGE-L (token
/// LCS) F1.
RougeScore rouge_single(std::string_view candidate, std::string_view reference);

/// Jackknifed over references when there are several: the mean over
/// leave-one-out folds of the best F1 among the remaining references.
RougeScore rouge(std::string_view candidate,
                 const std::vector<std::string>& references);

double rouge2_f1(const std::vector<std::string>& candidate_tokens,
                 const std::vector<std::string>& reference_tokens);
double rougel_f1(const std::vector<std::string>& candidate_tokens,
                 const std::vector<std::string>& reference_tokens);

}  // namespace hrqsum
