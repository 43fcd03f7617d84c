#include "hrqsum/rouge.hpp"

#include <algorithm>
#include <map>

#include "hrqsum/error.hpp"
#include "hrqsum/text.hpp"

namespace hrqsum {
namespace {

double f1(double overlap, double candidate, double reference) {
  if (overlap <= 0.0 || candidate <= 0.0 || reference <= 0.0) return 0.0;
  const double p = overlap / candidate;
  const double r = overlap / reference;
  return 2.0 * p * r / (p + r);
}

std::size_t lcs_length(const std::vector<std::string>& a,
                       const std::vector<std::string>& b) {
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (const auto& x : a) {
    std::size_t diagonal = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = x == b[j - 1] ? diagonal + 1 : std::max(row[j], row[j - 1]);
      diagonal = up;
    }
  }
  return row[b.size()];
}

}  // namespace

double rouge2_f1(const std::vector<std::string>& candidate_tokens,
                 const std::vector<std::string>& reference_tokens) {
  const auto cand = bigrams(candidate_tokens);
  const auto ref = bigrams(reference_tokens);
  std::map<std::string, std::size_t> ref_counts;
  for (const auto& g : ref) ++ref_counts[g];
  std::size_t overlap = 0;
  for (const auto& g : cand) {
    auto it = ref_counts.find(g);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return f1(static_cast<double>(overlap), static_cast<double>(cand.size()),
            static_cast<double>(ref.size()));
}

double rougel_f1(const std::vector<std::string>& candidate_tokens,
                 const std::vector<std::string>& reference_tokens) {
  return f1(static_cast<double>(lcs_length(candidate_tokens, reference_tokens)),
            static_cast<double>(candidate_tokens.size()),
            static_cast<double>(reference_tokens.size()));
}

RougeScore rouge_single(std::string_view candidate, std::string_view reference) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  return {rouge2_f1(c, r), rougel_f1(c, r)};
}

RougeScore rouge(std::string_view candidate,
                 const std::vector<std::string>& references) {
  if (references.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "rouge needs at least one reference");
  }
  const auto c = tokenize(candidate);
  std::vector<RougeScore> single;
  single.reserve(references.size());
  for (const auto& ref : references) {
    const auto r = tokenize(ref);
    single.push_back({rouge2_f1(c, r), rougel_f1(c, r)});
  }
  if (single.size() == 1) return single.front();

  RougeScore mean;
  for (std::size_t held = 0; held < single.size(); ++held) {
    double best2 = 0.0;
    double bestl = 0.0;
    for (std::size_t j = 0; j < single.size(); ++j) {
      if (j == held) continue;
      best2 = std::max(best2, single[j].r2_f1);
      bestl = std::max(bestl, single[j].rl_f1);
    }
    mean.r2_f1 += best2;
    mean.rl_f1 += bestl;
  }
  mean.r2_f1 /= static_cast<double>(single.size());
  mean.rl_f1 /= static_cast<double>(single.size());
  return mean;
}

}  // namespace hrqsum
