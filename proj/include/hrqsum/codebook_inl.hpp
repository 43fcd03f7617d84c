#pragma once

#include <random>

namespace hrqsum {

template <typename Rng>
std::size_t sample_truncation(Rng& rng, std::size_t levels, double p_depth) {
  if (p_depth <= 0.0) return levels;
  std::bernoulli_distribution keep(1.0 - p_depth);
  std::size_t depth = 0;
  while (depth < levels && keep(rng)) ++depth;
  return depth;
}

}  // namespace hrqsum
