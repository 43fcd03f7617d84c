#pragma once

// Data-parallel inner loops shared by the quantizer. Each kernel has a plain
// serial reference and an OpenMP version; the OpenMP versions reduce in a
// fixed order so results do not depend on the thread count.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hrqsum/backend.hpp"
#include "hrqsum/codebook.hpp"
#include "hrqsum/embedding.hpp"

namespace hrqsum::kernels {

std::vector<Path> encode_all(const EmbeddingMatrix& points,
                             const Codebook& codebook, std::size_t depth,
                             Backend backend);

/// Entry d is the mean over points of ||x - decode(encode(x, d + 1))||^2.
std::vector<double> level_distortions(const EmbeddingMatrix& points,
                                      const Codebook& codebook,
                                      Backend backend);

/// Everything one soft-assignment pass needs besides the points.
struct EpochInputs {
  const Codebook* codebook = nullptr;
  QuantizerConfig config;
  std::uint64_t epoch = 0;
  std::uint64_t first_step = 0;
  /// Per-level score divisor (previous hard distortion), length D.
  std::vector<double> score_scale;
  /// Per-level, per-code additive logit term, length D*K.
  std::vector<double> logit_bias;
};

/// Responsibility-weighted residual sums for the soft Lloyd update.
struct EpochAccumulator {
  std::vector<double> weighted_sum;  // D*K*dim
  std::vector<double> mass;          // D*K
  double kl_sum = 0.0;
  std::size_t points = 0;

  void add(const EpochAccumulator& other);
};

EpochAccumulator accumulate_epoch(const EmbeddingMatrix& points,
                                  const EpochInputs& inputs, Backend backend);

}  // namespace hrqsum::kernels
