#pragma once

#include <cstddef>
#include <vector>

#include "hrqsum/backend.hpp"
#include "hrqsum/codebook.hpp"
#include "hrqsum/embedding.hpp"

namespace hrqsum {

struct EpochReport {
  int epoch = 0;
  /// Mean ||x - decode(encode(x))||^2 after the epoch's update.
  double recon = 0.0;
  /// Mean per-point sum of KL(assignment || uniform) over kept levels.
  double kl = 0.0;
  double norm_loss = 0.0;
  /// Temperature at the last step of the epoch.
  double tau = 0.0;
};

struct FitReport {
  std::vector<EpochReport> epochs;
  /// Set when every input row is identical.
  bool degenerate_input = false;
  std::size_t reseeded_codewords = 0;
  std::size_t snapped_codewords = 0;
};

struct FitResult {
  Codebook codebook;
  FitReport report;
};

/// Soft Lloyd fitting of a residual codebook on fixed embeddings: per epoch,
/// each point draws a truncation depth, takes tempered (optionally Gumbel
/// perturbed) assignments level by level on its residuals, and codewords
/// move to the responsibility-weighted mean of their residuals. Empty
/// codewords are re-seeded to the worst-reconstructed point and deeper
/// levels are shrunk whenever the norm loss is active.
FitResult fit(const EmbeddingMatrix& embeddings, std::size_t levels,
              std::size_t codebook_size, const QuantizerConfig& config,
              Backend backend = Backend::kParallel);

}  // namespace hrqsum
