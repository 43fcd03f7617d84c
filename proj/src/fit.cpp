#include "hrqsum/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hrqsum/error.hpp"
#include "hrqsum/kernels.hpp"

namespace hrqsum {
namespace {

constexpr double kMinMass = 1e-9;
constexpr double kSnapTolerance = 1e-6;
constexpr double kDistortionFloor = 1e-12;
// Scores are divided by kScoreScale times the level's per-dimension
// distortion.
constexpr double kScoreScale = 6.0;

bool all_rows_equal(const EmbeddingMatrix& emb) {
  const auto first = emb.row(0);
  for (std::size_t i = 1; i < emb.rows(); ++i) {
    const auto row = emb.row(i);
    if (!std::equal(row.begin(), row.end(), first.begin())) return false;
  }
  return true;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

// Moves codeword (level, code) onto the residual entering `level` of the
// point whose residual after `level` is largest.
void reseed(Codebook& cb, const EmbeddingMatrix& emb, std::size_t level,
            Code code) {
  std::vector<double> r;
  std::vector<double> best_entering;
  double worst = -1.0;
  for (std::size_t i = 0; i < emb.rows(); ++i) {
    const auto row = emb.row(i);
    r.assign(row.begin(), row.end());
    if (level > 0) {
      const Path prefix = encode(r, cb, level);
      const auto z = decode(prefix, cb);
      for (std::size_t j = 0; j < r.size(); ++j) r[j] -= z[j];
    }
    double best = std::numeric_limits<double>::infinity();
    for (Code q = 0; q < cb.codebook_size(); ++q) {
      best = std::min(best, distance(r, cb.codeword(level, q)));
    }
    if (best > worst) {
      worst = best;
      best_entering = r;
    }
  }
  std::copy(best_entering.begin(), best_entering.end(),
            cb.codeword(level, code).begin());
}

void shrink_levels(Codebook& cb, double gamma_nl) {
  for (std::size_t d = 1; d < cb.levels(); ++d) {
    const double parent = cb.mean_norm(d - 1);
    const double current = cb.mean_norm(d);
    if (current > 0.0 && gamma_nl * current > parent) {
      const double factor = parent / (gamma_nl * current);
      for (Code q = 0; q < cb.codebook_size(); ++q) {
        for (auto& v : cb.codeword(d, q)) v *= factor;
      }
    }
  }
}

std::size_t snap_duplicates(Codebook& cb, const std::vector<double>& eps) {
  std::size_t snapped = 0;
  for (std::size_t d = 0; d < cb.levels(); ++d) {
    const double tol = kSnapTolerance * std::sqrt(std::max(eps[d], 0.0));
    for (Code k = 1; k < cb.codebook_size(); ++k) {
      for (Code j = 0; j < k; ++j) {
        const auto lower = cb.codeword(d, j);
        auto upper = cb.codeword(d, k);
        if (distance(upper, lower) <= tol &&
            !std::equal(upper.begin(), upper.end(), lower.begin())) {
          std::copy(lower.begin(), lower.end(), upper.begin());
          ++snapped;
          break;
        }
      }
    }
  }
  return snapped;
}

}  // namespace

FitResult fit(const EmbeddingMatrix& embeddings, std::size_t levels,
              std::size_t codebook_size, const QuantizerConfig& config,
              Backend backend) {
  config.validate();
  if (embeddings.rows() == 0) {
    throw Error(ErrorKind::kInvalidArgument, "cannot fit on zero embeddings");
  }
  FitResult result;
  Codebook& cb = result.codebook;
  cb = init_codebook(embeddings.dim(), levels, codebook_size, config);
  FitReport& report = result.report;
  report.degenerate_input = all_rows_equal(embeddings);

  const std::size_t n = embeddings.rows();
  const std::size_t k = codebook_size;
  std::vector<double> eps = kernels::level_distortions(embeddings, cb, backend);
  std::vector<double> bias;
  std::uint64_t step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    kernels::EpochInputs inputs;
    inputs.codebook = &cb;
    inputs.config = config;
    inputs.epoch = static_cast<std::uint64_t>(epoch);
    inputs.first_step = step;
    inputs.score_scale.resize(levels);
    for (std::size_t d = 0; d < levels; ++d) {
      inputs.score_scale[d] =
          std::max(kScoreScale * eps[d] / static_cast<double>(cb.dim()), kDistortionFloor);
    }
    inputs.logit_bias = bias;
    const auto acc = kernels::accumulate_epoch(embeddings, inputs, backend);
    step += n;

    std::vector<std::pair<std::size_t, Code>> empty;
    for (std::size_t d = 0; d < levels; ++d) {
      for (Code q = 0; q < k; ++q) {
        const double mass = acc.mass[d * k + q];
        if (mass < kMinMass) {
          empty.emplace_back(d, q);
          continue;
        }
        const double* sum = acc.weighted_sum.data() + (d * k + q) * cb.dim();
        auto c = cb.codeword(d, q);
        for (std::size_t j = 0; j < c.size(); ++j) c[j] = sum[j] / mass;
      }
    }
    for (const auto& [d, q] : empty) reseed(cb, embeddings, d, q);
    report.reseeded_codewords += empty.size();

    if (config.beta_nl > 0.0 && config.gamma_nl > 0.0) {
      shrink_levels(cb, config.gamma_nl);
    }

    bias.clear();
    if (config.beta_kl > 0.0) {
      bias.assign(levels * k, 0.0);
      for (std::size_t d = 0; d < levels; ++d) {
        double total = 0.0;
        for (Code q = 0; q < k; ++q) total += acc.mass[d * k + q];
        if (total <= 0.0) continue;
        for (Code q = 0; q < k; ++q) {
          const double share = std::max(acc.mass[d * k + q] / total, 1e-12);
          bias[d * k + q] = -config.beta_kl * std::log(static_cast<double>(k) * share);
        }
      }
    }

    eps = kernels::level_distortions(embeddings, cb, backend);
    EpochReport er;
    er.epoch = epoch + 1;
    er.recon = eps.back();
    er.kl = acc.points > 0 ? acc.kl_sum / static_cast<double>(acc.points) : 0.0;
    er.norm_loss = norm_loss(cb, config.beta_nl, config.gamma_nl);
    er.tau = gumbel_temperature(step - 1, config);
    report.epochs.push_back(er);
  }

  if (config.epochs > 0) report.snapped_codewords = snap_duplicates(cb, eps);
  return result;
}

}  // namespace hrqsum
