#include "hrqsum/kernels.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "hrqsum/error.hpp"

namespace hrqsum::kernels {
namespace {

// Points per chunk and chunks per wave for the parallel epoch pass. Chunk
// partial sums are folded in chunk order, so the thread count never changes
// the rounding.
constexpr std::size_t kChunk = 512;
constexpr std::size_t kWave = 16;

void check_dim(const EmbeddingMatrix& points, const Codebook& codebook) {
  if (points.dim() != codebook.dim()) {
    throw Error(ErrorKind::kInvalidArgument,
                "embeddings have dim " + std::to_string(points.dim()) +
                    ", codebook has " + std::to_string(codebook.dim()));
  }
}

void load_row(const EmbeddingMatrix& points, std::size_t i,
              std::vector<double>& out) {
  const auto row = points.row(i);
  out.assign(row.begin(), row.end());
}

double squared_distance(const std::vector<double>& r,
                        std::span<const double> c) {
  double sum = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) {
    const double diff = r[j] - c[j];
    sum += diff * diff;
  }
  return sum;
}

// Hard residual pass; errors[d] receives ||r||^2 after level d.
void hard_pass(std::vector<double>& r, const Codebook& codebook,
               std::size_t depth, Path* path, double* errors) {
  for (std::size_t d = 0; d < depth; ++d) {
    Code best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Code q = 0; q < codebook.codebook_size(); ++q) {
      const double dist = squared_distance(r, codebook.codeword(d, q));
      if (dist < best_dist) {
        best_dist = dist;
        best = q;
      }
    }
    const auto c = codebook.codeword(d, best);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] -= c[j];
    if (path != nullptr) path->push_back(best);
    if (errors != nullptr) errors[d] = best_dist;
  }
}

EpochAccumulator empty_accumulator(const Codebook& codebook) {
  EpochAccumulator acc;
  const std::size_t cells = codebook.levels() * codebook.codebook_size();
  acc.weighted_sum.assign(cells * codebook.dim(), 0.0);
  acc.mass.assign(cells, 0.0);
  return acc;
}

struct Scratch {
  std::vector<double> residual;
  std::vector<double> scores;
  std::vector<double> probs;
};

void accumulate_point(const EmbeddingMatrix& points, std::size_t i,
                      const EpochInputs& in, EpochAccumulator& acc,
                      Scratch& s) {
  const Codebook& cb = *in.codebook;
  const QuantizerConfig& cfg = in.config;
  const std::size_t levels = cb.levels();
  const std::size_t k = cb.codebook_size();
  const std::size_t dim = cb.dim();

  std::mt19937_64 rng(mix_seed(cfg.seed, in.epoch, i));
  const std::size_t kept = sample_truncation(rng, levels, cfg.p_depth);
  const double tau = gumbel_temperature(in.first_step + i, cfg);
  double amplitude = 0.0;
  if (cfg.gumbel && cfg.tau0 > cfg.tau_min) {
    amplitude = std::clamp((tau - cfg.tau_min) / (cfg.tau0 - cfg.tau_min), 0.0, 1.0);
  }
  std::extreme_value_distribution<double> gumbel(0.0, 1.0);

  load_row(points, i, s.residual);
  s.scores.resize(k);
  for (std::size_t d = 0; d < kept; ++d) {
    for (Code q = 0; q < k; ++q) {
      double score = -squared_distance(s.residual, cb.codeword(d, q)) /
                     in.score_scale[d];
      if (!in.logit_bias.empty()) score += in.logit_bias[d * k + q];
      if (amplitude > 0.0) score += amplitude * gumbel(rng);
      s.scores[q] = score;
    }
    s.probs = softmax_scores(s.scores, tau);
    acc.kl_sum += kl_to_uniform(s.probs);
    Code best = 0;
    for (Code q = 0; q < k; ++q) {
      const double p = s.probs[q];
      acc.mass[d * k + q] += p;
      double* sum = acc.weighted_sum.data() + (d * k + q) * dim;
      for (std::size_t j = 0; j < dim; ++j) sum[j] += p * s.residual[j];
      if (s.scores[q] > s.scores[best]) best = q;
    }
    const auto c = cb.codeword(d, best);
    for (std::size_t j = 0; j < dim; ++j) s.residual[j] -= c[j];
  }
  ++acc.points;
}

}  // namespace

void EpochAccumulator::add(const EpochAccumulator& other) {
  for (std::size_t i = 0; i < weighted_sum.size(); ++i) {
    weighted_sum[i] += other.weighted_sum[i];
  }
  for (std::size_t i = 0; i < mass.size(); ++i) mass[i] += other.mass[i];
  kl_sum += other.kl_sum;
  points += other.points;
}

std::vector<Path> encode_all(const EmbeddingMatrix& points,
                             const Codebook& codebook, std::size_t depth,
                             Backend backend) {
  check_dim(points, codebook);
  if (depth < 1 || depth > codebook.levels()) {
    throw Error(ErrorKind::kInvalidArgument, "encode depth out of range");
  }
  const std::size_t n = points.rows();
  std::vector<Path> out(n);
  if (backend == Backend::kSerial) {
    std::vector<double> r;
    for (std::size_t i = 0; i < n; ++i) {
      load_row(points, i, r);
      hard_pass(r, codebook, depth, &out[i], nullptr);
    }
    return out;
  }
#pragma omp parallel
  {
    std::vector<double> r;
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      load_row(points, i, r);
      hard_pass(r, codebook, depth, &out[i], nullptr);
    }
  }
  return out;
}

std::vector<double> level_distortions(const EmbeddingMatrix& points,
                                      const Codebook& codebook,
                                      Backend backend) {
  check_dim(points, codebook);
  const std::size_t n = points.rows();
  const std::size_t levels = codebook.levels();
  std::vector<double> errors(n * levels, 0.0);
  if (backend == Backend::kSerial) {
    std::vector<double> r;
    for (std::size_t i = 0; i < n; ++i) {
      load_row(points, i, r);
      hard_pass(r, codebook, levels, nullptr, errors.data() + i * levels);
    }
  } else {
#pragma omp parallel
    {
      std::vector<double> r;
#pragma omp for schedule(static)
      for (std::size_t i = 0; i < n; ++i) {
        load_row(points, i, r);
        hard_pass(r, codebook, levels, nullptr, errors.data() + i * levels);
      }
    }
  }
  std::vector<double> mean(levels, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < levels; ++d) mean[d] += errors[i * levels + d];
  }
  if (n > 0) {
    for (auto& m : mean) m /= static_cast<double>(n);
  }
  return mean;
}

EpochAccumulator accumulate_epoch(const EmbeddingMatrix& points,
                                  const EpochInputs& inputs, Backend backend) {
  if (inputs.codebook == nullptr) {
    throw Error(ErrorKind::kInvalidArgument, "epoch inputs lack a codebook");
  }
  const Codebook& cb = *inputs.codebook;
  check_dim(points, cb);
  if (inputs.score_scale.size() != cb.levels()) {
    throw Error(ErrorKind::kInvalidArgument, "score_scale must have one entry per level");
  }
  if (!inputs.logit_bias.empty() &&
      inputs.logit_bias.size() != cb.levels() * cb.codebook_size()) {
    throw Error(ErrorKind::kInvalidArgument, "logit_bias must have D*K entries");
  }
  const std::size_t n = points.rows();
  EpochAccumulator total = empty_accumulator(cb);

  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  if (backend == Backend::kSerial) {
    // Same chunked summation order as the parallel path.
    Scratch scratch;
    for (std::size_t c = 0; c < chunks; ++c) {
      EpochAccumulator acc = empty_accumulator(cb);
      const std::size_t end = std::min(n, (c + 1) * kChunk);
      for (std::size_t i = c * kChunk; i < end; ++i) {
        accumulate_point(points, i, inputs, acc, scratch);
      }
      total.add(acc);
    }
    return total;
  }

  std::vector<EpochAccumulator> partial(std::min(chunks, kWave), total);
  for (std::size_t first = 0; first < chunks; first += kWave) {
    const std::size_t count = std::min(kWave, chunks - first);
#pragma omp parallel
    {
      Scratch scratch;
#pragma omp for schedule(dynamic, 1)
      for (std::size_t c = 0; c < count; ++c) {
        EpochAccumulator& acc = partial[c];
        std::fill(acc.weighted_sum.begin(), acc.weighted_sum.end(), 0.0);
        std::fill(acc.mass.begin(), acc.mass.end(), 0.0);
        acc.kl_sum = 0.0;
        acc.points = 0;
        const std::size_t begin = (first + c) * kChunk;
        const std::size_t end = std::min(n, begin + kChunk);
        for (std::size_t i = begin; i < end; ++i) {
          accumulate_point(points, i, inputs, acc, scratch);
        }
      }
    }
    for (std::size_t c = 0; c < count; ++c) total.add(partial[c]);
  }
  return total;
}

}  // namespace hrqsum::kernels
