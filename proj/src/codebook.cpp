#include "hrqsum/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "hrqsum/error.hpp"

namespace hrqsum {

Path Path::prefix(std::size_t depth) const {
  depth = std::min(depth, codes_.size());
  return Path(std::vector<Code>(codes_.begin(), codes_.begin() + depth));
}

bool Path::is_prefix_of(const Path& other) const {
  return codes_.size() <= other.codes_.size() &&
         std::equal(codes_.begin(), codes_.end(), other.codes_.begin());
}

void QuantizerConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kInvalidArgument, "quantizer config: " + what);
  };
  if (!(tau_min > 0.0) || tau_min > tau0) fail("need 0 < tau_min <= tau0");
  if (!(gamma_temp > 0.0)) fail("gamma_temp must be positive");
  if (alpha_init < 0.0 || beta_kl < 0.0 || beta_nl < 0.0 || gamma_nl < 0.0) {
    fail("weights must be non-negative");
  }
  if (p_depth < 0.0 || p_depth > 1.0) fail("p_depth must lie in [0, 1]");
  if (epochs < 0) fail("epochs must be non-negative");
}

Codebook::Codebook(std::size_t levels, std::size_t codebook_size, std::size_t dim)
    : levels_(levels),
      codebook_size_(codebook_size),
      dim_(dim),
      data_(levels * codebook_size * dim, 0.0) {}

double Codebook::mean_norm(std::size_t level) const {
  double total = 0.0;
  for (Code q = 0; q < codebook_size_; ++q) {
    double sq = 0.0;
    for (const double v : codeword(level, q)) sq += v * v;
    total += std::sqrt(sq);
  }
  return codebook_size_ == 0 ? 0.0 : total / static_cast<double>(codebook_size_);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  };
  return splitmix(splitmix(splitmix(a) ^ b) ^ c);
}

Codebook init_codebook(std::size_t dim, std::size_t levels,
                       std::size_t codebook_size, const QuantizerConfig& config) {
  if (levels < 1) throw Error(ErrorKind::kInvalidArgument, "levels must be >= 1");
  if (codebook_size < 1) {
    throw Error(ErrorKind::kInvalidArgument, "codebook size must be >= 1");
  }
  if (dim < 1) throw Error(ErrorKind::kInvalidArgument, "dim must be >= 1");

  Codebook codebook(levels, codebook_size, dim);
  codebook.seed = config.seed;
  codebook.config = config;
  std::mt19937_64 rng(mix_seed(config.seed, 0x636f6465626f6f6bULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  double scale = 1.0;
  for (std::size_t level = 0; level < levels; ++level) {
    for (Code q = 0; q < codebook_size; ++q) {
      auto row = codebook.codeword(level, q);
      double sq = 0.0;
      do {
        sq = 0.0;
        for (auto& v : row) {
          v = normal(rng);
          sq += v * v;
        }
      } while (sq == 0.0);
      const double factor = scale / std::sqrt(sq);
      for (auto& v : row) v *= factor;
    }
    scale *= config.alpha_init;
  }
  return codebook;
}

namespace {

void check_dim(std::span<const double> x, const Codebook& codebook) {
  if (x.size() != codebook.dim()) {
    throw Error(ErrorKind::kInvalidArgument,
                "vector has dim " + std::to_string(x.size()) + ", codebook has " +
                    std::to_string(codebook.dim()));
  }
}

void check_path(const Path& path, const Codebook& codebook) {
  if (path.depth() > codebook.levels()) {
    throw Error(ErrorKind::kInvalidArgument,
                "path depth " + std::to_string(path.depth()) + " exceeds " +
                    std::to_string(codebook.levels()) + " levels");
  }
  for (std::size_t d = 0; d < path.depth(); ++d) {
    if (path[d] >= codebook.codebook_size()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "code " + std::to_string(path[d]) + " at level " +
                      std::to_string(d + 1) + " out of range");
    }
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

}  // namespace

std::vector<double> score_level(std::span<const double> x,
                                const Codebook& codebook, const Path& prefix) {
  check_dim(x, codebook);
  check_path(prefix, codebook);
  if (prefix.depth() >= codebook.levels()) {
    throw Error(ErrorKind::kInvalidArgument, "prefix already at full depth");
  }
  std::vector<double> residual(x.begin(), x.end());
  for (std::size_t d = 0; d < prefix.depth(); ++d) {
    const auto c = codebook.codeword(d, prefix[d]);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= c[i];
  }
  std::vector<double> scores(codebook.codebook_size());
  for (Code q = 0; q < codebook.codebook_size(); ++q) {
    scores[q] = -squared_distance(residual, codebook.codeword(prefix.depth(), q));
  }
  return scores;
}

Path encode(std::span<const double> x, const Codebook& codebook,
            std::optional<std::size_t> depth) {
  check_dim(x, codebook);
  const std::size_t levels = depth.value_or(codebook.levels());
  if (levels < 1 || levels > codebook.levels()) {
    throw Error(ErrorKind::kInvalidArgument,
                "encode depth must lie in [1, " +
                    std::to_string(codebook.levels()) + "]");
  }
  std::vector<double> residual(x.begin(), x.end());
  Path path;
  for (std::size_t d = 0; d < levels; ++d) {
    Code best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Code q = 0; q < codebook.codebook_size(); ++q) {
      const double dist = squared_distance(residual, codebook.codeword(d, q));
      if (dist < best_dist) {
        best_dist = dist;
        best = q;
      }
    }
    const auto c = codebook.codeword(d, best);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= c[i];
    path.push_back(best);
  }
  return path;
}

std::vector<double> decode(const Path& path, const Codebook& codebook) {
  check_path(path, codebook);
  std::vector<double> z(codebook.dim(), 0.0);
  for (std::size_t d = 0; d < path.depth(); ++d) {
    const auto c = codebook.codeword(d, path[d]);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += c[i];
  }
  return z;
}

std::vector<double> decode_dropout(const Path& path, const Codebook& codebook,
                                   double p_depth, std::uint64_t seed) {
  check_path(path, codebook);
  std::mt19937_64 rng(mix_seed(seed, 0x64726f70ULL));
  const std::size_t kept = sample_truncation(rng, path.depth(), p_depth);
  return decode(path.prefix(kept), codebook);
}

double gumbel_temperature(std::uint64_t step, const QuantizerConfig& config) {
  const double decayed =
      config.tau0 * std::exp(-static_cast<double>(step) / config.gamma_temp);
  return std::max(decayed, config.tau_min);
}

std::vector<double> softmax_scores(std::span<const double> scores,
                                   double temperature) {
  if (!(temperature > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "temperature must be positive");
  }
  std::vector<double> out(scores.size());
  if (scores.empty()) return out;
  const double top = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (std::size_t q = 0; q < scores.size(); ++q) {
    out[q] = std::exp((scores[q] - top) / temperature);
    total += out[q];
  }
  for (auto& p : out) p /= total;
  return out;
}

std::vector<double> soft_assign(std::span<const double> x,
                                const Codebook& codebook, const Path& prefix,
                                double temperature,
                                std::optional<std::uint64_t> noise_seed) {
  auto scores = score_level(x, codebook, prefix);
  if (noise_seed) {
    std::mt19937_64 rng(mix_seed(*noise_seed, 0x67756d62656cULL));
    std::extreme_value_distribution<double> gumbel(0.0, 1.0);
    for (auto& s : scores) s += gumbel(rng);
  }
  return softmax_scores(scores, temperature);
}

double kl_to_uniform(std::span<const double> assignment) {
  if (assignment.empty()) return 0.0;
  const double log_k = std::log(static_cast<double>(assignment.size()));
  double neg_entropy = 0.0;
  for (const double p : assignment) {
    if (p > 0.0) neg_entropy += p * std::log(p);
  }
  return std::clamp(log_k + neg_entropy, 0.0, log_k);
}

double norm_loss(const Codebook& codebook, double beta_nl, double gamma_nl) {
  const std::size_t levels = codebook.levels();
  if (levels < 2) return 0.0;
  double sum = 0.0;
  double previous = codebook.mean_norm(0);
  for (std::size_t d = 1; d < levels; ++d) {
    const double current = codebook.mean_norm(d);
    double ratio = 0.0;
    if (previous > 0.0) {
      ratio = current / previous;
    } else if (current > 0.0) {
      ratio = std::numeric_limits<double>::infinity();
    }
    const double excess = std::max(gamma_nl * ratio, 1.0) - 1.0;
    sum += excess * excess;
    previous = current;
  }
  return beta_nl / static_cast<double>(levels) * sum;
}

}  // namespace hrqsum
