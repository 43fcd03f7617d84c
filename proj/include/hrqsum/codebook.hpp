#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace hrqsum {

using Code = std::uint32_t;

/// A (sub)path q_1..q_d through the codebook levels. Ordering is
/// lexicographic, a prefix sorting before its extensions.
class Path {
 public:
  Path() = default;
  Path(std::initializer_list<Code> codes) : codes_(codes) {}
  explicit Path(std::vector<Code> codes) : codes_(std::move(codes)) {}

  std::size_t depth() const { return codes_.size(); }
  bool empty() const { return codes_.empty(); }
  Code operator[](std::size_t level) const { return codes_[level]; }
  const std::vector<Code>& codes() const { return codes_; }

  Path prefix(std::size_t depth) const;
  bool is_prefix_of(const Path& other) const;
  void push_back(Code code) { codes_.push_back(code); }

  auto operator<=>(const Path&) const = default;
  bool operator==(const Path&) const = default;

 private:
  std::vector<Code> codes_;
};

struct QuantizerConfig {
  double alpha_init = 0.5;
  double tau0 = 1.0;
  double tau_min = 0.5;
  double gamma_temp = 33333.0;
  double beta_kl = 0.0025;
  double beta_nl = 0.05;
  double gamma_nl = 1.5;
  double p_depth = 0.1;
  int epochs = 50;
  std::uint64_t seed = 0;
  bool gumbel = true;

  /// Throws kInvalidArgument when tau_min > tau0, a weight is negative or
  /// p_depth lies outside [0, 1].
  void validate() const;

  bool operator==(const QuantizerConfig&) const = default;
};

/// D levels of K codewords in R^dim. Level indices are zero-based here:
/// level 0 is the coarsest.
class Codebook {
 public:
  Codebook() = default;
  Codebook(std::size_t levels, std::size_t codebook_size, std::size_t dim);

  std::size_t levels() const { return levels_; }
  std::size_t codebook_size() const { return codebook_size_; }
  std::size_t dim() const { return dim_; }

  std::span<const double> codeword(std::size_t level, Code code) const {
    return {data_.data() + offset(level, code), dim_};
  }
  std::span<double> codeword(std::size_t level, Code code) {
    return {data_.data() + offset(level, code), dim_};
  }

  /// Mean L2 norm of the K codewords at `level`.
  double mean_norm(std::size_t level) const;

  const std::vector<double>& data() const { return data_; }

  std::uint64_t seed = 0;
  QuantizerConfig config;

  bool operator==(const Codebook&) const = default;

 private:
  std::size_t offset(std::size_t level, Code code) const {
    return (level * codebook_size_ + code) * dim_;
  }

  std::size_t levels_ = 0;
  std::size_t codebook_size_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Level-d codewords are seeded Gaussian draws projected to the unit sphere
/// and scaled by alpha_init^(d-1).
Codebook init_codebook(std::size_t dim, std::size_t levels,
                       std::size_t codebook_size, const QuantizerConfig& config);

/// s_d(q) = -||(x - sum of prefix codewords) - C_d(q)||^2 for every q, where
/// d = prefix.depth().
std::vector<double> score_level(std::span<const double> x,
                                const Codebook& codebook, const Path& prefix);

/// Greedy argmax of score_level at each level; ties go to the smallest code.
/// `depth` defaults to all levels.
Path encode(std::span<const double> x, const Codebook& codebook,
            std::optional<std::size_t> depth = std::nullopt);

/// z = sum_d C_d(q_d). An empty path decodes to the zero vector.
std::vector<double> decode(const Path& path, const Codebook& codebook);

/// Number of leading levels kept when each level survives independently
/// with probability 1 - p_depth and the first drop truncates the rest.
template <typename Rng>
std::size_t sample_truncation(Rng& rng, std::size_t levels, double p_depth);

/// Decode of the path truncated at the first dropped
/// level. Deterministic in seed.
std::vector<double> decode_dropout(const Path& path, const Codebook& codebook,
                                   double p_depth, std::uint64_t seed);

/// tau = max(tau0 * exp(-t / gamma_temp), tau_min).
double gumbel_temperature(std::uint64_t step, const QuantizerConfig& config);

/// softmax((s + g) / tau) over one level's scores. With `noise_seed` unset
/// g is zero.
std::vector<double> softmax_scores(std::span<const double> scores,
                                   double temperature);
std::vector<double> soft_assign(std::span<const double> x,
                                const Codebook& codebook, const Path& prefix,
                                double temperature,
                                std::optional<std::uint64_t> noise_seed);

/// log K - H(p), clamped to [0, log K].
double kl_to_uniform(std::span<const double> assignment);

/// (beta_nl / D) * sum_{d>=2} [max(gamma_nl * n_d / n_{d-1}, 1) - 1]^2 with
/// n_d the mean codeword norm of level d.
double norm_loss(const Codebook& codebook, double beta_nl, double gamma_nl);

/// Mixes seed components into one 64-bit RNG seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace hrqsum

#include "hrqsum/codebook_inl.hpp"
