#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "hrqsum/backend.hpp"

namespace hrqsum {

class Corpus;

/// Row-major float32 matrix, one row per corpus sentence.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim);
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }

  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<float> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }

  const std::vector<float>& data() const { return data_; }

  bool operator==(const EmbeddingMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

inline constexpr std::uint32_t kHrqeVersion = 1;
inline constexpr std::size_t kFeatureBuckets = std::size_t{1} << 18;

/// HRQE: "HRQE", u32 version, u32 dim, u64 count, count*dim f32; all
/// little-endian, no padding.
void save_embeddings(const EmbeddingMatrix& matrix, std::ostream& out);
void save_embeddings(const EmbeddingMatrix& matrix,
                     const std::filesystem::path& path);
EmbeddingMatrix load_embeddings(std::istream& in);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);

/// Hashed unigram+bigram tf-idf features projected to `dim` by a seeded
/// Gaussian map and L2-normalised. Deterministic in (corpus, dim, seed).
EmbeddingMatrix embed_builtin(const Corpus& corpus, std::size_t dim,
                              std::uint64_t seed,
                              Backend backend = Backend::kParallel);

}  // namespace hrqsum
