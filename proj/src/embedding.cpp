#include "hrqsum/embedding.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <string>

#include "hrqsum/codebook.hpp"
#include "hrqsum/corpus.hpp"
#include "hrqsum/error.hpp"
#include "hrqsum/text.hpp"

namespace hrqsum {

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim)
    : rows_(rows), dim_(dim), data_(rows * dim, 0.0f) {}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim,
                                 std::vector<float> data)
    : rows_(rows), dim_(dim), data_(std::move(data)) {
  if (data_.size() != rows_ * dim_) {
    throw Error(ErrorKind::kInvalidArgument, "embedding data size mismatch");
  }
}

namespace {

constexpr std::array<char, 4> kMagic = {'H', 'R', 'Q', 'E'};

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
bool get_le(std::istream& in, T& value) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) return false;
  value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(bytes[i]) << (8 * i);
  }
  return true;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

void save_embeddings(const EmbeddingMatrix& matrix, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kHrqeVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.dim()));
  put_le<std::uint64_t>(out, matrix.rows());
  for (const float v : matrix.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  if (!out) throw Error(ErrorKind::kIo, "failed writing embeddings");
}

void save_embeddings(const EmbeddingMatrix& matrix,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  save_embeddings(matrix, out);
}

EmbeddingMatrix load_embeddings(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw Error(ErrorKind::kFormat, "not an HRQE file (bad magic)");
  }
  std::uint32_t version = 0;
  std::uint32_t dim = 0;
  std::uint64_t count = 0;
  if (!get_le(in, version) || !get_le(in, dim) || !get_le(in, count)) {
    throw Error(ErrorKind::kTruncated, "HRQE header truncated");
  }
  if (version != kHrqeVersion) {
    throw Error(ErrorKind::kFormat,
                "unsupported HRQE version " + std::to_string(version));
  }
  const std::uint64_t values = count * dim;
  const auto here = in.tellg();
  if (here != std::streampos(-1)) {
    in.seekg(0, std::ios::end);
    const auto remaining = static_cast<std::uint64_t>(in.tellg() - here);
    in.seekg(here);
    if (remaining / sizeof(float) < values) {
      throw Error(ErrorKind::kTruncated,
                  "HRQE payload holds " + std::to_string(remaining / sizeof(float)) +
                      " of " + std::to_string(values) + " values");
    }
  }
  std::vector<unsigned char> bytes(values * sizeof(float));
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  const auto got = static_cast<std::uint64_t>(in.gcount());
  if (got != bytes.size()) {
    throw Error(ErrorKind::kTruncated,
                "HRQE payload holds " + std::to_string(got / sizeof(float)) +
                    " of " + std::to_string(values) + " values");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::kTruncated, "HRQE payload longer than count*dim");
  }
  std::vector<float> data(values);
  for (std::uint64_t i = 0; i < values; ++i) {
    std::uint32_t bits = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(bytes[i * 4 + b]) << (8 * b);
    }
    data[i] = std::bit_cast<float>(bits);
  }
  return EmbeddingMatrix(count, dim, std::move(data));
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return load_embeddings(in);
}

EmbeddingMatrix embed_builtin(const Corpus& corpus, std::size_t dim,
                              std::uint64_t seed, Backend backend) {
  if (dim < 2) throw Error(ErrorKind::kInvalidArgument, "embedding dim must be >= 2");
  const auto& sentences = corpus.sentences();
  const std::size_t n = sentences.size();

  // Bucketed term counts per sentence; the empty-token case gets a sentinel
  // feature so every row has a direction.
  std::vector<std::map<std::size_t, double>> features(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto tokens = tokenize(sentences[i].text);
    auto& f = features[i];
    for (const auto& tok : tokens) f[fnv1a("u:" + tok) % kFeatureBuckets] += 1.0;
    for (const auto& gram : bigrams(tokens)) {
      f[fnv1a("b:" + gram) % kFeatureBuckets] += 1.0;
    }
    if (f.empty()) f[fnv1a("<empty>") % kFeatureBuckets] = 1.0;
  }
  std::vector<std::uint32_t> df(kFeatureBuckets, 0);
  for (const auto& f : features) {
    for (const auto& [bucket, _] : f) ++df[bucket];
  }

  EmbeddingMatrix out(n, dim);
  auto embed_row = [&](std::size_t i, std::vector<double>& acc) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const auto& [bucket, count] : features[i]) {
      const double idf = std::log((1.0 + n) / (1.0 + df[bucket])) + 1.0;
      const double weight = count * idf;
      std::mt19937_64 rng(mix_seed(seed, bucket));
      std::normal_distribution<double> normal(0.0, 1.0);
      for (std::size_t j = 0; j < dim; ++j) acc[j] += weight * normal(rng);
    }
    double sq = 0.0;
    for (const double v : acc) sq += v * v;
    const double norm = std::sqrt(sq);
    auto row = out.row(i);
    for (std::size_t j = 0; j < dim; ++j) {
      row[j] = static_cast<float>(norm > 0.0 ? acc[j] / norm : (j == 0 ? 1.0 : 0.0));
    }
  };

  if (backend == Backend::kSerial) {
    std::vector<double> acc(dim);
    for (std::size_t i = 0; i < n; ++i) embed_row(i, acc);
  } else {
#pragma omp parallel
    {
      std::vector<double> acc(dim);
#pragma omp for schedule(dynamic, 64)
      for (std::size_t i = 0; i < n; ++i) embed_row(i, acc);
    }
  }
  return out;
}

}  // namespace hrqsum
