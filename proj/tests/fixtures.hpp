#pragma once

#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "hrqsum/aggregate.hpp"
#include "hrqsum/codebook.hpp"
#include "hrqsum/corpus.hpp"
#include "hrqsum/embedding.hpp"
#include "oracles.hpp"

namespace fixtures {

inline std::filesystem::path data_dir() { return HRQSUM_TEST_DATA; }

inline oracle::Book random_book(std::mt19937_64& rng, std::size_t levels, std::size_t k,
                                std::size_t dim) {
  std::normal_distribution<double> normal;
  oracle::Book book(levels, std::vector<oracle::Vec>(k, oracle::Vec(dim)));
  for (auto& level : book)
    for (auto& c : level)
      for (auto& v : c) v = normal(rng);
  return book;
}

inline hrqsum::Codebook to_codebook(const oracle::Book& book) {
  hrqsum::Codebook cb(book.size(), book[0].size(), book[0][0].size());
  for (std::size_t d = 0; d < book.size(); ++d)
    for (hrqsum::Code q = 0; q < book[d].size(); ++q)
      std::copy(book[d][q].begin(), book[d][q].end(), cb.codeword(d, q).begin());
  return cb;
}

inline hrqsum::Path to_path(const std::vector<unsigned>& codes) {
  return hrqsum::Path(std::vector<hrqsum::Code>(codes.begin(), codes.end()));
}

inline std::vector<unsigned> to_codes(const hrqsum::Path& path) {
  return {path.codes().begin(), path.codes().end()};
}

/// Tree over sentences 0..n-1 with the given paths.
inline hrqsum::PathTree make_tree(const std::vector<std::vector<unsigned>>& paths,
                                  const std::string& id = "e") {
  std::vector<std::size_t> ids(paths.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<hrqsum::Path> p;
  for (const auto& codes : paths) p.push_back(to_path(codes));
  return hrqsum::PathTree(id, ids, p);
}

inline std::vector<std::vector<unsigned>> repeat(
    const std::vector<std::pair<std::vector<unsigned>, std::size_t>>& groups) {
  std::vector<std::vector<unsigned>> out;
  for (const auto& [path, count] : groups) out.insert(out.end(), count, path);
  return out;
}

/// A hand-built pruning case with its expected removal order and ranked
/// surviving leaves.
struct PruneCase {
  std::string name;
  std::vector<std::vector<unsigned>> paths;
  double threshold;
  std::size_t k;
  std::vector<std::vector<unsigned>> removed;
  std::vector<std::vector<unsigned>> top;
};

inline std::vector<PruneCase> prune_cases() {
  std::vector<PruneCase> cases;
  cases.push_back({"singleton_leaf_of_200",
                   repeat({{{0, 0}, 100}, {{0, 1}, 1}, {{1, 0}, 60}, {{1, 1}, 39}}),
                   0.01,
                   5,
                   {{0, 1}},
                   {{0, 0}, {1, 0}, {1, 1}}});
  cases.push_back({"nothing_to_prune",
                   repeat({{{0, 0}, 3}, {{0, 1}, 3}, {{1, 0}, 2}, {{1, 1}, 2}}),
                   0.01,
                   3,
                   {},
                   {{0, 0}, {0, 1}, {1, 0}}});
  cases.push_back({"twelve_sentence_split",
                   repeat({{{0, 0, 0}, 1}, {{0, 0, 1}, 1}, {{0, 0, 2}, 1},
                           {{0, 1, 0}, 1}, {{0, 1, 1}, 1}, {{0, 1, 2}, 1},
                           {{1, 0, 0}, 6}}),
                   0.1,
                   3,
                   {{0, 0, 0}, {0, 0, 1}, {0, 0, 2}, {0, 1, 0}, {0, 1, 1}, {0, 1, 2}},
                   {{1, 0, 0}, {0, 0}, {0, 1}}});
  cases.push_back({"cascade_to_parent",
                   repeat({{{0, 0}, 50}, {{0, 1}, 45}, {{1, 0}, 2}, {{1, 1}, 2}, {{2, 0}, 1}}),
                   0.05,
                   5,
                   {{2, 0}, {2}, {1, 0}, {1, 1}, {1}},
                   {{0, 0}, {0, 1}}});
  cases.push_back({"deeper_first_ties",
                   repeat({{{0, 0}, 20}, {{0, 1}, 20}, {{1, 0}, 2}, {{1, 1}, 4},
                           {{2, 0}, 1}, {{2, 1}, 1}, {{3, 0}, 2}}),
                   0.05,
                   5,
                   {{2, 0}, {2, 1}, {1, 0}, {3, 0}, {2}, {3}},
                   {{0, 0}, {0, 1}, {1, 1}}});
  return cases;
}

/// Two coarse unit directions plus two 0.1-norm fine offsets plus N(0, 0.01^2)
/// noise, 400 points.
inline hrqsum::EmbeddingMatrix two_by_two(std::uint64_t seed, std::size_t dim = 8) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto unit = [&](double scale) {
    oracle::Vec v(dim);
    for (auto& x : v) x = normal(rng);
    const double n = oracle::norm(v);
    for (auto& x : v) x *= scale / n;
    return v;
  };
  const oracle::Vec b[2] = {unit(1.0), unit(1.0)};
  const oracle::Vec s[2] = {unit(0.1), unit(0.1)};
  std::vector<float> data;
  for (std::size_t i = 0; i < 400; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      data.push_back(static_cast<float>(b[i % 2][j] + s[(i / 2) % 2][j] + 0.01 * normal(rng)));
    }
  }
  return hrqsum::EmbeddingMatrix(400, dim, std::move(data));
}

/// 50 sentences in 10 reviews of 2 entities, built from a few templates
/// with single-word substitutions so that near-paraphrases exist.
inline hrqsum::Corpus retrieval_corpus(std::uint64_t seed) {
  static const std::vector<std::string> templates = {
      "the breakfast was good and the coffee was hot",
      "the staff at the front desk were very friendly",
      "our room was clean and the bed was comfortable",
      "the location is great for walking to the old town",
      "the pool was lovely but crowded in the afternoon",
      "check in was quick and the staff were helpful",
      "parking was expensive and hard to find"};
  static const std::vector<std::string> swaps = {"really", "quite", "very", "nice", "cold",
                                                 "small", "quiet", "busy"};
  std::mt19937_64 rng(seed);
  hrqsum::Corpus corpus;
  for (int r = 0; r < 10; ++r) {
    std::vector<std::string> sentences;
    for (int i = 0; i < 5; ++i) {
      std::string t = templates[rng() % templates.size()];
      if (rng() % 2 == 0) {
        auto words = oracle::words(t);
        words[rng() % words.size()] = swaps[rng() % swaps.size()];
        t.clear();
        for (const auto& w : words) t += (t.empty() ? "" : " ") + w;
      }
      sentences.push_back(t);
    }
    std::optional<int> rating;
    if (r % 3 != 0) rating = 4 + r % 2;
    corpus.add_review(r < 5 ? "hotel_x" : "hotel_y", "rv" + std::to_string(r), rating, sentences);
  }
  return corpus;
}

inline std::vector<oracle::RetrievalSentence> oracle_sentences(const hrqsum::Corpus& corpus) {
  std::vector<oracle::RetrievalSentence> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& s = corpus.sentences()[i];
    out.push_back({s.text, corpus.review_of(i).review_id, s.rating.value_or(0)});
  }
  return out;
}

}  // namespace fixtures
