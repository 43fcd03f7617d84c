#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hrqsum/backend.hpp"

namespace hrqsum {

/// Position of a sentence: entity index, review index within the entity and
/// sentence position within the review. Ordering follows corpus order.
struct SentenceId {
  std::uint32_t entity = 0;
  std::uint32_t review = 0;
  std::uint32_t position = 0;

  auto operator<=>(const SentenceId&) const = default;
};

struct Sentence {
  SentenceId id;
  std::string text;
  std::optional<int> rating;
  std::set<std::string> aspects;
};

struct Review {
  std::string review_id;
  std::string entity_id;
  std::optional<int> rating;
  /// Flat indices into Corpus::sentences, in review order.
  std::vector<std::size_t> sentences;
};

struct Entity {
  std::string entity_id;
  std::vector<Review> reviews;

  std::size_t sentence_count() const;
  /// Flat sentence indices of every review, in order.
  std::vector<std::size_t> sentence_indices() const;
};

/// Reviews grouped by entity. Entities appear in order of first occurrence
/// in the input, reviews in file order; `sentences` is the flat list in
/// (entity, review, position) order and is the row order of every
/// embedding matrix built from the corpus.
class Corpus {
 public:
  Corpus() = default;

  /// Appends a review, creating its entity on first sight. Blank sentences
  /// are dropped. Throws on a duplicate review_id or a rating outside 1..5.
  void add_review(const std::string& entity_id, const std::string& review_id,
                  std::optional<int> rating,
                  const std::vector<std::string>& sentences);

  const std::vector<Entity>& entities() const { return entities_; }
  const std::vector<Sentence>& sentences() const { return sentences_; }
  std::vector<Sentence>& mutable_sentences() { return sentences_; }

  const Entity& entity(std::size_t index) const { return entities_.at(index); }
  std::optional<std::size_t> find_entity(const std::string& entity_id) const;

  /// Stable textual id: "<entity_id>/<review_id>/<position>".
  std::string sentence_key(std::size_t index) const;
  const Review& review_of(std::size_t sentence_index) const;

  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }

 private:
  std::vector<Entity> entities_;
  std::vector<Sentence> sentences_;
  std::map<std::string, std::size_t> entity_index_;
  std::set<std::string> review_ids_;
};

/// Reads review JSONL: {"entity_id", "review_id", "rating": int|null,
/// "sentences": [str]} or "text" in place of "sentences" (segmented).
Corpus load_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);

/// Aspect name to lowercase keyword set.
class AspectLexicon {
 public:
  AspectLexicon() = default;
  explicit AspectLexicon(std::map<std::string, std::set<std::string>> keywords);

  const std::map<std::string, std::set<std::string>>& keywords() const {
    return keywords_;
  }
  std::vector<std::string> aspect_names() const;

 private:
  std::map<std::string, std::set<std::string>> keywords_;
};

AspectLexicon load_lexicon(const std::filesystem::path& path);

/// Sets each sentence's aspects to every aspect whose keywords intersect the
/// sentence's token set. Returns a labelled copy.
Corpus label_aspects(Corpus corpus, const AspectLexicon& lexicon);

struct DenoisingPair {
  std::size_t target = 0;
  std::size_t source = 0;
  double similarity = 0.0;
};

struct RetrievalOptions {
  std::size_t top_k = 5;
  double min_similarity = 0.6;
  Backend backend = Backend::kParallel;
};

/// Bigram tf-idf retrieval of paraphrase candidates. Candidates come from
/// other reviews whose rating equals the target's (absent matches absent).
/// Output is ordered by target, then similarity descending, then source.
std::vector<DenoisingPair> retrieve_denoising_pairs(
    const Corpus& corpus, const RetrievalOptions& options = {});

}  // namespace hrqsum
