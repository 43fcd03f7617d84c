#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hrqsum/aggregate.hpp"
#include "hrqsum/codebook.hpp"

namespace hrqsum {

class Corpus;
class EmbeddingMatrix;

struct EvidenceSet {
  Path subpath;
  std::vector<std::size_t> sentences;
  std::vector<std::string> texts;
};

EvidenceSet evidence_set(const Path& subpath, const PathTree& tree,
                         const Corpus& corpus);

/// Member with the highest mean ROUGE-2 F1 against the other members; ties
/// go to the smallest sentence index.
std::size_t centroid_sentence(const EvidenceSet& evidence);

/// Sentence whose embedding is closest to decode(subpath). Searches
/// `candidates` when given, otherwise every row.
std::size_t nearest_sentence_decode(const Path& subpath,
                                    const Codebook& codebook,
                                    const EmbeddingMatrix& embeddings,
                                    std::span<const std::size_t> candidates = {});

enum class RealizationMode { kExtractive, kNearest };

struct SummarySentence {
  std::string text;
  std::size_t sentence = 0;
  Path subpath;
  SubpathKind kind = SubpathKind::kGeneric;
  double score = 0.0;
  std::vector<std::size_t> evidence;
  RealizationMode source = RealizationMode::kExtractive;
};

struct Summary {
  std::string entity_id;
  std::vector<SummarySentence> sentences;
};

struct SummaryInputs {
  const Corpus* corpus = nullptr;
  const PathTree* tree = nullptr;
  /// Required for kNearest only.
  const Codebook* codebook = nullptr;
  const EmbeddingMatrix* embeddings = nullptr;
};

/// Drops specific subpaths already chosen as generic, realises each subpath
/// and orders generic before specific, each by descending score.
Summary assemble(const SummaryInputs& inputs,
                 const std::vector<ScoredSubpath>& generic,
                 const std::vector<ScoredSubpath>& specific,
                 RealizationMode mode);

}  // namespace hrqsum
