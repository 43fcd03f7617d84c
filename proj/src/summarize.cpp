#include "hrqsum/summarize.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "hrqsum/corpus.hpp"
#include "hrqsum/embedding.hpp"
#include "hrqsum/error.hpp"
#include "hrqsum/rouge.hpp"
#include "hrqsum/text.hpp"

namespace hrqsum {

EvidenceSet evidence_set(const Path& subpath, const PathTree& tree,
                         const Corpus& corpus) {
  const auto node = tree.find(subpath);
  if (!node) {
    throw Error(ErrorKind::kNotFound,
                "subpath not present in tree of " + tree.entity_id());
  }
  EvidenceSet out;
  out.subpath = subpath;
  out.sentences = tree.node(*node).members;
  out.texts.reserve(out.sentences.size());
  for (const std::size_t s : out.sentences) {
    out.texts.push_back(corpus.sentences().at(s).text);
  }
  return out;
}

std::size_t centroid_sentence(const EvidenceSet& evidence) {
  const std::size_t n = evidence.sentences.size();
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "empty evidence set");
  if (evidence.texts.size() != n) {
    throw Error(ErrorKind::kInvalidArgument, "evidence texts do not match ids");
  }
  if (n == 1) return evidence.sentences.front();

  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(n);
  for (const auto& text : evidence.texts) tokens.push_back(tokenize(text));
  std::vector<double> total(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double f = rouge2_f1(tokens[i], tokens[j]);
      total[i] += f;
      total[j] += f;
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const bool higher = total[i] > total[best];
    const bool tie_smaller = total[i] == total[best] &&
                             evidence.sentences[i] < evidence.sentences[best];
    if (higher || tie_smaller) best = i;
  }
  return evidence.sentences[best];
}

std::size_t nearest_sentence_decode(const Path& subpath,
                                    const Codebook& codebook,
                                    const EmbeddingMatrix& embeddings,
                                    std::span<const std::size_t> candidates) {
  if (embeddings.rows() == 0) {
    throw Error(ErrorKind::kInvalidArgument, "no sentences to decode against");
  }
  if (embeddings.dim() != codebook.dim()) {
    throw Error(ErrorKind::kInvalidArgument, "embedding and codebook dims differ");
  }
  const auto z = decode(subpath, codebook);
  auto dist = [&](std::size_t i) {
    const auto row = embeddings.row(i);
    double sum = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double diff = static_cast<double>(row[j]) - z[j];
      sum += diff * diff;
    }
    return sum;
  };
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_dist = std::numeric_limits<double>::infinity();
  auto consider = [&](std::size_t i) {
    const double d = dist(i);
    if (d < best_dist || (d == best_dist && i < best)) {
      best_dist = d;
      best = i;
    }
  };
  if (candidates.empty()) {
    for (std::size_t i = 0; i < embeddings.rows(); ++i) consider(i);
  } else {
    for (const std::size_t i : candidates) {
      if (i >= embeddings.rows()) {
        throw Error(ErrorKind::kInvalidArgument, "candidate sentence out of range");
      }
      consider(i);
    }
  }
  return best;
}

Summary assemble(const SummaryInputs& inputs,
                 const std::vector<ScoredSubpath>& generic,
                 const std::vector<ScoredSubpath>& specific,
                 RealizationMode mode) {
  if (inputs.corpus == nullptr || inputs.tree == nullptr) {
    throw Error(ErrorKind::kInvalidArgument, "summary needs a corpus and a tree");
  }
  if (mode == RealizationMode::kNearest &&
      (inputs.codebook == nullptr || inputs.embeddings == nullptr)) {
    throw Error(ErrorKind::kInvalidArgument,
                "nearest mode needs a codebook and embeddings");
  }
  const Corpus& corpus = *inputs.corpus;

  std::vector<const ScoredSubpath*> chosen_generic;
  std::vector<const ScoredSubpath*> chosen_specific;
  std::set<Path> seen;
  for (const auto& s : generic) {
    if (seen.insert(s.path).second) chosen_generic.push_back(&s);
  }
  for (const auto& s : specific) {
    if (seen.insert(s.path).second) chosen_specific.push_back(&s);
  }
  auto by_score = [](const ScoredSubpath* a, const ScoredSubpath* b) {
    return a->score > b->score;
  };
  std::stable_sort(chosen_generic.begin(), chosen_generic.end(), by_score);
  std::stable_sort(chosen_specific.begin(), chosen_specific.end(), by_score);

  Summary summary;
  summary.entity_id = inputs.tree->entity_id();
  auto realise = [&](const ScoredSubpath& s) {
    SummarySentence out;
    out.subpath = s.path;
    out.kind = s.kind;
    out.score = s.score;
    out.source = mode;
    const EvidenceSet evidence = evidence_set(s.path, *inputs.tree, corpus);
    out.evidence = evidence.sentences;
    if (mode == RealizationMode::kExtractive) {
      out.sentence = centroid_sentence(evidence);
    } else {
      out.sentence = nearest_sentence_decode(s.path, *inputs.codebook,
                                             *inputs.embeddings);
    }
    out.text = corpus.sentences().at(out.sentence).text;
    summary.sentences.push_back(std::move(out));
  };
  for (const auto* s : chosen_generic) realise(*s);
  for (const auto* s : chosen_specific) realise(*s);
  return summary;
}

}  // namespace hrqsum
