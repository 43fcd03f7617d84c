#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hrqsum/corpus.hpp"
#include "hrqsum/embedding.hpp"
#include "hrqsum/summarize.hpp"

namespace hrqsum {

/// A uniformly drawn review of the entity, sentence by sentence.
Summary baseline_random(const Corpus& corpus, std::size_t entity_index,
                        std::uint64_t seed);

/// The review with the highest mean ROUGE-2 F1 against the entity's other
/// reviews (ties: earliest review).
Summary baseline_centroid(const Corpus& corpus, std::size_t entity_index);

struct KMeansBaseline {
  Summary summary;
  /// Clusters actually used; smaller than requested when the entity has
  /// fewer sentences.
  std::size_t clusters = 0;
  bool reduced = false;
};

/// Flat k-means over the entity's sentence embeddings (seeded Forgy init,
/// Lloyd until stable or 100 iterations); one sentence per cluster, the
/// one nearest the cluster mean. Clusters ordered by size.
KMeansBaseline baseline_flat_kmeans(const Corpus& corpus,
                                    std::size_t entity_index,
                                    const EmbeddingMatrix& embeddings,
                                    std::size_t k, std::uint64_t seed);

struct PlantedConfig {
  std::size_t entities = 20;
  std::size_t sentences_per_entity = 500;
  std::size_t sentences_per_review = 5;
  std::size_t opinions = 10;
  std::size_t dim = 32;
  double noise_sigma = 0.05;
  /// Lower bound on pairwise centroid distance, in units of noise_sigma.
  double min_separation_sigmas = 4.0;
  /// Opinion weights decay geometrically by this ratio over a per-entity
  /// random ranking. Ignored when `frequencies` is set.
  double decay = 0.7;
  /// Optional explicit per-entity opinion frequencies.
  std::vector<std::vector<double>> frequencies;
  std::uint64_t seed = 0;
};

struct PlantedBenchmark {
  PlantedConfig config;
  Corpus corpus;
  EmbeddingMatrix embeddings;
  std::vector<std::vector<double>> centroids;
  std::vector<std::vector<double>> frequencies;
  /// Planted opinion of each flat sentence index.
  std::vector<std::size_t> opinion;
};

/// Samples each sentence's opinion from its entity's frequencies; the
/// embedding is the opinion centroid plus N(0, sigma^2) noise per
/// coordinate and the text names entity, opinion and index.
PlantedBenchmark generate_planted(const PlantedConfig& config);

struct Recovery {
  double precision = 0.0;
  double recall = 0.0;
};

/// Each summary sentence maps to the majority planted opinion of its
/// evidence. Precision: share of summary sentences whose opinion is among
/// the entity's top_m most frequent; recall: share of those top_m covered.
Recovery score_recovery(const Summary& summary,
                        const std::vector<std::size_t>& opinion,
                        const std::vector<std::size_t>& entity_sentences,
                        std::size_t top_m);

/// The entity's top_m opinions by count (ties: smaller opinion).
std::vector<std::size_t> top_opinions(const std::vector<std::size_t>& opinion,
                                      const std::vector<std::size_t>& entity_sentences,
                                      std::size_t top_m);

struct EntityEval {
  std::string entity_id;
  std::optional<double> r2;
  std::optional<double> rl;
  std::optional<double> recovery_precision;
  std::optional<double> recovery_recall;
};

struct EvalReport {
  std::vector<EntityEval> entities;
  EntityEval mean;
};

/// Averages each metric over the entities that have it.
EntityEval mean_of(const std::vector<EntityEval>& rows);

}  // namespace hrqsum
