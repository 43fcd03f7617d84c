#include "hrqsum/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "hrqsum/codebook.hpp"
#include "hrqsum/error.hpp"
#include "hrqsum/rouge.hpp"
#include "hrqsum/text.hpp"

namespace hrqsum {
namespace {

const Entity& checked_entity(const Corpus& corpus, std::size_t entity_index) {
  if (entity_index >= corpus.entities().size()) {
    throw Error(ErrorKind::kNotFound,
                "entity index " + std::to_string(entity_index) + " out of range");
  }
  const Entity& entity = corpus.entity(entity_index);
  if (entity.reviews.empty()) {
    throw Error(ErrorKind::kInvalidArgument,
                "entity " + entity.entity_id + " has no reviews");
  }
  return entity;
}

Summary review_summary(const Corpus& corpus, const Entity& entity,
                       const Review& review) {
  Summary summary;
  summary.entity_id = entity.entity_id;
  for (const std::size_t s : review.sentences) {
    SummarySentence out;
    out.text = corpus.sentences()[s].text;
    out.sentence = s;
    out.evidence = {s};
    summary.sentences.push_back(std::move(out));
  }
  return summary;
}

double squared_distance(std::span<const float> a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j) {
    const double diff = static_cast<double>(a[j]) - b[j];
    sum += diff * diff;
  }
  return sum;
}

}  // namespace

Summary baseline_random(const Corpus& corpus, std::size_t entity_index,
                        std::uint64_t seed) {
  const Entity& entity = checked_entity(corpus, entity_index);
  std::mt19937_64 rng(mix_seed(seed, entity_index));
  std::uniform_int_distribution<std::size_t> pick(0, entity.reviews.size() - 1);
  return review_summary(corpus, entity, entity.reviews[pick(rng)]);
}

Summary baseline_centroid(const Corpus& corpus, std::size_t entity_index) {
  const Entity& entity = checked_entity(corpus, entity_index);
  const std::size_t n = entity.reviews.size();
  std::vector<std::vector<std::string>> tokens(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (const std::size_t s : entity.reviews[r].sentences) {
      auto t = tokenize(corpus.sentences()[s].text);
      tokens[r].insert(tokens[r].end(), t.begin(), t.end());
    }
  }
  std::vector<double> total(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double f = rouge2_f1(tokens[i], tokens[j]);
      total[i] += f;
      total[j] += f;
    }
  }
  const auto best = static_cast<std::size_t>(
      std::max_element(total.begin(), total.end()) - total.begin());
  return review_summary(corpus, entity, entity.reviews[best]);
}

KMeansBaseline baseline_flat_kmeans(const Corpus& corpus,
                                    std::size_t entity_index,
                                    const EmbeddingMatrix& embeddings,
                                    std::size_t k, std::uint64_t seed) {
  const Entity& entity = checked_entity(corpus, entity_index);
  if (k == 0) throw Error(ErrorKind::kInvalidArgument, "k must be >= 1");
  if (embeddings.rows() != corpus.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "embedding rows do not match corpus sentences");
  }
  const auto members = entity.sentence_indices();
  const std::size_t n = members.size();
  const std::size_t dim = embeddings.dim();
  KMeansBaseline result;
  result.reduced = n < k;
  result.clusters = std::min(n, k);
  const std::size_t clusters = result.clusters;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(mix_seed(seed, entity_index, 0x6b6d65616e73ULL));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<double>> centers(clusters);
  for (std::size_t c = 0; c < clusters; ++c) {
    const auto row = embeddings.row(members[order[c]]);
    centers[c].assign(row.begin(), row.end());
  }

  std::vector<std::size_t> assign(n, std::numeric_limits<std::size_t>::max());
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = embeddings.row(members[i]);
      std::size_t best = 0;
      double best_dist = squared_distance(row, centers[0]);
      for (std::size_t c = 1; c < clusters; ++c) {
        const double d = squared_distance(row, centers[c]);
        if (d < best_dist) {
          best_dist = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<std::vector<double>> sums(clusters, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> sizes(clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = embeddings.row(members[i]);
      for (std::size_t j = 0; j < dim; ++j) sums[assign[i]][j] += row[j];
      ++sizes[assign[i]];
    }
    for (std::size_t c = 0; c < clusters; ++c) {
      if (sizes[c] == 0) continue;
      for (std::size_t j = 0; j < dim; ++j) {
        centers[c][j] = sums[c][j] / static_cast<double>(sizes[c]);
      }
    }
  }

  std::vector<std::vector<std::size_t>> groups(clusters);
  for (std::size_t i = 0; i < n; ++i) groups[assign[i]].push_back(members[i]);
  std::vector<std::size_t> by_size(clusters);
  std::iota(by_size.begin(), by_size.end(), 0);
  std::stable_sort(by_size.begin(), by_size.end(), [&](std::size_t a, std::size_t b) {
    return groups[a].size() > groups[b].size();
  });

  result.summary.entity_id = entity.entity_id;
  for (const std::size_t c : by_size) {
    if (groups[c].empty()) continue;
    std::vector<double> mean(dim, 0.0);
    for (const std::size_t s : groups[c]) {
      const auto row = embeddings.row(s);
      for (std::size_t j = 0; j < dim; ++j) mean[j] += row[j];
    }
    for (auto& v : mean) v /= static_cast<double>(groups[c].size());
    std::size_t best = groups[c].front();
    double best_dist = squared_distance(embeddings.row(best), mean);
    for (const std::size_t s : groups[c]) {
      const double d = squared_distance(embeddings.row(s), mean);
      if (d < best_dist) {
        best_dist = d;
        best = s;
      }
    }
    SummarySentence out;
    out.text = corpus.sentences()[best].text;
    out.sentence = best;
    out.score = static_cast<double>(groups[c].size()) / static_cast<double>(n);
    out.evidence = groups[c];
    result.summary.sentences.push_back(std::move(out));
  }
  return result;
}

PlantedBenchmark generate_planted(const PlantedConfig& config) {
  if (config.entities == 0 || config.opinions == 0 || config.dim == 0 ||
      config.sentences_per_review == 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "planted config needs entities, opinions, dim and review size >= 1");
  }
  if (!(config.noise_sigma >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "noise_sigma must be non-negative");
  }
  if (!config.frequencies.empty() && config.frequencies.size() != config.entities) {
    throw Error(ErrorKind::kInvalidArgument, "need one frequency vector per entity");
  }

  PlantedBenchmark out;
  out.config = config;
  std::mt19937_64 rng(mix_seed(config.seed, 0x706c616e74ULL));
  std::normal_distribution<double> normal(0.0, 1.0);

  const double min_distance = config.min_separation_sigmas * config.noise_sigma;
  const std::size_t max_attempts = 10000;
  for (std::size_t attempt = 0;; ++attempt) {
    if (attempt == max_attempts) {
      throw Error(ErrorKind::kInvalidArgument,
                  "cannot place centroids with the requested separation");
    }
    out.centroids.assign(config.opinions, std::vector<double>(config.dim));
    for (auto& c : out.centroids) {
      double sq = 0.0;
      do {
        sq = 0.0;
        for (auto& v : c) {
          v = normal(rng);
          sq += v * v;
        }
      } while (sq == 0.0);
      for (auto& v : c) v /= std::sqrt(sq);
    }
    bool separated = true;
    for (std::size_t a = 0; a < config.opinions && separated; ++a) {
      for (std::size_t b = 0; b < a; ++b) {
        double sq = 0.0;
        for (std::size_t j = 0; j < config.dim; ++j) {
          const double diff = out.centroids[a][j] - out.centroids[b][j];
          sq += diff * diff;
        }
        if (std::sqrt(sq) < min_distance) {
          separated = false;
          break;
        }
      }
    }
    if (separated) break;
  }

  for (std::size_t e = 0; e < config.entities; ++e) {
    std::vector<double> f(config.opinions, 0.0);
    if (!config.frequencies.empty()) {
      f = config.frequencies[e];
      if (f.size() != config.opinions) {
        throw Error(ErrorKind::kInvalidArgument,
                    "frequency vector length must equal the opinion count");
      }
    } else {
      std::vector<std::size_t> ranking(config.opinions);
      std::iota(ranking.begin(), ranking.end(), 0);
      std::shuffle(ranking.begin(), ranking.end(), rng);
      double weight = 1.0;
      for (const std::size_t o : ranking) {
        f[o] = weight;
        weight *= config.decay;
      }
    }
    const double total = std::accumulate(f.begin(), f.end(), 0.0);
    if (!(total > 0.0) || std::any_of(f.begin(), f.end(), [](double v) { return v < 0.0; })) {
      throw Error(ErrorKind::kInvalidArgument,
                  "opinion frequencies must be non-negative with positive sum");
    }
    for (auto& v : f) v /= total;
    out.frequencies.push_back(f);
  }

  const std::size_t n = config.entities * config.sentences_per_entity;
  std::vector<float> data;
  data.reserve(n * config.dim);
  for (std::size_t e = 0; e < config.entities; ++e) {
    std::discrete_distribution<std::size_t> draw(out.frequencies[e].begin(),
                                                 out.frequencies[e].end());
    const std::string entity_id = "entity" + std::to_string(e);
    std::vector<std::string> texts;
    std::size_t review = 0;
    auto flush = [&]() {
      if (texts.empty()) return;
      out.corpus.add_review(entity_id,
                            entity_id + "-r" + std::to_string(review++),
                            std::nullopt, texts);
      texts.clear();
    };
    for (std::size_t i = 0; i < config.sentences_per_entity; ++i) {
      const std::size_t o = draw(rng);
      out.opinion.push_back(o);
      for (std::size_t j = 0; j < config.dim; ++j) {
        data.push_back(static_cast<float>(out.centroids[o][j] +
                                          config.noise_sigma * normal(rng)));
      }
      texts.push_back("entity " + std::to_string(e) + " opinion " +
                      std::to_string(o) + " sentence " + std::to_string(i));
      if (texts.size() == config.sentences_per_review) flush();
    }
    flush();
  }
  out.embeddings = EmbeddingMatrix(n, config.dim, std::move(data));
  return out;
}

std::vector<std::size_t> top_opinions(const std::vector<std::size_t>& opinion,
                                      const std::vector<std::size_t>& entity_sentences,
                                      std::size_t top_m) {
  std::map<std::size_t, std::size_t> counts;
  for (const std::size_t s : entity_sentences) ++counts[opinion.at(s)];
  std::vector<std::pair<std::size_t, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ranked.size() && i < top_m; ++i) {
    out.push_back(ranked[i].first);
  }
  return out;
}

Recovery score_recovery(const Summary& summary,
                        const std::vector<std::size_t>& opinion,
                        const std::vector<std::size_t>& entity_sentences,
                        std::size_t top_m) {
  const auto top = top_opinions(opinion, entity_sentences, top_m);
  Recovery r;
  if (summary.sentences.empty() || top.empty()) return r;
  std::size_t hits = 0;
  std::vector<bool> covered(top.size(), false);
  for (const auto& s : summary.sentences) {
    std::map<std::size_t, std::size_t> votes;
    if (s.evidence.empty()) {
      ++votes[opinion.at(s.sentence)];
    } else {
      for (const std::size_t e : s.evidence) ++votes[opinion.at(e)];
    }
    std::size_t majority = votes.begin()->first;
    std::size_t best = 0;
    for (const auto& [o, c] : votes) {
      if (c > best) {
        best = c;
        majority = o;
      }
    }
    auto it = std::find(top.begin(), top.end(), majority);
    if (it != top.end()) {
      ++hits;
      covered[static_cast<std::size_t>(it - top.begin())] = true;
    }
  }
  r.precision = static_cast<double>(hits) / static_cast<double>(summary.sentences.size());
  r.recall = static_cast<double>(std::count(covered.begin(), covered.end(), true)) /
             static_cast<double>(top.size());
  return r;
}

EntityEval mean_of(const std::vector<EntityEval>& rows) {
  EntityEval mean;
  mean.entity_id = "mean";
  auto average = [&](auto member) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& row : rows) {
      if (const auto& v = row.*member) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  mean.r2 = average(&EntityEval::r2);
  mean.rl = average(&EntityEval::rl);
  mean.recovery_precision = average(&EntityEval::recovery_precision);
  mean.recovery_recall = average(&EntityEval::recovery_recall);
  return mean;
}

}  // namespace hrqsum
