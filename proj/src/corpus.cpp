#include "hrqsum/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "hrqsum/error.hpp"
#include "hrqsum/text.hpp"

namespace hrqsum {

using nlohmann::json;

std::size_t Entity::sentence_count() const {
  std::size_t n = 0;
  for (const auto& review : reviews) n += review.sentences.size();
  return n;
}

std::vector<std::size_t> Entity::sentence_indices() const {
  std::vector<std::size_t> out;
  out.reserve(sentence_count());
  for (const auto& review : reviews) {
    out.insert(out.end(), review.sentences.begin(), review.sentences.end());
  }
  return out;
}

void Corpus::add_review(const std::string& entity_id,
                        const std::string& review_id, std::optional<int> rating,
                        const std::vector<std::string>& sentences) {
  if (rating && (*rating < 1 || *rating > 5)) {
    throw Error(ErrorKind::kInvalidArgument,
                "rating " + std::to_string(*rating) + " outside 1..5 in review " +
                    review_id);
  }
  if (!review_ids_.insert(review_id).second) {
    throw Error(ErrorKind::kInvalidArgument,
                "duplicate review_id '" + review_id + "'");
  }
  auto [it, inserted] = entity_index_.try_emplace(entity_id, entities_.size());
  if (inserted) entities_.push_back(Entity{entity_id, {}});
  const auto entity_pos = static_cast<std::uint32_t>(it->second);
  Entity& entity = entities_[it->second];

  Review review{review_id, entity_id, rating, {}};
  const auto review_pos = static_cast<std::uint32_t>(entity.reviews.size());
  std::uint32_t position = 0;
  for (const auto& raw : sentences) {
    const auto text = trim(raw);
    if (text.empty()) continue;
    review.sentences.push_back(sentences_.size());
    sentences_.push_back(Sentence{{entity_pos, review_pos, position++},
                                  std::string(text),
                                  rating,
                                  {}});
  }
  entity.reviews.push_back(std::move(review));
}

std::optional<std::size_t> Corpus::find_entity(const std::string& entity_id) const {
  const auto it = entity_index_.find(entity_id);
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

const Review& Corpus::review_of(std::size_t sentence_index) const {
  const auto& id = sentences_.at(sentence_index).id;
  return entities_[id.entity].reviews[id.review];
}

std::string Corpus::sentence_key(std::size_t index) const {
  const auto& id = sentences_.at(index).id;
  const auto& entity = entities_[id.entity];
  return entity.entity_id + "/" + entity.reviews[id.review].review_id + "/" +
         std::to_string(id.position);
}

namespace {

std::string require_string(const json& line, const char* key,
                           std::size_t line_no) {
  const auto it = line.find(key);
  if (it == line.end() || !it->is_string()) {
    throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) +
                                       ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

Corpus load_corpus(std::istream& in) {
  Corpus corpus;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (trim(raw).empty()) continue;
    json line;
    try {
      line = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::kParse,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!line.is_object()) {
      throw Error(ErrorKind::kParse,
                  "line " + std::to_string(line_no) + ": expected an object");
    }
    const auto entity_id = require_string(line, "entity_id", line_no);
    const auto review_id = require_string(line, "review_id", line_no);

    std::optional<int> rating;
    if (const auto it = line.find("rating"); it != line.end() && !it->is_null()) {
      if (!it->is_number_integer()) {
        throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) +
                                           ": rating must be an integer or null");
      }
      rating = it->get<int>();
    }

    std::vector<std::string> sentences;
    if (const auto it = line.find("sentences"); it != line.end()) {
      if (!it->is_array()) {
        throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) +
                                           ": 'sentences' must be an array");
      }
      for (const auto& s : *it) {
        if (!s.is_string()) {
          throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) +
                                             ": sentences must be strings");
        }
        sentences.push_back(s.get<std::string>());
      }
    } else if (const auto text = line.find("text");
               text != line.end() && text->is_string()) {
      sentences = segment(text->get<std::string>());
    } else {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) +
                                         ": need 'sentences' or 'text'");
    }

    try {
      corpus.add_review(entity_id, review_id, rating, sentences);
    } catch (const Error& e) {
      throw Error(e.kind(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open corpus " + path.string());
  return load_corpus(in);
}

AspectLexicon::AspectLexicon(
    std::map<std::string, std::set<std::string>> keywords) {
  for (auto& [name, words] : keywords) {
    if (words.empty()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "aspect '" + name + "' has no keywords");
    }
    std::set<std::string> lowered;
    for (const auto& word : words) {
      for (auto& token : tokenize(word)) lowered.insert(std::move(token));
    }
    keywords_.emplace(name, std::move(lowered));
  }
}

std::vector<std::string> AspectLexicon::aspect_names() const {
  std::vector<std::string> names;
  for (const auto& [name, _] : keywords_) names.push_back(name);
  return names;
}

AspectLexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open lexicon " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("lexicon: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::kParse, "lexicon: expected an object");
  std::map<std::string, std::set<std::string>> keywords;
  for (const auto& [name, words] : doc.items()) {
    if (!words.is_array()) {
      throw Error(ErrorKind::kParse, "lexicon: aspect '" + name + "' is not a list");
    }
    auto& set = keywords[name];
    for (const auto& w : words) {
      if (!w.is_string()) {
        throw Error(ErrorKind::kParse, "lexicon: keywords of '" + name + "' must be strings");
      }
      set.insert(w.get<std::string>());
    }
  }
  return AspectLexicon(std::move(keywords));
}

Corpus label_aspects(Corpus corpus, const AspectLexicon& lexicon) {
  for (auto& sentence : corpus.mutable_sentences()) {
    const auto tokens = tokenize(sentence.text);
    const std::set<std::string> token_set(tokens.begin(), tokens.end());
    sentence.aspects.clear();
    for (const auto& [aspect, words] : lexicon.keywords()) {
      const bool hit = std::any_of(words.begin(), words.end(), [&](const auto& w) {
        return token_set.count(w) > 0;
      });
      if (hit) sentence.aspects.insert(aspect);
    }
  }
  return corpus;
}

namespace {

struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> terms;  // ascending term id
  double norm = 0.0;
};

struct Posting {
  std::size_t sentence;
  double weight;
};

}  // namespace

std::vector<DenoisingPair> retrieve_denoising_pairs(const Corpus& corpus,
                                                    const RetrievalOptions& options) {
  const auto& sentences = corpus.sentences();
  const std::size_t n = sentences.size();
  if (n < 2) return {};

  std::unordered_map<std::string, std::uint32_t> vocabulary;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> counts(n);
  std::vector<std::size_t> df;
  for (std::size_t i = 0; i < n; ++i) {
    std::map<std::uint32_t, double> tf;
    for (const auto& gram : bigrams(tokenize(sentences[i].text))) {
      auto [it, inserted] =
          vocabulary.try_emplace(gram, static_cast<std::uint32_t>(vocabulary.size()));
      if (inserted) df.push_back(0);
      tf[it->second] += 1.0;
    }
    for (const auto& [term, count] : tf) {
      ++df[term];
      counts[i].emplace_back(term, count);
    }
  }

  std::vector<SparseVector> vectors(n);
  std::vector<std::vector<Posting>> postings(vocabulary.size());
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (const auto& [term, count] : counts[i]) {
      const double w = count * std::log(static_cast<double>(n) /
                                        static_cast<double>(df[term]));
      if (w == 0.0) continue;
      vectors[i].terms.emplace_back(term, w);
      postings[term].push_back({i, w});
      sq += w * w;
    }
    vectors[i].norm = std::sqrt(sq);
  }

  auto eligible = [&](std::size_t target, std::size_t source) {
    if (target == source) return false;
    const auto& a = sentences[target];
    const auto& b = sentences[source];
    if (a.id.entity == b.id.entity && a.id.review == b.id.review) return false;
    return a.rating == b.rating;
  };

  std::vector<std::vector<DenoisingPair>> per_target(n);
  auto run_target = [&](std::size_t target, std::vector<double>& acc,
                        std::vector<std::size_t>& touched) {
    const auto& vec = vectors[target];
    if (vec.norm == 0.0) return;
    for (const auto& [term, weight] : vec.terms) {
      for (const auto& posting : postings[term]) {
        if (!eligible(target, posting.sentence)) continue;
        if (acc[posting.sentence] == 0.0) touched.push_back(posting.sentence);
        acc[posting.sentence] += weight * posting.weight;
      }
    }
    auto& out = per_target[target];
    for (const std::size_t source : touched) {
      const double sim = std::min(
          1.0, acc[source] / (vec.norm * vectors[source].norm));
      if (sim >= options.min_similarity) out.push_back({target, source, sim});
      acc[source] = 0.0;
    }
    touched.clear();
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
      if (x.similarity != y.similarity) return x.similarity > y.similarity;
      return x.source < y.source;
    });
    if (out.size() > options.top_k) out.resize(options.top_k);
  };

  if (options.backend == Backend::kSerial) {
    std::vector<double> acc(n, 0.0);
    std::vector<std::size_t> touched;
    for (std::size_t t = 0; t < n; ++t) run_target(t, acc, touched);
  } else {
#pragma omp parallel
    {
      std::vector<double> acc(n, 0.0);
      std::vector<std::size_t> touched;
#pragma omp for schedule(dynamic, 16)
      for (std::size_t t = 0; t < n; ++t) run_target(t, acc, touched);
    }
  }

  std::vector<DenoisingPair> pairs;
  for (auto& list : per_target) pairs.insert(pairs.end(), list.begin(), list.end());
  return pairs;
}

}  // namespace hrqsum
