#include "hrqsum/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "hrqsum/corpus.hpp"
#include "hrqsum/error.hpp"

namespace hrqsum {

PathTree::PathTree(std::string entity_id,
                   std::span<const std::size_t> sentences,
                   std::span<const Path> paths)
    : entity_id_(std::move(entity_id)) {
  if (sentences.size() != paths.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "tree needs one path per sentence");
  }
  nodes_.emplace_back();
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const Path& path = paths[i];
    if (i == 0) {
      path_depth_ = path.depth();
    } else if (path.depth() != path_depth_) {
      throw Error(ErrorKind::kInvalidArgument,
                  "paths of entity " + entity_id_ + " differ in depth");
    }
    std::size_t at = 0;
    nodes_[at].count += 1;
    nodes_[at].members.push_back(sentences[i]);
    for (std::size_t d = 0; d < path.depth(); ++d) {
      const Code code = path[d];
      auto it = nodes_[at].children.find(code);
      std::size_t next = 0;
      if (it == nodes_[at].children.end()) {
        next = nodes_.size();
        nodes_[at].children.emplace(code, next);
        TreeNode child;
        child.code = code;
        child.depth = d + 1;
        child.parent = at;
        nodes_.push_back(std::move(child));
      } else {
        next = it->second;
      }
      at = next;
      nodes_[at].count += 1;
      nodes_[at].members.push_back(sentences[i]);
    }
  }
  for (auto& node : nodes_) std::sort(node.members.begin(), node.members.end());

  lex_rank_.assign(nodes_.size(), 0);
  std::vector<std::size_t> stack = {0};
  std::size_t rank = 0;
  while (!stack.empty()) {
    const std::size_t at = stack.back();
    stack.pop_back();
    lex_rank_[at] = rank++;
    const auto& children = nodes_[at].children;
    for (auto it = children.rbegin(); it != children.rend(); ++it) {
      stack.push_back(it->second);
    }
  }
}

double PathTree::prob(std::size_t index) const {
  const std::size_t n = total();
  return n == 0 ? 0.0 : static_cast<double>(node(index).count) / static_cast<double>(n);
}

Path PathTree::path_of(std::size_t index) const {
  std::vector<Code> codes;
  while (index != root()) {
    const TreeNode& n = node(index);
    codes.push_back(n.code);
    index = n.parent;
  }
  std::reverse(codes.begin(), codes.end());
  return Path(std::move(codes));
}

std::optional<std::size_t> PathTree::find(const Path& subpath) const {
  if (nodes_.empty()) return std::nullopt;
  std::size_t at = root();
  for (std::size_t d = 0; d < subpath.depth(); ++d) {
    const auto& children = nodes_[at].children;
    auto it = children.find(subpath[d]);
    if (it == children.end()) return std::nullopt;
    at = it->second;
  }
  return at;
}

PathTree build_tree(const Corpus& corpus, std::size_t entity_index,
                    std::span<const Path> paths) {
  const Entity& entity = corpus.entity(entity_index);
  const auto sentences = entity.sentence_indices();
  std::vector<Path> entity_paths;
  entity_paths.reserve(sentences.size());
  for (const std::size_t s : sentences) {
    if (s >= paths.size() || paths[s].empty()) {
      throw Error(ErrorKind::kNotFound,
                  "no path for sentence " + corpus.sentence_key(s));
    }
    entity_paths.push_back(paths[s]);
  }
  return PathTree(entity.entity_id, sentences, entity_paths);
}

PruneResult prune_tree(const PathTree& tree, double threshold) {
  PruneResult result;
  const std::size_t n = tree.node_count();
  if (n == 0) return result;
  std::vector<std::size_t> live_children(n, 0);
  for (std::size_t i = 0; i < n; ++i) live_children[i] = tree.node(i).children.size();

  // Ordered by (count ascending, depth descending, lexicographic path).
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>;
  auto key = [&](std::size_t i) {
    const TreeNode& node = tree.node(i);
    return Key{node.count, n - node.depth, tree.lex_rank(i), i};
  };
  std::set<Key> leaves;
  for (std::size_t i = 0; i < n; ++i) {
    if (live_children[i] == 0) leaves.insert(key(i));
  }
  while (!leaves.empty()) {
    const std::size_t lowest = std::get<3>(*leaves.begin());
    if (lowest == PathTree::root() || tree.prob(lowest) > threshold) break;
    leaves.erase(leaves.begin());
    result.removed.push_back(tree.path_of(lowest));
    const std::size_t parent = tree.node(lowest).parent;
    if (--live_children[parent] == 0) leaves.insert(key(parent));
  }
  for (const auto& k : leaves) result.leaves.push_back(std::get<3>(k));
  return result;
}

std::vector<ScoredSubpath> select_generic(const PathTree& tree, std::size_t k,
                                          double threshold) {
  auto leaves = prune_tree(tree, threshold).leaves;
  std::sort(leaves.begin(), leaves.end(), [&](std::size_t a, std::size_t b) {
    const auto ca = tree.node(a).count;
    const auto cb = tree.node(b).count;
    if (ca != cb) return ca > cb;
    return tree.lex_rank(a) < tree.lex_rank(b);
  });
  if (leaves.size() > k) leaves.resize(k);
  std::vector<ScoredSubpath> out;
  out.reserve(leaves.size());
  for (const std::size_t leaf : leaves) {
    ScoredSubpath s;
    s.path = tree.path_of(leaf);
    s.score = tree.prob(leaf);
    s.tf = static_cast<double>(tree.node(leaf).count);
    s.idf = 0.0;
    s.kind = SubpathKind::kGeneric;
    s.evidence = tree.node(leaf).members;
    out.push_back(std::move(s));
  }
  return out;
}

ControlModel::ControlModel(ControlKind kind, std::vector<std::string> labels,
                           double smoothing)
    : kind_(kind), labels_(std::move(labels)), smoothing_(smoothing) {
  if (labels_.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "control model needs labels");
  }
  if (!(smoothing_ >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "smoothing must be non-negative");
  }
}

std::optional<std::size_t> ControlModel::label_index(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

std::vector<double> ControlModel::distribution(const Path& full_path) const {
  auto it = conditional_.find(full_path);
  if (it != conditional_.end()) return it->second;
  return std::vector<double>(labels_.size(), 1.0 / static_cast<double>(labels_.size()));
}

void ControlModel::set(const Path& full_path, std::vector<double> distribution) {
  if (distribution.size() != labels_.size()) {
    throw Error(ErrorKind::kInvalidArgument, "distribution size mismatch");
  }
  const double sum = std::accumulate(distribution.begin(), distribution.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorKind::kInvalidArgument, "distribution must sum to 1");
  }
  conditional_[full_path] = std::move(distribution);
}

ControlModel fit_control(const Corpus& corpus, std::span<const Path> paths,
                         ControlKind kind, double smoothing,
                         std::vector<std::string> aspect_labels) {
  const auto& sentences = corpus.sentences();
  if (paths.size() != sentences.size()) {
    throw Error(ErrorKind::kInvalidArgument, "need one path per corpus sentence");
  }
  std::vector<std::string> labels;
  if (kind == ControlKind::kRating) {
    labels = {"1", "2", "3", "4", "5"};
  } else if (!aspect_labels.empty()) {
    labels = std::move(aspect_labels);
  } else {
    std::set<std::string> seen;
    for (const auto& s : sentences) seen.insert(s.aspects.begin(), s.aspects.end());
    labels.assign(seen.begin(), seen.end());
  }
  if (labels.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "no labelled sentences for control");
  }
  ControlModel model(kind, labels, smoothing);

  std::map<Path, std::vector<double>> counts;
  std::size_t labelled = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto& c = counts[paths[i]];
    c.resize(labels.size(), 0.0);
    bool any = false;
    if (kind == ControlKind::kRating) {
      if (sentences[i].rating) {
        c[static_cast<std::size_t>(*sentences[i].rating - 1)] += 1.0;
        any = true;
      }
    } else {
      for (const auto& aspect : sentences[i].aspects) {
        if (auto idx = model.label_index(aspect)) {
          c[*idx] += 1.0;
          any = true;
        }
      }
    }
    if (any) ++labelled;
  }
  if (labelled == 0) {
    throw Error(ErrorKind::kInvalidArgument, "no labelled sentences for control");
  }
  const double a = static_cast<double>(labels.size());
  for (auto& [path, c] : counts) {
    const double total = std::accumulate(c.begin(), c.end(), 0.0);
    std::vector<double> dist(c.size());
    if (total + smoothing * a <= 0.0) {
      std::fill(dist.begin(), dist.end(), 1.0 / a);
    } else {
      for (std::size_t j = 0; j < c.size(); ++j) {
        dist[j] = (c[j] + smoothing) / (total + smoothing * a);
      }
    }
    model.set(path, std::move(dist));
  }
  return model;
}

SubpathFrequencies::SubpathFrequencies(std::span<const PathTree> trees)
    : entities_(trees.size()) {
  nodes_.emplace_back();
  for (const PathTree& tree : trees) {
    if (tree.node_count() == 0) continue;
    // Pairs of (tree node, trie node).
    std::vector<std::pair<std::size_t, std::size_t>> stack = {{PathTree::root(), 0}};
    while (!stack.empty()) {
      const auto [at, trie] = stack.back();
      stack.pop_back();
      for (const auto& [code, child] : tree.node(at).children) {
        auto it = nodes_[trie].children.find(code);
        std::size_t next = 0;
        if (it == nodes_[trie].children.end()) {
          next = nodes_.size();
          nodes_[trie].children.emplace(code, next);
          nodes_.emplace_back();
        } else {
          next = it->second;
        }
        nodes_[next].df += 1;
        stack.emplace_back(child, next);
      }
    }
  }
}

std::size_t SubpathFrequencies::document_frequency(const Path& subpath) const {
  std::size_t at = 0;
  for (std::size_t d = 0; d < subpath.depth(); ++d) {
    auto it = nodes_[at].children.find(subpath[d]);
    if (it == nodes_[at].children.end()) return 0;
    at = it->second;
  }
  return subpath.empty() ? entities_ : nodes_[at].df;
}

std::vector<ScoredSubpath> select_specific(
    const SubpathFrequencies& frequencies, const PathTree& tree, std::size_t k,
    const std::optional<ControlTarget>& control) {
  const std::size_t n = tree.node_count();
  if (n == 0) return {};

  std::size_t label = 0;
  if (control) {
    if (control->model == nullptr) {
      throw Error(ErrorKind::kInvalidArgument, "control target lacks a model");
    }
    auto idx = control->model->label_index(control->label);
    if (!idx) {
      throw Error(ErrorKind::kInvalidArgument,
                  "unknown control label '" + control->label + "'");
    }
    label = *idx;
  }

  // Document frequency per tree node, found by walking the global trie.
  std::vector<std::size_t> df(n, 0);
  std::vector<std::size_t> trie_of(n, 0);
  std::vector<std::size_t> order;  // parents before children
  order.reserve(n);
  order.push_back(PathTree::root());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t at = order[pos];
    for (const auto& [code, child] : tree.node(at).children) {
      const auto& trie = frequencies.nodes_[trie_of[at]].children;
      auto it = trie.find(code);
      if (it == trie.end()) {
        throw Error(ErrorKind::kInvalidArgument,
                    "entity " + tree.entity_id() + " missing from frequency table");
      }
      trie_of[child] = it->second;
      df[child] = frequencies.nodes_[it->second].df;
      order.push_back(child);
    }
  }

  // Control factor: mean label probability over member sentences, summed
  // bottom-up from the full-depth nodes.
  std::vector<double> weighted(n, 0.0);
  if (control) {
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const TreeNode& node = tree.node(*it);
      if (node.children.empty() && node.depth == tree.path_depth()) {
        const double p = control->model->distribution(tree.path_of(*it))[label];
        weighted[*it] = p * static_cast<double>(node.count);
      }
      if (*it != PathTree::root()) weighted[node.parent] += weighted[*it];
    }
  }

  const double entities = static_cast<double>(frequencies.entity_count());
  std::vector<std::size_t> candidates;
  candidates.reserve(n);
  std::vector<double> scores(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const TreeNode& node = tree.node(i);
    const double tf = static_cast<double>(node.count);
    const double idf = entities / static_cast<double>(df[i]);
    double score = tf * std::log(idf);
    if (control) score *= weighted[i] / tf;
    scores[i] = score;
    candidates.push_back(i);
  }
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    const auto da = tree.node(a).depth;
    const auto db = tree.node(b).depth;
    if (da != db) return da > db;
    return tree.lex_rank(a) < tree.lex_rank(b);
  };
  const std::size_t take = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + take,
                    candidates.end(), better);
  std::vector<ScoredSubpath> out;
  out.reserve(take);
  for (std::size_t j = 0; j < take; ++j) {
    const std::size_t i = candidates[j];
    ScoredSubpath s;
    s.path = tree.path_of(i);
    s.score = scores[i];
    s.tf = static_cast<double>(tree.node(i).count);
    s.idf = entities / static_cast<double>(df[i]);
    s.kind = SubpathKind::kSpecific;
    s.evidence = tree.node(i).members;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ScoredSubpath> select_specific(
    std::span<const PathTree> trees, const std::string& entity_id,
    std::size_t k, const std::optional<ControlTarget>& control) {
  auto it = std::find_if(trees.begin(), trees.end(), [&](const PathTree& t) {
    return t.entity_id() == entity_id;
  });
  if (it == trees.end()) {
    throw Error(ErrorKind::kNotFound, "unknown entity '" + entity_id + "'");
  }
  return select_specific(SubpathFrequencies(trees), *it, k, control);
}

}  // namespace hrqsum
