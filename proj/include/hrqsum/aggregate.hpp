#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hrqsum/codebook.hpp"

namespace hrqsum {

class Corpus;

struct TreeNode {
  Code code = 0;
  std::size_t depth = 0;
  std::size_t parent = 0;
  std::size_t count = 0;
  /// Flat sentence indices routed through this node, ascending.
  std::vector<std::size_t> members;
  std::map<Code, std::size_t> children;
};

/// Per-entity trie of encoded paths. Node 0 is the root (empty subpath);
/// prob(node) = count / number of sentences.
class PathTree {
 public:
  PathTree() = default;
  PathTree(std::string entity_id, std::span<const std::size_t> sentences,
           std::span<const Path> paths);

  const std::string& entity_id() const { return entity_id_; }
  std::size_t total() const { return nodes_.empty() ? 0 : nodes_[0].count; }
  std::size_t path_depth() const { return path_depth_; }

  std::size_t node_count() const { return nodes_.size(); }
  const TreeNode& node(std::size_t index) const { return nodes_.at(index); }
  static constexpr std::size_t root() { return 0; }

  double prob(std::size_t index) const;
  Path path_of(std::size_t index) const;
  std::optional<std::size_t> find(const Path& subpath) const;
  /// Position of the node in lexicographic path order (root first).
  std::size_t lex_rank(std::size_t index) const { return lex_rank_.at(index); }

 private:
  std::string entity_id_;
  std::size_t path_depth_ = 0;
  std::vector<TreeNode> nodes_;
  std::vector<std::size_t> lex_rank_;
};

/// `paths` is indexed by flat corpus sentence index. Throws kNotFound naming
/// the sentence when one of the entity's sentences has no path, and
/// kInvalidArgument when depths differ.
PathTree build_tree(const Corpus& corpus, std::size_t entity_index,
                    std::span<const Path> paths);

enum class SubpathKind { kGeneric, kSpecific };

struct ScoredSubpath {
  Path path;
  double score = 0.0;
  double tf = 0.0;
  double idf = 0.0;
  SubpathKind kind = SubpathKind::kGeneric;
  std::vector<std::size_t> evidence;
};

struct PruneResult {
  /// Surviving leaves as node indices.
  std::vector<std::size_t> leaves;
  /// Subpaths in the order they were removed.
  std::vector<Path> removed;
};

/// Removes the lowest-probability leaf (ties: deeper first, then the
/// lexicographically smallest path) until every leaf exceeds `threshold`.
/// A node whose children are all gone becomes a leaf; the root is never
/// removed.
PruneResult prune_tree(const PathTree& tree, double threshold);

/// Top-k surviving leaves by probability (ties lexicographic).
std::vector<ScoredSubpath> select_generic(const PathTree& tree, std::size_t k,
                                          double threshold = 0.01);

enum class ControlKind { kAspect, kRating };

/// Smoothed label distribution p(label | full path).
class ControlModel {
 public:
  ControlModel(ControlKind kind, std::vector<std::string> labels,
               double smoothing);

  ControlKind kind() const { return kind_; }
  const std::vector<std::string>& labels() const { return labels_; }
  double smoothing() const { return smoothing_; }
  std::optional<std::size_t> label_index(const std::string& label) const;

  /// Uniform for paths never seen during fitting.
  std::vector<double> distribution(const Path& full_path) const;
  const std::map<Path, std::vector<double>>& conditionals() const {
    return conditional_;
  }

  void set(const Path& full_path, std::vector<double> distribution);

 private:
  ControlKind kind_;
  std::vector<std::string> labels_;
  double smoothing_;
  std::map<Path, std::vector<double>> conditional_;
};

/// Laplace-smoothed label counts per full path. Aspect labels default to
/// every aspect seen in the corpus; ratings are always the labels "1".."5".
/// Throws kInvalidArgument when no sentence carries a label.
ControlModel fit_control(const Corpus& corpus, std::span<const Path> paths,
                         ControlKind kind, double smoothing = 1.0,
                         std::vector<std::string> aspect_labels = {});

struct ControlTarget {
  const ControlModel* model = nullptr;
  std::string label;
};

/// Number of entities whose tree contains each subpath.
class SubpathFrequencies {
 public:
  explicit SubpathFrequencies(std::span<const PathTree> trees);

  std::size_t entity_count() const { return entities_; }
  std::size_t document_frequency(const Path& subpath) const;

 private:
  friend std::vector<ScoredSubpath> select_specific(
      const SubpathFrequencies&, const PathTree&, std::size_t,
      const std::optional<ControlTarget>&);

  struct Node {
    std::size_t df = 0;
    std::map<Code, std::size_t> children;
  };
  std::size_t entities_ = 0;
  std::vector<Node> nodes_;
};

/// Scores every subpath of the entity by tf * ln(N / df), times the mean
/// control probability over member sentences when a target is given.
/// Top-k by score (ties: deeper first, then lexicographic).
std::vector<ScoredSubpath> select_specific(
    const SubpathFrequencies& frequencies, const PathTree& tree, std::size_t k,
    const std::optional<ControlTarget>& control = std::nullopt);

std::vector<ScoredSubpath> select_specific(
    std::span<const PathTree> trees, const std::string& entity_id,
    std::size_t k, const std::optional<ControlTarget>& control = std::nullopt);

}  // namespace hrqsum
