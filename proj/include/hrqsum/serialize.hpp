#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hrqsum/aggregate.hpp"
#include "hrqsum/codebook.hpp"
#include "hrqsum/corpus.hpp"
#include "hrqsum/eval.hpp"
#include "hrqsum/fit.hpp"
#include "hrqsum/summarize.hpp"

namespace hrqsum {

using nlohmann::json;

json to_json(const QuantizerConfig& config);
QuantizerConfig config_from_json(const json& value);

json to_json(const Codebook& codebook);
Codebook codebook_from_json(const json& value);
Codebook load_codebook(const std::filesystem::path& path);

json to_json(const FitReport& report);

/// {"entity_id", "sentences": [{"text", "subpath", "depth", "kind", "score",
/// "evidence", "source"}]} with evidence as sentence keys.
json to_json(const Summary& summary, const Corpus& corpus);

/// Nested {"code", "count", "prob", "children"} starting at the root (whose
/// code is -1).
json tree_to_json(const PathTree& tree);

json to_json(const EntityEval& row);
json to_json(const EvalReport& report);
std::string eval_csv(const EvalReport& report);

struct ReferenceSet {
  std::string entity_id;
  std::vector<std::string> summaries;
  std::string aspect;  // empty for general references
};

/// Reference JSONL: {"entity_id", "summaries": [str], "aspect": str|null}.
std::vector<ReferenceSet> load_references(const std::filesystem::path& path);

/// Paths JSONL: {"sentence_id": key, "path": [int]}.
std::string paths_jsonl(const Corpus& corpus, const std::vector<Path>& paths);
std::vector<Path> load_paths(const std::filesystem::path& path,
                             const Corpus& corpus);

}  // namespace hrqsum
