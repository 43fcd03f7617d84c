#include "hrqsum/serialize.hpp"

#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>

#include "hrqsum/error.hpp"
#include "hrqsum/text.hpp"

namespace hrqsum {
namespace {

constexpr const char* kCodebookFormat = "hrqsum-codebook";
constexpr int kCodebookVersion = 1;

template <typename T>
T field(const json& value, const char* key) {
  const auto it = value.find(key);
  if (it == value.end()) {
    throw Error(ErrorKind::kFormat, std::string("missing field '") + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat,
                std::string("bad field '") + key + "': " + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json parse_line(const std::string& raw, std::size_t line_no) {
  try {
    json value = json::parse(raw);
    if (!value.is_object()) {
      throw Error(ErrorKind::kParse,
                  "line " + std::to_string(line_no) + ": expected an object");
    }
    return value;
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse,
                "line " + std::to_string(line_no) + ": " + e.what());
  }
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

const char* kind_name(SubpathKind kind) {
  return kind == SubpathKind::kGeneric ? "generic" : "specific";
}

const char* source_name(RealizationMode mode) {
  return mode == RealizationMode::kExtractive ? "extractive" : "nearest";
}

}  // namespace

json to_json(const QuantizerConfig& config) {
  return json{{"alpha_init", config.alpha_init}, {"tau0", config.tau0},
              {"tau_min", config.tau_min},       {"gamma_temp", config.gamma_temp},
              {"beta_kl", config.beta_kl},       {"beta_nl", config.beta_nl},
              {"gamma_nl", config.gamma_nl},     {"p_depth", config.p_depth},
              {"epochs", config.epochs},         {"seed", config.seed},
              {"gumbel", config.gumbel}};
}

QuantizerConfig config_from_json(const json& value) {
  QuantizerConfig c;
  c.alpha_init = field<double>(value, "alpha_init");
  c.tau0 = field<double>(value, "tau0");
  c.tau_min = field<double>(value, "tau_min");
  c.gamma_temp = field<double>(value, "gamma_temp");
  c.beta_kl = field<double>(value, "beta_kl");
  c.beta_nl = field<double>(value, "beta_nl");
  c.gamma_nl = field<double>(value, "gamma_nl");
  c.p_depth = field<double>(value, "p_depth");
  c.epochs = field<int>(value, "epochs");
  c.seed = field<std::uint64_t>(value, "seed");
  c.gumbel = field<bool>(value, "gumbel");
  return c;
}

json to_json(const Codebook& codebook) {
  json levels = json::array();
  for (std::size_t d = 0; d < codebook.levels(); ++d) {
    json level = json::array();
    for (Code q = 0; q < codebook.codebook_size(); ++q) {
      const auto c = codebook.codeword(d, q);
      level.push_back(std::vector<double>(c.begin(), c.end()));
    }
    levels.push_back(std::move(level));
  }
  return json{{"format", kCodebookFormat},
              {"version", kCodebookVersion},
              {"levels", codebook.levels()},
              {"codebook_size", codebook.codebook_size()},
              {"dim", codebook.dim()},
              {"seed", codebook.seed},
              {"config", to_json(codebook.config)},
              {"codewords", std::move(levels)}};
}

Codebook codebook_from_json(const json& value) {
  if (!value.is_object() || value.value("format", "") != kCodebookFormat) {
    throw Error(ErrorKind::kFormat, "not a codebook file");
  }
  if (field<int>(value, "version") != kCodebookVersion) {
    throw Error(ErrorKind::kFormat, "unsupported codebook version");
  }
  const auto levels = field<std::size_t>(value, "levels");
  const auto k = field<std::size_t>(value, "codebook_size");
  const auto dim = field<std::size_t>(value, "dim");
  const auto words = field<std::vector<std::vector<std::vector<double>>>>(value, "codewords");
  if (words.size() != levels) throw Error(ErrorKind::kFormat, "codeword level count mismatch");
  Codebook cb(levels, k, dim);
  for (std::size_t d = 0; d < levels; ++d) {
    if (words[d].size() != k) throw Error(ErrorKind::kFormat, "codeword count mismatch");
    for (Code q = 0; q < k; ++q) {
      if (words[d][q].size() != dim) throw Error(ErrorKind::kFormat, "codeword dim mismatch");
      std::copy(words[d][q].begin(), words[d][q].end(), cb.codeword(d, q).begin());
    }
  }
  cb.seed = field<std::uint64_t>(value, "seed");
  cb.config = config_from_json(field<json>(value, "config"));
  return cb;
}

Codebook load_codebook(const std::filesystem::path& path) {
  json value;
  try {
    value = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  }
  return codebook_from_json(value);
}

json to_json(const FitReport& report) {
  json epochs = json::array();
  for (const auto& e : report.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"recon", e.recon},
                      {"kl", e.kl},
                      {"norm_loss", e.norm_loss},
                      {"tau", e.tau}});
  }
  return json{{"epochs", std::move(epochs)},
              {"degenerate_input", report.degenerate_input},
              {"reseeded_codewords", report.reseeded_codewords},
              {"snapped_codewords", report.snapped_codewords}};
}

json to_json(const Summary& summary, const Corpus& corpus) {
  json sentences = json::array();
  for (const auto& s : summary.sentences) {
    json evidence = json::array();
    for (const std::size_t e : s.evidence) evidence.push_back(corpus.sentence_key(e));
    sentences.push_back({{"text", s.text},
                         {"sentence_id", corpus.sentence_key(s.sentence)},
                         {"subpath", s.subpath.codes()},
                         {"depth", s.subpath.depth()},
                         {"kind", kind_name(s.kind)},
                         {"score", s.score},
                         {"evidence", std::move(evidence)},
                         {"source", source_name(s.source)}});
  }
  return json{{"entity_id", summary.entity_id}, {"sentences", std::move(sentences)}};
}

json tree_to_json(const PathTree& tree) {
  std::function<json(std::size_t)> dump = [&](std::size_t index) {
    const TreeNode& node = tree.node(index);
    json children = json::array();
    for (const auto& [code, child] : node.children) children.push_back(dump(child));
    return json{{"code", index == PathTree::root() ? -1 : static_cast<long long>(node.code)},
                {"count", node.count},
                {"prob", tree.prob(index)},
                {"children", std::move(children)}};
  };
  if (tree.node_count() == 0) return json{{"code", -1}, {"count", 0}, {"prob", 0.0}, {"children", json::array()}};
  return dump(PathTree::root());
}

json to_json(const EntityEval& row) {
  return json{{"entity_id", row.entity_id},
              {"r2", optional_number(row.r2)},
              {"rl", optional_number(row.rl)},
              {"recovery_precision", optional_number(row.recovery_precision)},
              {"recovery_recall", optional_number(row.recovery_recall)}};
}

json to_json(const EvalReport& report) {
  json rows = json::array();
  for (const auto& row : report.entities) rows.push_back(to_json(row));
  return json{{"entities", std::move(rows)}, {"mean", to_json(report.mean)}};
}

std::string eval_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "entity_id,r2,rl,recovery_precision,recovery_recall\n";
  auto cell = [](const std::optional<double>& v) {
    return v ? json(*v).dump() : std::string();
  };
  auto write = [&](const EntityEval& row) {
    std::string id = row.entity_id;
    if (id.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (const char c : id) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      id = quoted + "\"";
    }
    out << id << ',' << cell(row.r2) << ',' << cell(row.rl) << ','
        << cell(row.recovery_precision) << ',' << cell(row.recovery_recall) << '\n';
  };
  for (const auto& row : report.entities) write(row);
  write(report.mean);
  return out.str();
}

std::vector<ReferenceSet> load_references(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<ReferenceSet> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (trim(raw).empty()) continue;
    const json line = parse_line(raw, line_no);
    ReferenceSet ref;
    try {
      ref.entity_id = line.at("entity_id").get<std::string>();
      ref.summaries = line.at("summaries").get<std::vector<std::string>>();
      if (auto it = line.find("aspect"); it != line.end() && !it->is_null()) {
        ref.aspect = it->get<std::string>();
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (ref.summaries.empty()) {
      throw Error(ErrorKind::kParse,
                  "line " + std::to_string(line_no) + ": no reference summaries");
    }
    out.push_back(std::move(ref));
  }
  return out;
}

std::string paths_jsonl(const Corpus& corpus, const std::vector<Path>& paths) {
  std::string out;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    out += json{{"sentence_id", corpus.sentence_key(i)}, {"path", paths[i].codes()}}.dump();
    out += '\n';
  }
  return out;
}

std::vector<Path> load_paths(const std::filesystem::path& path,
                             const Corpus& corpus) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < corpus.size(); ++i) index.emplace(corpus.sentence_key(i), i);
  std::vector<Path> out(corpus.size());
  std::istringstream in(read_file(path));
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (trim(raw).empty()) continue;
    const json line = parse_line(raw, line_no);
    std::string key;
    std::vector<Code> codes;
    try {
      key = line.at("sentence_id").get<std::string>();
      codes = line.at("path").get<std::vector<Code>>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": " + e.what());
    }
    const auto it = index.find(key);
    if (it == index.end()) {
      throw Error(ErrorKind::kNotFound,
                  "line " + std::to_string(line_no) + ": unknown sentence " + key);
    }
    out[it->second] = Path(std::move(codes));
  }
  return out;
}

}  // namespace hrqsum
