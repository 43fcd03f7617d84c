#include "hrqsum/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "hrqsum/aggregate.hpp"
#include "hrqsum/backend.hpp"
#include "hrqsum/corpus.hpp"
#include "hrqsum/embedding.hpp"
#include "hrqsum/error.hpp"
#include "hrqsum/eval.hpp"
#include "hrqsum/fit.hpp"
#include "hrqsum/kernels.hpp"
#include "hrqsum/rouge.hpp"
#include "hrqsum/serialize.hpp"
#include "hrqsum/summarize.hpp"

namespace hrqsum::cli {
namespace fs = std::filesystem;

namespace {

std::shared_ptr<spdlog::logger> logger() {
  if (auto existing = spdlog::get("hrqsum")) return existing;
  auto log = spdlog::stderr_color_mt("hrqsum");
  log->set_pattern("[%l] %v");
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("HRQ_LOG")) level = spdlog::level::from_str(env);
  log->set_level(level);
  return log;
}

struct Options {
  std::string corpus;
  std::string embeddings;
  std::string codebook;
  std::string lexicon;
  std::string references;
  std::string truth;
  std::string entity;
  std::string config;
  std::string out = ".";
  std::size_t dim = 128;
  std::size_t levels = 12;
  std::size_t codebook_size = 12;
  int epochs = QuantizerConfig{}.epochs;
  std::uint64_t seed = 0;
  bool no_gumbel = false;
  double p_depth = QuantizerConfig{}.p_depth;
  std::size_t generic_k = 5;
  std::size_t specific_k = 5;
  double threshold = 0.01;
  std::string mode = "extractive";
  std::string aspect;
  int rating = 0;
  int threads = 0;
  std::string baseline = "none";
  std::size_t top_m = 5;
  std::size_t top_k = RetrievalOptions{}.top_k;
  double min_similarity = RetrievalOptions{}.min_similarity;
  // bench
  std::size_t bench_levels = 4;
  std::size_t bench_codebook_size = 8;
  std::size_t bench_dim = 32;
  std::size_t entities = 20;
  std::size_t sentences = 500;
  std::size_t opinions = 10;
  double noise = 0.05;
  std::size_t runs = 1;
};

// Files are written next to their destination under a temporary name and
// renamed only once the whole command has succeeded.
class Outputs {
 public:
  explicit Outputs(const fs::path& dir) : dir_(dir) {
    if (!fs::exists(dir_)) {
      fs::create_directories(dir_);
      created_dir_ = true;
    }
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path tmp = dir_ / ("." + name + ".partial");
    staged_.emplace_back(tmp, dir_ / name);
    std::ofstream out(tmp, std::ios::binary);
    out << content;
    if (!out.flush()) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
  }

  template <typename Writer>
  void write_with(const std::string& name, Writer&& writer) {
    const fs::path tmp = dir_ / ("." + name + ".partial");
    staged_.emplace_back(tmp, dir_ / name);
    writer(tmp);
  }

  void commit() {
    std::vector<fs::path> done;
    try {
      for (const auto& [tmp, final_path] : staged_) {
        fs::rename(tmp, final_path);
        done.push_back(final_path);
      }
    } catch (...) {
      std::error_code ec;
      for (const auto& p : done) fs::remove(p, ec);
      discard();
      throw;
    }
    staged_.clear();
  }

  void discard() noexcept {
    std::error_code ec;
    for (const auto& [tmp, final_path] : staged_) fs::remove(tmp, ec);
    staged_.clear();
    if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [tmp, final_path] : staged_) out.push_back(final_path.string());
    return out;
  }

 private:
  fs::path dir_;
  bool created_dir_ = false;
  std::vector<std::pair<fs::path, fs::path>> staged_;
};

std::string number(double v) { return json(v).dump(); }

Corpus load_inputs(const Options& o) {
  if (o.corpus.empty()) throw Error(ErrorKind::kInvalidArgument, "--corpus is required");
  Corpus corpus = load_corpus(fs::path(o.corpus));
  if (!o.lexicon.empty()) corpus = label_aspects(std::move(corpus), load_lexicon(o.lexicon));
  logger()->info("corpus: {} entities, {} sentences", corpus.entities().size(), corpus.size());
  return corpus;
}

EmbeddingMatrix embeddings_for(const Options& o, const Corpus& corpus) {
  if (o.embeddings.empty()) {
    logger()->info("built-in embedder, dim {}", o.dim);
    return embed_builtin(corpus, o.dim, o.seed);
  }
  EmbeddingMatrix emb = load_embeddings(fs::path(o.embeddings));
  if (emb.rows() != corpus.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "embeddings have " + std::to_string(emb.rows()) + " rows, corpus has " +
                    std::to_string(corpus.size()) + " sentences");
  }
  return emb;
}

QuantizerConfig quantizer_config(const Options& o) {
  QuantizerConfig c;
  c.epochs = o.epochs;
  c.seed = o.seed;
  c.gumbel = !o.no_gumbel;
  c.p_depth = o.p_depth;
  c.validate();
  return c;
}

Codebook codebook_for(const Options& o, const EmbeddingMatrix& emb) {
  if (o.codebook.empty()) throw Error(ErrorKind::kInvalidArgument, "--codebook is required");
  Codebook cb = load_codebook(o.codebook);
  if (cb.dim() != emb.dim()) {
    throw Error(ErrorKind::kInvalidArgument,
                "codebook dim " + std::to_string(cb.dim()) + " differs from embedding dim " +
                    std::to_string(emb.dim()));
  }
  return cb;
}

RealizationMode parse_mode(const std::string& mode) {
  if (mode == "extractive") return RealizationMode::kExtractive;
  if (mode == "nearest") return RealizationMode::kNearest;
  throw Error(ErrorKind::kInvalidArgument, "unknown --mode '" + mode + "'");
}

struct Pipeline {
  Corpus corpus;
  EmbeddingMatrix embeddings;
  Codebook codebook;
  std::vector<Path> paths;
  std::vector<PathTree> trees;
};

Pipeline encode_pipeline(const Options& o) {
  Pipeline p;
  p.corpus = load_inputs(o);
  p.embeddings = embeddings_for(o, p.corpus);
  p.codebook = codebook_for(o, p.embeddings);
  p.paths = kernels::encode_all(p.embeddings, p.codebook, p.codebook.levels(),
                                Backend::kParallel);
  for (std::size_t e = 0; e < p.corpus.entities().size(); ++e) {
    p.trees.push_back(build_tree(p.corpus, e, p.paths));
  }
  return p;
}

std::vector<std::size_t> selected_entities(const Options& o, const Corpus& corpus) {
  std::vector<std::size_t> out;
  if (!o.entity.empty()) {
    const auto idx = corpus.find_entity(o.entity);
    if (!idx) throw Error(ErrorKind::kNotFound, "unknown entity '" + o.entity + "'");
    out.push_back(*idx);
  } else {
    for (std::size_t e = 0; e < corpus.entities().size(); ++e) out.push_back(e);
  }
  return out;
}

std::vector<Summary> summarize_all(const Options& o, const Pipeline& p,
                                   const std::vector<std::size_t>& entities) {
  if (o.generic_k + o.specific_k < 1) {
    throw Error(ErrorKind::kInvalidArgument, "--generic-k + --specific-k must be >= 1");
  }
  const RealizationMode mode = parse_mode(o.mode);
  if (!o.aspect.empty() && o.rating != 0) {
    throw Error(ErrorKind::kInvalidArgument, "--aspect and --rating are exclusive");
  }
  std::optional<ControlModel> model;
  std::optional<ControlTarget> control;
  if (!o.aspect.empty()) {
    if (o.lexicon.empty()) throw Error(ErrorKind::kInvalidArgument, "--aspect needs --lexicon");
    model.emplace(fit_control(p.corpus, p.paths, ControlKind::kAspect, 1.0,
                              load_lexicon(o.lexicon).aspect_names()));
    control = ControlTarget{&*model, o.aspect};
  } else if (o.rating != 0) {
    if (o.rating < 1 || o.rating > 5) {
      throw Error(ErrorKind::kInvalidArgument, "--rating must lie in 1..5");
    }
    model.emplace(fit_control(p.corpus, p.paths, ControlKind::kRating));
    control = ControlTarget{&*model, std::to_string(o.rating)};
  }

  const SubpathFrequencies freqs(p.trees);
  std::vector<Summary> out(entities.size());
  std::vector<std::string> failures(entities.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < entities.size(); ++i) {
    try {
      const PathTree& tree = p.trees[entities[i]];
      const auto generic = o.generic_k > 0 ? select_generic(tree, o.generic_k, o.threshold)
                                           : std::vector<ScoredSubpath>{};
      const auto specific = o.specific_k > 0
                                ? select_specific(freqs, tree, o.specific_k, control)
                                : std::vector<ScoredSubpath>{};
      const SummaryInputs inputs{&p.corpus, &tree, &p.codebook, &p.embeddings};
      out[i] = assemble(inputs, generic, specific, mode);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  }
  for (const auto& f : failures) {
    if (!f.empty()) throw Error(ErrorKind::kInvalidArgument, f);
  }
  return out;
}

std::string summaries_jsonl(const std::vector<Summary>& summaries, const Corpus& corpus) {
  std::string out;
  for (const auto& s : summaries) out += to_json(s, corpus).dump() + "\n";
  return out;
}

std::vector<std::size_t> load_truth(const fs::path& path, const Corpus& corpus) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < corpus.size(); ++i) index.emplace(corpus.sentence_key(i), i);
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::optional<std::size_t>> found(corpus.size());
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string key;
    std::size_t opinion = 0;
    try {
      const json line = json::parse(raw);
      key = line.at("sentence_id").get<std::string>();
      opinion = line.at("opinion").get<std::size_t>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kParse, "truth line " + std::to_string(line_no) + ": " + e.what());
    }
    const auto it = index.find(key);
    if (it == index.end()) throw Error(ErrorKind::kNotFound, "truth: unknown sentence " + key);
    found[it->second] = opinion;
  }
  std::vector<std::size_t> out(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!found[i]) {
      throw Error(ErrorKind::kNotFound, "truth: no opinion for " + corpus.sentence_key(i));
    }
    out[i] = *found[i];
  }
  return out;
}

void cmd_embed(const Options& o, Outputs& out) {
  const Corpus corpus = load_inputs(o);
  const EmbeddingMatrix emb = embed_builtin(corpus, o.dim, o.seed);
  out.write_with("embeddings.hrqe", [&](const fs::path& p) { save_embeddings(emb, p); });
}

void cmd_fit(const Options& o, Outputs& out) {
  const Corpus corpus = load_inputs(o);
  const EmbeddingMatrix emb = embeddings_for(o, corpus);
  const FitResult result = fit(emb, o.levels, o.codebook_size, quantizer_config(o));
  if (result.report.degenerate_input) logger()->warn("all embeddings are identical");
  if (!result.report.epochs.empty()) {
    logger()->info("final reconstruction {}", result.report.epochs.back().recon);
  }
  out.write("codebook.json", to_json(result.codebook).dump() + "\n");
  out.write("fit_report.json", to_json(result.report).dump(2) + "\n");
}

void cmd_encode(const Options& o, Outputs& out) {
  const Corpus corpus = load_inputs(o);
  const EmbeddingMatrix emb = embeddings_for(o, corpus);
  const Codebook cb = codebook_for(o, emb);
  const auto paths = kernels::encode_all(emb, cb, cb.levels(), Backend::kParallel);
  out.write("paths.jsonl", paths_jsonl(corpus, paths));
}

void cmd_summarize(const Options& o, Outputs& out) {
  const Pipeline p = encode_pipeline(o);
  const auto summaries = summarize_all(o, p, selected_entities(o, p.corpus));
  out.write("summaries.jsonl", summaries_jsonl(summaries, p.corpus));
}

void cmd_eval(const Options& o, Outputs& out) {
  if (o.references.empty() && o.truth.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "eval needs --references and/or --truth");
  }
  const bool needs_codebook = o.baseline == "none";
  Pipeline p;
  if (needs_codebook) {
    p = encode_pipeline(o);
  } else {
    p.corpus = load_inputs(o);
    if (o.baseline == "kmeans") p.embeddings = embeddings_for(o, p.corpus);
  }
  const auto entities = selected_entities(o, p.corpus);
  std::vector<Summary> summaries;
  if (o.baseline == "none") {
    summaries = summarize_all(o, p, entities);
  } else {
    for (const std::size_t e : entities) {
      if (o.baseline == "random") {
        summaries.push_back(baseline_random(p.corpus, e, o.seed));
      } else if (o.baseline == "centroid") {
        summaries.push_back(baseline_centroid(p.corpus, e));
      } else if (o.baseline == "kmeans") {
        auto km = baseline_flat_kmeans(p.corpus, e, p.embeddings,
                                       std::max<std::size_t>(1, o.generic_k + o.specific_k),
                                       o.seed);
        if (km.reduced) {
          logger()->warn("entity {}: k reduced to {}", p.corpus.entity(e).entity_id,
                         km.clusters);
        }
        summaries.push_back(std::move(km.summary));
      } else {
        throw Error(ErrorKind::kInvalidArgument, "unknown --baseline '" + o.baseline + "'");
      }
    }
  }

  std::map<std::string, std::vector<std::string>> refs;
  if (!o.references.empty()) {
    for (auto& r : load_references(o.references)) {
      if (r.aspect != o.aspect) continue;
      auto& list = refs[r.entity_id];
      list.insert(list.end(), r.summaries.begin(), r.summaries.end());
    }
  }
  std::vector<std::size_t> truth;
  if (!o.truth.empty()) truth = load_truth(o.truth, p.corpus);

  EvalReport report;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    const Summary& s = summaries[i];
    EntityEval row;
    row.entity_id = s.entity_id;
    if (auto it = refs.find(s.entity_id); it != refs.end()) {
      std::string text;
      for (const auto& sentence : s.sentences) text += (text.empty() ? "" : " ") + sentence.text;
      const RougeScore r = rouge(text, it->second);
      row.r2 = r.r2_f1;
      row.rl = r.rl_f1;
    }
    if (!truth.empty()) {
      const Recovery rec =
          score_recovery(s, truth, p.corpus.entity(entities[i]).sentence_indices(), o.top_m);
      row.recovery_precision = rec.precision;
      row.recovery_recall = rec.recall;
    }
    report.entities.push_back(std::move(row));
  }
  report.mean = mean_of(report.entities);
  out.write("eval.json", to_json(report).dump(2) + "\n");
  out.write("eval.csv", eval_csv(report));
}

void cmd_inspect(const Options& o, Outputs& out) {
  const Pipeline p = encode_pipeline(o);
  json trees = json::array();
  for (const std::size_t e : selected_entities(o, p.corpus)) {
    trees.push_back({{"entity_id", p.trees[e].entity_id()}, {"tree", tree_to_json(p.trees[e])}});
  }
  out.write("trees.json", trees.dump(2) + "\n");

  const std::size_t dim = p.embeddings.dim();
  std::mt19937_64 rng(mix_seed(o.seed, 0x70726f6aULL));
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  std::vector<double> axes(2 * dim);
  for (auto& v : axes) v = normal(rng);
  std::ostringstream csv;
  csv << "sentence_id,entity_id,x,y,path\n";
  for (std::size_t i = 0; i < p.corpus.size(); ++i) {
    const auto row = p.embeddings.row(i);
    double x = 0.0;
    double y = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      x += axes[j] * row[j];
      y += axes[dim + j] * row[j];
    }
    std::string path;
    for (const Code c : p.paths[i].codes()) path += (path.empty() ? "" : "-") + std::to_string(c);
    const auto& sentence = p.corpus.sentences()[i];
    json key = p.corpus.sentence_key(i);
    json entity = p.corpus.entity(sentence.id.entity).entity_id;
    csv << key.dump() << ',' << entity.dump() << ',' << number(x) << ',' << number(y) << ','
        << path << '\n';
  }
  out.write("projection.csv", csv.str());
}

void cmd_pairs(const Options& o, Outputs& out) {
  const Corpus corpus = load_inputs(o);
  RetrievalOptions options;
  options.top_k = o.top_k;
  options.min_similarity = o.min_similarity;
  std::string lines;
  for (const auto& pair : retrieve_denoising_pairs(corpus, options)) {
    lines += json{{"target", corpus.sentence_key(pair.target)},
                  {"source", corpus.sentence_key(pair.source)},
                  {"similarity", pair.similarity}}
                 .dump() +
             "\n";
  }
  out.write("pairs.jsonl", lines);
}

void cmd_bench(const Options& o, Outputs& out) {
  if (o.runs < 1) throw Error(ErrorKind::kInvalidArgument, "--runs must be >= 1");
  json runs = json::array();
  double precision = 0.0;
  double recall = 0.0;
  for (std::size_t r = 0; r < o.runs; ++r) {
    PlantedConfig pc;
    pc.entities = o.entities;
    pc.sentences_per_entity = o.sentences;
    pc.opinions = o.opinions;
    pc.dim = o.bench_dim;
    pc.noise_sigma = o.noise;
    pc.seed = o.seed + r;
    const PlantedBenchmark bench = generate_planted(pc);
    QuantizerConfig qc = quantizer_config(o);
    qc.seed = pc.seed;
    const FitResult fitted = fit(bench.embeddings, o.bench_levels, o.bench_codebook_size, qc);
    const auto paths = kernels::encode_all(bench.embeddings, fitted.codebook,
                                           o.bench_levels, Backend::kParallel);
    double p_sum = 0.0;
    double r_sum = 0.0;
    for (std::size_t e = 0; e < bench.corpus.entities().size(); ++e) {
      const PathTree tree = build_tree(bench.corpus, e, paths);
      const auto generic = select_generic(tree, o.generic_k, o.threshold);
      const Summary s = assemble({&bench.corpus, &tree, nullptr, nullptr}, generic, {},
                                 RealizationMode::kExtractive);
      const Recovery rec = score_recovery(s, bench.opinion,
                                          bench.corpus.entity(e).sentence_indices(), o.top_m);
      p_sum += rec.precision;
      r_sum += rec.recall;
    }
    const double n = static_cast<double>(bench.corpus.entities().size());
    runs.push_back({{"seed", pc.seed},
                    {"precision", p_sum / n},
                    {"recall", r_sum / n},
                    {"final_recon", fitted.report.epochs.empty()
                                        ? json(nullptr)
                                        : json(fitted.report.epochs.back().recon)}});
    precision += p_sum / n;
    recall += r_sum / n;
    logger()->info("bench seed {}: precision {} recall {}", pc.seed, p_sum / n, r_sum / n);
  }
  const json report = {
      {"entities", o.entities},         {"sentences_per_entity", o.sentences},
      {"opinions", o.opinions},         {"dim", o.bench_dim},
      {"noise_sigma", o.noise},         {"levels", o.bench_levels},
      {"codebook_size", o.bench_codebook_size},
      {"generic_k", o.generic_k},       {"top_m", o.top_m},
      {"runs", std::move(runs)},
      {"mean", {{"precision", precision / static_cast<double>(o.runs)},
                {"recall", recall / static_cast<double>(o.runs)}}}};
  out.write("bench.json", report.dump(2) + "\n");
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "Read key=value option defaults from FILE (flags win)");
  sub->add_option("--out", o.out, "Output directory");
  sub->add_option("--threads", o.threads, "Worker threads (0 = runtime default)")
      ->check(CLI::NonNegativeNumber);
}

void add_corpus(CLI::App* sub, Options& o) {
  sub->add_option("--corpus", o.corpus, "Review JSONL")->check(CLI::ExistingFile);
  sub->add_option("--lexicon", o.lexicon, "Aspect keyword JSON")->check(CLI::ExistingFile);
}

void add_embeddings(CLI::App* sub, Options& o) {
  sub->add_option("--embeddings", o.embeddings, "HRQE embeddings (default: built-in embedder)")
      ->check(CLI::ExistingFile);
  sub->add_option("--dim", o.dim, "Built-in embedder dimension")->check(CLI::Range(2, 1 << 16));
  sub->add_option("--seed", o.seed, "Random seed");
}

void add_quantizer(CLI::App* sub, Options& o, std::size_t& levels, std::size_t& k) {
  sub->add_option("--levels", levels, "Codebook levels D")->check(CLI::PositiveNumber);
  sub->add_option("--codebook-size", k, "Codewords per level K")->check(CLI::PositiveNumber);
  sub->add_option("--epochs", o.epochs, "Training epochs")->check(CLI::NonNegativeNumber);
  sub->add_flag("--no-gumbel", o.no_gumbel, "Disable Gumbel noise during fitting");
  sub->add_option("--p-depth", o.p_depth, "Depth dropout probability")
      ->check(CLI::Range(0.0, 1.0));
}

void add_selection(CLI::App* sub, Options& o) {
  sub->add_option("--codebook", o.codebook, "Codebook JSON from fit")->check(CLI::ExistingFile);
  sub->add_option("--generic-k", o.generic_k, "Generic subpaths per summary");
  sub->add_option("--specific-k", o.specific_k, "Specific subpaths per summary");
  sub->add_option("--threshold", o.threshold, "Generic pruning threshold");
  sub->add_option("--mode", o.mode, "Realisation: extractive|nearest")
      ->check(CLI::IsMember({"extractive", "nearest"}));
  sub->add_option("--aspect", o.aspect, "Aspect control target (needs --lexicon)");
  sub->add_option("--rating", o.rating, "Rating control target 1..5 (0 = none)")
      ->check(CLI::Range(0, 5));
  sub->add_option("--entity", o.entity, "Restrict to one entity");
}

// Expands `--config FILE` into `--key value` arguments placed right after the
// subcommand name; explicit flags come later and the last value wins.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::optional<std::string> file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
    }
  }
  if (!file || args.empty()) return args;
  if (!fs::is_regular_file(*file)) throw CLI::FileError::Missing(*file);
  std::vector<std::string> injected;
  for (const auto& item : CLI::ConfigTOML().from_file(*file)) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && item.parents != std::vector<std::string>{args[0]}) continue;
    if (item.inputs == std::vector<std::string>{"true"}) {
      injected.push_back("--" + item.name);
    } else if (item.inputs != std::vector<std::string>{"false"}) {
      injected.push_back("--" + item.name);
      injected.insert(injected.end(), item.inputs.begin(), item.inputs.end());
    }
  }
  std::vector<std::string> out{args[0]};
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

void print_error(std::ostream& err, std::string_view kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Hierarchical residual quantization for opinion summarization", "hrqsum"};
  app.option_defaults()->always_capture_default()->multi_option_policy(
      CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1, 1);

  using Command = void (*)(const Options&, Outputs&);
  std::map<CLI::App*, Command> commands;

  auto* embed = app.add_subcommand("embed", "Embed a corpus with the built-in embedder");
  add_common(embed, o);
  add_corpus(embed, o);
  add_embeddings(embed, o);
  commands[embed] = cmd_embed;

  auto* fit_cmd = app.add_subcommand("fit", "Fit a residual codebook");
  add_common(fit_cmd, o);
  add_corpus(fit_cmd, o);
  add_embeddings(fit_cmd, o);
  add_quantizer(fit_cmd, o, o.levels, o.codebook_size);
  commands[fit_cmd] = cmd_fit;

  auto* encode_cmd = app.add_subcommand("encode", "Encode every sentence to a path");
  add_common(encode_cmd, o);
  add_corpus(encode_cmd, o);
  add_embeddings(encode_cmd, o);
  encode_cmd->add_option("--codebook", o.codebook, "Codebook JSON from fit")
      ->check(CLI::ExistingFile);
  commands[encode_cmd] = cmd_encode;

  auto* summarize = app.add_subcommand("summarize", "Write one summary per entity");
  add_common(summarize, o);
  add_corpus(summarize, o);
  add_embeddings(summarize, o);
  add_selection(summarize, o);
  commands[summarize] = cmd_summarize;

  auto* eval = app.add_subcommand("eval", "Score summaries against references or planted truth");
  add_common(eval, o);
  add_corpus(eval, o);
  add_embeddings(eval, o);
  add_selection(eval, o);
  eval->add_option("--references", o.references, "Reference JSONL")->check(CLI::ExistingFile);
  eval->add_option("--truth", o.truth, "Planted opinion JSONL")->check(CLI::ExistingFile);
  eval->add_option("--top-m", o.top_m, "Planted opinions counted for recovery");
  eval->add_option("--baseline", o.baseline, "none|random|centroid|kmeans")
      ->check(CLI::IsMember({"none", "random", "centroid", "kmeans"}));
  commands[eval] = cmd_eval;

  auto* inspect = app.add_subcommand("inspect", "Dump path trees and a 2-D projection");
  add_common(inspect, o);
  add_corpus(inspect, o);
  add_embeddings(inspect, o);
  inspect->add_option("--codebook", o.codebook, "Codebook JSON from fit")
      ->check(CLI::ExistingFile);
  inspect->add_option("--entity", o.entity, "Restrict to one entity");
  commands[inspect] = cmd_inspect;

  auto* pairs = app.add_subcommand("pairs", "Retrieve paraphrase pairs for denoising");
  add_common(pairs, o);
  add_corpus(pairs, o);
  pairs->add_option("--top-k", o.top_k, "Pairs kept per target");
  pairs->add_option("--min-similarity", o.min_similarity, "Cosine floor");
  commands[pairs] = cmd_pairs;

  auto* bench = app.add_subcommand("bench", "Planted-opinion recovery benchmark");
  add_common(bench, o);
  bench->add_option("--seed", o.seed, "First benchmark seed");
  add_quantizer(bench, o, o.bench_levels, o.bench_codebook_size);
  bench->add_option("--dim", o.bench_dim, "Planted embedding dimension")
      ->check(CLI::PositiveNumber);
  bench->add_option("--entities", o.entities, "Planted entities")->check(CLI::PositiveNumber);
  bench->add_option("--sentences", o.sentences, "Sentences per entity")
      ->check(CLI::PositiveNumber);
  bench->add_option("--opinions", o.opinions, "Planted opinions")->check(CLI::PositiveNumber);
  bench->add_option("--noise", o.noise, "Noise standard deviation")
      ->check(CLI::NonNegativeNumber);
  bench->add_option("--generic-k", o.generic_k, "Generic subpaths per summary");
  bench->add_option("--threshold", o.threshold, "Generic pruning threshold");
  bench->add_option("--top-m", o.top_m, "Planted opinions counted for recovery");
  bench->add_option("--runs", o.runs, "Seeds to run, starting at --seed");
  commands[bench] = cmd_bench;

  try {
    const auto expanded = expand_config(args);
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what());
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  set_thread_count(o.threads);
  std::optional<Outputs> outputs;
  try {
    outputs.emplace(fs::path(o.out));
    commands.at(chosen)(o, *outputs);
    outputs->commit();
    return 0;
  } catch (const Error& e) {
    if (outputs) outputs->discard();
    print_error(err, error_kind_name(e.kind()), e.what());
  } catch (const fs::filesystem_error& e) {
    if (outputs) outputs->discard();
    print_error(err, error_kind_name(ErrorKind::kIo), e.what());
  } catch (const std::exception& e) {
    if (outputs) outputs->discard();
    print_error(err, "internal", e.what());
  }
  return 1;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace hrqsum::cli
