#include "gec/cli.hpp"

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "gec/combiner.hpp"
#include "gec/counting.hpp"
#include "gec/errors.hpp"
#include "gec/evaluation.hpp"
#include "gec/m2.hpp"
#include "gec/selection.hpp"
#include "gec/solver.hpp"

namespace gec {

namespace {

namespace fs = std::filesystem;

struct RunConfig {
  std::vector<std::string> system_files;
  std::vector<std::string> test_system_files;
  std::string reference_file;
  std::string test_reference_file;
  std::string selection_file;
  double alpha = 0.5;
  std::string backend = "dinkelbach";
  std::string conflict = "random";
  std::uint64_t seed = 0;
  std::string annotator = "best";
  std::string unknown_types = "drop";
  std::string split = "first-half-train";
  std::string out_dir = ".";
  bool allow_abstain = false;
  bool per_type = false;
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("gec-combine", sink);
  logger->set_pattern("[%l] %v");
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("GEC_COMBINE_LOG")) level = spdlog::level::from_str(env);
  logger->set_level(level);
  return logger;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes next to the target and renames, so readers never see a partial file.
void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << v;
  return out.str();
}

// Systems are labelled by file stem; repeated stems get a #k suffix.
std::vector<CorpusEdits> load_systems(const std::vector<std::string>& files) {
  std::vector<CorpusEdits> systems;
  std::map<std::string, int> seen;
  for (const auto& file : files) {
    CorpusEdits corpus = read_m2_file(file);
    const int n = ++seen[corpus.system_id];
    if (n > 1) corpus.system_id += "#" + std::to_string(n);
    systems.push_back(std::move(corpus));
  }
  return systems;
}

AnnotatorPolicy annotator_policy(const std::string& value) {
  if (value == "best") return AnnotatorPolicy::best();
  try {
    std::size_t used = 0;
    const int id = std::stoi(value, &used);
    if (used == value.size() && id >= 0) return AnnotatorPolicy::fixed(id);
  } catch (const std::exception&) {
  }
  throw CLI::ValidationError("--annotator", "expected 'best' or a nonnegative annotator id");
}

SolverConfig solver_config(const RunConfig& cfg) {
  SolverConfig config;
  config.alpha = cfg.alpha;
  config.backend = parse_backend(cfg.backend);
  config.allow_abstain = cfg.allow_abstain;
  return config;
}

std::string corrected_text(const std::vector<Tokens>& sentences) {
  std::string out;
  for (const Tokens& t : sentences) {
    out += join_tokens(t);
    out += '\n';
  }
  return out;
}

std::string assignment_table(const SolveResult& result, const CountMatrix& counts) {
  std::ostringstream out;
  const auto chosen = result.selection.assignment();
  for (std::size_t j = 0; j < chosen.size(); ++j) {
    const Counts c = counts.at(chosen[j], j);
    out << "  " << result.selection.type_index[j] << " -> " << result.selection.system_ids[chosen[j]] << "  (tp "
        << c.tp << ", fp " << c.fp << ", fn " << c.fn << ")\n";
  }
  return out.str();
}

struct Optimized {
  CountMatrix counts;
  SolveResult result;
};

Optimized optimize(const std::vector<CorpusEdits>& systems, const CorpusEdits& reference, const RunConfig& cfg,
                   spdlog::logger& log) {
  CountOptions options{cfg.alpha, annotator_policy(cfg.annotator)};
  CountMatrix counts = build_count_matrix(systems, reference, options);
  log.info("count matrix: {} systems x {} error types", counts.systems(), counts.types());
  const SolverConfig config = solver_config(cfg);
  SolveResult result = solve(counts, config);
  log.info("solved with {} in {} iterations, objective {:.6f}", to_string(result.backend_used), result.iterations,
           result.objective);
  if (result.degenerate) log.warn("all counts are zero; selection is trivial");
  CountMatrix solved = cfg.allow_abstain ? with_abstain_row(counts) : counts;
  return {std::move(solved), std::move(result)};
}

void write_optimize_outputs(const fs::path& dir, const Optimized& opt) {
  write_atomic(dir / "selection.json", to_json(opt.result.selection).dump(2) + "\n");
  write_atomic(dir / "selection.tsv", to_tsv(opt.result.selection, opt.counts));
  write_atomic(dir / "counts.json", to_json(opt.counts).dump(2) + "\n");
  write_atomic(dir / "counts.tsv", to_tsv(opt.counts));
  write_atomic(dir / "solve_result.json", to_json(opt.result).dump(2) + "\n");
}

void print_optimize_summary(std::ostream& out, const Optimized& opt, double alpha) {
  out << "training objective F" << alpha << ": " << opt.result.objective << '\n'
      << "backend: " << to_string(opt.result.backend_used) << " (" << opt.result.iterations << " iterations)\n"
      << "assignments:\n"
      << assignment_table(opt.result, opt.counts);
}

nlohmann::json manifest(const CombineResult& combined, const ConflictPolicy& policy,
                        const std::vector<CorpusEdits>& systems, const std::string& selection_file,
                        const std::string& selection_bytes) {
  std::vector<std::string> labels;
  for (const auto& s : systems) labels.push_back(s.system_id);
  return {{"selection_file", selection_file},
          {"selection_fnv1a64", hex(fnv1a64(selection_bytes))},
          {"conflict_mode", std::string(to_string(policy.mode))},
          {"seed", policy.seed},
          {"systems", labels},
          {"sentences", combined.stats.sentences},
          {"candidates", combined.stats.candidates},
          {"merged_duplicates", combined.stats.merged_duplicates},
          {"conflict_clusters", combined.stats.conflict_clusters},
          {"conflict_edits_discarded", combined.stats.discarded},
          {"unknown_type_dropped", combined.stats.unknown_type_dropped}};
}

CombineResult apply_selection(const std::vector<CorpusEdits>& systems, const SelectionMatrix& selection,
                              const RunConfig& cfg, const ConflictPolicy& policy, spdlog::logger& log) {
  const auto unknown = cfg.unknown_types == "error" ? UnknownTypePolicy::error : UnknownTypePolicy::drop;
  CombineResult combined = combine_corpus(systems, selection, policy, unknown);
  if (combined.stats.unknown_type_dropped > 0) {
    log.warn("dropped {} edits with error types absent from the selection", combined.stats.unknown_type_dropped);
  }
  log.info("{} conflict clusters resolved ({} edits discarded)", combined.stats.conflict_clusters,
           combined.stats.discarded);
  return combined;
}

void write_apply_outputs(const fs::path& dir, const CombineResult& combined, const nlohmann::json& run_manifest) {
  write_atomic(dir / "combined.m2", serialize_m2(combined.combined));
  write_atomic(dir / "combined.txt", corrected_text(combined.corrected));
  write_atomic(dir / "manifest.json", run_manifest.dump(2) + "\n");
}

std::string label_file(const std::string& label) {
  std::string out;
  for (char c : label) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

int cmd_optimize(const RunConfig& cfg, std::ostream& out, spdlog::logger& log) {
  const auto systems = load_systems(cfg.system_files);
  const auto reference = read_m2_file(cfg.reference_file);
  const Optimized opt = optimize(systems, reference, cfg, log);
  write_optimize_outputs(cfg.out_dir, opt);
  print_optimize_summary(out, opt, cfg.alpha);
  return kExitOk;
}

int cmd_apply(const RunConfig& cfg, std::ostream& out, spdlog::logger& log) {
  const auto systems = load_systems(cfg.system_files);
  const std::string bytes = read_file(cfg.selection_file);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(cfg.selection_file + ": " + e.what());
  }
  const SelectionMatrix selection = selection_from_json(doc);
  const ConflictPolicy policy{parse_conflict_mode(cfg.conflict), cfg.seed};
  const CombineResult combined = apply_selection(systems, selection, cfg, policy, log);
  write_apply_outputs(cfg.out_dir, combined, manifest(combined, policy, systems, cfg.selection_file, bytes));
  out << "combined " << combined.stats.sentences << " sentences; " << combined.stats.conflict_clusters
      << " conflicts resolved\n";
  return kExitOk;
}

int cmd_score(const RunConfig& cfg, std::ostream& out, spdlog::logger&) {
  const auto systems = load_systems(cfg.system_files);
  const auto reference = read_m2_file(cfg.reference_file);
  const AnnotatorPolicy policy = annotator_policy(cfg.annotator);
  for (const auto& hyp : systems) {
    const EvalReport report = evaluate(hyp, reference, cfg.alpha, policy);
    out << "== " << hyp.system_id << '\n' << format_table(report, cfg.per_type);
    if (!cfg.out_dir.empty()) {
      write_atomic(fs::path(cfg.out_dir) / ("score_" + label_file(hyp.system_id) + ".json"),
                   to_json(report).dump(2) + "\n");
    }
  }
  return kExitOk;
}

int cmd_analyze(const RunConfig& cfg, std::ostream& out, spdlog::logger& log) {
  if (cfg.system_files.size() != 2) throw CLI::ValidationError("--systems", "analyze compares exactly two systems");
  const auto systems = load_systems(cfg.system_files);
  const auto reference = read_m2_file(cfg.reference_file);
  for (const auto& s : systems) check_alignment(s, reference);
  const SplitMode mode = parse_split_mode(cfg.split);

  std::vector<CorpusEdits> train, test;
  for (const auto& s : systems) {
    auto [tr, te] = split_corpus(s, mode);
    train.push_back(std::move(tr));
    test.push_back(std::move(te));
  }
  auto [ref_train, ref_test] = split_corpus(reference, mode);
  log.info("split {} sentences into {} train / {} test", reference.size(), ref_train.size(), ref_test.size());

  const Optimized opt = optimize(train, ref_train, cfg, log);
  const ConflictPolicy policy{parse_conflict_mode(cfg.conflict), cfg.seed};
  const CombineResult combined = apply_selection(test, opt.result.selection, cfg, policy, log);
  const AnalysisReport report = split_half_analysis(test[0], test[1], ref_test, combined.combined, cfg.alpha,
                                                    annotator_policy(cfg.annotator));

  const fs::path dir = cfg.out_dir;
  write_optimize_outputs(dir, opt);
  write_atomic(dir / "combined_test.m2", serialize_m2(combined.combined));
  nlohmann::json doc = to_json(report);
  doc["system_a"] = systems[0].system_id;
  doc["system_b"] = systems[1].system_id;
  doc["split"] = cfg.split;
  doc["training_objective"] = opt.result.objective;
  write_atomic(dir / "analysis.json", doc.dump(2) + "\n");
  out << "a = " << systems[0].system_id << ", b = " << systems[1].system_id << '\n' << format_table(report);
  return kExitOk;
}

int cmd_pipeline(const RunConfig& cfg, std::ostream& out, spdlog::logger& log) {
  const auto systems = load_systems(cfg.system_files);
  const auto reference = read_m2_file(cfg.reference_file);
  const Optimized opt = optimize(systems, reference, cfg, log);

  std::vector<CorpusEdits> test = systems;
  if (!cfg.test_system_files.empty()) {
    if (cfg.test_system_files.size() != systems.size()) {
      throw CLI::ValidationError("--test-systems", "needs one file per training system, in the same order");
    }
    test = load_systems(cfg.test_system_files);
    // Test outputs take the training labels positionally.
    for (std::size_t i = 0; i < test.size(); ++i) test[i].system_id = systems[i].system_id;
  }
  const CorpusEdits test_reference =
      cfg.test_reference_file.empty() ? reference : read_m2_file(cfg.test_reference_file);

  const ConflictPolicy policy{parse_conflict_mode(cfg.conflict), cfg.seed};
  const CombineResult combined = apply_selection(test, opt.result.selection, cfg, policy, log);
  const EvalReport report = evaluate(combined.combined, test_reference, cfg.alpha, annotator_policy(cfg.annotator));

  const fs::path dir = cfg.out_dir;
  write_optimize_outputs(dir, opt);
  const std::string selection_bytes = to_json(opt.result.selection).dump(2) + "\n";
  write_apply_outputs(dir, combined,
                      manifest(combined, policy, test, "selection.json", selection_bytes));
  write_atomic(dir / "score.json", to_json(report).dump(2) + "\n");

  print_optimize_summary(out, opt, cfg.alpha);
  out << "combined output:\n" << format_table(report, cfg.per_type);
  return kExitOk;
}

void add_solver_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--alpha", cfg.alpha, "F-score weight")->check(CLI::NonNegativeNumber);
  cmd->add_option("--backend", cfg.backend, "solver backend")
      ->check(CLI::IsMember({"exhaustive", "dinkelbach"}));
  cmd->add_option("--annotator", cfg.annotator, "reference annotator: best or a fixed id");
  cmd->add_flag("--allow-abstain", cfg.allow_abstain, "let a type be assigned to no system");
}

void add_conflict_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--conflict", cfg.conflict, "conflict resolution")->check(CLI::IsMember({"random", "lowest", "skip"}));
  cmd->add_option("--seed", cfg.seed, "seed for random conflict resolution");
  cmd->add_option("--unknown-types", cfg.unknown_types, "edits of types unseen in training")
      ->check(CLI::IsMember({"drop", "error"}));
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Combine grammatical error correction systems by per-type selection"};
  app.name("gec-combine");
  app.require_subcommand(1);

  auto* optimize_cmd = app.add_subcommand("optimize", "learn a selection matrix from training M2 files");
  auto* apply_cmd = app.add_subcommand("apply", "apply a selection matrix to system M2 files");
  auto* score_cmd = app.add_subcommand("score", "score M2 hypotheses against a reference");
  auto* analyze_cmd = app.add_subcommand("analyze", "split-half per-sentence analysis of two systems");
  auto* pipeline_cmd = app.add_subcommand("pipeline", "optimize, apply and score in one run");

  for (auto* cmd : {optimize_cmd, apply_cmd, score_cmd, analyze_cmd, pipeline_cmd}) {
    cmd->add_option("--systems", cfg.system_files, "system M2 files")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out-dir", cfg.out_dir, "output directory");
  }
  for (auto* cmd : {optimize_cmd, score_cmd, analyze_cmd, pipeline_cmd}) {
    cmd->add_option("--ref", cfg.reference_file, "reference M2 file")->required()->check(CLI::ExistingFile);
  }
  for (auto* cmd : {optimize_cmd, analyze_cmd, pipeline_cmd}) add_solver_options(cmd, cfg);
  for (auto* cmd : {apply_cmd, analyze_cmd, pipeline_cmd}) add_conflict_options(cmd, cfg);

  apply_cmd->add_option("--selection", cfg.selection_file, "selection JSON")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--alpha", cfg.alpha, "F-score weight")->check(CLI::NonNegativeNumber);
  score_cmd->add_option("--annotator", cfg.annotator, "reference annotator: best or a fixed id");
  for (auto* cmd : {score_cmd, pipeline_cmd}) cmd->add_flag("--per-type", cfg.per_type, "print per-type scores");
  analyze_cmd->add_option("--split", cfg.split, "split protocol")
      ->check(CLI::IsMember({"first-half-train", "even-index-train"}));
  pipeline_cmd->add_option("--test-systems", cfg.test_system_files, "system M2 files to combine (default: training)")
      ->check(CLI::ExistingFile);
  pipeline_cmd->add_option("--test-ref", cfg.test_reference_file, "reference for scoring (default: training)")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*score_cmd && score_cmd->count("--out-dir") == 0) cfg.out_dir.clear();

  auto log = make_logger(err);
  try {
    if (*optimize_cmd) return cmd_optimize(cfg, out, *log);
    if (*apply_cmd) return cmd_apply(cfg, out, *log);
    if (*score_cmd) return cmd_score(cfg, out, *log);
    if (*analyze_cmd) return cmd_analyze(cfg, out, *log);
    if (*pipeline_cmd) return cmd_pipeline(cfg, out, *log);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace gec
