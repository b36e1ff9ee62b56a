// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gec/cli.hpp"
#include "gec/combiner.hpp"
#include "gec/counting.hpp"
#include "gec/evaluation.hpp"
#include "gec/m2.hpp"
#include "gec/solver.hpp"

namespace fs = std::filesystem;
using namespace gec;

namespace {

// Tolerances and budgets.
constexpr double kTableTolerancePP = 0.0101;  // percentage points
constexpr double kSolverTolerance = 1e-12;
constexpr double kBudgetC1 = 1.0;
constexpr double kBudgetC2 = 10.0;
constexpr double kBudgetC3 = 5.0;
constexpr double kBudgetC4 = 5.0;
constexpr double kBudgetC5 = 1.0;
constexpr double kBudgetC6 = 5.0;
constexpr double kBudgetC7 = 1.0;
constexpr int kSolverInstances = 240;
constexpr int kSeeds = 1000;
constexpr double kBranchLow = 0.40;
constexpr double kBranchHigh = 0.60;

std::string fixture(const std::string& name) { return std::string(GEC_FIXTURE_DIR) + "/" + name; }

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double budget, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_budget = secs < budget;
  const bool pass = o.ok && in_budget;
  if (!pass) ++failures;
  std::printf("[%s] criterion %d: %s (%.3fs, budget %.0fs%s) %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), secs,
              budget, in_budget ? "" : ", OVER BUDGET", o.detail.c_str());
}

CountMatrix random_counts(std::mt19937_64& rng, std::size_t m, std::size_t n, std::int64_t max) {
  std::vector<std::string> systems, types;
  for (std::size_t i = 0; i < m; ++i) systems.push_back("s" + std::to_string(i));
  for (std::size_t j = 0; j < n; ++j) types.push_back("T" + std::to_string(100 + j));
  CountMatrix c(systems, ErrorTypeIndex(types));
  std::uniform_int_distribution<std::int64_t> d(0, max);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) c.add(i, j, {d(rng), d(rng), d(rng)});
  }
  return c;
}

// Column sums of one and binary entries, checked cell by cell.
bool feasible(const SelectionMatrix& x) {
  for (std::size_t j = 0; j < x.types(); ++j) {
    int sum = 0;
    for (std::size_t i = 0; i < x.systems(); ++i) {
      if (x.x(i, j) > 1) return false;
      sum += x.x(i, j);
    }
    if (sum != 1) return false;
  }
  return true;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream b;
  b << in.rdbuf();
  return b.str();
}

Outcome table_fidelity() {
  struct Row {
    const char* label;
    double p, r, f;
  };
  const Row table1[] = {{"UEdin-MS", 72.28, 60.12, 69.47}, {"Kakao", 75.19, 51.91, 69.00},
                        {"Tohoku", 74.71, 56.67, 70.24},   {"IP C1", 78.20, 57.90, 73.08},
                        {"IP C2", 76.08, 58.81, 71.86},    {"IP C3", 76.95, 55.54, 71.44},
                        {"IP C4", 78.17, 57.88, 73.05}};
  const Row table2[] = {{"MEMT C1", 72.52, 60.92, 69.90},
                        {"MEMT C2", 73.06, 60.75, 70.29},
                        {"MEMT C3", 75.84, 58.28, 71.50},
                        {"MEMT C4", 79.17, 58.68, 73.98}};
  Outcome o;
  std::ostringstream misses;
  auto check = [&](const Row& row) {
    const double f = 100.0 * f_beta_from_pr(row.p / 100.0, row.r / 100.0, 0.5);
    const double dev = std::abs(f - row.f);
    std::printf("    %-9s P=%.2f R=%.2f reported F=%.2f computed F=%.4f |dev|=%.4f pp %s\n", row.label, row.p, row.r,
                row.f, f, dev, dev <= kTableTolerancePP ? "ok" : "MISMATCH");
    if (dev > kTableTolerancePP) {
      o.ok = false;
      misses << ' ' << row.label;
    }
  };
  for (const Row& r : table1) check(r);
  for (const Row& r : table2) check(r);
  o.detail = o.ok ? "all 11 rows within 0.0101 pp"
                  : "rows outside 0.0101 pp:" + misses.str() +
                        " (reported MEMT triples are not internally consistent under F0.5)";
  return o;
}

Outcome solver_exactness() {
  std::mt19937_64 rng(20190801);
  SolverConfig ex;
  ex.backend = Backend::exhaustive;
  SolverConfig dk;
  dk.backend = Backend::dinkelbach;
  double worst = 0.0;
  int bad = 0;
  for (int k = 0; k < kSolverInstances; ++k) {
    const std::size_t m = 2 + rng() % 3;
    const std::size_t n = 2 + rng() % 7;
    const CountMatrix c = random_counts(rng, m, n, 20);
    const auto a = solve_exhaustive(c, ex);
    const auto b = solve_dinkelbach(c, dk);
    const double gap = std::abs(a.objective - b.objective);
    worst = std::max(worst, gap);
    if (gap > kSolverTolerance || !feasible(a.selection) || !feasible(b.selection)) ++bad;
  }
  std::ostringstream d;
  d << kSolverInstances << " instances, max |gap| " << worst << ", " << bad << " bad";
  return {bad == 0, d.str()};
}

Outcome dominance() {
  std::mt19937_64 rng(73);
  std::vector<CountMatrix> instances;
  for (int k = 0; k < 300; ++k) instances.push_back(random_counts(rng, 2 + rng() % 3, 1 + rng() % 12, 20));
  const std::vector<CorpusEdits> systems{read_m2_file(fixture("sys_a.m2")), read_m2_file(fixture("sys_b.m2"))};
  instances.push_back(build_count_matrix(systems, read_m2_file(fixture("ref.m2"))));
  const std::vector<CorpusEdits> comb{read_m2_file(fixture("comb_a.m2")), read_m2_file(fixture("comb_b.m2"))};
  instances.push_back(build_count_matrix(comb, read_m2_file(fixture("comb_b.m2"))));

  int bad = 0;
  for (const CountMatrix& c : instances) {
    const double best = solve(c, {}).objective;
    for (std::size_t i = 0; i < c.systems(); ++i) {
      const auto single = SelectionMatrix::single_system(c.system_ids, c.type_index, i);
      if (!(best >= f_alpha_objective(c, single, 0.5))) ++bad;
    }
  }
  return {bad == 0, std::to_string(instances.size()) + " instances, " + std::to_string(bad) + " violations"};
}

bool self_conflicting(const SentenceAnnotation& s) {
  const auto edits = s.hypothesis_edits();
  for (std::size_t a = 0; a < edits.size(); ++a) {
    for (std::size_t b = a + 1; b < edits.size(); ++b) {
      if (spans_overlap(edits[a], edits[b])) return true;
    }
  }
  return false;
}

Outcome cross_module() {
  struct Pair {
    const char* hyp;
    const char* ref;
  };
  const Pair pairs[] = {{"sys_a.m2", "ref.m2"},       {"sys_b.m2", "ref.m2"},     {"ref.m2", "ref.m2"},
                        {"comb_a.m2", "comb_b.m2"},   {"comb_b.m2", "comb_a.m2"}, {"multi_hyp.m2", "multi_ref.m2"},
                        {"roundtrip.m2", "roundtrip.m2"}};
  int checked = 0, bad = 0;
  for (const Pair& p : pairs) {
    const std::vector<CorpusEdits> hyp{read_m2_file(fixture(p.hyp))};
    const auto ref = read_m2_file(fixture(p.ref));
    const auto counts = build_count_matrix(hyp, ref);
    if (!(evaluate(hyp[0], ref).totals == counts.row_total(0))) ++bad;
    ++checked;
  }

  // all types to one system reproduces that system's text
  const std::vector<std::vector<const char*>> groups = {{"sys_a.m2", "sys_b.m2"}, {"comb_a.m2", "comb_b.m2"},
                                                        {"ref.m2"}, {"multi_hyp.m2"}, {"roundtrip.m2"}};
  for (const auto& group : groups) {
    std::vector<CorpusEdits> systems;
    std::vector<std::string> labels, types;
    for (const char* f : group) {
      systems.push_back(read_m2_file(fixture(f)));
      labels.push_back(systems.back().system_id);
      for (const auto& s : systems.back().sentences) {
        for (const Edit& e : s.edits) types.push_back(e.error_type);
      }
    }
    if (types.empty()) types.push_back("R:OTHER");
    const ErrorTypeIndex index(types);
    for (std::size_t i = 0; i < systems.size(); ++i) {
      const auto combined =
          combine_corpus(systems, SelectionMatrix::single_system(labels, index, i), {ConflictMode::random, 0});
      for (std::size_t s = 0; s < systems[i].size(); ++s) {
        const auto& sent = systems[i].sentences[s];
        if (self_conflicting(sent)) continue;
        ++checked;
        if (combined.corrected[s] != apply_edits(sent.source_tokens, sent.hypothesis_edits())) ++bad;
      }
    }
  }
  return {bad == 0, std::to_string(checked) + " checks, " + std::to_string(bad) + " mismatches"};
}

Outcome round_trip() {
  const auto suite = {"roundtrip.m2", "ref.m2", "sys_a.m2", "sys_b.m2", "comb_a.m2", "comb_b.m2", "multi_ref.m2",
                      "multi_hyp.m2"};
  int bad = 0;
  bool sub = false, ins = false, del = false, noop = false, multi_ann = false, multi_tok = false;
  for (const char* name : suite) {
    const auto once = parse_m2(slurp(fixture(name)));
    const auto twice = parse_m2(serialize_m2(once));
    if (!(once == twice) || serialize_m2(twice) != serialize_m2(once)) ++bad;
    for (const auto& s : once.sentences) {
      if (s.annotators.size() > 1) multi_ann = true;
      for (int a : s.annotators) {
        if (s.edits_for(a).empty()) noop = true;
      }
      for (const Edit& e : s.edits) {
        if (e.is_insertion()) ins = true;
        if (!e.is_insertion() && e.replacement.empty()) del = true;
        if (!e.is_insertion() && !e.replacement.empty()) sub = true;
        if (e.replacement_tokens().size() > 1 || e.end - e.start > 1) multi_tok = true;
      }
    }
  }
  const bool covered = sub && ins && del && noop && multi_ann && multi_tok;
  return {bad == 0 && covered, std::to_string(suite.size()) + " files, " + std::to_string(bad) +
                                   " mismatches, coverage " + (covered ? "complete" : "INCOMPLETE")};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "gec_acceptance";
  fs::remove_all(root);
  std::vector<fs::path> dirs;
  for (int run = 0; run < 3; ++run) {
    dirs.push_back(root / ("run" + std::to_string(run)));
    const std::vector<std::string> args{"gec-combine", "pipeline",          "--systems", fixture("comb_a.m2"),
                                        fixture("comb_b.m2"), "--ref", fixture("comb_a.m2"), "--conflict",
                                        "random", "--seed", "42", "--out-dir", dirs.back().string()};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    if (run_cli(static_cast<int>(argv.size()), argv.data(), out, err) != kExitOk) {
      return {false, "pipeline run failed: " + err.str()};
    }
  }
  int differing = 0, files = 0;
  for (const auto& entry : fs::directory_iterator(dirs[0])) {
    const auto name = entry.path().filename();
    ++files;
    for (int run = 1; run < 3; ++run) {
      if (slurp(dirs[0] / name) != slurp(dirs[run] / name)) ++differing;
    }
  }
  fs::remove_all(root);

  const std::vector<CandidateEdit> two_way{{Edit{1, 2, "R:VERB:SVA", "looks", 0}, 0},
                                           {Edit{1, 2, "R:VERB:TENSE", "looked", 0}, 1}};
  int first = 0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    const auto r = resolve_conflicts(two_way, {ConflictMode::random, static_cast<std::uint64_t>(seed)}, 0);
    if (r.edits.size() == 1 && r.edits[0].replacement == "looks") ++first;
  }
  const double share = static_cast<double>(first) / kSeeds;
  const bool uniform = share >= kBranchLow && share <= kBranchHigh;
  std::ostringstream d;
  d << files << " output files x 3 runs, " << differing << " differ; branch share " << share << " / " << 1.0 - share;
  return {differing == 0 && files > 0 && uniform, d.str()};
}

Outcome solve_envelope() {
  std::mt19937_64 rng(355);
  const CountMatrix c = random_counts(rng, 3, 55, 500);
  SolverConfig cfg;
  cfg.backend = Backend::dinkelbach;
  const auto start = std::chrono::steady_clock::now();
  const auto r = solve_dinkelbach(c, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream d;
  d << "M=3 N=55 solved in " << secs * 1e3 << " ms, " << r.iterations << " iterations";
  return {feasible(r.selection) && secs < kBudgetC7, d.str()};
}

}  // namespace

int main() {
  report(1, "F-formula fidelity on published P/R/F rows", kBudgetC1, table_fidelity);
  report(2, "dinkelbach equals exhaustive", kBudgetC2, solver_exactness);
  report(3, "optimum dominates single-system selections", kBudgetC3, dominance);
  report(4, "evaluate/count/combine consistency", kBudgetC4, cross_module);
  report(5, "M2 round trip", kBudgetC5, round_trip);
  report(6, "seeded determinism and conflict uniformity", kBudgetC6, determinism);
  report(7, "desk-scale solve envelope", kBudgetC7, solve_envelope);
  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
