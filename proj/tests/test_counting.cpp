#include <algorithm>
#include <random>

#include "doctest.h"
#include "gec/counting.hpp"
#include "gec/errors.hpp"
#include "gec/fscore.hpp"
#include "gec/selection.hpp"
#include "oracles.hpp"

using namespace gec;
using gec::testing::fixture;
using gec::testing::make_edit;

namespace {

std::vector<CorpusEdits> fixture_systems() {
  return {read_m2_file(fixture("sys_a.m2")), read_m2_file(fixture("sys_b.m2"))};
}

// Random single-annotator reference plus `m` hypotheses over the same sources.
struct RandomCorpus {
  CorpusEdits reference;
  std::vector<CorpusEdits> systems;
};

RandomCorpus random_corpus(std::mt19937_64& rng, std::size_t m, std::size_t sentences) {
  RandomCorpus rc;
  rc.reference.system_id = "ref";
  for (std::size_t i = 0; i < m; ++i) rc.systems.push_back(CorpusEdits{"s" + std::to_string(i), {}});
  for (std::size_t s = 0; s < sentences; ++s) {
    const Tokens src = gec::testing::random_tokens(rng, 2 + rng() % 6);
    auto ref_edits = gec::testing::random_edits(rng, src.size());
    SentenceAnnotation ref{src, ref_edits, {0}};
    normalize(ref);
    rc.reference.sentences.push_back(ref);
    for (auto& sys : rc.systems) {
      // half copied from the reference, half random
      std::vector<Edit> edits = rng() % 2 ? ref_edits : gec::testing::random_edits(rng, src.size());
      if (!edits.empty() && rng() % 3 == 0) edits.pop_back();
      SentenceAnnotation hyp{src, edits, {0}};
      normalize(hyp);
      sys.sentences.push_back(hyp);
    }
  }
  return rc;
}

}  // namespace

TEST_CASE("fscore: formulas") {
  CHECK(f_alpha_from_counts({3, 1, 2}, 0.5) == doctest::Approx(3.75 / 5.25).epsilon(1e-15));
  CHECK(f_alpha_from_counts({0, 0, 0}, 0.5) == 0.0);
  CHECK(f_alpha_from_counts({0, 4, 2}, 0.5) == 0.0);
  CHECK(f_alpha_from_counts({2, 0, 0}, 0.5) == 1.0);
  CHECK(f_alpha_from_counts({2, 2, 2}, 1.0) == doctest::Approx(0.5));
  CHECK(precision({0, 0, 3}) == 1.0);
  CHECK(recall({0, 3, 0}) == 1.0);
  CHECK(f_score({0, 0, 0}, 0.5) == 1.0);
  CHECK(f_score({0, 2, 0}, 0.5) == 0.0);
  CHECK(f_score({0, 0, 2}, 0.5) == 0.0);
  CHECK(f_beta_from_pr(0.7228, 0.6012, 0.5) == doctest::Approx(0.6947).epsilon(2e-4));
}

TEST_CASE("fscore: count formula and P/R formula agree off the all-zero point") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 5000; ++i) {
    const Counts c{static_cast<std::int64_t>(rng() % 30), static_cast<std::int64_t>(rng() % 30),
                   static_cast<std::int64_t>(rng() % 30)};
    if (c == Counts{}) continue;
    for (double alpha : {0.5, 1.0, 2.0, 0.3}) {
      REQUIRE(f_score(c, alpha) == doctest::Approx(f_alpha_from_counts(c, alpha)).epsilon(1e-12));
    }
  }
}

TEST_CASE("ErrorTypeIndex: sorted and unique") {
  ErrorTypeIndex idx({"R:VERB", "M:DET", "R:VERB", "U:NOUN"});
  CHECK(idx.types() == std::vector<std::string>{"M:DET", "R:VERB", "U:NOUN"});
  CHECK(idx.find("R:VERB") == std::optional<std::size_t>{1});
  CHECK_FALSE(idx.find("R:ADJ").has_value());
  CHECK_THROWS_AS(idx.at("R:ADJ"), DataError);
}

TEST_CASE("match_edits: one-to-one on span and replacement") {
  const std::vector<Edit> hyp{make_edit(1, 2, "R:A", "x"), make_edit(1, 2, "R:B", "x"), make_edit(3, 3, "M:A", "y")};
  const std::vector<Edit> ref{make_edit(1, 2, "R:C", "x"), make_edit(3, 3, "M:A", "z")};
  const auto m = match_edits(hyp, ref);
  CHECK(m.totals() == Counts{1, 2, 1});
  REQUIRE(m.matched.size() == 1);
  CHECK(m.matched[0].second.error_type == "R:C");
}

TEST_CASE("build_count_matrix: two-system fixture") {
  const auto systems = fixture_systems();
  const auto ref = read_m2_file(fixture("ref.m2"));
  const CountMatrix c = build_count_matrix(systems, ref);

  CHECK(c.system_ids == std::vector<std::string>{"sys_a", "sys_b"});
  CHECK(c.type_index.types() ==
        std::vector<std::string>{"M:DET", "R:ADJ", "R:NOUN:NUM", "R:VERB:SVA", "R:VERB:TENSE"});

  // hand tally
  const std::vector<Counts> a{{0, 0, 0}, {0, 1, 0}, {1, 0, 1}, {1, 0, 0}, {0, 1, 1}};
  const std::vector<Counts> b{{0, 1, 0}, {0, 0, 0}, {1, 0, 1}, {1, 0, 0}, {1, 0, 0}};
  for (std::size_t j = 0; j < 5; ++j) {
    CAPTURE(j);
    CHECK(c.at(0, j) == a[j]);
    CHECK(c.at(1, j) == b[j]);
  }
  CHECK(c.row_total(0) == Counts{2, 2, 2});
  CHECK(c.row_total(1) == Counts{3, 1, 1});
}

TEST_CASE("build_count_matrix: agrees with the key-multiset tally on random corpora") {
  std::mt19937_64 rng(19);
  for (int round = 0; round < 100; ++round) {
    const auto rc = random_corpus(rng, 1 + rng() % 3, 1 + rng() % 6);
    const CountMatrix c = build_count_matrix(rc.systems, rc.reference);
    for (std::size_t i = 0; i < rc.systems.size(); ++i) {
      std::map<std::string, Counts> expected;
      for (std::size_t s = 0; s < rc.reference.size(); ++s) {
        const auto t = gec::testing::tally(rc.systems[i].sentences[s].edits, rc.reference.sentences[s].edits);
        for (const auto& [type, counts] : t.per_type) expected[type] += counts;
      }
      for (std::size_t j = 0; j < c.types(); ++j) {
        const auto it = expected.find(c.type_index[j]);
        REQUIRE(c.at(i, j) == (it == expected.end() ? Counts{} : it->second));
      }
    }
  }
}

TEST_CASE("build_count_matrix: conservation of edits") {
  std::mt19937_64 rng(23);
  for (int round = 0; round < 100; ++round) {
    const auto rc = random_corpus(rng, 2, 1 + rng() % 6);
    const CountMatrix c = build_count_matrix(rc.systems, rc.reference);
    std::int64_t ref_edits = 0;
    for (const auto& s : rc.reference.sentences) ref_edits += static_cast<std::int64_t>(s.edits.size());
    for (std::size_t i = 0; i < 2; ++i) {
      std::int64_t hyp_edits = 0;
      for (const auto& s : rc.systems[i].sentences) hyp_edits += static_cast<std::int64_t>(s.edits.size());
      const Counts t = c.row_total(i);
      REQUIRE(t.tp + t.fn == ref_edits);
      REQUIRE(t.tp + t.fp == hyp_edits);
    }
  }
}

TEST_CASE("build_count_matrix: permuting systems permutes rows") {
  auto systems = fixture_systems();
  const auto ref = read_m2_file(fixture("ref.m2"));
  const CountMatrix forward = build_count_matrix(systems, ref);
  std::reverse(systems.begin(), systems.end());
  const CountMatrix backward = build_count_matrix(systems, ref);
  CHECK(backward.system_ids == std::vector<std::string>{"sys_b", "sys_a"});
  CHECK(forward.type_index == backward.type_index);
  for (std::size_t j = 0; j < forward.types(); ++j) {
    CHECK(forward.at(0, j) == backward.at(1, j));
    CHECK(forward.at(1, j) == backward.at(0, j));
  }
}

TEST_CASE("build_count_matrix: multi-annotator reference uses the best annotator") {
  const std::vector<CorpusEdits> hyp{read_m2_file(fixture("multi_hyp.m2"))};
  const auto ref = read_m2_file(fixture("multi_ref.m2"));
  const CountMatrix best = build_count_matrix(hyp, ref);
  CHECK(best.row_total(0) == Counts{1, 0, 0});

  const CountMatrix fixed = build_count_matrix(hyp, ref, {0.5, AnnotatorPolicy::fixed(0)});
  CHECK(fixed.row_total(0) == Counts{0, 1, 3});

  const auto m = match_sentence(hyp[0].sentences[1].edits, ref.sentences[1], 0.5, AnnotatorPolicy::best());
  CHECK(m.annotator == 1);
}

TEST_CASE("build_count_matrix: alignment and label errors") {
  auto systems = fixture_systems();
  const auto ref = read_m2_file(fixture("ref.m2"));

  auto short_sys = systems;
  short_sys[1].sentences.pop_back();
  CHECK_THROWS_AS(build_count_matrix(short_sys, ref), AlignmentError);

  auto wrong_tokens = systems;
  wrong_tokens[0].sentences[1].source_tokens[0] = "She";
  CHECK_THROWS_AS(build_count_matrix(wrong_tokens, ref), AlignmentError);

  auto dup = systems;
  dup[1].system_id = "sys_a";
  CHECK_THROWS_AS(build_count_matrix(dup, ref), DataError);

  auto unnamed = systems;
  unnamed[0].system_id.clear();
  CHECK(build_count_matrix(unnamed, ref).system_ids[0] == "system_0");
}

TEST_CASE("CountMatrix: JSON round trip and validation") {
  std::mt19937_64 rng(5);
  const CountMatrix c = gec::testing::random_counts(rng, 3, 6, 20);
  CHECK(count_matrix_from_json(to_json(c)) == c);
  CHECK(count_matrix_from_json(nlohmann::json::parse(to_json(c).dump())) == c);

  auto doc = to_json(c);
  doc["tp"][0].erase(0);
  CHECK_THROWS_AS(count_matrix_from_json(doc), DataError);
  auto neg = to_json(c);
  neg["fn"][1][1] = -1;
  CHECK_THROWS_AS(count_matrix_from_json(neg), DataError);
  CHECK_THROWS_AS(count_matrix_from_json(nlohmann::json::array()), DataError);
}

TEST_CASE("CountMatrix: TSV layout") {
  const auto c = build_count_matrix(fixture_systems(), read_m2_file(fixture("ref.m2")));
  const std::string tsv = to_tsv(c);
  CHECK(tsv.rfind("system\ttype\ttp\tfp\tfn\n", 0) == 0);
  CHECK(tsv.find("sys_b\tR:VERB:TENSE\t1\t0\t0\n") != std::string::npos);
  CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 1 + 2 * 5);
}

TEST_CASE("counts_for_selection: matches a double loop") {
  std::mt19937_64 rng(29);
  for (int round = 0; round < 300; ++round) {
    const CountMatrix c = gec::testing::random_counts(rng, 1 + rng() % 4, 1 + rng() % 8, 20);
    const SelectionMatrix x = gec::testing::random_selection(rng, c);
    Counts expected;
    for (std::size_t i = 0; i < c.systems(); ++i) {
      for (std::size_t j = 0; j < c.types(); ++j) {
        expected.tp += x.x(i, j) * c.tp(i, j);
        expected.fp += x.x(i, j) * c.fp(i, j);
        expected.fn += x.x(i, j) * c.fn(i, j);
      }
    }
    REQUIRE(counts_for_selection(c, x) == expected);
  }
}

TEST_CASE("SelectionMatrix: feasibility, JSON and label checks") {
  std::mt19937_64 rng(31);
  const CountMatrix c = gec::testing::random_counts(rng, 3, 4, 5);
  SelectionMatrix x(c.system_ids, c.type_index);
  CHECK_FALSE(x.feasible());
  CHECK_THROWS_AS(x.validate(), ContractError);
  for (std::size_t j = 0; j < 4; ++j) x.assign(j, j % 3);
  CHECK(x.feasible());
  CHECK(x.assignment() == std::vector<std::size_t>{0, 1, 2, 0});
  x.x(1, 0) = 1;
  CHECK_FALSE(x.feasible());
  x.assign(0, 0);
  CHECK(x.feasible());

  CHECK(selection_from_json(to_json(x)) == x);
  CHECK(x.system_index("sys2") == std::optional<std::size_t>{2});

  auto doc = to_json(x);
  doc["assignment"]["T00"] = "nobody";
  CHECK_THROWS_AS(selection_from_json(doc), DataError);
  auto missing = to_json(x);
  missing["assignment"].erase("T01");
  CHECK_THROWS_AS(selection_from_json(missing), DataError);

  SelectionMatrix relabeled = x;
  relabeled.system_ids[0] = "other";
  CHECK_THROWS_AS(counts_for_selection(c, relabeled), ContractError);

  const std::string tsv = to_tsv(x, c);
  CHECK(tsv.rfind("type\tchosen_system\ttp\tfp\tfn\n", 0) == 0);
}
