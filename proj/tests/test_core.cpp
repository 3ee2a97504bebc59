#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "mtk/core/canonical.hpp"
#include "mtk/core/embedding.hpp"
#include "mtk/core/enumerate.hpp"
#include "mtk/core/text_format.hpp"

using namespace mtk;

namespace {

const Vocabulary kGraph{{"E", 2}};

Structure graph(std::size_t n, const std::vector<std::pair<Element, Element>>& edges) {
  StructureBuilder b(kGraph);
  for (std::size_t i = 0; i < n; ++i) b.add_element("v" + std::to_string(i));
  for (auto [x, y] : edges) {
    b.add(0, {x, y});
    b.add(0, {y, x});
  }
  return b.build();
}

Structure triangle() { return graph(3, {{0, 1}, {1, 2}, {0, 2}}); }
Structure path3() { return graph(3, {{0, 1}, {1, 2}}); }

bool simple_graph(const Structure& s) {
  for (const auto& t : s.relation(0)) {
    if (t[0] == t[1] || !s.holds(0, {t[1], t[0]})) return false;
  }
  return true;
}

// Oracle: every function A -> B checked directly against the definition.
std::size_t brute_force_embedding_count(const Structure& a, const Structure& b, bool iso) {
  std::size_t count = 0;
  for_each_tuple(b.size(), a.size(), [&](const Tuple& t) {
    if (iso && a.size() != b.size()) return;
    if (is_embedding(a, b, Embedding{t})) ++count;
  });
  return count;
}

Structure from_mask(const Vocabulary& v, std::size_t n, std::uint64_t mask) {
  StructureBuilder b(v);
  for (std::size_t i = 0; i < n; ++i) b.add_element("x" + std::to_string(i));
  std::size_t bit = 0;
  for (std::size_t sym = 0; sym < v.size(); ++sym) {
    for_each_tuple(n, v[sym].arity, [&](const Tuple& t) {
      if (mask >> bit & 1U) b.add(sym, t);
      ++bit;
    });
  }
  return b.build();
}

}  // namespace

TEST(BuildStructure, SingleEdgeGraph) {
  auto s = build_structure(kGraph, {"a", "b"}, {{"E", {{"a", "b"}, {"b", "a"}}}});
  EXPECT_EQ(s.size(), 2u);
  EXPECT_TRUE(s.holds("E", {0, 1}));
  EXPECT_TRUE(s.holds("E", {1, 0}));
  EXPECT_FALSE(s.holds("E", {0, 0}));
}

TEST(BuildStructure, UnknownElementIsNamed) {
  try {
    build_structure(kGraph, {"a"}, {{"E", {{"a", "b"}}}});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown element b"), std::string::npos);
  }
}

TEST(BuildStructure, ArityMismatch) {
  EXPECT_THROW(build_structure(kGraph, {"a"}, {{"E", {{"a"}}}}), ValidationError);
}

TEST(BuildStructure, PartitionViolation) {
  Vocabulary v{{"P", 1}, {"Q", 1}};
  v.with_partition("P", "Q");
  try {
    build_structure(v, {"x"}, {{"P", {{"x"}}}, {"Q", {{"x"}}}});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("partition violation"), std::string::npos);
  }
  EXPECT_THROW(build_structure(v, {"x"}, {}), ValidationError);
}

TEST(BuildStructure, SortDiscipline) {
  Vocabulary v{{"P", 1}, {"Q", 1}, {"H", 2}};
  v.with_partition("P", "Q").with_sorts("H", {"Q", "Q"});
  EXPECT_THROW(build_structure(v, {"p", "q"}, {{"P", {{"p"}}}, {"Q", {{"q"}}}, {"H", {{"p", "q"}}}}),
               ValidationError);
  EXPECT_NO_THROW(
      build_structure(v, {"p", "q"}, {{"P", {{"p"}}}, {"Q", {{"q"}}}, {"H", {{"q", "q"}}}}));
}

TEST(Vocabulary, Invariants) {
  EXPECT_THROW(Vocabulary({{"E", 2}, {"E", 1}}), ValidationError);
  EXPECT_THROW(Vocabulary({{"E", 0}}), ValidationError);
  Vocabulary v{{"P", 1}, {"Q", 1}, {"R", 1}};
  v.with_partition("P", "Q");
  EXPECT_THROW(v.with_partition("P", "R"), ValidationError);
  Vocabulary w{{"P", 1}, {"E", 2}};
  EXPECT_THROW(w.with_partition("P", "E"), ValidationError);
}

TEST(InducedSubstructure, TriangleToEdge) {
  auto edge = induced_substructure(triangle(), std::vector<Element>{0, 2});
  EXPECT_EQ(edge.size(), 2u);
  EXPECT_TRUE(is_isomorphic(edge, graph(2, {{0, 1}})));
}

TEST(InducedSubstructure, EmptyAndFull) {
  auto t = triangle();
  auto none = induced_substructure(t, std::vector<Element>{});
  EXPECT_EQ(none.size(), 0u);
  EXPECT_EQ(none.atom_count(), 0u);
  EXPECT_EQ(induced_substructure(t, std::vector<Element>{0, 1, 2}), t);
  EXPECT_THROW(induced_substructure(t, std::vector<Element>{5}), ValidationError);
  EXPECT_THROW(induced_substructure(t, std::vector<std::string>{"zz"}), ValidationError);
}

TEST(InducedSubstructure, Idempotent) {
  auto t = graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}, {1, 3}});
  std::vector<std::string> subset{"v1", "v3", "v4"};
  auto once = induced_substructure(t, subset);
  EXPECT_EQ(induced_substructure(once, subset), once);
}

TEST(Embeddings, SpecCountsAgainstBruteForce) {
  auto vertex = graph(1, {});
  auto edge = graph(2, {{0, 1}});
  EXPECT_EQ(brute_force_embedding_count(vertex, triangle(), false), 3u);
  EXPECT_EQ(brute_force_embedding_count(edge, triangle(), false), 6u);
  EXPECT_EQ(brute_force_embedding_count(triangle(), path3(), true), 0u);

  EXPECT_EQ(enumerate_embeddings(vertex, triangle()).size(), 3u);
  EXPECT_EQ(enumerate_embeddings(edge, triangle()).size(), 6u);
  EXPECT_TRUE(enumerate_embeddings(triangle(), path3(), true).empty());
}

TEST(Embeddings, LexicographicAndDuplicateFree) {
  auto edge = graph(2, {{0, 1}});
  auto es = enumerate_embeddings(edge, triangle());
  std::set<Embedding> seen(es.begin(), es.end());
  EXPECT_EQ(seen.size(), es.size());
  EXPECT_TRUE(std::is_sorted(es.begin(), es.end()));
  EXPECT_EQ(es.front().image, (std::vector<Element>{0, 1}));
}

TEST(Embeddings, VocabularyMismatch) {
  Structure other = build_structure(Vocabulary{{"F", 2}}, {"a"}, {});
  EXPECT_THROW(enumerate_embeddings(other, triangle()), VocabularyMismatch);
}

TEST(Embeddings, MatchBruteForceOnRandomDigraphs) {
  Vocabulary v{{"E", 2}, {"U", 1}};
  std::mt19937_64 rng(7);
  for (int round = 0; round < 200; ++round) {
    std::size_t na = 1 + rng() % 3, nb = na + rng() % 2;
    auto a = from_mask(v, na, rng());
    auto b = from_mask(v, nb, rng());
    ASSERT_EQ(enumerate_embeddings(a, b).size(), brute_force_embedding_count(a, b, false));
  }
}

TEST(Embeddings, CountInvariantUnderRelabeling) {
  std::mt19937_64 rng(11);
  Vocabulary v{{"E", 2}};
  for (int round = 0; round < 50; ++round) {
    auto a = from_mask(v, 2, rng());
    auto b = from_mask(v, 4, rng());
    std::vector<Element> pa{1, 0}, pb{2, 0, 3, 1};
    EXPECT_EQ(enumerate_embeddings(a, b).size(),
              enumerate_embeddings(permuted(a, pa), permuted(b, pb)).size());
  }
}

TEST(CanonicalForm, RelabeledPathsAgree) {
  auto p1 = path3();
  auto p2 = graph(3, {{0, 2}, {2, 1}});
  EXPECT_EQ(canonical_form(p1), canonical_form(p2));
  EXPECT_NE(canonical_form(p1), canonical_form(triangle()));
  EXPECT_FALSE(is_isomorphic(p1, triangle()));
}

TEST(CanonicalForm, EmptyStructureKey) {
  EXPECT_EQ(canonical_form(Structure(kGraph)), "E/2|0|E:");
  EXPECT_EQ(canonical_form(Structure(Vocabulary{})), "|0");
}

// Exhaustive cross-check of canonical keys against isomorphism search.
TEST(CanonicalForm, AgreesWithIsomorphismOnAllSmallDigraphs) {
  Vocabulary v{{"E", 2}};
  for (std::size_t n = 0; n <= 3; ++n) {
    std::vector<Structure> all;
    const std::uint64_t total = std::uint64_t{1} << (n * n);
    for (std::uint64_t m = 0; m < total; ++m) all.push_back(from_mask(v, n, m));
    std::vector<std::string> keys;
    for (const auto& s : all) keys.push_back(canonical_form(s));
    for (std::size_t i = 0; i < all.size(); ++i) {
      for (std::size_t j = i; j < all.size(); ++j) {
        ASSERT_EQ(keys[i] == keys[j], !enumerate_embeddings(all[i], all[j], true).empty())
            << "n=" << n << " i=" << i << " j=" << j;
      }
    }
  }
}

TEST(CanonicalForm, AgreesWithIsomorphismOnGraphsUpToFive) {
  for (std::size_t n = 4; n <= 5; ++n) {
    std::vector<std::pair<Element, Element>> pairs;
    for (Element i = 0; i < n; ++i)
      for (Element j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::map<std::string, std::vector<Structure>> groups;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << pairs.size()); ++m) {
      std::vector<std::pair<Element, Element>> es;
      for (std::size_t k = 0; k < pairs.size(); ++k)
        if (m >> k & 1U) es.push_back(pairs[k]);
      auto g = graph(n, es);
      groups[canonical_form(g)].push_back(g);
    }
    EXPECT_EQ(groups.size(), n == 4 ? 11u : 34u);
    std::vector<const Structure*> reps;
    for (auto& [k, gs] : groups) {
      for (const auto& g : gs) ASSERT_TRUE(is_isomorphic(gs.front(), g));
      reps.push_back(&gs.front());
    }
    for (std::size_t i = 0; i < reps.size(); ++i)
      for (std::size_t j = i + 1; j < reps.size(); ++j)
        ASSERT_FALSE(is_isomorphic(*reps[i], *reps[j]));
  }
}

TEST(CanonicalForm, HandlesLargeSymmetricStructures) {
  // 12 isolated points and K_12: twin pruning keeps this immediate.
  auto empty12 = graph(12, {});
  std::vector<std::pair<Element, Element>> all;
  for (Element i = 0; i < 12; ++i)
    for (Element j = i + 1; j < 12; ++j) all.emplace_back(i, j);
  auto k12 = graph(12, all);
  EXPECT_NE(canonical_form(empty12), canonical_form(k12));
  // a 12-cycle relabeled
  std::vector<std::pair<Element, Element>> cyc, cyc2;
  for (Element i = 0; i < 12; ++i) cyc.emplace_back(i, (i + 1) % 12);
  for (Element i = 0; i < 12; ++i) cyc2.emplace_back((5 * i) % 12, (5 * i + 5) % 12);
  EXPECT_EQ(canonical_form(graph(12, cyc)), canonical_form(graph(12, cyc2)));
}

TEST(EnumerateStructures, SpecCounts) {
  StructureEnumerationOptions graphs;
  graphs.filter = simple_graph;
  EXPECT_EQ(enumerate_structures(kGraph, 3, graphs).size(), 4u);
  EXPECT_EQ(enumerate_structures(kGraph, 0, graphs).size(), 1u);
  for (std::size_t n = 0; n <= 6; ++n) {
    EXPECT_EQ(enumerate_structures(Vocabulary{}, n).size(), 1u);
  }
}

TEST(EnumerateStructures, RawBinaryRelationsMatchKnownCounts) {
  // Binary relations up to isomorphism: 1, 2, 10, 104 (brute-force counts).
  const std::size_t expected[] = {1, 2, 10, 104};
  for (std::size_t n = 0; n <= 3; ++n) {
    EXPECT_EQ(enumerate_structures(kGraph, n).size(), expected[n]);
  }
}

TEST(EnumerateStructures, DuplicateFreeAndCapped) {
  auto all = enumerate_structures(kGraph, 3);
  std::set<std::string> keys;
  for (const auto& s : all) keys.insert(canonical_form(s));
  EXPECT_EQ(keys.size(), all.size());
  StructureEnumerationOptions tight;
  tight.max_candidates = 100;
  EXPECT_THROW(enumerate_structures(kGraph, 3, tight), ResourceLimit);
}

TEST(TextFormat, RoundTripIsByteExact) {
  const std::string text =
      "vocab P/1 Q/1 H/2\n"
      "partition P Q\n"
      "sort H Q Q\n"
      "\n"
      "structure s1\n"
      "domain a c0 c1\n"
      "rel P (a)\n"
      "rel Q (c0) (c1)\n"
      "rel H (c0,c1) (c1,c0)\n"
      "end\n"
      "\n"
      "structure empty\n"
      "domain\n"
      "rel P\n"
      "rel Q\n"
      "rel H\n"
      "end\n";
  auto f = parse_structures(text);
  ASSERT_EQ(f.structures.size(), 2u);
  EXPECT_EQ(emit_structures(f), text);
}

TEST(TextFormat, CommentsAndMergedRelLines) {
  const std::string text =
      "# a graph\n"
      "vocab E/2\n"
      "structure g  # trailing comment\n"
      "domain b a\n"
      "rel E (a,b)\n"
      "rel E (b,a)\n"
      "end\n";
  auto f = parse_structures(text);
  const auto& s = f.structures.at(0).structure;
  EXPECT_EQ(s.relation("E").size(), 2u);
  EXPECT_EQ(emit_structures(f),
            "vocab E/2\n\nstructure g\ndomain b a\nrel E (b,a) (a,b)\nend\n");
}

TEST(TextFormat, ErrorsCarryPositions) {
  try {
    parse_structures("vocab E/2\nstructure g\ndomain a\nrel E (a,b)\nend\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_EQ(e.column(), 7u);
  }
  EXPECT_THROW(parse_structures("vocab E/x\n"), ParseError);
  EXPECT_THROW(parse_structures("vocab E/2\nstructure g\ndomain a\n"), ParseError);
  EXPECT_THROW(parse_structures("structure g\n"), ParseError);
  EXPECT_THROW(parse_structures("vocab E/2\nstructure g\ndomain a\nrel F (a,a)\nend\n"),
               ParseError);
}

TEST(TextFormat, RandomStructuresRoundTrip) {
  Vocabulary v{{"E", 2}, {"U", 1}, {"T", 3}};
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    auto s = from_mask(v, 1 + rng() % 3, rng());
    auto text = emit_structure("s", s);
    auto back = parse_structures(text);
    ASSERT_EQ(back.structures.at(0).structure, s);
    ASSERT_EQ(emit_structures(back), text);
  }
}
