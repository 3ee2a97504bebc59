#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <random>
#include <set>

#include "mtk/core/embedding.hpp"
#include "mtk/core/enumerate.hpp"
#include "mtk/logic/evaluate.hpp"
#include "mtk/logic/qf_type.hpp"
#include "mtk/logic/sentence.hpp"

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

// Oracle: interprets the AST directly under a name-keyed environment.
bool naive_formula(const Structure& s, const Formula& f, std::map<std::string, Element>& env) {
  switch (f.kind) {
    case Formula::Kind::rel: {
      Tuple t;
      for (const auto& v : f.vars) t.push_back(env.at(v));
      const auto& r = s.relation(f.symbol);
      return std::find(r.begin(), r.end(), t) != r.end();
    }
    case Formula::Kind::eq: return env.at(f.vars[0]) == env.at(f.vars[1]);
    case Formula::Kind::negation: return !naive_formula(s, f.children[0], env);
    case Formula::Kind::conjunction: {
      bool r = true;
      for (const auto& c : f.children) r = r && naive_formula(s, c, env);
      return r;
    }
    case Formula::Kind::disjunction: {
      bool r = false;
      for (const auto& c : f.children) r = r || naive_formula(s, c, env);
      return r;
    }
    case Formula::Kind::implication:
      return !naive_formula(s, f.children[0], env) || naive_formula(s, f.children[1], env);
  }
  return false;
}

bool naive_eval(const Structure& s, const Sentence& phi, std::size_t d,
                std::map<std::string, Element>& env) {
  if (d == phi.prefix.size()) return naive_formula(s, phi.matrix, env);
  std::vector<bool> results;
  for (Element e = 0; e < s.size(); ++e) {
    env[phi.prefix[d].var] = e;
    results.push_back(naive_eval(s, phi, d + 1, env));
  }
  if (phi.prefix[d].q == Quantifier::forall) {
    return std::all_of(results.begin(), results.end(), [](bool b) { return b; });
  }
  return std::any_of(results.begin(), results.end(), [](bool b) { return b; });
}

bool naive_eval(const Structure& s, const Sentence& phi) {
  std::map<std::string, Element> env;
  return naive_eval(s, phi, 0, env);
}

Formula random_formula(std::mt19937_64& rng, const std::vector<std::string>& vars, int depth) {
  auto var = [&] { return vars[rng() % vars.size()]; };
  int pick = depth <= 0 ? static_cast<int>(rng() % 3) : static_cast<int>(rng() % 7);
  switch (pick) {
    case 0:
    case 1: return Formula::rel("E", {var(), var()});
    case 2: return Formula::eq(var(), var());
    case 3: return Formula::negate(random_formula(rng, vars, depth - 1));
    case 4:
      return Formula::all_of(
          {random_formula(rng, vars, depth - 1), random_formula(rng, vars, depth - 1)});
    case 5:
      return Formula::any_of(
          {random_formula(rng, vars, depth - 1), random_formula(rng, vars, depth - 1)});
    default:
      return Formula::implies(random_formula(rng, vars, depth - 1),
                              random_formula(rng, vars, depth - 1));
  }
}

}  // namespace

TEST(ParseSentence, SymmetrySentence) {
  auto s = parse_sentence("(forall (x y) (implies (rel E x y) (rel E y x)))", kGraph);
  ASSERT_EQ(s.prefix.size(), 2u);
  EXPECT_EQ(s.prefix[0].q, Quantifier::forall);
  EXPECT_EQ(s.matrix.kind, Formula::Kind::implication);
  EXPECT_EQ(emit_sentence(s), "(forall (x y) (implies (rel E x y) (rel E y x)))");
}

TEST(ParseSentence, Nonemptiness) {
  auto s = parse_sentence("(exists (x) (eq x x))", kGraph);
  EXPECT_TRUE(evaluate(graph(1, {}), s));
  EXPECT_FALSE(evaluate(graph(0, {}), s));
}

TEST(ParseSentence, UnboundVariable) {
  try {
    parse_sentence("(forall (x) (rel E x y))", kGraph);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("unbound y"), std::string::npos);
  }
}

TEST(ParseSentence, Errors) {
  EXPECT_THROW(parse_sentence("(forall (x) (rel E x))", kGraph), ParseError);
  EXPECT_THROW(parse_sentence("(forall (x x) (eq x x))", kGraph), ParseError);
  EXPECT_THROW(parse_sentence("(and (forall (x) (eq x x)))", kGraph), ParseError);
  EXPECT_THROW(parse_sentence("(forall (x) (frob x))", kGraph), ParseError);
  EXPECT_THROW(parse_sentence("(forall (x) (eq x x)", kGraph), ParseError);
  EXPECT_THROW(parse_sentence("(forall (x) (eq x x))) ", kGraph), ParseError);
  try {
    parse_sentence("(forall (x) (bogus x))", kGraph);
  } catch (const ParseError& e) {
    EXPECT_EQ(e.column(), 14u);
  }
}

TEST(ParseSentence, NestedBlocksMerge) {
  auto s = parse_sentence("(forall (x) (forall (y) (exists (z) (and))))");
  EXPECT_EQ(emit_sentence(s), "(forall (x y) (exists (z) (and)))");
  EXPECT_EQ(parse_sentence(emit_sentence(s)), s);
}

TEST(ParseSentence, RoundTripRandom) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    Sentence s;
    std::vector<std::string> vars{"x1", "x2", "x3"};
    for (const auto& v : vars) {
      s.prefix.push_back({rng() % 2 ? Quantifier::forall : Quantifier::exists, v});
    }
    s.matrix = random_formula(rng, vars, 3);
    auto text = emit_sentence(s);
    ASSERT_EQ(parse_sentence(text, kGraph), s) << text;
    ASSERT_EQ(emit_sentence(parse_sentence(text, kGraph)), text);
  }
}

TEST(AxiomFile, TaggedLines) {
  const std::string text =
      "# demo\n[a] (forall (x1) (not (rel E x1 x1)))\n\n[c] (exists (x1) (and))\n(and)\n";
  auto axioms = parse_axiom_file(text, &kGraph);
  ASSERT_EQ(axioms.size(), 3u);
  EXPECT_EQ(axioms[0].scheme, Scheme::a);
  EXPECT_EQ(axioms[1].scheme, Scheme::c);
  EXPECT_EQ(axioms[2].scheme, Scheme::none);
  EXPECT_EQ(emit_axiom_file(axioms),
            "[a] (forall (x1) (not (rel E x1 x1)))\n[c] (exists (x1) (and))\n(and)\n");
  try {
    parse_axiom_file("[a] (and)\n[q] (and)\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Evaluate, SymmetryOnTriangle) {
  auto sym = parse_sentence("(forall (x y) (implies (rel E x y) (rel E y x)))", kGraph);
  EXPECT_TRUE(evaluate(graph(3, {{0, 1}, {1, 2}, {0, 2}}), sym));
}

TEST(Evaluate, IsolatedVertexFailsNeighbourAxiom) {
  auto phi = parse_sentence(
      "(forall (x) (exists (y) (and (rel E x y) (not (eq x y)))))", kGraph);
  auto g = graph(3, {{0, 1}});
  EXPECT_FALSE(evaluate(g, phi));
  EXPECT_EQ(evaluate(g, phi), naive_eval(g, phi));
  EXPECT_TRUE(evaluate(graph(2, {{0, 1}}), phi));
}

TEST(Evaluate, VacuousOnEmptyStructure) {
  auto phi = parse_sentence("(forall (x y) (and (rel E x y) (not (rel E x y))))", kGraph);
  EXPECT_TRUE(evaluate(Structure(kGraph), phi));
  EXPECT_FALSE(evaluate(Structure(kGraph), parse_sentence("(exists (x) (and))")));
}

TEST(Evaluate, VocabularyMismatchAndCap) {
  auto phi = parse_sentence("(forall (x) (rel F x))");
  EXPECT_THROW(evaluate(graph(2, {}), phi), VocabularyMismatch);
  auto deep = parse_sentence("(forall (a b c d) (and))");
  EvaluationOptions tight;
  tight.max_assignments = 100;
  EXPECT_THROW(evaluate(graph(4, {}), deep, tight), ResourceLimit);
  EXPECT_TRUE(evaluate(graph(3, {}), deep, tight));
}

TEST(Evaluate, ReductSemanticsOnRicherStructure) {
  Vocabulary v{{"E", 2}, {"U", 1}};
  auto s = build_structure(v, {"a", "b"}, {{"E", {{"a", "b"}}}, {"U", {{"a"}}}});
  EXPECT_TRUE(evaluate(s, parse_sentence("(exists (x y) (rel E x y))", kGraph)));
}

// Exhaustive over all digraphs with at most 3 elements plus sampled 4-element
// ones, random sentences with up to 4 quantifiers.
TEST(Evaluate, AgreesWithNaiveOracle) {
  std::mt19937_64 rng(17);
  std::vector<Structure> structures;
  for (std::size_t n = 0; n <= 3; ++n) {
    for (const auto& s : enumerate_structures(kGraph, n)) structures.push_back(s);
  }
  for (int i = 0; i < 40; ++i) {
    StructureBuilder b(kGraph);
    for (int k = 0; k < 4; ++k) b.add_element("e" + std::to_string(k));
    for (Element x = 0; x < 4; ++x)
      for (Element y = 0; y < 4; ++y)
        if (rng() % 3 == 0) b.add(0, {x, y});
    structures.push_back(b.build());
  }
  for (int round = 0; round < 150; ++round) {
    Sentence phi;
    std::size_t q = 1 + rng() % 4;
    std::vector<std::string> vars;
    for (std::size_t i = 0; i < q; ++i) {
      vars.push_back("x" + std::to_string(i + 1));
      phi.prefix.push_back({rng() % 2 ? Quantifier::forall : Quantifier::exists, vars.back()});
    }
    phi.matrix = random_formula(rng, vars, 3);
    for (const auto& s : structures) {
      ASSERT_EQ(evaluate(s, phi), naive_eval(s, phi)) << emit_sentence(phi);
    }
  }
}

TEST(QfTypeTest, PureSetRepeat) {
  Vocabulary none;
  auto s = build_structure(none, {"a", "b"}, {});
  auto t = qf_type(s, std::vector<std::string>{"a", "a"});
  EXPECT_EQ(t.pattern, (std::vector<std::size_t>{0, 0}));
  EXPECT_EQ(t.blocks(), 1u);
}

TEST(QfTypeTest, TriangleEdge) {
  auto tri = graph(3, {{0, 1}, {1, 2}, {0, 2}});
  auto t = qf_type(tri, std::vector<Element>{0, 1});
  EXPECT_EQ(t.pattern, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(t.atoms[0], (std::vector<Tuple>{{0, 1}, {1, 0}}));
}

TEST(QfTypeTest, EmptyTuple) {
  auto t1 = qf_type(graph(3, {{0, 1}}), std::vector<Element>{});
  auto t2 = qf_type(graph(0, {}), std::vector<Element>{});
  EXPECT_EQ(t1, t2);
  EXPECT_EQ(t1.length, 0u);
  EXPECT_THROW(qf_type(graph(1, {}), std::vector<Element>{3}), ValidationError);
}

TEST(QfTypeTest, PreservedByEmbeddings) {
  auto a = graph(3, {{0, 1}});
  auto b = graph(5, {{0, 1}, {1, 2}, {3, 4}, {0, 4}});
  for (const auto& e : enumerate_embeddings(a, b)) {
    for_each_tuple(3, 3, [&](const Tuple& t) {
      Tuple u;
      for (auto x : t) u.push_back(e.image[x]);
      ASSERT_EQ(qf_type(a, t), qf_type(b, u));
    });
  }
}
