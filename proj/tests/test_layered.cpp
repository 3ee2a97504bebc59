#include <gtest/gtest.h>

#include "mtk/layered/layered.hpp"

using namespace mtk;

namespace {

const char* kGraphChain = R"(# unary colour, then simple graphs on top
layer colour
  add A/1
  class forbid
layer edges
  add E/2
  class forbid
  forbid x : E(x,x)
  forbid x,y : E(x,y) !E(y,x)
)";

// Layer 2 adds a binary symbol that only holds on the diagonal, so greedy
// amalgamation closes every level (coloured graphs would not).
const char* kDiagonalChain = R"(layer colour
  add A/1
  class forbid
layer mark
  add D/2
  class forbid
  forbid x,y : D(x,y)
)";

PresentationOptions quick() {
  PresentationOptions o;
  o.check_bound = 3;
  o.level = 2;
  o.size_cap = 12;
  return o;
}

const LayerPresentation& constants3() {
  static const LayerPresentation p = build_layered_presentation(constants_spec(3), quick());
  return p;
}

const LayerPresentation& diagonal_chain() {
  static const LayerPresentation p = [] {
    auto o = quick();
    o.size_cap = 40;
    return build_layered_presentation(parse_layer_spec(kDiagonalChain), o);
  }();
  return p;
}

}  // namespace

TEST(LayerSpec, ParsesBlocks) {
  auto s = parse_layer_spec(kGraphChain);
  ASSERT_EQ(s.layers.size(), 2u);
  EXPECT_EQ(s.layers[0].name, "colour");
  EXPECT_FALSE(s.layers[0].builtin.has_value());
  ASSERT_EQ(s.layers[1].forbid.size(), 2u);
  EXPECT_EQ(s.layers[1].forbid[1].vars, (std::vector<std::string>{"x", "y"}));
  EXPECT_FALSE(s.layers[1].forbid[1].literals[1].positive);

  auto c = parse_layer_spec("layer\n add lt/2\n class builtin linear-orders\n");
  EXPECT_EQ(c.layers[0].name, "L1");
  EXPECT_EQ(*c.layers[0].builtin, "linear-orders");
}

TEST(LayerSpec, ErrorsCarryPositions) {
  try {
    parse_layer_spec("layer a\n  add E/x\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 7u);
  }
  EXPECT_THROW(parse_layer_spec("add E/2\n"), ParseError);
  EXPECT_THROW(parse_layer_spec("layer\n forbid x : E(x,y)\n"), ParseError);
  EXPECT_THROW(parse_layer_spec("layer\n frobnicate\n"), ParseError);
  EXPECT_THROW(parse_layer_spec("layer\n class maybe\n"), ParseError);
}

TEST(LayeredVocabulary, Validation) {
  EXPECT_THROW(layered_vocabulary({}), ValidationError);
  EXPECT_THROW(layered_vocabulary({{{"E", 2}}, {}}), ValidationError);
  // l_i must strictly increase; no padding repair
  EXPECT_THROW(layered_vocabulary({{{"E", 2}}, {{"F", 2}}}), ValidationError);
  EXPECT_THROW(layered_vocabulary({{{"E", 2}, {"A", 1}}}), ValidationError);
  EXPECT_THROW(layered_vocabulary({{{"H", 2}}}), ValidationError);
  auto v = layered_vocabulary({{{"A", 1}}, {{"E", 2}, {"F", 2}}, {{"T", 3}}});
  EXPECT_EQ(v.arity_bound, (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(v.layers[2].size(), 4u);
}

TEST(ForbiddenClass, MatchesBruteForceGraphs) {
  auto spec = parse_layer_spec(kGraphChain);
  auto k = forbidden_class("g", Vocabulary{{"A", 1}, {"E", 2}}, spec.layers[1].forbid);
  for (std::size_t n = 0; n <= 3; ++n) {
    std::size_t want = 0;
    for (const auto& s : enumerate_structures(k.vocab, n)) {
      bool ok = true;
      for (Element x = 0; x < n; ++x) {
        for (Element y = 0; y < n; ++y) {
          if (s.holds(1, {x, y}) && (x == y || !s.holds(1, {y, x}))) ok = false;
        }
      }
      want += ok;
    }
    EXPECT_EQ(enumerate_age(k, n).size(), want) << n;
  }
  ASSERT_EQ(k.universal_laws.size(), 2u);
  EXPECT_EQ(emit_sentence(k.universal_laws[1]),
            "(forall (x y) (not (and (not (eq x y)) (rel E x y) (not (rel E y x)))))");
}

TEST(Presentation, DenseOrderSingleLayer) {
  auto p = build_layered_presentation(
      parse_layer_spec("layer\n add lt/2\n class builtin linear-orders\n"), quick());
  ASSERT_EQ(p.layers.size(), 1u);
  EXPECT_TRUE(p.layer(1).check.passed());
  EXPECT_EQ(p.layer(1).arity_bound, 2u);
  EXPECT_TRUE(k_membership(p.layer(1).u.structure, p.layer(1).base).member);
}

TEST(Presentation, ConstantsChain) {
  const auto& p = constants3();
  ASSERT_EQ(p.layers.size(), 3u);
  EXPECT_EQ(p.vocab.arity_bound, (std::vector<std::size_t>{3, 4, 5}));
  for (std::size_t i = 1; i <= 3; ++i) {
    EXPECT_TRUE(p.layer(i).check.passed()) << i;
    EXPECT_TRUE(k_membership(p.layer(i).u.structure, p.layer(i).base).member) << i;
  }
  EXPECT_THROW(p.layer(4), ValidationError);
}

TEST(Presentation, Refusals) {
  EXPECT_THROW(build_layered_presentation(LayerSpec{}, quick()), ValidationError);
  try {
    build_layered_presentation(
        parse_layer_spec("layer\n add E/2\n class builtin complete-or-empty\n"), quick());
    FAIL();
  } catch (const LayerRefused& e) {
    EXPECT_EQ(e.layer(), 1u);
    EXPECT_EQ(e.report().jep.verdict, Verdict::fail);
    EXPECT_FALSE(e.report().jep.witness.empty());
  }
  // builtin over the wrong vocabulary
  EXPECT_THROW(build_layered_presentation(
                   parse_layer_spec("layer\n add E/2\n class builtin linear-orders\n"), quick()),
               ValidationError);
}

TEST(LayerAgreement, ConstantsPairsAgree) {
  const auto& p = constants3();
  for (std::size_t i = 1; i <= 3; ++i) {
    for (std::size_t j = i; j <= 3; ++j) {
      auto r = check_layer_agreement(p, i, j, 3);
      EXPECT_TRUE(r.pass) << i << " " << j << ": " << r.failure;
    }
  }
  auto same = check_layer_agreement(p, 2, 2, 3);
  EXPECT_TRUE(same.pass);
  EXPECT_TRUE(same.sizes.empty());
  EXPECT_THROW(check_layer_agreement(p, 2, 1, 3), ValidationError);
}

TEST(LayerAgreement, DeletedMemberIsCaught) {
  const auto& p = constants3();
  // a size-3 member of layer 2 whose layer-1 reduct has no other preimage
  const auto& v1 = p.layer(1).encoded.vocab;
  std::map<std::string, int> preimages;
  for (const auto& m : enumerate_age(p.layer(2).encoded, 3)) {
    ++preimages[canonical_form(reduct(m, v1))];
  }
  std::optional<Structure> victim;
  for (const auto& m : enumerate_age(p.layer(2).encoded, 3)) {
    if (preimages[canonical_form(reduct(m, v1))] == 1) {
      victim = m;
      break;
    }
  }
  ASSERT_TRUE(victim.has_value());
  auto broken = with_deleted_member(p, 2, *victim);
  auto r = check_layer_agreement(broken, 1, 2, 3);
  EXPECT_FALSE(r.pass);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_TRUE(is_isomorphic(r.witness->structure, reduct(*victim, v1)));
  EXPECT_NE(render_agreement(r, false).find("verdict=fail"), std::string::npos);

  // the same fault on the lower layer
  auto lower = with_deleted_member(p, 1, reduct(*victim, v1));
  EXPECT_FALSE(check_layer_agreement(lower, 1, 3, 3).pass);
}

TEST(Stabilization, Examples) {
  const auto& p = constants3();
  auto c1 = parse_sentence("(exists (x) (rel C1 x x x))");
  auto r = detect_stabilization(p, c1, 3);
  ASSERT_TRUE(r.index.has_value());
  EXPECT_EQ(*r.index, 1u);

  // missing symbol counts as false, so C2 stabilises at its own layer
  auto c2 = parse_sentence("(exists (x) (rel C2 x x x x))");
  r = detect_stabilization(p, c2, 3);
  EXPECT_EQ(r.holds, (std::vector<bool>{false, true, true}));
  EXPECT_EQ(*r.index, 2u);

  auto never = parse_sentence("(exists (x) (rel lt x x))");
  r = detect_stabilization(p, never, 3);
  EXPECT_FALSE(r.index.has_value());
  EXPECT_NE(render_stabilization(r, never).find("unstable at horizon 3"), std::string::npos);

  r = detect_stabilization(p, never, 0);
  EXPECT_EQ(*r.index, 0u);
  EXPECT_TRUE(r.holds.empty());
  EXPECT_EQ(detect_stabilization(p, c1, 9).horizon, 3u);
}

TEST(Stabilization, LayerAxiomsHoldFromTheirLayer) {
  const auto& p = diagonal_chain();
  for (std::size_t i = 1; i <= 2; ++i) {
    ASSERT_TRUE(p.layer(i).approx.saturated) << i;
    AxiomBudget b;
    b.n = 2;
    b.schemes = {Scheme::a, Scheme::c, Scheme::d};
    const auto axioms = generate_axioms(p.layer(i).base, b);
    ASSERT_FALSE(axioms.empty());
    for (const auto& ax : axioms) {
      auto r = detect_stabilization(p, relativize(ax), 2);
      ASSERT_TRUE(r.index.has_value()) << emit_tagged(ax);
      EXPECT_LE(*r.index, i) << emit_tagged(ax);
    }
  }
}

TEST(Relativize, GuardsEachQuantifier) {
  auto s = parse_sentence("(forall (x) (exists (y) (rel E x y)))");
  EXPECT_EQ(emit_sentence(relativize(s)),
            "(forall (x) (exists (y) (implies (rel P x) (and (rel P y) (rel E x y)))))");
}

TEST(BackAndForth, IdenticalEncodings) {
  const auto& g = constants3().layer(2).approx.structure;
  auto u = encode_all(g);
  auto r = back_and_forth_over_P(u, u, 2);
  EXPECT_TRUE(r.success);
  for (Element x = 0; x < u.structure.size(); ++x) {
    ASSERT_TRUE(r.forward[x].has_value());
    EXPECT_EQ(*r.forward[x], x);
  }
}

TEST(BackAndForth, ShuffledAndReordered) {
  const auto& g = constants3().layer(3).approx.structure;
  auto u1 = encode_all(g);
  auto u2 = variant_encoding(g, 99);
  auto r = back_and_forth_over_P(u1, u2, 2);
  EXPECT_TRUE(r.success) << r.witness;
  EXPECT_EQ(r.rounds_completed, 2u);
  // the result is an isomorphism
  Embedding e;
  for (auto m : r.forward) e.image.push_back(*m);
  EXPECT_TRUE(is_embedding(u1.structure, u2.structure, e));
}

TEST(BackAndForth, ExtraGadgetIsTheWitness) {
  const auto& g = constants3().layer(1).approx.structure;
  auto u1 = encode_all(g);
  auto u2 = variant_encoding(g, 0, 3);
  const auto extra = u2.registry.back();
  auto r = back_and_forth_over_P(u1, u2, 2);
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.rounds_completed, 1u);
  EXPECT_NE(r.witness.find("round 2 (back)"), std::string::npos);
  EXPECT_NE(r.witness.find(u2.structure.name(extra.c[0])), std::string::npos) << r.witness;
  // depth 1 does not look at U'' at all
  EXPECT_TRUE(back_and_forth_over_P(u1, u2, 1).success);
}

TEST(BackAndForth, MismatchedPParts) {
  const auto& p = constants3();
  auto u1 = encode_all(p.layer(1).approx.structure);
  std::vector<Element> keep;
  for (Element x = 1; x < p.layer(1).approx.structure.size(); ++x) keep.push_back(x);
  auto u2 = encode_all(induced_substructure(p.layer(1).approx.structure, keep));
  EXPECT_THROW(back_and_forth_over_P(u1, u2, 2), PPartMismatch);
  // same size, wrong identification
  std::vector<std::size_t> swap(p.layer(1).approx.structure.size());
  std::iota(swap.begin(), swap.end(), 0);
  std::swap(swap[0], swap[1]);
  EXPECT_THROW(back_and_forth_over_P(u1, u1, 2, swap), PPartMismatch);
}
