#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "mtk/encoder/encode.hpp"
#include "mtk/fraisse/properties.hpp"
#include "mtk/fraisse/types.hpp"
#include "mtk/gadget/gadget.hpp"
#include "mtk/logic/evaluate.hpp"

using namespace mtk;

namespace {

std::vector<Tuple> subsets(std::size_t n, std::size_t p) {
  std::vector<Tuple> out;
  for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != p) continue;
    Tuple t;
    for (Element x = 0; x < n; ++x) {
      if (mask >> x & 1U) t.push_back(x);
    }
    out.push_back(t);
  }
  return out;
}

void partitions(std::size_t k, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> lab(k);
  std::function<void(std::size_t, int)> go = [&](std::size_t i, int used) {
    if (i == k) {
      f(lab);
      return;
    }
    for (int c = 0; c <= used; ++c) {
      lab[i] = c;
      go(i + 1, c == used ? used + 1 : used);
    }
  };
  go(0, 0);
}

// Isomorphism types of models of size n at m = 0, counted on the abstract
// data (a partition of the 2-sets, a partition of the 3-sets, and a set of
// 2-set classes for P*0) up to relabelling the n points.
std::size_t abstract_count(std::size_t n, bool live) {
  const auto s2 = subsets(n, 2), s3 = subsets(n, 3);
  std::set<std::vector<std::vector<Tuple>>> seen;
  std::vector<Element> perm(n);
  auto image = [&](const Tuple& t) {
    Tuple u;
    for (auto x : t) u.push_back(perm[x]);
    std::sort(u.begin(), u.end());
    return u;
  };
  partitions(s2.size(), [&](const std::vector<int>& c2) {
    const int k2 = c2.empty() ? 0 : *std::max_element(c2.begin(), c2.end()) + 1;
    partitions(s3.size(), [&](const std::vector<int>& c3) {
      for (std::uint32_t pm = 0; pm < (live ? 1U << k2 : 1U); ++pm) {
        std::vector<std::vector<Tuple>> best;
        std::iota(perm.begin(), perm.end(), 0);
        do {
          // each class as a sorted list of sets, then sorted; P classes tagged
          std::vector<std::vector<Tuple>> rep;
          std::map<int, std::vector<Tuple>> g2, g3;
          for (std::size_t i = 0; i < s2.size(); ++i) g2[c2[i]].push_back(image(s2[i]));
          for (std::size_t i = 0; i < s3.size(); ++i) g3[c3[i]].push_back(image(s3[i]));
          for (auto& [c, v] : g2) {
            std::sort(v.begin(), v.end());
            v.insert(v.begin(), Tuple{2, (pm >> c & 1U)});
            rep.push_back(v);
          }
          for (auto& [c, v] : g3) {
            std::sort(v.begin(), v.end());
            v.insert(v.begin(), Tuple{3});
            rep.push_back(v);
          }
          std::sort(rep.begin(), rep.end());
          if (best.empty() || rep < best) best = rep;
        } while (std::next_permutation(perm.begin(), perm.end()));
        seen.insert(best);
      }
    });
  });
  return seen.size();
}

Structure first_member_with(const GadgetTheory& g, std::size_t n,
                            const std::function<bool(const Structure&)>& pick) {
  for (const auto& s : enumerate_age(g.k, n)) {
    if (pick(s)) return s;
  }
  throw std::runtime_error("no such member");
}

Structure without_tuple(const Structure& s, std::size_t sym, const Tuple& t) {
  StructureBuilder b(s);
  b.remove(sym, t);
  return b.build_unchecked();
}

bool satisfies_laws(const GadgetTheory& g, const Structure& s) {
  for (const auto& l : g.k.universal_laws) {
    if (!evaluate(s, l)) return false;
  }
  return true;
}

}  // namespace

TEST(Pairing, Examples) {
  EXPECT_EQ(code_pair(0, 0), 0U);
  EXPECT_EQ(code_pair(1, 0), 1U);
  EXPECT_EQ(code_pair(0, 1), 2U);
  EXPECT_EQ(decode_pair(code_pair(7, 5)), std::make_pair(std::uint64_t{7}, std::uint64_t{5}));
  for (std::uint64_t m = 0; m < 5000; ++m) {
    auto [i, j] = decode_pair(m);
    ASSERT_EQ(code_pair(i, j), m);
  }
  const std::uint64_t big = 3'000'000'000ULL;
  EXPECT_EQ(decode_pair(code_pair(big, big + 7)), std::make_pair(big, big + 7));
}

TEST(Pairing, Primes) {
  const std::vector<std::uint64_t> want{2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(nth_prime(i), want[i]);
  EXPECT_EQ(nth_prime(99), 541U);
}

TEST(Arity, FirstValues) {
  EXPECT_EQ(arity_a()(0), 3);
  EXPECT_EQ(arity_a()(1), 4);
  EXPECT_EQ(arity_a()(2), 7);
  EXPECT_EQ(layer_bound(0), 6);
  EXPECT_EQ(layer_bound(1), 12);
  EXPECT_EQ(layer_bound(2), 14);
}

TEST(Arity, MinimalAndMonotone) {
  // oracle: the least value above a(x) whose product beats the previous one
  BigNat a = 3;
  for (std::uint64_t x = 0; x < 1000; ++x) {
    ASSERT_EQ(arity_a()(x), a) << x;
    const auto p0 = nth_prime(decode_pair(x).first), p1 = nth_prime(decode_pair(x + 1).first);
    BigNat next = a + 1;
    if (next * p1 <= a * p0) next = a * p0 / p1 + 1;
    ASSERT_GT(next * p1, a * p0);
    ASSERT_TRUE(next - 1 == a || (next - 1) * p1 <= a * p0);
    a = next;
    ASSERT_GT(layer_bound(x + 1), layer_bound(x));
  }
}

TEST(GadgetClass, VocabularyLayout) {
  const auto g = build_gadget_class({}, 0);
  std::vector<std::string> names;
  for (const auto& s : g.vocab().symbols()) names.push_back(s.name + "/" + std::to_string(s.arity));
  EXPECT_EQ(names, (std::vector<std::string>{"Z1/1", "Z2/2", "Z3/3", "E0/4", "Z5/5", "E1/6", "P*0/6"}));
  EXPECT_EQ(g.shared_arities, std::vector<std::size_t>{6});
  for (const auto& q : g.info) EXPECT_FALSE(q.live);

  const auto g1 = build_gadget_class({1, 2}, 1);
  EXPECT_EQ(g1.l, 12U);
  EXPECT_EQ(g1.outside, std::vector<std::uint64_t>{2});  // P*2 has arity 14
  EXPECT_TRUE(g1.info[g1.vocab().index_of("P*1")].live);
  EXPECT_EQ(g1.vocab()[g1.vocab().index_of("P*1")].arity, 12U);

  EXPECT_EQ(build_gadget_class({1}, 0).outside, std::vector<std::uint64_t>{1});
  EXPECT_THROW(build_gadget_class({7}, 0), ValidationError);
}

TEST(GadgetClass, MemberCountsMatchAbstractCount) {
  for (bool live : {false, true}) {
    const auto g = build_gadget_class(live ? std::set<std::uint64_t>{0} : std::set<std::uint64_t>{}, 0);
    for (std::size_t n = 1; n <= 3; ++n) {
      EXPECT_EQ(enumerate_age(g.k, n).size(), abstract_count(n, live)) << live << " " << n;
    }
  }
  EXPECT_EQ(abstract_count(3, false), 3U);
  EXPECT_EQ(abstract_count(3, true), 10U);
}

TEST(GadgetClass, MembershipRejections) {
  const auto g = build_gadget_class({0}, 0);
  const auto e0 = g.vocab().index_of("E0"), p0 = g.vocab().index_of("P*0");
  // two 2-sets in one class: {0,1} ~ {0,2} ~ {1,2}
  const auto s = first_member_with(g, 3, [&](const Structure& m) {
    return m.holds(e0, {0, 1, 0, 2}) && m.holds(e0, {0, 2, 1, 2}) && !m.relation(p0).empty();
  });
  ASSERT_TRUE(g.k.member(s));
  ASSERT_TRUE(satisfies_laws(g, s));

  // transitivity: drop both directions of {0,1} ~ {1,2}
  StructureBuilder b(s);
  for (const Tuple& t : {Tuple{0, 1, 1, 2}, Tuple{1, 2, 0, 1}, Tuple{1, 0, 1, 2}, Tuple{1, 2, 1, 0},
                         Tuple{0, 1, 2, 1}, Tuple{2, 1, 0, 1}, Tuple{1, 0, 2, 1}, Tuple{2, 1, 1, 0}}) {
    b.remove(e0, t);
  }
  const auto broken = b.build_unchecked();
  EXPECT_FALSE(g.k.member(broken));
  EXPECT_FALSE(satisfies_laws(g, broken));

  // invariance: drop one tuple of P*0
  const auto t = s.relation(p0).back();
  const auto thin = without_tuple(s, p0, t);
  EXPECT_FALSE(g.k.member(thin));
  EXPECT_FALSE(satisfies_laws(g, thin));

  // a dead predicate must stay empty
  const auto dead = build_gadget_class({}, 0);
  EXPECT_FALSE(dead.k.member(s));
}

TEST(GadgetClass, LawsHoldOnMembers) {
  const auto g = build_gadget_class({0}, 0);
  for (std::size_t n = 0; n <= 3; ++n) {
    for (const auto& s : enumerate_age(g.k, n)) ASSERT_TRUE(satisfies_laws(g, s));
  }
}

TEST(GadgetClass, PropertiesAtBoundThree) {
  for (const auto& d : {std::set<std::uint64_t>{}, std::set<std::uint64_t>{0}}) {
    const auto g = build_gadget_class(d, 0);
    const auto r = check_class_properties(g.k, 3);
    EXPECT_TRUE(r.passed()) << render_class_report(r, true);
  }
}

TEST(GadgetClass, SortQuotient) {
  const auto g = build_gadget_class({0}, 0);
  const auto q = sort_quotient_class(g.d, 0);
  for (const auto& s : enumerate_age(g.k, 3)) {
    const auto r = sort_quotient(g, s, 0);
    EXPECT_EQ(r.vocabulary().size(), 1U);
    EXPECT_GE(r.size(), 1U);
    EXPECT_LE(r.size(), 3U);
  }
}

TEST(SortTypes, PowersOfTwo) {
  EXPECT_EQ(count_sort_types(std::set<std::uint64_t>{}, 0), 1);
  // codes 0 and 2 lie on sort 0, code 1 on sort 1
  EXPECT_EQ(count_sort_types(std::set<std::uint64_t>{0, 2}, 0), 4);
  EXPECT_EQ(count_sort_types(std::set<std::uint64_t>{0, 2, 5}, 0), 8);
  EXPECT_EQ(count_sort_types(std::set<std::uint64_t>{0, 1, 2}, 1), 2);
  EXPECT_EQ(count_sort_types(build_gadget_class({0}, 0), 0), 2);
}

TEST(SortTypes, MatchBooleanCombinations) {
  // sort-0 codes: 0, 2, 5, 9, ...
  std::vector<std::uint64_t> sort0;
  for (std::uint64_t c = 0; sort0.size() < 3; ++c) {
    if (decode_pair(c).first == 0) sort0.push_back(c);
  }
  std::set<std::uint64_t> d;
  for (std::size_t k = 0; k <= 3; ++k) {
    if (k) d.insert(sort0[k - 1]);
    d.insert(1);  // a sort-1 code that must not count
    const auto q = sort_quotient_class(d, 0);
    EXPECT_EQ(BigNat(type_count(q, 1)), count_sort_types(d, 0)) << k;
  }
}

TEST(Tables, ParseAndEmit) {
  const auto t = parse_table("# e n x\n0 0 5\n\n1 2 3  # trailing\n");
  ASSERT_EQ(t.rows.size(), 2U);
  EXPECT_EQ(t.rows[1], (Triple{1, 2, 3}));
  EXPECT_EQ(emit_table(t), "0 0 5\n1 2 3\n");
  try {
    parse_table("0 0 1\n0 x 1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2U);
    EXPECT_EQ(e.column(), 3U);
  }
  EXPECT_THROW(parse_table("1 2\n"), ParseError);
}

TEST(ComputeD, Examples) {
  EXPECT_TRUE(compute_D({}, 0, 3).empty());
  EXPECT_EQ(compute_D(parse_table("0 0 0\n"), 0, 0), std::set<std::uint64_t>{0});
  // duplicate at positions 0 and 3
  const auto t = parse_table("0 0 4\n1 0 0\n0 1 1\n0 0 4\n");
  const auto d = compute_D(t, 0, 2);
  EXPECT_EQ(d, (std::set<std::uint64_t>{code_pair(0, 0), code_pair(1, 2)}));
  EXPECT_FALSE(d.count(code_pair(0, 3)));
  EXPECT_EQ(compute_D(t, 1, 2), std::set<std::uint64_t>{code_pair(0, 1)});
}

TEST(ComputeD, CoherentAcrossHorizons) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto t = random_table(seed, 12, 2, 3, 4);
    for (std::uint64_t e = 0; e < 2; ++e) {
      for (std::uint64_t s = 0; s < 4; ++s) {
        for (std::uint64_t u = s + 1; u <= 4; ++u) {
          std::set<std::uint64_t> cut;
          for (auto c : compute_D(t, e, u)) {
            if (BigNat(c) <= layer_bound(s)) cut.insert(c);
          }
          ASSERT_EQ(cut, compute_D(t, e, s)) << seed;
        }
      }
    }
  }
}

TEST(Verdict, Examples) {
  const auto empty = categoricity_verdict(parse_table("1 0 0\n"), 0, 2);
  EXPECT_TRUE(empty.categorical);
  for (const auto& s : empty.sorts) EXPECT_EQ(s.shadow, 0U);

  std::string text;
  for (int x = 0; x < 10; ++x) text += "0 0 " + std::to_string(x) + "\n";
  const auto t = parse_table(text);
  const auto grow = categoricity_verdict(t, 0, 1);
  EXPECT_FALSE(grow.categorical);
  EXPECT_TRUE(grow.sorts[0].flagged);
  for (std::size_t k = 1; k <= t.rows.size(); ++k) EXPECT_EQ(sort_shadows(t, 0, 1, k)[0], k);
  const auto out = render_verdict(grow, false);
  EXPECT_NE(out.find("verdict=flagged"), std::string::npos);
  EXPECT_NE(out.find("not a proof"), std::string::npos);
}

TEST(Verdict, RecountAndPrefixMonotone) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto t = random_table(seed, 40, 2, 3, 12);
    const auto r = categoricity_verdict(t, 1, 2, 6);
    bool categorical = true;
    for (std::uint64_t n = 0; n <= 2; ++n) {
      std::set<std::uint64_t> xs;
      for (const auto& row : t.rows) {
        if (row.e == 1 && row.n == n) xs.insert(row.x);
      }
      ASSERT_EQ(r.sorts[n].shadow, xs.size());
      ASSERT_EQ(r.sorts[n].flagged, xs.size() >= 6);
      categorical = categorical && xs.size() < 6;
    }
    ASSERT_EQ(r.categorical, categorical);
    std::vector<std::size_t> prev(3, 0);
    for (std::size_t k = 0; k <= t.rows.size(); ++k) {
      const auto now = sort_shadows(t, 1, 2, k);
      for (std::size_t n = 0; n < 3; ++n) ASSERT_GE(now[n], prev[n]);
      prev = now;
    }
  }
}

TEST(GadgetAxioms, BudgetZeroIsEmpty) {
  const auto g = build_gadget_class({}, 0);
  const auto a = assemble_gadget_axioms(g, {0, 0, {Scheme::a}});
  EXPECT_TRUE(a.one_sorted.empty());
  EXPECT_TRUE(a.rewritten.empty());
}

TEST(GadgetAxioms, TinyBudgetIsEquivalenceLaws) {
  const auto g = build_gadget_class({}, 0);
  const auto a = assemble_gadget_axioms(g, {2, 0, {Scheme::a}});
  std::vector<std::string> got;
  for (const auto& s : a.one_sorted) got.push_back(emit_sentence(s));
  EXPECT_EQ(got, (std::vector<std::string>{
                     "(forall (x1) (not (rel Z1 x1)))",
                     "(forall (x1 x2) (not (rel Z2 x1 x2)))",
                     "(forall (x1 x2) (rel E0 x1 x2 x1 x2))",
                     "(forall (x1 x2) (rel E0 x1 x2 x2 x1))",
                 }));
  ASSERT_EQ(a.rewritten.size(), a.one_sorted.size());
  const auto text = emit_gadget_axioms(g, a);
  EXPECT_NE(text.find("# L-rewrites"), std::string::npos);
}

TEST(GadgetAxioms, RewriteOfAnAtomAssertsAPair) {
  const Vocabulary l0{{"R1", 1}, {"R2", 2}};
  const auto phi = parse_sentence("(exists (x) (rel R1 x))", l0);
  const auto rw = rewrite_to_L(phi, l0);
  EXPECT_EQ(rw.prefix.size(), 2U);
  EXPECT_EQ(rw.prefix[1].q, Quantifier::exists);
  const auto sym = parse_sentence("(forall (x y) (implies (rel R2 x y) (rel R2 y x)))", l0);
  const auto rs = rewrite_to_L(sym, l0);

  std::size_t checked = 0;
  for (std::size_t n = 1; n <= 2; ++n) {
    for (const auto& a : enumerate_structures(l0, n)) {
      const auto u = l_reduct(encode(a, label_all(a)).structure);
      EXPECT_EQ(evaluate(u, rw), evaluate(a, phi)) << emit_structure("a", a);
      EXPECT_EQ(evaluate(u, rs), evaluate(a, sym)) << emit_structure("a", a);
      ++checked;
    }
  }
  EXPECT_GT(checked, 10U);
}
