// Acceptance suite: one PASS/FAIL line per criterion. Usage: acceptance PATH_TO_MTK
// Exits 1 if any criterion fails.

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mtk/axioms/forge.hpp"
#include "mtk/encoder/k_class.hpp"
#include "mtk/fraisse/builtin.hpp"
#include "mtk/fraisse/generic.hpp"
#include "mtk/fraisse/properties.hpp"
#include "mtk/fraisse/types.hpp"
#include "mtk/gadget/gadget.hpp"
#include "mtk/layered/layered.hpp"

using namespace mtk;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// --- round trip -------------------------------------------------------------

const Vocabulary kL0{{"R1", 1}, {"R2", 2}, {"R3", 3}};

std::vector<Label> slots(std::size_t n) {
  std::vector<Label> out;
  for (std::size_t sym = 0; sym < kL0.size(); ++sym) {
    for_each_tuple(n, kL0[sym].arity, [&](const Tuple& t) { out.push_back({sym + 1, t}); });
  }
  return out;
}

// The structure with exactly the labelled tuples, then decode(encode(.)).
bool round_trips(std::size_t n, const std::vector<Label>& t) {
  StructureBuilder b(kL0);
  for (std::size_t i = 0; i < n; ++i) b.add_element("p" + std::to_string(i));
  for (const auto& l : t) b.add(l.n - 1, l.tuple);
  const auto a = b.build();
  const auto back = decode(l_reduct(encode(a, t).structure), kL0);
  if (back.size() != n) return false;
  std::set<Label> want(t.begin(), t.end()), got;
  for (std::size_t sym = 0; sym < kL0.size(); ++sym) {
    for (const auto& u : back.relation(sym)) got.insert({sym + 1, u});
  }
  return want == got;
}

Outcome ac1() {
  std::size_t cases = 0, bad = 0;
  for (std::size_t n = 0; n <= 2; ++n) {
    const auto s = slots(n);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << s.size()); ++mask) {
      std::vector<Label> t;
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (mask >> i & 1U) t.push_back(s[i]);
      }
      ++cases;
      bad += !round_trips(n, t);
    }
  }
  std::mt19937_64 rng(17);
  for (std::size_t n = 3; n <= 4; ++n) {
    const auto s = slots(n);
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = i; j < s.size(); ++j) {
        ++cases;
        bad += !round_trips(n, i == j ? std::vector<Label>{s[i]} : std::vector<Label>{s[i], s[j]});
      }
    }
    std::bernoulli_distribution coin(0.2);
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<Label> t;
      for (const auto& x : s) {
        if (coin(rng)) t.push_back(x);
      }
      ++cases;
      bad += !round_trips(n, t);
    }
  }
  return {bad == 0, std::to_string(cases) + " tuple sets, " + std::to_string(bad) +
                        " mismatches; exhaustive on <= 2 points, sampled on 3 and 4"};
}

// --- K over graphs ------------------------------------------------------------

Outcome ac2() {
  const auto k = encoder_class(graphs_class());
  std::size_t amalgams = 0, fresh = 0;
  PropertyOptions opt;
  opt.on_amalgam = [&](const Structure&, const Structure& d1, const Structure& d2, const Amalgam& a) {
    ++amalgams;
    fresh += !new_npairs(d1, d2, a).empty();
  };
  const auto r = check_class_properties(k, 4, opt);
  std::ostringstream d;
  d << "JEP " << verdict_name(r.jep.verdict) << " (" << r.jep.problems << "), AP "
    << verdict_name(r.ap.verdict) << " (" << r.ap.problems << "), " << amalgams
    << " amalgams re-scanned, " << fresh << " with new n-pairs";
  return {r.jep.verdict == Verdict::pass && r.ap.verdict == Verdict::pass && fresh == 0 && amalgams > 0,
          d.str()};
}

// --- generic graph and its axioms -----------------------------------------------

Outcome ac3() {
  const auto k = graphs_class();
  AxiomBudget b;
  b.n = 2;
  b.schemes = {Scheme::c, Scheme::d};
  const auto ax = generate_axioms(k, b);
  const auto u = build_generic_approx(k, 2, {});
  const bool good = verify_model_of(u.structure, ax).pass();
  const auto demands = extension_demands(k, 2);
  std::size_t caught = 0;
  std::string example;
  for (std::size_t i = 0; i < demands.size(); ++i) {
    GenericOptions g;
    g.skip = {i};
    const auto broken = build_generic_approx(k, 2, g);
    const auto rep = verify_model_of(broken.structure, ax);
    if (const auto* f = rep.first_failure()) {
      ++caught;
      if (i + 1 == demands.size()) example = emit_tagged(f->sentence);
    }
  }
  return {good && caught == demands.size() && !ax.empty(),
          std::to_string(ax.size()) + " axioms hold on the " + std::to_string(u.structure.size()) +
              "-element approximation; " + std::to_string(caught) + "/" +
              std::to_string(demands.size()) +
              " single-demand omissions break one, e.g. " + example};
}

// --- type counts -----------------------------------------------------------------

// Set partitions of {0..n-1}, counted by restricted growth strings.
std::uint64_t bell(std::size_t n) {
  std::uint64_t count = 0;
  std::vector<std::size_t> a(n, 0);
  std::function<void(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t top) {
    if (i == n) {
      ++count;
      return;
    }
    for (std::size_t c = 0; c <= top + 1 && (i > 0 || c == 0); ++c) {
      a[i] = c;
      go(i + 1, std::max(top, c));
    }
  };
  if (n == 0) return 1;
  go(0, 0);
  return count;
}

Outcome ac4() {
  std::vector<std::uint64_t> sets, oracle, graphs;
  for (std::size_t n = 1; n <= 4; ++n) {
    sets.push_back(type_count(sets_class(), n));
    oracle.push_back(bell(n));
    graphs.push_back(type_count(graphs_class(), n));
  }
  bool mono = true;
  for (std::size_t i = 1; i < 4; ++i) mono = mono && sets[i] >= sets[i - 1] && graphs[i] >= graphs[i - 1];
  auto show = [](const std::vector<std::uint64_t>& v) {
    std::string s;
    for (auto x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
    return s;
  };
  const std::vector<std::uint64_t> want{1, 2, 5, 15};
  return {sets == want && oracle == want && graphs[1] == 3 && mono,
          "sets " + show(sets) + " (partition oracle " + show(oracle) + "), graphs " + show(graphs)};
}

// --- layered presentation -----------------------------------------------------------

const LayerPresentation& constants_presentation(std::size_t level) {
  static std::map<std::size_t, LayerPresentation> cache;
  auto it = cache.find(level);
  if (it == cache.end()) {
    PresentationOptions o;
    o.level = level;
    it = cache.emplace(level, build_layered_presentation(constants_spec(3), o)).first;
  }
  return it->second;
}

Outcome ac5() {
  const auto& p = constants_presentation(2);
  std::size_t agree = 0, pairs = 0;
  for (std::size_t j = 2; j <= 3; ++j) {
    for (std::size_t i = 1; i < j; ++i) {
      ++pairs;
      agree += check_layer_agreement(p, i, j, 3).pass;
    }
  }
  // fault: drop a member of layer 2 whose layer-1 reduct has exactly one preimage
  const auto& v1 = p.layer(1).encoded.vocab;
  std::optional<Structure> victim;
  for (std::size_t s = 3; s >= 1 && !victim; --s) {
    const auto members = enumerate_age(p.layer(2).encoded, s);
    std::map<std::string, int> pre;
    for (const auto& m : members) ++pre[canonical_form(reduct(m, v1))];
    for (const auto& m : members) {
      if (pre[canonical_form(reduct(m, v1))] == 1 && detail::q_count(m) <= p.layer(1).arity_bound) {
        victim = m;
        break;
      }
    }
  }
  bool caught = false;
  std::string why;
  if (victim) {
    const auto r = check_layer_agreement(with_deleted_member(p, 2, *victim), 1, 2, 3);
    caught = !r.pass && r.witness && is_isomorphic(r.witness->structure, reduct(*victim, v1));
    why = r.failure;
  }
  return {agree == pairs && caught, std::to_string(agree) + "/" + std::to_string(pairs) +
                                        " pairs agree at bound 3; fault caught: " +
                                        (caught ? why : std::string("no"))};
}

Outcome ac6() {
  const auto& p = constants_presentation(4);
  const auto& layer = p.layer(3);
  // a second, separately built approximation of the same class
  GenericOptions g;
  g.size_cap = 12;
  const auto again = build_generic_approx(layer.base, 4, g);
  const auto u1 = encode_all(layer.approx.structure);
  const auto u2 = variant_encoding(again.structure, 5);
  const auto r = back_and_forth_over_P(u1, u2, 2);
  return {r.success && r.rounds_completed == 2,
          "level-4 approximations of layer 3 (" + std::to_string(u1.structure.size()) + " and " +
              std::to_string(u2.structure.size()) + " elements, " +
              (layer.approx.saturated && again.saturated ? "saturated" : "cut at 12 points") + "), rounds " +
              std::to_string(r.rounds_completed) + (r.success ? "" : ": " + r.witness)};
}

// --- gadget ----------------------------------------------------------------------

Outcome ac7() {
  bool mono = true;
  for (std::uint64_t x = 0; x < 1000; ++x) {
    mono = mono && arity_a()(x) < arity_a()(x + 1) && layer_bound(x) < layer_bound(x + 1) &&
           arity_a()(x) >= 3;
  }
  // sort 0 codes in order, plus one sort-1 code that must not count
  std::vector<std::uint64_t> sort0;
  for (std::uint64_t c = 0; sort0.size() < 3; ++c) {
    if (decode_pair(c).first == 0) sort0.push_back(c);
  }
  bool types = true;
  std::set<std::uint64_t> d{1};
  for (std::size_t k = 0; k <= 3; ++k) {
    if (k) d.insert(sort0[k - 1]);
    const auto q = sort_quotient_class(d, 0);
    // Boolean combinations: every sign pattern is a one-point member
    const auto combos = enumerate_age(q, 1).size();
    types = types && combos == (std::size_t{1} << k) && BigNat(combos) == count_sort_types(d, 0) &&
            BigNat(type_count(q, 1)) == count_sort_types(d, 0);
  }
  bool coherent = true;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto t = random_table(seed, 16, 2, 3, 4);
    for (std::uint64_t s = 0; s < 3; ++s) {
      for (std::uint64_t u = s + 1; u <= 3; ++u) {
        std::set<std::uint64_t> cut;
        for (auto c : compute_D(t, 0, u)) {
          if (BigNat(c) <= layer_bound(s)) cut.insert(c);
        }
        coherent = coherent && cut == compute_D(t, 0, s);
      }
    }
  }
  bool shadows = true;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto t = random_table(seed + 1000, 40, 2, 3, 10);
    const auto r = categoricity_verdict(t, 0, 2);
    std::vector<std::size_t> prev(3, 0);
    for (std::size_t len = 0; len <= t.rows.size(); ++len) {
      std::vector<std::set<std::uint64_t>> xs(3);
      for (std::size_t k = 0; k < len; ++k) {
        if (t.rows[k].e == 0) xs[t.rows[k].n].insert(t.rows[k].x);
      }
      const auto got = sort_shadows(t, 0, 2, len);
      for (std::size_t n = 0; n < 3; ++n) {
        shadows = shadows && got[n] == xs[n].size() && got[n] >= prev[n];
        if (len == t.rows.size()) shadows = shadows && r.sorts[n].shadow == xs[n].size();
      }
      prev = got;
    }
  }
  return {mono && types && coherent && shadows,
          std::string("product-monotone ") + (mono ? "yes" : "NO") + ", 2^d types " +
              (types ? "yes" : "NO") + ", compute_D coherence " + (coherent ? "yes" : "NO") +
              ", shadows " + (shadows ? "yes" : "NO")};
}

// --- determinism -------------------------------------------------------------------

std::pair<int, std::string> run(const std::string& cmd) {
  std::string out;
  FILE* f = popen((cmd + " 2>&1").c_str(), "r");
  if (!f) return {-1, ""};
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), f)) > 0) out.append(buf.data(), got);
  const int status = pclose(f);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Outcome ac8(const std::string& cli) {
  std::string detail;
  bool ok = true;
  for (const char* demo : {"rado", "dlo", "constants", "gadget"}) {
    const auto a = run(cli + " demo " + demo);
    const auto b = run(cli + " demo " + demo);
    const bool same = a.second == b.second && !a.second.empty();
    ok = ok && same && a.first == 0 && b.first == 0;
    detail += std::string(detail.empty() ? "" : ", ") + demo + (same ? " identical" : " DIFFERS") +
              (a.first == 0 ? "" : " (exit " + std::to_string(a.first) + ")");
  }
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance PATH_TO_MTK\n";
    return 2;
  }
  const std::string cli = argv[1];
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1 encode/decode round trip", ac1},
      {"AC2 K over graphs: JEP and AP at bound 4, no new n-pairs", ac2},
      {"AC3 generic graph satisfies (c)/(d) axioms, omissions caught", ac3},
      {"AC4 type counts: sets 1,2,5,15; graphs(2) = 3; monotone", ac4},
      {"AC5 layer agreement i<j<=3 at bound 3, fault injection", ac5},
      {"AC6 back-and-forth over P to depth 2 at level 4", ac6},
      {"AC7 gadget arithmetic, sort types, D coherence, shadows", ac7},
      {"AC8 demos are byte-identical across runs", [&] { return ac8(cli); }},
  };
  int failed = 0;
  for (const auto& [name, f] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::ostringstream line;
    line.setf(std::ios::fixed);
    line.precision(1);
    line << (o.pass ? "PASS " : "FAIL ") << name << " [" << secs << " s] " << o.detail;
    std::cout << line.str() << std::endl;
  }
  std::cout << (8 - failed) << "/8 criteria pass" << std::endl;
  return failed ? 1 : 0;
}
