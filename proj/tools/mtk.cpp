// mtk: batch front end. Every subcommand prints a text report ending in a
// [summary] block of key=value lines. Exit status: 0 success, 1 a property
// failed (the report carries the witness), 2 usage or input error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mtk/axioms/forge.hpp"
#include "mtk/core/text_format.hpp"
#include "mtk/encoder/k_class.hpp"
#include "mtk/fraisse/builtin.hpp"
#include "mtk/fraisse/generic.hpp"
#include "mtk/fraisse/properties.hpp"
#include "mtk/fraisse/types.hpp"
#include "mtk/gadget/gadget.hpp"
#include "mtk/layered/layered.hpp"
#include "mtk/logic/evaluate.hpp"

namespace {

using namespace mtk;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A failed input parse, with the file it came from.
struct FileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Report {
  std::string body;
  std::vector<std::pair<std::string, std::string>> summary;
  int status = 0;

  void line(const std::string& s) { body += s + "\n"; }
  void kv(const std::string& k, const std::string& v) { summary.emplace_back(k, v); }
  void kv(const std::string& k, std::size_t v) { kv(k, std::to_string(v)); }

  std::string text() const {
    std::string out = body;
    out += "\n[summary]\n";
    for (const auto& [k, v] : summary) out += k + "=" + v + "\n";
    return out;
  }
};

// Splits a rendered report at its [summary] marker.
std::pair<std::string, std::vector<std::pair<std::string, std::string>>> split(const std::string& r) {
  const auto at = r.find("\n[summary]\n");
  if (at == std::string::npos) return {r, {}};
  std::vector<std::pair<std::string, std::string>> kv;
  std::istringstream in(r.substr(at + 11));
  std::string l;
  while (std::getline(in, l)) {
    const auto eq = l.find('=');
    if (eq != std::string::npos) kv.emplace_back(l.substr(0, eq), l.substr(eq + 1));
  }
  auto body = r.substr(0, at);
  if (!body.empty() && body.back() != '\n') body += '\n';
  return {body, kv};
}

void absorb(Report& rep, const std::string& rendered, const std::string& prefix = "") {
  auto [body, kv] = split(rendered);
  rep.body += body;
  for (auto& [k, v] : kv) rep.kv(prefix + k, v);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

template <class F>
auto parse_input(const std::string& path, F&& f) {
  const auto text = read_file(path);
  try {
    return f(text);
  } catch (const ParseError& e) {
    throw FileError(path + ":" + e.what());
  }
}

AgeClass pick_class(const std::string& name, bool encoded) {
  auto k = builtin_class(name);
  if (!k) {
    std::string known;
    for (const auto& n : builtin_class_names()) known += " " + n;
    throw UsageError("unknown class '" + name + "' (builtin:" + known + ", constants-N)");
  }
  return encoded ? encoder_class(*k) : *k;
}

std::set<Scheme> parse_schemes(const std::string& s) {
  std::set<Scheme> out;
  for (char c : s) {
    switch (c) {
      case 'a': out.insert(Scheme::a); break;
      case 'b': out.insert(Scheme::b); break;
      case 'c': out.insert(Scheme::c); break;
      case 'd': out.insert(Scheme::d); break;
      default: throw UsageError(std::string("unknown scheme '") + c + "' (use letters a-d)");
    }
  }
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (auto x : v) out += (out.empty() ? "" : ",") + std::to_string(x);
  return out;
}

// ---------------------------------------------------------------------------
// fraisse-engine

struct ClassOpts {
  std::string name;
  bool encoded = false;
};

void add_class_opts(CLI::App* c, ClassOpts& o) {
  c->add_option("--class", o.name, "builtin class: sets, graphs, triangle-free, linear-orders, "
                                   "complete-or-empty, constants-N")
      ->required();
  c->add_flag("--encoded", o.encoded, "use the encoded class K over the chosen class");
}

Report run_enumerate(const ClassOpts& co, std::size_t n, bool upto, bool full,
                     const std::string& output) {
  const auto k = pick_class(co.name, co.encoded);
  Report r;
  StructureFile f{k.vocab, {}};
  for (std::size_t s = upto ? 0 : n; s <= n; ++s) {
    const auto& level = enumerate_age(k, s);
    r.line("size " + std::to_string(s) + ": " + std::to_string(level.size()) + " members");
    for (std::size_t i = 0; i < level.size(); ++i) {
      f.structures.push_back({"m" + std::to_string(s) + "_" + std::to_string(i), level[i]});
    }
  }
  if (!output.empty()) {
    write_file(output, emit_structures(f));
    r.line("wrote " + output);
  } else if (full) {
    r.body += emit_structures(f);
  }
  r.kv("class", k.name);
  r.kv("n", n);
  r.kv("members", f.structures.size());
  return r;
}

Report run_check_class(const ClassOpts& co, std::size_t bound, std::size_t slack, bool full) {
  const auto k = pick_class(co.name, co.encoded);
  PropertyOptions opt;
  opt.amalgam_slack = slack;
  const auto rep = check_class_properties(k, bound, opt);
  Report r;
  absorb(r, render_class_report(rep, full));
  r.status = rep.passed() ? 0 : 1;
  return r;
}

Report run_generic(const ClassOpts& co, std::size_t level, std::size_t cap, std::uint64_t dseed,
                   const std::vector<std::size_t>& skip, bool full, const std::string& output) {
  const auto k = pick_class(co.name, co.encoded);
  GenericOptions g;
  g.size_cap = cap;
  g.demand_seed = dseed;
  g.skip = {skip.begin(), skip.end()};
  const auto u = build_generic_approx(k, level, g);
  Report r;
  auto [body, kv] = split(render_generic(u, full));
  if (!output.empty()) {
    write_file(output, emit_structure("U", u.structure));
    // drop the structure from the report when it went to a file
    const auto at = body.find("vocab ");
    if (at != std::string::npos) body = body.substr(0, at);
    body += "wrote " + output + "\n";
  }
  r.body = body;
  for (auto& [a, b] : kv) r.kv(a, b);
  return r;
}

Report run_type_count(const ClassOpts& co, std::size_t n, bool upto) {
  const auto k = pick_class(co.name, co.encoded);
  Report r;
  std::vector<std::uint64_t> counts;
  for (std::size_t s = upto ? 1 : n; s <= n; ++s) counts.push_back(type_count(k, s));
  if (upto) {
    for (std::size_t s = 0; s < counts.size(); ++s) {
      r.line("n=" + std::to_string(s + 1) + ": " + std::to_string(counts[s]));
    }
  } else {
    r.line(std::to_string(counts.back()));
  }
  r.kv("class", k.name);
  r.kv("n", n);
  r.kv("types", std::to_string(counts.back()));
  return r;
}

// ---------------------------------------------------------------------------
// encoder

Report run_encode(const std::string& input, const std::string& output, bool full) {
  const auto f = parse_input(input, [](const std::string& t) { return parse_structures(t); });
  for (const auto& s : f.vocabulary.symbols()) {
    if (is_target_symbol(s.name)) throw UsageError("input already uses target symbol " + s.name);
  }
  StructureFile out{combined_vocabulary(f.vocabulary), {}};
  Report r;
  std::string registry;
  std::size_t pairs = 0;
  for (const auto& ns : f.structures) {
    const auto e = encode(ns.structure, label_all(ns.structure));
    pairs += e.registry.size();
    r.line(ns.id + ": " + std::to_string(ns.structure.size()) + " points, " +
           std::to_string(e.registry.size()) + " n-pairs, " + std::to_string(e.structure.size()) +
           " elements");
    if (full) {
      for (const auto& p : e.registry) r.line("  " + describe_npair(e.structure, p));
    }
    out.structures.push_back({ns.id, e.structure});
  }
  if (output.empty()) {
    r.body += emit_structures(out);
  } else {
    write_file(output, emit_structures(out));
    r.line("wrote " + output);
  }
  r.kv("structures", out.structures.size());
  r.kv("npairs", pairs);
  return r;
}

Report run_decode(const std::string& input, const std::string& output) {
  const auto f = parse_input(input, [](const std::string& t) { return parse_structures(t); });
  const auto l0 = l0_part(f.vocabulary);
  StructureFile out{l0, {}};
  Report r;
  for (const auto& ns : f.structures) {
    auto d = decode(ns.structure, l0);
    std::size_t tuples = 0;
    for (std::size_t s = 0; s < l0.size(); ++s) tuples += d.relation(s).size();
    r.line(ns.id + ": " + std::to_string(d.size()) + " points, " + std::to_string(tuples) +
           " tuples decoded");
    out.structures.push_back({ns.id, std::move(d)});
  }
  if (output.empty()) {
    r.body += emit_structures(out);
  } else {
    write_file(output, emit_structures(out));
    r.line("wrote " + output);
  }
  r.kv("structures", out.structures.size());
  r.kv("vocabulary", l0.signature());
  return r;
}

// C, D1, D2 are the first three structures; C's elements are matched by
// name in D1 and D2.
Report run_amalgamate(const ClassOpts& co, const std::string& input, std::size_t slack,
                      const std::string& output) {
  const auto k = pick_class(co.name, co.encoded);
  const auto f = parse_input(input, [](const std::string& t) { return parse_structures(t); });
  if (f.structures.size() < 3) throw UsageError("amalgamate needs three structures C, D1, D2");
  if (!(f.vocabulary == k.vocab)) {
    throw UsageError("file vocabulary [" + f.vocabulary.signature() + "] is not the class's [" +
                     k.vocab.signature() + "]");
  }
  const auto& c = f.structures[0].structure;
  const auto& d1 = f.structures[1].structure;
  const auto& d2 = f.structures[2].structure;
  auto map_into = [&](const Structure& d, const std::string& id) {
    std::vector<Element> out;
    for (Element x = 0; x < c.size(); ++x) {
      auto y = d.find(c.name(x));
      if (!y) throw UsageError(id + " has no element named " + c.name(x));
      out.push_back(*y);
    }
    if (!is_embedding(c, d, Embedding{out})) throw UsageError("C does not embed in " + id + " by names");
    return out;
  };
  const auto f1 = map_into(d1, f.structures[1].id), f2 = map_into(d2, f.structures[2].id);
  Report r;
  for (int i = 0; i < 3; ++i) {
    if (!k.member(f.structures[i].structure)) {
      throw UsageError(f.structures[i].id + " is not a member of " + k.name);
    }
  }
  const auto a = detail::find_amalgam(k, c, d1, f1, d2, f2, d1.size() + d2.size() - c.size() + slack);
  r.kv("class", k.name);
  if (!a) {
    r.line("no amalgam of " + f.structures[1].id + " and " + f.structures[2].id + " over " +
           f.structures[0].id + " within " +
           std::to_string(d1.size() + d2.size() - c.size() + slack) + " elements");
    r.body += emit_structures(StructureFile{k.vocab, {f.structures[0], f.structures[1], f.structures[2]}});
    r.kv("verdict", "fail");
    r.status = 1;
    return r;
  }
  r.line("amalgam with " + std::to_string(a->structure.size()) + " elements");
  std::string g1, g2;
  for (Element x = 0; x < d1.size(); ++x) g1 += " " + d1.name(x) + "->" + a->structure.name(a->g1[x]);
  for (Element x = 0; x < d2.size(); ++x) g2 += " " + d2.name(x) + "->" + a->structure.name(a->g2[x]);
  r.line("  g1:" + g1);
  r.line("  g2:" + g2);
  std::size_t fresh = 0;
  if (co.encoded) {
    const auto np = new_npairs(d1, d2, *a);
    fresh = np.size();
    r.line("  new n-pairs: " + std::to_string(np.size()));
    for (const auto& p : np) r.line("    " + describe_npair(a->structure, p));
  }
  const auto text = emit_structure("amalgam", a->structure);
  if (output.empty()) {
    r.body += text;
  } else {
    write_file(output, text);
    r.line("wrote " + output);
  }
  r.kv("size", a->structure.size());
  if (co.encoded) r.kv("new_npairs", fresh);
  r.kv("verdict", fresh == 0 ? "pass" : "fail");
  r.status = fresh == 0 ? 0 : 1;
  return r;
}

// ---------------------------------------------------------------------------
// axioms

Report run_axioms(const ClassOpts& co, std::size_t n, std::size_t l, const std::string& schemes,
                  const std::string& check, std::optional<std::size_t> generic,
                  const std::vector<std::size_t>& skip, bool full, const std::string& output) {
  const auto k = pick_class(co.name, co.encoded);
  AxiomBudget b;
  b.n = n;
  b.l = l;
  b.schemes = parse_schemes(schemes);
  const auto axioms = generate_axioms(k, b);
  Report r;
  std::map<char, std::size_t> per;
  for (const auto& s : axioms) ++per[scheme_letter(s.scheme)];
  r.line(std::to_string(axioms.size()) + " axioms for " + k.name + " with at most " +
         std::to_string(n) + " quantifiers");
  const auto file = emit_axiom_file(axioms);
  if (!output.empty()) {
    write_file(output, file);
    r.line("wrote " + output);
  } else if (full || (check.empty() && !generic)) {
    r.body += file;
  }
  r.kv("class", k.name);
  r.kv("n", n);
  for (auto [c, cnt] : per) r.kv(std::string("scheme_") + c, cnt);
  r.kv("axioms", axioms.size());

  std::vector<NamedStructure> models;
  if (!check.empty()) {
    auto f = parse_input(check, [](const std::string& t) { return parse_structures(t); });
    models = std::move(f.structures);
  }
  if (generic) {
    GenericOptions g;
    g.skip = {skip.begin(), skip.end()};
    const auto u = build_generic_approx(k, *generic, g);
    r.line("generic approximation at level " + std::to_string(*generic) + ": " +
           std::to_string(u.structure.size()) + " elements" +
           (skip.empty() ? "" : ", demands skipped: " + join(skip)));
    models.push_back({"U", u.structure});
  }
  if (models.empty()) return r;
  bool all = true;
  for (const auto& m : models) {
    const auto rep = verify_model_of(m.structure, axioms);
    r.line("model " + m.id + ": " + (rep.pass() ? "satisfies every axiom" : "FAILS"));
    if (!rep.pass()) {
      all = false;
      for (const auto& c : rep.checks) {
        if (!c.holds) {
          r.line("  fails " + emit_tagged(c.sentence));
          if (!full) break;
        }
      }
    }
  }
  r.kv("models", models.size());
  r.kv("verdict", all ? "pass" : "fail");
  r.status = all ? 0 : 1;
  return r;
}

// ---------------------------------------------------------------------------
// layered theories

struct LayerOpts {
  std::string spec;
  std::size_t constants = 3;
  std::size_t level = 2;
  std::size_t size_cap = 12;
  std::size_t check_bound = 3;
};

void add_layer_opts(CLI::App* c, LayerOpts& o) {
  c->add_option("--spec", o.spec, "layer specification file");
  c->add_option("--constants", o.constants, "use the constants chain with this many layers")
      ->check(CLI::Range(1, 6));
  c->add_option("--level", o.level, "level of the generic approximations");
  c->add_option("--size-cap", o.size_cap, "size cap of the generic approximations");
  c->add_option("--check-bound", o.check_bound, "bound for the per-layer class check");
}

LayerPresentation presentation(const LayerOpts& o) {
  PresentationOptions p;
  p.level = o.level;
  p.size_cap = o.size_cap;
  p.check_bound = o.check_bound;
  if (!o.spec.empty()) {
    const auto spec = parse_input(o.spec, [](const std::string& t) { return parse_layer_spec(t); });
    return build_layered_presentation(spec, p);
  }
  return build_layered_presentation(constants_spec(o.constants), p);
}

// A size-`bound` member of layer `j` whose layer-`i` reduct has one preimage,
// so deleting it must break agreement.
std::optional<Structure> fault_victim(const LayerPresentation& p, std::size_t i, std::size_t j,
                                      std::size_t bound) {
  const auto& vi = p.layer(i).encoded.vocab;
  for (std::size_t s = bound + 1; s-- > 1;) {
    std::map<std::string, int> pre;
    const auto& members = enumerate_age(p.layer(j).encoded, s);
    for (const auto& m : members) ++pre[canonical_form(reduct(m, vi))];
    for (const auto& m : members) {
      if (pre[canonical_form(reduct(m, vi))] == 1 && detail::q_count(m) <= p.layer(i).arity_bound) {
        return m;
      }
    }
  }
  return std::nullopt;
}

Report run_layer_check(const LayerOpts& lo, std::size_t bound, std::vector<std::size_t> pair,
                       std::size_t delete_in, std::size_t axiom_budget, bool full) {
  auto p = presentation(lo);
  Report r;
  r.body += render_presentation(p);
  const std::size_t L = p.layers.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (!pair.empty()) {
    if (pair.size() != 2 || pair[0] < 1 || pair[0] >= pair[1] || pair[1] > L) {
      throw UsageError("--pair needs i j with 1 <= i < j <= " + std::to_string(L));
    }
    pairs.emplace_back(pair[0], pair[1]);
  } else {
    for (std::size_t j = 2; j <= L; ++j) {
      for (std::size_t i = 1; i < j; ++i) pairs.emplace_back(i, j);
    }
  }
  if (delete_in) {
    if (delete_in < 2 || delete_in > L) throw UsageError("--delete-member needs a layer in 2.." + std::to_string(L));
    const auto victim = fault_victim(p, delete_in - 1, delete_in, bound);
    if (!victim) throw UsageError("no member to delete at this bound");
    p = with_deleted_member(p, delete_in, *victim);
    r.line("fault injected: one member of size " + std::to_string(victim->size()) +
           " deleted from layer " + std::to_string(delete_in));
  }
  AgreementOptions ao;
  ao.axiom_budget = axiom_budget;
  std::size_t failed = 0;
  for (auto [i, j] : pairs) {
    const auto a = check_layer_agreement(p, i, j, bound, ao);
    auto [body, kv] = split(render_agreement(a, full));
    r.body += body;
    failed += !a.pass;
  }
  r.kv("layers", L);
  r.kv("bound", bound);
  r.kv("pairs", pairs.size());
  r.kv("failed", failed);
  r.kv("verdict", failed ? "fail" : "pass");
  r.status = failed ? 1 : 0;
  return r;
}

Report run_stabilize(const LayerOpts& lo, const std::vector<std::string>& sentences,
                     const std::string& file, std::size_t horizon) {
  std::vector<Sentence> phis;
  for (const auto& s : sentences) {
    try {
      phis.push_back(parse_sentence(s));
    } catch (const ParseError& e) {
      throw FileError(std::string("--sentence:") + e.what());
    }
  }
  if (!file.empty()) {
    auto more = parse_input(file, [](const std::string& t) { return parse_axiom_file(t); });
    phis.insert(phis.end(), more.begin(), more.end());
  }
  if (phis.empty()) throw UsageError("give --sentence or --sentences");
  const auto p = presentation(lo);
  Report r;
  std::size_t stable = 0;
  for (const auto& phi : phis) {
    const auto s = detect_stabilization(p, phi, horizon);
    auto [body, kv] = split(render_stabilization(s, phi));
    r.body += body;
    stable += s.index.has_value();
  }
  r.kv("horizon", std::min(horizon, p.layers.size()));
  r.kv("sentences", phis.size());
  r.kv("stable", stable);
  r.kv("verdict", stable == phis.size() ? "stable" : "unstable");
  return r;
}

Report run_bnf(const LayerOpts& lo, std::size_t layer, std::size_t depth, std::uint64_t seed,
               std::optional<std::size_t> duplicate, bool full) {
  const auto p = presentation(lo);
  const auto& l = p.layer(layer ? layer : p.layers.size());
  const auto& g = l.approx.structure;
  const auto u1 = encode_all(g);
  const auto u2 = variant_encoding(g, seed, duplicate);
  Report r;
  r.line("layer " + l.name + ": approximation with " + std::to_string(g.size()) +
         " points; U'' re-encodes it with P shuffled (seed " + std::to_string(seed) +
         ") and labels reversed" + (duplicate ? ", one label doubled" : ""));
  try {
    const auto b = back_and_forth_over_P(u1, u2, depth);
    absorb(r, render_back_and_forth(b, u1, u2, full));
    r.status = b.success ? 0 : 1;
  } catch (const PPartMismatch& e) {
    r.line(std::string("P-parts cannot be identified: ") + e.what());
    r.kv("verdict", "fail");
    r.status = 1;
  }
  return r;
}

// ---------------------------------------------------------------------------
// gadget

Report run_gadget_verdict(const std::string& table, std::uint64_t e, std::uint64_t horizon,
                          std::size_t flag, bool full) {
  const auto t = parse_input(table, [](const std::string& s) { return parse_table(s); });
  Report r;
  absorb(r, render_verdict(categoricity_verdict(t, e, horizon, flag), full));
  return r;
}

Report run_gadget_axioms(const std::vector<std::uint64_t>& d, std::uint64_t m, std::size_t n,
                         std::size_t l, const std::string& schemes, bool full,
                         const std::string& output) {
  const auto g = build_gadget_class({d.begin(), d.end()}, m);
  AxiomBudget b;
  b.n = n;
  b.l = l;
  b.schemes = parse_schemes(schemes);
  const auto a = assemble_gadget_axioms(g, b);
  Report r;
  r.body += describe_gadget(g);
  const auto text = emit_gadget_axioms(g, a);
  if (!output.empty()) {
    write_file(output, text);
    r.line("wrote " + output);
  } else if (full) {
    r.body += text;
  } else {
    r.body += emit_axiom_file(a.one_sorted);
  }
  r.kv("class", g.k.name);
  r.kv("l", g.l);
  r.kv("symbols", g.k.vocab.size());
  r.kv("axioms", a.one_sorted.size());
  r.kv("rewrites", a.rewritten.size());
  return r;
}

// ---------------------------------------------------------------------------
// demos: fixed inputs, each ends with its own checks

struct Checks {
  Report& r;
  std::size_t passed = 0, total = 0;
  void operator()(const std::string& what, bool ok) {
    ++total;
    passed += ok;
    r.line(std::string(ok ? "check ok:     " : "check FAILED: ") + what);
  }
  void finish() {
    r.kv("checks", std::to_string(passed) + "/" + std::to_string(total));
    r.kv("verdict", passed == total ? "pass" : "fail");
    r.status = passed == total ? 0 : 1;
  }
};

Report demo_rado(bool full) {
  Report r;
  Checks check{r};
  const auto k = graphs_class();
  r.line("== graphs: the age of the random graph");
  const auto cr = check_class_properties(k, 3);
  absorb(r, render_class_report(cr, full), "class_");
  check("graphs pass HP, JEP and AP at bound 3", cr.passed());
  std::vector<std::uint64_t> types;
  for (std::size_t n = 1; n <= 3; ++n) types.push_back(type_count(k, n));
  r.line("qf types of n-tuples, n = 1..3: " + std::to_string(types[0]) + " " +
         std::to_string(types[1]) + " " + std::to_string(types[2]));
  check("type_count(graphs, 2) = 3", types[1] == 3);
  const auto u = build_generic_approx(k, 2, {});
  absorb(r, render_generic(u, full), "generic_");
  AxiomBudget b;
  b.n = 2;
  b.schemes = {Scheme::c, Scheme::d};
  const auto ax = generate_axioms(k, b);
  r.line(std::to_string(ax.size()) + " scheme (c)/(d) axioms with at most 2 quantifiers");
  if (full) r.body += emit_axiom_file(ax);
  check("the level-2 approximation satisfies them", verify_model_of(u.structure, ax).pass());
  GenericOptions skip;
  skip.skip = {0};
  const auto broken = build_generic_approx(k, 2, skip);
  const auto bad = verify_model_of(broken.structure, ax);
  if (auto f = bad.first_failure()) r.line("approximation without demand 0 fails " + emit_tagged(f->sentence));
  check("skipping one demand breaks an axiom", !bad.pass());
  const auto e = encode_all(u.structure);
  check("decode(encode(U)) = U", decode(e.structure, k.vocab) == u.structure);
  check.finish();
  return r;
}

Report demo_dlo(bool full) {
  Report r;
  Checks check{r};
  const auto k = linear_orders_class();
  r.line("== linear orders: the age of (Q,<)");
  const auto cr = check_class_properties(k, 3);
  absorb(r, render_class_report(cr, full), "class_");
  check("linear orders pass HP, JEP and AP at bound 3", cr.passed());
  std::vector<std::uint64_t> types;
  for (std::size_t n = 1; n <= 3; ++n) types.push_back(type_count(k, n));
  r.line("qf types of n-tuples, n = 1..3: " + std::to_string(types[0]) + " " +
         std::to_string(types[1]) + " " + std::to_string(types[2]));
  check("type counts are the ordered Bell numbers 1 3 13", types == std::vector<std::uint64_t>{1, 3, 13});
  GenericOptions go;
  go.size_cap = 12;
  const auto u = build_generic_approx(k, 3, go);
  if (full) {
    absorb(r, render_generic(u, true), "generic_");
  } else {
    r.line("generic approximation at level 3: " + std::to_string(u.structure.size()) +
           " elements, " + std::to_string(u.unmet.size()) + " demands unmet");
  }
  AxiomBudget b;
  b.n = 3;
  b.schemes = {Scheme::a, Scheme::c};
  const auto ax = generate_axioms(k, b);
  r.line(std::to_string(ax.size()) + " scheme (a)/(c) axioms with at most 3 quantifiers");
  if (full) r.body += emit_axiom_file(ax);
  check("the approximation satisfies them", verify_model_of(u.structure, ax).pass());
  // density cannot hold in a finite order, so some extension axiom must fail
  b.schemes = {Scheme::d};
  const auto dx = generate_axioms(k, b);
  const auto dr = verify_model_of(u.structure, dx);
  if (auto f = dr.first_failure()) r.line("finite shadow of density: " + emit_tagged(f->sentence) + " fails");
  check("a finite order is not dense: some scheme (d) axiom fails", !dr.pass());
  check("the approximation is unsaturated", !u.saturated);
  check.finish();
  return r;
}

Report demo_constants(bool full) {
  Report r;
  Checks check{r};
  r.line("== (Q,<) with constants: a three-layer presentation");
  PresentationOptions po;
  const auto p = build_layered_presentation(constants_spec(3), po);
  r.body += render_presentation(p);
  bool agree = true;
  for (std::size_t j = 2; j <= 3; ++j) {
    for (std::size_t i = 1; i < j; ++i) {
      AgreementOptions ao;
      ao.axiom_budget = 0;
      const auto a = check_layer_agreement(p, i, j, 2, ao);
      absorb(r, render_agreement(a, full), "agree_" + std::to_string(i) + std::to_string(j) + "_");
      agree = agree && a.pass;
    }
  }
  check("layers agree pairwise at bound 2", agree);
  const auto victim = fault_victim(p, 1, 2, 2);
  bool caught = false;
  if (victim) {
    const auto broken = with_deleted_member(p, 2, *victim);
    AgreementOptions ao;
    ao.axiom_budget = 0;
    const auto a = check_layer_agreement(broken, 1, 2, 2, ao);
    caught = !a.pass && a.witness.has_value();
    if (a.witness) r.line("fault witness: " + a.failure);
  }
  check("deleting a member of layer 2 is caught", caught);
  const auto c1 = parse_sentence("(exists (x) (rel C1 x x x))");
  const auto st = detect_stabilization(p, c1, 3);
  absorb(r, render_stabilization(st, c1), "stab_");
  check("an axiom of layer 1 is stable from layer 1", st.index == std::optional<std::size_t>{1});
  const auto& g = p.layer(3).approx.structure;
  const auto u1 = encode_all(g), u2 = variant_encoding(g, 7);
  const auto b = back_and_forth_over_P(u1, u2, 2);
  absorb(r, render_back_and_forth(b, u1, u2, false), "bnf_");
  check("back-and-forth over P to depth 2", b.success);
  const auto u3 = variant_encoding(g, 7, 0);
  const auto bad = back_and_forth_over_P(u1, u3, 2);
  if (!bad.success) r.line("with one gadget doubled: " + bad.witness);
  check("a doubled gadget stops the back-and-forth", !bad.success);
  check.finish();
  return r;
}

Report demo_gadget(bool full) {
  Report r;
  Checks check{r};
  r.line("== the gadget classes");
  std::string as;
  for (std::uint64_t x = 0; x < 12; ++x) as += " " + arity_a()(x).str();
  r.line("a(0..11):" + as);
  r.line("l_0, l_1, l_2: " + layer_bound(0).str() + " " + layer_bound(1).str() + " " +
         layer_bound(2).str());
  bool mono = true;
  for (std::uint64_t x = 0; x < 1000; ++x) mono = mono && layer_bound(x) < layer_bound(x + 1);
  r.line("a(1000) = " + arity_a()(1000).str());
  check("p_i a(x) strictly increasing for x <= 1000", mono);
  const auto g = build_gadget_class({0}, 0);
  r.body += describe_gadget(g);
  std::vector<std::size_t> counts;
  for (std::size_t n = 0; n <= 3; ++n) counts.push_back(enumerate_age(g.k, n).size());
  r.line("members of size 0..3: " + join(counts));
  check("K_{0,{0}} has 10 members of size 3", counts[3] == 10);
  const auto cr = check_class_properties(g.k, 3);
  absorb(r, render_class_report(cr, full), "class_");
  check("K_{0,{0}} passes HP, JEP and AP at bound 3", cr.passed());
  const auto q = sort_quotient_class({0, 2}, 0);
  check("two predicates on sort 0 give 4 one-types", BigNat(type_count(q, 1)) == count_sort_types({0, 2}, 0));
  const auto t = parse_table(
      "0 0 0\n0 0 1\n1 1 0\n0 0 1\n0 2 5\n0 0 2\n0 0 3\n0 0 4\n0 0 5\n0 0 6\n0 0 7\n");
  r.body += emit_table(t);
  const auto d2 = compute_D(t, 0, 2);
  std::vector<std::size_t> dv(d2.begin(), d2.end());
  r.line("D^2_0 = {" + join(dv) + "}");
  check("D^2_0 = {0, 2}", d2 == std::set<std::uint64_t>{0, 2});
  const auto v = categoricity_verdict(t, 0, 2);
  absorb(r, render_verdict(v, full), "verdict_");
  check("sort 0 reaches the growth flag", !v.categorical && v.sorts[0].flagged);
  const auto a = assemble_gadget_axioms(build_gadget_class({}, 0), {2, 0, {Scheme::a}});
  if (full) r.body += emit_gadget_axioms(build_gadget_class({}, 0), a);
  r.line(std::to_string(a.one_sorted.size()) + " scheme (a) axioms for K_{0,{}} with 2 quantifiers");
  check("four of them, with rewrites", a.one_sorted.size() == 4 && a.rewritten.size() == 4);
  check.finish();
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mtk: Fraisse classes, encodings, axioms and layered theories"};
  app.require_subcommand(1);
  std::string format = "summary";
  app.add_option("--format", format, "report detail")
      ->check(CLI::IsMember({"summary", "full"}));
  app.fallthrough();
  std::string output;
  app.add_option("-o,--output", output, "write the data product to this file");

  Report rep;
  std::function<Report()> job;
  auto full = [&] { return format == "full"; };

  ClassOpts co;
  std::size_t n = 2, bound = 3, level = 2, cap = 24, slack = 0, l = 0;
  bool upto = false;
  std::uint64_t dseed = 0;
  std::vector<std::size_t> skip;

  auto* en = app.add_subcommand("enumerate-age", "members of the class up to isomorphism");
  add_class_opts(en, co);
  en->add_option("--n", n, "size")->required();
  en->add_flag("--upto", upto, "all sizes 0..n");
  en->callback([&] { job = [&] { return run_enumerate(co, n, upto, full(), output); }; });

  auto* cc = app.add_subcommand("check-class", "HP, JEP and AP up to a size bound");
  add_class_opts(cc, co);
  cc->add_option("--bound", bound, "size bound");
  cc->add_option("--slack", slack, "extra amalgam elements allowed");
  cc->callback([&] { job = [&] { return run_check_class(co, bound, slack, full()); }; });

  auto* bg = app.add_subcommand("build-generic", "finite approximation of the generic structure");
  add_class_opts(bg, co);
  bg->add_option("--level", level, "demand level");
  bg->add_option("--size-cap", cap, "stop at this many elements");
  bg->add_option("--demand-seed", dseed, "shuffle the demand order (0 keeps it)");
  bg->add_option("--skip", skip, "demand indices to leave out")->delimiter(',');
  bg->callback([&] { job = [&] { return run_generic(co, level, cap, dseed, skip, full(), output); }; });

  auto* tc = app.add_subcommand("type-count", "quantifier-free n-types realised in the class");
  add_class_opts(tc, co);
  tc->add_option("--n", n, "tuple length")->required();
  tc->add_flag("--upto", upto, "all lengths 1..n");
  tc->callback([&] { job = [&] { return run_type_count(co, n, upto); }; });

  std::string input;
  auto* ec = app.add_subcommand("encode", "encode every structure of a file (all tuples labelled)");
  ec->add_option("--input", input, "structure file")->required();
  ec->callback([&] { job = [&] { return run_encode(input, output, full()); }; });

  auto* dc = app.add_subcommand("decode", "decode encoded structures back to L0");
  dc->add_option("--input", input, "encoded structure file")->required();
  dc->callback([&] { job = [&] { return run_decode(input, output); }; });

  auto* am = app.add_subcommand("amalgamate", "amalgamate D1 and D2 over C (first three structures)");
  add_class_opts(am, co);
  am->add_option("--input", input, "structure file")->required();
  am->add_option("--slack", slack, "extra amalgam elements allowed");
  am->callback([&] { job = [&] { return run_amalgamate(co, input, slack, output); }; });

  std::string schemes = "abcd", check;
  std::optional<std::size_t> generic;
  auto* ax = app.add_subcommand("axioms", "axiom schemes (a)-(d) within a quantifier budget");
  add_class_opts(ax, co);
  ax->add_option("--n", n, "quantifier budget");
  ax->add_option("--l", l, "arity cut (0: all symbols)");
  ax->add_option("--schemes", schemes, "letters of the schemes to generate");
  ax->add_option("--check", check, "structure file whose members must satisfy the axioms");
  ax->add_option("--check-generic", generic, "also check the generic approximation at this level");
  ax->add_option("--skip", skip, "demand indices left out of that approximation")->delimiter(',');
  ax->callback([&] {
    job = [&] { return run_axioms(co, n, l, schemes, check, generic, skip, full(), output); };
  });

  LayerOpts lo;
  std::vector<std::size_t> pair;
  std::size_t delete_in = 0, axiom_budget = 2;
  auto* lc = app.add_subcommand("layer-check", "agreement between layers i < j");
  add_layer_opts(lc, lo);
  lc->add_option("--bound", bound, "size bound");
  lc->add_option("--pair", pair, "one pair i j (default: all)")->expected(2);
  lc->add_option("--delete-member", delete_in, "fault injection: delete a member from this layer");
  lc->add_option("--axiom-budget", axiom_budget, "quantifier budget of the axiom comparison (0 skips it)");
  lc->callback([&] {
    job = [&] { return run_layer_check(lo, bound, pair, delete_in, axiom_budget, full()); };
  });

  std::vector<std::string> sentences;
  std::string sentence_file;
  std::size_t horizon = 3;
  auto* sb = app.add_subcommand("stabilize", "first layer from which a sentence holds");
  add_layer_opts(sb, lo);
  sb->add_option("--sentence", sentences, "sentence in prefix notation");
  sb->add_option("--sentences", sentence_file, "axiom file");
  sb->add_option("--horizon", horizon, "last layer examined");
  sb->callback([&] { job = [&] { return run_stabilize(lo, sentences, sentence_file, horizon); }; });

  std::size_t layer = 0, depth = 2;
  std::uint64_t seed = 1;
  std::optional<std::size_t> duplicate;
  auto* bf = app.add_subcommand("bnf-over-p", "back-and-forth between two encodings of a layer");
  add_layer_opts(bf, lo);
  bf->add_option("--layer", layer, "layer (default: the last)");
  bf->add_option("--depth", depth, "number of rounds");
  bf->add_option("--seed", seed, "shuffle of the second encoding");
  bf->add_option("--duplicate", duplicate, "fault injection: give this label a second gadget");
  bf->callback([&] { job = [&] { return run_bnf(lo, layer, depth, seed, duplicate, full()); }; });

  std::string table;
  std::uint64_t e = 0, m = 0;
  std::size_t flag = 8;
  auto* gv = app.add_subcommand("gadget-verdict", "per-sort shadows of an enumeration table");
  gv->add_option("--table", table, "enumeration table (e n x per line)")->required();
  gv->add_option("--e", e, "index e");
  gv->add_option("--horizon", horizon, "stage s");
  gv->add_option("--growth-flag", flag, "shadow size that counts as growth")->check(CLI::PositiveNumber);
  gv->callback([&] { job = [&] { return run_gadget_verdict(table, e, horizon, flag, full()); }; });

  std::vector<std::uint64_t> dset;
  auto* ga = app.add_subcommand("gadget-axioms", "axioms of K_{m,D} and their L-rewrites");
  ga->add_option("--d", dset, "codes in D")->delimiter(',');
  ga->add_option("--m", m, "layer m");
  ga->add_option("--n", n, "quantifier budget");
  ga->add_option("--l", l, "arity cut (0: all symbols)");
  ga->add_option("--schemes", schemes, "letters of the schemes to generate");
  ga->callback([&] {
    job = [&] { return run_gadget_axioms(dset, m, n, l, schemes, full(), output); };
  });

  std::string which;
  auto* dm = app.add_subcommand("demo", "self-checking demonstrations");
  dm->add_option("name", which, "rado, dlo, constants or gadget")
      ->required()
      ->check(CLI::IsMember({"rado", "dlo", "constants", "gadget"}));
  dm->callback([&] {
    job = [&] {
      if (which == "rado") return demo_rado(full());
      if (which == "dlo") return demo_dlo(full());
      if (which == "constants") return demo_constants(full());
      return demo_gadget(full());
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }
  try {
    rep = job();
  } catch (const UsageError& err) {
    std::cerr << "mtk: " << err.what() << "\n";
    return 2;
  } catch (const LayerRefused& err) {
    std::cout << err.what() << "\n";
    return 1;
  } catch (const FileError& err) {
    std::cerr << "mtk: " << err.what() << "\n";
    return 2;
  } catch (const ParseError& err) {
    std::cerr << "mtk: " << err.what() << "\n";
    return 2;
  } catch (const ResourceLimit& err) {
    std::cerr << "mtk: resource limit: " << err.what() << "\n";
    return 2;
  } catch (const Error& err) {
    std::cerr << "mtk: " << err.what() << "\n";
    return 2;
  }
  std::cout << rep.text();
  return rep.status;
}
