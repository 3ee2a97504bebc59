#pragma once

// Layer spec files.
//
//   file     := { line }
//   line     := blank | comment | layer | add | class | forbid
//   layer    := "layer" [ NAME ]                starts a block
//   add      := "add" { NAME '/' ARITY }         symbols this layer adds
//   class    := "class" "builtin" NAME           a builtin class on the cumulative vocabulary
//             | "class" "forbid"                 structures avoiding every forbid line so far
//   forbid   := "forbid" VARS ':' { LITERAL }     VARS is one token "x,y,..."
//   LITERAL  := [ '!' ] SYMBOL '(' VAR { ',' VAR } ')'
//
// A forbid line names a configuration on distinct elements; a structure is a
// member when no injective assignment satisfies all of its literals. Forbid
// lines accumulate along the chain, so layer j of a forbid chain also avoids
// every configuration declared by earlier layers.

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mtk/axioms/forge.hpp"
#include "mtk/encoder/encode.hpp"
#include "mtk/encoder/k_class.hpp"
#include "mtk/fraisse/builtin.hpp"
#include "mtk/fraisse/generic.hpp"
#include "mtk/fraisse/properties.hpp"
#include "mtk/logic/evaluate.hpp"

namespace mtk {

// ---------------------------------------------------------------------------
// spec files

struct Literal {
  bool positive = true;
  std::string symbol;
  std::vector<std::string> vars;
};

struct ForbiddenConfig {
  std::vector<std::string> vars;
  std::vector<Literal> literals;
};

struct LayerDef {
  std::string name;
  std::vector<Symbol> added;
  std::optional<std::string> builtin;  // else a forbid class
  std::vector<ForbiddenConfig> forbid;
  std::size_t line = 0;
};

struct LayerSpec {
  std::vector<LayerDef> layers;
};

namespace detail {

inline Literal parse_literal(const std::string& tok, std::size_t lineno, std::size_t col) {
  Literal lit;
  std::string t = tok;
  if (!t.empty() && t[0] == '!') {
    lit.positive = false;
    t = t.substr(1);
  }
  const auto open = t.find('(');
  if (open == std::string::npos || open == 0 || t.back() != ')') {
    throw ParseError("expected SYMBOL(vars), got '" + tok + "'", lineno, col);
  }
  lit.symbol = t.substr(0, open);
  std::string inner = t.substr(open + 1, t.size() - open - 2);
  std::stringstream ss(inner);
  std::string v;
  while (std::getline(ss, v, ',')) {
    if (v.empty()) throw ParseError("empty variable in '" + tok + "'", lineno, col);
    lit.vars.push_back(v);
  }
  if (lit.vars.empty()) throw ParseError("literal without variables: " + tok, lineno, col);
  return lit;
}

}  // namespace detail

inline LayerSpec parse_layer_spec(const std::string& text) {
  LayerSpec out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = detail::tokenize_line(line);
    if (toks.empty()) continue;
    const auto& kw = toks[0].text;
    auto fail = [&](const std::string& what, std::size_t col) {
      throw ParseError(what, lineno, col);
    };
    if (kw == "layer") {
      if (toks.size() > 2) fail("layer takes at most a name", toks[2].column);
      LayerDef d;
      d.name = toks.size() == 2 ? toks[1].text : "L" + std::to_string(out.layers.size() + 1);
      d.line = lineno;
      out.layers.push_back(std::move(d));
      continue;
    }
    if (out.layers.empty()) fail("'" + kw + "' before the first layer line", toks[0].column);
    auto& cur = out.layers.back();
    if (kw == "add") {
      for (std::size_t i = 1; i < toks.size(); ++i) {
        const auto& t = toks[i].text;
        const auto slash = t.find('/');
        if (slash == std::string::npos || slash == 0) fail("expected NAME/ARITY", toks[i].column);
        std::size_t arity = 0;
        try {
          std::size_t used = 0;
          arity = std::stoul(t.substr(slash + 1), &used);
          if (used != t.size() - slash - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          fail("bad arity in '" + t + "'", toks[i].column);
        }
        if (arity == 0) fail("arity must be positive", toks[i].column);
        cur.added.push_back({t.substr(0, slash), arity});
      }
    } else if (kw == "class") {
      if (toks.size() < 2) fail("class needs 'builtin NAME' or 'forbid'", toks[0].column);
      if (toks[1].text == "builtin") {
        if (toks.size() != 3) fail("class builtin takes one name", toks[1].column);
        cur.builtin = toks[2].text;
      } else if (toks[1].text == "forbid") {
        if (toks.size() != 2) fail("class forbid takes no arguments", toks[2].column);
        cur.builtin.reset();
      } else {
        fail("unknown class kind '" + toks[1].text + "'", toks[1].column);
      }
    } else if (kw == "forbid") {
      if (toks.size() < 3 || toks[2].text != ":") {
        fail("expected: forbid VARS : LITERAL...", toks[0].column);
      }
      ForbiddenConfig fc;
      std::stringstream ss(toks[1].text);
      std::string v;
      while (std::getline(ss, v, ',')) {
        if (v.empty()) fail("empty variable name", toks[1].column);
        if (std::find(fc.vars.begin(), fc.vars.end(), v) != fc.vars.end()) {
          fail("variable " + v + " listed twice", toks[1].column);
        }
        fc.vars.push_back(v);
      }
      for (std::size_t i = 3; i < toks.size(); ++i) {
        auto lit = detail::parse_literal(toks[i].text, lineno, toks[i].column);
        for (const auto& x : lit.vars) {
          if (std::find(fc.vars.begin(), fc.vars.end(), x) == fc.vars.end()) {
            fail("variable " + x + " not declared on this line", toks[i].column);
          }
        }
        fc.literals.push_back(std::move(lit));
      }
      cur.forbid.push_back(std::move(fc));
    } else {
      fail("unknown keyword '" + kw + "'", toks[0].column);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// forbidden-configuration classes

/// Structures over `vocab` with no injective assignment satisfying any of
/// `forbid`. Free amalgamation is tried first; the checker falls back to
/// search when it does not land in the class.
inline AgeClass forbidden_class(std::string name, const Vocabulary& vocab,
                                std::vector<ForbiddenConfig> forbid) {
  for (const auto& fc : forbid) {
    for (const auto& lit : fc.literals) {
      auto sym = vocab.find(lit.symbol);
      if (!sym) throw ValidationError("forbid mentions unknown symbol " + lit.symbol);
      if (vocab[*sym].arity != lit.vars.size()) {
        throw ValidationError("forbid uses " + lit.symbol + " with " +
                              std::to_string(lit.vars.size()) + " arguments");
      }
    }
  }
  AgeClass k;
  k.name = std::move(name);
  k.vocab = vocab;
  // compiled: per config, literals as (symbol, positive, var positions)
  struct Lit {
    std::size_t sym;
    bool positive;
    std::vector<std::size_t> pos;
  };
  struct Conf {
    std::size_t nvars;
    std::vector<Lit> lits;
  };
  std::vector<Conf> confs;
  for (const auto& fc : forbid) {
    Conf c{fc.vars.size(), {}};
    for (const auto& lit : fc.literals) {
      Lit l{*vocab.find(lit.symbol), lit.positive, {}};
      for (const auto& v : lit.vars) {
        l.pos.push_back(static_cast<std::size_t>(
            std::find(fc.vars.begin(), fc.vars.end(), v) - fc.vars.begin()));
      }
      c.lits.push_back(std::move(l));
    }
    confs.push_back(std::move(c));
  }
  k.member = [confs](const Structure& s) {
    for (const auto& c : confs) {
      if (c.nvars > s.size()) continue;
      std::vector<Element> env(c.nvars);
      std::vector<bool> used(s.size(), false);
      Tuple scratch;
      bool hit = false;
      std::function<void(std::size_t)> go = [&](std::size_t i) {
        if (hit) return;
        if (i == c.nvars) {
          for (const auto& l : c.lits) {
            scratch.clear();
            for (auto p : l.pos) scratch.push_back(env[p]);
            if (s.holds(l.sym, scratch) != l.positive) return;
          }
          hit = true;
          return;
        }
        for (Element x = 0; x < s.size(); ++x) {
          if (used[x]) continue;
          used[x] = true;
          env[i] = x;
          go(i + 1);
          used[x] = false;
        }
      };
      go(0);
      if (hit) return false;
    }
    return true;
  };
  k.extensions = all_atoms_generator();
  k.amalgamate = free_strategy();
  for (const auto& fc : forbid) {
    Sentence s;
    for (const auto& v : fc.vars) s.prefix.push_back({Quantifier::forall, v});
    std::vector<Formula> parts;
    for (std::size_t a = 0; a < fc.vars.size(); ++a) {
      for (std::size_t b = a + 1; b < fc.vars.size(); ++b) {
        parts.push_back(Formula::negate(Formula::eq(fc.vars[a], fc.vars[b])));
      }
    }
    for (const auto& lit : fc.literals) {
      auto atom = Formula::rel(lit.symbol, lit.vars);
      parts.push_back(lit.positive ? atom : Formula::negate(atom));
    }
    s.matrix = Formula::negate(Formula::all_of(std::move(parts)));
    s.scheme = Scheme::a;
    k.universal_laws.push_back(std::move(s));
  }
  return k;
}

// ---------------------------------------------------------------------------
// presentations

/// Cumulative vocabularies L_1 ⊂ L_2 ⊂ ... and their arity bounds l_i.
struct LayeredVocabulary {
  std::vector<Vocabulary> layers;
  std::vector<std::size_t> arity_bound;
};

/// Validates a chain given by the symbols each layer adds. Arities must be
/// nondecreasing along the flattened list and every layer must start above
/// the previous bound, so l_i strictly increases. Violations are rejected,
/// not repaired.
inline LayeredVocabulary layered_vocabulary(const std::vector<std::vector<Symbol>>& added) {
  if (added.empty()) throw ValidationError("empty layer chain");
  LayeredVocabulary out;
  std::vector<Symbol> flat;
  std::size_t prev_bound = 0;
  for (std::size_t i = 0; i < added.size(); ++i) {
    const std::string where = "layer " + std::to_string(i + 1);
    if (added[i].empty()) throw ValidationError(where + " adds no symbols");
    for (const auto& s : added[i]) {
      if (is_target_symbol(s.name)) {
        throw ValidationError(where + ": symbol " + s.name + " clashes with the target language");
      }
      if (!flat.empty() && s.arity < flat.back().arity) {
        throw ValidationError(where + ": arity of " + s.name + " (" + std::to_string(s.arity) +
                              ") is below that of " + flat.back().name);
      }
      flat.push_back(s);
    }
    if (i > 0 && added[i].front().arity <= prev_bound) {
      throw ValidationError(where + ": first new symbol " + added[i].front().name +
                            " must have arity above " + std::to_string(prev_bound));
    }
    out.layers.emplace_back(flat);
    prev_bound = flat.back().arity;
    out.arity_bound.push_back(prev_bound);
  }
  return out;
}

struct Layer {
  std::string name;
  Vocabulary vocab;            // L_i
  std::size_t arity_bound = 0; // l_i
  AgeClass base;               // K0_i over L_i
  AgeClass encoded;            // K_i over L ∪ L_i
  ClassReport check;
  GenericApproximation approx; // level-k approximation of K0_i
  EncodedStructure u;          // U_i: approx with every relation instance labelled once
};

struct LayerPresentation {
  LayeredVocabulary vocab;
  std::vector<Layer> layers;  // layers[0] is layer 1
  std::size_t level = 0;

  const Layer& layer(std::size_t i) const {
    if (i == 0 || i > layers.size()) {
      throw ValidationError("no layer " + std::to_string(i) + " (have " +
                            std::to_string(layers.size()) + ")");
    }
    return layers[i - 1];
  }
};

struct PresentationOptions {
  std::size_t check_bound = 3;
  std::size_t level = 2;
  std::size_t size_cap = 12;
  bool check = true;
};

/// Construction refused because a layer class failed its property check.
class LayerRefused : public ValidationError {
 public:
  LayerRefused(const std::string& what, std::size_t layer, ClassReport report)
      : ValidationError(what), layer_(layer), report_(std::move(report)) {}
  std::size_t layer() const noexcept { return layer_; }
  const ClassReport& report() const noexcept { return report_; }

 private:
  std::size_t layer_;
  ClassReport report_;
};

struct LayerInput {
  std::string name;
  std::vector<Symbol> added;
  AgeClass base;
};

/// Every relation instance of `g` labelled by its own n-pair.
inline EncodedStructure encode_all(const Structure& g) { return encode(g, label_all(g)); }

inline LayerPresentation build_layered_presentation(const std::vector<LayerInput>& input,
                                                    const PresentationOptions& opt = {}) {
  std::vector<std::vector<Symbol>> added;
  for (const auto& l : input) added.push_back(l.added);
  LayerPresentation out;
  out.vocab = layered_vocabulary(added);
  out.level = opt.level;
  for (std::size_t i = 0; i < input.size(); ++i) {
    Layer layer;
    layer.name = input[i].name;
    layer.vocab = out.vocab.layers[i];
    layer.arity_bound = out.vocab.arity_bound[i];
    layer.base = input[i].base;
    if (layer.base.vocab.symbols() != layer.vocab.symbols()) {
      throw ValidationError("layer " + std::to_string(i + 1) + ": class " + layer.base.name +
                            " is over [" + layer.base.vocab.signature() + "], expected [" +
                            layer.vocab.signature() + "]");
    }
    if (opt.check) {
      layer.check = check_class_properties(layer.base, opt.check_bound);
      if (!layer.check.passed()) {
        throw LayerRefused("layer " + std::to_string(i + 1) + " (" + layer.base.name +
                               ") fails its property check at bound " +
                               std::to_string(opt.check_bound) + "\n" +
                               render_class_report(layer.check, false),
                           i + 1, layer.check);
      }
    }
    layer.encoded = encoder_class(layer.base);
    GenericOptions g;
    g.size_cap = opt.size_cap;
    layer.approx = build_generic_approx(layer.base, opt.level, g);
    layer.u = encode_all(layer.approx.structure);
    out.layers.push_back(std::move(layer));
  }
  return out;
}

/// Resolves builtin names and forbid blocks, then builds.
inline LayerPresentation build_layered_presentation(const LayerSpec& spec,
                                                    const PresentationOptions& opt = {}) {
  std::vector<LayerInput> input;
  std::vector<Symbol> flat;
  std::vector<ForbiddenConfig> forbid;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& d = spec.layers[i];
    flat.insert(flat.end(), d.added.begin(), d.added.end());
    forbid.insert(forbid.end(), d.forbid.begin(), d.forbid.end());
    LayerInput in{d.name, d.added, {}};
    if (d.builtin) {
      auto k = builtin_class(*d.builtin);
      if (!k) throw ValidationError("layer " + d.name + ": unknown builtin class " + *d.builtin);
      in.base = std::move(*k);
    } else {
      in.base = forbidden_class(d.name, Vocabulary(flat), forbid);
    }
    input.push_back(std::move(in));
  }
  return build_layered_presentation(input, opt);
}

/// (Q,<) with constants c_1 < ... < c_n: layer j adds the initial segment
/// "x <= c_j" as a diagonal predicate of arity j + 2.
inline LayerSpec constants_spec(std::size_t n) {
  LayerSpec s;
  for (std::size_t j = 1; j <= n; ++j) {
    LayerDef d;
    d.name = "c" + std::to_string(j);
    if (j == 1) d.added.push_back({"lt", 2});
    d.added.push_back({"C" + std::to_string(j), j + 2});
    d.builtin = "constants-" + std::to_string(j);
    s.layers.push_back(std::move(d));
  }
  return s;
}

// ---------------------------------------------------------------------------
// layer agreement

/// Copy of `k` (fresh cache) that rejects the isomorphism type of `s`.
inline AgeClass without_member(const AgeClass& k, const Structure& s) {
  AgeClass out = k;
  out.cache = std::make_shared<std::map<std::size_t, std::vector<Structure>>>();
  out.name = k.name + " minus one member";
  const auto key = canonical_form(s);
  const auto n = s.size();
  auto inner = k.member;
  out.member = [inner, key, n](const Structure& d) {
    if (d.size() == n && canonical_form(d) == key) return false;
    return inner(d);
  };
  return out;
}

/// Presentation whose layer `i` has the isomorphism type of `s` removed
/// from its encoded class.
inline LayerPresentation with_deleted_member(LayerPresentation p, std::size_t i,
                                             const Structure& s) {
  p.layer(i);
  p.layers[i - 1].encoded = without_member(p.layers[i - 1].encoded, s);
  return p;
}

struct AgreementSize {
  std::size_t size = 0;
  std::size_t lower = 0;   // members of K_i
  std::size_t reducts = 0; // distinct L ∪ L_i reducts of members of K_j
};

struct AgreementReport {
  std::size_t i = 0, j = 0, bound = 0, q_limit = 0;
  bool pass = true;
  std::vector<AgreementSize> sizes;
  std::string failure;
  std::optional<NamedStructure> witness;
  std::size_t axioms_lower = 0, axioms_upper = 0;
};

struct AgreementOptions {
  /// Quantifier budget for the axiom comparison (0 skips it).
  std::size_t axiom_budget = 2;
};

namespace detail {

inline std::size_t q_count(const Structure& s) {
  return extension_of(s, s.vocabulary().index_of("Q")).size();
}

/// The class of L ∪ L_i reducts of members of `upper`, membership decided by
/// enumeration of `upper` at the same size, over `lower`'s generator.
inline AgeClass reduct_class(const AgeClass& upper, const AgeClass& lower) {
  AgeClass k;
  k.name = "reducts of " + upper.name;
  k.vocab = lower.vocab;
  k.extensions = lower.extensions;
  k.bound = upper.bound;
  auto keys = std::make_shared<std::map<std::size_t, std::set<std::string>>>();
  const auto vocab = lower.vocab;
  k.member = [upper, keys, vocab](const Structure& s) {
    auto it = keys->find(s.size());
    if (it == keys->end()) {
      std::set<std::string> ks;
      for (const auto& m : enumerate_age(upper, s.size())) ks.insert(canonical_form(reduct(m, vocab)));
      it = keys->emplace(s.size(), std::move(ks)).first;
    }
    return it->second.count(canonical_form(s)) > 0;
  };
  return k;
}

}  // namespace detail

/// K_i against the L ∪ L_i reducts of K_j, size by size up to `bound`, on
/// structures whose Q-part has at most l_i elements; then the axiom lists
/// (schemes (a)-(d), arity cut max(l_i, 4)) of K_i and of the reduct class.
inline AgreementReport check_layer_agreement(const LayerPresentation& p, std::size_t i,
                                             std::size_t j, std::size_t bound,
                                             const AgreementOptions& opt = {}) {
  if (i > j) throw ValidationError("layer agreement needs i <= j");
  const auto& li = p.layer(i);
  const auto& lj = p.layer(j);
  AgreementReport r;
  r.i = i;
  r.j = j;
  r.bound = bound;
  r.q_limit = li.arity_bound;
  if (i == j) return r;
  const auto& vi = li.encoded.vocab;
  for (std::size_t s = 0; s <= bound; ++s) {
    std::map<std::string, Structure> lower, upper;
    for (const auto& m : enumerate_age(li.encoded, s)) {
      if (detail::q_count(m) <= r.q_limit) lower.emplace(canonical_form(m), m);
    }
    for (const auto& m : enumerate_age(lj.encoded, s)) {
      if (detail::q_count(m) > r.q_limit) continue;
      auto red = canonical_representative(reduct(m, vi));
      upper.try_emplace(canonical_form(red), red);
    }
    r.sizes.push_back({s, lower.size(), upper.size()});
    if (!r.pass) continue;
    for (const auto& [key, m] : lower) {
      if (!upper.count(key)) {
        r.pass = false;
        r.failure = "size " + std::to_string(s) + ": member of layer " + std::to_string(i) +
                    " is not a reduct of any member of layer " + std::to_string(j);
        r.witness = NamedStructure{"witness", m};
        break;
      }
    }
    if (!r.pass) continue;
    for (const auto& [key, m] : upper) {
      if (!lower.count(key)) {
        r.pass = false;
        r.failure = "size " + std::to_string(s) + ": reduct of a member of layer " +
                    std::to_string(j) + " is not in layer " + std::to_string(i);
        r.witness = NamedStructure{"witness", m};
        break;
      }
    }
  }
  if (r.pass && opt.axiom_budget > 0) {
    AxiomBudget b;
    b.n = opt.axiom_budget;
    b.l = std::max<std::size_t>(li.arity_bound, 4);
    const auto lower = generate_axioms(li.encoded, b);
    const auto upper = generate_axioms(detail::reduct_class(lj.encoded, li.encoded), b);
    r.axioms_lower = lower.size();
    r.axioms_upper = upper.size();
    for (std::size_t k = 0; k < std::max(lower.size(), upper.size()); ++k) {
      const auto a = k < lower.size() ? emit_tagged(lower[k]) : std::string("(none)");
      const auto c = k < upper.size() ? emit_tagged(upper[k]) : std::string("(none)");
      if (a != c) {
        r.pass = false;
        r.failure = "axiom " + std::to_string(k + 1) + " differs: layer " + std::to_string(i) +
                    " has " + a + ", reducts of layer " + std::to_string(j) + " give " + c;
        break;
      }
    }
  }
  return r;
}

inline std::string render_agreement(const AgreementReport& r, bool full) {
  std::string out = "layer agreement " + std::to_string(r.i) + " < " + std::to_string(r.j) +
                    ", size bound " + std::to_string(r.bound) + ", Q-part <= " +
                    std::to_string(r.q_limit) + "\n";
  if (r.i == r.j) out += "  identical layers\n";
  for (const auto& s : r.sizes) {
    if (!full && r.pass) continue;
    out += "  size " + std::to_string(s.size) + ": " + std::to_string(s.lower) +
           " members, " + std::to_string(s.reducts) + " reducts\n";
  }
  if (r.axioms_lower || r.axioms_upper) {
    out += "  axioms: " + std::to_string(r.axioms_lower) + " vs " +
           std::to_string(r.axioms_upper) + "\n";
  }
  out += std::string("  verdict: ") + (r.pass ? "agree" : "DISAGREE") + "\n";
  if (!r.pass) {
    out += "  " + r.failure + "\n";
    if (r.witness) out += emit_structure(r.witness->id, r.witness->structure);
  }
  out += "\n[summary]\n";
  out += "i=" + std::to_string(r.i) + "\nj=" + std::to_string(r.j) + "\n";
  out += "bound=" + std::to_string(r.bound) + "\n";
  std::size_t members = 0;
  for (const auto& s : r.sizes) members += s.lower;
  out += "members=" + std::to_string(members) + "\n";
  out += "axioms=" + std::to_string(r.axioms_lower) + "\n";
  out += std::string("verdict=") + (r.pass ? "pass" : "fail") + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// stabilization

namespace detail {

inline bool symbols_present(const Formula& f, const Vocabulary& v) {
  if (f.kind == Formula::Kind::rel) {
    auto sym = v.find(f.symbol);
    if (!sym || v[*sym].arity != f.vars.size()) return false;
  }
  for (const auto& c : f.children) {
    if (!symbols_present(c, v)) return false;
  }
  return true;
}

}  // namespace detail

struct StabilizationResult {
  std::size_t horizon = 0;
  std::vector<bool> holds;        // holds[j-1]: truth in U_j
  std::optional<std::size_t> index;  // unset: unstable at the horizon
};

/// Smallest i <= horizon such that phi holds in U_j for every j with
/// i <= j <= horizon; 0 for horizon 0. A sentence that mentions a symbol
/// missing from U_j counts as false there. The horizon is clamped to the
/// number of layers.
inline StabilizationResult detect_stabilization(const LayerPresentation& p, const Sentence& phi,
                                                std::size_t horizon) {
  StabilizationResult r;
  r.horizon = std::min(horizon, p.layers.size());
  if (r.horizon == 0) {
    r.index = 0;
    return r;
  }
  for (std::size_t j = 1; j <= r.horizon; ++j) {
    const auto& u = p.layer(j).u.structure;
    r.holds.push_back(detail::symbols_present(phi.matrix, u.vocabulary()) && evaluate(u, phi));
  }
  std::size_t i = r.horizon + 1;
  while (i > 1 && r.holds[i - 2]) --i;
  if (i <= r.horizon) r.index = i;
  return r;
}

inline std::string render_stabilization(const StabilizationResult& r, const Sentence& phi) {
  std::string out = "sentence " + emit_sentence(phi) + "\n";
  for (std::size_t j = 0; j < r.holds.size(); ++j) {
    out += "  U_" + std::to_string(j + 1) + ": " + (r.holds[j] ? "holds" : "fails") + "\n";
  }
  if (r.index) {
    out += "  stable from layer " + std::to_string(*r.index) + "\n";
  } else {
    out += "  unstable at horizon " + std::to_string(r.horizon) + "\n";
  }
  out += "\n[summary]\nhorizon=" + std::to_string(r.horizon) + "\n";
  out += "index=" + (r.index ? std::to_string(*r.index) : std::string("none")) + "\n";
  out += std::string("verdict=") + (r.index ? "stable" : "unstable") + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// back-and-forth over P

/// The P-parts to be identified are not isomorphic (or the supplied
/// identification is not an isomorphism).
class PPartMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct BackAndForthResult {
  bool success = true;
  std::size_t depth = 0;
  std::size_t rounds_completed = 0;
  std::vector<std::optional<Element>> forward;  // U' element -> U'' element
  std::string witness;
};

namespace detail {

// Unmapped Q-elements H-connected to x (either direction), x first.
inline std::vector<Element> q_component(const Structure& u, Element x,
                                        const std::vector<std::optional<Element>>& map) {
  const auto h = u.vocabulary().index_of("H");
  std::vector<Element> out{x};
  std::set<Element> seen{x};
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (const auto& t : u.relation(h)) {
      for (int side = 0; side < 2; ++side) {
        if (t[side] != out[k]) continue;
        const Element y = t[1 - side];
        if (!map[y] && seen.insert(y).second) out.push_back(y);
      }
    }
  }
  return out;
}

// Extends `map` (from -> to, with inverse `back`) by `comp`; false when no
// partial isomorphism does.
inline bool extend_by(const Structure& from, const Structure& to, const std::vector<Element>& comp,
                      std::vector<std::optional<Element>>& map,
                      std::vector<std::optional<Element>>& back) {
  std::vector<Element> dom;
  for (Element x = 0; x < from.size(); ++x) {
    if (map[x]) dom.push_back(x);
  }
  std::vector<Element> all = dom;
  all.insert(all.end(), comp.begin(), comp.end());
  std::vector<Element> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  const auto sub = induced_substructure(from, sorted);
  EmbeddingQuery q;
  q.fixed.assign(sorted.size(), std::nullopt);
  for (std::size_t k = 0; k < sorted.size(); ++k) q.fixed[k] = map[sorted[k]];
  auto e = find_embedding(sub, to, q);
  if (!e) return false;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    map[sorted[k]] = e->image[k];
    back[e->image[k]] = sorted[k];
  }
  return true;
}

}  // namespace detail

/// Partial L-isomorphism from U' to U'' that fixes the identified P-parts,
/// extended for `depth` rounds: odd rounds go forth over the unmapped
/// elements of U', even rounds go back over those of U''. Each step adds a
/// whole H-component at once; the first component with no image ends the
/// run as the witness. `ident` maps the i-th P-element of U' to the i-th
/// P-element of U''; when absent an isomorphism of the P-parts is searched.
inline BackAndForthResult back_and_forth_over_P(
    const EncodedStructure& u1, const EncodedStructure& u2, std::size_t depth,
    const std::optional<std::vector<std::size_t>>& ident = std::nullopt) {
  const auto& a = u1.structure;
  const auto& b = u2.structure;
  detail::require_same_vocabulary(a, b);
  const auto l0 = l0_part(a.vocabulary());
  const auto pa = p_elements(a), pb = p_elements(b);
  const auto ppa = p_part(a, l0), ppb = p_part(b, l0);
  std::vector<std::size_t> id;
  if (ident) {
    id = *ident;
    Embedding e;
    for (auto k : id) {
      if (k >= pb.size()) throw PPartMismatch("identification points outside the P-part");
      e.image.push_back(static_cast<Element>(k));
    }
    if (pa.size() != pb.size() || !is_embedding(ppa, ppb, e)) {
      throw PPartMismatch("supplied identification is not an isomorphism of the P-parts");
    }
  } else {
    if (pa.size() != pb.size()) {
      throw PPartMismatch("P-parts have " + std::to_string(pa.size()) + " and " +
                          std::to_string(pb.size()) + " elements");
    }
    EmbeddingQuery q;
    q.iso_only = true;
    auto e = find_embedding(ppa, ppb, q);
    if (!e) throw PPartMismatch("P-parts are not isomorphic");
    for (auto x : e->image) id.push_back(x);
  }
  BackAndForthResult r;
  r.depth = depth;
  r.forward.assign(a.size(), std::nullopt);
  std::vector<std::optional<Element>> backward(b.size());
  for (std::size_t k = 0; k < pa.size(); ++k) {
    r.forward[pa[k]] = pb[id[k]];
    backward[pb[id[k]]] = pa[k];
  }
  for (std::size_t round = 1; round <= depth; ++round) {
    const bool forth = round % 2 == 1;
    const Structure& from = forth ? a : b;
    const Structure& to = forth ? b : a;
    auto& map = forth ? r.forward : backward;
    auto& inv = forth ? backward : r.forward;
    for (Element x = 0; x < from.size(); ++x) {
      if (map[x]) continue;
      const auto comp = detail::q_component(from, x, map);
      if (!detail::extend_by(from, to, comp, map, inv)) {
        r.success = false;
        r.witness = std::string("round ") + std::to_string(round) + (forth ? " (forth)" : " (back)") +
                    ": no image for " + from.name(x) + " in " + (forth ? "U''" : "U'") +
                    "; its component:";
        for (auto y : comp) r.witness += " " + from.name(y);
        return r;
      }
    }
    r.rounds_completed = round;
  }
  return r;
}

inline std::string render_back_and_forth(const BackAndForthResult& r, const EncodedStructure& u1,
                                         const EncodedStructure& u2, bool full) {
  std::string out = "back-and-forth over P, depth " + std::to_string(r.depth) + "\n";
  out += "  U': " + std::to_string(u1.structure.size()) + " elements, U'': " +
         std::to_string(u2.structure.size()) + " elements\n";
  std::size_t mapped = 0;
  for (const auto& m : r.forward) mapped += m.has_value();
  out += "  rounds completed: " + std::to_string(r.rounds_completed) + ", mapped " +
         std::to_string(mapped) + "\n";
  if (full) {
    for (Element x = 0; x < r.forward.size(); ++x) {
      if (r.forward[x]) {
        out += "  " + u1.structure.name(x) + " -> " + u2.structure.name(*r.forward[x]) + "\n";
      }
    }
  }
  if (!r.success) out += "  " + r.witness + "\n";
  out += "\n[summary]\ndepth=" + std::to_string(r.depth) + "\n";
  out += "rounds=" + std::to_string(r.rounds_completed) + "\n";
  out += "mapped=" + std::to_string(mapped) + "\n";
  out += std::string("verdict=") + (r.success ? "pass" : "fail") + "\n";
  return out;
}

/// A second encoding of `g`: P shuffled by `seed` (0 keeps the order),
/// labels in reverse order, and the label at `duplicate` (if any) given a
/// second gadget.
inline EncodedStructure variant_encoding(const Structure& g, std::uint64_t seed,
                                         std::optional<std::size_t> duplicate = std::nullopt) {
  std::vector<Element> order(g.size());
  std::iota(order.begin(), order.end(), Element{0});
  if (seed != 0) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  const auto h = permuted(g, order);
  auto labels = label_all(h);
  std::reverse(labels.begin(), labels.end());
  if (duplicate) {
    if (*duplicate >= labels.size()) throw ValidationError("no label to duplicate");
    labels.push_back(labels[*duplicate]);
  }
  return encode(h, labels);
}

inline std::string render_presentation(const LayerPresentation& p) {
  std::string out = "layered presentation, " + std::to_string(p.layers.size()) + " layers, level " +
                    std::to_string(p.level) + "\n";
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    const auto& l = p.layers[i];
    out += "  layer " + std::to_string(i + 1) + " " + l.name + ": [" + l.vocab.signature() +
           "] l=" + std::to_string(l.arity_bound) + ", class " + l.base.name + ", U has " +
           std::to_string(l.u.structure.size()) + " elements (" +
           std::to_string(l.approx.structure.size()) + " in P, " +
           (l.approx.saturated ? "saturated" : "unsaturated: " + l.approx.note) + ")\n";
  }
  return out;
}

}  // namespace mtk
