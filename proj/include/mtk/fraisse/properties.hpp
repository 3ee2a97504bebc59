#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mtk/core/text_format.hpp"
#include "mtk/fraisse/age_class.hpp"

namespace mtk {

enum class Verdict { pass, fail, inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    default: return "inconclusive";
  }
}

struct PropertyResult {
  Verdict verdict = Verdict::pass;
  std::size_t problems = 0;  // instances examined
  std::string detail;        // reason for fail / inconclusive
  std::vector<NamedStructure> witness;
};

struct ClassReport {
  std::string class_name;
  std::size_t bound = 0;
  std::optional<std::size_t> locality;
  std::size_t members_upto = 0;  // largest member size enumerated
  PropertyResult hp, jep, ap;

  bool passed() const {
    return hp.verdict == Verdict::pass && jep.verdict == Verdict::pass &&
           ap.verdict == Verdict::pass;
  }
  bool failed() const {
    return hp.verdict == Verdict::fail || jep.verdict == Verdict::fail ||
           ap.verdict == Verdict::fail;
  }
};

struct PropertyOptions {
  /// Extra elements allowed beyond |D1|+|D2|-|C| when searching for amalgams.
  std::size_t amalgam_slack = 0;
  /// Called on every amalgam that passed verification (C, D1, D2, amalgam).
  std::function<void(const Structure&, const Structure&, const Structure&, const Amalgam&)>
      on_amalgam;
  /// Skip the locality reduction even when the class declares one.
  bool ignore_locality = false;
};

namespace detail {

// Search for an amalgam: the class strategy first, then every member of each
// admissible size. Returns nullopt when none exists within the cap, throws
// ResourceLimit when the search space cannot be enumerated.
inline std::optional<Amalgam> find_amalgam(const AgeClass& k, const Structure& c,
                                           const Structure& d1, const std::vector<Element>& f1,
                                           const Structure& d2, const std::vector<Element>& f2,
                                           std::size_t cap) {
  if (k.amalgamate) {
    if (auto a = k.amalgamate(c, d1, f1, d2, f2)) {
      if (verify_amalgam(k, c, d1, f1, d2, f2, *a)) return a;
    }
  }
  for (std::size_t size = std::max(d1.size(), d2.size()); size <= cap; ++size) {
    for (const auto& e : enumerate_age(k, size)) {
      std::optional<Amalgam> found;
      for_each_embedding(d1, e, {}, [&](const Embedding& g1) {
        EmbeddingQuery q;
        q.fixed.assign(d2.size(), std::nullopt);
        for (std::size_t i = 0; i < c.size(); ++i) q.fixed[f2[i]] = g1.image[f1[i]];
        if (auto g2 = find_embedding(d2, e, q)) {
          found = Amalgam{e, g1.image, g2->image};
          return false;
        }
        return true;
      });
      if (found) return found;
    }
  }
  return std::nullopt;
}

inline std::vector<Element> prefix_map(std::size_t n) {
  std::vector<Element> f(n);
  for (Element i = 0; i < n; ++i) f[i] = i;
  return f;
}

}  // namespace detail

/// Certifies HP, JEP and AP exhaustively over members of size <= bound.
///
/// AP problems are pairs of extensions D1, D2 of a member C (C on the first
/// |C| elements, one representative per isomorphism type over C). Amalgams
/// are searched up to |D1|+|D2|-|C| (+ slack) elements, which suffices for
/// hereditary classes: the images of D1 and D2 in any amalgam induce one.
/// With a locality radius r, only problems whose amalgam bound is <= r are
/// examined, members are enumerated up to size r - 1, and AP is checked on
/// one-point problems: composing those over a grid solves every problem of
/// total size <= r, since each cell's base has at most r - 2 points.
inline ClassReport check_class_properties(const AgeClass& k, std::size_t bound,
                                          const PropertyOptions& opt = {}) {
  ClassReport rep;
  rep.class_name = k.name;
  rep.bound = bound;
  std::optional<std::size_t> radius = opt.ignore_locality ? std::nullopt : k.locality_radius;
  rep.locality = radius;
  auto within = [&](std::size_t total) { return !radius || total <= *radius; };

  rep.members_upto = radius ? std::min(bound, *radius - 1) : bound;
  std::vector<Structure> members;
  try {
    members = enumerate_age_upto(k, rep.members_upto);
  } catch (const ResourceLimit& e) {
    for (auto* r : {&rep.hp, &rep.jep, &rep.ap}) {
      r->verdict = Verdict::inconclusive;
      r->detail = e.what();
    }
    return rep;
  }

  // HP
  for (const auto& s : members) {
    ++rep.hp.problems;
    if (auto sub = hereditary_violation(k, s)) {
      rep.hp.verdict = Verdict::fail;
      rep.hp.detail = "a substructure of a member is not a member";
      rep.hp.witness = {{"member", s}, {"substructure", *sub}};
      break;
    }
  }

  auto solve = [&](PropertyResult& res, const Structure& c, const Structure& d1,
                   const std::vector<Element>& f1, const Structure& d2,
                   const std::vector<Element>& f2) -> bool {
    ++res.problems;
    const std::size_t cap = d1.size() + d2.size() - c.size() + opt.amalgam_slack;
    std::optional<Amalgam> a;
    try {
      a = detail::find_amalgam(k, c, d1, f1, d2, f2, cap);
    } catch (const ResourceLimit& e) {
      res.verdict = Verdict::inconclusive;
      res.detail = e.what();
      res.witness = {{"C", c}, {"D1", d1}, {"D2", d2}};
      return false;
    }
    if (!a) {
      res.verdict = Verdict::fail;
      res.detail = "no amalgam with at most " + std::to_string(cap) + " elements";
      res.witness = {{"C", c}, {"D1", d1}, {"D2", d2}};
      return false;
    }
    if (opt.on_amalgam) opt.on_amalgam(c, d1, d2, *a);
    return true;
  };

  // JEP: any two members
  {
    const Structure empty(k.vocab);
    bool go = true;
    for (std::size_t i = 0; i < members.size() && go; ++i) {
      for (std::size_t j = i; j < members.size() && go; ++j) {
        if (!within(members[i].size() + members[j].size())) continue;
        go = solve(rep.jep, empty, members[i], {}, members[j], {});
      }
    }
  }

  // AP: extensions of every C
  {
    bool go = true;
    for (const auto& c : members) {
      if (!go || c.size() >= bound) continue;
      std::vector<std::vector<Structure>> ext(bound - c.size() + 1);
      try {
        for (std::size_t extra = 1; c.size() + extra <= bound; ++extra) {
          if (!within(c.size() + extra + 1) || (radius && extra > 1)) break;
          ext[extra] = relative_extensions(k, c, extra);
        }
      } catch (const ResourceLimit& e) {
        rep.ap.verdict = Verdict::inconclusive;
        rep.ap.detail = e.what();
        rep.ap.witness = {{"C", c}};
        break;
      }
      const auto f = detail::prefix_map(c.size());
      for (std::size_t e1 = 1; e1 < ext.size() && go; ++e1) {
        for (std::size_t e2 = e1; e2 < ext.size() && go; ++e2) {
          if (!within(c.size() + e1 + e2)) continue;
          for (std::size_t i = 0; i < ext[e1].size() && go; ++i) {
            for (std::size_t j = (e1 == e2 ? i : 0); j < ext[e2].size() && go; ++j) {
              go = solve(rep.ap, c, ext[e1][i], f, ext[e2][j], f);
            }
          }
        }
      }
    }
  }
  return rep;
}

inline std::string render_witness(const std::vector<NamedStructure>& w) {
  if (w.empty()) return "";
  StructureFile f{w.front().structure.vocabulary(), w};
  return emit_structures(f);
}

inline std::string render_class_report(const ClassReport& r, bool full) {
  std::string out;
  out += "class " + r.class_name + ", bound " + std::to_string(r.bound);
  if (r.locality) {
    out += ", locality radius " + std::to_string(*r.locality) + " (members up to size " +
           std::to_string(r.members_upto) + ", one-point AP problems)";
  }
  out += "\n";
  auto line = [&](const char* name, const PropertyResult& p) {
    out += std::string("  ") + name + ": " + verdict_name(p.verdict) + " (" +
           std::to_string(p.problems) + " problems)";
    if (!p.detail.empty()) out += " - " + p.detail;
    out += "\n";
    if (full || p.verdict != Verdict::pass) {
      if (!p.witness.empty()) out += render_witness(p.witness);
    }
  };
  line("HP", r.hp);
  line("JEP", r.jep);
  line("AP", r.ap);
  out += "\n[summary]\n";
  out += "class=" + r.class_name + "\n";
  out += "bound=" + std::to_string(r.bound) + "\n";
  out += std::string("hp=") + verdict_name(r.hp.verdict) + "\n";
  out += std::string("jep=") + verdict_name(r.jep.verdict) + "\n";
  out += std::string("ap=") + verdict_name(r.ap.verdict) + "\n";
  out += "problems=" + std::to_string(r.hp.problems + r.jep.problems + r.ap.problems) + "\n";
  return out;
}

}  // namespace mtk
