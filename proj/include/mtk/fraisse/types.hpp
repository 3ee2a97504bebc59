#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "mtk/fraisse/generic.hpp"
#include "mtk/logic/qf_type.hpp"

namespace mtk {

/// Number of quantifier-free types of n-tuples (repeats allowed) realised in
/// members of K. Every such type is realised in a member of size <= n.
inline std::uint64_t type_count(const AgeClass& k, std::size_t n) {
  std::set<std::string> types;
  for (const auto& s : enumerate_age_upto(k, n)) {
    for_each_tuple(s.size(), n, [&](const Tuple& t) { types.insert(qf_type(s, t).key()); });
  }
  return types.size();
}

struct HomogeneityReport {
  bool pass = true;
  std::size_t maps_checked = 0;
  std::string failure;
};

namespace detail {

inline void distinct_tuples(std::size_t n, std::size_t len,
                            const std::function<void(const Tuple&)>& visit) {
  for_each_tuple(n, len, [&](const Tuple& t) {
    std::set<Element> s(t.begin(), t.end());
    if (s.size() == t.size()) visit(t);
  });
}

inline std::string tuple_names(const Structure& u, const Tuple& t) {
  std::string out = "(";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ",";
    out += u.name(t[i]);
  }
  return out + ")";
}

}  // namespace detail

/// Finite homogeneity surrogate at size s: every isomorphism between induced
/// substructures of size < s extends by one point on either side inside U,
/// and U has the level-s extension property for K.
inline HomogeneityReport check_homogeneity_level(const AgeClass& k, const Structure& u,
                                                 std::size_t s) {
  HomogeneityReport rep;
  for (std::size_t len = 0; len < s && rep.pass; ++len) {
    std::vector<Tuple> tuples;
    detail::distinct_tuples(u.size(), len, [&](const Tuple& t) { tuples.push_back(t); });
    std::vector<std::string> keys;
    for (const auto& t : tuples) keys.push_back(qf_type(u, t).key());
    // one-point types over each tuple
    std::vector<std::set<std::string>> ext(tuples.size());
    for (std::size_t i = 0; i < tuples.size(); ++i) {
      for (Element x = 0; x < u.size(); ++x) {
        if (std::find(tuples[i].begin(), tuples[i].end(), x) != tuples[i].end()) continue;
        Tuple t = tuples[i];
        t.push_back(x);
        ext[i].insert(qf_type(u, t).key());
      }
    }
    for (std::size_t i = 0; i < tuples.size() && rep.pass; ++i) {
      for (std::size_t j = 0; j < tuples.size(); ++j) {
        if (keys[i] != keys[j]) continue;
        ++rep.maps_checked;
        if (ext[i] != ext[j]) {
          rep.pass = false;
          rep.failure = "partial isomorphism " + detail::tuple_names(u, tuples[i]) + " -> " +
                        detail::tuple_names(u, tuples[j]) + " does not extend by one point";
          break;
        }
      }
    }
  }
  if (rep.pass && s > 0) {
    const auto demands = extension_demands(k, s);
    std::vector<std::size_t> order(demands.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (auto miss = first_unmet_demand(demands, order, u)) {
      rep.pass = false;
      rep.failure = "missing extension witness: " +
                    describe_demand(demands[miss->demand], u, miss->embedding);
    }
  }
  return rep;
}

}  // namespace mtk
