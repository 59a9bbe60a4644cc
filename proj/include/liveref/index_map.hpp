#pragma once

// Index mappings witnessing that an abstract lasso matches a concrete one
// position by position: total, nondecreasing, cofinal, relation-respecting,
// trace-preserving. Presented as a finite table plus a periodic increment.

#include "liveref/liveness.hpp"

namespace liveref {

using StateRel = std::function<bool(int concrete, int abstract)>;

// m(i) = table[i] for i <= periodic_from + cycle_repeat*C(concrete);
// beyond that m(i) = m(i - cycle_repeat*C) + increment.
struct IndexMapping {
  std::vector<size_t> table;
  size_t periodic_from = 0;   // >= stem length, aligned to the concrete cycle
  size_t cycle_repeat = 1;    // concrete cycles per period of m
  size_t increment = 0;       // abstract positions advanced per period

  size_t at(size_t i, size_t concrete_cycle_len) const {
    size_t span = cycle_repeat * concrete_cycle_len;
    size_t k = 0;
    while (i >= table.size()) { i -= span; ++k; }
    return table[i] + k * increment;
  }
};

// Pair-map context for the liveness-preserving variant: for each abstract
// pair q in M, p = h(q) is a semantic-closure member on the concrete side;
// matched segments must keep q.red occurrences covered by p.red endpoints
// and turn p.green endpoints into q.green visits.
struct LivePairContext {
  const LivenessCondition* abstract_pairs = nullptr;  // M, over the abstract automaton
  std::vector<const ComplementedPair*> concrete_of;   // h(q), over the concrete one
};

struct IndexMappingReport {
  bool ok = false;
  std::string failure;       // clause name + location
  size_t at_position = 0;
};

namespace detail {

inline std::vector<std::string> segment_trace(const Automaton& b,
                                              const Lasso& abs, size_t j0,
                                              size_t j1) {
  std::vector<std::string> t;
  for (size_t j = j0 + 1; j <= j1; ++j) {
    int a = abs.action_at(j);
    if (b.is_external(a)) t.push_back(b.actions[a].name);
  }
  return t;
}

inline bool segment_visits(const Lasso& abs, size_t j0, size_t j1,
                           const StateSet& s) {
  for (size_t j = j0; j <= j1; ++j)
    if (in_set(s, abs.state_at(j))) return true;
  return false;
}

}  // namespace detail

// conc/abs are lassos of a/b respectively; rel relates (concrete, abstract)
// state indices. live may be null (plain check).
inline IndexMappingReport check_index_mapping(
    const Automaton& a, const Lasso& conc, const Automaton& b,
    const Lasso& abs, const StateRel& rel, const IndexMapping& m,
    const LivePairContext* live = nullptr) {
  IndexMappingReport r;
  size_t P = conc.stem_len(), C = conc.cycle_len();
  size_t Pb = abs.stem_len(), Cb = abs.cycle_len();
  size_t pf = m.periodic_from, K = m.cycle_repeat;
  auto fail = [&](const std::string& why, size_t pos) {
    r.ok = false;
    r.failure = why;
    r.at_position = pos;
    return r;
  };
  if (pf < P || (pf - P) % C != 0)
    return fail("presentation: periodic anchor not aligned with the cycle", pf);
  if (K == 0 || m.table.size() != pf + K * C + 1)
    return fail("presentation: table does not cover anchor plus one period",
                m.table.size());
  if (m.table[0] != 0) return fail("clause m(0)=0", 0);
  for (size_t i = 1; i < m.table.size(); ++i)
    if (m.table[i] < m.table[i - 1])
      return fail("clause monotonicity", i);
  size_t delta = m.table[pf + K * C] - m.table[pf];
  if (delta != m.increment)
    return fail("presentation: increment disagrees with table endpoints",
                pf + K * C);
  if (delta < 1) return fail("clause cofinality", pf + K * C);
  if (delta % Cb != 0)
    return fail("presentation: increment not a multiple of the abstract cycle",
                pf + K * C);
  if (m.table[pf + K * C] < Pb)
    return fail("presentation: period end precedes the abstract cycle",
                pf + K * C);
  // verify relation/trace (and pair) clauses across two periods; beyond that
  // both coordinates repeat exactly
  size_t upto = pf + 2 * K * C;
  for (size_t i = 0; i <= upto; ++i) {
    size_t mi = m.at(i, C);
    if (!rel(conc.state_at(i), abs.state_at(mi)))
      return fail("clause relation (s_i, u_m(i))", i);
    if (i == 0) continue;
    size_t mprev = m.at(i - 1, C);
    std::vector<std::string> want;
    int act = conc.action_at(i);
    if (a.is_external(act)) want.push_back(a.actions[act].name);
    if (detail::segment_trace(b, abs, mprev, mi) != want)
      return fail("clause trace preservation", i);
    if (live && live->abstract_pairs) {
      const auto& M = live->abstract_pairs->pairs;
      for (size_t qi = 0; qi < M.size(); ++qi) {
        const ComplementedPair& q = M[qi];
        const ComplementedPair* p = live->concrete_of[qi];
        bool ends_red = in_set(p->red, conc.state_at(i - 1)) ||
                        in_set(p->red, conc.state_at(i));
        if (!ends_red && detail::segment_visits(abs, mprev, mi, q.red))
          return fail("clause red containment for pair " + q.id, i);
        bool ends_green = in_set(p->green, conc.state_at(i - 1)) ||
                          in_set(p->green, conc.state_at(i));
        if (ends_green && !detail::segment_visits(abs, mprev, mi, q.green))
          return fail("clause green coverage for pair " + q.id, i);
      }
    }
  }
  r.ok = true;
  return r;
}

// Bounded search for an index mapping. hop caps the abstract positions
// consumed per concrete step; node_budget caps total search effort.
inline std::optional<IndexMapping> find_index_mapping(
    const Automaton& a, const Lasso& conc, const Automaton& b,
    const Lasso& abs, const StateRel& rel, size_t hop = 16,
    size_t node_budget = 200000, const LivePairContext* live = nullptr) {
  size_t P = conc.stem_len(), C = conc.cycle_len();
  size_t Pb = abs.stem_len(), Cb = abs.cycle_len();
  size_t i_max = P + C * (Pb + Cb + 3) + 2;
  size_t nodes = 0;
  std::vector<size_t> path;  // path[i] = m(i)
  std::optional<IndexMapping> found;
  auto abs_class = [&](size_t j) {
    return j < Pb ? j : Pb + (j - Pb) % Cb;
  };

  std::function<bool(size_t)> dfs = [&](size_t i) -> bool {
    if (++nodes > node_budget) return false;
    size_t j = path[i];
    if (i > P && (i - P) % C == 0 && j >= Pb) {
      for (size_t i1 = P; i1 < i; i1 += C) {
        size_t j1 = path[i1];
        size_t d = j - j1;
        if (d >= 1 && d % Cb == 0 && abs_class(j1) == abs_class(j)) {
          IndexMapping m;
          m.periodic_from = i1;
          m.cycle_repeat = (i - i1) / C;
          m.increment = d;
          m.table.assign(path.begin(), path.begin() + i + 1);
          if (check_index_mapping(a, conc, b, abs, rel, m, live).ok) {
            found = std::move(m);
            return true;
          }
        }
      }
    }
    if (i >= i_max) return false;
    int act = conc.action_at(i + 1);
    bool ext = a.is_external(act);
    std::string name = a.actions[act].name;
    int s_pre = conc.state_at(i), s_post = conc.state_at(i + 1);
    // advance the abstract position, consuming internals freely and the
    // required external exactly once
    bool consumed = !ext;
    for (size_t j2 = j; j2 <= j + hop; ++j2) {
      if (j2 > j) {
        int ba = abs.action_at(j2);
        if (b.is_external(ba)) {
          if (consumed || b.actions[ba].name != name) break;
          consumed = true;
        }
      }
      if (!consumed) continue;
      if (!rel(s_post, abs.state_at(j2))) continue;
      if (live && live->abstract_pairs) {
        const auto& M = live->abstract_pairs->pairs;
        bool ok = true;
        for (size_t qi = 0; qi < M.size() && ok; ++qi) {
          const ComplementedPair& q = M[qi];
          const ComplementedPair* p = live->concrete_of[qi];
          bool ends_red = in_set(p->red, s_pre) || in_set(p->red, s_post);
          if (!ends_red && detail::segment_visits(abs, j, j2, q.red)) ok = false;
          bool ends_green =
              in_set(p->green, s_pre) || in_set(p->green, s_post);
          if (ends_green && !detail::segment_visits(abs, j, j2, q.green))
            ok = false;
        }
        if (!ok) continue;
      }
      path.resize(i + 1);
      path.push_back(j2);
      if (dfs(i + 1)) return true;
      path.resize(i + 2);  // keep shape for sibling iteration
    }
    path.resize(i + 1);
    return false;
  };

  // clause m(0)=0 pins the first abstract position
  if (!rel(conc.state_at(0), abs.state_at(0))) return std::nullopt;
  path.assign(1, 0);
  dfs(0);
  return found;
}

}  // namespace liveref
