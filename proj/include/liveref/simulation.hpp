#pragma once

// Plain and liveness-preserving simulation checkers between explicit
// automata. Conventions: A is the concrete (left) automaton, B the abstract
// (right) one; the relation g pairs (a-state, b-state). Liveness-preserving
// variants additionally take a pair map h sending each abstract pair q in M
// to a semantic-closure member p of (A, L).

#include "liveref/index_map.hpp"
#include "liveref/streett.hpp"

namespace liveref {

struct Relation {
  std::vector<std::vector<int>> image;     // a-state -> b-states (sorted)
  std::vector<std::vector<int>> preimage;  // b-state -> a-states (sorted)

  static Relation from_rows(size_t na, size_t nb,
                            const std::vector<std::pair<int, int>>& rows) {
    Relation r;
    r.image.assign(na, {});
    r.preimage.assign(nb, {});
    for (auto [s, u] : rows) {
      r.image[s].push_back(u);
      r.preimage[u].push_back(s);
    }
    for (auto& v : r.image) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    for (auto& v : r.preimage) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return r;
  }
};

// h: abstract pair id -> concrete pair (either a reference into L or an
// explicit pair that still needs closure certification).
struct PairMapEntry {
  std::string q_id;
  ComplementedPair p;
  bool needs_certificate = false;
};

struct SimCandidate {
  Relation g;
  std::vector<PairMapEntry> h;
  std::optional<StateSet> inv_a, inv_b;
  size_t bound = 0;  // fragment length bound; 0 = |states(B)| * (|M|+1)
  // Explicit relations are always image-finite, so candidates standing for
  // an infinite family declare it; backward-style checkers require it.
  bool image_finite = true;
};

struct SimReport {
  bool ok = true;
  std::string clause;    // failing clause, empty when ok
  json detail;           // counterexample payload
  std::vector<int> always_silent;     // step indices (live forward)
  std::vector<int> sometimes_silent;  // step indices (live backward)
  std::optional<Lasso> silent_cycle;  // witness against the silent clause
};

namespace detail {

struct FragmentQuery {
  int from = -1;
  std::optional<std::string> ext;        // single required external, or silent
  const StateSet* target = nullptr;      // acceptable last states
  std::optional<int> exact_target;       // overrides target when set
  std::vector<const StateSet*> must_visit;
  std::vector<const StateSet*> avoid;    // applies to every state incl. ends
  size_t min_len = 0;
  size_t bound = 8;
  size_t max_results = 1;
};

inline std::vector<Execution> find_fragments(const Automaton& b,
                                             const FragmentQuery& q) {
  std::vector<Execution> results;
  auto avoided = [&](int u) {
    for (const auto* s : q.avoid)
      if (in_set(*s, u)) return true;
    return false;
  };
  if (avoided(q.from)) return results;
  unsigned full = (1u << q.must_visit.size()) - 1;
  auto visit_bits = [&](int u) {
    unsigned m = 0;
    for (size_t i = 0; i < q.must_visit.size(); ++i)
      if (in_set(*q.must_visit[i], u)) m |= 1u << i;
    return m;
  };
  auto accepts = [&](int u, bool consumed, unsigned mask, size_t len) {
    if (!consumed || mask != full || len < q.min_len) return false;
    if (q.exact_target) return u == *q.exact_target;
    return q.target ? in_set(*q.target, u) : true;
  };

  struct Node {
    int u;
    bool consumed;
    unsigned mask;
  };
  // BFS with parent pointers; deterministic by step order
  std::map<std::tuple<int, bool, unsigned>, std::pair<std::tuple<int, bool, unsigned>, int>>
      parent;  // node -> (pred node, step idx into b.steps order via out())
  std::deque<std::pair<Node, size_t>> queue;
  Node root{q.from, !q.ext.has_value(), visit_bits(q.from)};
  if (accepts(root.u, root.consumed, root.mask, 0))
    results.push_back(Execution{{q.from}, {}});
  if (q.max_results && results.size() >= q.max_results) return results;
  auto key = [](const Node& n) {
    return std::make_tuple(n.u, n.consumed, n.mask);
  };
  parent[key(root)] = {key(root), -1};
  queue.push_back({root, 0});
  auto build = [&](Node n) {
    Execution e;
    std::vector<int> acts, states{n.u};
    auto k = key(n);
    while (true) {
      auto& [pk, via] = parent[k];
      if (via < 0) break;
      acts.push_back(b.steps[via].action);
      states.push_back(b.steps[via].from);
      k = pk;
    }
    std::reverse(acts.begin(), acts.end());
    std::reverse(states.begin(), states.end());
    e.states = std::move(states);
    e.acts = std::move(acts);
    return e;
  };
  while (!queue.empty()) {
    auto [n, len] = queue.front();
    queue.pop_front();
    if (len >= q.bound) continue;
    for (int si = 0; si < int(b.steps.size()); ++si) {
      const Step& st = b.steps[si];
      if (st.from != n.u) continue;
      Node nx = n;
      nx.u = st.to;
      if (b.is_external(st.action)) {
        if (!q.ext || n.consumed || b.actions[st.action].name != *q.ext)
          continue;
        nx.consumed = true;
      }
      if (avoided(nx.u)) continue;
      nx.mask |= visit_bits(nx.u);
      auto k = key(nx);
      if (parent.count(k)) {
        // a revisited node is redundant except for the root, which min_len
        // may have excluded: a cycle back to it is a fresh acceptance
        if (k == key(root) && accepts(nx.u, nx.consumed, nx.mask, len + 1)) {
          Execution e = build(n);
          e.acts.push_back(st.action);
          e.states.push_back(st.to);
          results.push_back(std::move(e));
          if (results.size() >= q.max_results) return results;
        }
        continue;
      }
      parent[k] = {key(n), si};
      if (accepts(nx.u, nx.consumed, nx.mask, len + 1)) {
        results.push_back(build(nx));
        if (results.size() >= q.max_results) return results;
      }
      queue.push_back({nx, len + 1});
    }
  }
  return results;
}

}  // namespace detail

struct SimContext {
  const Automaton& a;
  const Automaton& b;
  StateSet inv_a, inv_b;
  size_t bound;
};

// Verify supplied invariants cover reachability (the checkers' soundness
// precondition); defaults to the reachable sets themselves.
inline SimContext make_context(const Automaton& a, const Automaton& b,
                               const SimCandidate& cand, size_t m_pairs) {
  SimContext c{a, b, {}, {}, 0};
  auto setup = [&](const Automaton& x, const std::optional<StateSet>& inv,
                   const char* side) {
    StateSet reach = make_set(x.states.size(), reachable_states(x));
    if (!inv) return reach;
    for (size_t i = 0; i < x.states.size(); ++i)
      if (reach[i] && !(*inv)[i])
        throw ValidationError(std::string("invariant on ") + side +
                              " excludes reachable state '" + x.states[i] + "'");
    return *inv;
  };
  c.inv_a = setup(a, cand.inv_a, "the concrete side");
  c.inv_b = setup(b, cand.inv_b, "the abstract side");
  c.bound = cand.bound ? cand.bound : b.states.size() * (m_pairs + 1);
  return c;
}

namespace detail {

inline json step_json(const Automaton& a, const Step& st) {
  return json{a.states[st.from], a.actions[st.action].name, a.states[st.to]};
}

// pair conditions for matching the step (s, a, s') against fragments of B
struct LiveStepConditions {
  std::vector<const StateSet*> avoid;       // q.red for pairs with silent ends
  std::vector<const StateSet*> must_visit;  // q.green for pairs with green ends
  std::optional<std::string> blocked_pair;  // endpoint already inside q.red-
                                            // forbidden zone: unsatisfiable
};

inline LiveStepConditions live_conditions(const LivenessCondition& m_cond,
                                          const std::vector<const ComplementedPair*>& h_of,
                                          int s, int s2) {
  LiveStepConditions c;
  for (size_t i = 0; i < m_cond.pairs.size(); ++i) {
    const ComplementedPair& q = m_cond.pairs[i];
    const ComplementedPair* p = h_of[i];
    bool ends_red = in_set(p->red, s) || in_set(p->red, s2);
    if (!ends_red) c.avoid.push_back(&q.red);
    bool ends_green = in_set(p->green, s) || in_set(p->green, s2);
    if (ends_green) c.must_visit.push_back(&q.green);
  }
  return c;
}

}  // namespace detail

// --- plain variants ----------------------------------------------------------

inline SimReport check_forward_sim(const Automaton& a, const Automaton& b,
                                   const SimCandidate& cand) {
  SimReport r;
  SimContext c = make_context(a, b, cand, 0);
  for (int s : a.start) {
    bool ok = false;
    for (int u : cand.g.image[s])
      ok = ok || std::find(b.start.begin(), b.start.end(), u) != b.start.end();
    if (!ok) {
      r.ok = false;
      r.clause = "start";
      r.detail = json{{"state", a.states[s]}};
      return r;
    }
  }
  for (const Step& st : a.steps) {
    if (!in_set(c.inv_a, st.from)) continue;
    StateSet target(b.states.size(), 0);
    for (int v : cand.g.image[st.to]) target[v] = 1;
    for (int u : cand.g.image[st.from]) {
      if (!in_set(c.inv_b, u)) continue;
      detail::FragmentQuery q;
      q.from = u;
      if (a.is_external(st.action)) q.ext = a.actions[st.action].name;
      q.target = &target;
      q.bound = c.bound;
      if (detail::find_fragments(b, q).empty()) {
        r.ok = false;
        r.clause = "step";
        r.detail = json{{"step", detail::step_json(a, st)},
                        {"abstract_state", b.states[u]}};
        return r;
      }
    }
  }
  return r;
}

inline SimReport check_refinement(const Automaton& a, const Automaton& b,
                                  const SimCandidate& cand) {
  SimContext c = make_context(a, b, cand, 0);
  for (size_t s = 0; s < a.states.size(); ++s) {
    if (!in_set(c.inv_a, int(s))) continue;
    size_t n = 0;
    for (int u : cand.g.image[s])
      if (in_set(c.inv_b, u)) ++n;
    if (n != 1) {
      SimReport r;
      r.ok = false;
      r.clause = "functional";
      r.detail = json{{"state", a.states[s]}, {"image_size", n}};
      return r;
    }
  }
  return check_forward_sim(a, b, cand);
}

inline SimReport check_backward_sim(const Automaton& a, const Automaton& b,
                                    const SimCandidate& cand) {
  SimReport r;
  if (!cand.image_finite) {
    r.ok = false;
    r.clause = "image-finite";
    r.detail = json{{"reason", "backward simulations require an image-finite relation"}};
    return r;
  }
  SimContext c = make_context(a, b, cand, 0);
  auto image_inv = [&](int s) {
    std::vector<int> v;
    for (int u : cand.g.image[s])
      if (in_set(c.inv_b, u)) v.push_back(u);
    return v;
  };
  for (size_t s = 0; s < a.states.size(); ++s) {
    if (!in_set(c.inv_a, int(s))) continue;
    if (image_inv(int(s)).empty()) {
      r.ok = false;
      r.clause = "totality";
      r.detail = json{{"state", a.states[s]}};
      return r;
    }
  }
  for (int s : a.start)
    for (int u : image_inv(s))
      if (std::find(b.start.begin(), b.start.end(), u) == b.start.end()) {
        r.ok = false;
        r.clause = "start";
        r.detail = json{{"state", a.states[s]}, {"abstract_state", b.states[u]}};
        return r;
      }
  for (const Step& st : a.steps) {
    if (!in_set(c.inv_a, st.from) || !in_set(c.inv_a, st.to)) continue;
    for (int u2 : image_inv(st.to)) {
      bool ok = false;
      for (int u : image_inv(st.from)) {
        detail::FragmentQuery q;
        q.from = u;
        if (a.is_external(st.action)) q.ext = a.actions[st.action].name;
        q.exact_target = u2;
        q.bound = c.bound;
        if (!detail::find_fragments(b, q).empty()) {
          ok = true;
          break;
        }
      }
      if (!ok) {
        r.ok = false;
        r.clause = "step";
        r.detail = json{{"step", detail::step_json(a, st)},
                        {"abstract_state", b.states[u2]}};
        return r;
      }
    }
  }
  return r;
}

inline Relation inverse(const Relation& g) {
  Relation r;
  r.image = g.preimage;
  r.preimage = g.image;
  return r;
}

// history relation = forward simulation whose inverse refines B back to A
inline SimReport check_history_sim(const Automaton& a, const Automaton& b,
                                   const SimCandidate& cand) {
  SimReport r = check_forward_sim(a, b, cand);
  if (!r.ok) return r;
  SimCandidate inv;
  inv.g = inverse(cand.g);
  inv.inv_a = cand.inv_b;
  inv.inv_b = cand.inv_a;
  inv.bound = cand.bound;
  SimReport rr = check_refinement(b, a, inv);
  if (!rr.ok) rr.clause = "inverse-" + rr.clause;
  return rr;
}

inline SimReport check_prophecy_sim(const Automaton& a, const Automaton& b,
                                    const SimCandidate& cand) {
  SimReport r = check_backward_sim(a, b, cand);
  if (!r.ok) return r;
  SimCandidate inv;
  inv.g = inverse(cand.g);
  inv.inv_a = cand.inv_b;
  inv.inv_b = cand.inv_a;
  inv.bound = cand.bound;
  SimReport rr = check_refinement(b, a, inv);
  if (!rr.ok) rr.clause = "inverse-" + rr.clause;
  return rr;
}

// --- silent-step analysis ----------------------------------------------------

// A silent step (internal, invariant source) is always-silent when the empty
// match exists and no related abstract state offers a nonempty match; it is
// sometimes-silent when the empty match exists at all.
struct SilentAnalysis {
  std::vector<int> always_silent;
  std::vector<int> sometimes_silent;
  std::vector<char> always_mask;     // over a.steps
  std::vector<char> sometimes_mask;
};

inline SilentAnalysis analyze_silent_steps(const Automaton& a,
                                           const Automaton& b,
                                           const Relation& g,
                                           const SimContext& c) {
  SilentAnalysis out;
  out.always_mask.assign(a.steps.size(), 0);
  out.sometimes_mask.assign(a.steps.size(), 0);
  for (int si = 0; si < int(a.steps.size()); ++si) {
    const Step& st = a.steps[si];
    if (a.is_external(st.action) || !in_set(c.inv_a, st.from)) continue;
    StateSet target(b.states.size(), 0);
    for (int v : g.image[st.to]) target[v] = 1;
    bool empty_match = false, nonempty_match = false;
    for (int u : g.image[st.from]) {
      if (!in_set(c.inv_b, u)) continue;
      if (in_set(target, u)) empty_match = true;
      detail::FragmentQuery q;
      q.from = u;
      q.target = &target;
      q.min_len = 1;
      q.bound = c.bound;
      if (!detail::find_fragments(b, q).empty()) nonempty_match = true;
    }
    if (empty_match) {
      out.sometimes_mask[si] = 1;
      out.sometimes_silent.push_back(si);
      if (!nonempty_match) {
        out.always_mask[si] = 1;
        out.always_silent.push_back(si);
      }
    }
  }
  return out;
}

// --- liveness-preserving variants ---------------------------------------------

struct ResolvedPairMap {
  LivenessCondition m;                           // the abstract pairs, in order
  std::vector<const ComplementedPair*> h_of;     // aligned concrete targets
  std::vector<ComplementedPair> storage;
};

// Resolve and certify the pair map: every target must be (or be shown to be)
// in the semantic closure of (A, L).
inline std::optional<SimReport> resolve_pair_map(const Automaton& a,
                                                 const LivenessCondition& l,
                                                 const LivenessCondition& m,
                                                 const SimCandidate& cand,
                                                 ResolvedPairMap& out) {
  out.m = m;
  out.storage.reserve(cand.h.size());
  for (const auto& q : m.pairs) {
    const PairMapEntry* entry = nullptr;
    for (const auto& e : cand.h)
      if (e.q_id == q.id) entry = &e;
    if (!entry) {
      SimReport r;
      r.ok = false;
      r.clause = "pair-map";
      r.detail = json{{"missing", q.id}};
      return r;
    }
    if (entry->needs_certificate) {
      auto cm = closure_member(a, l, entry->p);
      if (!cm.member) {
        SimReport r;
        r.ok = false;
        r.clause = "pair-map-certificate";
        r.detail = json{{"pair", q.id}, {"target", entry->p.id}};
        return r;
      }
    }
    out.storage.push_back(entry->p);
  }
  for (const auto& p : out.storage) out.h_of.push_back(&p);
  return std::nullopt;
}

inline SimReport check_live_forward_sim(const Automaton& a,
                                        const LivenessCondition& l,
                                        const Automaton& b,
                                        const LivenessCondition& m,
                                        const SimCandidate& cand) {
  SimReport r;
  SimContext c = make_context(a, b, cand, m.pairs.size());
  ResolvedPairMap pm;
  if (auto bad = resolve_pair_map(a, l, m, cand, pm)) return *bad;
  for (int s : a.start) {
    bool ok = false;
    for (int u : cand.g.image[s])
      ok = ok || std::find(b.start.begin(), b.start.end(), u) != b.start.end();
    if (!ok) {
      r.ok = false;
      r.clause = "start";
      r.detail = json{{"state", a.states[s]}};
      return r;
    }
  }
  for (const Step& st : a.steps) {
    if (!in_set(c.inv_a, st.from)) continue;
    StateSet target(b.states.size(), 0);
    for (int v : cand.g.image[st.to]) target[v] = 1;
    auto lc = detail::live_conditions(pm.m, pm.h_of, st.from, st.to);
    for (int u : cand.g.image[st.from]) {
      if (!in_set(c.inv_b, u)) continue;
      detail::FragmentQuery q;
      q.from = u;
      if (a.is_external(st.action)) q.ext = a.actions[st.action].name;
      q.target = &target;
      q.avoid = lc.avoid;
      q.must_visit = lc.must_visit;
      q.bound = c.bound;
      if (detail::find_fragments(b, q).empty()) {
        r.ok = false;
        r.clause = "step-pairs";
        r.detail = json{{"step", detail::step_json(a, st)},
                        {"abstract_state", b.states[u]}};
        return r;
      }
    }
  }
  // silent clause: no live execution may cycle on always-silent steps alone
  auto silent = analyze_silent_steps(a, b, cand.g, c);
  r.always_silent = silent.always_silent;
  if (!silent.always_silent.empty()) {
    EmptinessOptions opt;
    opt.cycle_step_ok = &silent.always_mask;
    auto em = streett_emptiness(a, l, opt);
    if (!em.empty) {
      r.ok = false;
      r.clause = "silent-cycle";
      r.silent_cycle = em.witness;
      r.detail = json{{"always_silent_steps", int(silent.always_silent.size())}};
      return r;
    }
  }
  return r;
}

inline SimReport check_live_refinement(const Automaton& a,
                                       const LivenessCondition& l,
                                       const Automaton& b,
                                       const LivenessCondition& m,
                                       const SimCandidate& cand) {
  SimContext c = make_context(a, b, cand, m.pairs.size());
  for (size_t s = 0; s < a.states.size(); ++s) {
    if (!in_set(c.inv_a, int(s))) continue;
    size_t n = 0;
    for (int u : cand.g.image[s])
      if (in_set(c.inv_b, u)) ++n;
    if (n != 1) {
      SimReport r;
      r.ok = false;
      r.clause = "functional";
      r.detail = json{{"state", a.states[s]}, {"image_size", n}};
      return r;
    }
  }
  return check_live_forward_sim(a, l, b, m, cand);
}

inline SimReport check_live_backward_sim(const Automaton& a,
                                         const LivenessCondition& l,
                                         const Automaton& b,
                                         const LivenessCondition& m,
                                         const SimCandidate& cand) {
  SimReport r = check_backward_sim(a, b, cand);
  if (!r.ok) return r;
  SimContext c = make_context(a, b, cand, m.pairs.size());
  ResolvedPairMap pm;
  if (auto bad = resolve_pair_map(a, l, m, cand, pm)) return *bad;
  auto image_inv = [&](int s) {
    std::vector<int> v;
    for (int u : cand.g.image[s])
      if (in_set(c.inv_b, u)) v.push_back(u);
    return v;
  };
  for (const Step& st : a.steps) {
    if (!in_set(c.inv_a, st.from) || !in_set(c.inv_a, st.to)) continue;
    auto lc = detail::live_conditions(pm.m, pm.h_of, st.from, st.to);
    for (int u2 : image_inv(st.to)) {
      bool ok = false;
      for (int u : image_inv(st.from)) {
        detail::FragmentQuery q;
        q.from = u;
        if (a.is_external(st.action)) q.ext = a.actions[st.action].name;
        q.exact_target = u2;
        q.avoid = lc.avoid;
        q.must_visit = lc.must_visit;
        q.bound = c.bound;
        if (!detail::find_fragments(b, q).empty()) {
          ok = true;
          break;
        }
      }
      if (!ok) {
        r.ok = false;
        r.clause = "step-pairs";
        r.detail = json{{"step", detail::step_json(a, st)},
                        {"abstract_state", b.states[u2]}};
        return r;
      }
    }
  }
  auto silent = analyze_silent_steps(a, b, cand.g, c);
  r.sometimes_silent = silent.sometimes_silent;
  if (!silent.sometimes_silent.empty()) {
    EmptinessOptions opt;
    opt.cycle_step_ok = &silent.sometimes_mask;
    auto em = streett_emptiness(a, l, opt);
    if (!em.empty) {
      r.ok = false;
      r.clause = "silent-cycle";
      r.silent_cycle = em.witness;
      r.detail =
          json{{"sometimes_silent_steps", int(silent.sometimes_silent.size())}};
      return r;
    }
  }
  return r;
}

inline SimReport check_live_history_sim(const Automaton& a,
                                        const LivenessCondition& l,
                                        const Automaton& b,
                                        const LivenessCondition& m,
                                        const SimCandidate& cand) {
  SimReport r = check_live_forward_sim(a, l, b, m, cand);
  if (!r.ok) return r;
  SimCandidate inv;
  inv.g = inverse(cand.g);
  inv.inv_a = cand.inv_b;
  inv.inv_b = cand.inv_a;
  inv.bound = cand.bound;
  SimReport rr = check_refinement(b, a, inv);
  if (!rr.ok) rr.clause = "inverse-" + rr.clause;
  return rr;
}

inline SimReport check_live_prophecy_sim(const Automaton& a,
                                         const LivenessCondition& l,
                                         const Automaton& b,
                                         const LivenessCondition& m,
                                         const SimCandidate& cand) {
  SimReport r = check_live_backward_sim(a, l, b, m, cand);
  if (!r.ok) return r;
  SimCandidate inv;
  inv.g = inverse(cand.g);
  inv.inv_a = cand.inv_b;
  inv.inv_b = cand.inv_a;
  inv.bound = cand.bound;
  SimReport rr = check_refinement(b, a, inv);
  if (!rr.ok) rr.clause = "inverse-" + rr.clause;
  return rr;
}

using LiveSimChecker = SimReport (*)(const Automaton&, const LivenessCondition&,
                                     const Automaton&, const LivenessCondition&,
                                     const SimCandidate&);

}  // namespace liveref
