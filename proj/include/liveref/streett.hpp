#pragma once

// Emptiness under complemented-pair (Streett) acceptance by SCC refinement,
// plus a brute-force lasso enumeration used as an independent oracle, and
// the derived checks built on top: machine closure, closure membership.

#include <deque>

#include "liveref/liveness.hpp"

namespace liveref {

// Extra constraints threaded through the search so product constructions
// (trace inclusion, silent-cycle analysis, closure membership) reuse one
// engine. All optional.
struct EmptinessOptions {
  std::optional<int> from;                    // root instead of start set
  const std::vector<char>* cycle_step_ok = nullptr;   // mask over steps
  const StateSet* cycle_forbid = nullptr;     // cycle must avoid
  const StateSet* cycle_visit = nullptr;      // cycle must meet
  const std::vector<char>* cycle_step_need = nullptr; // cycle must use one
};

struct EmptinessResult {
  bool empty = true;
  std::optional<Lasso> witness;  // rooted at `from` when that was given
};

namespace detail {

struct Graph {
  int n = 0;
  std::vector<std::vector<std::pair<int, int>>> adj;  // (step idx, to)
};

// Tarjan SCCs over a node subset, deterministic order.
inline std::vector<std::vector<int>> sccs(const Graph& g,
                                          const std::vector<char>& alive) {
  std::vector<int> idx(g.n, -1), low(g.n, 0), stk;
  std::vector<char> on(g.n, 0);
  std::vector<std::vector<int>> out;
  int counter = 0;
  // iterative tarjan
  struct Frame { int v; size_t ei; };
  for (int root = 0; root < g.n; ++root) {
    if (!alive[root] || idx[root] != -1) continue;
    std::vector<Frame> call{{root, 0}};
    idx[root] = low[root] = counter++;
    stk.push_back(root);
    on[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      int v = f.v;
      bool descended = false;
      while (f.ei < g.adj[v].size()) {
        int w = g.adj[v][f.ei++].second;
        if (!alive[w]) continue;
        if (idx[w] == -1) {
          idx[w] = low[w] = counter++;
          stk.push_back(w);
          on[w] = 1;
          call.push_back({w, 0});
          descended = true;
          break;
        }
        if (on[w]) low[v] = std::min(low[v], idx[w]);
      }
      if (descended) continue;
      if (low[v] == idx[v]) {
        std::vector<int> comp;
        int w;
        do {
          w = stk.back();
          stk.pop_back();
          on[w] = 0;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
      call.pop_back();
      if (!call.empty())
        low[call.back().v] = std::min(low[call.back().v], low[v]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// shortest path v -> w inside `alive` (w may equal v: then a cycle of
// length >= 1). Returns the step sequence; empty optional if none.
inline std::optional<std::vector<int>> shortest_path(
    const Automaton& a, const Graph& g, const std::vector<char>& alive, int v,
    int w, bool force_move) {
  if (v == w && !force_move) return std::vector<int>{};
  std::vector<int> pre(g.n, -1);  // incoming step index
  std::deque<int> q;
  auto expand = [&](int x) {
    for (auto [si, to] : g.adj[x]) {
      if (!alive[to] || pre[to] != -1) continue;
      pre[to] = si;
      q.push_back(to);
    }
  };
  expand(v);
  if (pre[w] != -1 || v == w) {
    // fallthrough to BFS below; v==w handled by waiting for rediscovery
  }
  while (!q.empty()) {
    int x = q.front();
    q.pop_front();
    if (x == w) break;
    expand(x);
  }
  if (pre[w] == -1) return std::nullopt;
  std::vector<int> rev;
  int cur = w;
  while (true) {
    int si = pre[cur];
    rev.push_back(si);
    cur = a.steps[si].from;
    if (cur == v && (int(rev.size()) >= 1)) break;
    if (pre[cur] == -1) break;  // reached v via first expansion
  }
  std::reverse(rev.begin(), rev.end());
  return rev;
}

inline Execution steps_to_execution(const Automaton& a, int from,
                                    const std::vector<int>& step_idxs) {
  Execution e;
  e.states.push_back(from);
  for (int si : step_idxs) {
    e.acts.push_back(a.steps[si].action);
    e.states.push_back(a.steps[si].to);
  }
  return e;
}

}  // namespace detail

// SCC-refinement search for a live lasso. Returns empty=true when no
// reachable cycle satisfies every pair under the given options.
inline EmptinessResult streett_emptiness(const Automaton& a,
                                         const LivenessCondition& cond,
                                         const EmptinessOptions& opt = {}) {
  int n = int(a.states.size());
  EmptinessResult res;

  // reachability over the full step relation
  std::vector<char> reach(n, 0);
  {
    std::vector<int> q;
    if (opt.from) {
      reach[*opt.from] = 1;
      q.push_back(*opt.from);
    } else {
      for (int s : a.start)
        if (!reach[s]) {
          reach[s] = 1;
          q.push_back(s);
        }
    }
    for (size_t h = 0; h < q.size(); ++h)
      for (const Step& st : a.out()[q[h]])
        if (!reach[st.to]) {
          reach[st.to] = 1;
          q.push_back(st.to);
        }
  }

  // cycle graph: restricted steps, restricted nodes
  detail::Graph g;
  g.n = n;
  g.adj.assign(n, {});
  for (int si = 0; si < int(a.steps.size()); ++si) {
    const Step& st = a.steps[si];
    if (opt.cycle_step_ok && !(*opt.cycle_step_ok)[si]) continue;
    if (!reach[st.from] || !reach[st.to]) continue;
    if (opt.cycle_forbid &&
        (in_set(*opt.cycle_forbid, st.from) || in_set(*opt.cycle_forbid, st.to)))
      continue;
    g.adj[st.from].push_back({si, st.to});
  }

  std::vector<char> alive(n, 0);
  for (int s = 0; s < n; ++s)
    alive[s] = reach[s] && !(opt.cycle_forbid && in_set(*opt.cycle_forbid, s));

  std::function<std::optional<std::pair<std::vector<int>, std::vector<char>>>(
      const std::vector<char>&)>
      refine = [&](const std::vector<char>& live_nodes)
      -> std::optional<std::pair<std::vector<int>, std::vector<char>>> {
    for (const auto& comp : detail::sccs(g, live_nodes)) {
      std::vector<char> in_comp(n, 0);
      for (int v : comp) in_comp[v] = 1;
      bool has_edge = false;
      for (int v : comp)
        for (auto [si, to] : g.adj[v])
          if (in_comp[to] && live_nodes[to]) { has_edge = true; break; }
      if (!has_edge) continue;
      std::vector<const ComplementedPair*> violated;
      bool accepting = true;
      for (const auto& p : cond.pairs) {
        bool red = false, green = false;
        for (int v : comp) {
          red = red || in_set(p.red, v);
          green = green || in_set(p.green, v);
        }
        if (red && !green) {
          violated.push_back(&p);
          accepting = false;
        }
      }
      if (accepting) {
        if (opt.cycle_visit) {
          bool hit = false;
          for (int v : comp) hit = hit || in_set(*opt.cycle_visit, v);
          if (!hit) continue;  // no refinement can help: subsets only shrink
        }
        if (opt.cycle_step_need) {
          bool hit = false;
          for (int v : comp)
            for (auto [si, to] : g.adj[v])
              if (in_comp[to] && (*opt.cycle_step_need)[si]) hit = true;
          if (!hit) continue;
        }
        std::vector<char> mask(n, 0);
        for (int v : comp) mask[v] = live_nodes[v];
        return std::make_pair(comp, mask);
      }
      if (!violated.empty()) {
        std::vector<char> shrunk(n, 0);
        for (int v : comp) shrunk[v] = live_nodes[v];
        for (const auto* p : violated)
          for (int v : comp)
            if (in_set(p->red, v)) shrunk[v] = 0;
        auto sub = refine(shrunk);
        if (sub) return sub;
      }
    }
    return std::nullopt;
  };

  auto hitptr = refine(alive);
  if (!hitptr) return res;
  const auto& [comp, mask] = *hitptr;

  // synthesize the cycle: from a deterministic anchor, chain shortest paths
  // through one green per triggered pair (pair-id order), any required
  // visit state, and one required step, then close.
  std::vector<int> targets;
  auto pick_in = [&](const StateSet& s) -> int {
    for (int v : comp)
      if (in_set(s, v) && mask[v]) return v;
    return -1;
  };
  for (const auto& p : cond.pairs) {
    bool red = false;
    for (int v : comp) red = red || in_set(p.red, v);
    if (red) {
      int gvw = pick_in(p.green);
      if (gvw >= 0) targets.push_back(gvw);
    }
  }
  if (opt.cycle_visit) {
    int v = pick_in(*opt.cycle_visit);
    if (v >= 0) targets.push_back(v);
  }
  std::optional<int> need_step;
  if (opt.cycle_step_need) {
    for (int v : comp) {
      for (auto [si, to] : g.adj[v])
        if (mask[to] && (*opt.cycle_step_need)[si]) { need_step = si; break; }
      if (need_step) break;
    }
  }

  int anchor = targets.empty() ? comp.front() : targets.front();
  std::vector<int> cyc_steps;
  int cur = anchor;
  auto route_to = [&](int dst, bool force) {
    auto seg = detail::shortest_path(a, g, mask, cur, dst, force);
    // strong connectivity of the component guarantees a path
    cyc_steps.insert(cyc_steps.end(), seg->begin(), seg->end());
    cur = dst;
  };
  for (int t : targets)
    if (t != cur) route_to(t, false);
  if (need_step) {
    const Step& st = a.steps[*need_step];
    if (st.from != cur) route_to(st.from, false);
    cyc_steps.push_back(*need_step);
    cur = st.to;
  }
  route_to(anchor, cyc_steps.empty());

  // stem over the full graph from the root to the anchor
  detail::Graph full;
  full.n = n;
  full.adj.assign(n, {});
  for (int si = 0; si < int(a.steps.size()); ++si)
    full.adj[a.steps[si].from].push_back({si, a.steps[si].to});
  std::vector<char> all(n, 1);
  Lasso best;
  bool have = false;
  std::vector<int> roots =
      opt.from ? std::vector<int>{*opt.from} : a.start;
  for (int r0 : roots) {
    auto seg = detail::shortest_path(a, full, all, r0, anchor, false);
    if (!seg) continue;
    Lasso l;
    l.stem = detail::steps_to_execution(a, r0, *seg);
    l.cycle = detail::steps_to_execution(a, anchor, cyc_steps);
    if (!have || l.stem_len() < best.stem_len()) {
      best = l;
      have = true;
    }
  }
  res.empty = false;
  if (have) res.witness = best;
  return res;
}

// Exhaustive lasso enumeration within bounds, filtered by is_live and
// deduplicated by (cycle state multiset, canonical trace). Branches whose
// cycle walk revisits a (state, red-mask, green-mask) node are pruned; such
// walks contain a status-neutral subloop and add no new dedup class.
inline std::vector<Lasso> enumerate_live_lassos(const Automaton& a,
                                                const LivenessCondition& cond,
                                                size_t stem_bound,
                                                size_t cycle_bound,
                                                size_t max_count = SIZE_MAX) {
  std::vector<Lasso> out;
  std::set<std::pair<std::vector<int>, std::string>> seen;
  size_t k = cond.pairs.size();
  auto mask_of = [&](int s) {
    unsigned rm = 0, gm = 0;
    for (size_t i = 0; i < k; ++i) {
      if (in_set(cond.pairs[i].red, s)) rm |= 1u << i;
      if (in_set(cond.pairs[i].green, s)) gm |= 1u << i;
    }
    return std::pair<unsigned, unsigned>{rm, gm};
  };

  std::function<void(Execution&)> cycles_from;
  Execution stem;

  std::set<std::tuple<int, unsigned, unsigned>> on_walk;
  std::function<void(Execution&, unsigned, unsigned)> cyc_dfs =
      [&](Execution& cyc, unsigned rm, unsigned gm) {
        if (out.size() >= max_count) return;
        if (cyc.length() >= cycle_bound) return;
        int cur = cyc.lstate();
        for (const Step& st : a.out()[cur]) {
          auto [rs, gs] = mask_of(st.to);
          unsigned nrm = rm | rs, ngm = gm | gs;
          cyc.acts.push_back(st.action);
          cyc.states.push_back(st.to);
          if (st.to == cyc.fstate()) {
            bool live = true;
            for (size_t i = 0; i < k; ++i)
              if ((nrm >> i & 1) && !(ngm >> i & 1)) live = false;
            if (live) {
              Lasso l{stem, cyc};
              std::vector<int> ms(cyc.states.begin(), cyc.states.end() - 1);
              std::sort(ms.begin(), ms.end());
              auto key = std::make_pair(ms, trace_of(a, l).dump());
              if (seen.insert(key).second) out.push_back(l);
            }
          }
          auto node = std::make_tuple(st.to, nrm, ngm);
          if (on_walk.insert(node).second) {
            cyc_dfs(cyc, nrm, ngm);
            on_walk.erase(node);
          }
          cyc.acts.pop_back();
          cyc.states.pop_back();
        }
      };

  std::function<void()> stems = [&]() {
    if (out.size() >= max_count) return;
    {
      Execution cyc;
      cyc.states.push_back(stem.lstate());
      auto [rm, gm] = mask_of(stem.lstate());
      on_walk.clear();
      on_walk.insert(std::make_tuple(stem.lstate(), rm, gm));
      cyc_dfs(cyc, rm, gm);
    }
    if (stem.length() >= stem_bound) return;
    for (const Step& st : a.out()[stem.lstate()]) {
      stem.acts.push_back(st.action);
      stem.states.push_back(st.to);
      stems();
      stem.acts.pop_back();
      stem.states.pop_back();
    }
  };

  for (int s0 : a.start) {
    stem = Execution{{s0}, {}};
    stems();
    if (out.size() >= max_count) break;
  }
  return out;
}

// (A, L) is machine closed here iff every reachable state roots some live
// lasso. Returns the offending state index if not.
struct MachineClosureReport {
  bool closed = true;
  std::optional<int> offending_state;
};

inline MachineClosureReport machine_closure_check(const Automaton& a,
                                                  const LivenessCondition& l) {
  for (int s : reachable_states(a)) {
    EmptinessOptions opt;
    opt.from = s;
    if (streett_emptiness(a, l, opt).empty) return {false, s};
  }
  return {true, {}};
}

// p belongs to the semantic closure of (A, L) iff every live lasso of A
// satisfies p, i.e. no live cycle meets p.red while avoiding p.green.
struct ClosureMemberReport {
  bool member = true;
  std::optional<Lasso> counterexample;
};

inline ClosureMemberReport closure_member(const Automaton& a,
                                          const LivenessCondition& l,
                                          const ComplementedPair& p) {
  EmptinessOptions opt;
  opt.cycle_forbid = &p.green;
  opt.cycle_visit = &p.red;
  auto r = streett_emptiness(a, l, opt);
  if (r.empty) return {true, {}};
  return {false, r.witness};
}

// A derived pair joins the reds of one closure member with the greens of
// another; validity reduces to closure membership of the joined pair.
inline ClosureMemberReport derived_pair_check(const Automaton& a,
                                              const LivenessCondition& l,
                                              const ComplementedPair& lower,
                                              const ComplementedPair& upper) {
  ComplementedPair joined{lower.id + "/" + upper.id, lower.red, upper.green};
  return closure_member(a, l, joined);
}

}  // namespace liveref
