#pragma once

// Builders that turn a passing liveness-preserving simulation candidate and
// a live concrete lasso into an abstract lasso plus an index mapping, then
// re-validate the result. Forward variant walks fragments greedily with
// bounded backtracking; backward variant extracts a cycle from the induced
// digraph folded over (abstract state, cycle phase).

#include "liveref/simulation.hpp"

namespace liveref {

struct Correspondence {
  bool ok = false;
  std::string failure;
  Lasso abstract_lasso;
  IndexMapping mapping;
};

namespace detail {

struct FragmentChoiceCtx {
  const Automaton& a;
  const Automaton& b;
  const SimCandidate& cand;
  const SimContext& ctx;
  const ResolvedPairMap& pm;
};

// matching fragments for one concrete step from abstract state u, nonempty
// ones first (they keep the abstract execution growing)
inline std::vector<Execution> step_fragments(const FragmentChoiceCtx& fc,
                                             const Step& st, int u,
                                             size_t max_results) {
  StateSet target(fc.b.states.size(), 0);
  for (int v : fc.cand.g.image[st.to]) target[v] = 1;
  auto lc = live_conditions(fc.pm.m, fc.pm.h_of, st.from, st.to);
  FragmentQuery q;
  q.from = u;
  if (fc.a.is_external(st.action)) q.ext = fc.a.actions[st.action].name;
  q.target = &target;
  q.avoid = lc.avoid;
  q.must_visit = lc.must_visit;
  q.bound = fc.ctx.bound;
  q.max_results = max_results;
  q.min_len = 1;
  auto nonempty = find_fragments(fc.b, q);
  q.min_len = 0;
  q.bound = 0;  // only the empty fragment
  auto empty = find_fragments(fc.b, q);
  nonempty.insert(nonempty.end(), empty.begin(), empty.end());
  return nonempty;
}

inline const Step* find_step(const Automaton& a, int s, int act, int s2) {
  for (const Step& st : a.steps)
    if (st.from == s && st.action == act && st.to == s2) return &st;
  return nullptr;
}

}  // namespace detail

inline Correspondence build_correspondence_forward(
    const Automaton& a, const LivenessCondition& l, const Automaton& b,
    const LivenessCondition& m, const SimCandidate& cand, const Lasso& conc,
    size_t max_rounds = 512) {
  Correspondence out;
  SimContext ctx = make_context(a, b, cand, m.pairs.size());
  ResolvedPairMap pm;
  if (auto bad = resolve_pair_map(a, l, m, cand, pm)) {
    out.failure = "pair map: " + bad->clause;
    return out;
  }
  detail::FragmentChoiceCtx fc{a, b, cand, ctx, pm};
  size_t P = conc.stem_len(), C = conc.cycle_len();

  // deterministic start: smallest related start state of b
  int u0 = -1;
  for (int u : cand.g.image[conc.state_at(0)])
    if (std::find(b.start.begin(), b.start.end(), u) != b.start.end()) {
      u0 = u;
      break;
    }
  if (u0 < 0) {
    out.failure = "no related abstract start state";
    return out;
  }

  Execution abs{{u0}, {}};
  std::vector<size_t> table{0};
  std::map<std::pair<size_t, int>, std::pair<size_t, size_t>> seen;
  // (cycle phase, abstract state) -> (concrete position, abstract position)
  for (size_t i = 1; i <= P + max_rounds * C; ++i) {
    const Step* st = detail::find_step(a, conc.state_at(i - 1),
                                       conc.action_at(i), conc.state_at(i));
    if (!st) {
      out.failure = "lasso is not an execution of the concrete automaton";
      return out;
    }
    auto frags = detail::step_fragments(fc, *st, abs.lstate(), 1);
    if (frags.empty()) {
      out.failure = "no matching fragment at position " + std::to_string(i);
      return out;
    }
    abs = abs.then(frags.front());
    table.push_back(abs.length());
    if (i >= P && (i - P) % C == 0) {
      auto key = std::make_pair((i - P) % C, abs.lstate());
      auto it = seen.find(key);
      if (it != seen.end()) {
        auto [i1, j1] = it->second;
        if (abs.length() > j1) {
          // close: stem = abstract prefix up to j1, cycle = the rest
          out.abstract_lasso.stem.states.assign(abs.states.begin(),
                                                abs.states.begin() + j1 + 1);
          out.abstract_lasso.stem.acts.assign(abs.acts.begin(),
                                              abs.acts.begin() + j1);
          out.abstract_lasso.cycle.states.assign(abs.states.begin() + j1,
                                                 abs.states.end());
          out.abstract_lasso.cycle.acts.assign(abs.acts.begin() + j1,
                                               abs.acts.end());
          out.mapping.table = table;
          out.mapping.periodic_from = i1;
          out.mapping.cycle_repeat = (i - i1) / C;
          out.mapping.increment = abs.length() - j1;
          StateRel rel = [&](int s, int u) {
            auto& im = cand.g.image[s];
            return std::binary_search(im.begin(), im.end(), u);
          };
          LivePairContext lctx{&pm.m, pm.h_of};
          auto chk = check_index_mapping(a, conc, b, out.abstract_lasso, rel,
                                         out.mapping, &lctx);
          if (!chk.ok) {
            out.failure = "re-validation failed: " + chk.failure;
            return out;
          }
          if (!is_live(out.abstract_lasso, m)) {
            out.failure = "abstract lasso is not live";
            return out;
          }
          out.ok = true;
          return out;
        }
        // abstract side did not advance over a full revolution: remember the
        // later visit and keep going (a non-always-silent step must appear)
        it->second = {i, abs.length()};
      } else {
        seen[key] = {i, abs.length()};
      }
    }
  }
  out.failure = "no closure within the round budget";
  return out;
}

// --- induced digraph (backward variant) ---------------------------------------

struct InducedDigraph {
  size_t levels = 0;                       // positions 0..levels-1 of the lasso
  std::vector<std::vector<int>> nodes;     // abstract states per level
  // edges[i]: (u at level i-1, u' at level i, matching fragment)
  std::vector<std::vector<std::tuple<int, int, Execution>>> edges;
  std::vector<std::string> violations;     // structural lemma violations
};

inline InducedDigraph build_induced_digraph(const Automaton& a,
                                            const LivenessCondition& l,
                                            const Automaton& b,
                                            const LivenessCondition& m,
                                            const SimCandidate& cand,
                                            const Lasso& conc, size_t levels) {
  InducedDigraph d;
  SimContext ctx = make_context(a, b, cand, m.pairs.size());
  ResolvedPairMap pm;
  if (auto bad = resolve_pair_map(a, l, m, cand, pm)) {
    d.violations.push_back("pair map: " + bad->clause);
    return d;
  }
  d.levels = levels;
  d.nodes.resize(levels);
  d.edges.resize(levels);
  auto level_states = [&](size_t i) {
    std::vector<int> v;
    for (int u : cand.g.image[conc.state_at(i)])
      if (in_set(ctx.inv_b, u)) v.push_back(u);
    return v;
  };
  for (size_t i = 0; i < levels; ++i) {
    d.nodes[i] = level_states(i);
    if (d.nodes[i].empty())
      d.violations.push_back("level " + std::to_string(i) + " is empty");
  }
  if (!d.nodes.empty())
    for (int u : d.nodes[0])
      if (std::find(b.start.begin(), b.start.end(), u) == b.start.end())
        d.violations.push_back("root level contains a non-start state");
  for (size_t i = 1; i < levels; ++i) {
    const Step* st = detail::find_step(a, conc.state_at(i - 1),
                                       conc.action_at(i), conc.state_at(i));
    if (!st) {
      d.violations.push_back("lasso is not an execution at position " +
                             std::to_string(i));
      return d;
    }
    auto lc = detail::live_conditions(pm.m, pm.h_of, st->from, st->to);
    for (int u2 : d.nodes[i]) {
      bool has_pred = false;
      for (int u : d.nodes[i - 1]) {
        detail::FragmentQuery q;
        q.from = u;
        if (a.is_external(st->action)) q.ext = a.actions[st->action].name;
        q.exact_target = u2;
        q.avoid = lc.avoid;
        q.must_visit = lc.must_visit;
        q.bound = ctx.bound;
        // prefer nonempty fragments so folded cycles keep the abstract side
        // advancing; fall back to the empty match
        q.min_len = 1;
        auto fr = detail::find_fragments(b, q);
        if (fr.empty()) {
          q.min_len = 0;
          q.bound = 0;
          fr = detail::find_fragments(b, q);
        }
        if (!fr.empty()) {
          d.edges[i].push_back({u, u2, fr.front()});
          has_pred = true;
        }
      }
      if (!has_pred)
        d.violations.push_back("node without predecessor at level " +
                               std::to_string(i));
    }
  }
  return d;
}

inline Correspondence build_correspondence_backward(
    const Automaton& a, const LivenessCondition& l, const Automaton& b,
    const LivenessCondition& m, const SimCandidate& cand, const Lasso& conc) {
  Correspondence out;
  size_t P = conc.stem_len(), C = conc.cycle_len();
  // two revolutions expose every phase-graph edge; the digraph over levels
  // 0..P+2C then folds into a finite graph whose cycles give infinite paths
  size_t levels = P + 2 * C + 1;
  auto d = build_induced_digraph(a, l, b, m, cand, conc, levels);
  if (!d.violations.empty()) {
    out.failure = d.violations.front();
    return out;
  }
  // fold: for positions i >= P the edge set depends only on (i - P) mod C
  auto klass_of = [&](size_t i) { return i < P ? i : P + (i - P) % C; };
  // edges by class: use digraph level i = klass for i < P+C, and the second
  // revolution (levels P+C..P+2C) confirms the wraparound edges
  std::map<std::pair<size_t, int>, std::vector<std::pair<int, const Execution*>>>
      succ;  // (klass, u) -> [(u', fragment)]
  for (size_t i = 1; i < levels; ++i) {
    size_t kfrom = klass_of(i - 1);
    for (auto& [u, u2, frag] : d.edges[i])
      succ[{kfrom, u}].push_back({u2, &frag});
  }
  for (auto& [k, v] : succ) {
    std::sort(v.begin(), v.end(),
              [](auto& x, auto& y) { return x.first < y.first; });
    v.erase(std::unique(v.begin(), v.end(),
                        [](auto& x, auto& y) { return x.first == y.first; }),
            v.end());
  }

  // DFS from roots for a lasso in the folded graph
  struct PathEnt { size_t klass; int u; const Execution* frag; };
  std::vector<PathEnt> path;
  std::set<std::pair<size_t, int>> on_path;
  std::optional<size_t> cycle_at;
  std::function<bool(size_t, int)> dfs = [&](size_t k, int u) -> bool {
    auto key = std::make_pair(k, u);
    // the node itself sits at path.back(); look for an earlier occurrence
    for (size_t i = 0; i + 1 < path.size(); ++i)
      if (path[i].klass == k && path[i].u == u && k >= P) {
        cycle_at = i;
        return true;
      }
    auto it = succ.find(key);
    if (it == succ.end()) return false;
    size_t k2 = k + 1 < P + C ? k + 1 : P;
    for (auto& [u2, frag] : it->second) {
      path.push_back({k2, u2, frag});
      if (dfs(k2, u2)) return true;
      path.pop_back();
    }
    return false;
  };

  bool found = false;
  for (int u : d.nodes[0]) {
    path.clear();
    path.push_back({0, u, nullptr});
    if (dfs(0, u)) {
      found = true;
      break;
    }
  }
  if (!found) {
    out.failure = "no infinite path in the induced digraph";
    return out;
  }

  // assemble the abstract lasso: path[cycle_at+1..] repeats forever. The
  // mapping anchor must sit on a whole concrete-cycle boundary, so advance
  // from cycle_at to the first aligned index and unroll the folded cycle as
  // far as that requires.
  size_t len = path.size() - 1 - *cycle_at;  // multiple of C by construction
  size_t i1 = *cycle_at + (C - (*cycle_at - P) % C) % C;
  size_t i2 = i1 + len;
  auto entry = [&](size_t i) -> const PathEnt& {
    if (i < path.size()) return path[i];
    return path[*cycle_at + 1 + (i - *cycle_at - 1) % len];
  };
  Execution abs{{path[0].u}, {}};
  std::vector<size_t> table{0};
  size_t stem_abs_len = 0;
  for (size_t i = 1; i <= i2; ++i) {
    abs = abs.then(*entry(i).frag);
    table.push_back(abs.length());
    if (i == i1) stem_abs_len = abs.length();
  }
  size_t delta = abs.length() - stem_abs_len;
  if (delta < 1) {
    out.failure = "abstract period is empty (cofinality would fail)";
    return out;
  }
  out.abstract_lasso.stem.states.assign(abs.states.begin(),
                                        abs.states.begin() + stem_abs_len + 1);
  out.abstract_lasso.stem.acts.assign(abs.acts.begin(),
                                      abs.acts.begin() + stem_abs_len);
  out.abstract_lasso.cycle.states.assign(abs.states.begin() + stem_abs_len,
                                         abs.states.end());
  out.abstract_lasso.cycle.acts.assign(abs.acts.begin() + stem_abs_len,
                                       abs.acts.end());
  out.mapping.table = table;
  out.mapping.periodic_from = i1;
  out.mapping.cycle_repeat = len / C;
  out.mapping.increment = delta;

  SimContext ctx = make_context(a, b, cand, m.pairs.size());
  ResolvedPairMap pm;
  resolve_pair_map(a, l, m, cand, pm);
  StateRel rel = [&](int s, int u) {
    auto& im = cand.g.image[s];
    return std::binary_search(im.begin(), im.end(), u);
  };
  LivePairContext lctx{&pm.m, pm.h_of};
  auto chk =
      check_index_mapping(a, conc, b, out.abstract_lasso, rel, out.mapping, &lctx);
  if (!chk.ok) {
    out.failure = "re-validation failed: " + chk.failure;
    return out;
  }
  if (!is_live(out.abstract_lasso, m)) {
    out.failure = "abstract lasso is not live";
    return out;
  }
  out.ok = true;
  return out;
}

}  // namespace liveref
