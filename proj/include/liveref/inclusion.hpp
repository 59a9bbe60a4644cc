#pragma once

// Trace inclusion: the safe variant compares finite traces by subset
// construction; the live variant checks every enumerated live lasso of the
// left side against a word/automaton product of the right side.

#include "liveref/streett.hpp"

namespace liveref {

struct InclusionBounds {
  size_t stem = 8;
  size_t cycle = 8;
  size_t lasso_cap = 50;        // live lassos examined on the left
  size_t product_cap = 200000;  // explored product states (safe variant)
};

enum class Verdict { holds, fails, conditional, unknown };

struct SafeInclusionResult {
  Verdict verdict = Verdict::holds;
  std::vector<std::string> counterexample_trace;
};

inline void require_shared_externals(const Automaton& a, const Automaton& b) {
  std::set<std::string> ea, eb;
  for (const auto& l : a.actions)
    if (l.kind == ActionKind::external_) ea.insert(l.name);
  for (const auto& l : b.actions)
    if (l.kind == ActionKind::external_) eb.insert(l.name);
  for (const auto& n : ea)
    if (!eb.count(n))
      throw ValidationError("external action '" + n +
                            "' missing from the right-hand signature");
}

// Every finite trace of a is a finite trace of b. Exact unless the product
// cap is hit (verdict unknown).
inline SafeInclusionResult safe_trace_inclusion(const Automaton& a,
                                                const Automaton& b,
                                                const InclusionBounds& bounds = {}) {
  require_shared_externals(a, b);
  auto closure = [&](std::set<int> s) {
    std::vector<int> q(s.begin(), s.end());
    for (size_t h = 0; h < q.size(); ++h)
      for (const Step& st : b.out()[q[h]])
        if (!b.is_external(st.action) && s.insert(st.to).second)
          q.push_back(st.to);
    return s;
  };

  std::set<int> b0(b.start.begin(), b.start.end());
  b0 = closure(std::move(b0));
  using Node = std::pair<int, std::set<int>>;
  std::map<Node, std::pair<Node, std::string>> parent;
  std::deque<Node> queue;
  for (int s : a.start) {
    Node n{s, b0};
    if (!parent.count(n)) {
      parent[n] = {n, ""};
      queue.push_back(n);
    }
  }
  auto trace_to = [&](Node n) {
    std::vector<std::string> t;
    while (true) {
      auto& [p, lbl] = parent[n];
      if (lbl.empty()) break;
      t.push_back(lbl);
      n = p;
    }
    std::reverse(t.begin(), t.end());
    return t;
  };

  size_t explored = 0;
  while (!queue.empty()) {
    if (++explored > bounds.product_cap) return {Verdict::unknown, {}};
    Node n = queue.front();
    queue.pop_front();
    for (const Step& st : a.out()[n.first]) {
      Node next;
      std::string lbl;
      if (!a.is_external(st.action)) {
        next = {st.to, n.second};
      } else {
        lbl = a.actions[st.action].name;
        std::set<int> img;
        for (int u : n.second)
          for (const Step& bs : b.out()[u])
            if (b.is_external(bs.action) && b.actions[bs.action].name == lbl)
              img.insert(bs.to);
        img = closure(std::move(img));
        if (img.empty()) {
          auto t = trace_to(n);
          t.push_back(lbl);
          return {Verdict::fails, t};
        }
        next = {st.to, std::move(img)};
      }
      if (!parent.count(next)) {
        parent[next] = {n, lbl};
        queue.push_back(next);
      }
    }
  }
  return {Verdict::holds, {}};
}

struct LiveInclusionResult {
  Verdict verdict = Verdict::conditional;  // holds-within-bounds
  std::optional<Lasso> counterexample;     // live lasso of a, unmatched
  Trace counterexample_trace;
  size_t lassos_checked = 0;
};

// Does b admit a live (w.r.t. cond_b) lasso with exactly this canonical
// ultimately-periodic (or finite) trace?
inline bool admits_live_trace(const Automaton& b,
                              const LivenessCondition& cond_b,
                              const Trace& t) {
  size_t np = t.prefix.size(), nc = t.period.size();
  size_t positions = np + nc;  // word positions; finite words get a sink
  bool finite = t.period.empty();
  size_t nslots = finite ? np + 1 : positions;
  auto word_at = [&](size_t pos) -> const std::string& {
    return pos < np ? t.prefix[pos] : t.period[pos - np];
  };
  auto next_pos = [&](size_t pos) {
    if (finite) return pos + 1;
    return pos + 1 < positions ? pos + 1 : np;
  };

  Automaton prod;
  auto pname = [&](int u, size_t pos) {
    return json{b.states[u], pos}.dump();
  };
  for (const auto& l : b.actions) prod.add_action(l.name, l.kind);
  // breadth-first product construction
  std::map<std::pair<int, size_t>, int> idx;
  std::vector<std::pair<int, size_t>> nodes;
  auto intern = [&](int u, size_t pos) {
    auto key = std::make_pair(u, pos);
    auto it = idx.find(key);
    if (it != idx.end()) return it->second;
    int id = prod.add_state(pname(u, pos));
    idx[key] = id;
    nodes.push_back(key);
    return id;
  };
  for (int u : b.start) prod.start.push_back(intern(u, 0));
  std::vector<char> advancing;  // per product step: consumed a word letter
  for (size_t h = 0; h < nodes.size(); ++h) {
    auto [u, pos] = nodes[h];
    int from = idx[{u, pos}];
    for (const Step& st : b.out()[u]) {
      if (!b.is_external(st.action)) {
        prod.add_step(from, st.action, intern(st.to, pos));
        advancing.push_back(0);
      } else if ((!finite || pos < np) && pos < positions &&
                 b.actions[st.action].name == word_at(pos)) {
        prod.add_step(from, st.action, intern(st.to, next_pos(pos)));
        advancing.push_back(1);
      }
    }
  }
  if (prod.states.empty() || prod.start.empty()) return false;

  LivenessCondition lifted;
  for (const auto& p : cond_b.pairs) {
    ComplementedPair q{p.id, StateSet(prod.states.size(), 0),
                       StateSet(prod.states.size(), 0)};
    for (size_t i = 0; i < nodes.size(); ++i) {
      q.red[i] = in_set(p.red, nodes[i].first);
      q.green[i] = in_set(p.green, nodes[i].first);
    }
    lifted.pairs.push_back(std::move(q));
  }

  EmptinessOptions opt;
  StateSet at_end;
  if (finite) {
    // the cycle must sit past the whole word and stay silent
    at_end.assign(prod.states.size(), 0);
    for (size_t i = 0; i < nodes.size(); ++i)
      at_end[i] = nodes[i].second == np;
    opt.cycle_visit = &at_end;
  } else {
    // the cycle must wrap the word cycle at least once
    opt.cycle_step_need = &advancing;
  }
  return !streett_emptiness(prod, lifted, opt).empty;
}

inline LiveInclusionResult live_trace_inclusion(const Automaton& a,
                                                const LivenessCondition& cond_a,
                                                const Automaton& b,
                                                const LivenessCondition& cond_b,
                                                const InclusionBounds& bounds = {}) {
  require_shared_externals(a, b);
  LiveInclusionResult r;
  auto lassos =
      enumerate_live_lassos(a, cond_a, bounds.stem, bounds.cycle, bounds.lasso_cap);
  for (const Lasso& l : lassos) {
    ++r.lassos_checked;
    Trace t = trace_of(a, l);
    if (!admits_live_trace(b, cond_b, t)) {
      r.verdict = Verdict::fails;
      r.counterexample = l;
      r.counterexample_trace = t;
      return r;
    }
  }
  r.verdict = Verdict::conditional;
  return r;
}

}  // namespace liveref
