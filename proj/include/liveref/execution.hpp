#pragma once

// Finite execution fragments, lassos (the only finite presentation of
// infinite executions here), and canonical ultimately-periodic traces.

#include <cassert>
#include <numeric>

#include "liveref/automaton.hpp"

namespace liveref {

// Alternating state/action sequence: states has one more entry than acts.
struct Execution {
  std::vector<int> states;  // state indices, length n+1
  std::vector<int> acts;    // action indices, length n

  size_t length() const { return acts.size(); }
  int fstate() const { return states.front(); }
  int lstate() const { return states.back(); }
  bool empty() const { return acts.empty(); }

  Execution then(const Execution& tail) const {
    assert(lstate() == tail.fstate());
    Execution r = *this;
    r.states.insert(r.states.end(), tail.states.begin() + 1, tail.states.end());
    r.acts.insert(r.acts.end(), tail.acts.begin(), tail.acts.end());
    return r;
  }
};

// stem: from a start state to the cycle anchor; cycle: nonempty, returns to
// the anchor (cycle.fstate == cycle.lstate == stem.lstate).
struct Lasso {
  Execution stem;   // may be empty (states = [anchor])
  Execution cycle;  // length >= 1

  int anchor() const { return stem.lstate(); }
  size_t stem_len() const { return stem.length(); }
  size_t cycle_len() const { return cycle.length(); }

  // state at position i of the induced infinite execution
  int state_at(size_t i) const {
    size_t p = stem_len();
    if (i <= p) return stem.states[i];
    return cycle.states[(i - p - 1) % cycle_len() + 1];
  }
  // action of the step arriving at position i (i >= 1)
  int action_at(size_t i) const {
    size_t p = stem_len();
    if (i <= p) return stem.acts[i - 1];
    return cycle.acts[(i - p - 1) % cycle_len()];
  }

  // distinct states visited by the cycle
  std::set<int> cycle_states() const {
    std::set<int> r(cycle.states.begin(), cycle.states.end() - 1);
    return r;
  }

  Execution unroll(size_t positions) const {
    Execution e;
    e.states.push_back(state_at(0));
    for (size_t i = 1; i <= positions; ++i) {
      e.acts.push_back(action_at(i));
      e.states.push_back(state_at(i));
    }
    return e;
  }

  // semantically identical lasso whose cycle is repeated k times
  Lasso with_cycle_repeated(size_t k) const {
    assert(k >= 1);
    Lasso r;
    r.stem = stem;
    r.cycle = cycle;
    for (size_t i = 1; i < k; ++i) r.cycle = r.cycle.then(cycle);
    return r;
  }
};

// True iff e is a path through a's step relation; from_start additionally
// requires e.fstate in start(a).
inline bool is_execution(const Automaton& a, const Execution& e,
                         bool from_start = true) {
  if (e.states.empty()) return false;
  for (int s : e.states)
    if (s < 0 || s >= int(a.states.size())) return false;
  if (from_start &&
      std::find(a.start.begin(), a.start.end(), e.fstate()) == a.start.end())
    return false;
  std::set<Step> have(a.steps.begin(), a.steps.end());
  for (size_t i = 0; i < e.acts.size(); ++i)
    if (!have.count({e.states[i], e.acts[i], e.states[i + 1]})) return false;
  return true;
}

inline bool is_lasso(const Automaton& a, const Lasso& l,
                     bool from_start = true) {
  return l.cycle_len() >= 1 && is_execution(a, l.stem, from_start) &&
         is_execution(a, l.cycle, false) &&
         l.cycle.fstate() == l.cycle.lstate() &&
         l.cycle.fstate() == l.stem.lstate();
}

// --- Traces ------------------------------------------------------------------
// Canonical ultimately-periodic trace: shortest (primitive) period at its
// lexicographically minimal rotation, with the prefix as short as that
// rotation permits. Finite traces have an empty period.

struct Trace {
  std::vector<std::string> prefix;
  std::vector<std::string> period;  // empty => finite trace

  bool finite() const { return period.empty(); }
  bool operator==(const Trace& o) const {
    return prefix == o.prefix && period == o.period;
  }
  std::string dump() const {
    std::string r;
    for (const auto& s : prefix) r += s + " ";
    if (!period.empty()) {
      r += "(";
      for (const auto& s : period) r += s + " ";
      if (!r.empty() && r.back() == ' ') r.pop_back();
      r += ")^w";
    } else if (!r.empty() && r.back() == ' ') {
      r.pop_back();
    }
    return r;
  }
};

namespace detail {

inline std::vector<std::string> primitive_root(std::vector<std::string> w) {
  size_t n = w.size();
  for (size_t p = 1; p <= n / 2; ++p) {
    if (n % p) continue;
    bool ok = true;
    for (size_t i = p; i < n && ok; ++i) ok = w[i] == w[i - p];
    if (ok) return {w.begin(), w.begin() + p};
  }
  return w;
}

}  // namespace detail

// Canonicalize (prefix, period) as an omega-word representation.
inline Trace canonical_trace(std::vector<std::string> prefix,
                             std::vector<std::string> period) {
  if (period.empty()) return {std::move(prefix), {}};
  period = detail::primitive_root(std::move(period));
  // absorb trailing period copies into the period (shorten the prefix)
  while (!prefix.empty() && prefix.back() == period.back()) {
    prefix.pop_back();
    period.insert(period.begin(), period.back());
    period.pop_back();
  }
  // among the |period| alignments reachable by re-extending the prefix,
  // pick the lexicographically minimal rotation (unique: period primitive)
  size_t n = period.size(), best = 0;
  for (size_t r = 1; r < n; ++r) {
    for (size_t i = 0; i < n; ++i) {
      const auto &x = period[(best + i) % n], &y = period[(r + i) % n];
      if (y < x) { best = r; break; }
      if (x < y) break;
    }
  }
  for (size_t i = 0; i < best; ++i) prefix.push_back(period[i]);
  std::rotate(period.begin(), period.begin() + best, period.end());
  return {std::move(prefix), std::move(period)};
}

// External-action projection of a finite fragment.
inline std::vector<std::string> trace_of(const Automaton& a,
                                         const Execution& e) {
  std::vector<std::string> t;
  for (int act : e.acts)
    if (a.is_external(act)) t.push_back(a.actions[act].name);
  return t;
}

inline Trace trace_of(const Automaton& a, const Lasso& l) {
  return canonical_trace(trace_of(a, l.stem), trace_of(a, l.cycle));
}

}  // namespace liveref
