#pragma once

// Encodings of common liveness properties as complemented pairs, plus the
// automaton transforms that make them expressible: history flags for
// leads-to, the non-always-silent flag, and bounded history forestification.

#include "liveref/liveness.hpp"

namespace liveref {

// Buechi acceptance "infinitely often G" is the single pair <true, G>.
inline ComplementedPair buchi_pair(const Automaton& a, const StateSet& g,
                                   const std::string& id = "buchi") {
  return {id, StateSet(a.states.size(), 1), g};
}

// Generalized Buechi: one pair per acceptance set.
inline LivenessCondition generalized_buchi(const Automaton& a,
                                           const std::vector<StateSet>& sets) {
  LivenessCondition l;
  for (size_t i = 0; i < sets.size(); ++i)
    l.pairs.push_back(buchi_pair(a, sets[i], "gb" + std::to_string(i)));
  return l;
}

// Fault tolerance "infinitely many faults are answered" as a single pair:
// red everywhere, green on fault-or-good states.
inline ComplementedPair fault_tolerance_pair(const Automaton& a,
                                             const StateSet& fault,
                                             const StateSet& good,
                                             const std::string& id = "ft") {
  StateSet g(a.states.size(), 0);
  for (size_t i = 0; i < a.states.size(); ++i) g[i] = fault[i] || good[i];
  return {id, StateSet(a.states.size(), 1), g};
}

struct FlaggedAutomaton {
  Automaton automaton;
  LivenessCondition pairs;          // the pair(s) the flag expresses
  std::vector<int> projection;      // flagged state -> original state
  std::vector<int> step_origin;     // flagged step -> original step index
};

namespace detail {
inline std::string flag_state(const Automaton& a, int s, bool f) {
  return json{a.states[s], f}.dump();
}
}  // namespace detail

// p leads-to q as the pair <flag, q>: the flag is computed on the post-state
// of each transition, set when entering p-and-not-q, cleared when entering q,
// and false on start states. Only reachable flagged states are built.
inline FlaggedAutomaton leads_to_transform(const Automaton& a,
                                           const StateSet& p,
                                           const StateSet& q) {
  FlaggedAutomaton out;
  Automaton& b = out.automaton;
  for (const auto& l : a.actions) b.add_action(l.name, l.kind);
  std::map<std::pair<int, bool>, int> idx;
  std::vector<std::pair<int, bool>> nodes;
  auto intern = [&](int s, bool f) {
    auto key = std::make_pair(s, f);
    auto it = idx.find(key);
    if (it != idx.end()) return it->second;
    int id = b.add_state(detail::flag_state(a, s, f));
    idx[key] = id;
    nodes.push_back(key);
    out.projection.push_back(s);
    return id;
  };
  for (int s : a.start) b.start.push_back(intern(s, false));
  auto next_flag = [&](bool f, int post) {
    if (in_set(q, post)) return false;
    if (in_set(p, post)) return true;
    return f;
  };
  for (size_t h = 0; h < nodes.size(); ++h) {
    auto [s, f] = nodes[h];
    int from = idx[{s, f}];
    for (const Step& st : a.out()[s]) {
      b.add_step(from, st.action, intern(st.to, next_flag(f, st.to)));
      int oi = 0;
      for (; oi < int(a.steps.size()); ++oi)
        if (a.steps[oi] == st) break;
      out.step_origin.push_back(oi);
    }
  }
  ComplementedPair pr{"leadsto", StateSet(b.states.size(), 0),
                      StateSet(b.states.size(), 0)};
  for (size_t i = 0; i < nodes.size(); ++i) {
    pr.red[i] = nodes[i].second;
    pr.green[i] = in_set(q, nodes[i].first);
  }
  out.pairs.pairs.push_back(std::move(pr));
  return out;
}

// Non-always-silent flag: the flag records whether the step just taken was
// outside the silent set, so "infinitely many non-silent steps" becomes the
// single pair <true, flag>.
inline FlaggedAutomaton augment_nonalwayssilent(const Automaton& a,
                                                const std::vector<char>& silent_step) {
  FlaggedAutomaton out;
  Automaton& b = out.automaton;
  for (const auto& l : a.actions) b.add_action(l.name, l.kind);
  std::map<std::pair<int, bool>, int> idx;
  std::vector<std::pair<int, bool>> nodes;
  auto intern = [&](int s, bool f) {
    auto key = std::make_pair(s, f);
    auto it = idx.find(key);
    if (it != idx.end()) return it->second;
    int id = b.add_state(detail::flag_state(a, s, f));
    idx[key] = id;
    nodes.push_back(key);
    out.projection.push_back(s);
    return id;
  };
  for (int s : a.start) b.start.push_back(intern(s, false));
  for (size_t h = 0; h < nodes.size(); ++h) {
    auto [s, f] = nodes[h];
    int from = idx[{s, f}];
    for (int si = 0; si < int(a.steps.size()); ++si) {
      const Step& st = a.steps[si];
      if (st.from != s) continue;
      b.add_step(from, st.action, intern(st.to, !silent_step[si]));
      out.step_origin.push_back(si);
    }
  }
  ComplementedPair pr{"nonalwayssilent", StateSet(b.states.size(), 1),
                      StateSet(b.states.size(), 0)};
  for (size_t i = 0; i < nodes.size(); ++i) pr.green[i] = nodes[i].second;
  out.pairs.pairs.push_back(std::move(pr));
  return out;
}

// Make selected external actions internal.
inline Automaton hide_actions(const Automaton& a,
                              const std::set<std::string>& names) {
  Automaton b = a;
  for (auto& l : b.actions)
    if (names.count(l.name)) l.kind = ActionKind::internal_;
  b.reindex();
  return b;
}

// Bounded history unfolding: states are executions of a up to the given
// depth; past the depth, steps loop on a designated sink per final state so
// the result still has total-cycle potential only where a has it.
struct ForestResult {
  Automaton automaton;
  std::vector<int> tip;  // forest state -> underlying a-state
};

inline ForestResult forestify(const Automaton& a, size_t depth) {
  ForestResult out;
  Automaton& b = out.automaton;
  for (const auto& l : a.actions) b.add_action(l.name, l.kind);
  struct Node { Execution hist; };
  std::vector<Node> nodes;
  auto name_of = [&](const Execution& e) {
    json j = json::array();
    for (size_t i = 0; i < e.states.size(); ++i) {
      j.push_back(a.states[e.states[i]]);
      if (i < e.acts.size()) j.push_back(a.actions[e.acts[i]].name);
    }
    return j.dump();
  };
  std::map<std::string, int> idx;
  auto intern = [&](const Execution& e) {
    std::string n = name_of(e);
    auto it = idx.find(n);
    if (it != idx.end()) return it->second;
    int id = b.add_state(n);
    idx[n] = id;
    nodes.push_back({e});
    out.tip.push_back(e.lstate());
    return id;
  };
  for (int s : a.start) b.start.push_back(intern(Execution{{s}, {}}));
  for (size_t h = 0; h < nodes.size(); ++h) {
    Execution e = nodes[h].hist;
    int from = intern(e);
    for (const Step& st : a.out()[e.lstate()]) {
      if (e.length() < depth) {
        Execution e2 = e;
        e2.acts.push_back(st.action);
        e2.states.push_back(st.to);
        b.add_step(from, st.action, intern(e2));
      } else {
        // depth reached: collapse further behavior onto single-state
        // histories so the unfolding stays finite
        b.add_step(from, st.action, intern(Execution{{st.to}, {}}));
      }
    }
  }
  return out;
}

}  // namespace liveref
