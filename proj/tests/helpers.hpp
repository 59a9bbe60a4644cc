#pragma once

#include <catch2/catch_amalgamated.hpp>

#include "liveref/io.hpp"

namespace th {

using namespace liveref;

inline std::string fix(const std::string& name) {
  return std::string(FIXTURE_DIR) + "/" + name;
}

inline Automaton load_automaton(const std::string& name) {
  return automaton_from_json(load_json_file(fix(name)));
}

inline LivenessCondition load_pairs(const std::string& name, const Automaton& a) {
  return pairs_from_json(load_json_file(fix(name)), a);
}

inline Execution exec(const Automaton& a,
                      const std::vector<std::string>& alternating) {
  Execution e;
  e.states.push_back(a.state_index(alternating[0]));
  for (size_t i = 1; i + 1 < alternating.size(); i += 2) {
    e.acts.push_back(a.action_index(alternating[i]));
    e.states.push_back(a.state_index(alternating[i + 1]));
  }
  return e;
}

inline Lasso lasso(const Automaton& a, const std::vector<std::string>& stem,
                   const std::vector<std::string>& cycle) {
  return Lasso{exec(a, stem), exec(a, cycle)};
}

inline StateSet states(const Automaton& a, const std::vector<std::string>& xs) {
  std::vector<int> idx;
  for (const auto& x : xs) idx.push_back(a.state_index(x));
  return make_set(a.states.size(), idx);
}

// deterministic xorshift for reproducible random-instance sweeps
struct Rng {
  uint64_t s;
  explicit Rng(uint64_t seed) : s(seed * 2685821657736338717ull + 1) {}
  uint64_t next() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  }
  size_t below(size_t n) { return n ? next() % n : 0; }
  bool chance(int pct) { return int(next() % 100) < pct; }
};

// random explicit automaton: every state gets at least one outgoing step so
// infinite executions exist everywhere
inline Automaton random_automaton(Rng& rng, size_t max_states = 8,
                                  size_t max_ext = 2, size_t max_int = 2) {
  Automaton a;
  size_t n = 2 + rng.below(max_states - 1);
  for (size_t i = 0; i < n; ++i) a.add_state("n" + std::to_string(i));
  size_t ne = 1 + rng.below(max_ext), ni = rng.below(max_int + 1);
  for (size_t i = 0; i < ne; ++i)
    a.add_action("e" + std::to_string(i), ActionKind::external_);
  for (size_t i = 0; i < ni; ++i)
    a.add_action("i" + std::to_string(i), ActionKind::internal_);
  a.start.push_back(0);
  if (rng.chance(30)) a.start.push_back(int(rng.below(n)));
  std::sort(a.start.begin(), a.start.end());
  a.start.erase(std::unique(a.start.begin(), a.start.end()), a.start.end());
  size_t extra = rng.below(2 * n);
  for (size_t i = 0; i < n; ++i)
    a.add_step(int(i), int(rng.below(a.actions.size())), int(rng.below(n)));
  for (size_t i = 0; i < extra; ++i)
    a.add_step(int(rng.below(n)), int(rng.below(a.actions.size())),
               int(rng.below(n)));
  std::sort(a.steps.begin(), a.steps.end());
  a.steps.erase(std::unique(a.steps.begin(), a.steps.end()), a.steps.end());
  return a;
}

inline LivenessCondition random_condition(Rng& rng, const Automaton& a,
                                          size_t max_pairs = 3) {
  LivenessCondition l;
  size_t k = rng.below(max_pairs + 1);
  for (size_t i = 0; i < k; ++i) {
    ComplementedPair p;
    p.id = "q" + std::to_string(i);
    p.red.assign(a.states.size(), 0);
    p.green.assign(a.states.size(), 0);
    for (size_t s = 0; s < a.states.size(); ++s) {
      p.red[s] = rng.chance(35);
      p.green[s] = rng.chance(30);
    }
    l.pairs.push_back(std::move(p));
  }
  return l;
}

}  // namespace th
