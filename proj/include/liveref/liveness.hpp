#pragma once

// Complemented pairs (Streett acceptance), liveness conditions, and a small
// box/diamond temporal layer evaluated on lassos.

#include <functional>
#include <memory>

#include "liveref/execution.hpp"

namespace liveref {

using StateSet = std::vector<char>;  // mask indexed by state

inline StateSet make_set(size_t n, const std::vector<int>& members) {
  StateSet m(n, 0);
  for (int s : members) m[s] = 1;
  return m;
}
inline bool in_set(const StateSet& m, int s) {
  return s >= 0 && s < int(m.size()) && m[s];
}
inline bool intersects(const StateSet& m, const std::set<int>& xs) {
  for (int x : xs)
    if (in_set(m, x)) return true;
  return false;
}

struct ComplementedPair {
  std::string id;
  StateSet red;
  StateSet green;
};

// A liveness condition is a finite set of complemented pairs. Indexed
// families are instantiated lazily over the index values that occur.
struct LivenessCondition {
  std::vector<ComplementedPair> pairs;

  const ComplementedPair* find(const std::string& id) const {
    for (const auto& p : pairs)
      if (p.id == id) return &p;
    return nullptr;
  }
};

struct IndexedFamily {
  std::string id_prefix;
  std::function<std::vector<std::string>(const Automaton&)> index_domain;
  std::function<ComplementedPair(const Automaton&, const std::string&)> make;

  LivenessCondition instantiate(const Automaton& a) const {
    if (!index_domain || !make)
      throw ValidationError("indexed family '" + id_prefix +
                            "' not instantiable: index domain unavailable");
    LivenessCondition l;
    for (const auto& ix : index_domain(a)) l.pairs.push_back(make(a, ix));
    return l;
  }
};

// alpha |= <R,G>  iff  infinitely-often R implies infinitely-often G;
// on a lasso: cycle avoids R, or cycle meets G.
inline bool satisfies_pair(const Lasso& l, const ComplementedPair& p) {
  auto cyc = l.cycle_states();
  return !intersects(p.red, cyc) || intersects(p.green, cyc);
}

inline bool is_live(const Lasso& l, const LivenessCondition& cond) {
  for (const auto& p : cond.pairs)
    if (!satisfies_pair(l, p)) return false;
  return true;
}

// --- temporal formulas over lassos ------------------------------------------

struct TemporalFormula;
using FormulaPtr = std::shared_ptr<const TemporalFormula>;

struct TemporalFormula {
  enum Kind { atom, negation, conjunction, disjunction, implication, always,
              eventually } kind;
  StateSet set;        // atom
  FormulaPtr a, b;
};

inline FormulaPtr f_atom(StateSet s) {
  return std::make_shared<TemporalFormula>(
      TemporalFormula{TemporalFormula::atom, std::move(s), nullptr, nullptr});
}
inline FormulaPtr f_not(FormulaPtr x) {
  return std::make_shared<TemporalFormula>(
      TemporalFormula{TemporalFormula::negation, {}, std::move(x), nullptr});
}
inline FormulaPtr f_and(FormulaPtr x, FormulaPtr y) {
  return std::make_shared<TemporalFormula>(TemporalFormula{
      TemporalFormula::conjunction, {}, std::move(x), std::move(y)});
}
inline FormulaPtr f_or(FormulaPtr x, FormulaPtr y) {
  return std::make_shared<TemporalFormula>(TemporalFormula{
      TemporalFormula::disjunction, {}, std::move(x), std::move(y)});
}
inline FormulaPtr f_implies(FormulaPtr x, FormulaPtr y) {
  return std::make_shared<TemporalFormula>(TemporalFormula{
      TemporalFormula::implication, {}, std::move(x), std::move(y)});
}
inline FormulaPtr f_always(FormulaPtr x) {
  return std::make_shared<TemporalFormula>(
      TemporalFormula{TemporalFormula::always, {}, std::move(x), nullptr});
}
inline FormulaPtr f_eventually(FormulaPtr x) {
  return std::make_shared<TemporalFormula>(
      TemporalFormula{TemporalFormula::eventually, {}, std::move(x), nullptr});
}

// Evaluate at every position class of the lasso (stem positions plus one
// cycle period); position P+C wraps to P.
namespace detail {
inline std::vector<char> eval_positions(const Lasso& l, const FormulaPtr& f) {
  size_t P = l.stem_len(), C = l.cycle_len(), n = P + C;
  auto next = [&](size_t i) { return i + 1 < n ? i + 1 : P; };
  std::vector<char> v(n, 0);
  using TF = TemporalFormula;
  switch (f->kind) {
    case TF::atom:
      for (size_t i = 0; i < n; ++i) v[i] = in_set(f->set, l.state_at(i));
      return v;
    case TF::negation: {
      auto x = eval_positions(l, f->a);
      for (size_t i = 0; i < n; ++i) v[i] = !x[i];
      return v;
    }
    case TF::conjunction:
    case TF::disjunction:
    case TF::implication: {
      auto x = eval_positions(l, f->a), y = eval_positions(l, f->b);
      for (size_t i = 0; i < n; ++i)
        v[i] = f->kind == TF::conjunction   ? (x[i] && y[i])
               : f->kind == TF::disjunction ? (x[i] || y[i])
                                            : (!x[i] || y[i]);
      return v;
    }
    case TF::always:
    case TF::eventually: {
      auto x = eval_positions(l, f->a);
      bool want = f->kind == TF::eventually;
      // backward fixpoint over the lasso shape; stabilizes within 2 sweeps
      v = x;
      for (int sweep = 0; sweep < 2; ++sweep)
        for (size_t k = n; k-- > 0;)
          v[k] = want ? (x[k] || v[next(k)]) : (x[k] && v[next(k)]);
      return v;
    }
  }
  return v;
}
}  // namespace detail

inline bool eval_formula(const Lasso& l, const FormulaPtr& f) {
  return detail::eval_positions(l, f)[0] != 0;
}

// []<>R => []<>G as a formula, for cross-checking satisfies_pair
inline FormulaPtr pair_formula(const ComplementedPair& p) {
  return f_implies(f_always(f_eventually(f_atom(p.red))),
                   f_always(f_eventually(f_atom(p.green))));
}

// --- pair file format --------------------------------------------------------
// {"pairs":[{"id":..., "red":[states...], "green":[states...]}]}

inline LivenessCondition pairs_from_json(const json& j, const Automaton& a) {
  LivenessCondition l;
  try {
    for (const auto& row : j.at("pairs")) {
      ComplementedPair p;
      p.id = row.at("id").get<std::string>();
      auto read_side = [&](const json& side) {
        StateSet m(a.states.size(), 0);
        if (side.is_object() && side.contains("pred"))
          throw SchemaError("predicate pairs are not valid for explicit automata: " +
                            side.dump());
        for (const auto& s : side) {
          int i = a.state_index(s.get<std::string>());
          if (i < 0) throw SchemaError("pair references unknown state: " + s.dump());
          m[i] = 1;
        }
        return m;
      };
      p.red = read_side(row.at("red"));
      p.green = read_side(row.at("green"));
      l.pairs.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("pair file schema violation: ") + e.what());
  }
  return l;
}

inline json pairs_to_json(const LivenessCondition& l, const Automaton& a) {
  json out = json::array();
  for (const auto& p : l.pairs) {
    json red = json::array(), green = json::array();
    for (size_t i = 0; i < a.states.size(); ++i) {
      if (p.red[i]) red.push_back(a.states[i]);
      if (p.green[i]) green.push_back(a.states[i]);
    }
    out.push_back({{"id", p.id}, {"red", red}, {"green", green}});
  }
  return json{{"pairs", out}};
}

}  // namespace liveref
