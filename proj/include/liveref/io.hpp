#pragma once

// File formats shared by the CLI and the test suite: candidate relations,
// lassos, index mappings, and report serialization.

#include <fstream>

#include "liveref/correspondence.hpp"
#include "liveref/inclusion.hpp"
#include "liveref/lattice.hpp"

namespace liveref {

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open file: " + path);
  // tolerant of comments in fixture files
  return json::parse(in, nullptr, true, true);
}

// {"g":[[s,u],...], "h":{q: p-id | {"red":[...],"green":[...]}},
//  "inv_a":[...], "inv_b":[...], "bound":k}
inline SimCandidate candidate_from_json(const json& j, const Automaton& a,
                                        const Automaton& b,
                                        const LivenessCondition* l = nullptr) {
  SimCandidate cand;
  try {
    std::vector<std::pair<int, int>> rows;
    for (const auto& row : j.at("g")) {
      int s = a.state_index(row[0].get<std::string>());
      int u = b.state_index(row[1].get<std::string>());
      if (s < 0 || u < 0)
        throw SchemaError("candidate row references unknown state: " + row.dump());
      rows.push_back({s, u});
    }
    cand.g = Relation::from_rows(a.states.size(), b.states.size(), rows);
    if (j.contains("h")) {
      for (auto& [q_id, target] : j["h"].items()) {
        PairMapEntry e;
        e.q_id = q_id;
        if (target.is_string()) {
          const ComplementedPair* p =
              l ? l->find(target.get<std::string>()) : nullptr;
          if (!p)
            throw SchemaError("pair map target '" + target.get<std::string>() +
                              "' is not a pair of the concrete condition");
          e.p = *p;
        } else {
          e.p.id = target.value("id", q_id + "-target");
          auto side = [&](const json& v) {
            StateSet m(a.states.size(), 0);
            for (const auto& s : v) {
              int i = a.state_index(s.get<std::string>());
              if (i < 0)
                throw SchemaError("pair map references unknown state: " + s.dump());
              m[i] = 1;
            }
            return m;
          };
          e.p.red = side(target.at("red"));
          e.p.green = side(target.at("green"));
          e.needs_certificate = true;
        }
        cand.h.push_back(std::move(e));
      }
    }
    auto inv = [&](const char* key, const Automaton& x) -> std::optional<StateSet> {
      if (!j.contains(key)) return std::nullopt;
      StateSet m(x.states.size(), 0);
      for (const auto& s : j[key]) {
        int i = x.state_index(s.get<std::string>());
        if (i < 0)
          throw SchemaError("invariant references unknown state: " + s.dump());
        m[i] = 1;
      }
      return m;
    };
    cand.inv_a = inv("inv_a", a);
    cand.inv_b = inv("inv_b", b);
    cand.bound = j.value("bound", 0);
    cand.image_finite = j.value("image_finite", true);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("candidate file schema violation: ") + e.what());
  }
  return cand;
}

inline json execution_to_json(const Automaton& a, const Execution& e) {
  json steps = json::array();
  for (size_t i = 0; i < e.acts.size(); ++i)
    steps.push_back({a.states[e.states[i]], a.actions[e.acts[i]].name,
                     a.states[e.states[i + 1]]});
  return json{{"fstate", a.states[e.fstate()]}, {"steps", steps}};
}

inline json lasso_to_json(const Automaton& a, const Lasso& l) {
  return json{{"stem", execution_to_json(a, l.stem)},
              {"cycle", execution_to_json(a, l.cycle)},
              {"trace", trace_of(a, l).dump()}};
}

inline json trace_to_json(const Trace& t) {
  return json{{"prefix", t.prefix}, {"period", t.period}};
}

inline json mapping_to_json(const IndexMapping& m) {
  return json{{"table", m.table},
              {"periodic_from", m.periodic_from},
              {"cycle_repeat", m.cycle_repeat},
              {"increment", m.increment}};
}

inline json sim_report_to_json(const SimReport& r, const Automaton* a = nullptr) {
  json j{{"ok", r.ok}};
  if (!r.ok) {
    j["clause"] = r.clause;
    j["detail"] = r.detail;
  }
  if (!r.always_silent.empty()) j["always_silent_steps"] = r.always_silent;
  if (!r.sometimes_silent.empty()) j["sometimes_silent_steps"] = r.sometimes_silent;
  if (r.silent_cycle && a) j["silent_cycle"] = lasso_to_json(*a, *r.silent_cycle);
  return j;
}

}  // namespace liveref
