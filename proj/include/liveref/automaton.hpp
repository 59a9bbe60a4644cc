#pragma once

// Labeled transition systems with an external/internal action signature.
// States are opaque strings; composite states produced by transforms are
// encoded as canonical JSON strings so transform outputs stay in this type.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace liveref {

using json = nlohmann::json;

enum class ActionKind { external_, internal_ };

struct ActionLabel {
  std::string name;
  ActionKind kind = ActionKind::external_;
  bool operator==(const ActionLabel& o) const {
    return name == o.name && kind == o.kind;
  }
};

struct Step {
  int from = -1;
  int action = -1;
  int to = -1;
  bool operator==(const Step& o) const {
    return from == o.from && action == o.action && to == o.to;
  }
  bool operator<(const Step& o) const {
    return std::tie(from, action, to) < std::tie(o.from, o.action, o.to);
  }
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Automaton {
 public:
  std::vector<std::string> states;
  std::vector<int> start;              // indices into states
  std::vector<ActionLabel> actions;    // unique names
  std::vector<Step> steps;

  int state_index(const std::string& s) const {
    auto it = state_idx_.find(s);
    return it == state_idx_.end() ? -1 : it->second;
  }
  int action_index(const std::string& a) const {
    auto it = action_idx_.find(a);
    return it == action_idx_.end() ? -1 : it->second;
  }

  int add_state(const std::string& s) {
    auto it = state_idx_.find(s);
    if (it != state_idx_.end()) return it->second;
    states.push_back(s);
    state_idx_[s] = int(states.size()) - 1;
    return int(states.size()) - 1;
  }
  int add_action(const std::string& name, ActionKind k) {
    auto it = action_idx_.find(name);
    if (it != action_idx_.end()) {
      if (actions[it->second].kind != k)
        throw ValidationError("action '" + name + "' declared with both kinds");
      return it->second;
    }
    actions.push_back({name, k});
    action_idx_[name] = int(actions.size()) - 1;
    return int(actions.size()) - 1;
  }
  void add_step(int s, int a, int t) { steps.push_back({s, a, t}); }

  bool is_external(int a) const {
    return actions[a].kind == ActionKind::external_;
  }

  // steps grouped by source state, in (action, to) order
  const std::vector<std::vector<Step>>& out() const {
    if (out_.size() != states.size()) {
      out_.assign(states.size(), {});
      auto sorted = steps;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      for (const Step& st : sorted) out_[st.from].push_back(st);
    }
    return out_;
  }
  void invalidate_cache() const { out_.clear(); }

  void reindex() {
    state_idx_.clear();
    for (int i = 0; i < int(states.size()); ++i) state_idx_[states[i]] = i;
    action_idx_.clear();
    for (int i = 0; i < int(actions.size()); ++i)
      action_idx_[actions[i].name] = i;
    out_.clear();
  }

 private:
  std::map<std::string, int> state_idx_;
  std::map<std::string, int> action_idx_;
  mutable std::vector<std::vector<Step>> out_;
};

// Well-formedness: nonempty start contained in states, disjoint signature
// partitions, steps referencing known states/actions. Throws on violation.
inline void validate(const Automaton& a) {
  if (a.states.empty()) throw ValidationError("automaton has no states");
  if (a.start.empty()) throw ValidationError("start set is empty");
  std::set<std::string> seen;
  for (const auto& s : a.states)
    if (!seen.insert(s).second)
      throw ValidationError("duplicate state '" + s + "'");
  std::set<std::string> anames;
  for (const auto& l : a.actions)
    if (!anames.insert(l.name).second)
      throw ValidationError("action '" + l.name +
                            "' appears in both external and internal sets");
  for (int si : a.start)
    if (si < 0 || si >= int(a.states.size()))
      throw ValidationError("start state out of range");
  for (const Step& st : a.steps) {
    if (st.from < 0 || st.from >= int(a.states.size()) || st.to < 0 ||
        st.to >= int(a.states.size()))
      throw ValidationError("step references unknown state");
    if (st.action < 0 || st.action >= int(a.actions.size()))
      throw ValidationError("step references unknown action");
  }
}

// Breadth-first closure of the start set (or a supplied root).
inline std::vector<int> reachable_states(const Automaton& a,
                                         std::optional<int> root = {}) {
  std::vector<char> vis(a.states.size(), 0);
  std::vector<int> queue;
  if (root) {
    vis[*root] = 1;
    queue.push_back(*root);
  } else {
    for (int s : a.start)
      if (!vis[s]) {
        vis[s] = 1;
        queue.push_back(s);
      }
  }
  const auto& out = a.out();
  for (size_t h = 0; h < queue.size(); ++h)
    for (const Step& st : out[queue[h]])
      if (!vis[st.to]) {
        vis[st.to] = 1;
        queue.push_back(st.to);
      }
  std::sort(queue.begin(), queue.end());
  return queue;
}

// --- JSON file format -------------------------------------------------------
// {"states":[...], "start":[...], "external":[...], "internal":[...],
//  "steps":[[s,a,t],...]}   (action payloads are folded into the name)

inline Automaton automaton_from_json(const json& j) {
  Automaton a;
  try {
    for (const auto& s : j.at("states")) a.add_state(s.get<std::string>());
    for (const auto& n : j.at("external"))
      a.add_action(n.get<std::string>(), ActionKind::external_);
    for (const auto& n : j.at("internal"))
      a.add_action(n.get<std::string>(), ActionKind::internal_);
    for (const auto& s : j.at("start")) {
      int i = a.state_index(s.get<std::string>());
      if (i < 0) throw SchemaError("start state not in states: " + s.dump());
      a.start.push_back(i);
    }
    for (const auto& row : j.at("steps")) {
      if (!row.is_array() || row.size() != 3)
        throw SchemaError("step row must be [from, action, to]");
      int s = a.state_index(row[0].get<std::string>());
      int act = a.action_index(row[1].get<std::string>());
      int t = a.state_index(row[2].get<std::string>());
      if (s < 0 || t < 0) throw SchemaError("step references unknown state: " + row.dump());
      if (act < 0) throw SchemaError("step references unknown action: " + row.dump());
      a.add_step(s, act, t);
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("automaton schema violation: ") + e.what());
  }
  validate(a);
  return a;
}

inline json automaton_to_json(const Automaton& a) {
  json j;
  j["states"] = a.states;
  json st = json::array(), ext = json::array(), inl = json::array();
  for (int i : a.start) st.push_back(a.states[i]);
  for (const auto& l : a.actions)
    (l.kind == ActionKind::external_ ? ext : inl).push_back(l.name);
  j["start"] = st;
  j["external"] = ext;
  j["internal"] = inl;
  json steps = json::array();
  for (const Step& s : a.steps)
    steps.push_back({a.states[s.from], a.actions[s.action].name, a.states[s.to]});
  j["steps"] = steps;
  return j;
}

}  // namespace liveref
