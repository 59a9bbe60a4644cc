#pragma once

// Replicated-data-service case study: configuration, operation descriptors,
// replica labels, and the valset function over a grow-only-set data object.

#include <set>

#include "liveref/automaton.hpp"

namespace liveref::esds {

// An operation either adds one element to a shared grow-only set or reads
// it. Adds answer "ok"; reads answer the visible set (a sorted json array).
struct OpDescriptor {
  std::string id;
  std::string client;
  std::vector<std::string> prev;  // ids that must be applied before this one
  bool strict = false;
  bool is_read = false;
  std::string element;  // for adds
};

struct Config {
  std::vector<std::string> clients;
  std::vector<std::string> replicas;
  std::vector<OpDescriptor> ops;
  uint64_t seed = 1;
  size_t steps = 5000;
  size_t age_max = 16;         // fairness bound per action class
  size_t gossip_epoch = 8;     // rounds between voluntary gossip/resend picks
  size_t valset_cap = 4096;    // candidate-set budget for valset enumeration
  std::vector<std::string> lose_requests;  // lossy-frontend mutation

  const OpDescriptor* find_op(const std::string& id) const {
    for (const auto& o : ops)
      if (o.id == id) return &o;
    return nullptr;
  }
};

inline Config config_from_json(const json& j) {
  Config c;
  try {
    for (const auto& x : j.at("clients")) c.clients.push_back(x);
    for (const auto& x : j.at("replicas")) c.replicas.push_back(x);
    for (const auto& row : j.at("ops")) {
      OpDescriptor o;
      o.id = row.at("id");
      o.client = row.at("client");
      o.strict = row.value("strict", false);
      o.is_read = row.value("kind", "add") == "read";
      o.element = row.value("payload", o.id);
      for (const auto& p : row.value("prev", json::array()))
        o.prev.push_back(p);
      c.ops.push_back(std::move(o));
    }
    c.seed = j.value("seed", 1);
    c.steps = j.value("steps", 5000);
    c.age_max = j.value("age_max", 16);
    c.gossip_epoch = j.value("gossip_epoch", 8);
    c.valset_cap = j.value("valset_cap", 4096);
    for (const auto& x : j.value("lose_requests", json::array()))
      c.lose_requests.push_back(x);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("config schema violation: ") + e.what());
  }
  for (const auto& o : c.ops) {
    if (std::find(c.clients.begin(), c.clients.end(), o.client) ==
        c.clients.end())
      throw SchemaError("op '" + o.id + "' names unknown client");
    for (const auto& p : o.prev)
      if (!c.find_op(p))
        throw SchemaError("op '" + o.id + "' lists unknown prev '" + p + "'");
  }
  return c;
}

inline json config_to_json(const Config& c) {
  json ops = json::array();
  for (const auto& o : c.ops)
    ops.push_back(json{{"id", o.id},
                       {"client", o.client},
                       {"prev", o.prev},
                       {"strict", o.strict},
                       {"kind", o.is_read ? "read" : "add"},
                       {"payload", o.element}});
  return json{{"clients", c.clients},
              {"replicas", c.replicas},
              {"ops", ops},
              {"seed", c.seed},
              {"steps", c.steps},
              {"age_max", c.age_max},
              {"gossip_epoch", c.gossip_epoch},
              {"valset_cap", c.valset_cap},
              {"lose_requests", c.lose_requests}};
}

// --- labels ------------------------------------------------------------------
// (counter, replica) with a distinguished infinity; totally ordered.

struct Label {
  bool inf = true;
  long counter = 0;
  std::string replica;

  bool operator<(const Label& o) const {
    if (inf != o.inf) return !inf;
    if (inf) return false;
    if (counter != o.counter) return counter < o.counter;
    return replica < o.replica;
  }
  bool operator==(const Label& o) const {
    return inf == o.inf && (inf || (counter == o.counter && replica == o.replica));
  }
};

inline json label_to_json(const Label& l) {
  if (l.inf) return "inf";
  return json{l.counter, l.replica};
}
inline Label label_from_json(const json& j) {
  if (j.is_string()) return {};
  return {false, j[0].get<long>(), j[1].get<std::string>()};
}

// --- json set helpers ----------------------------------------------------------
// Component states are json objects whose set-valued fields are sorted arrays.

inline bool jset_has(const json& arr, const json& v) {
  for (const auto& x : arr)
    if (x == v) return true;
  return false;
}
inline void jset_add(json& arr, const json& v) {
  if (!jset_has(arr, v)) {
    arr.push_back(v);
    std::sort(arr.begin(), arr.end());
  }
}
inline void jset_del(json& arr, const json& v) {
  for (auto it = arr.begin(); it != arr.end(); ++it)
    if (*it == v) {
      arr.erase(it);
      return;
    }
}

// --- valset ------------------------------------------------------------------
// The candidate value sets for operation x given the applied operations and a
// strict partial order: results of applying any down-closed subset S with
// {y : y < x} <= S <= ops \ ({x} + {y : x < y}). Applying folds add elements
// into a set; the value is "ok" for adds and the visible set for reads.

struct OrderRel {
  std::set<std::pair<std::string, std::string>> lt;  // transitively closed

  bool less(const std::string& a, const std::string& b) const {
    return lt.count({a, b}) > 0;
  }
};

inline OrderRel close_order(std::set<std::pair<std::string, std::string>> edges) {
  // transitive closure by iteration; inputs are small
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<std::pair<std::string, std::string>> add;
    for (const auto& [a, b] : edges)
      for (const auto& [c, d] : edges)
        if (b == c && !edges.count({a, d})) add.push_back({a, d});
    for (auto& e : add) grew |= edges.insert(e).second;
  }
  return {std::move(edges)};
}

inline json apply_ops(const Config& cfg, const OpDescriptor& x,
                      const std::vector<std::string>& applied) {
  if (!x.is_read) return "ok";
  json visible = json::array();
  for (const auto& id : applied) {
    const OpDescriptor* o = cfg.find_op(id);
    if (o && !o->is_read) jset_add(visible, o->element);
  }
  return visible;
}

inline std::vector<json> valset(const Config& cfg, const std::string& x_id,
                                const std::vector<std::string>& ops,
                                const OrderRel& order) {
  const OpDescriptor* x = cfg.find_op(x_id);
  if (!x) throw ValidationError("valset: unknown operation '" + x_id + "'");
  if (std::find(ops.begin(), ops.end(), x_id) == ops.end())
    throw ValidationError("valset: operation '" + x_id + "' not applied");
  std::vector<std::string> lower, mid;
  for (const auto& y : ops) {
    if (y == x_id) continue;
    if (order.less(y, x_id)) lower.push_back(y);
    else if (!order.less(x_id, y)) mid.push_back(y);
  }
  if (mid.size() >= 8 * sizeof(size_t) || (size_t(1) << mid.size()) > cfg.valset_cap)
    throw ValidationError("valset: candidate-set count for '" + x_id +
                          "' exceeds the configured cap");
  std::set<json> values;
  for (size_t bits = 0; bits < (size_t(1) << mid.size()); ++bits) {
    std::vector<std::string> s = lower;
    for (size_t i = 0; i < mid.size(); ++i)
      if (bits >> i & 1) s.push_back(mid[i]);
    // down-closed: a chosen op pulls everything below it (lower is included)
    bool closed = true;
    for (const auto& a : s)
      for (size_t i = 0; i < mid.size() && closed; ++i)
        if (!(bits >> i & 1) && order.less(mid[i], a)) closed = false;
    if (!closed) continue;
    values.insert(apply_ops(cfg, *x, s));
  }
  return {values.begin(), values.end()};
}

}  // namespace liveref::esds
