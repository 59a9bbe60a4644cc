#pragma once

// Executable models of the replicated-data service: the sequential service
// (two variants, the second with the relaxed stabilize rule), the distributed
// algorithm (frontends, replicas, lossy-free channels), an I/O-style parallel
// composition, and a seeded fair scheduler that emits replayable run logs.

#include <functional>
#include <map>
#include <ostream>

#include "liveref/esds/core.hpp"

namespace liveref::esds {

// ---------------------------------------------------------------------------
// transition effects as pure functions over json component states; each
// returns "" on success or a message naming the violated precondition.
// The scheduler only proposes actions these accept; the log checkers call
// them directly to re-validate runs.

namespace model {

inline std::vector<std::string> jvec(const json& arr) {
  std::vector<std::string> v;
  for (const auto& x : arr) v.push_back(x);
  return v;
}

inline OrderRel order_of(const json& po) {
  std::set<std::pair<std::string, std::string>> e;
  for (const auto& p : po)
    e.insert(std::make_pair(p[0].get<std::string>(), p[1].get<std::string>()));
  return close_order(std::move(e));
}

inline json order_to_json(const OrderRel& o) {
  json arr = json::array();
  for (const auto& [a, b] : o.lt) arr.push_back(json{a, b});
  return arr;
}

inline std::string users_request(const Config& cfg, json& u, const std::string& x) {
  const OpDescriptor* o = cfg.find_op(x);
  if (!o) return "request: unknown operation";
  if (jset_has(u["requested"], x)) return "request: already requested";
  for (const auto& p : o->prev)
    if (!jset_has(u["requested"], p)) return "request: prev '" + p + "' not requested";
  jset_add(u["requested"], x);
  return "";
}

// sequential service ---------------------------------------------------------

inline json spec_init() {
  return json{{"wait", json::array()},
              {"rept", json::array()},
              {"ops", json::array()},
              {"po", json::array()},
              {"stabilized", json::array()}};
}

inline std::string spec_request(json& s, const std::string& x) {
  jset_add(s["wait"], x);
  return "";
}

inline bool strict_partial_order(const OrderRel& o) {
  for (const auto& [a, b] : o.lt)
    if (a == b) return false;
  return true;
}

inline std::string spec_enter(const Config& cfg, json& s, const std::string& x,
                              const json& new_po, bool relaxed) {
  const OpDescriptor* o = cfg.find_op(x);
  if (!o) return "enter: unknown operation";
  if (!jset_has(s["wait"], x)) return "enter: not waiting";
  if (!relaxed && jset_has(s["ops"], x)) return "enter: already applied";
  for (const auto& p : o->prev)
    if (!jset_has(s["ops"], p)) return "enter: prev '" + p + "' not applied";
  OrderRel np = order_of(new_po);
  if (!strict_partial_order(np)) return "enter: order not strict";
  for (const auto& [a, b] : np.lt) {
    bool ok_a = jset_has(s["ops"], a) || a == x;
    bool ok_b = jset_has(s["ops"], b) || b == x;
    if (!ok_a || !ok_b) return "enter: order mentions unapplied operation";
  }
  OrderRel cur = order_of(s["po"]);
  for (const auto& e : cur.lt)
    if (!np.lt.count(e)) return "enter: order dropped a constraint";
  for (const auto& p : o->prev)
    if (!np.less(p, x)) return "enter: client constraint missing for '" + p + "'";
  for (const auto& y : s["stabilized"])
    if (!np.less(y, x)) return "enter: stabilized '" + std::string(y) + "' not below";
  jset_add(s["ops"], x);
  s["po"] = order_to_json(np);
  return "";
}

inline std::string spec_add_constraints(json& s, const json& new_po) {
  OrderRel np = order_of(new_po);
  if (!strict_partial_order(np)) return "add_constraints: order not strict";
  for (const auto& [a, b] : np.lt)
    if (!jset_has(s["ops"], a) || !jset_has(s["ops"], b))
      return "add_constraints: order mentions unapplied operation";
  OrderRel cur = order_of(s["po"]);
  for (const auto& e : cur.lt)
    if (!np.lt.count(e)) return "add_constraints: order dropped a constraint";
  s["po"] = order_to_json(np);
  return "";
}

inline std::string spec_stabilize(json& s, const std::string& x, bool relaxed) {
  if (!jset_has(s["ops"], x)) return "stabilize: not applied";
  OrderRel ord = order_of(s["po"]);
  for (const auto& yj : s["ops"]) {
    std::string y = yj;
    if (y != x && !ord.less(y, x) && !ord.less(x, y))
      return "stabilize: '" + y + "' incomparable";
  }
  std::vector<std::string> below;
  for (const auto& yj : s["ops"])
    if (ord.less(yj, x)) below.push_back(yj);
  if (relaxed) {
    for (const auto& a : below)
      for (const auto& b : below)
        if (a != b && !ord.less(a, b) && !ord.less(b, a))
          return "stabilize: prefix not totally ordered";
  } else {
    if (jset_has(s["stabilized"], x)) return "stabilize: already stable";
    for (const auto& y : below)
      if (!jset_has(s["stabilized"], y))
        return "stabilize: '" + y + "' below but not stable";
  }
  jset_add(s["stabilized"], x);
  return "";
}

inline std::string spec_calculate(const Config& cfg, json& s, const std::string& x,
                                  const json& v) {
  const OpDescriptor* o = cfg.find_op(x);
  if (!o) return "calculate: unknown operation";
  if (!jset_has(s["ops"], x)) return "calculate: not applied";
  if (o->strict && !jset_has(s["stabilized"], x)) return "calculate: strict but unstable";
  auto vs = valset(cfg, x, jvec(s["ops"]), order_of(s["po"]));
  if (std::find(vs.begin(), vs.end(), v) == vs.end())
    return "calculate: value not consistent with the applied order";
  if (jset_has(s["wait"], x)) jset_add(s["rept"], json{x, v});
  return "";
}

inline std::string spec_response(json& s, const std::string& x, const json& v) {
  if (!jset_has(s["rept"], json{x, v})) return "response: value not reported";
  if (!jset_has(s["wait"], x)) return "response: not waiting";
  jset_del(s["wait"], x);
  json kept = json::array();
  for (const auto& e : s["rept"])
    if (e[0] != x) kept.push_back(e);
  s["rept"] = kept;
  return "";
}

// frontends ------------------------------------------------------------------

inline json frontend_init() {
  return json{{"wait", json::array()}, {"rept", json::array()}};
}

inline std::string frontend_request(json& f, const std::string& x) {
  jset_add(f["wait"], x);
  return "";
}

inline std::string frontend_recv_resp(json& f, const std::string& x, const json& v) {
  if (jset_has(f["wait"], x)) jset_add(f["rept"], json{x, v});
  return "";
}

inline std::string frontend_response(json& f, const std::string& x, const json& v) {
  if (!jset_has(f["rept"], json{x, v})) return "response: value not reported";
  if (!jset_has(f["wait"], x)) return "response: not waiting";
  jset_del(f["wait"], x);
  json kept = json::array();
  for (const auto& e : f["rept"])
    if (e[0] != x) kept.push_back(e);
  f["rept"] = kept;
  return "";
}

// replicas -------------------------------------------------------------------

inline json replica_init(const Config& cfg) {
  json done = json::object(), stable = json::object();
  for (const auto& r : cfg.replicas) {
    done[r] = json::array();
    stable[r] = json::array();
  }
  return json{{"pending", json::array()}, {"rcvd", json::array()},
              {"done", done},            {"stable", stable},
              {"label", json::object()}};
}

inline Label replica_label(const json& r, const std::string& id) {
  if (!r["label"].contains(id)) return {};
  return label_from_json(r["label"][id]);
}

// the order a replica applies operations in: ascending known labels
inline OrderRel replica_order(const json& r, const json& over) {
  std::set<std::pair<std::string, std::string>> e;
  for (const auto& aj : over)
    for (const auto& bj : over) {
      std::string a = aj, b = bj;
      Label la = replica_label(r, a), lb = replica_label(r, b);
      if (!la.inf && !lb.inf && la < lb) e.insert(std::make_pair(a, b));
    }
  return {std::move(e)};
}

inline std::string replica_recv_req(json& r, const std::string& x) {
  jset_add(r["pending"], x);
  jset_add(r["rcvd"], x);
  return "";
}

inline std::string replica_do_it(const Config& cfg, json& r, const std::string& self,
                                 const std::string& x, const Label& l) {
  const OpDescriptor* o = cfg.find_op(x);
  if (!o) return "do_it: unknown operation";
  if (!jset_has(r["rcvd"], x)) return "do_it: not received";
  if (jset_has(r["done"][self], x)) return "do_it: already applied";
  for (const auto& p : o->prev)
    if (!jset_has(r["done"][self], p)) return "do_it: prev '" + p + "' not applied";
  if (l.inf) return "do_it: label must be finite";
  for (const auto& y : r["done"][self])
    if (!(replica_label(r, y) < l)) return "do_it: label not above applied ones";
  jset_add(r["done"][self], x);
  r["label"][x] = label_to_json(l);
  return "";
}

inline Label replica_fresh_label(const json& r, const std::string& self) {
  long c = 0;
  for (const auto& y : r["done"][self]) {
    Label ly = replica_label(r, y);
    if (!ly.inf) c = std::max(c, ly.counter);
  }
  return {false, c + 1, self};
}

// precondition for sending a response; the effect removes x from pending
inline std::string replica_send_resp_pre(const Config& cfg, const json& r,
                                         const std::string& self, const std::string& x,
                                         const json& v) {
  const OpDescriptor* o = cfg.find_op(x);
  if (!o) return "send response: unknown operation";
  if (!jset_has(r["pending"], x) || !jset_has(r["done"][self], x))
    return "send response: not pending and applied";
  if (o->strict)
    for (const auto& i : r["stable"].items())
      if (!jset_has(i.value(), x)) return "send response: strict but not stable everywhere";
  auto vs = valset(cfg, x, model::jvec(r["done"][self]),
                   replica_order(r, r["done"][self]));
  if (std::find(vs.begin(), vs.end(), v) == vs.end())
    return "send response: value not consistent with local order";
  return "";
}

inline json replica_gossip_msg(const json& r, const std::string& self) {
  return json{{"t", "gossip"}, {"R", r["rcvd"]},          {"D", r["done"][self]},
              {"L", r["label"]}, {"S", r["stable"][self]}};
}

inline std::string replica_recv_gossip(json& r, const std::string& self,
                                       const std::string& from, const json& m) {
  for (const auto& x : m["R"]) jset_add(r["rcvd"], x);
  for (const auto& x : m["D"]) {
    jset_add(r["done"][from], x);
    jset_add(r["done"][self], x);
  }
  for (auto& entry : r["done"].items())
    for (const auto& x : m["S"]) jset_add(entry.value(), x);
  for (const auto& kv : m["L"].items()) {
    Label in = label_from_json(kv.value());
    Label cur = replica_label(r, kv.key());
    r["label"][kv.key()] = label_to_json(in < cur ? in : cur);
  }
  for (const auto& x : m["S"]) {
    jset_add(r["stable"][from], x);
    jset_add(r["stable"][self], x);
  }
  // everything known applied at every replica is stable here
  for (const auto& x : r["done"][self]) {
    bool everywhere = true;
    for (const auto& entry : r["done"].items())
      if (!jset_has(entry.value(), x)) everywhere = false;
    if (everywhere) jset_add(r["stable"][self], x);
  }
  return "";
}

}  // namespace model

// ---------------------------------------------------------------------------
// composition

struct Act {
  std::string klass;  // fairness unit, e.g. "send_gossip(r1,r2)"
  json payload;
  bool external = false;

  std::string name() const { return klass + "#" + payload.dump(); }
};

struct Component {
  std::string id;
  json st;
  std::vector<std::string> owned;  // klasses this component controls
  std::function<std::vector<Act>(const json&)> enabled;
  std::function<bool(const std::string&)> wants;  // klass in signature
  std::function<json(json, const Act&)> apply;    // throws ValidationError
};

struct System {
  Config cfg;
  std::string kind;  // "alg", "spec1" or "spec2"
  std::vector<Component> comps;
  std::set<std::string> hidden;

  std::vector<Act> enabled() const {
    std::vector<Act> out;
    for (const auto& c : comps)
      for (auto a : c.enabled(c.st)) {
        a.external = hidden.count(a.klass) == 0;
        out.push_back(std::move(a));
      }
    std::sort(out.begin(), out.end(),
              [](const Act& a, const Act& b) { return a.name() < b.name(); });
    return out;
  }

  void step(const Act& a) {
    bool taken = false;
    for (auto& c : comps)
      if (c.wants(a.klass)) {
        c.st = c.apply(std::move(c.st), a);
        taken = true;
      }
    if (!taken) throw ValidationError("action '" + a.klass + "' has no component");
  }

  json snapshot() const {
    json frontends = json::object(), replicas = json::object(),
         channels = json::object();
    json s = json::object();
    for (const auto& c : comps) {
      if (c.id == "users") s["users"] = c.st;
      else if (c.id == "spec") s["spec"] = c.st;
      else if (c.id.rfind("frontend:", 0) == 0) frontends[c.id.substr(9)] = c.st;
      else if (c.id.rfind("replica:", 0) == 0) replicas[c.id.substr(8)] = c.st;
      else if (c.id.rfind("channel:", 0) == 0) channels[c.id.substr(8)] = c.st["msgs"];
    }
    if (!frontends.empty()) s["frontends"] = frontends;
    if (!replicas.empty()) s["replicas"] = replicas;
    if (!channels.empty()) s["channels"] = channels;
    return s;
  }
};

inline System compose_parallel(const Config& cfg, const std::string& kind,
                               std::vector<Component> comps) {
  std::map<std::string, std::string> owner;
  for (const auto& c : comps)
    for (const auto& k : c.owned) {
      auto [it, fresh] = owner.insert({k, c.id});
      if (!fresh)
        throw ValidationError("composition clash: '" + k + "' controlled by '" +
                              it->second + "' and '" + c.id + "'");
    }
  return {cfg, kind, std::move(comps), {}};
}

inline void hide_system_actions(System& sys, const std::vector<std::string>& klasses) {
  std::set<std::string> known;
  for (const auto& c : sys.comps)
    for (const auto& k : c.owned) known.insert(k);
  for (const auto& k : klasses) {
    if (!known.count(k)) throw ValidationError("hide: unknown action '" + k + "'");
    sys.hidden.insert(k);
  }
}

// --- component builders ------------------------------------------------------

inline Component make_users(const Config& cfg) {
  Component c;
  c.id = "users";
  c.st = json{{"requested", json::array()}};
  for (const auto& cl : cfg.clients) c.owned.push_back("request(" + cl + ")");
  c.enabled = [cfg](const json& st) {
    std::vector<Act> out;
    for (const auto& o : cfg.ops) {
      if (jset_has(st["requested"], o.id)) continue;
      bool ready = true;
      for (const auto& p : o.prev)
        if (!jset_has(st["requested"], p)) ready = false;
      if (ready) out.push_back({"request(" + o.client + ")", json{{"x", o.id}}});
    }
    return out;
  };
  c.wants = [cfg](const std::string& k) {
    return k.rfind("request(", 0) == 0 || k.rfind("response(", 0) == 0;
  };
  c.apply = [cfg](json st, const Act& a) {
    if (a.klass.rfind("request(", 0) == 0) {
      auto err = model::users_request(cfg, st, a.payload["x"]);
      if (!err.empty()) throw ValidationError(err);
    }
    return st;  // responses are inputs with no effect
  };
  return c;
}

namespace detail_sched {

// deterministic extension of the current order to a total order over the
// applied operations, breaking ties by request sequence
inline json linearized_po(const Config& cfg, const json& s) {
  std::map<std::string, size_t> seq;
  for (size_t i = 0; i < cfg.ops.size(); ++i) seq[cfg.ops[i].id] = i;
  std::vector<std::string> ops = model::jvec(s["ops"]);
  OrderRel cur = model::order_of(s["po"]);
  std::vector<std::string> topo;
  std::set<std::string> placed;
  while (topo.size() < ops.size()) {
    std::string best;
    for (const auto& x : ops) {
      if (placed.count(x)) continue;
      bool free = true;
      for (const auto& y : ops)
        if (!placed.count(y) && y != x && cur.less(y, x)) free = false;
      if (free && (best.empty() || seq[x] < seq[best])) best = x;
    }
    topo.push_back(best);
    placed.insert(best);
  }
  std::set<std::pair<std::string, std::string>> e = cur.lt;
  for (size_t i = 0; i < topo.size(); ++i)
    for (size_t j = i + 1; j < topo.size(); ++j) e.insert({topo[i], topo[j]});
  return model::order_to_json(OrderRel{std::move(e)});
}

}  // namespace detail_sched

inline Component make_spec(const Config& cfg, bool relaxed) {
  Component c;
  c.id = "spec";
  c.st = model::spec_init();
  c.owned = {"enter", "add_constraints", "stabilize", "calculate"};
  for (const auto& cl : cfg.clients) c.owned.push_back("response(" + cl + ")");
  c.enabled = [cfg, relaxed](const json& st) {
    std::vector<Act> out;
    for (const auto& o : cfg.ops) {
      json s = st;
      const std::string& x = o.id;
      if (jset_has(st["wait"], x) && !jset_has(st["ops"], x)) {
        OrderRel np = model::order_of(st["po"]);
        for (const auto& p : o.prev) np.lt.insert({p, x});
        for (const auto& y : st["stabilized"]) np.lt.insert({std::string(y), x});
        json po = model::order_to_json(close_order(std::move(np.lt)));
        if (model::spec_enter(cfg, s, x, po, relaxed).empty())
          out.push_back({"enter", json{{"x", x}, {"po", po}}});
      }
      s = st;
      if (!jset_has(st["stabilized"], x) &&
          model::spec_stabilize(s, x, relaxed).empty())
        out.push_back({"stabilize", json{{"x", x}}});
      if (jset_has(st["wait"], x) && jset_has(st["ops"], x) &&
          !(o.strict && !jset_has(st["stabilized"], x))) {
        bool reported = false;
        for (const auto& e : st["rept"])
          if (e[0] == x) reported = true;
        if (!reported) {
          auto vs = valset(cfg, x, model::jvec(st["ops"]), model::order_of(st["po"]));
          out.push_back({"calculate", json{{"x", x}, {"v", vs.front()}}});
        }
      }
      for (const auto& e : st["rept"])
        if (e[0] == x && jset_has(st["wait"], x))
          out.push_back({"response(" + o.client + ")", json{{"x", x}, {"v", e[1]}}});
    }
    json lin = detail_sched::linearized_po(cfg, st);
    if (lin != st["po"]) out.push_back({"add_constraints", json{{"po", lin}}});
    return out;
  };
  c.wants = [](const std::string& k) {
    return k == "enter" || k == "add_constraints" || k == "stabilize" ||
           k == "calculate" || k.rfind("request(", 0) == 0 ||
           k.rfind("response(", 0) == 0;
  };
  c.apply = [cfg, relaxed](json st, const Act& a) {
    std::string err;
    if (a.klass.rfind("request(", 0) == 0)
      err = model::spec_request(st, a.payload["x"]);
    else if (a.klass == "enter")
      err = model::spec_enter(cfg, st, a.payload["x"], a.payload["po"], relaxed);
    else if (a.klass == "add_constraints")
      err = model::spec_add_constraints(st, a.payload["po"]);
    else if (a.klass == "stabilize")
      err = model::spec_stabilize(st, a.payload["x"], relaxed);
    else if (a.klass == "calculate")
      err = model::spec_calculate(cfg, st, a.payload["x"], a.payload["v"]);
    else
      err = model::spec_response(st, a.payload["x"], a.payload["v"]);
    if (!err.empty()) throw ValidationError(err);
    return st;
  };
  return c;
}

inline Component make_frontend(const Config& cfg, const std::string& cl) {
  Component c;
  c.id = "frontend:" + cl;
  c.st = model::frontend_init();
  c.owned = {"response(" + cl + ")"};
  for (const auto& r : cfg.replicas) c.owned.push_back("send_req(" + cl + "," + r + ")");
  c.enabled = [cfg, cl](const json& st) {
    std::vector<Act> out;
    for (const auto& xj : st["wait"]) {
      std::string x = xj;
      if (std::find(cfg.lose_requests.begin(), cfg.lose_requests.end(), x) !=
          cfg.lose_requests.end())
        continue;  // mutation: this frontend never forwards these requests
      for (const auto& r : cfg.replicas)
        out.push_back({"send_req(" + cl + "," + r + ")",
                       json{{"t", "req"}, {"x", x}}});
    }
    for (const auto& e : st["rept"])
      if (jset_has(st["wait"], e[0]))
        out.push_back({"response(" + cl + ")", json{{"x", e[0]}, {"v", e[1]}}});
    return out;
  };
  c.wants = [cfg, cl](const std::string& k) {
    if (k == "request(" + cl + ")" || k == "response(" + cl + ")") return true;
    if (k.rfind("send_req(" + cl + ",", 0) == 0) return true;
    for (const auto& r : cfg.replicas)
      if (k == "recv_resp(" + r + "," + cl + ")") return true;
    return false;
  };
  c.apply = [cl](json st, const Act& a) {
    std::string err;
    if (a.klass.rfind("request(", 0) == 0)
      err = model::frontend_request(st, a.payload["x"]);
    else if (a.klass.rfind("recv_resp(", 0) == 0)
      err = model::frontend_recv_resp(st, a.payload["x"], a.payload["v"]);
    else if (a.klass.rfind("response(", 0) == 0)
      err = model::frontend_response(st, a.payload["x"], a.payload["v"]);
    else if (a.klass.rfind("send_req(", 0) == 0) {
      if (!jset_has(st["wait"], a.payload["x"]))
        throw ValidationError("send request: not waiting");
    }
    if (!err.empty()) throw ValidationError(err);
    return st;
  };
  return c;
}

inline Component make_replica(const Config& cfg, const std::string& r) {
  Component c;
  c.id = "replica:" + r;
  c.st = model::replica_init(cfg);
  c.owned = {"do_it(" + r + ")"};
  for (const auto& cl : cfg.clients) c.owned.push_back("send_resp(" + r + "," + cl + ")");
  for (const auto& q : cfg.replicas)
    if (q != r) c.owned.push_back("send_gossip(" + r + "," + q + ")");
  c.enabled = [cfg, r](const json& st) {
    std::vector<Act> out;
    for (const auto& xj : st["rcvd"]) {
      std::string x = xj;
      json probe = st;
      Label l = model::replica_fresh_label(st, r);
      if (model::replica_do_it(cfg, probe, r, x, l).empty())
        out.push_back({"do_it(" + r + ")", json{{"x", x}, {"l", label_to_json(l)}}});
    }
    for (const auto& xj : st["pending"]) {
      std::string x = xj;
      const OpDescriptor* o = cfg.find_op(x);
      if (!o || !jset_has(st["done"][r], x)) continue;
      auto vs = valset(cfg, x, model::jvec(st["done"][r]),
                       model::replica_order(st, st["done"][r]));
      json v = vs.front();
      if (model::replica_send_resp_pre(cfg, st, r, x, v).empty())
        out.push_back({"send_resp(" + r + "," + o->client + ")",
                       json{{"t", "resp"}, {"x", x}, {"v", v}}});
    }
    for (const auto& q : cfg.replicas)
      if (q != r)
        out.push_back({"send_gossip(" + r + "," + q + ")", model::replica_gossip_msg(st, r)});
    return out;
  };
  c.wants = [cfg, r](const std::string& k) {
    if (k == "do_it(" + r + ")") return true;
    if (k.rfind("send_resp(" + r + ",", 0) == 0) return true;
    if (k.rfind("send_gossip(" + r + ",", 0) == 0) return true;
    for (const auto& cl : cfg.clients)
      if (k == "recv_req(" + cl + "," + r + ")") return true;
    for (const auto& q : cfg.replicas)
      if (q != r && k == "recv_gossip(" + q + "," + r + ")") return true;
    return false;
  };
  c.apply = [cfg, r](json st, const Act& a) {
    std::string err;
    if (a.klass == "do_it(" + r + ")")
      err = model::replica_do_it(cfg, st, r, a.payload["x"],
                                 label_from_json(a.payload["l"]));
    else if (a.klass.rfind("recv_req(", 0) == 0)
      err = model::replica_recv_req(st, a.payload["x"]);
    else if (a.klass.rfind("recv_gossip(", 0) == 0) {
      auto open = a.klass.find('('), comma = a.klass.find(',');
      std::string from = a.klass.substr(open + 1, comma - open - 1);
      err = model::replica_recv_gossip(st, r, from, a.payload);
    } else if (a.klass.rfind("send_resp(", 0) == 0) {
      err = model::replica_send_resp_pre(cfg, st, r, a.payload["x"], a.payload["v"]);
      if (err.empty()) jset_del(st["pending"], a.payload["x"]);
    }
    // gossip sends have no local effect
    if (!err.empty()) throw ValidationError(err);
    return st;
  };
  return c;
}

inline Component make_channel(const std::string& from, const std::string& to,
                              const std::string& send_klass,
                              const std::string& recv_klass) {
  Component c;
  c.id = "channel:" + from + ">" + to;
  c.st = json{{"msgs", json::array()}};
  c.owned = {recv_klass};
  c.enabled = [recv_klass](const json& st) {
    std::vector<Act> out;
    for (const auto& m : st["msgs"]) out.push_back({recv_klass, m});
    return out;
  };
  c.wants = [send_klass, recv_klass](const std::string& k) {
    return k == send_klass || k == recv_klass;
  };
  c.apply = [send_klass](json st, const Act& a) {
    if (a.klass == send_klass) {
      st["msgs"].push_back(a.payload);
    } else {
      auto& msgs = st["msgs"];
      for (auto it = msgs.begin(); it != msgs.end(); ++it)
        if (*it == a.payload) {
          msgs.erase(it);
          return st;
        }
      throw ValidationError("receive: message not in channel");
    }
    return st;
  };
  return c;
}

// --- system builders -----------------------------------------------------------

inline System make_spec_system(const Config& cfg, bool relaxed) {
  auto sys = compose_parallel(cfg, relaxed ? "spec2" : "spec1",
                              {make_users(cfg), make_spec(cfg, relaxed)});
  hide_system_actions(sys, {"enter", "add_constraints", "stabilize", "calculate"});
  return sys;
}

inline System make_alg_system(const Config& cfg) {
  std::vector<Component> comps{make_users(cfg)};
  std::vector<std::string> hide;
  for (const auto& cl : cfg.clients) comps.push_back(make_frontend(cfg, cl));
  for (const auto& r : cfg.replicas) comps.push_back(make_replica(cfg, r));
  for (const auto& cl : cfg.clients)
    for (const auto& r : cfg.replicas) {
      comps.push_back(make_channel(cl, r, "send_req(" + cl + "," + r + ")",
                                   "recv_req(" + cl + "," + r + ")"));
      comps.push_back(make_channel(r, cl, "send_resp(" + r + "," + cl + ")",
                                   "recv_resp(" + r + "," + cl + ")"));
      hide.push_back("recv_req(" + cl + "," + r + ")");
      hide.push_back("send_req(" + cl + "," + r + ")");
      hide.push_back("recv_resp(" + r + "," + cl + ")");
      hide.push_back("send_resp(" + r + "," + cl + ")");
    }
  for (const auto& r : cfg.replicas) {
    hide.push_back("do_it(" + r + ")");
    for (const auto& q : cfg.replicas)
      if (q != r) {
        comps.push_back(make_channel(r, q, "send_gossip(" + r + "," + q + ")",
                                     "recv_gossip(" + r + "," + q + ")"));
        hide.push_back("send_gossip(" + r + "," + q + ")");
        hide.push_back("recv_gossip(" + r + "," + q + ")");
      }
  }
  auto sys = compose_parallel(cfg, "alg", std::move(comps));
  hide_system_actions(sys, hide);
  return sys;
}

// ---------------------------------------------------------------------------
// seeded fair scheduler with a line-delimited json run log

struct RunOptions {
  size_t snapshot_every = 1;
};

struct RunResult {
  size_t steps = 0;
  bool quiescent = false;
  size_t forced_picks = 0;
  size_t max_observed_age = 0;
};

namespace detail_sched {

struct Rng {
  uint64_t s;
  uint64_t next() {
    s += 0x9e3779b97f4a7c15ULL;
    uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  size_t pick(size_t n) { return size_t(next() % n); }
};

inline bool perpetual(const std::string& klass) {
  return klass.rfind("send_gossip(", 0) == 0 || klass == "add_constraints";
}

// quiescence: every enabled action is a perpetual sender whose send/receive
// round-trip leaves the composed state unchanged
inline bool quiescent_now(const System& sys, const std::vector<Act>& acts) {
  if (acts.empty()) return true;
  for (const auto& a : acts) {
    if (!perpetual(a.klass)) return false;
    if (a.klass.rfind("send_gossip(", 0) == 0) {
      System probe = sys;
      probe.step(a);
      Act recv = a;
      recv.klass = "recv_gossip" + a.klass.substr(std::string("send_gossip").size());
      probe.step(recv);
      if (probe.snapshot() != sys.snapshot()) return false;
    } else {
      return false;  // a useful add_constraints still pending
    }
  }
  return true;
}

}  // namespace detail_sched

inline RunResult run_system(System& sys, std::ostream& log,
                            const RunOptions& opt = {}) {
  using namespace detail_sched;
  const Config& cfg = sys.cfg;
  log << json{{"header", {{"kind", sys.kind},
                          {"seed", cfg.seed},
                          {"config", config_to_json(cfg)},
                          {"snapshot_every", opt.snapshot_every}}}}
             .dump()
      << "\n";
  log << json{{"start", sys.snapshot()}}.dump() << "\n";

  Rng rng{cfg.seed};
  std::map<std::string, size_t> age;
  std::set<std::string> fired_names;
  RunResult res;
  for (size_t round = 0; round < cfg.steps; ++round) {
    auto acts = sys.enabled();
    if (quiescent_now(sys, acts)) {
      res.quiescent = true;
      break;
    }
    // group by klass; the representative act is the name-least one
    std::map<std::string, Act> by_klass;
    for (const auto& a : acts)
      if (!by_klass.count(a.klass)) by_klass.insert({a.klass, a});
    for (auto it = age.begin(); it != age.end();) {
      if (by_klass.count(it->first)) ++it;
      else it = age.erase(it);
    }
    std::string chosen;
    size_t oldest = 0;
    for (auto& [k, a] : by_klass) {
      size_t& ag = age[k];
      ++ag;
      res.max_observed_age = std::max(res.max_observed_age, ag);
      if (ag > cfg.age_max && ag > oldest) {
        oldest = ag;
        chosen = k;
      }
    }
    if (!chosen.empty()) {
      ++res.forced_picks;
    } else {
      std::vector<std::string> eligible;
      bool epoch = round % cfg.gossip_epoch == 0;
      for (const auto& [k, a] : by_klass) {
        bool resend = k.rfind("send_req(", 0) == 0 && fired_names.count(a.name());
        if (perpetual(k) || resend) {
          if (epoch) eligible.push_back(k);
        } else {
          eligible.push_back(k);
        }
      }
      if (eligible.empty())
        for (const auto& [k, a] : by_klass) eligible.push_back(k);
      chosen = eligible[rng.pick(eligible.size())];
    }
    Act act = by_klass.at(chosen);
    sys.step(act);
    age[chosen] = 0;
    fired_names.insert(act.name());
    ++res.steps;
    json ev{{"n", res.steps},   {"klass", act.klass},
            {"payload", act.payload}, {"external", act.external}};
    json snap = sys.snapshot();
    ev["digest"] = std::hash<std::string>{}(snap.dump());
    if (res.steps % opt.snapshot_every == 0) ev["post"] = snap;
    log << ev.dump() << "\n";
  }
  log << json{{"audit", {{"steps", res.steps},
                         {"quiescent", res.quiescent},
                         {"forced_picks", res.forced_picks},
                         {"max_observed_age", res.max_observed_age},
                         {"fair", res.max_observed_age <=
                                      cfg.age_max + sys.comps.size() * 8}}}}
             .dump()
      << "\n";
  return res;
}

}  // namespace liveref::esds
