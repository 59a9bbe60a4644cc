#pragma once

// Offline analysis of run logs: per-operation obligation monitors, safety
// invariants, the predicate registry backing the shipped lattice files, and
// the two log-replay checkers that validate a distributed run against the
// relaxed sequential service (F) and a relaxed run against the strict one (G).

#include <istream>

#include "liveref/esds/system.hpp"
#include "liveref/lattice.hpp"

namespace liveref::esds {

// --- run logs ------------------------------------------------------------------

struct LogEvent {
  size_t n = 0;
  std::string klass;
  json payload;
  bool external = false;
  uint64_t digest = 0;
  json post;  // null when snapshots were thinned
};

struct RunLog {
  std::string kind;
  Config cfg;
  size_t snapshot_every = 1;
  json start;
  std::vector<LogEvent> events;
  json audit;
};

inline RunLog parse_log(std::istream& in) {
  RunLog log;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw SchemaError(std::string("log line is not json: ") + e.what());
    }
    if (j.contains("header")) {
      log.kind = j["header"].at("kind");
      log.cfg = config_from_json(j["header"].at("config"));
      log.snapshot_every = j["header"].value("snapshot_every", 1);
      saw_header = true;
    } else if (j.contains("start")) {
      log.start = j["start"];
    } else if (j.contains("audit")) {
      log.audit = j["audit"];
    } else {
      LogEvent e;
      e.n = j.at("n");
      e.klass = j.at("klass");
      e.payload = j.at("payload");
      e.external = j.value("external", false);
      e.digest = j.value("digest", uint64_t(0));
      if (j.contains("post")) e.post = j["post"];
      log.events.push_back(std::move(e));
    }
  }
  if (!saw_header) throw SchemaError("log has no header line");
  return log;
}

// --- snapshot predicates ---------------------------------------------------------

namespace pred {

inline bool waiting(const Config& cfg, const json& s, const std::string& x) {
  if (s.contains("spec")) return jset_has(s["spec"]["wait"], x);
  const OpDescriptor* o = cfg.find_op(x);
  return o && jset_has(s["frontends"][o->client]["wait"], x);
}

inline bool reported(const Config& cfg, const json& s, const std::string& x) {
  const json& rept = s.contains("spec") ? s["spec"]["rept"]
                                        : s["frontends"][cfg.find_op(x)->client]["rept"];
  for (const auto& e : rept)
    if (e[0] == x) return true;
  return false;
}

inline bool req_in_channel(const Config& cfg, const json& s, const std::string& x,
                           const std::string& r) {
  const OpDescriptor* o = cfg.find_op(x);
  if (!o || !s.contains("channels")) return false;
  return jset_has(s["channels"][o->client + ">" + r], json{{"t", "req"}, {"x", x}});
}

inline bool resp_in_channel(const Config& cfg, const json& s, const std::string& x,
                            const std::string& r) {
  const OpDescriptor* o = cfg.find_op(x);
  if (!o || !s.contains("channels")) return false;
  for (const auto& m : s["channels"][r + ">" + o->client])
    if (m["t"] == "resp" && m["x"] == x) return true;
  return false;
}

inline bool pending_rcvd(const json& s, const std::string& x, const std::string& r) {
  const json& rep = s["replicas"][r];
  return jset_has(rep["pending"], x) && jset_has(rep["rcvd"], x);
}

inline bool pending_done(const json& s, const std::string& x, const std::string& r) {
  const json& rep = s["replicas"][r];
  return jset_has(rep["pending"], x) && jset_has(rep["done"][r], x);
}

inline bool done_self(const json& s, const std::string& x, const std::string& r) {
  return jset_has(s["replicas"][r]["done"][r], x);
}

inline bool done_all(const Config& cfg, const json& s, const std::string& x) {
  for (const auto& r : cfg.replicas)
    if (!done_self(s, x, r)) return false;
  return !cfg.replicas.empty();
}

inline bool stable_self(const json& s, const std::string& x, const std::string& r) {
  return jset_has(s["replicas"][r]["stable"][r], x);
}

inline bool stable_any(const Config& cfg, const json& s, const std::string& x) {
  for (const auto& r : cfg.replicas)
    if (stable_self(s, x, r)) return true;
  return false;
}

inline bool stabilized(const Config& cfg, const json& s, const std::string& x) {
  if (s.contains("spec")) return jset_has(s["spec"]["stabilized"], x);
  for (const auto& r : cfg.replicas)
    if (!stable_self(s, x, r)) return false;
  return !cfg.replicas.empty();
}

}  // namespace pred

// registry used by the lattice files: name -> predicate over one snapshot,
// instantiated for an operation and (where applicable) a replica
inline std::function<bool(const json&)> make_pred(const Config& cfg,
                                                  const std::string& name,
                                                  const std::string& op,
                                                  const std::string& replica) {
  const OpDescriptor* o = cfg.find_op(op);
  if (!o) throw SchemaError("predicate instantiated for unknown op '" + op + "'");
  bool strict = o->strict;
  if (name == "waiting") return [cfg, op](const json& s) { return pred::waiting(cfg, s, op); };
  if (name == "not_waiting")
    return [cfg, op](const json& s) { return !pred::waiting(cfg, s, op); };
  if (name == "reported") return [cfg, op](const json& s) { return pred::reported(cfg, s, op); };
  if (name == "req_in_channel")
    return [cfg, op, replica](const json& s) { return pred::req_in_channel(cfg, s, op, replica); };
  if (name == "req_in_channel_any")
    return [cfg, op](const json& s) {
      for (const auto& r : cfg.replicas)
        if (pred::req_in_channel(cfg, s, op, r)) return true;
      return false;
    };
  if (name == "resp_in_channel")
    return [cfg, op, replica](const json& s) { return pred::resp_in_channel(cfg, s, op, replica); };
  if (name == "resp_in_channel_any")
    return [cfg, op](const json& s) {
      for (const auto& r : cfg.replicas)
        if (pred::resp_in_channel(cfg, s, op, r)) return true;
      return false;
    };
  if (name == "pending_rcvd")
    return [op, replica](const json& s) { return pred::pending_rcvd(s, op, replica); };
  if (name == "pending_done")
    return [op, replica](const json& s) { return pred::pending_done(s, op, replica); };
  if (name == "pending_done_strict")
    return [op, replica, strict](const json& s) {
      return strict && pred::pending_done(s, op, replica);
    };
  if (name == "pending_done_nonstrict")
    return [op, replica, strict](const json& s) {
      return !strict && pred::pending_done(s, op, replica);
    };
  if (name == "done_self")
    return [op, replica](const json& s) { return pred::done_self(s, op, replica); };
  if (name == "done_all")
    return [cfg, op](const json& s) { return pred::done_all(cfg, s, op); };
  if (name == "stable_self")
    return [op, replica](const json& s) { return pred::stable_self(s, op, replica); };
  if (name == "stable_any")
    return [cfg, op](const json& s) { return pred::stable_any(cfg, s, op); };
  if (name == "stable_all")
    return [cfg, op](const json& s) { return pred::stabilized(cfg, s, op); };
  throw SchemaError("unknown predicate '" + name + "'");
}

// loads a predicate-lattice file, expanding pairs marked "foreach": "replica"
// into one copy per replica ($r substituted in ids and parameters), and
// instantiating every predicate for the given operation
inline PredLattice load_esds_lattice(const json& j, const Config& cfg,
                                     const std::string& op) {
  auto subst = [](std::string s, const std::string& r) {
    auto pos = s.find("$r");
    while (pos != std::string::npos) {
      s.replace(pos, 2, r);
      pos = s.find("$r");
    }
    return s;
  };
  PredLattice lat;
  std::map<std::string, int> index;
  try {
    auto add_pair = [&](const json& row, const std::string& r) {
      PredPair p;
      p.id = subst(row.at("id"), r);
      p.red = make_pred(cfg, row.at("red").at("pred"),
                        op, subst(row["red"].value("replica", ""), r));
      p.green = make_pred(cfg, row.at("green").at("pred"),
                          op, subst(row["green"].value("replica", ""), r));
      if (index.count(p.id)) throw SchemaError("duplicate lattice pair '" + p.id + "'");
      index[p.id] = int(lat.pairs.size());
      lat.pairs.push_back(std::move(p));
    };
    for (const auto& row : j.at("pairs")) {
      if (row.value("foreach", "") == "replica")
        for (const auto& r : cfg.replicas) add_pair(row, r);
      else
        add_pair(row, "");
    }
    auto resolve = [&](const std::string& id) {
      auto it = index.find(id);
      if (it == index.end()) throw SchemaError("lattice order names unknown pair '" + id + "'");
      return it->second;
    };
    for (const auto& e : j.at("order")) {
      std::string a = e[0], b = e[1];
      bool fa = a.find("$r") != std::string::npos, fb = b.find("$r") != std::string::npos;
      if (fa || fb)
        for (const auto& r : cfg.replicas)
          lat.order.push_back({resolve(subst(a, r)), resolve(subst(b, r))});
      else
        lat.order.push_back({resolve(a), resolve(b)});
    }
    lat.top = resolve(j.at("top"));
    lat.bottom = resolve(j.at("bottom"));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("lattice schema violation: ") + e.what());
  }
  return lat;
}

// --- monitors ------------------------------------------------------------------
// Per-operation complemented-pair obligations over a finite run prefix. The
// verdicts are finite-run surrogates: "outstanding" means red was seen and no
// green followed before the log ended.

struct Obligation {
  std::string op;
  std::string pair_id;      // "requested-answered" or "requested-stable"
  std::string status;       // "never-red" | "discharged" | "outstanding"
};

inline std::vector<json> log_snapshots(const RunLog& log) {
  std::vector<json> snaps{log.start};
  for (const auto& e : log.events)
    if (!e.post.is_null()) snaps.push_back(e.post);
  return snaps;
}

inline std::vector<Obligation> monitor_obligations(const RunLog& log) {
  auto snaps = log_snapshots(log);
  std::vector<Obligation> out;
  for (const auto& o : log.cfg.ops) {
    struct PairSpec {
      std::string id;
      std::function<bool(const json&)> red, green;
    };
    const Config& cfg = log.cfg;
    std::vector<PairSpec> specs{
        {"requested-answered",
         [&cfg, &o](const json& s) { return pred::waiting(cfg, s, o.id); },
         [&cfg, &o](const json& s) { return !pred::waiting(cfg, s, o.id); }},
        {"requested-stable",
         [&cfg, &o](const json& s) { return pred::waiting(cfg, s, o.id); },
         [&cfg, &o](const json& s) { return pred::stabilized(cfg, s, o.id); }}};
    for (const auto& ps : specs) {
      long last_red = -1;
      for (size_t i = 0; i < snaps.size(); ++i)
        if (ps.red(snaps[i])) last_red = long(i);
      std::string status = "never-red";
      if (last_red >= 0) {
        status = "outstanding";
        for (size_t i = size_t(last_red); i < snaps.size(); ++i)
          if (ps.green(snaps[i])) status = "discharged";
      }
      out.push_back({o.id, ps.id, status});
    }
  }
  return out;
}

// --- per-step safety invariants ----------------------------------------------

inline std::vector<std::string> check_invariants(const RunLog& log) {
  std::vector<std::string> bad;
  const Config& cfg = log.cfg;
  auto snaps = log_snapshots(log);
  for (size_t i = 0; i < snaps.size(); ++i) {
    const json& s = snaps[i];
    auto flag = [&](const std::string& m) {
      bad.push_back("snapshot " + std::to_string(i) + ": " + m);
    };
    if (s.contains("spec")) {
      OrderRel ord = model::order_of(s["spec"]["po"]);
      if (!model::strict_partial_order(ord)) flag("order has a cycle");
      for (const auto& x : s["spec"]["stabilized"])
        if (!jset_has(s["spec"]["ops"], x)) flag("stable op not applied");
      continue;
    }
    for (const auto& r : cfg.replicas) {
      const json& rep = s["replicas"][r];
      for (const auto& entry : rep["stable"].items())
        for (const auto& x : entry.value())
          if (!jset_has(rep["done"][entry.key()], x))
            flag("replica " + r + ": stable op '" + std::string(x) +
                 "' not known applied at " + entry.key());
      OrderRel lc = model::replica_order(rep, rep["done"][r]);
      if (!model::strict_partial_order(lc)) flag("replica " + r + ": label order broken");
    }
    for (const auto& o : cfg.ops) {
      bool requested = jset_has(s["users"]["requested"], o.id);
      if (!requested && (pred::waiting(cfg, s, o.id) || pred::done_all(cfg, s, o.id)))
        flag("op '" + o.id + "' active before request");
    }
  }
  // every externally answered value must be consistent with some applied order:
  // recompute the valset a response was drawn from at its send event
  for (const auto& e : log.events) {
    if (e.klass.rfind("send_resp(", 0) != 0 || e.post.is_null()) continue;
    auto open = e.klass.find('('), comma = e.klass.find(',');
    std::string r = e.klass.substr(open + 1, comma - open - 1);
    const json& rep = e.post["replicas"][r];
    auto vs = valset(cfg, e.payload["x"], model::jvec(rep["done"][r]),
                     model::replica_order(rep, rep["done"][r]));
    if (std::find(vs.begin(), vs.end(), e.payload["v"]) == vs.end())
      bad.push_back("event " + std::to_string(e.n) + ": response value for '" +
                    std::string(e.payload["x"]) + "' inconsistent");
  }
  return bad;
}

// --- log-replay simulation checkers ---------------------------------------------

struct StepReport {
  size_t n = 0;
  std::string klass;
  std::vector<std::string> fragment;  // abstract actions matched to this step
  std::string detail;                 // empty when the step validated
};

struct LogCheckReport {
  bool ok = true;
  size_t steps = 0;
  size_t validated = 0;
  std::vector<StepReport> failures;
};

struct FCheckOptions {
  bool drop_add_constraints = false;  // mutation hook: omit the order fragment
};

namespace detail_check {

inline std::string op_of(const json& payload) { return payload.at("x"); }

// final pointwise-minimum labels over the whole log; the induced total order
// is what gossip steps feed into the abstract order
inline std::map<std::string, Label> final_labels(const RunLog& log) {
  std::map<std::string, Label> lam;
  for (const auto& e : log.events) {
    if (e.klass.rfind("do_it(", 0) != 0) continue;
    Label l = label_from_json(e.payload.at("l"));
    std::string x = e.payload.at("x");
    auto it = lam.find(x);
    if (it == lam.end() || l < it->second) lam[x] = l;
  }
  return lam;
}

struct PairClause {
  // the red/green conditions a fragment must respect for one complemented
  // pair: intermediate abstract states stay out of red unless a concrete
  // endpoint is red, and a green concrete endpoint forces a green visit
  std::function<bool(const json&)> abs_red, abs_green;
  std::function<bool(const json&)> conc_red, conc_green;
  std::string id;
};

inline std::string check_pair_clauses(const std::vector<PairClause>& clauses,
                                      const json& conc_pre, const json& conc_post,
                                      const std::vector<json>& abs_states) {
  for (const auto& c : clauses) {
    bool endpoint_red = c.conc_red(conc_pre) || c.conc_red(conc_post);
    if (!endpoint_red)
      for (const auto& u : abs_states)
        if (c.abs_red(u)) return "pair '" + c.id + "': red visited without red endpoint";
    if (c.conc_green(conc_post)) {
      bool seen = false;
      for (const auto& u : abs_states)
        if (c.abs_green(u)) seen = true;
      if (!seen) return "pair '" + c.id + "': green endpoint without green visit";
    }
  }
  return "";
}

inline json jset_union(std::initializer_list<const json*> sets) {
  json out = json::array();
  for (const json* s : sets)
    for (const auto& x : *s) jset_add(out, x);
  return out;
}

}  // namespace detail_check

// Replays a distributed-system log against the relaxed sequential service:
// every logged step is matched to a fragment of abstract actions, each
// abstract precondition is re-checked, the two state relations are verified
// at fragment endpoints, and the per-operation pair conditions are enforced.
inline LogCheckReport check_sim_F_on_log(const RunLog& log,
                                         const FCheckOptions& opt = {}) {
  if (log.kind != "alg")
    throw ValidationError("expected a distributed-system log, got '" + log.kind + "'");
  if (log.snapshot_every != 1)
    throw ValidationError("log replay needs a snapshot on every step");
  const Config& cfg = log.cfg;
  auto lam = detail_check::final_labels(log);

  json users{{"requested", json::array()}};
  json u = model::spec_init();
  LogCheckReport rep;

  // the relation between a distributed snapshot and the abstract state
  auto endpoint_gap = [&cfg](const json& s, const json& users_st,
                             const json& u_st) -> std::string {
    if (users_st["requested"] != s["users"]["requested"]) return "requested sets differ";
    json wait = json::array(), reptj = json::array(), ops = json::array();
    for (const auto& c : cfg.clients)
      for (const auto& x : s["frontends"][c]["wait"]) jset_add(wait, x);
    for (const auto& c : cfg.clients)
      for (const auto& e : s["frontends"][c]["rept"]) jset_add(reptj, e);
    for (const auto& c : cfg.clients)
      for (const auto& r : cfg.replicas)
        for (const auto& m : s["channels"][r + ">" + c])
          if (m["t"] == "resp" && jset_has(s["frontends"][c]["wait"], m["x"]))
            jset_add(reptj, json{m["x"], m["v"]});
    for (const auto& r : cfg.replicas)
      for (const auto& x : s["replicas"][r]["done"][r]) jset_add(ops, x);
    json stab = json::array();
    for (const auto& o : cfg.ops)
      if (pred::stabilized(cfg, s, o.id)) jset_add(stab, o.id);
    if (u_st["wait"] != wait) return "waiting sets differ";
    if (u_st["rept"] != reptj) return "reported values differ";
    if (u_st["ops"] != ops) return "applied sets differ";
    if (u_st["stabilized"] != stab) return "stable sets differ";
    return "";
  };

  std::vector<detail_check::PairClause> clauses;
  for (const auto& o : cfg.ops) {
    std::string x = o.id;
    clauses.push_back({[x](const json& v) { return jset_has(v["wait"], x); },
                       [x](const json& v) { return !jset_has(v["wait"], x); },
                       [&cfg, x](const json& s) { return pred::waiting(cfg, s, x); },
                       [&cfg, x](const json& s) { return !pred::waiting(cfg, s, x); },
                       x + ":requested-answered"});
    clauses.push_back({[x](const json& v) { return jset_has(v["wait"], x); },
                       [x](const json& v) { return jset_has(v["stabilized"], x); },
                       [&cfg, x](const json& s) { return pred::waiting(cfg, s, x); },
                       [&cfg, x](const json& s) { return pred::stabilized(cfg, s, x); },
                       x + ":requested-stable"});
  }

  json prev_snap = log.start;
  {
    auto gap = endpoint_gap(prev_snap, users, u);
    if (!gap.empty()) {
      rep.ok = false;
      rep.failures.push_back({0, "start", {}, "initial states unrelated: " + gap});
      return rep;
    }
  }
  for (const auto& e : log.events) {
    ++rep.steps;
    StepReport sr{e.n, e.klass, {}, ""};
    std::vector<json> abs_states{u};
    json users2 = users, u2 = u;
    auto run_frag = [&](const std::string& name,
                        const std::function<std::string()>& effect) {
      if (!sr.detail.empty()) return;
      auto err = effect();
      if (!err.empty()) {
        sr.detail = "fragment action '" + name + "' rejected: " + err;
        return;
      }
      sr.fragment.push_back(name);
      abs_states.push_back(u2);
    };

    if (e.klass.rfind("request(", 0) == 0) {
      std::string x = detail_check::op_of(e.payload);
      run_frag("request(" + x + ")", [&] {
        auto err = model::users_request(cfg, users2, x);
        return err.empty() ? model::spec_request(u2, x) : err;
      });
    } else if (e.klass.rfind("response(", 0) == 0) {
      run_frag("response", [&] {
        return model::spec_response(u2, e.payload["x"], e.payload["v"]);
      });
    } else if (e.klass.rfind("do_it(", 0) == 0) {
      std::string x = detail_check::op_of(e.payload);
      if (!jset_has(u2["ops"], x)) {
        OrderRel np = model::order_of(u2["po"]);
        const OpDescriptor* o = cfg.find_op(x);
        for (const auto& p : o->prev) np.lt.insert({p, x});
        for (const auto& y : u2["stabilized"]) np.lt.insert({std::string(y), x});
        json po = model::order_to_json(close_order(std::move(np.lt)));
        run_frag("enter(" + x + ")",
                 [&] { return model::spec_enter(cfg, u2, x, po, true); });
      }
    } else if (e.klass.rfind("send_resp(", 0) == 0) {
      run_frag("calculate", [&] {
        return model::spec_calculate(cfg, u2, e.payload["x"], e.payload["v"]);
      });
    } else if (e.klass.rfind("recv_gossip(", 0) == 0) {
      if (!opt.drop_add_constraints) {
        OrderRel np = model::order_of(u2["po"]);
        for (const auto& aj : u2["ops"])
          for (const auto& bj : u2["ops"]) {
            std::string a = aj, b = bj;
            auto ia = lam.find(a), ib = lam.find(b);
            if (ia != lam.end() && ib != lam.end() && ia->second < ib->second)
              np.lt.insert(std::make_pair(a, b));
          }
        json po = model::order_to_json(close_order(std::move(np.lt)));
        if (po != u2["po"])
          run_frag("add_constraints", [&] { return model::spec_add_constraints(u2, po); });
      }
      std::vector<std::string> fresh;
      for (const auto& o : cfg.ops)
        if (pred::stabilized(cfg, e.post, o.id) && !jset_has(u2["stabilized"], o.id))
          fresh.push_back(o.id);
      std::sort(fresh.begin(), fresh.end(), [&](const auto& a, const auto& b) {
        return lam.count(a) && lam.count(b) ? lam[a] < lam[b] : a < b;
      });
      for (const auto& x : fresh)
        run_frag("stabilize(" + x + ")",
                 [&] { return model::spec_stabilize(u2, x, true); });
    }
    // other sends/receives match the empty fragment

    if (sr.detail.empty()) {
      auto gap = endpoint_gap(e.post, users2, u2);
      if (!gap.empty()) sr.detail = "endpoint relation broken: " + gap;
    }
    if (sr.detail.empty())
      sr.detail = detail_check::check_pair_clauses(clauses, prev_snap, e.post, abs_states);
    if (sr.detail.empty()) {
      ++rep.validated;
      users = users2;
      u = u2;
    } else {
      rep.ok = false;
      rep.failures.push_back(sr);
      break;  // the abstract state is no longer trustworthy past a failure
    }
    prev_snap = e.post;
  }
  return rep;
}

// Replays a relaxed-service log against the strict sequential service: each
// step maps to the same action, except one relaxed stabilize expands into the
// ascending chain of strict stabilizes it stands for.
inline LogCheckReport check_sim_G_on_log(const RunLog& log) {
  if (log.kind != "spec2")
    throw ValidationError("expected a relaxed-service log, got '" + log.kind + "'");
  if (log.snapshot_every != 1)
    throw ValidationError("log replay needs a snapshot on every step");
  const Config& cfg = log.cfg;
  json users{{"requested", json::array()}};
  json u = model::spec_init();
  LogCheckReport rep;

  auto endpoint_gap = [](const json& s, const json& u_st) -> std::string {
    const json& sp = s["spec"];
    if (u_st["wait"] != sp["wait"]) return "waiting sets differ";
    if (u_st["rept"] != sp["rept"]) return "reported values differ";
    if (u_st["ops"] != sp["ops"]) return "applied sets differ";
    if (u_st["po"] != sp["po"]) return "orders differ";
    for (const auto& x : sp["stabilized"])
      if (!jset_has(u_st["stabilized"], x)) return "stable set not dominated";
    return "";
  };

  std::vector<detail_check::PairClause> clauses;
  for (const auto& o : cfg.ops) {
    std::string x = o.id;
    auto red = [x](const json& v) { return jset_has(v["wait"], x); };
    auto green1 = [x](const json& v) { return !jset_has(v["wait"], x); };
    auto green2 = [x](const json& v) { return jset_has(v["stabilized"], x); };
    auto conc = [x](const json& s) { return jset_has(s["spec"]["wait"], x); };
    auto conc_g1 = [x](const json& s) { return !jset_has(s["spec"]["wait"], x); };
    auto conc_g2 = [x](const json& s) { return jset_has(s["spec"]["stabilized"], x); };
    clauses.push_back({red, green1, conc, conc_g1, x + ":requested-answered"});
    clauses.push_back({red, green2, conc, conc_g2, x + ":requested-stable"});
  }

  json prev_snap = log.start;
  for (const auto& e : log.events) {
    ++rep.steps;
    StepReport sr{e.n, e.klass, {}, ""};
    std::vector<json> abs_states{u};
    json users2 = users, u2 = u;
    auto run_frag = [&](const std::string& name,
                        const std::function<std::string()>& effect) {
      if (!sr.detail.empty()) return;
      auto err = effect();
      if (!err.empty()) {
        sr.detail = "fragment action '" + name + "' rejected: " + err;
        return;
      }
      sr.fragment.push_back(name);
      abs_states.push_back(u2);
    };

    if (e.klass.rfind("request(", 0) == 0) {
      std::string x = detail_check::op_of(e.payload);
      run_frag("request(" + x + ")", [&] {
        auto err = model::users_request(cfg, users2, x);
        return err.empty() ? model::spec_request(u2, x) : err;
      });
    } else if (e.klass == "enter") {
      run_frag("enter", [&] {
        return model::spec_enter(cfg, u2, e.payload["x"], e.payload["po"], false);
      });
    } else if (e.klass == "add_constraints") {
      run_frag("add_constraints",
               [&] { return model::spec_add_constraints(u2, e.payload["po"]); });
    } else if (e.klass == "calculate") {
      run_frag("calculate", [&] {
        return model::spec_calculate(cfg, u2, e.payload["x"], e.payload["v"]);
      });
    } else if (e.klass.rfind("response(", 0) == 0) {
      run_frag("response", [&] {
        return model::spec_response(u2, e.payload["x"], e.payload["v"]);
      });
    } else if (e.klass == "stabilize") {
      std::string x = detail_check::op_of(e.payload);
      OrderRel ord = model::order_of(u2["po"]);
      std::vector<std::string> chain;
      for (const auto& y : u2["ops"])
        if (ord.less(y, x) && !jset_has(u2["stabilized"], y)) chain.push_back(y);
      std::sort(chain.begin(), chain.end(), [&](const auto& a, const auto& b) {
        return ord.less(a, b);
      });
      if (!jset_has(u2["stabilized"], x)) chain.push_back(x);
      for (const auto& y : chain)
        run_frag("stabilize(" + y + ")",
                 [&] { return model::spec_stabilize(u2, y, false); });
    } else {
      sr.detail = "unrecognized action '" + e.klass + "'";
    }

    if (sr.detail.empty()) {
      auto gap = endpoint_gap(e.post, u2);
      if (!gap.empty()) sr.detail = "endpoint relation broken: " + gap;
    }
    if (sr.detail.empty())
      sr.detail = detail_check::check_pair_clauses(clauses, prev_snap, e.post, abs_states);
    if (sr.detail.empty()) {
      ++rep.validated;
      users = users2;
      u = u2;
    } else {
      rep.ok = false;
      rep.failures.push_back(sr);
      break;
    }
    prev_snap = e.post;
  }
  return rep;
}

inline json log_check_report_to_json(const LogCheckReport& r) {
  json fails = json::array();
  for (const auto& f : r.failures)
    fails.push_back(json{{"n", f.n}, {"klass", f.klass},
                         {"fragment", f.fragment}, {"detail", f.detail}});
  return json{{"ok", r.ok}, {"steps", r.steps},
              {"validated", r.validated}, {"failures", fails}};
}

}  // namespace liveref::esds
