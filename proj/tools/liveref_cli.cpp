// Command-line front door: loads automata, pair files, candidates, lattices,
// and simulator configs, dispatches every checker, and prints JSON reports on
// stdout (prose goes to stderr).
//
// Exit codes: 0 positive verdict, 1 negative verdict with counterexample,
// 2 holds-within-bounds, 3 unknown, 64 usage/schema error, 65 precondition
// violation.

#include <fstream>
#include <iostream>

#include "liveref/esds/check.hpp"
#include "liveref/io.hpp"
#include "liveref/streett.hpp"
#include "liveref/transforms.hpp"

using namespace liveref;

namespace {

struct Args {
  std::vector<std::string> pos;
  std::map<std::string, std::string> flags;

  bool has(const std::string& f) const { return flags.count(f) > 0; }
  std::string get(const std::string& f, const std::string& dflt = "") const {
    auto it = flags.find(f);
    return it == flags.end() ? dflt : it->second;
  }
  size_t num(const std::string& f, size_t dflt) const {
    auto it = flags.find(f);
    return it == flags.end() ? dflt : std::stoul(it->second);
  }
};

const char* kUsage = R"(usage: liveref <command> [files...] [flags]

commands:
  validate A.json
  reachable A.json
  emptiness A.json pairs.json [--from STATE]      exit 0 live lasso exists, 1 empty
  lassos A.json pairs.json [--bounds K] [--max N]
  machine-closure A.json pairs.json
  closure-member A.json pairs.json pair.json
  lattice-check A.json lattice.json [--dot FILE]
  lattice-certify A.json pairs.json lattice.json
  check-sim <fwd|ref|bwd|hist|proph> A.json B.json cand.json
  check-live-sim <fwd|ref|bwd|hist|proph> A.json A_pairs.json B.json B_pairs.json cand.json
  correspondence <fwd|bwd> A.json A_pairs.json B.json B_pairs.json cand.json lasso.json
  trace-inclusion safe A.json B.json [--bounds K]
  trace-inclusion live A.json A_pairs.json B.json B_pairs.json [--bounds K]
  esds-run config.json [--seed N] [--steps N] [--sample-log N]   log on stdout
  esds-monitor [log|-] [--family M-I|M-II|L]
  esds-check-f [log|-] [--drop-add-constraints]
  esds-check-g [log|-]
  leadsto A.json sets.json          sets: {"p":[states],"q":[states]}
  forestify A.json DEPTH

flags: --seed N, --bounds K, --json (default), --sample-log N, --from STATE,
       --dot FILE, --max N, --family F, --drop-add-constraints
exit codes: 0 ok/holds, 1 fails, 2 holds-within-bounds, 3 unknown,
            64 usage or schema error, 65 precondition violation
)";

int usage() {
  std::cerr << kUsage;
  return 64;
}

json jfile(const std::string& path) { return load_json_file(path); }

StateSet set_from_json(const Automaton& a, const json& arr) {
  StateSet m(a.states.size(), 0);
  for (const auto& s : arr) {
    int i = a.state_index(s.get<std::string>());
    if (i < 0) throw SchemaError("unknown state: " + s.dump());
    m[i] = 1;
  }
  return m;
}

ComplementedPair pair_from_json(const Automaton& a, const json& j) {
  return {j.value("id", "pair"), set_from_json(a, j.at("red")),
          set_from_json(a, j.at("green"))};
}

// Accepts either the flat alternating form ["s0","a","s1",...] or the
// {"fstate","steps"} object the tool itself emits, so witnesses round-trip.
Execution exec_from_names(const Automaton& a, const json& j) {
  Execution e;
  auto state = [&](const json& s) {
    int i = a.state_index(s.get<std::string>());
    if (i < 0) throw SchemaError("unknown state: " + s.dump());
    return i;
  };
  auto action = [&](const json& s) {
    int i = a.action_index(s.get<std::string>());
    if (i < 0) throw SchemaError("unknown action: " + s.dump());
    return i;
  };
  if (j.is_object()) {
    e.states.push_back(state(j.at("fstate")));
    for (const auto& step : j.at("steps")) {
      e.acts.push_back(action(step.at(1)));
      e.states.push_back(state(step.at(2)));
    }
    return e;
  }
  if (j.empty()) throw SchemaError("empty state-action sequence");
  e.states.push_back(state(j[0]));
  for (size_t i = 1; i + 1 < j.size(); i += 2) {
    e.acts.push_back(action(j[i]));
    e.states.push_back(state(j[i + 1]));
  }
  return e;
}

Lasso lasso_from_json(const Automaton& a, const json& j) {
  return {exec_from_names(a, j.at("stem")), exec_from_names(a, j.at("cycle"))};
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

int verdict_code(Verdict v) {
  switch (v) {
    case Verdict::holds: return 0;
    case Verdict::fails: return 1;
    case Verdict::conditional: return 2;
    default: return 3;
  }
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::conditional: return "holds-within-bounds";
    default: return "unknown";
  }
}

esds::RunLog log_from_arg(const std::string& arg) {
  if (arg == "-" || arg.empty()) return esds::parse_log(std::cin);
  std::ifstream in(arg);
  if (!in) throw SchemaError("cannot open log file: " + arg);
  return esds::parse_log(in);
}

int cmd_check_sim(const Args& args, bool live) {
  size_t want = live ? 7u : 5u;
  if (args.pos.size() != want) return usage();
  std::string variant = args.pos[1];
  Automaton a = automaton_from_json(jfile(args.pos[2]));
  LivenessCondition l, m;
  size_t bi = 3;
  if (live) l = pairs_from_json(jfile(args.pos[bi++]), a);
  Automaton b = automaton_from_json(jfile(args.pos[bi++]));
  if (live) m = pairs_from_json(jfile(args.pos[bi++]), b);
  json cj = jfile(args.pos[bi]);
  if (!live) cj.erase("h");  // pair map only matters for the live clauses
  SimCandidate cand = candidate_from_json(cj, a, b, live ? &l : nullptr);
  if (args.has("bounds")) cand.bound = args.num("bounds", 0);
  SimReport r;
  if (variant == "fwd")
    r = live ? check_live_forward_sim(a, l, b, m, cand) : check_forward_sim(a, b, cand);
  else if (variant == "ref")
    r = live ? check_live_refinement(a, l, b, m, cand) : check_refinement(a, b, cand);
  else if (variant == "bwd")
    r = live ? check_live_backward_sim(a, l, b, m, cand) : check_backward_sim(a, b, cand);
  else if (variant == "hist")
    r = live ? check_live_history_sim(a, l, b, m, cand) : check_history_sim(a, b, cand);
  else if (variant == "proph")
    r = live ? check_live_prophecy_sim(a, l, b, m, cand) : check_prophecy_sim(a, b, cand);
  else
    return usage();
  emit(sim_report_to_json(r, &a));
  if (!r.ok) std::cerr << "failed at clause '" << r.clause << "'\n";
  return r.ok ? 0 : 1;
}

int dispatch(const Args& args) {
  const std::string& cmd = args.pos.at(0);

  if (cmd == "validate") {
    Automaton a = automaton_from_json(jfile(args.pos.at(1)));
    validate(a);
    emit(json{{"ok", true}, {"states", a.states.size()}, {"steps", a.steps.size()}});
    return 0;
  }

  if (cmd == "reachable") {
    Automaton a = automaton_from_json(jfile(args.pos.at(1)));
    json names = json::array();
    for (int s : reachable_states(a)) names.push_back(a.states[s]);
    emit(json{{"reachable", names}});
    return 0;
  }

  if (cmd == "emptiness") {
    Automaton a = automaton_from_json(jfile(args.pos.at(1)));
    LivenessCondition l = pairs_from_json(jfile(args.pos.at(2)), a);
    EmptinessOptions opt;
    if (args.has("from")) {
      int s = a.state_index(args.get("from"));
      if (s < 0) throw SchemaError("unknown state: " + args.get("from"));
      opt.from = s;
    }
    auto r = streett_emptiness(a, l, opt);
    json out{{"empty", r.empty}};
    if (r.witness) out["witness"] = lasso_to_json(a, *r.witness);
    emit(out);
    return r.empty ? 1 : 0;
  }

  if (cmd == "lassos") {
    Automaton a = automaton_from_json(jfile(args.pos.at(1)));
    LivenessCondition l = pairs_from_json(jfile(args.pos.at(2)), a);
    size_t stem = a.states.size();
    size_t cycle = a.states.size() * (l.pairs.size() + 1);
    if (args.has("bounds")) stem = cycle = args.num("bounds", stem);
    auto ls = enumerate_live_lassos(a, l, stem, cycle, args.num("max", 1000));
    json out = json::array();
    for (const auto& x : ls) out.push_back(lasso_to_json(a, x));
    emit(json{{"count", ls.size()}, {"lassos", out}});
    return 0;
  }

  if (cmd == "machine-closure") {
    Automaton a = automaton_from_json(jfile(args.pos.at(1)));
    LivenessCondition l = pairs_from_json(jfile(args.pos.at(2)), a);
    auto r = machine_closure_check(a, l);
    json out{{"machine_closed", r.closed}};
    if (r.offending_state) out["offending_state"] = a.states[*r.offending_state];
    emit(out);
    return r.closed ? 0 : 1;
  }

  if (cmd == "closure-member") {
    Automaton a = automaton_from_json(jfile(args.pos.at(1)));
    LivenessCondition l = pairs_from_json(jfile(args.pos.at(2)), a);
    ComplementedPair p = pair_from_json(a, jfile(args.pos.at(3)));
    auto r = closure_member(a, l, p);
    json out{{"member", r.member}};
    if (r.counterexample) out["violating_lasso"] = lasso_to_json(a, *r.counterexample);
    emit(out);
    return r.member ? 0 : 1;
  }

  if (cmd == "lattice-check" || cmd == "lattice-certify") {
    bool cert = cmd == "lattice-certify";
    Automaton a = automaton_from_json(jfile(args.pos.at(1)));
    LivenessCondition l;
    size_t li = 2;
    if (cert) l = pairs_from_json(jfile(args.pos.at(li++)), a);
    PairLattice lat = load_lattice_file(args.pos.at(li), a);
    if (args.has("dot")) {
      std::ofstream dot(args.get("dot"));
      dot << "digraph lattice {\n";
      for (const auto& p : lat.pairs) dot << "  \"" << p.id << "\";\n";
      for (auto [lo, hi] : lat.order)
        dot << "  \"" << lat.pairs[lo].id << "\" -> \"" << lat.pairs[hi].id << "\";\n";
      dot << "}\n";
    }
    if (!cert) {
      auto r = check_lattice_structure(a, lat);
      emit(json{{"ok", r.ok}, {"violations", r.violations}});
      return r.ok ? 0 : 1;
    }
    auto c = certify_lattice(a, l, lat);
    json out{{"ok", c.ok}, {"violations", c.violations}};
    if (c.ok) {
      json red = json::array(), green = json::array();
      for (size_t i = 0; i < a.states.size(); ++i) {
        if (c.derived.red[i]) red.push_back(a.states[i]);
        if (c.derived.green[i]) green.push_back(a.states[i]);
      }
      out["derived_pair"] = json{{"id", c.derived.id}, {"red", red}, {"green", green}};
    }
    emit(out);
    return c.ok ? 0 : 1;
  }

  if (cmd == "check-sim") return cmd_check_sim(args, false);
  if (cmd == "check-live-sim") return cmd_check_sim(args, true);

  if (cmd == "correspondence") {
    if (args.pos.size() != 8) return usage();
    std::string variant = args.pos[1];
    Automaton a = automaton_from_json(jfile(args.pos[2]));
    LivenessCondition l = pairs_from_json(jfile(args.pos[3]), a);
    Automaton b = automaton_from_json(jfile(args.pos[4]));
    LivenessCondition m = pairs_from_json(jfile(args.pos[5]), b);
    SimCandidate cand = candidate_from_json(jfile(args.pos[6]), a, b, &l);
    Lasso conc = lasso_from_json(a, jfile(args.pos[7]));
    if (!is_lasso(a, conc)) throw ValidationError("input is not a lasso of A");
    Correspondence c;
    if (variant == "fwd")
      c = build_correspondence_forward(a, l, b, m, cand, conc);
    else if (variant == "bwd")
      c = build_correspondence_backward(a, l, b, m, cand, conc);
    else
      return usage();
    json out{{"ok", c.ok}};
    if (c.ok) {
      out["abstract_lasso"] = lasso_to_json(b, c.abstract_lasso);
      out["mapping"] = mapping_to_json(c.mapping);
      out["abstract_live"] = is_live(c.abstract_lasso, m);
    } else {
      out["failure"] = c.failure;
    }
    emit(out);
    return c.ok ? 0 : 1;
  }

  if (cmd == "trace-inclusion") {
    std::string variant = args.pos.at(1);
    InclusionBounds bounds;
    if (args.has("bounds")) {
      bounds.stem = bounds.cycle = args.num("bounds", bounds.stem);
    }
    if (variant == "safe") {
      Automaton a = automaton_from_json(jfile(args.pos.at(2)));
      Automaton b = automaton_from_json(jfile(args.pos.at(3)));
      auto r = safe_trace_inclusion(a, b, bounds);
      emit(json{{"verdict", verdict_name(r.verdict)},
                {"counterexample_trace", r.counterexample_trace}});
      return verdict_code(r.verdict);
    }
    if (variant == "live") {
      Automaton a = automaton_from_json(jfile(args.pos.at(2)));
      LivenessCondition l = pairs_from_json(jfile(args.pos.at(3)), a);
      Automaton b = automaton_from_json(jfile(args.pos.at(4)));
      LivenessCondition m = pairs_from_json(jfile(args.pos.at(5)), b);
      auto r = live_trace_inclusion(a, l, b, m, bounds);
      json out{{"verdict", verdict_name(r.verdict)},
               {"lassos_checked", r.lassos_checked}};
      if (r.counterexample) {
        out["counterexample"] = lasso_to_json(a, *r.counterexample);
        out["counterexample_trace"] = trace_to_json(r.counterexample_trace);
      }
      emit(out);
      return verdict_code(r.verdict);
    }
    return usage();
  }

  if (cmd == "esds-run") {
    esds::Config cfg = esds::config_from_json(jfile(args.pos.at(1)));
    if (args.has("seed")) cfg.seed = args.num("seed", cfg.seed);
    if (args.has("steps")) cfg.steps = args.num("steps", cfg.steps);
    esds::RunOptions opt;
    opt.snapshot_every = args.num("sample-log", 1);
    auto sys = esds::make_alg_system(cfg);
    auto res = esds::run_system(sys, std::cout, opt);
    std::cerr << "steps=" << res.steps << " quiescent=" << res.quiescent
              << " max_age=" << res.max_observed_age << "\n";
    return res.quiescent ? 0 : 2;
  }

  if (cmd == "esds-monitor") {
    auto log = log_from_arg(args.pos.size() > 1 ? args.pos[1] : "-");
    std::string family = args.get("family", "M-I");
    if (family == "L") {
      // message accounting: every sent message is eventually received
      std::map<std::string, long> balance;
      for (const auto& e : log.events) {
        if (e.klass.rfind("send_", 0) == 0) ++balance[e.klass.substr(5)];
        if (e.klass.rfind("recv_", 0) == 0) --balance[e.klass.substr(5)];
      }
      json out = json::object();
      size_t outstanding = 0;
      for (const auto& [k, v] : balance) {
        out[k] = v;
        if (v != 0) ++outstanding;
      }
      emit(json{{"family", "L"}, {"channel_balance", out},
                {"outstanding", outstanding},
                {"note", "finite-run surrogate: nonzero balance means undelivered messages"}});
      return outstanding == 0 ? 0 : 1;
    }
    auto obs = esds::monitor_obligations(log);
    json rows = json::array();
    size_t outstanding = 0;
    for (const auto& o : obs) {
      rows.push_back(json{{"op", o.op}, {"pair", o.pair_id}, {"status", o.status}});
      if (o.status == "outstanding") ++outstanding;
    }
    emit(json{{"family", family}, {"obligations", rows},
              {"outstanding", outstanding},
              {"note", "finite-run surrogate for recurring-red implies recurring-green"}});
    return outstanding == 0 ? 0 : 1;
  }

  if (cmd == "esds-check-f" || cmd == "esds-check-g") {
    auto log = log_from_arg(args.pos.size() > 1 ? args.pos[1] : "-");
    esds::LogCheckReport r;
    if (cmd == "esds-check-f") {
      esds::FCheckOptions opt;
      opt.drop_add_constraints = args.has("drop-add-constraints");
      r = esds::check_sim_F_on_log(log, opt);
    } else {
      r = esds::check_sim_G_on_log(log);
    }
    auto inv = esds::check_invariants(log);
    json out = esds::log_check_report_to_json(r);
    out["invariant_violations"] = inv;
    emit(out);
    if (!r.failures.empty())
      std::cerr << "first failure at event " << r.failures[0].n << ": "
                << r.failures[0].detail << "\n";
    return r.ok && inv.empty() ? 0 : 1;
  }

  if (cmd == "leadsto") {
    Automaton a = automaton_from_json(jfile(args.pos.at(1)));
    json sets = jfile(args.pos.at(2));
    auto f = leads_to_transform(a, set_from_json(a, sets.at("p")),
                                set_from_json(a, sets.at("q")));
    emit(json{{"automaton", automaton_to_json(f.automaton)},
              {"pairs", pairs_to_json(f.pairs, f.automaton)}});
    return 0;
  }

  if (cmd == "forestify") {
    Automaton a = automaton_from_json(jfile(args.pos.at(1)));
    auto f = forestify(a, std::stoul(args.pos.at(2)));
    emit(json{{"automaton", automaton_to_json(f.automaton)}});
    return 0;
  }

  return usage();
}

}  // namespace

int main(int argc, char** argv) {
  Args args;
  for (int i = 1; i < argc; ++i) {
    std::string s = argv[i];
    if (s.rfind("--", 0) == 0) {
      std::string key = s.substr(2), val = "1";
      auto eq = key.find('=');
      if (eq != std::string::npos) {
        val = key.substr(eq + 1);
        key = key.substr(0, eq);
      } else if (key != "json" && key != "drop-add-constraints" &&
                 i + 1 < argc && argv[i + 1][0] != '-') {
        val = argv[++i];
      }
      args.flags[key] = val;
    } else {
      args.pos.push_back(s);
    }
  }
  if (args.pos.empty()) return usage();
  try {
    return dispatch(args);
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 64;
  } catch (const ValidationError& e) {
    std::cerr << "precondition violation: " << e.what() << "\n";
    return 65;
  } catch (const std::out_of_range&) {
    return usage();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 65;
  }
}
