// Acceptance gate: seven end-to-end criteria, each printing one pass/fail
// line. Tolerances (instance counts, bounds, time budgets) are pinned here.

#include <chrono>
#include <iostream>
#include <sstream>

#include "helpers.hpp"
#include "liveref/correspondence.hpp"
#include "liveref/esds/check.hpp"
#include "liveref/inclusion.hpp"
#include "liveref/lattice.hpp"

using namespace liveref;

namespace {

// pinned budgets and sweep sizes
constexpr double kDbBudgetSec = 1.0;
constexpr double kSweepBudgetSec = 300.0;
constexpr double kOracleBudgetSec = 120.0;
constexpr double kEsdsBudgetSec = 10.0;
constexpr int kSweepInstances = 500;
constexpr int kOracleInstances = 1000;
constexpr int kRandomLattices = 100;
constexpr size_t kLassosPerCandidate = 50;
constexpr size_t kLassoStemBound = 4;
constexpr size_t kLassoCycleBound = 4;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

void report(int n, const std::string& what, bool ok, double sec) {
  std::ostringstream line;
  line << "acceptance " << n << " (" << what << "): "
       << (ok ? "PASS" : "FAIL") << " [" << int(sec * 1000) << " ms]";
  std::cout << line.str() << std::endl;
  INFO(line.str());
  REQUIRE(ok);
}

SimCandidate identity_candidate(const Automaton& a, const LivenessCondition& l) {
  SimCandidate c;
  std::vector<std::pair<int, int>> rows;
  for (size_t s = 0; s < a.states.size(); ++s) rows.push_back({int(s), int(s)});
  c.g = Relation::from_rows(a.states.size(), a.states.size(), rows);
  for (const auto& p : l.pairs) c.h.push_back({p.id, p, false});
  return c;
}

// quotient of a under "merge state v into state u": a genuine abstraction,
// so candidate relations other than the identity enter the sweep
struct Quotient {
  Automaton b;
  LivenessCondition m;
  SimCandidate cand;
};

Quotient quotient_instance(const Automaton& a, const LivenessCondition& l,
                           int u, int v) {
  Quotient q;
  std::vector<int> map(a.states.size());
  int next = 0;
  for (size_t s = 0; s < a.states.size(); ++s)
    map[s] = (int(s) == v) ? -1 : next++;
  map[v] = map[u];
  for (size_t s = 0; s < a.states.size(); ++s)
    if (map[s] >= 0 && int(s) != v) q.b.add_state("m" + std::to_string(map[s]));
  for (const auto& act : a.actions) q.b.add_action(act.name, act.kind);
  for (int s : a.start) q.b.start.push_back(map[s]);
  std::sort(q.b.start.begin(), q.b.start.end());
  q.b.start.erase(std::unique(q.b.start.begin(), q.b.start.end()),
                  q.b.start.end());
  for (const auto& st : a.steps) q.b.add_step(map[st.from], st.action, map[st.to]);
  std::sort(q.b.steps.begin(), q.b.steps.end());
  q.b.steps.erase(std::unique(q.b.steps.begin(), q.b.steps.end()),
                  q.b.steps.end());

  for (const auto& p : l.pairs) {
    ComplementedPair img{p.id, StateSet(q.b.states.size(), 0),
                         StateSet(q.b.states.size(), 0)};
    for (size_t s = 0; s < a.states.size(); ++s) {
      img.red[map[s]] = img.red[map[s]] || p.red[s];
      img.green[map[s]] = img.green[map[s]] || p.green[s];
    }
    q.m.pairs.push_back(std::move(img));
    q.cand.h.push_back({p.id, p, true});
  }
  std::vector<std::pair<int, int>> rows;
  for (size_t s = 0; s < a.states.size(); ++s) rows.push_back({int(s), map[s]});
  q.cand.g = Relation::from_rows(a.states.size(), q.b.states.size(), rows);
  return q;
}

struct SweepCase {
  Automaton a, b;
  LivenessCondition l, m;
  SimCandidate cand;
  bool fwd = false, bwd = false;
};

struct SweepResult {
  int instances = 0;
  int passing = 0;
  int inclusion_failures = 0;
  std::vector<SweepCase> cases;
  double seconds = 0;
};

// criterion 2's sweep, reused by criterion 5
const SweepResult& soundness_sweep() {
  static SweepResult res = [] {
    SweepResult r;
    Timer t;
    th::Rng rng(2026);
    for (int it = 0; it < kSweepInstances; ++it) {
      ++r.instances;
      Automaton a = th::random_automaton(rng, 8, 2, 2);
      LivenessCondition l = th::random_condition(rng, a, 3);

      std::vector<SweepCase> tries;
      tries.push_back({a, a, l, l, identity_candidate(a, l)});
      if (a.states.size() >= 2) {
        int u = int(rng.below(a.states.size())), v = u;
        while (v == u) v = int(rng.below(a.states.size()));
        auto q = quotient_instance(a, l, u, v);
        tries.push_back({a, std::move(q.b), l, std::move(q.m), std::move(q.cand)});
        // a sprinkle of extra relation rows on top of the quotient
        SweepCase fat = tries.back();
        std::vector<std::pair<int, int>> rows;
        for (size_t s = 0; s < fat.a.states.size(); ++s)
          for (int img : fat.cand.g.image[s]) rows.push_back({int(s), img});
        rows.push_back({int(rng.below(fat.a.states.size())),
                        int(rng.below(fat.b.states.size()))});
        fat.cand.g = Relation::from_rows(fat.a.states.size(),
                                         fat.b.states.size(), rows);
        tries.push_back(std::move(fat));
      }

      for (auto& c : tries) {
        c.fwd = check_live_forward_sim(c.a, c.l, c.b, c.m, c.cand).ok;
        c.bwd = check_live_backward_sim(c.a, c.l, c.b, c.m, c.cand).ok;
        if (!c.fwd && !c.bwd) continue;
        ++r.passing;
        auto inc = live_trace_inclusion(c.a, c.l, c.b, c.m);
        if (inc.verdict == Verdict::fails) ++r.inclusion_failures;
        r.cases.push_back(std::move(c));
      }
    }
    r.seconds = t.seconds();
    return r;
  }();
  return res;
}

}  // namespace

TEST_CASE("acceptance 1: database counterexample trio") {
  Timer t;
  auto dbi = th::load_automaton("dbi.json");
  auto dbs = th::load_automaton("dbs.json");
  auto l = th::load_pairs("db_pairs.json", dbi);
  auto m = th::load_pairs("db_pairs.json", dbs);
  auto cand = candidate_from_json(load_json_file(th::fix("db_candidate.json")),
                                  dbi, dbs, &l);

  bool ok = check_forward_sim(dbi, dbs, cand).ok;

  auto live = check_live_forward_sim(dbi, l, dbs, m, cand);
  ok = ok && !live.ok && live.clause == "step-pairs" &&
       live.detail["step"] == json({"({},{})", "request(q)", "({},{})"});

  auto inc = live_trace_inclusion(dbi, l, dbs, m);
  ok = ok && inc.verdict == Verdict::fails &&
       inc.counterexample_trace.prefix.empty() &&
       inc.counterexample_trace.period == std::vector<std::string>{"request(q)"};

  double sec = t.seconds();
  report(1, "database counterexample trio", ok && sec < kDbBudgetSec, sec);
}

TEST_CASE("acceptance 2: certified candidates never contradict trace inclusion") {
  const auto& r = soundness_sweep();
  bool ok = r.instances >= kSweepInstances && r.inclusion_failures == 0 &&
            r.passing >= kSweepInstances &&  // at least the identity cases
            r.seconds < kSweepBudgetSec;
  report(2, "live simulation soundness sweep, " + std::to_string(r.passing) +
                " certified candidates", ok, r.seconds);
}

TEST_CASE("acceptance 3: emptiness decision matches brute-force enumeration") {
  Timer t;
  th::Rng rng(31);
  int disagreements = 0, nonempty = 0;
  for (int it = 0; it < kOracleInstances; ++it) {
    Automaton a = th::random_automaton(rng, 8, 2, 2);
    LivenessCondition l = th::random_condition(rng, a, 3);
    size_t n = a.states.size();
    bool brute =
        !enumerate_live_lassos(a, l, n, n * (l.pairs.size() + 1), 1).empty();
    if (streett_emptiness(a, l).empty == brute) ++disagreements;
    if (brute) ++nonempty;
  }
  double sec = t.seconds();
  bool ok = disagreements == 0 && nonempty > 100 &&
            (kOracleInstances - nonempty) > 100 && sec < kOracleBudgetSec;
  report(3, "emptiness oracle equivalence on " +
                std::to_string(kOracleInstances) + " instances", ok, sec);
}

TEST_CASE("acceptance 4: chained pair of every certified lattice is a closure member") {
  Timer t;
  int certified = 0, failures = 0;

  // the shipped lattice
  {
    auto a = th::load_automaton("chain.json");
    auto l = th::load_pairs("chain_pairs.json", a);
    auto lat = load_lattice_file(th::fix("chain_lattice.json"), a);
    bool cert = check_lattice_structure(a, lat).ok;
    for (const auto& p : lat.pairs) cert = cert && closure_member(a, l, p).member;
    if (cert) {
      ++certified;
      ComplementedPair chained{"chained", lat.pairs[lat.bottom].red,
                               lat.pairs[lat.top].green};
      if (!closure_member(a, l, chained).member) ++failures;
    }
  }

  // random chains of pairs of the shape <X, X> (trivially closure members)
  // under a random closure-member top; the chained pair is then checked
  // against the independent semantic oracle
  th::Rng rng(47);
  while (certified < kRandomLattices + 1) {
    Automaton a = th::random_automaton(rng, 6, 2, 1);
    LivenessCondition l = th::random_condition(rng, a, 2);
    size_t n = a.states.size();

    ComplementedPair top{"top", StateSet(n, 0), StateSet(n, 0)};
    for (size_t s = 0; s < n; ++s) {
      top.red[s] = rng.chance(40);
      top.green[s] = rng.chance(40);
    }
    if (!closure_member(a, l, top).member) continue;

    PairLattice lat;
    size_t len = 1 + rng.below(3);
    std::vector<StateSet> level{top.red};
    for (size_t i = 0; i < len; ++i) {
      StateSet x(n, 0);  // subset of the previous red keeps the cover clause
      for (size_t s = 0; s < n; ++s) x[s] = level.back()[s] && rng.chance(70);
      level.push_back(x);
      lat.pairs.push_back({"c" + std::to_string(i), x, x});
    }
    std::reverse(lat.pairs.begin(), lat.pairs.end());
    lat.pairs.push_back(top);
    for (int i = 0; i + 1 < int(lat.pairs.size()); ++i) lat.order.push_back({i, i + 1});
    lat.bottom = 0;
    lat.top = int(lat.pairs.size()) - 1;

    bool cert = check_lattice_structure(a, lat).ok;
    for (const auto& p : lat.pairs) cert = cert && closure_member(a, l, p).member;
    if (!cert) continue;
    ++certified;
    ComplementedPair chained{"chained", lat.pairs[lat.bottom].red,
                             lat.pairs[lat.top].green};
    if (!closure_member(a, l, chained).member) ++failures;
  }
  double sec = t.seconds();
  report(4, "chained pair closure membership over " +
                std::to_string(certified) + " certified lattices",
         failures == 0, sec);
}

TEST_CASE("acceptance 5: correspondence builder outputs re-validate") {
  Timer t;
  const auto& sweep = soundness_sweep();
  int built = 0, failures = 0;
  for (const auto& c : sweep.cases) {
    auto lassos = enumerate_live_lassos(c.a, c.l, kLassoStemBound,
                                        kLassoCycleBound, kLassosPerCandidate);
    ResolvedPairMap pm;
    if (resolve_pair_map(c.a, c.l, c.m, c.cand, pm)) {
      ++failures;
      continue;
    }
    LivePairContext lctx{&pm.m, pm.h_of};
    StateRel rel = [&](int s, int u) {
      auto& im = c.cand.g.image[s];
      return std::binary_search(im.begin(), im.end(), u);
    };
    for (const auto& conc : lassos) {
      Correspondence r = c.fwd
          ? build_correspondence_forward(c.a, c.l, c.b, c.m, c.cand, conc)
          : build_correspondence_backward(c.a, c.l, c.b, c.m, c.cand, conc);
      ++built;
      if (!r.ok) {
        ++failures;
        continue;
      }
      auto chk = check_index_mapping(c.a, conc, c.b, r.abstract_lasso, rel,
                                     r.mapping, &lctx);
      if (!chk.ok || !is_live(r.abstract_lasso, pm.m)) ++failures;
    }
  }
  double sec = t.seconds();
  report(5, "correspondence re-validation on " + std::to_string(built) +
                " lassos", failures == 0 && built > 1000, sec);
}

TEST_CASE("acceptance 6: replicated-store end-to-end run") {
  Timer t;
  esds::Config cfg =
      esds::config_from_json(load_json_file(th::fix("esds_small.json")));

  auto run = [](esds::System sys) {
    std::ostringstream out;
    auto res = esds::run_system(sys, out);
    std::istringstream in(out.str());
    return std::make_pair(esds::parse_log(in), res);
  };

  auto [alg_log, alg_res] = run(esds::make_alg_system(cfg));
  bool ok = alg_res.quiescent;

  size_t outstanding = 0, answered = 0, stable = 0;
  for (const auto& o : esds::monitor_obligations(alg_log)) {
    if (o.status == "outstanding") ++outstanding;
    if (o.pair_id == "requested-answered") ++answered;
    if (o.pair_id == "requested-stable") ++stable;
  }
  ok = ok && outstanding == 0 && answered == cfg.ops.size() &&
       stable == cfg.ops.size();

  auto f = esds::check_sim_F_on_log(alg_log);
  ok = ok && f.ok && f.validated == f.steps && f.steps == alg_log.events.size();

  auto [spec_log, spec_res] = run(esds::make_spec_system(cfg, true));
  auto g = esds::check_sim_G_on_log(spec_log);
  ok = ok && spec_res.quiescent && g.ok && g.validated == g.steps;

  auto samples = esds::log_snapshots(alg_log);
  json req = load_json_file(th::fix("lattice_req.json"));
  json stab = load_json_file(th::fix("lattice_stab.json"));
  for (const auto& o : cfg.ops) {
    ok = ok && check_lattice_sampled(
                   esds::load_esds_lattice(req, cfg, o.id), samples).ok;
    ok = ok && check_lattice_sampled(
                   esds::load_esds_lattice(stab, cfg, o.id), samples).ok;
  }
  double sec = t.seconds();
  report(6, "replicated store: quiescence, monitors, log replay, lattices",
         ok && sec < kEsdsBudgetSec, sec);
}

TEST_CASE("acceptance 7: every seeded mutation is caught with a localized report") {
  Timer t;
  bool ok = true;

  esds::Config cfg =
      esds::config_from_json(load_json_file(th::fix("esds_small.json")));
  auto run_alg = [](const esds::Config& c) {
    std::ostringstream out;
    auto sys = esds::make_alg_system(c);
    esds::run_system(sys, out);
    std::istringstream in(out.str());
    return esds::parse_log(in);
  };

  // 1. dropping the ordering fragment from the log replay recipe
  {
    auto log = run_alg(cfg);
    esds::FCheckOptions opt;
    opt.drop_add_constraints = true;
    auto rep = esds::check_sim_F_on_log(log, opt);
    ok = ok && !rep.ok && !rep.failures.empty() &&
         !rep.failures[0].detail.empty();
  }

  // 2. breaking the green-cover clause of a certified lattice
  {
    auto a = th::load_automaton("chain.json");
    auto l = th::load_pairs("chain_pairs.json", a);
    auto lat = load_lattice_file(th::fix("chain_lattice.json"), a);
    lat.pairs[lat.top].red.assign(a.states.size(), 0);
    auto rep = check_lattice_structure(a, lat);
    bool localized = false;
    for (const auto& v : rep.violations)
      localized = localized || v.find("not covered") != std::string::npos;
    ok = ok && !rep.ok && localized;
  }

  // 3. removing the greens behind a correspondence output
  {
    auto dbs = th::load_automaton("dbs.json");
    auto l = th::load_pairs("db_pairs.json", dbs);
    auto cand = identity_candidate(dbs, l);
    auto conc = th::lasso(dbs,
                          {"({},{})", "request(q)", "({q},{})", "response(q,v)",
                           "({q},{q})"},
                          {"({q},{q})", "request(q)", "({q},{q})"});
    auto r = build_correspondence_forward(dbs, l, dbs, l, cand, conc);
    ok = ok && r.ok;

    // gut the abstract greens; the mapping that just validated must now fail
    LivenessCondition gutted = l;
    gutted.pairs[0].green.assign(dbs.states.size(), 0);
    ResolvedPairMap pm;
    ok = ok && !resolve_pair_map(dbs, l, gutted, cand, pm);
    LivePairContext lctx{&pm.m, pm.h_of};
    StateRel rel = [&](int s, int u) { return s == u; };
    auto chk = check_index_mapping(dbs, conc, dbs, r.abstract_lasso, rel,
                                   r.mapping, &lctx);
    ok = ok && !chk.ok && !chk.failure.empty();
  }

  // 4. a frontend that silently drops one request
  {
    esds::Config lossy = cfg;
    lossy.lose_requests = {"x2"};
    lossy.steps = 800;
    auto log = run_alg(lossy);
    bool caught = false;
    for (const auto& o : esds::monitor_obligations(log))
      caught = caught || (o.op == "x2" && o.status == "outstanding");
    ok = ok && caught;
  }

  // 5. a relation declared non-image-finite offered to the backward checker
  {
    auto dbs = th::load_automaton("dbs.json");
    auto cand = identity_candidate(dbs, {});
    cand.image_finite = false;
    auto rep = check_backward_sim(dbs, dbs, cand);
    ok = ok && !rep.ok && rep.clause == "image-finite";
  }

  report(7, "five seeded mutations detected", ok, t.seconds());
}
