#include "helpers.hpp"

using namespace th;

namespace {

SimCandidate identity_candidate(const Automaton& a,
                                const LivenessCondition& l = {}) {
  SimCandidate c;
  std::vector<std::pair<int, int>> rows;
  for (size_t s = 0; s < a.states.size(); ++s) rows.push_back({int(s), int(s)});
  c.g = Relation::from_rows(a.states.size(), a.states.size(), rows);
  for (const auto& p : l.pairs) c.h.push_back({p.id, p, false});
  return c;
}

SimCandidate load_candidate(const std::string& name, const Automaton& a,
                            const Automaton& b, const LivenessCondition* l) {
  return candidate_from_json(load_json_file(fix(name)), a, b, l);
}

}  // namespace

TEST_CASE("identity passes every plain variant") {
  auto t1 = load_automaton("t1.json");
  auto c = identity_candidate(t1);
  REQUIRE(check_forward_sim(t1, t1, c).ok);
  REQUIRE(check_refinement(t1, t1, c).ok);
  REQUIRE(check_backward_sim(t1, t1, c).ok);
  REQUIRE(check_history_sim(t1, t1, c).ok);
  REQUIRE(check_prophecy_sim(t1, t1, c).ok);
}

TEST_CASE("forward simulation from the lossy to the reliable database") {
  auto dbi = load_automaton("dbi.json");
  auto dbs = load_automaton("dbs.json");
  auto li = load_pairs("db_pairs.json", dbi);
  auto cand = load_candidate("db_candidate.json", dbi, dbs, &li);
  REQUIRE(check_forward_sim(dbi, dbs, cand).ok);
  // not functional: the empty state maps to two abstract states
  auto r = check_refinement(dbi, dbs, cand);
  REQUIRE_FALSE(r.ok);
  REQUIRE(r.clause == "functional");
}

TEST_CASE("the empty relation fails at the start clause") {
  auto dbs = load_automaton("dbs.json");
  auto dbi = load_automaton("dbi.json");
  SimCandidate empty;
  empty.g = Relation::from_rows(dbs.states.size(), dbi.states.size(), {});
  auto r = check_forward_sim(dbs, dbi, empty);
  REQUIRE_FALSE(r.ok);
  REQUIRE(r.clause == "start");
  REQUIRE_FALSE(check_backward_sim(dbs, dbi, empty).ok);
}

TEST_CASE("invariants must cover the reachable states") {
  auto t1 = load_automaton("t1.json");
  auto c = identity_candidate(t1);
  c.inv_a = states(t1, {"s0"});  // excludes reachable s1
  REQUIRE_THROWS_AS(check_forward_sim(t1, t1, c), ValidationError);
}

TEST_CASE("branching example: backward holds where forward fails") {
  auto a = load_automaton("bsim1_a.json");
  auto b = load_automaton("bsim1_b.json");
  auto la = load_pairs("bsim1_a_pairs.json", a);
  auto cand = load_candidate("bsim1_candidate.json", a, b, &la);

  auto fw = check_forward_sim(a, b, cand);
  REQUIRE_FALSE(fw.ok);
  REQUIRE(fw.clause == "step");
  // the early-choice state u4 cannot match the b-branch
  REQUIRE(fw.detail["abstract_state"] == "u4");

  REQUIRE(check_backward_sim(a, b, cand).ok);
}

TEST_CASE("silent step analysis") {
  auto dbi = load_automaton("dbi.json");
  auto dbs = load_automaton("dbs.json");
  auto li = load_pairs("db_pairs.json", dbi);
  auto cand = load_candidate("db_candidate.json", dbi, dbs, &li);
  auto ctx = make_context(dbi, dbs, cand, 0);
  auto s = analyze_silent_steps(dbi, dbs, cand.g, ctx);
  REQUIRE(s.always_silent.empty());  // dbi has no internal steps
  REQUIRE(s.sometimes_silent.empty());

  auto t1 = load_automaton("t1.json");
  auto idc = identity_candidate(t1);
  auto tctx = make_context(t1, t1, idc, 0);
  auto ts = analyze_silent_steps(t1, t1, idc.g, tctx);
  // the t loop matches both the empty fragment and itself
  REQUIRE(ts.sometimes_silent.size() == 1);
  REQUIRE(ts.always_silent.empty());
}

TEST_CASE("live forward simulation rejects the lossy database") {
  auto dbi = load_automaton("dbi.json");
  auto dbs = load_automaton("dbs.json");
  auto li = load_pairs("db_pairs.json", dbi);
  auto ms = load_pairs("db_pairs.json", dbs);
  auto cand = load_candidate("db_candidate.json", dbi, dbs, &li);

  auto r = check_live_forward_sim(dbi, li, dbs, ms, cand);
  REQUIRE_FALSE(r.ok);
  REQUIRE(r.clause == "step-pairs");
  // the skip step: every matching fragment passes through the obligated
  // requested state without discharging it
  REQUIRE(r.detail["step"] ==
          json({"({},{})", "request(q)", "({},{})"}));
}

TEST_CASE("live variants accept the reliable database against itself") {
  auto dbs = load_automaton("dbs.json");
  auto l = load_pairs("db_pairs.json", dbs);
  auto c = identity_candidate(dbs, l);
  REQUIRE(check_live_forward_sim(dbs, l, dbs, l, c).ok);
  REQUIRE(check_live_refinement(dbs, l, dbs, l, c).ok);
  REQUIRE(check_live_backward_sim(dbs, l, dbs, l, c).ok);
  REQUIRE(check_live_history_sim(dbs, l, dbs, l, c).ok);
  REQUIRE(check_live_prophecy_sim(dbs, l, dbs, l, c).ok);
}

TEST_CASE("branching example: live backward holds, live forward does not") {
  auto a = load_automaton("bsim1_a.json");
  auto b = load_automaton("bsim1_b.json");
  auto la = load_pairs("bsim1_a_pairs.json", a);
  auto mb = load_pairs("bsim1_b_pairs.json", b);
  auto cand = load_candidate("bsim1_candidate.json", a, b, &la);

  auto bw = check_live_backward_sim(a, la, b, mb, cand);
  REQUIRE(bw.ok);
  REQUIRE(bw.sometimes_silent.size() == 1);  // the t loop at s1

  REQUIRE_FALSE(check_live_forward_sim(a, la, b, mb, cand).ok);

  // prophecy needs the inverse to be functional, and u0, u1 share s0
  auto pr = check_prophecy_sim(a, b, cand);
  REQUIRE_FALSE(pr.ok);
  REQUIRE(pr.clause.rfind("inverse-", 0) == 0);
}

TEST_CASE("pair map resolution failures") {
  auto dbs = load_automaton("dbs.json");
  auto l = load_pairs("db_pairs.json", dbs);
  auto c = identity_candidate(dbs);  // no h entries

  auto r = check_live_forward_sim(dbs, l, dbs, l, c);
  REQUIRE_FALSE(r.ok);
  REQUIRE(r.clause == "pair-map");

  // an explicit target outside the semantic closure is rejected
  SimCandidate c2 = identity_candidate(dbs);
  ComplementedPair bogus{"bogus", states(dbs, {"({q},{q})"}), StateSet(3, 0)};
  c2.h.push_back({"answered", bogus, true});
  auto r2 = check_live_forward_sim(dbs, l, dbs, l, c2);
  REQUIRE_FALSE(r2.ok);
  REQUIRE(r2.clause == "pair-map-certificate");
}

TEST_CASE("always-silent steps must not carry a live cycle") {
  auto t1 = load_automaton("t1.json");
  // abstract side without the internal loop
  Automaton b;
  b.add_state("s0");
  b.add_state("s1");
  b.start = {0};
  b.add_action("a", ActionKind::external_);
  b.add_step(0, 0, 1);

  SimCandidate c;
  c.g = Relation::from_rows(2, 2, {{0, 0}, {1, 1}});
  auto r = check_live_forward_sim(t1, {}, b, {}, c);
  REQUIRE_FALSE(r.ok);
  REQUIRE(r.clause == "silent-cycle");
  REQUIRE(r.silent_cycle.has_value());
  REQUIRE(is_lasso(t1, *r.silent_cycle));

  // under an obligation that kills the loop, the silent clause is vacuous
  LivenessCondition l;
  l.pairs.push_back({"p", states(t1, {"s1"}), StateSet(2, 0)});
  SimCandidate c2 = c;
  c2.h.push_back({"p", l.pairs[0], false});
  LivenessCondition m;
  m.pairs.push_back({"p", StateSet(2, 0), StateSet(2, 0)});
  REQUIRE(check_live_forward_sim(t1, l, b, m, c2).ok);
}

TEST_CASE("forward correspondence on the reliable database") {
  auto dbs = load_automaton("dbs.json");
  auto l = load_pairs("db_pairs.json", dbs);
  auto c = identity_candidate(dbs, l);
  auto conc = lasso(dbs,
                    {"({},{})", "request(q)", "({q},{})", "response(q,v)",
                     "({q},{q})"},
                    {"({q},{q})", "request(q)", "({q},{q})"});
  REQUIRE(is_lasso(dbs, conc));
  REQUIRE(is_live(conc, l));
  auto r = build_correspondence_forward(dbs, l, dbs, l, c, conc);
  REQUIRE(r.ok);
  REQUIRE(is_lasso(dbs, r.abstract_lasso));
  REQUIRE(is_live(r.abstract_lasso, l));
  REQUIRE(trace_of(dbs, r.abstract_lasso) == trace_of(dbs, conc));
}

TEST_CASE("forward correspondence can stutter onto a collapsed abstraction") {
  auto cy3 = load_automaton("cy3.json");
  Automaton one;
  one.add_state("u");
  one.start = {0};
  one.add_action("t", ActionKind::internal_);
  one.add_step(0, 0, 0);

  SimCandidate c;
  c.g = Relation::from_rows(3, 1, {{0, 0}, {1, 0}, {2, 0}});
  auto conc = lasso(cy3, {"s0"}, {"s0", "t", "s1", "t", "s2", "t", "s0"});
  auto r = build_correspondence_forward(cy3, {}, one, {}, c, conc);
  REQUIRE(r.ok);
  // the whole 3-cycle maps onto revolutions of the self-loop
  REQUIRE(r.mapping.increment >= 1);
  REQUIRE(r.mapping.increment % r.abstract_lasso.cycle_len() == 0);
}

TEST_CASE("induced digraph structure on the branching example") {
  auto a = load_automaton("bsim1_a.json");
  auto b = load_automaton("bsim1_b.json");
  auto la = load_pairs("bsim1_a_pairs.json", a);
  auto mb = load_pairs("bsim1_b_pairs.json", b);
  auto cand = load_candidate("bsim1_candidate.json", a, b, &la);

  auto conc = lasso(a, {"s0", "a", "s1", "b", "s2"}, {"s2", "b", "s2"});
  REQUIRE(is_live(conc, la));
  auto d = build_induced_digraph(a, la, b, mb, cand, conc,
                                 conc.stem_len() + 2 * conc.cycle_len() + 1);
  REQUIRE(d.violations.empty());
  REQUIRE(d.nodes[0] == std::vector<int>{b.state_index("u0"),
                                         b.state_index("u1")});
  for (size_t i = 1; i < d.levels; ++i) REQUIRE_FALSE(d.edges[i].empty());
}

TEST_CASE("backward correspondence on the branching example") {
  auto a = load_automaton("bsim1_a.json");
  auto b = load_automaton("bsim1_b.json");
  auto la = load_pairs("bsim1_a_pairs.json", a);
  auto mb = load_pairs("bsim1_b_pairs.json", b);
  auto cand = load_candidate("bsim1_candidate.json", a, b, &la);

  for (auto conc : {lasso(a, {"s0", "a", "s1", "b", "s2"}, {"s2", "b", "s2"}),
                    lasso(a, {"s0", "a", "s1", "c", "s3"}, {"s3", "c", "s3"})}) {
    auto r = build_correspondence_backward(a, la, b, mb, cand, conc);
    REQUIRE(r.ok);
    REQUIRE(is_lasso(b, r.abstract_lasso));
    REQUIRE(is_live(r.abstract_lasso, mb));
  }

  // removing the green states from the abstract obligation starves the
  // must-visit clause and the builder reports it
  LivenessCondition mut = mb;
  mut.pairs[0].green = StateSet(b.states.size(), 0);
  auto bad = build_correspondence_backward(
      a, la, b, mut, cand, lasso(a, {"s0", "a", "s1", "b", "s2"}, {"s2", "b", "s2"}));
  REQUIRE_FALSE(bad.ok);
  REQUIRE_FALSE(bad.failure.empty());
}

TEST_CASE("backward correspondence without a stem") {
  auto dbs = load_automaton("dbs.json");
  auto l = load_pairs("db_pairs.json", dbs);
  auto c = identity_candidate(dbs, l);
  auto conc = lasso(dbs,
                    {"({},{})", "request(q)", "({q},{})", "response(q,v)",
                     "({q},{q})"},
                    {"({q},{q})", "request(q)", "({q},{q})"});
  auto r = build_correspondence_backward(dbs, l, dbs, l, c, conc);
  REQUIRE(r.ok);
  REQUIRE(trace_of(dbs, r.abstract_lasso) == trace_of(dbs, conc));
}

TEST_CASE("identity correspondences on random instances") {
  Rng rng(23);
  int built = 0;
  for (int it = 0; it < 60; ++it) {
    auto a = random_automaton(rng, 5);
    auto cond = random_condition(rng, a, 2);
    auto c = identity_candidate(a, cond);
    for (const auto& conc :
         enumerate_live_lassos(a, cond, a.states.size(),
                               a.states.size() * (cond.pairs.size() + 1), 3)) {
      auto fw = build_correspondence_forward(a, cond, a, cond, c, conc);
      REQUIRE(fw.ok);
      auto bw = build_correspondence_backward(a, cond, a, cond, c, conc);
      REQUIRE(bw.ok);
      ++built;
    }
  }
  REQUIRE(built > 40);
}
