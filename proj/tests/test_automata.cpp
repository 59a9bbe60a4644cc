#include "helpers.hpp"

using namespace th;

TEST_CASE("validate accepts well-formed automata") {
  auto t1 = load_automaton("t1.json");
  REQUIRE_NOTHROW(validate(t1));
  REQUIRE(t1.states.size() == 2);
}

TEST_CASE("validate rejects an empty start set") {
  auto t1 = load_automaton("t1.json");
  t1.start.clear();
  REQUIRE_THROWS_WITH(validate(t1), Catch::Matchers::ContainsSubstring("start"));
}

TEST_CASE("validate rejects signature overlap") {
  json j = load_json_file(fix("t1.json"));
  j["internal"].push_back("a");
  REQUIRE_THROWS_AS(automaton_from_json(j), ValidationError);
}

TEST_CASE("malformed files raise schema errors") {
  json j = load_json_file(fix("t1.json"));
  j["steps"].push_back(json::array({"s0", "nope", "s1"}));
  REQUIRE_THROWS_AS(automaton_from_json(j), SchemaError);
  json k = load_json_file(fix("t1.json"));
  k.erase("states");
  REQUIRE_THROWS_AS(automaton_from_json(k), SchemaError);
}

TEST_CASE("automaton json round-trips") {
  auto dbs = load_automaton("dbs.json");
  auto again = automaton_from_json(automaton_to_json(dbs));
  REQUIRE(again.states == dbs.states);
  REQUIRE(again.steps.size() == dbs.steps.size());
}

TEST_CASE("reachable_states is the breadth-first closure") {
  auto t1 = load_automaton("t1.json");
  REQUIRE(reachable_states(t1) == std::vector<int>{0, 1});

  auto dbs = load_automaton("dbs.json");
  REQUIRE(reachable_states(dbs).size() == 3);

  // an unreachable state is excluded
  auto t1x = t1;
  t1x.add_state("s9");
  t1x.reindex();
  auto r = reachable_states(t1x);
  REQUIRE(std::find(r.begin(), r.end(), t1x.state_index("s9")) == r.end());
}

TEST_CASE("is_execution checks steps and the start anchor") {
  auto t1 = load_automaton("t1.json");
  REQUIRE(is_execution(t1, exec(t1, {"s0", "a", "s1"})));
  REQUIRE_FALSE(is_execution(t1, exec(t1, {"s1", "t", "s1"})));
  REQUIRE(is_execution(t1, exec(t1, {"s1", "t", "s1"}), false));
  REQUIRE_FALSE(is_execution(t1, exec(t1, {"s0", "t", "s1"})));
}

TEST_CASE("trace projection drops internal actions") {
  auto t1 = load_automaton("t1.json");
  auto e = exec(t1, {"s0", "a", "s1", "t", "s1"});
  REQUIRE(trace_of(t1, e) == std::vector<std::string>{"a"});

  auto l = lasso(t1, {"s0", "a", "s1"}, {"s1", "t", "s1"});
  Trace tr = trace_of(t1, l);
  REQUIRE(tr.finite());
  REQUIRE(tr.prefix == std::vector<std::string>{"a"});
}

TEST_CASE("canonical trace: shortest period at its minimal rotation") {
  // oracle: compare all rotations explicitly
  auto t = canonical_trace({}, {"b", "c", "b", "c"});
  REQUIRE(t.period == std::vector<std::string>{"b", "c"});
  REQUIRE(t.prefix.empty());

  auto u = canonical_trace({}, {"c", "b"});
  REQUIRE(u.period == std::vector<std::string>{"b", "c"});
  REQUIRE(u.prefix == std::vector<std::string>{"c"});

  // prefix copies of the period are absorbed
  auto v = canonical_trace({"x", "b", "c"}, {"b", "c"});
  REQUIRE(v.prefix == std::vector<std::string>{"x"});
  REQUIRE(v.period == std::vector<std::string>{"b", "c"});

  // two representations of the same word canonicalize identically
  auto w1 = canonical_trace({"a"}, {"b", "a"});
  auto w2 = canonical_trace({"a", "b"}, {"a", "b"});
  REQUIRE(w1 == w2);
}

TEST_CASE("canonical trace equality matches unrolled-word equality (random)") {
  Rng rng(11);
  std::vector<std::string> sigma{"a", "b", "c"};
  auto unroll = [](const Trace& t, size_t n) {
    std::string s;
    for (size_t i = 0; i < n; ++i) {
      const auto& w =
          i < t.prefix.size()
              ? t.prefix[i]
              : t.period[(i - t.prefix.size()) % t.period.size()];
      s += w + "|";
    }
    return s;
  };
  for (int it = 0; it < 500; ++it) {
    std::vector<std::string> pre, per;
    size_t np = rng.below(4), nc = 1 + rng.below(3);
    for (size_t i = 0; i < np; ++i) pre.push_back(sigma[rng.below(3)]);
    for (size_t i = 0; i < nc; ++i) per.push_back(sigma[rng.below(3)]);
    auto c = canonical_trace(pre, per);
    REQUIRE_FALSE(c.period.empty());
    REQUIRE(unroll(c, 24) == unroll(Trace{pre, per}, 24));
    // canonicalization is idempotent
    auto c2 = canonical_trace(c.prefix, c.period);
    REQUIRE(c == c2);
  }
}

TEST_CASE("lasso unrolling agrees with position accessors") {
  auto cy3 = load_automaton("cy3.json");
  auto l = lasso(cy3, {"s0"}, {"s0", "t", "s1", "t", "s2", "t", "s0"});
  REQUIRE(is_lasso(cy3, l));
  auto e = l.unroll(7);
  REQUIRE(is_execution(cy3, e));
  for (size_t i = 0; i <= 7; ++i) REQUIRE(e.states[i] == l.state_at(i));
  REQUIRE(l.cycle_states() == std::set<int>{0, 1, 2});
}

TEST_CASE("identity index mapping relates a lasso to itself") {
  auto t1 = load_automaton("t1.json");
  auto l = lasso(t1, {"s0", "a", "s1"}, {"s1", "t", "s1"});
  IndexMapping m;
  m.table = {0, 1, 2};
  m.periodic_from = 1;
  m.cycle_repeat = 1;
  m.increment = 1;
  StateRel eq = [](int s, int u) { return s == u; };
  auto r = check_index_mapping(t1, l, t1, l, eq, m);
  REQUIRE(r.ok);
}

TEST_CASE("index mapping clause failures are localized") {
  auto t1 = load_automaton("t1.json");
  auto l = lasso(t1, {"s0", "a", "s1"}, {"s1", "t", "s1"});
  StateRel eq = [](int s, int u) { return s == u; };

  IndexMapping bad;
  bad.table = {1, 1, 2};  // m(0) != 0
  bad.periodic_from = 1;
  bad.cycle_repeat = 1;
  bad.increment = 1;
  REQUIRE_FALSE(check_index_mapping(t1, l, t1, l, eq, bad).ok);

  IndexMapping stuck;  // zero increment: cofinality fails
  stuck.table = {0, 1, 1};
  stuck.periodic_from = 1;
  stuck.cycle_repeat = 1;
  stuck.increment = 0;
  auto r = check_index_mapping(t1, l, t1, l, eq, stuck);
  REQUIRE_FALSE(r.ok);
  REQUIRE_THAT(r.failure, Catch::Matchers::ContainsSubstring("cofinality"));
}

TEST_CASE("find_index_mapping recovers a mapping and re-validates") {
  auto t1 = load_automaton("t1.json");
  auto cy3 = load_automaton("cy3.json");
  StateRel eq = [](int s, int u) { return s == u; };

  auto l1 = lasso(t1, {"s0", "a", "s1"}, {"s1", "t", "s1"});
  auto m = find_index_mapping(t1, l1, t1, l1, eq);
  REQUIRE(m);
  REQUIRE(check_index_mapping(t1, l1, t1, l1, eq, *m).ok);

  // stuttering: concrete cycle unrolled twice against the single cycle
  auto l2 = l1.with_cycle_repeated(2);
  auto m2 = find_index_mapping(t1, l2, t1, l1, eq);
  REQUIRE(m2);
  REQUIRE(check_index_mapping(t1, l2, t1, l1, eq, *m2).ok);

  // no mapping between automata with different traces
  StateRel any = [](int, int) { return true; };
  auto lc = lasso(cy3, {"s0"}, {"s0", "t", "s1", "t", "s2", "t", "s0"});
  auto none = find_index_mapping(t1, l1, cy3, lc, any, 8, 20000);
  REQUIRE_FALSE(none);  // cy3 has no external 'a' to match
}

TEST_CASE("mappings found between random related lassos always re-validate") {
  Rng rng(23);
  int found = 0;
  for (int it = 0; it < 60; ++it) {
    auto a = random_automaton(rng, 5);
    auto ls = enumerate_live_lassos(a, {}, 3, 4, 4);
    if (ls.size() < 2) continue;
    StateRel any = [](int, int) { return true; };
    for (size_t i = 0; i < ls.size(); ++i)
      for (size_t j = 0; j < ls.size(); ++j) {
        auto m = find_index_mapping(a, ls[i], a, ls[j], any, 8, 30000);
        if (m) {
          ++found;
          REQUIRE(check_index_mapping(a, ls[i], a, ls[j], any, *m).ok);
        }
      }
  }
  REQUIRE(found > 20);  // the sweep actually exercised the checker
}
