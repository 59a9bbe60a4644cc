#pragma once

// Finite lattices of complemented pairs used to justify derived pairs:
// a strict partial order with unique top and bottom where every non-top
// element's green set is covered by the reds of its immediate successors.
// Certification additionally shows every element lies in the semantic
// closure and that <bottom.red, top.green> follows by chaining.

#include <fstream>

#include "liveref/streett.hpp"

namespace liveref {

struct PairLattice {
  std::vector<ComplementedPair> pairs;
  std::vector<std::pair<int, int>> order;  // (below, above), need not be closed
  int top = -1, bottom = -1;

  int index_of(const std::string& id) const {
    for (int i = 0; i < int(pairs.size()); ++i)
      if (pairs[i].id == id) return i;
    return -1;
  }

  // reflexive-transitive closure as a matrix
  std::vector<std::vector<char>> leq() const {
    size_t n = pairs.size();
    std::vector<std::vector<char>> m(n, std::vector<char>(n, 0));
    for (size_t i = 0; i < n; ++i) m[i][i] = 1;
    for (auto [lo, hi] : order) m[lo][hi] = 1;
    for (size_t k = 0; k < n; ++k)
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
          m[i][j] = m[i][j] || (m[i][k] && m[k][j]);
    return m;
  }
};

// immediate successors of r: minimal elements strictly above it
inline std::vector<int> lattice_succ(const PairLattice& lat, int r) {
  auto m = lat.leq();
  size_t n = lat.pairs.size();
  std::vector<int> out;
  for (size_t w = 0; w < n; ++w) {
    if (int(w) == r || !m[r][w]) continue;
    bool immediate = true;
    for (size_t v = 0; v < n; ++v)
      if (int(v) != r && int(v) != int(w) && m[r][v] && m[v][w]) immediate = false;
    if (immediate) out.push_back(int(w));
  }
  return out;
}

struct LatticeReport {
  bool ok = true;
  std::vector<std::string> violations;
};

// Structural clauses over explicit state sets.
inline LatticeReport check_lattice_structure(const Automaton& a,
                                             const PairLattice& lat) {
  LatticeReport r;
  auto bad = [&](const std::string& v) {
    r.ok = false;
    r.violations.push_back(v);
  };
  size_t n = lat.pairs.size();
  if (n == 0) {
    bad("lattice has no elements");
    return r;
  }
  auto m = lat.leq();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      if (i != j && m[i][j] && m[j][i])
        bad("order has a cycle through '" + lat.pairs[i].id + "'");
  if (lat.top < 0 || lat.bottom < 0) {
    bad("top/bottom not designated");
    return r;
  }
  for (size_t i = 0; i < n; ++i) {
    if (!m[i][lat.top]) bad("'" + lat.pairs[i].id + "' not below top");
    if (!m[lat.bottom][i]) bad("'" + lat.pairs[i].id + "' not above bottom");
  }
  for (size_t i = 0; i < n; ++i) {
    if (int(i) == lat.top) continue;
    StateSet cover(a.states.size(), 0);
    for (int w : lattice_succ(lat, int(i)))
      for (size_t s = 0; s < a.states.size(); ++s)
        cover[s] = cover[s] || lat.pairs[w].red[s];
    for (size_t s = 0; s < a.states.size(); ++s)
      if (lat.pairs[i].green[s] && !cover[s])
        bad("green of '" + lat.pairs[i].id + "' not covered at state '" +
            a.states[s] + "'");
  }
  return r;
}

struct LatticeCertificate {
  bool ok = true;
  std::vector<std::string> violations;
  ComplementedPair derived;  // <bottom.red, top.green>
};

// Structure + closure membership of every element + the chained pair.
inline LatticeCertificate certify_lattice(const Automaton& a,
                                          const LivenessCondition& l,
                                          const PairLattice& lat) {
  LatticeCertificate c;
  auto s = check_lattice_structure(a, lat);
  if (!s.ok) {
    c.ok = false;
    c.violations = s.violations;
    return c;
  }
  for (const auto& p : lat.pairs) {
    auto cm = closure_member(a, l, p);
    if (!cm.member) {
      c.ok = false;
      c.violations.push_back("'" + p.id + "' is not in the semantic closure");
    }
  }
  c.derived = {"derived", lat.pairs[lat.bottom].red, lat.pairs[lat.top].green};
  auto cm = closure_member(a, l, c.derived);
  if (!cm.member) {
    c.ok = false;
    c.violations.push_back("chained pair <bottom.red, top.green> fails");
  }
  return c;
}

// --- predicate lattices over sampled states -----------------------------------
// For systems too large to enumerate, pairs are predicates and only the
// cover clause is checked pointwise on sampled states.

struct PredPair {
  std::string id;
  std::function<bool(const json&)> red, green;
};

struct PredLattice {
  std::vector<PredPair> pairs;
  std::vector<std::pair<int, int>> order;
  int top = -1, bottom = -1;
};

inline std::vector<int> lattice_succ(const PredLattice& lat, int r) {
  PairLattice shim;
  shim.pairs.resize(lat.pairs.size());
  for (size_t i = 0; i < lat.pairs.size(); ++i) shim.pairs[i].id = lat.pairs[i].id;
  shim.order = lat.order;
  shim.top = lat.top;
  shim.bottom = lat.bottom;
  return lattice_succ(shim, r);
}

struct SampledLatticeReport {
  bool ok = true;
  size_t samples = 0;
  std::vector<std::string> violations;  // "pair @ sample index"
};

inline SampledLatticeReport check_lattice_sampled(
    const PredLattice& lat, const std::vector<json>& samples) {
  SampledLatticeReport r;
  std::vector<std::vector<int>> succs(lat.pairs.size());
  for (size_t i = 0; i < lat.pairs.size(); ++i)
    if (int(i) != lat.top) succs[i] = lattice_succ(lat, int(i));
  for (const json& st : samples) {
    for (size_t i = 0; i < lat.pairs.size(); ++i) {
      if (int(i) == lat.top) continue;
      if (!lat.pairs[i].green(st)) continue;
      bool covered = false;
      for (int w : succs[i]) covered = covered || lat.pairs[w].red(st);
      if (!covered) {
        r.ok = false;
        r.violations.push_back("green of '" + lat.pairs[i].id +
                               "' uncovered at sample " +
                               std::to_string(r.samples));
      }
    }
    ++r.samples;
  }
  return r;
}

// --- lattice file format -------------------------------------------------------
// {"pairs":[{"id","red","green"}...], "order":[[lo,hi]...], "top":id,
//  "bottom":id, "includes":[{"at":id, "file":path}...]}
// An include splices the sub-lattice in place of element `at`: predecessors
// attach to its bottom, its top attaches to the successors.

inline PairLattice lattice_from_json(const json& j, const Automaton& a,
                                     const std::string& dir = "",
                                     int depth = 0);

inline PairLattice load_lattice_file(const std::string& path, const Automaton& a,
                                     int depth = 0) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open lattice file: " + path);
  json j = json::parse(in, nullptr, true, true);
  auto dir = path.find('/') != std::string::npos
                 ? path.substr(0, path.rfind('/') + 1)
                 : std::string();
  return lattice_from_json(j, a, dir, depth);
}

inline PairLattice lattice_from_json(const json& j, const Automaton& a,
                                     const std::string& dir, int depth) {
  if (depth > 8) throw SchemaError("lattice includes nested too deeply");
  PairLattice lat;
  try {
    for (const auto& row : j.at("pairs")) {
      ComplementedPair p;
      p.id = row.at("id").get<std::string>();
      auto side = [&](const json& v) {
        StateSet m(a.states.size(), 0);
        for (const auto& s : v) {
          int i = a.state_index(s.get<std::string>());
          if (i < 0)
            throw SchemaError("lattice references unknown state: " + s.dump());
          m[i] = 1;
        }
        return m;
      };
      p.red = side(row.at("red"));
      p.green = side(row.at("green"));
      lat.pairs.push_back(std::move(p));
    }
    for (const auto& e : j.at("order")) {
      int lo = lat.index_of(e[0].get<std::string>());
      int hi = lat.index_of(e[1].get<std::string>());
      if (lo < 0 || hi < 0)
        throw SchemaError("order references unknown pair: " + e.dump());
      lat.order.push_back({lo, hi});
    }
    lat.top = lat.index_of(j.at("top").get<std::string>());
    lat.bottom = lat.index_of(j.at("bottom").get<std::string>());
    if (lat.top < 0 || lat.bottom < 0)
      throw SchemaError("top/bottom reference unknown pairs");
    if (j.contains("includes")) {
      for (const auto& inc : j["includes"]) {
        int at = lat.index_of(inc.at("at").get<std::string>());
        if (at < 0) throw SchemaError("include splices at unknown pair");
        PairLattice sub = load_lattice_file(
            dir + inc.at("file").get<std::string>(), a, depth + 1);
        int base = int(lat.pairs.size());
        for (auto& p : sub.pairs) {
          p.id = lat.pairs[at].id + "." + p.id;
          lat.pairs.push_back(p);
        }
        for (auto [lo, hi] : sub.order) lat.order.push_back({base + lo, base + hi});
        std::vector<std::pair<int, int>> rewired;
        for (auto [lo, hi] : lat.order) {
          if (hi == at) hi = base + sub.bottom;
          if (lo == at) lo = base + sub.top;
          rewired.push_back({lo, hi});
        }
        lat.order = rewired;
        // the spliced element is replaced: drop it by collapsing onto the
        // sub-bottom..sub-top chain (keep entry but bridge it through)
        lat.order.push_back({base + sub.bottom, base + sub.top});
        if (lat.top == at) lat.top = base + sub.top;
        if (lat.bottom == at) lat.bottom = base + sub.bottom;
        // remove the placeholder pair
        lat.pairs.erase(lat.pairs.begin() + at);
        auto fix = [&](int& x) {
          if (x > at) --x;
        };
        for (auto& [lo, hi] : lat.order) {
          fix(lo);
          fix(hi);
        }
        fix(lat.top);
        fix(lat.bottom);
        lat.order.erase(std::remove_if(lat.order.begin(), lat.order.end(),
                                       [&](auto& e2) {
                                         return e2.first == e2.second;
                                       }),
                        lat.order.end());
      }
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("lattice file schema violation: ") + e.what());
  }
  return lat;
}

}  // namespace liveref
