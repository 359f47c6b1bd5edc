#pragma once

// The example decision tree of the concurrent protocol, made concrete.
//
// Tree (right branch first):  c1 -x2-> c2 -(-x3)-> c3 -x7-> c4
//                                                   c3 -(-x7)-> c5 -(-x4)-> c6
//                                                               c5 -x4-> c7
//                                      c2 -x3-> c8,  c1 -(-x2)-> c9
//
// Gadgets: x1,x5,x6 make x2 & -x3 unsatisfiable only after two levels of
// search, so the lookahead peer cannot see it but CDCL (which decides low
// indices first) does. x8,x9 refute c4 and x10,x11 refute c6 by failed
// literals. Every clause contains x3 positively, so c8 is satisfiable.

#include <optional>
#include <string>
#include <vector>

#include "ccc/formula.hpp"
#include "ccc/lookahead.hpp"
#include "ccc/protocol.hpp"

namespace replay {

inline ccc::CnfFormula formula() {
  std::vector<std::vector<int>> cls;
  for (int s = 0; s < 8; ++s)
    cls.push_back({-2, 3, (s & 1) ? -1 : 1, (s & 2) ? -5 : 5, (s & 4) ? -6 : 6});
  for (int s = 0; s < 4; ++s) cls.push_back({3, -7, (s & 1) ? -8 : 8, (s & 2) ? -9 : 9});
  for (int s = 0; s < 4; ++s)
    cls.push_back({3, 7, 4, (s & 1) ? -10 : 10, (s & 2) ? -11 : 11});
  return ccc::make_formula(11, cls);
}

// Right-branch literal of the nodes on the replayed path; other nodes use the
// lookahead heuristic.
inline std::optional<ccc::Lit> branch(const ccc::lookahead::CubeNode& node) {
  using ccc::Lit;
  switch (node.id.value) {
    case 1: return Lit::from_dimacs(2);
    case 2: return Lit::from_dimacs(-3);
    case 3: return Lit::from_dimacs(7);
    case 5: return Lit::from_dimacs(-4);
    default: return std::nullopt;
  }
}

// Lookahead reaches c6, CDCL catches up and refutes c3, then lookahead reads
// the refutation.
inline const char* kSchedule = "LA*11 CDCL*8 LA*3 rr";

inline ccc::protocol::CccConfig config(const std::string& schedule) {
  ccc::protocol::CccConfig cfg;
  cfg.mode = ccc::lookahead::Mode::CccInf;
  cfg.schedule = ccc::protocol::Schedule::parse(schedule);
  cfg.branch_override = branch;
  cfg.check_invariants = true;
  return cfg;
}

}  // namespace replay
