#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ccc/formula.hpp"

// Independent reference checks. Nothing in here shares code with the solving
// engines beyond the formula data types.
namespace ccc::verify {

struct OracleVerdict {
  bool satisfiable = false;
  Assignment model;  // lexicographically first model when satisfiable
  std::uint64_t assignments_enumerated = 0;
};

// Enumerates assignments as a binary counter with x1 as the low bit, so the
// all-false assignment comes first.
OracleVerdict brute_force_solve(const CnfFormula& f);

class PartialModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

bool check_model(const CnfFormula& f, const Assignment& model);

// True iff the cubes are exactly the leaves of one binary decision tree:
// every inner node splits on one variable into two complementary children.
bool check_tree_cover(const std::vector<Cube>& emitted,
                      const std::vector<Cube>& refuted);

CnfFormula random_3sat(std::uint32_t num_vars, std::uint32_t num_clauses,
                       std::uint64_t seed);

}  // namespace ccc::verify
