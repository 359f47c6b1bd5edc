#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ccc/cdcl.hpp"
#include "ccc/formula.hpp"

namespace ccc::conquer {

// Formula plus cubes in emission order. num_vars is the largest variable
// used by a clause, which is what the file format can express.
struct IcnfDocument {
  CnfFormula formula;
  std::vector<Cube> cubes;

  bool operator==(const IcnfDocument&) const = default;
};

class MalformedIcnf : public std::runtime_error {
 public:
  MalformedIcnf(const std::string& what, std::size_t line, std::size_t column);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// "p inccnf", one clause per line, one "a <lits> 0" line per cube.
std::string write_icnf(const IcnfDocument& doc);
IcnfDocument parse_icnf(std::string_view text);
IcnfDocument read_icnf_file(const std::string& path);
void write_icnf_file(const IcnfDocument& doc, const std::string& path);

class EmptyCubeList : public std::invalid_argument {
 public:
  EmptyCubeList() : std::invalid_argument("conquer needs at least one cube") {}
};

struct CubeAttempt {
  std::size_t index = 0;  // 1-based position in the document
  std::size_t worker = 0;
  cdcl::SolveResult::Kind result = cdcl::SolveResult::Kind::BudgetExhausted;
  std::uint64_t conflicts = 0;
};

struct ConquerResult {
  enum class Kind { Sat, Unsat, Unknown };
  Kind kind = Kind::Unknown;
  Assignment model;
  std::size_t winning_cube_index = 0;  // 1-based, 0 when not SAT
  // Sorted by cube index. In the parallel pool, cubes claimed after the
  // winner was found are listed as BudgetExhausted.
  std::vector<CubeAttempt> attempts;
  std::vector<std::size_t> claims_per_worker;
};

const char* to_string(ConquerResult::Kind k);

// Solves F with each cube as assumptions on one incremental solver, in
// order, stopping at the first satisfiable cube.
ConquerResult conquer_serial(const IcnfDocument& doc, cdcl::SolverOptions options = {});

// k workers with private solvers claim cubes through one shared counter.
// The first SAT answer interrupts the others at their next conflict.
ConquerResult conquer_parallel(const IcnfDocument& doc, std::size_t k,
                               cdcl::SolverOptions options = {});

}  // namespace ccc::conquer
