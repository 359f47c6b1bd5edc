#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ccc {

// 1-based variable, numbered as in DIMACS.
struct Var {
  std::uint32_t index = 0;

  constexpr bool operator==(const Var&) const = default;
  constexpr auto operator<=>(const Var&) const = default;
};

// Literal code is 2*(index-1) for x and 2*(index-1)+1 for its negation, so
// negation flips the low bit and codes index watch/score arrays directly.
class Lit {
 public:
  constexpr Lit() = default;
  constexpr Lit(Var v, bool negative)
      : code_(2 * (v.index - 1) + (negative ? 1u : 0u)) {}

  static constexpr Lit from_code(std::uint32_t code) {
    Lit l;
    l.code_ = code;
    return l;
  }
  static Lit from_dimacs(int value);

  constexpr Var var() const { return Var{(code_ >> 1) + 1}; }
  constexpr bool negative() const { return code_ & 1u; }
  constexpr std::uint32_t code() const { return code_; }
  constexpr bool valid() const { return code_ != kUndefCode; }
  constexpr int to_dimacs() const {
    const int v = static_cast<int>(var().index);
    return negative() ? -v : v;
  }

  constexpr Lit operator~() const { return from_code(code_ ^ 1u); }
  constexpr bool operator==(const Lit&) const = default;
  constexpr auto operator<=>(const Lit&) const = default;

 private:
  static constexpr std::uint32_t kUndefCode = ~std::uint32_t{0};
  std::uint32_t code_ = kUndefCode;
};

std::ostream& operator<<(std::ostream& os, Lit l);

using Clause = std::vector<Lit>;
// Decision literals in the order they were made.
using Cube = std::vector<Lit>;

enum class LBool : std::uint8_t { False = 0, True = 1, Undef = 2 };

constexpr LBool operator^(LBool v, bool flip) {
  if (v == LBool::Undef || !flip) return v;
  return v == LBool::True ? LBool::False : LBool::True;
}

struct CnfFormula {
  std::uint32_t num_vars = 0;
  std::vector<Clause> clauses;

  bool operator==(const CnfFormula&) const = default;
};

// Partial map from variables to truth values. Looking up a literal applies
// its polarity, so value(~l) is always the complement of value(l).
class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(std::uint32_t num_vars)
      : values_(num_vars, LBool::Undef) {}

  std::uint32_t num_vars() const {
    return static_cast<std::uint32_t>(values_.size());
  }
  LBool value(Var v) const { return values_[v.index - 1]; }
  LBool value(Lit l) const { return value(l.var()) ^ l.negative(); }
  void assign(Lit l) {
    values_[l.var().index - 1] = l.negative() ? LBool::False : LBool::True;
  }
  void unassign(Var v) { values_[v.index - 1] = LBool::Undef; }
  bool is_total() const;
  std::size_t assigned_count() const;

  bool operator==(const Assignment&) const = default;

 private:
  std::vector<LBool> values_;
};

class ParseError : public std::runtime_error {
 public:
  enum class Kind {
    MalformedHeader,
    LiteralOutOfRange,
    UnterminatedClause,
    ClauseCountMismatch,
    InvalidToken,
  };

  ParseError(Kind kind, std::size_t line, std::size_t column,
             const std::string& what);

  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  Kind kind_;
  std::size_t line_;
  std::size_t column_;
};

const char* to_string(ParseError::Kind kind);

// Removes duplicate literals (first occurrence wins). Returns false if the
// clause contains a complementary pair and should be dropped.
bool canonicalize_clause(Clause& clause);

// Builds a formula from DIMACS-style integer clauses, canonicalizing each.
CnfFormula make_formula(std::uint32_t num_vars,
                        const std::vector<std::vector<int>>& clauses);
Cube make_cube(const std::vector<int>& lits);

CnfFormula parse_dimacs(std::string_view text);
CnfFormula parse_dimacs_file(const std::string& path);
std::string serialize_dimacs(const CnfFormula& formula);

struct ClauseStatus {
  enum class Kind { Satisfied, Falsified, Unit, Unresolved };
  Kind kind;
  Lit unit;  // valid only for Kind::Unit

  bool operator==(const ClauseStatus&) const = default;
};

ClauseStatus eval_clause(const Clause& clause, const Assignment& assignment);

// Complement of every literal, same order: the clause excluding the cube.
Clause negate_cube(const Cube& cube);

bool cube_satisfied(const Cube& cube, const Assignment& assignment);

class TooManyVariables : public std::invalid_argument {
 public:
  TooManyVariables(std::uint32_t num_vars, std::uint32_t limit);
};

inline constexpr std::uint32_t kMaxEnumerationVars = 24;

// Exhaustive check that every total assignment over num_vars satisfies at
// least one of the cubes.
bool dnf_is_tautology(const std::vector<Cube>& cubes, std::uint32_t num_vars);

std::string to_dimacs_string(const Cube& lits);

}  // namespace ccc
