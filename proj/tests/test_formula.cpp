#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "ccc/formula.hpp"
#include "ccc/verify.hpp"

using namespace ccc;

namespace {

Assignment assign(std::uint32_t n, const std::vector<int>& lits) {
  Assignment a(n);
  for (int l : lits) a.assign(Lit::from_dimacs(l));
  return a;
}

ParseError::Kind parse_error_kind(std::string_view text) {
  try {
    parse_dimacs(text);
  } catch (const ParseError& e) {
    return e.kind();
  }
  FAIL("no parse error");
  return ParseError::Kind::InvalidToken;
}

}  // namespace

TEST_CASE("literal encoding") {
  const Lit x3 = Lit::from_dimacs(3);
  CHECK(x3.var().index == 3);
  CHECK_FALSE(x3.negative());
  CHECK(x3.code() == 4);
  CHECK((~x3).code() == 5);
  CHECK((~x3).to_dimacs() == -3);
  CHECK(~~x3 == x3);
  CHECK_FALSE(Lit().valid());
  CHECK_THROWS_AS(Lit::from_dimacs(0), std::invalid_argument);
}

TEST_CASE("parse_dimacs") {
  SUBCASE("single clause") {
    const CnfFormula f = parse_dimacs("p cnf 2 1\n1 -2 0");
    CHECK(f.num_vars == 2);
    REQUIRE(f.clauses.size() == 1);
    CHECK(f.clauses[0] == make_cube({1, -2}));
  }
  SUBCASE("empty clause") {
    const CnfFormula f = parse_dimacs("p cnf 1 1\n0");
    REQUIRE(f.clauses.size() == 1);
    CHECK(f.clauses[0].empty());
    CHECK_FALSE(verify::brute_force_solve(f).satisfiable);
  }
  SUBCASE("comments and clauses across lines") {
    const CnfFormula f = parse_dimacs("c hello\np cnf 3 2\n1 2\n 3 0 -1\n0\n");
    REQUIRE(f.clauses.size() == 2);
    CHECK(f.clauses[0] == make_cube({1, 2, 3}));
    CHECK(f.clauses[1] == make_cube({-1}));
  }
  SUBCASE("duplicates merged, tautologies dropped") {
    const CnfFormula f = parse_dimacs("p cnf 2 2\n1 1 -2 0\n2 -2 0\n");
    REQUIRE(f.clauses.size() == 1);
    CHECK(f.clauses[0] == make_cube({1, -2}));
  }
  SUBCASE("errors") {
    CHECK(parse_error_kind("p cnf 1 1\n3 0") == ParseError::Kind::LiteralOutOfRange);
    CHECK(parse_error_kind("p cnf 1 1\n-3 0") == ParseError::Kind::LiteralOutOfRange);
    CHECK(parse_error_kind("p cnf 2 1\n1 2") == ParseError::Kind::UnterminatedClause);
    CHECK(parse_error_kind("1 2 0") == ParseError::Kind::MalformedHeader);
    CHECK(parse_error_kind("p dnf 2 1\n1 0") == ParseError::Kind::MalformedHeader);
    CHECK(parse_error_kind("p cnf 2 2\n1 0") == ParseError::Kind::ClauseCountMismatch);
    CHECK(parse_error_kind("p cnf 2 1\n1 x 0") == ParseError::Kind::InvalidToken);
  }
  SUBCASE("error position") {
    try {
      parse_dimacs("p cnf 1 1\n\n  3 0");
      FAIL("expected error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(e.column() == 3);
    }
  }
}

TEST_CASE("serialize_dimacs round trip") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const CnfFormula f = verify::random_3sat(12, 40, seed);
    CHECK(parse_dimacs(serialize_dimacs(f)) == f);
  }
  CHECK(serialize_dimacs(make_formula(2, {{1, -2}})) == "p cnf 2 1\n1 -2 0\n");
}

TEST_CASE("eval_clause") {
  const Clause c = make_cube({1, -2});
  using K = ClauseStatus::Kind;
  CHECK(eval_clause(c, assign(2, {-1, 2})).kind == K::Falsified);
  const ClauseStatus unit = eval_clause(c, assign(2, {2}));
  CHECK(unit.kind == K::Unit);
  CHECK(unit.unit == Lit::from_dimacs(1));
  CHECK(eval_clause({}, Assignment(2)).kind == K::Falsified);
  CHECK(eval_clause(c, assign(2, {1})).kind == K::Satisfied);
  CHECK(eval_clause(c, Assignment(2)).kind == K::Unresolved);
}

TEST_CASE("negate_cube") {
  CHECK(negate_cube(make_cube({1, -2})) == make_cube({-1, 2}));
  CHECK(negate_cube({}).empty());
  CHECK(negate_cube(make_cube({-3})) == make_cube({3}));
}

TEST_CASE("cube_satisfied") {
  CHECK(cube_satisfied(make_cube({1, -2}), assign(2, {1, -2})));
  CHECK_FALSE(cube_satisfied(make_cube({1, -2}), assign(2, {1})));
  CHECK(cube_satisfied({}, Assignment(2)));
}

TEST_CASE("dnf_is_tautology") {
  CHECK(dnf_is_tautology({make_cube({1}), make_cube({-1})}, 1));
  CHECK_FALSE(dnf_is_tautology({make_cube({1})}, 1));
  CHECK(dnf_is_tautology({make_cube({1, 2}), make_cube({1, -2}), make_cube({-1})}, 2));
  CHECK(dnf_is_tautology({Cube{}}, 3));
  CHECK_FALSE(dnf_is_tautology({}, 3));
  CHECK_THROWS_AS(dnf_is_tautology({}, 25), TooManyVariables);
}

TEST_CASE("dnf_is_tautology agrees with refuting the negated cubes") {
  // A DNF is a tautology iff the CNF of its negated cubes is unsatisfiable.
  std::mt19937_64 rng(7);
  for (int round = 0; round < 200; ++round) {
    const std::uint32_t n = 1 + rng() % 6;
    std::vector<Cube> cubes(rng() % 8);
    for (Cube& c : cubes) {
      const std::uint32_t len = rng() % (n + 1);
      std::vector<int> lits;
      for (std::uint32_t i = 0; i < len; ++i) {
        const int v = static_cast<int>(1 + rng() % n);
        lits.push_back(rng() % 2 ? v : -v);
      }
      c = make_cube(lits);
    }
    CnfFormula negated{n, {}};
    for (const Cube& c : cubes) negated.clauses.push_back(negate_cube(c));
    CHECK(dnf_is_tautology(cubes, n) == !verify::brute_force_solve(negated).satisfiable);
  }
}
