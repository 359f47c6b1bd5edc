#include "ccc/verify.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace ccc::verify {

OracleVerdict brute_force_solve(const CnfFormula& f) {
  if (f.num_vars > kMaxEnumerationVars)
    throw TooManyVariables(f.num_vars, kMaxEnumerationVars);

  struct Masks {
    std::uint32_t pos = 0;
    std::uint32_t neg = 0;
  };
  std::vector<Masks> clauses;
  clauses.reserve(f.clauses.size());
  for (const Clause& c : f.clauses) {
    Masks m;
    for (Lit l : c) {
      const std::uint32_t bit = 1u << (l.var().index - 1);
      (l.negative() ? m.neg : m.pos) |= bit;
    }
    clauses.push_back(m);
  }

  OracleVerdict verdict;
  const std::uint64_t total = std::uint64_t{1} << f.num_vars;
  for (std::uint64_t a = 0; a < total; ++a) {
    ++verdict.assignments_enumerated;
    const auto bits = static_cast<std::uint32_t>(a);
    const bool ok = std::all_of(clauses.begin(), clauses.end(), [&](const Masks& m) {
      return ((bits & m.pos) | (~bits & m.neg)) != 0;
    });
    if (!ok) continue;
    verdict.satisfiable = true;
    verdict.model = Assignment(f.num_vars);
    for (std::uint32_t i = 0; i < f.num_vars; ++i)
      verdict.model.assign(Lit(Var{i + 1}, ((bits >> i) & 1u) == 0));
    break;
  }
  return verdict;
}

bool check_model(const CnfFormula& f, const Assignment& model) {
  if (model.num_vars() < f.num_vars)
    throw PartialModel("model covers fewer variables than the formula");
  for (std::uint32_t i = 1; i <= f.num_vars; ++i)
    if (model.value(Var{i}) == LBool::Undef)
      throw PartialModel("variable " + std::to_string(i) + " unassigned");
  return std::all_of(f.clauses.begin(), f.clauses.end(), [&](const Clause& c) {
    return std::any_of(c.begin(), c.end(),
                       [&](Lit l) { return model.value(l) == LBool::True; });
  });
}

namespace {

bool is_tree(std::vector<const Cube*> group, std::size_t depth) {
  if (group.empty()) return false;
  std::size_t ending = 0;
  for (const Cube* c : group) ending += c->size() == depth;
  if (ending > 0) return ending == 1 && group.size() == 1;

  std::map<Lit, std::vector<const Cube*>> children;
  for (const Cube* c : group) children[(*c)[depth]].push_back(c);
  if (children.size() != 2) return false;
  const Lit a = children.begin()->first;
  const Lit b = std::next(children.begin())->first;
  if (a != ~b) return false;
  // The split variable must be fresh on this path.
  const Cube& sample = *group.front();
  for (std::size_t i = 0; i < depth; ++i)
    if (sample[i].var() == a.var()) return false;
  return is_tree(std::move(children.begin()->second), depth + 1) &&
         is_tree(std::move(std::next(children.begin())->second), depth + 1);
}

}  // namespace

bool check_tree_cover(const std::vector<Cube>& emitted,
                      const std::vector<Cube>& refuted) {
  std::vector<const Cube*> all;
  all.reserve(emitted.size() + refuted.size());
  for (const Cube& c : emitted) all.push_back(&c);
  for (const Cube& c : refuted) all.push_back(&c);
  return is_tree(std::move(all), 0);
}

CnfFormula random_3sat(std::uint32_t num_vars, std::uint32_t num_clauses,
                       std::uint64_t seed) {
  if (num_vars < 3) throw std::invalid_argument("random_3sat needs >= 3 variables");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> pick_var(1, num_vars);
  std::bernoulli_distribution pick_sign(0.5);

  CnfFormula f;
  f.num_vars = num_vars;
  f.clauses.reserve(num_clauses);
  for (std::uint32_t i = 0; i < num_clauses; ++i) {
    Clause c;
    while (c.size() < 3) {
      const Var v{pick_var(rng)};
      if (std::any_of(c.begin(), c.end(), [&](Lit l) { return l.var() == v; }))
        continue;
      c.emplace_back(v, pick_sign(rng));
    }
    f.clauses.push_back(std::move(c));
  }
  return f;
}

}  // namespace ccc::verify
