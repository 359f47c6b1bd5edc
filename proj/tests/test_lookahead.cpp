#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>

#include "ccc/lookahead.hpp"
#include "ccc/verify.hpp"
#include "replay_tree.hpp"

using namespace ccc;
using namespace ccc::lookahead;

namespace {

Lit L(int v) { return Lit::from_dimacs(v); }

// Naive fixpoint unit propagation; nullopt on conflict.
std::optional<Assignment> closure(const CnfFormula& f, Assignment a) {
  for (bool changed = true; changed;) {
    changed = false;
    for (const Clause& c : f.clauses) {
      const ClauseStatus s = eval_clause(c, a);
      if (s.kind == ClauseStatus::Kind::Falsified) return std::nullopt;
      if (s.kind == ClauseStatus::Kind::Unit) {
        a.assign(s.unit);
        changed = true;
      }
    }
  }
  return a;
}

// Literals newly implied by assuming l on top of base, excluding l.
std::optional<std::size_t> naive_score(const CnfFormula& f, const Assignment& base, Lit l) {
  Assignment a = base;
  a.assign(l);
  const auto c = closure(f, a);
  if (!c) return std::nullopt;
  return c->assigned_count() - base.assigned_count() - 1;
}

LaStatus run_to_end(LookaheadPeer& la) { return la.run(); }

std::vector<std::string> lines_with(const std::vector<std::string>& lines, const std::string& part) {
  std::vector<std::string> out;
  for (const auto& l : lines)
    if (l.find(part) != std::string::npos) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("simplify_and_learn") {
  SUBCASE("unit propagation") {
    const auto r = simplify_and_learn(make_formula(2, {{-1, 2}}), Cube{L(1)}, {});
    CHECK_FALSE(r.conflict);
    CHECK(r.phi_imp == std::vector<Lit>{L(2)});
  }
  SUBCASE("failed literal") {
    const auto r = simplify_and_learn(make_formula(2, {{1, 2}, {1, -2}}), {}, {});
    CHECK_FALSE(r.conflict);
    CHECK(r.phi_imp == std::vector<Lit>{L(1)});
  }
  SUBCASE("conflict") {
    CHECK(simplify_and_learn(make_formula(1, {{1}, {-1}}), {}, {}).conflict);
    CHECK(simplify_and_learn(make_formula(2, {{-1, 2}, {-1, -2}}), Cube{L(1)}, {}).conflict);
  }
  SUBCASE("fixpoint: failed literals enable further failed literals") {
    // -x1 fails, then x1 makes -x3 fail.
    const CnfFormula f = make_formula(4, {{1, 2}, {1, -2}, {-1, 3, 4}, {-1, 3, -4}});
    const auto r = simplify_and_learn(f, {}, {});
    REQUIRE_FALSE(r.conflict);
    const std::set<Lit> imp(r.phi_imp.begin(), r.phi_imp.end());
    CHECK(imp.count(L(1)) == 1);
    CHECK(imp.count(L(3)) == 1);
  }
}

TEST_CASE("decide") {
  SUBCASE("implication chain instance") {
    std::vector<std::vector<int>> cls;
    for (int v = 6; v <= 11; ++v) cls.push_back({-5, v});
    for (int v = 12; v <= 15; ++v) cls.push_back({5, v});
    const CnfFormula f = make_formula(15, cls);
    const auto b = decide(f, {}, {});
    REQUIRE(b);
    CHECK(b->var == Var{5});
    CHECK(b->right == L(5));
    CHECK(b->left == L(-5));
    CHECK(b->right_score == 6);
    CHECK(b->left_score == 4);
  }
  SUBCASE("ties go to the lowest index, positive literal on the right") {
    const auto b = decide(make_formula(4, {{1, 2}, {3, 4}}), {}, {});
    REQUIRE(b);
    CHECK(b->var == Var{1});
    CHECK(b->right == L(-1));
    const auto t = decide(make_formula(4, {{1, 2, 3, 4}}), {}, {});
    REQUIRE(t);
    CHECK(t->var == Var{1});
    CHECK(t->right == L(1));
  }
  SUBCASE("one unassigned variable") {
    const auto b = decide(make_formula(3, {{1}, {-1, 2}, {3, -2, 1}, {3, -3}}), {}, {});
    REQUIRE(b);
    CHECK(b->var == Var{3});
  }
  SUBCASE("scores and choice match a naive propagator") {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
      const CnfFormula f = verify::random_3sat(10, 25 + seed % 10, seed);
      Engine e(f);
      if (!e.probe_and_learn()) continue;
      Assignment base(f.num_vars);
      for (Lit l : e.propagator().trail()) base.assign(l);
      std::optional<Var> best;
      std::uint64_t best_value = 0;
      for (Var v : e.candidates()) {
        const auto sp = naive_score(f, base, Lit(v, false));
        const auto sn = naive_score(f, base, Lit(v, true));
        REQUIRE(sp);
        REQUIRE(sn);
        CHECK(e.score(Lit(v, false)) == *sp);
        CHECK(e.score(Lit(v, true)) == *sn);
        const std::uint64_t value = *sp * *sn + *sp + *sn;
        if (!best || value > best_value) {
          best = v;
          best_value = value;
        }
      }
      const auto b = e.choose();
      REQUIRE(b.has_value() == best.has_value());
      if (b) CHECK(b->var == *best);
    }
  }
}

TEST_CASE("maybe_cutoff") {
  CHECK(maybe_cutoff(1500, 1000, Mode::CcCutoff) == CutoffDecision::EmitCube);
  CHECK(maybe_cutoff(1500, 1000, Mode::CccCutoff) == CutoffDecision::EmitCube);
  CHECK(maybe_cutoff(500, 1000, Mode::CcCutoff) == CutoffDecision::Continue);
  CHECK(maybe_cutoff(1e12, 1000, Mode::CccInf) == CutoffDecision::Continue);
  CHECK(maybe_cutoff(1e12, 1000, Mode::Pure) == CutoffDecision::Continue);
}

TEST_CASE("pure lookahead") {
  SUBCASE("one variable") {
    LookaheadPeer la(make_formula(1, {{1}}), {});
    CHECK(run_to_end(la) == LaStatus::Sat);
    CHECK(la.stats().max_depth <= 1);
    CHECK(la.model().value(Var{1}) == LBool::True);
  }
  SUBCASE("empty clause") {
    LookaheadPeer la(make_formula(1, {{}}), {});
    CHECK(run_to_end(la) == LaStatus::Unsat);
  }
  SUBCASE("oracle agreement and tree cover") {
    for (std::uint64_t seed = 1; seed <= 150; ++seed) {
      const std::uint32_t n = 6 + seed % 11;
      const CnfFormula f = verify::random_3sat(n, static_cast<std::uint32_t>(n * 4.26), seed);
      LookaheadPeer la(f, {});
      const LaStatus st = run_to_end(la);
      const bool sat = verify::brute_force_solve(f).satisfiable;
      CHECK(st == (sat ? LaStatus::Sat : LaStatus::Unsat));
      if (sat) CHECK(verify::check_model(f, la.model()));
      else {
        const auto& out = la.output();
        CHECK(out.count(Refuter::Lookahead) == out.leaves.size());
        CHECK(verify::check_tree_cover({}, out.refuted()));
        CHECK(dnf_is_tautology(out.refuted(), n));
      }
    }
  }
  SUBCASE("left branch first, no discrepancy on it") {
    std::vector<std::vector<int>> cls;
    for (int v = 6; v <= 11; ++v) cls.push_back({-5, v});
    for (int v = 12; v <= 15; ++v) cls.push_back({5, v});
    cls.push_back({-5, -12, 1});
    LookaheadPeer la(make_formula(15, cls), {});
    la.step();
    la.step();
    la.step();
    REQUIRE(la.nodes().size() == 2);
    CHECK(la.nodes()[1].lit == L(-5));
    CHECK(la.nodes()[1].discrepancies == 0);
  }
}

TEST_CASE("cube emission covers the search space") {
  for (Mode mode : {Mode::CcCutoff, Mode::CccCutoff}) {
    for (std::uint64_t seed = 1; seed <= 80; ++seed) {
      const std::uint32_t n = 8 + seed % 9;
      const CnfFormula f = verify::random_3sat(n, static_cast<std::uint32_t>(n * 4.26), seed);
      LookaheadOptions o;
      o.mode = mode;
      o.heuristics.cc_init_threshold = 1.0;
      o.heuristics.ccc_init_threshold = 1.0;
      LookaheadPeer la(f, o);
      const LaStatus st = run_to_end(la);
      if (st == LaStatus::Sat) continue;
      const auto& out = la.output();
      CHECK(verify::check_tree_cover(out.emitted(), out.refuted()));
      std::vector<Cube> all = out.emitted();
      for (const Cube& c : out.refuted()) all.push_back(c);
      CHECK(dnf_is_tautology(all, n));
      CHECK((st == LaStatus::Exhausted) == (out.count(Refuter::Cutoff) > 0));
      // Emitted cubes are the only way F can still be satisfiable.
      if (verify::brute_force_solve(f).satisfiable) CHECK(st == LaStatus::Exhausted);
    }
  }
}

TEST_CASE("cc threshold moves") {
  const CnfFormula f = verify::random_3sat(16, 68, 4);
  LookaheadOptions o;
  o.mode = Mode::CcCutoff;
  o.heuristics.cc_init_threshold = 5.0;
  LookaheadPeer la(f, o);
  run_to_end(la);
  CHECK(la.cc_threshold() != 5.0);
  CHECK(la.ccc_threshold() == 1000.0);
}

TEST_CASE("replay: local refutation of c6 opens c7") {
  Channel<DecisionMsg> decisions;
  Channel<SolvedMsg> solved;
  TraceLog trace;
  LookaheadOptions o;
  o.mode = Mode::CccInf;
  o.branch_override = replay::branch;
  LookaheadPeer la(replay::formula(), o, &decisions, &solved, &trace);
  for (int i = 0; i < 13; ++i) la.step();
  std::vector<DecisionMsg> sent;
  while (auto m = decisions.try_pop()) sent.push_back(*m);
  REQUIRE(sent.size() == 6);
  CHECK(sent.back() == DecisionMsg{CubeId{7}, 3, L(4)});
  CHECK(sent[3] == DecisionMsg{CubeId{5}, 2, L(-7)});
  CHECK(lines_with(trace.lines(), "close 6").size() == 1);
  CHECK(lines_with(trace.lines(), "send-solved").empty());
  CHECK(la.id_trail() == std::vector<CubeId>{CubeId{1}, CubeId{2}, CubeId{3}, CubeId{5}, CubeId{7}});
}

TEST_CASE("replay: refutation of c3 read at c7") {
  Channel<DecisionMsg> decisions;
  Channel<SolvedMsg> solved;
  LookaheadOptions o;
  o.mode = Mode::CccInf;
  o.branch_override = replay::branch;
  LookaheadPeer la(replay::formula(), o, &decisions, &solved);
  for (int i = 0; i < 11; ++i) la.step();
  REQUIRE(la.id_trail().back() == CubeId{6});
  solved.push(SolvedMsg{CubeId{3}});
  la.step();  // expand c6: refuted by lookahead
  la.step();  // would open c7: reads the refutation
  CHECK(la.id_trail() == std::vector<CubeId>{CubeId{1}, CubeId{2}});
  const auto& nodes = la.nodes();
  auto status = [&](std::uint64_t id) {
    return std::find_if(nodes.begin(), nodes.end(),
                        [&](const NodeRecord& n) { return n.id.value == id; })
        ->status;
  };
  CHECK(status(6) == NodeStatus::RefutedByLookahead);
  CHECK(status(7) == NodeStatus::Aborted);
  CHECK(status(5) == NodeStatus::Aborted);
  CHECK(status(3) == NodeStatus::RefutedByCdcl);
  CHECK(la.stats().solved_received == 1);
  la.step();
  CHECK(la.id_trail().back() == CubeId{8});
  CHECK(la.current_cube() == Cube{L(2), L(3)});
  // Leaves below c3 are dropped; c3 itself stands for them.
  CHECK(la.output().leaves.size() == 1);
  CHECK(la.output().leaves[0].cube == Cube{L(2), L(-3)});
  CHECK(la.output().leaves[0].refuter == Refuter::Cdcl);
  CHECK(run_to_end(la) == LaStatus::Sat);
}

TEST_CASE("stale refutations are discarded") {
  Channel<DecisionMsg> decisions;
  Channel<SolvedMsg> solved;
  LookaheadOptions o;
  o.mode = Mode::CccInf;
  o.branch_override = replay::branch;
  LookaheadPeer la(replay::formula(), o, &decisions, &solved);
  for (int i = 0; i < 11; ++i) la.step();
  solved.push(SolvedMsg{CubeId{4}});  // already closed by lookahead
  la.step();
  la.step();
  CHECK(la.stats().solved_discarded == 1);
  CHECK(la.stats().solved_received == 0);
  CHECK(la.id_trail().back() == CubeId{7});
}

TEST_CASE("discrepancies along the replay path") {
  LookaheadOptions o;
  o.mode = Mode::CccInf;
  o.branch_override = replay::branch;
  LookaheadPeer la(replay::formula(), o);
  for (int i = 0; i < 11; ++i) la.step();
  const std::vector<std::uint32_t> want = {0, 1, 2, 3, 2, 3};
  REQUIRE(la.nodes().size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(la.nodes()[i].discrepancies == want[i]);
  CHECK(la.dump_tree().substr(0, 11) == "1 0 0 open\n");
  CHECK(la.dump_tree().rfind("6 5 -4 open\n") != std::string::npos);
}

TEST_CASE("predictor events") {
  std::size_t la_wins = 0, leaves = 0;
  std::uint64_t max_disc = 0;
  const CnfFormula f = verify::random_3sat(14, 70, 8);
  LookaheadOptions o;
  o.mode = Mode::CccInf;
  LookaheadPeer la(f, o);
  la.set_event_sink([&](const PredictorEvent& e) {
    if (e.kind == PredictorEvent::Kind::LaRefutedCube) ++la_wins;
    if (e.kind == PredictorEvent::Kind::LeafClosed) {
      ++leaves;
      max_disc = std::max(max_disc, e.value);
    }
  });
  run_to_end(la);
  CHECK(la_wins == la.output().count(Refuter::Lookahead));
  CHECK(leaves == la.output().leaves.size());
  const auto hist = la.output().discrepancy_histogram();
  if (!hist.empty()) CHECK(hist.rbegin()->first == max_disc);
}
