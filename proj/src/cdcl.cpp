#include "ccc/cdcl.hpp"

#include <algorithm>
#include <cassert>
#include <random>

namespace ccc::cdcl {

const char* to_string(SolveResult::Kind k) {
  switch (k) {
    case SolveResult::Kind::Sat: return "sat";
    case SolveResult::Kind::Unsat: return "unsat";
    case SolveResult::Kind::UnsatUnderAssumptions: return "unsat-under-assumptions";
    case SolveResult::Kind::BudgetExhausted: return "budget-exhausted";
  }
  return "?";
}

std::uint64_t luby(std::size_t i) {
  std::size_t size = 1;
  unsigned seq = 0;
  while (size < i + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != i) {
    size = (size - 1) >> 1;
    --seq;
    i = i % size;
  }
  return std::uint64_t{1} << seq;
}

// ---------------------------------------------------------------------------
// VarHeap

void Solver::VarHeap::insert(std::uint32_t v) {
  if (contains(v)) return;
  index_[v] = static_cast<int>(heap_.size());
  heap_.push_back(v);
  up(index_[v]);
}

std::uint32_t Solver::VarHeap::pop() {
  const std::uint32_t top = heap_.front();
  heap_.front() = heap_.back();
  index_[heap_.front()] = 0;
  heap_.pop_back();
  index_[top] = -1;
  if (!heap_.empty()) down(0);
  return top;
}

void Solver::VarHeap::up(int i) {
  const std::uint32_t v = heap_[i];
  while (i > 0) {
    const int parent = (i - 1) / 2;
    if (!before(v, heap_[parent])) break;
    heap_[i] = heap_[parent];
    index_[heap_[i]] = i;
    i = parent;
  }
  heap_[i] = v;
  index_[v] = i;
}

void Solver::VarHeap::down(int i) {
  const std::uint32_t v = heap_[i];
  const int n = static_cast<int>(heap_.size());
  for (;;) {
    int child = 2 * i + 1;
    if (child >= n) break;
    if (child + 1 < n && before(heap_[child + 1], heap_[child])) ++child;
    if (!before(heap_[child], v)) break;
    heap_[i] = heap_[child];
    index_[heap_[i]] = i;
    i = child;
  }
  heap_[i] = v;
  index_[v] = i;
}

// ---------------------------------------------------------------------------
// Solver

Solver::Solver(const CnfFormula& f, SolverOptions options)
    : options_(options),
      num_vars_(f.num_vars),
      watches_(2 * std::size_t{f.num_vars}),
      assigns_(f.num_vars, LBool::Undef),
      level_(f.num_vars, 0),
      reason_(f.num_vars, kNoReason),
      saved_phase_(f.num_vars, true),
      activity_(f.num_vars, 0.0),
      order_(activity_),
      seen_(f.num_vars, 0) {
  if (options_.seed != 0) {
    std::mt19937_64 rng(options_.seed);
    std::uniform_real_distribution<double> jitter(0.0, 1e-5);
    for (double& a : activity_) a = jitter(rng);
  }
  order_.resize(num_vars_);
  for (std::uint32_t v = 0; v < num_vars_; ++v) order_.insert(v);
  for (const Clause& c : f.clauses) add_clause(c);
  max_learnts_ = std::max(static_cast<double>(options_.min_learnts),
                          static_cast<double>(clauses_.size()) / 3.0);
}

void Solver::add_clause(Clause c) {
  assert(decision_level() == 0);
  if (!ok_) return;
  if (!canonicalize_clause(c)) return;
  Clause kept;
  for (Lit l : c) {
    const LBool v = value(l);
    if (v == LBool::True) return;
    if (v == LBool::Undef) kept.push_back(l);
  }
  if (kept.empty()) {
    ok_ = false;
    return;
  }
  if (kept.size() == 1) {
    enqueue(kept[0], kNoReason);
    if (propagate()) ok_ = false;
    return;
  }
  attach(store(std::move(kept), false));
}

ClauseRef Solver::store(Clause lits, bool learned) {
  const auto cr = static_cast<ClauseRef>(clauses_.size());
  clauses_.push_back(StoredClause{std::move(lits), 0.0, learned, false});
  if (learned) ++num_learned_;
  return cr;
}

void Solver::attach(ClauseRef cr) {
  const Clause& c = clauses_[cr].lits;
  assert(c.size() >= 2);
  watches_[c[0].code()].push_back(cr);
  watches_[c[1].code()].push_back(cr);
}

void Solver::enqueue(Lit l, ClauseRef reason) {
  const std::uint32_t v = l.var().index - 1;
  assert(assigns_[v] == LBool::Undef);
  assigns_[v] = l.negative() ? LBool::False : LBool::True;
  level_[v] = decision_level();
  reason_[v] = reason;
  trail_.push_back(l);
}

std::optional<ClauseRef> Solver::reason(Var v) const {
  const ClauseRef r = reason_[v.index - 1];
  if (r == kNoReason) return std::nullopt;
  return r;
}

std::optional<ClauseRef> Solver::propagate() {
  while (qhead_ < trail_.size()) {
    const Lit p = trail_[qhead_++];
    ++stats_.propagations;
    const Lit false_lit = ~p;
    std::vector<ClauseRef>& ws = watches_[false_lit.code()];
    std::size_t i = 0, j = 0;
    while (i < ws.size()) {
      const ClauseRef cr = ws[i++];
      StoredClause& sc = clauses_[cr];
      if (sc.deleted) continue;
      Clause& c = sc.lits;
      if (c[0] == false_lit) std::swap(c[0], c[1]);
      if (value(c[0]) == LBool::True) {
        ws[j++] = cr;
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.size(); ++k) {
        if (value(c[k]) != LBool::False) {
          std::swap(c[1], c[k]);
          watches_[c[1].code()].push_back(cr);
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = cr;
      if (value(c[0]) == LBool::False) {
        while (i < ws.size()) ws[j++] = ws[i++];
        ws.resize(j);
        qhead_ = trail_.size();
        return cr;
      }
      enqueue(c[0], cr);
    }
    ws.resize(j);
  }
  return std::nullopt;
}

void Solver::bump_var(Var v) {
  const std::uint32_t i = v.index - 1;
  if ((activity_[i] += var_inc_) > 1e100) {
    for (double& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (order_.contains(i)) order_.increased(i);
}

void Solver::bump_clause(ClauseRef cr) {
  if ((clauses_[cr].activity += clause_inc_) > 1e20) {
    for (StoredClause& sc : clauses_)
      if (sc.learned) sc.activity *= 1e-20;
    clause_inc_ *= 1e-20;
  }
}

void Solver::decay_activities() {
  var_inc_ /= options_.var_decay;
  clause_inc_ /= options_.clause_decay;
}

Analysis Solver::analyze(ClauseRef conflict) {
  int conflict_level = 0;
  for (Lit l : clauses_[conflict].lits)
    conflict_level = std::max(conflict_level, level(l.var()));
  if (conflict_level == 0) return {};
  if (conflict_level < decision_level()) backtrack(conflict_level);

  Analysis out;
  out.learned.push_back(Lit());
  int path_count = 0;
  Lit p;
  std::size_t index = trail_.size();
  ClauseRef confl = conflict;
  do {
    if (clauses_[confl].learned) bump_clause(confl);
    for (Lit q : clauses_[confl].lits) {
      if (p.valid() && q.var() == p.var()) continue;
      const std::uint32_t v = q.var().index - 1;
      if (seen_[v] || level_[v] == 0) continue;
      seen_[v] = 1;
      bump_var(q.var());
      if (level_[v] >= conflict_level)
        ++path_count;
      else
        out.learned.push_back(q);
    }
    do {
      --index;
    } while (!seen_[trail_[index].var().index - 1]);
    p = trail_[index];
    confl = reason_[p.var().index - 1];
    seen_[p.var().index - 1] = 0;
    --path_count;
  } while (path_count > 0);
  out.learned[0] = ~p;

  for (std::size_t i = 1; i < out.learned.size(); ++i)
    seen_[out.learned[i].var().index - 1] = 0;

  if (out.learned.size() > 1) {
    std::size_t max_i = 1;
    for (std::size_t i = 2; i < out.learned.size(); ++i)
      if (level(out.learned[i].var()) > level(out.learned[max_i].var())) max_i = i;
    std::swap(out.learned[1], out.learned[max_i]);
    out.backtrack_level = level(out.learned[1].var());
  }
  return out;
}

void Solver::learn(const Analysis& analysis) {
  assert(!analysis.learned.empty());
  ++stats_.learned;
  if (learn_hook_) learn_hook_(analysis.learned);
  if (analysis.learned.size() == 1) {
    enqueue(analysis.learned[0], kNoReason);
  } else {
    const ClauseRef cr = store(analysis.learned, true);
    attach(cr);
    bump_clause(cr);
    enqueue(analysis.learned[0], cr);
  }
  decay_activities();
  ++conflicts_since_restart_;
  ++stats_.conflicts;
}

void Solver::backtrack(int target) {
  if (decision_level() <= target) return;
  for (std::size_t i = trail_.size(); i-- > trail_lim_[target];) {
    const std::uint32_t v = trail_[i].var().index - 1;
    assigns_[v] = LBool::Undef;
    reason_[v] = kNoReason;
    saved_phase_[v] = trail_[i].negative();
    order_.insert(v);
  }
  trail_.resize(trail_lim_[target]);
  trail_lim_.resize(target);
  qhead_ = trail_.size();
}

void Solver::decide(Lit lit) {
  ++stats_.decisions;
  trail_lim_.push_back(trail_.size());
  enqueue(lit, kNoReason);
}

void Solver::new_empty_level() { trail_lim_.push_back(trail_.size()); }

Lit Solver::pick_branch_lit() {
  while (!order_.empty()) {
    const std::uint32_t v = order_.pop();
    if (assigns_[v] == LBool::Undef) return Lit(Var{v + 1}, saved_phase_[v]);
  }
  return Lit();
}

Cube Solver::analyze_final(Lit p) const {
  Cube out;
  if (decision_level() == 0 || level(p.var()) == 0) return out;
  seen_[p.var().index - 1] = 1;
  for (std::size_t i = trail_.size(); i-- > trail_lim_[0];) {
    const std::uint32_t v = trail_[i].var().index - 1;
    if (!seen_[v]) continue;
    if (reason_[v] == kNoReason) {
      out.push_back(trail_[i]);
    } else {
      for (Lit q : clauses_[reason_[v]].lits) {
        const std::uint32_t u = q.var().index - 1;
        if (u != v && level_[u] > 0) seen_[u] = 1;
      }
    }
    seen_[v] = 0;
  }
  seen_[p.var().index - 1] = 0;
  std::reverse(out.begin(), out.end());
  return out;
}

Assignment Solver::assignment() const {
  Assignment a(num_vars_);
  for (Lit l : trail_) a.assign(l);
  return a;
}

bool Solver::restart_due() const {
  return conflicts_since_restart_ >= restart_limit();
}

std::uint64_t Solver::restart_limit() const {
  return luby(restart_index_) * options_.restart_unit;
}

void Solver::note_restart() {
  ++restart_index_;
  conflicts_since_restart_ = 0;
  ++stats_.restarts;
}

void Solver::reset_restart_schedule() {
  restart_index_ = 0;
  conflicts_since_restart_ = 0;
}

bool Solver::reduce_due() const {
  return static_cast<double>(num_learned_) >=
         max_learnts_ + static_cast<double>(trail_.size());
}

void Solver::reduce_db(bool scheduled) {
  std::vector<char> locked(clauses_.size(), 0);
  for (Lit l : trail_) {
    const ClauseRef r = reason_[l.var().index - 1];
    if (r != kNoReason) locked[r] = 1;
  }
  std::vector<ClauseRef> candidates;
  for (ClauseRef cr = 0; cr < clauses_.size(); ++cr) {
    const StoredClause& sc = clauses_[cr];
    if (sc.learned && !sc.deleted) candidates.push_back(cr);
  }
  const std::size_t target = candidates.size() / 2;
  std::stable_sort(candidates.begin(), candidates.end(), [&](ClauseRef a, ClauseRef b) {
    return clauses_[a].activity < clauses_[b].activity;
  });
  std::size_t removed = 0;
  for (ClauseRef cr : candidates) {
    if (removed == target) break;
    StoredClause& sc = clauses_[cr];
    if (locked[cr] || sc.lits.size() <= 2) continue;
    sc.deleted = true;
    Clause().swap(sc.lits);
    --num_learned_;
    ++removed;
  }
  ++stats_.reductions;
  if (scheduled) max_learnts_ *= options_.learnts_growth;
  if (removed > 0) rebuild_watches();
}

void Solver::rebuild_watches() {
  for (auto& ws : watches_) {
    ws.erase(std::remove_if(ws.begin(), ws.end(),
                            [&](ClauseRef cr) { return clauses_[cr].deleted; }),
             ws.end());
  }
}

std::vector<Clause> Solver::learned_clauses() const {
  std::vector<Clause> out;
  for (const StoredClause& sc : clauses_)
    if (sc.learned && !sc.deleted) out.push_back(sc.lits);
  return out;
}

SolveResult Solver::solve(std::span<const Lit> assumptions,
                          std::optional<std::uint64_t> conflict_budget) {
  SolveResult result;
  if (!ok_) {
    result.kind = SolveResult::Kind::Unsat;
    return result;
  }
  backtrack(0);
  const std::uint64_t start_conflicts = stats_.conflicts;

  for (;;) {
    if (const auto confl = propagate()) {
      const Analysis a = analyze(*confl);
      if (a.learned.empty()) {
        ok_ = false;
        result.kind = SolveResult::Kind::Unsat;
        break;
      }
      backtrack(a.backtrack_level);
      learn(a);
      continue;
    }

    if ((conflict_budget && stats_.conflicts - start_conflicts >= *conflict_budget) ||
        (interrupt_ && interrupt_->load(std::memory_order_relaxed))) {
      result.kind = SolveResult::Kind::BudgetExhausted;
      break;
    }
    if (restart_due()) {
      backtrack(0);
      note_restart();
    }
    if (reduce_due()) reduce_db(true);

    Lit next;
    bool failed = false;
    while (static_cast<std::size_t>(decision_level()) < assumptions.size()) {
      const Lit a = assumptions[decision_level()];
      const LBool v = value(a);
      if (v == LBool::True) {
        new_empty_level();
      } else if (v == LBool::False) {
        const auto k = static_cast<std::size_t>(decision_level());
        result.kind = SolveResult::Kind::UnsatUnderAssumptions;
        result.failed_core = analyze_final(~a);
        result.failed_core.push_back(a);
        result.failed_prefix.assign(assumptions.begin(), assumptions.begin() + k + 1);
        failed = true;
        break;
      } else {
        next = a;
        break;
      }
    }
    if (failed) break;
    if (!next.valid()) {
      next = pick_branch_lit();
      if (!next.valid()) {
        result.kind = SolveResult::Kind::Sat;
        result.model = assignment();
        break;
      }
    }
    decide(next);
  }
  backtrack(0);
  return result;
}

// ---------------------------------------------------------------------------
// CdclPeer

const char* to_string(CdclOutcome::Kind k) {
  switch (k) {
    case CdclOutcome::Kind::Sat: return "sat";
    case CdclOutcome::Kind::Unsat: return "unsat";
    case CdclOutcome::Kind::CubeRefuted: return "cube-refuted";
    case CdclOutcome::Kind::Paused: return "paused";
  }
  return "?";
}

CdclPeer::CdclPeer(const CnfFormula& f, Channel<DecisionMsg>& decisions,
                   Channel<SolvedMsg>& solved, SolverOptions options,
                   TraceLog* trace)
    : solver_(f, options), decisions_(decisions), solved_(solved), trace_(trace) {}

void CdclPeer::trace(const std::string& event) {
  if (trace_) trace_->record(Peer::Cdcl, event);
}

CdclOutcome CdclPeer::step() {
  ++stats_.steps;
  CdclOutcome out;
  if (!solver_.ok()) {
    out.kind = CdclOutcome::Kind::Unsat;
    return out;
  }
  if (solver_.all_assigned()) {
    out.kind = CdclOutcome::Kind::Sat;
    out.model = solver_.assignment();
    return out;
  }

  if (auto msg = decisions_.try_pop()) {
    ++stats_.decisions_received;
    const std::string args = std::to_string(msg->cube_id.value) + " " +
                             std::to_string(msg->backtrack_level) + " " +
                             std::to_string(msg->lit.to_dimacs());
    if (discard_stale(*msg, stack_.size()) == StaleVerdict::Discard) {
      ++stats_.decisions_discarded;
      trace("discard-decision " + args);
      return out;
    }
    trace("recv-decision " + args);
    stack_.resize(msg->backtrack_level);
    stack_.push_back({msg->cube_id, msg->lit});
    solver_.backtrack(static_cast<int>(msg->backtrack_level));
  } else {
    const Lit d = solver_.pick_branch_lit();
    if (!d.valid()) {
      trace("sat");
      out.kind = CdclOutcome::Kind::Sat;
      out.model = solver_.assignment();
      return out;
    }
    solver_.decide(d);
  }
  return settle();
}

CdclOutcome CdclPeer::settle() {
  CdclOutcome out;
  for (;;) {
    if (const auto confl = solver_.propagate()) {
      const Analysis a = solver_.analyze(*confl);
      if (a.learned.empty()) {
        trace("unsat");
        out.kind = CdclOutcome::Kind::Unsat;
        return out;
      }
      solver_.backtrack(a.backtrack_level);
      solver_.learn(a);
      continue;
    }
    const auto level = static_cast<std::size_t>(solver_.decision_level());
    if (level >= stack_.size()) break;
    const AssumptionEntry entry = stack_[level];
    const LBool v = solver_.value(entry.lit);
    if (v == LBool::True) {
      solver_.new_empty_level();
    } else if (v == LBool::Undef) {
      solver_.decide(entry.lit);
    } else {
      // The assumption at this level is implied false by the levels below:
      // the cube ending here and every larger cube on the stack are refuted.
      stack_.resize(level);
      solved_.push(SolvedMsg{entry.cube_id});
      trace("send-solved " + std::to_string(entry.cube_id.value));
      ++stats_.cubes_refuted;
      on_cube_refuted();
      out.kind = CdclOutcome::Kind::CubeRefuted;
      out.refuted = entry.cube_id;
    }
  }

  if (solver_.restart_due()) {
    restart();
    solver_.note_restart();
  }
  if (solver_.reduce_due()) solver_.reduce_db(true);
  if (check_invariants_ && !floor_holds()) ++stats_.floor_violations;

  if (out.kind == CdclOutcome::Kind::Paused && solver_.all_assigned()) {
    trace("sat");
    out.kind = CdclOutcome::Kind::Sat;
    out.model = solver_.assignment();
  }
  return out;
}

void CdclPeer::restart() {
  solver_.backtrack(
      std::min(solver_.decision_level(), static_cast<int>(stack_.size())));
}

void CdclPeer::on_cube_refuted() {
  solver_.reset_restart_schedule();
  solver_.reduce_db();
}

bool CdclPeer::floor_holds() const {
  if (static_cast<std::size_t>(solver_.decision_level()) < stack_.size()) return false;
  if (solver_.trail().size() < stack_.size()) return false;
  for (std::size_t i = 0; i < stack_.size(); ++i) {
    const Lit l = stack_[i].lit;
    if (solver_.value(l) != LBool::True) return false;
    if (static_cast<std::size_t>(solver_.level(l.var())) > i + 1) return false;
  }
  return true;
}

}  // namespace ccc::cdcl
