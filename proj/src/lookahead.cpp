#include "ccc/lookahead.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace ccc::lookahead {

const char* to_string(Mode m) {
  switch (m) {
    case Mode::CccInf: return "ccc-inf";
    case Mode::CccCutoff: return "ccc-cutoff";
    case Mode::CcCutoff: return "cc-cutoff";
    case Mode::Pure: return "pure";
  }
  return "?";
}

bool is_concurrent(Mode m) { return m == Mode::CccInf || m == Mode::CccCutoff; }
bool has_cutoff(Mode m) { return m == Mode::CccCutoff || m == Mode::CcCutoff; }

const char* to_string(Refuter r) {
  switch (r) {
    case Refuter::Lookahead: return "lookahead";
    case Refuter::Cdcl: return "cdcl";
    case Refuter::Cutoff: return "cutoff";
  }
  return "?";
}

const char* to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::Open: return "open";
    case NodeStatus::Inner: return "inner";
    case NodeStatus::RefutedByLookahead: return "la";
    case NodeStatus::RefutedByCdcl: return "cdcl";
    case NodeStatus::Cutoff: return "cutoff";
    case NodeStatus::Aborted: return "aborted";
    case NodeStatus::Satisfied: return "sat";
  }
  return "?";
}

const char* to_string(LaStatus s) {
  switch (s) {
    case LaStatus::Running: return "running";
    case LaStatus::Sat: return "sat";
    case LaStatus::Unsat: return "unsat";
    case LaStatus::Exhausted: return "exhausted";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Propagator

Propagator::Propagator(const CnfFormula& f)
    : clauses_(f.clauses),
      watches_(2 * std::size_t{f.num_vars}),
      assigns_(f.num_vars, LBool::Undef) {
  std::vector<Lit> units;
  for (std::uint32_t i = 0; i < clauses_.size(); ++i) {
    const Clause& c = clauses_[i];
    if (c.empty()) {
      root_ok_ = false;
    } else if (c.size() == 1) {
      units.push_back(c[0]);
    } else {
      watches_[c[0].code()].push_back(i);
      watches_[c[1].code()].push_back(i);
    }
  }
  for (Lit u : units) {
    if (!root_ok_) break;
    if (!assume(u)) root_ok_ = false;
  }
}

void Propagator::set(Lit l) {
  assigns_[l.var().index - 1] = l.negative() ? LBool::False : LBool::True;
  trail_.push_back(l);
}

bool Propagator::assume(Lit l) {
  const LBool v = value(l);
  if (v == LBool::False) return false;
  if (v == LBool::True) return true;
  set(l);
  return propagate();
}

bool Propagator::propagate() {
  while (qhead_ < trail_.size()) {
    const Lit false_lit = ~trail_[qhead_++];
    ++propagations_;
    auto& ws = watches_[false_lit.code()];
    std::size_t i = 0, j = 0;
    while (i < ws.size()) {
      const std::uint32_t ci = ws[i++];
      Clause& c = clauses_[ci];
      if (c[0] == false_lit) std::swap(c[0], c[1]);
      if (value(c[0]) == LBool::True) {
        ws[j++] = ci;
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.size(); ++k) {
        if (value(c[k]) != LBool::False) {
          std::swap(c[1], c[k]);
          watches_[c[1].code()].push_back(ci);
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = ci;
      if (value(c[0]) == LBool::False) {
        while (i < ws.size()) ws[j++] = ws[i++];
        ws.resize(j);
        qhead_ = trail_.size();
        return false;
      }
      set(c[0]);
    }
    ws.resize(j);
  }
  return true;
}

void Propagator::undo(std::size_t mark) {
  while (trail_.size() > mark) {
    assigns_[trail_.back().var().index - 1] = LBool::Undef;
    trail_.pop_back();
  }
  qhead_ = std::min(qhead_, mark);
}

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(const CnfFormula& f, std::size_t max_candidates)
    : prop_(f),
      max_candidates_(max_candidates),
      occurrences_(f.num_vars, 0),
      score_(2 * std::size_t{f.num_vars}, 0) {
  for (const Clause& c : f.clauses)
    for (Lit l : c) ++occurrences_[l.var().index - 1];
}

std::vector<Var> Engine::candidates() const {
  std::vector<Var> out;
  for (std::uint32_t i = 0; i < occurrences_.size(); ++i)
    if (occurrences_[i] > 0 && prop_.value(Var{i + 1}) == LBool::Undef)
      out.push_back(Var{i + 1});
  if (out.size() > max_candidates_) {
    std::stable_sort(out.begin(), out.end(), [&](Var a, Var b) {
      return occurrences_[a.index - 1] > occurrences_[b.index - 1];
    });
    out.resize(max_candidates_);
    std::sort(out.begin(), out.end());
  }
  return out;
}

bool Engine::probe_and_learn() {
  if (!prop_.root_ok()) return false;
  for (;;) {
    bool changed = false;
    last_candidates_ = candidates();
    for (Var v : last_candidates_) {
      if (prop_.value(v) != LBool::Undef) continue;
      for (bool negative : {false, true}) {
        const Lit l(v, negative);
        const std::size_t mark = prop_.mark();
        const bool ok = prop_.assume(l);
        const std::size_t implied = prop_.trail().size() - mark - 1;
        prop_.undo(mark);
        if (!ok) {
          ++failed_literals_;
          if (!prop_.assume(~l)) return false;
          changed = true;
          break;
        }
        score_[l.code()] = implied;
      }
    }
    if (!changed) return true;
  }
}

std::optional<Branch> Engine::choose() const {
  std::optional<Branch> best;
  std::uint64_t best_value = 0;
  for (Var v : last_candidates_) {
    if (prop_.value(v) != LBool::Undef) continue;
    const Lit pos(v, false);
    const std::uint64_t sp = score_[pos.code()];
    const std::uint64_t sn = score_[(~pos).code()];
    const std::uint64_t value = sp * sn + sp + sn;
    if (best && value <= best_value) continue;
    best_value = value;
    Branch b;
    b.var = v;
    b.right = sp >= sn ? pos : ~pos;
    b.left = ~b.right;
    b.right_score = std::max(sp, sn);
    b.left_score = std::min(sp, sn);
    best = b;
  }
  return best;
}

bool Engine::all_clauses_satisfied() const {
  for (const Clause& c : prop_.clauses()) {
    const bool sat = std::any_of(c.begin(), c.end(), [&](Lit l) {
      return prop_.value(l) == LBool::True;
    });
    if (!sat) return false;
  }
  return true;
}

namespace {

// Fresh engine with phi_dec and phi_imp asserted; false on conflict.
bool load(Engine& e, const Cube& phi_dec, const std::vector<Lit>& phi_imp) {
  if (!e.propagator().root_ok()) return false;
  for (Lit l : phi_dec)
    if (!e.propagator().assume(l)) return false;
  for (Lit l : phi_imp)
    if (!e.propagator().assume(l)) return false;
  return true;
}

}  // namespace

SimplifyResult simplify_and_learn(const CnfFormula& f, const Cube& phi_dec,
                                  const std::vector<Lit>& phi_imp,
                                  std::size_t max_candidates) {
  Engine e(f, max_candidates);
  SimplifyResult out;
  if (!load(e, phi_dec, phi_imp) || !e.probe_and_learn()) {
    out.conflict = true;
    return out;
  }
  for (Lit l : e.propagator().trail())
    if (std::find(phi_dec.begin(), phi_dec.end(), l) == phi_dec.end())
      out.phi_imp.push_back(l);
  return out;
}

std::optional<Branch> decide(const CnfFormula& f, const Cube& phi_dec,
                             const std::vector<Lit>& phi_imp,
                             std::size_t max_candidates) {
  Engine e(f, max_candidates);
  if (!load(e, phi_dec, phi_imp) || !e.probe_and_learn()) return std::nullopt;
  return e.choose();
}

CutoffDecision maybe_cutoff(double difficulty, double threshold, Mode mode) {
  if (!has_cutoff(mode)) return CutoffDecision::Continue;
  return should_cut(difficulty, threshold) ? CutoffDecision::EmitCube
                                           : CutoffDecision::Continue;
}

// ---------------------------------------------------------------------------
// CubePhaseOutput

std::vector<Cube> CubePhaseOutput::emitted() const {
  std::vector<Cube> out;
  for (const LeafRecord& l : leaves)
    if (l.refuter == Refuter::Cutoff) out.push_back(l.cube);
  return out;
}

std::vector<Cube> CubePhaseOutput::refuted() const {
  std::vector<Cube> out;
  for (const LeafRecord& l : leaves)
    if (l.refuter != Refuter::Cutoff) out.push_back(l.cube);
  return out;
}

std::size_t CubePhaseOutput::count(Refuter r) const {
  return static_cast<std::size_t>(std::count_if(
      leaves.begin(), leaves.end(), [&](const LeafRecord& l) { return l.refuter == r; }));
}

std::map<std::uint32_t, std::size_t> CubePhaseOutput::discrepancy_histogram() const {
  std::map<std::uint32_t, std::size_t> h;
  for (const LeafRecord& l : leaves) ++h[l.discrepancies];
  return h;
}

// ---------------------------------------------------------------------------
// LookaheadPeer

LookaheadPeer::LookaheadPeer(const CnfFormula& f, LookaheadOptions options,
                             Channel<DecisionMsg>* decisions,
                             Channel<SolvedMsg>* solved, TraceLog* trace)
    : formula_(f),
      options_(std::move(options)),
      engine_(formula_, options_.max_candidates),
      decisions_(decisions),
      solved_(solved),
      trace_(trace),
      cc_{options_.heuristics.cc_init_threshold},
      ccc_{options_.heuristics.ccc_init_threshold} {
  root_assigned_ = engine_.propagator().trail().size();
  root_free_ = formula_.num_vars - root_assigned_;
}

void LookaheadPeer::trace(const std::string& event) {
  if (trace_) trace_->record(Peer::Lookahead, event);
}

void LookaheadPeer::emit(const PredictorEvent& e) {
  if (event_sink_) event_sink_(e);
}

LaStatus LookaheadPeer::run() {
  while (step() == LaStatus::Running) {
  }
  return status_;
}

LaStatus LookaheadPeer::step() {
  if (status_ != LaStatus::Running) return status_;
  ++stats_.steps;
  if (!started_) {
    started_ = true;
    pending_ = Pending{};
  }
  return pending_ ? enter() : expand();
}

bool LookaheadPeer::on_path(CubeId id) const {
  const std::vector<CubeId> ids = id_trail();
  return discard_stale(SolvedMsg{id}, ids) == StaleVerdict::Process;
}

std::vector<CubeId> LookaheadPeer::id_trail() const {
  std::vector<CubeId> ids;
  for (const Frame& f : stack_) ids.push_back(f.id);
  return ids;
}

Cube LookaheadPeer::current_cube() const {
  Cube c;
  for (const Frame& f : stack_)
    if (f.decision.valid()) c.push_back(f.decision);
  return c;
}

double LookaheadPeer::node_difficulty(std::uint32_t depth) const {
  if (root_free_ == 0) return 0.0;
  const std::size_t assigned = engine_.propagator().trail().size();
  const std::size_t beyond_root = assigned > root_assigned_ ? assigned - root_assigned_ : 0;
  const std::size_t implied = beyond_root > depth ? beyond_root - depth : 0;
  return difficulty(depth, implied, root_free_);
}

void LookaheadPeer::set_status(const Frame& f, NodeStatus s) {
  if (options_.record_tree) nodes_[f.record].status = s;
}

void LookaheadPeer::finish(LaStatus status) {
  status_ = status;
  trace(to_string(status));
}

LaStatus LookaheadPeer::enter() {
  const CubeId id{++next_id_};
  const Pending p = *pending_;
  pending_.reset();
  const CubeId parent = stack_.empty() ? CubeId{0} : stack_.back().id;
  const std::uint32_t depth = stack_.empty() ? 0 : stack_.back().depth + 1;

  if (solved_) {
    while (const SolvedMsg* head = solved_->front()) {
      const CubeId refuted = head->cube_id;
      solved_->try_pop();
      if (!on_path(refuted)) {
        ++stats_.solved_discarded;
        trace("discard-solved " + std::to_string(refuted.value));
        continue;
      }
      ++stats_.solved_received;
      trace("recv-solved " + std::to_string(refuted.value));
      // This call returns UNSAT before opening: the cube lies inside the
      // refuted one.
      if (options_.record_tree)
        nodes_.push_back(NodeRecord{id, parent, p.lit, depth, p.discrepancies,
                                    NodeStatus::Aborted});
      trace("close " + std::to_string(id.value) + " aborted");
      unwind_to(refuted);
      return status_;
    }
  }

  Frame f;
  f.id = id;
  f.decision = p.lit;
  f.depth = depth;
  f.discrepancies = p.discrepancies;
  f.trail_mark = engine_.propagator().mark();
  f.record = nodes_.size();
  if (options_.record_tree)
    nodes_.push_back(NodeRecord{id, parent, p.lit, depth, p.discrepancies, NodeStatus::Open});
  stack_.push_back(f);
  ++stats_.nodes;
  stats_.max_depth = std::max(stats_.max_depth, depth);

  std::ostringstream ev;
  ev << "open " << id.value << ' ' << parent.value << ' '
     << (p.lit.valid() ? p.lit.to_dimacs() : 0) << ' ' << depth << ' ' << p.discrepancies;
  trace(ev.str());

  if (depth > 0 && decisions_) {
    decisions_->push(DecisionMsg{id, depth - 1, p.lit});
    ++stats_.decisions_sent;
    trace("send-decision " + std::to_string(id.value) + " " +
          std::to_string(depth - 1) + " " + std::to_string(p.lit.to_dimacs()));
  }
  return status_;
}

LaStatus LookaheadPeer::expand() {
  Frame& f = stack_.back();
  Propagator& prop = engine_.propagator();

  bool ok = prop.root_ok();
  if (ok && f.decision.valid()) ok = prop.assume(f.decision);
  if (ok) ok = engine_.probe_and_learn();
  f.difficulty = node_difficulty(f.depth);

  if (!ok) {
    if (options_.mode == Mode::CcCutoff)
      cc_ = cc_update(cc_, CcEvent::LaSolvedCube, options_.heuristics);
    else if (is_concurrent(options_.mode))
      ccc_ = ccc_update(ccc_, f.difficulty, CubeSolver::LaSolved, options_.heuristics);
    emit(PredictorEvent::la_refuted());
    emit(PredictorEvent::leaf_closed(f.discrepancies));
    close_top(NodeStatus::RefutedByLookahead);
    return status_;
  }

  if (engine_.all_clauses_satisfied()) {
    model_ = Assignment(formula_.num_vars);
    for (std::uint32_t i = 1; i <= formula_.num_vars; ++i) {
      const LBool v = prop.value(Var{i});
      model_.assign(Lit(Var{i}, v != LBool::True));
    }
    set_status(f, NodeStatus::Satisfied);
    finish(LaStatus::Sat);
    return status_;
  }

  if (has_cutoff(options_.mode)) {
    const double threshold =
        options_.mode == Mode::CcCutoff ? cc_.value : ccc_.value;
    if (maybe_cutoff(f.difficulty, threshold, options_.mode) == CutoffDecision::EmitCube) {
      if (options_.mode == Mode::CccCutoff) ccc_ = ccc_on_cutoff(ccc_, options_.heuristics);
      emit(PredictorEvent::leaf_closed(f.discrepancies));
      close_top(NodeStatus::Cutoff);
      return status_;
    }
  }

  std::optional<Lit> right;
  if (options_.branch_override) {
    CubeNode node;
    node.id = f.id;
    node.phi_dec = current_cube();
    for (std::size_t i = root_assigned_; i < prop.trail().size(); ++i) {
      const Lit l = prop.trail()[i];
      if (std::find(node.phi_dec.begin(), node.phi_dec.end(), l) == node.phi_dec.end())
        node.phi_imp.push_back(l);
    }
    node.depth = f.depth;
    node.discrepancies = f.discrepancies;
    right = options_.branch_override(node);
    if (right && prop.value(*right) != LBool::Undef)
      throw std::logic_error("branch override picked an assigned literal");
  }
  if (!right) {
    const auto branch = engine_.choose();
    if (!branch) throw std::logic_error("no branching candidate in an open node");
    right = branch->right;
  }

  if (options_.mode == Mode::CcCutoff) {
    cc_ = cc_update(cc_, CcEvent::Decision, options_.heuristics);
    if (f.depth > options_.heuristics.cc_too_deep)
      cc_ = cc_update(cc_, CcEvent::TooDeep, options_.heuristics);
  }

  f.expanded = true;
  f.first_is_right = is_concurrent(options_.mode);
  f.first = f.first_is_right ? *right : ~*right;
  f.second = ~f.first;
  trace("branch " + std::to_string(f.id.value) + " " +
        std::to_string(f.first.to_dimacs()) + " " + std::to_string(f.second.to_dimacs()));
  pending_ = Pending{f.first, f.discrepancies + (f.first_is_right ? 1u : 0u)};
  return status_;
}

void LookaheadPeer::add_leaf(const Frame& f, Refuter r) {
  LeafRecord leaf;
  leaf.id = f.id;
  leaf.cube = current_cube();
  leaf.refuter = r;
  leaf.discrepancies = f.discrepancies;
  leaf.difficulty = f.difficulty;
  output_.leaves.push_back(std::move(leaf));
}

void LookaheadPeer::close_top(NodeStatus status) {
  const Frame f = stack_.back();
  switch (status) {
    case NodeStatus::RefutedByLookahead: add_leaf(f, Refuter::Lookahead); break;
    case NodeStatus::RefutedByCdcl: add_leaf(f, Refuter::Cdcl); break;
    case NodeStatus::Cutoff: add_leaf(f, Refuter::Cutoff); break;
    default: break;
  }
  stack_.pop_back();
  engine_.propagator().undo(f.trail_mark);
  set_status(f, status);
  trace("close " + std::to_string(f.id.value) + " " + to_string(status));

  if (stack_.empty()) {
    const bool cubes = has_cutoff(options_.mode) && output_.count(Refuter::Cutoff) > 0;
    finish(cubes ? LaStatus::Exhausted : LaStatus::Unsat);
    return;
  }
  Frame& parent = stack_.back();
  if (++parent.children_done == 1) {
    pending_ = Pending{parent.second,
                       parent.discrepancies + (parent.first_is_right ? 0u : 1u)};
  } else {
    close_top(NodeStatus::Inner);
  }
}

void LookaheadPeer::unwind_to(CubeId refuted) {
  while (!stack_.empty() && stack_.back().id != refuted) {
    const Frame f = stack_.back();
    stack_.pop_back();
    engine_.propagator().undo(f.trail_mark);
    set_status(f, NodeStatus::Aborted);
    trace("close " + std::to_string(f.id.value) + " aborted");
  }
  if (stack_.empty()) throw std::logic_error("refuted cube not on the id trail");

  // Leaves recorded since the refuted node was opened lie inside it.
  std::erase_if(output_.leaves,
                [&](const LeafRecord& l) { return l.id > refuted; });

  Frame& f = stack_.back();
  if (!f.expanded) f.difficulty = node_difficulty(f.depth);
  if (is_concurrent(options_.mode))
    ccc_ = ccc_update(ccc_, f.difficulty, CubeSolver::CdclSolved, options_.heuristics);
  emit(PredictorEvent::leaf_closed(f.discrepancies));
  close_top(NodeStatus::RefutedByCdcl);
}

std::string LookaheadPeer::dump_tree() const {
  std::ostringstream out;
  for (const NodeRecord& n : nodes_)
    out << n.id.value << ' ' << n.parent.value << ' '
        << (n.lit.valid() ? n.lit.to_dimacs() : 0) << ' ' << to_string(n.status) << '\n';
  return out.str();
}

}  // namespace ccc::lookahead
