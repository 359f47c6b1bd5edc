#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ccc/channel.hpp"
#include "ccc/formula.hpp"
#include "ccc/messages.hpp"

namespace ccc::cdcl {

struct SolverOptions {
  double var_decay = 0.95;
  double clause_decay = 0.999;
  std::uint32_t restart_unit = 100;  // conflicts per Luby unit
  std::size_t min_learnts = 1000;
  double learnts_growth = 1.1;
  // Non-zero seeds add a tiny random initial activity so that the first
  // decisions differ between seeds.
  std::uint64_t seed = 0;
};

using ClauseRef = std::uint32_t;

struct Analysis {
  Clause learned;  // learned[0] is the asserting literal; empty = global UNSAT
  int backtrack_level = 0;
};

struct SolveResult {
  enum class Kind { Sat, Unsat, UnsatUnderAssumptions, BudgetExhausted };
  Kind kind = Kind::BudgetExhausted;
  Assignment model;
  // Shortest prefix of the assumptions that is inconsistent with F.
  Cube failed_prefix;
  // Assumptions involved in the failure (subset of failed_prefix).
  Cube failed_core;
};

const char* to_string(SolveResult::Kind k);

struct SolverStats {
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t restarts = 0;
  std::uint64_t reductions = 0;
  std::uint64_t learned = 0;
};

// MiniSat-style CDCL: two watched literals, 1UIP learning, VSIDS with phase
// saving, Luby restarts and activity-based clause deletion. The low-level
// operations are public so that the concurrent peer can drive the search one
// decision at a time.
class Solver {
 public:
  explicit Solver(const CnfFormula& f, SolverOptions options = {});

  std::uint32_t num_vars() const { return num_vars_; }
  // False once the formula is known to be unsatisfiable without assumptions.
  bool ok() const { return ok_; }

  // Adds a clause at decision level 0.
  void add_clause(Clause clause);

  SolveResult solve(std::span<const Lit> assumptions = {},
                    std::optional<std::uint64_t> conflict_budget = {});

  // Checked at every conflict; a set flag makes solve() return
  // BudgetExhausted.
  void set_interrupt(const std::atomic<bool>* flag) { interrupt_ = flag; }
  void set_learn_hook(std::function<void(const Clause&)> hook) {
    learn_hook_ = std::move(hook);
  }

  // --- engine primitives ---
  std::optional<ClauseRef> propagate();
  // Learned clause and backjump level for a falsified clause. Backtracks to
  // the highest level in the conflict first if the trail is deeper.
  Analysis analyze(ClauseRef conflict);
  // Adds the learned clause and enqueues its asserting literal. The caller
  // backtracks to analysis.backtrack_level first.
  void learn(const Analysis& analysis);
  void backtrack(int level);
  void decide(Lit lit);
  // Opens a decision level without assigning anything; used for assumptions
  // that are already true.
  void new_empty_level();
  Lit pick_branch_lit();
  // Assumptions (subset of the current decisions) that imply `p`. `p` must be
  // true on the trail.
  Cube analyze_final(Lit p) const;

  int decision_level() const { return static_cast<int>(trail_lim_.size()); }
  LBool value(Lit l) const { return assigns_[l.var().index - 1] ^ l.negative(); }
  LBool value(Var v) const { return assigns_[v.index - 1]; }
  int level(Var v) const { return level_[v.index - 1]; }
  std::optional<ClauseRef> reason(Var v) const;
  const Clause& clause(ClauseRef cr) const { return clauses_[cr].lits; }
  std::span<const Lit> trail() const { return trail_; }
  bool all_assigned() const { return trail_.size() == num_vars_; }
  Assignment assignment() const;

  // --- restarts and clause database ---
  bool restart_due() const;
  void note_restart();
  void reset_restart_schedule();
  std::uint64_t restart_limit() const;
  std::uint64_t conflicts_since_restart() const { return conflicts_since_restart_; }
  std::size_t restart_index() const { return restart_index_; }
  bool reduce_due() const;
  // Removes the lower-activity half of the learned clauses, never touching
  // binary clauses or reasons of assigned literals. Scheduled reductions also
  // raise the limit that triggers the next one.
  void reduce_db(bool scheduled = false);
  std::size_t num_learned() const { return num_learned_; }
  std::vector<Clause> learned_clauses() const;
  void decay_activities();

  const SolverStats& stats() const { return stats_; }

 private:
  struct StoredClause {
    Clause lits;
    double activity = 0.0;
    bool learned = false;
    bool deleted = false;
  };

  class VarHeap {
   public:
    explicit VarHeap(const std::vector<double>& activity) : activity_(activity) {}
    void resize(std::size_t n) { index_.assign(n, -1); }
    bool contains(std::uint32_t v) const { return index_[v] >= 0; }
    bool empty() const { return heap_.empty(); }
    void insert(std::uint32_t v);
    void increased(std::uint32_t v) { up(index_[v]); }
    std::uint32_t pop();

   private:
    bool before(std::uint32_t a, std::uint32_t b) const {
      return activity_[a] > activity_[b] || (activity_[a] == activity_[b] && a < b);
    }
    void up(int i);
    void down(int i);

    const std::vector<double>& activity_;
    std::vector<std::uint32_t> heap_;
    std::vector<int> index_;
  };

  static constexpr ClauseRef kNoReason = ~ClauseRef{0};

  void enqueue(Lit l, ClauseRef reason);
  void attach(ClauseRef cr);
  ClauseRef store(Clause lits, bool learned);
  void bump_var(Var v);
  void bump_clause(ClauseRef cr);
  void rebuild_watches();

  SolverOptions options_;
  std::uint32_t num_vars_;
  bool ok_ = true;

  std::vector<StoredClause> clauses_;
  std::vector<std::vector<ClauseRef>> watches_;  // by literal code
  std::vector<LBool> assigns_;
  std::vector<int> level_;
  std::vector<ClauseRef> reason_;
  std::vector<bool> saved_phase_;  // true = negative
  std::vector<Lit> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;

  std::vector<double> activity_;
  double var_inc_ = 1.0;
  double clause_inc_ = 1.0;
  VarHeap order_;
  mutable std::vector<char> seen_;

  std::size_t num_learned_ = 0;
  double max_learnts_ = 0.0;
  std::size_t restart_index_ = 0;
  std::uint64_t conflicts_since_restart_ = 0;

  const std::atomic<bool>* interrupt_ = nullptr;
  std::function<void(const Clause&)> learn_hook_;
  SolverStats stats_;
};

// Luby sequence 1,1,2,1,1,2,4,... at zero-based index i.
std::uint64_t luby(std::size_t i);

// One cube on the assumption stack: the cube's id and its last literal.
struct AssumptionEntry {
  CubeId cube_id;
  Lit lit;
};

struct CdclOutcome {
  enum class Kind { Sat, Unsat, CubeRefuted, Paused };
  Kind kind = Kind::Paused;
  Assignment model;
  CubeId refuted;
};

const char* to_string(CdclOutcome::Kind k);

struct PeerStats {
  std::uint64_t steps = 0;
  std::uint64_t decisions_received = 0;
  std::uint64_t decisions_discarded = 0;
  std::uint64_t cubes_refuted = 0;
  std::uint64_t floor_violations = 0;
};

// The CDCL side of concurrent cube-and-conquer. The cubes received from the
// lookahead peer are kept on an assumption stack whose i-th entry is decided
// at level i+1; the solver never backtracks below that floor on restarts and
// reports the smallest cube it finds inconsistent.
class CdclPeer {
 public:
  CdclPeer(const CnfFormula& f, Channel<DecisionMsg>& decisions,
           Channel<SolvedMsg>& solved, SolverOptions options = {},
           TraceLog* trace = nullptr);

  // Handles one queued decision message or makes one own decision, then
  // propagates and resolves conflicts until the assumption stack is
  // re-established.
  CdclOutcome step();

  // Truncates the trail to the assumption levels.
  void restart();
  // Restart schedule reset plus clause database reduction after a cube was
  // refuted.
  void on_cube_refuted();

  std::span<const AssumptionEntry> assumptions() const { return stack_; }
  // Every assumption literal is true and sits at or below level |S|.
  bool floor_holds() const;
  bool check_invariants() const { return check_invariants_; }
  void set_check_invariants(bool on) { check_invariants_ = on; }

  Solver& solver() { return solver_; }
  const Solver& solver() const { return solver_; }
  const PeerStats& stats() const { return stats_; }

 private:
  // Propagates, learns from conflicts and re-assigns pending assumptions.
  CdclOutcome settle();
  void trace(const std::string& event);

  Solver solver_;
  Channel<DecisionMsg>& decisions_;
  Channel<SolvedMsg>& solved_;
  TraceLog* trace_;
  std::vector<AssumptionEntry> stack_;
  bool check_invariants_ = false;
  bool finished_ = false;
  PeerStats stats_;
};

}  // namespace ccc::cdcl
