#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccc/channel.hpp"
#include "ccc/formula.hpp"
#include "ccc/heuristics.hpp"
#include "ccc/messages.hpp"

namespace ccc::lookahead {

// ccc_inf and ccc_cutoff explore the discrepancy (right) branch first and
// talk to a CDCL peer; cc_cutoff and pure run alone, left branch first.
enum class Mode { CccInf, CccCutoff, CcCutoff, Pure };

const char* to_string(Mode m);
bool is_concurrent(Mode m);
bool has_cutoff(Mode m);

// Snapshot of the node being expanded, handed to branch overrides.
struct CubeNode {
  CubeId id;
  Cube phi_dec;
  std::vector<Lit> phi_imp;
  std::uint32_t depth = 0;
  std::uint32_t discrepancies = 0;
};

// Unit propagation over two watched literals, without reasons. Only the
// lookahead engine uses it.
class Propagator {
 public:
  explicit Propagator(const CnfFormula& f);

  // False if the formula has an empty clause or conflicting units.
  bool root_ok() const { return root_ok_; }
  LBool value(Lit l) const { return assigns_[l.var().index - 1] ^ l.negative(); }
  LBool value(Var v) const { return assigns_[v.index - 1]; }
  // Assigns l and propagates; false on conflict (the trail is left as is,
  // undo() restores it).
  bool assume(Lit l);
  std::size_t mark() const { return trail_.size(); }
  void undo(std::size_t mark);
  std::span<const Lit> trail() const { return trail_; }
  std::uint64_t propagations() const { return propagations_; }
  std::uint32_t num_vars() const { return static_cast<std::uint32_t>(assigns_.size()); }
  const std::vector<Clause>& clauses() const { return clauses_; }

 private:
  bool propagate();
  void set(Lit l);

  std::vector<Clause> clauses_;
  std::vector<std::vector<std::uint32_t>> watches_;
  std::vector<LBool> assigns_;
  std::vector<Lit> trail_;
  std::size_t qhead_ = 0;
  std::uint64_t propagations_ = 0;
  bool root_ok_ = true;
};

struct Branch {
  Var var;
  Lit right;  // the branch that reduces the formula the most
  Lit left;
  std::uint64_t right_score = 0;
  std::uint64_t left_score = 0;
};

// Failed-literal probing and lookahead scoring on top of a Propagator.
class Engine {
 public:
  explicit Engine(const CnfFormula& f, std::size_t max_candidates = 256);

  Propagator& propagator() { return prop_; }
  const Propagator& propagator() const { return prop_; }

  // Probes both polarities of every candidate; a literal whose probe fails
  // is negated and kept. Repeats until a full pass finds nothing new.
  // Returns false if the current assignment is contradictory.
  bool probe_and_learn();
  // Best candidate after the last probe pass: maximizes
  // s(x)*s(~x) + s(x) + s(~x), lowest index on ties.
  std::optional<Branch> choose() const;
  bool all_clauses_satisfied() const;
  std::vector<Var> candidates() const;
  std::uint64_t score(Lit l) const { return score_[l.code()]; }
  std::uint64_t failed_literals() const { return failed_literals_; }

 private:
  Propagator prop_;
  std::size_t max_candidates_;
  std::vector<std::uint32_t> occurrences_;
  std::vector<std::uint64_t> score_;
  std::vector<Var> last_candidates_;
  std::uint64_t failed_literals_ = 0;
};

struct SimplifyResult {
  std::vector<Lit> phi_imp;  // every literal implied beyond phi_dec
  bool conflict = false;
};

// Closes phi_dec plus phi_imp under unit propagation and failed-literal
// probing.
SimplifyResult simplify_and_learn(const CnfFormula& f, const Cube& phi_dec,
                                  const std::vector<Lit>& phi_imp,
                                  std::size_t max_candidates = 256);

std::optional<Branch> decide(const CnfFormula& f, const Cube& phi_dec,
                             const std::vector<Lit>& phi_imp,
                             std::size_t max_candidates = 256);

enum class CutoffDecision { Continue, EmitCube };

CutoffDecision maybe_cutoff(double difficulty, double threshold, Mode mode);

enum class Refuter { Lookahead, Cdcl, Cutoff };
const char* to_string(Refuter r);

enum class NodeStatus {
  Open,
  Inner,          // closed because both children closed
  RefutedByLookahead,
  RefutedByCdcl,
  Cutoff,
  Aborted,        // inside a subtree the CDCL peer refuted
  Satisfied,
};
const char* to_string(NodeStatus s);

struct NodeRecord {
  CubeId id;
  CubeId parent;  // 0 for the root
  Lit lit;        // invalid for the root
  std::uint32_t depth = 0;
  std::uint32_t discrepancies = 0;
  NodeStatus status = NodeStatus::Open;
};

struct LeafRecord {
  CubeId id;
  Cube cube;
  Refuter refuter = Refuter::Lookahead;
  std::uint32_t discrepancies = 0;
  double difficulty = 0.0;
};

struct CubePhaseOutput {
  // Leaves in closing order. Emitted cubes are the Cutoff leaves.
  std::vector<LeafRecord> leaves;

  std::vector<Cube> emitted() const;
  std::vector<Cube> refuted() const;
  std::size_t count(Refuter r) const;
  std::map<std::uint32_t, std::size_t> discrepancy_histogram() const;
};

struct LookaheadOptions {
  Mode mode = Mode::Pure;
  std::size_t max_candidates = 256;
  HeuristicConfig heuristics;
  bool record_tree = true;
  // Picks the right-branch literal of a node instead of the lookahead
  // heuristic. Used to replay fixed decision trees.
  std::function<std::optional<Lit>(const CubeNode&)> branch_override;
};

enum class LaStatus { Running, Sat, Unsat, Exhausted };
const char* to_string(LaStatus s);

struct LookaheadStats {
  std::uint64_t steps = 0;
  std::uint64_t nodes = 0;
  std::uint64_t decisions_sent = 0;
  std::uint64_t solved_received = 0;
  std::uint64_t solved_discarded = 0;
  std::uint32_t max_depth = 0;
};

// The lookahead side of (concurrent) cube-and-conquer. The recursive
// search is unrolled onto an explicit stack; every step either enters one
// node (allocate id, read refutations, publish the decision) or expands the
// node on top (simplify, check, cut or decide).
class LookaheadPeer {
 public:
  LookaheadPeer(const CnfFormula& f, LookaheadOptions options,
                Channel<DecisionMsg>* decisions = nullptr,
                Channel<SolvedMsg>* solved = nullptr, TraceLog* trace = nullptr);

  LaStatus step();
  // Steps until the search finishes.
  LaStatus run();

  LaStatus status() const { return status_; }
  const Assignment& model() const { return model_; }
  const CubePhaseOutput& output() const { return output_; }
  const std::vector<NodeRecord>& nodes() const { return nodes_; }
  // "id parent lit status" per node, in id order.
  std::string dump_tree() const;
  // Path of open node ids, root first.
  std::vector<CubeId> id_trail() const;
  Cube current_cube() const;
  const LookaheadStats& stats() const { return stats_; }
  std::uint64_t propagations() const { return engine_.propagator().propagations(); }
  double cc_threshold() const { return cc_.value; }
  double ccc_threshold() const { return ccc_.value; }

  void set_event_sink(std::function<void(const PredictorEvent&)> sink) {
    event_sink_ = std::move(sink);
  }

 private:
  struct Frame {
    CubeId id;
    std::size_t record = 0;
    Lit decision;
    std::uint32_t depth = 0;
    std::uint32_t discrepancies = 0;
    std::size_t trail_mark = 0;
    bool expanded = false;
    Lit first, second;
    bool first_is_right = false;
    int children_done = 0;
    double difficulty = 0.0;
  };
  struct Pending {
    Lit lit;
    std::uint32_t discrepancies = 0;
  };

  LaStatus enter();
  LaStatus expand();
  void close_top(NodeStatus status);
  void unwind_to(CubeId refuted);
  void finish(LaStatus status);
  bool on_path(CubeId id) const;
  double node_difficulty(std::uint32_t depth) const;
  void add_leaf(const Frame& f, Refuter r);
  void emit(const PredictorEvent& e);
  void trace(const std::string& event);
  void set_status(const Frame& f, NodeStatus s);

  CnfFormula formula_;
  LookaheadOptions options_;
  Engine engine_;
  Channel<DecisionMsg>* decisions_;
  Channel<SolvedMsg>* solved_;
  TraceLog* trace_;

  std::vector<Frame> stack_;
  std::optional<Pending> pending_;
  bool started_ = false;
  std::uint64_t next_id_ = 0;
  std::size_t root_assigned_ = 0;
  std::uint64_t root_free_ = 0;

  CcThreshold cc_;
  CccThreshold ccc_;
  LaStatus status_ = LaStatus::Running;
  Assignment model_;
  CubePhaseOutput output_;
  std::vector<NodeRecord> nodes_;
  LookaheadStats stats_;
  std::function<void(const PredictorEvent&)> event_sink_;
};

}  // namespace ccc::lookahead
