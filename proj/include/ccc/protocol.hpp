#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ccc/cdcl.hpp"
#include "ccc/formula.hpp"
#include "ccc/heuristics.hpp"
#include "ccc/lookahead.hpp"
#include "ccc/messages.hpp"

namespace ccc::protocol {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ScheduleExhausted : public std::runtime_error {
 public:
  explicit ScheduleExhausted(std::size_t steps)
      : std::runtime_error("schedule ended after " + std::to_string(steps) +
                           " steps before the search terminated"),
        steps_(steps) {}
  std::size_t steps() const { return steps_; }

 private:
  std::size_t steps_;
};

// Order in which the deterministic scheduler advances the peers. Scripts are
// whitespace separated tokens: "LA", "CDCL", "LA*5" (repeat) and a final
// "rr" that continues round-robin (LA first) once the script is used up.
// '#' starts a comment.
class Schedule {
 public:
  static Schedule round_robin();
  static Schedule parse(std::string_view text);
  static Schedule parse_file(const std::string& path);

  // Peer for step i; throws ScheduleExhausted past the end of a finite script.
  Peer at(std::size_t i) const;
  const std::vector<Peer>& script() const { return script_; }
  bool continues_round_robin() const { return round_robin_; }

 private:
  std::vector<Peer> script_;
  bool round_robin_ = false;
};

enum class SchedulerKind { Deterministic, Threads };

struct CccConfig {
  lookahead::Mode mode = lookahead::Mode::CccInf;
  SchedulerKind scheduler = SchedulerKind::Deterministic;
  Schedule schedule = Schedule::round_robin();
  bool predictor = false;
  // Predictor budget: total propagations of both peers when deterministic,
  // milliseconds when threaded. Defaults to 2'000'000 / 5000.
  std::optional<std::uint64_t> predictor_budget;
  HeuristicConfig heuristics;
  cdcl::SolverOptions cdcl;
  std::size_t max_candidates = 256;
  std::optional<std::uint64_t> budget_propagations;
  std::optional<double> budget_seconds;
  std::function<std::optional<Lit>(const lookahead::CubeNode&)> branch_override;
  bool check_invariants = false;
};

enum class AbortCause { None, TooManyDiscrepancies, CdclDominates, Budget };
const char* to_string(AbortCause c);

struct CccOutcome {
  enum class Kind { Sat, Unsat, Aborted, Cubes };
  Kind kind = Kind::Aborted;
  Assignment model;
  Peer winner = Peer::Lookahead;
  AbortCause reason = AbortCause::None;
  // Leaves of the cube tree; in ccc-cutoff mode the emitted cubes go to the
  // conquer phase.
  lookahead::CubePhaseOutput cubes;
  PredictorState predictor;
  lookahead::LookaheadStats la_stats;
  cdcl::PeerStats cdcl_stats;
  std::uint64_t la_steps = 0;
  std::uint64_t cdcl_steps = 0;
  std::uint64_t la_propagations = 0;
  std::uint64_t cdcl_propagations = 0;
  std::vector<std::string> trace;
  std::string tree;
};

const char* to_string(CccOutcome::Kind k);

void validate(const CccConfig& config);

// Runs the lookahead and CDCL peers on f until one of them decides it, the
// lookahead tree is exhausted (ccc-cutoff), the predictor aborts or a budget
// runs out. SAT models are checked against f before returning.
CccOutcome run_ccc(const CnfFormula& f, const CccConfig& config);

}  // namespace ccc::protocol
