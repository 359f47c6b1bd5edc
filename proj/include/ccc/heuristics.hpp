#pragma once

#include <cstdint>
#include <stdexcept>

namespace ccc {

// Tunables for the cutoff thresholds and the effectiveness predictor. Every
// field is exposed on the command line under the key in its comment.
struct HeuristicConfig {
  double cc_init_threshold = 1000.0;  // cc-init-threshold
  double cc_decay = 0.7;              // cc-decay
  double cc_growth = 1.05;            // cc-growth
  std::uint32_t cc_too_deep = 50;     // cc-too-deep
  double ccc_init_threshold = 1000.0; // ccc-init-threshold
  double ccc_cdcl_factor = 0.4;       // ccc-cdcl-factor
  double ccc_la_factor = 3.0;         // ccc-la-factor
  double ccc_filter = 0.4;            // ccc-filter
  double ccc_cutoff_growth = 1.05;    // ccc-cutoff-growth
  std::uint32_t predictor_discrepancy_limit = 20;  // predictor-discrepancy-limit
  std::uint32_t predictor_min_la_wins = 10;        // predictor-min-la-wins
};

class ZeroFreeVariables : public std::invalid_argument {
 public:
  ZeroFreeVariables() : std::invalid_argument("difficulty needs n_free >= 1") {}
};

// Cube difficulty dec^2 * (dec + imp) / free. A high value predicts the cube
// is easy for CDCL.
double difficulty(std::uint64_t n_dec, std::uint64_t n_imp, std::uint64_t n_free);

struct CcThreshold {
  double value = 1000.0;
};

enum class CcEvent { LaSolvedCube, TooDeep, Decision };

CcThreshold cc_update(CcThreshold t, CcEvent event,
                      const HeuristicConfig& cfg = {});

struct CccThreshold {
  double value = 1000.0;
};

enum class CubeSolver { CdclSolved, LaSolved };

// Target for the filtered update: ccc-cdcl-factor * d or ccc-la-factor * d.
double ccc_target(double d, CubeSolver solver, const HeuristicConfig& cfg = {});
CccThreshold ccc_update(CccThreshold t, double d, CubeSolver solver,
                        const HeuristicConfig& cfg = {});
CccThreshold ccc_on_cutoff(CccThreshold t, const HeuristicConfig& cfg = {});

inline bool should_cut(double d, double threshold) { return d > threshold; }

enum class Verdict { Undecided, Continue, AbortToCdcl };
enum class AbortReason { None, TooManyDiscrepancies, CdclDominates };

const char* to_string(Verdict v);
const char* to_string(AbortReason r);

struct PredictorState {
  std::uint64_t la_wins = 0;
  std::uint32_t max_leaf_discrepancies = 0;
  std::uint64_t budget = 2'000'000;  // units agreed with the Tick producer
  std::uint64_t spent = 0;
  Verdict verdict = Verdict::Undecided;
  AbortReason reason = AbortReason::None;
};

struct PredictorEvent {
  enum class Kind { LaRefutedCube, LeafClosed, Tick };
  Kind kind;
  // LeafClosed: discrepancy count of the leaf. Tick: total budget units
  // consumed so far (monotone).
  std::uint64_t value = 0;

  static PredictorEvent la_refuted() { return {Kind::LaRefutedCube, 0}; }
  static PredictorEvent leaf_closed(std::uint32_t discrepancies) {
    return {Kind::LeafClosed, discrepancies};
  }
  static PredictorEvent tick(std::uint64_t spent) { return {Kind::Tick, spent}; }
};

// Once a verdict is reached further events only update counters.
PredictorState predictor_observe(PredictorState state, PredictorEvent event,
                                 const HeuristicConfig& cfg = {});

}  // namespace ccc
