#include "ccc/heuristics.hpp"

#include <algorithm>

namespace ccc {

double difficulty(std::uint64_t n_dec, std::uint64_t n_imp, std::uint64_t n_free) {
  if (n_free == 0) throw ZeroFreeVariables();
  const auto dec = static_cast<double>(n_dec);
  return dec * dec * (dec + static_cast<double>(n_imp)) /
         static_cast<double>(n_free);
}

CcThreshold cc_update(CcThreshold t, CcEvent event, const HeuristicConfig& cfg) {
  switch (event) {
    case CcEvent::LaSolvedCube:
    case CcEvent::TooDeep: return {t.value * cfg.cc_decay};
    case CcEvent::Decision: return {t.value * cfg.cc_growth};
  }
  return t;
}

double ccc_target(double d, CubeSolver solver, const HeuristicConfig& cfg) {
  return (solver == CubeSolver::CdclSolved ? cfg.ccc_cdcl_factor
                                           : cfg.ccc_la_factor) *
         d;
}

CccThreshold ccc_update(CccThreshold t, double d, CubeSolver solver,
                        const HeuristicConfig& cfg) {
  const double s = ccc_target(d, solver, cfg);
  return {cfg.ccc_filter * s + (1.0 - cfg.ccc_filter) * t.value};
}

CccThreshold ccc_on_cutoff(CccThreshold t, const HeuristicConfig& cfg) {
  return {t.value * cfg.ccc_cutoff_growth};
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Undecided: return "undecided";
    case Verdict::Continue: return "continue";
    case Verdict::AbortToCdcl: return "abort-to-cdcl";
  }
  return "?";
}

const char* to_string(AbortReason r) {
  switch (r) {
    case AbortReason::None: return "none";
    case AbortReason::TooManyDiscrepancies: return "too-many-discrepancies";
    case AbortReason::CdclDominates: return "cdcl-dominates";
  }
  return "?";
}

PredictorState predictor_observe(PredictorState state, PredictorEvent event,
                                 const HeuristicConfig& cfg) {
  const bool open = state.verdict == Verdict::Undecided;
  switch (event.kind) {
    case PredictorEvent::Kind::LaRefutedCube:
      ++state.la_wins;
      break;
    case PredictorEvent::Kind::LeafClosed: {
      const auto disc = static_cast<std::uint32_t>(event.value);
      state.max_leaf_discrepancies = std::max(state.max_leaf_discrepancies, disc);
      if (open && disc > cfg.predictor_discrepancy_limit) {
        state.verdict = Verdict::AbortToCdcl;
        state.reason = AbortReason::TooManyDiscrepancies;
      }
      break;
    }
    case PredictorEvent::Kind::Tick:
      state.spent = std::max(state.spent, event.value);
      if (open && state.spent >= state.budget) {
        if (state.la_wins <= cfg.predictor_min_la_wins) {
          state.verdict = Verdict::AbortToCdcl;
          state.reason = AbortReason::CdclDominates;
        } else {
          state.verdict = Verdict::Continue;
        }
      }
      break;
  }
  return state;
}

}  // namespace ccc
