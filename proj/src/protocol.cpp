#include "ccc/protocol.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ccc/channel.hpp"
#include "ccc/verify.hpp"

namespace ccc::protocol {

using lookahead::LaStatus;
using lookahead::LookaheadPeer;
using cdcl::CdclOutcome;
using cdcl::CdclPeer;

Schedule Schedule::round_robin() {
  Schedule s;
  s.round_robin_ = true;
  return s;
}

Schedule Schedule::parse(std::string_view text) {
  Schedule s;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream words(line);
    std::string tok;
    while (words >> tok) {
      if (s.round_robin_) throw ConfigError("schedule: tokens after 'rr'");
      if (tok == "rr") {
        s.round_robin_ = true;
        continue;
      }
      std::size_t repeat = 1;
      if (const auto star = tok.find('*'); star != std::string::npos) {
        const std::string count = tok.substr(star + 1);
        tok.resize(star);
        std::size_t used = 0;
        try {
          repeat = std::stoul(count, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == 0 || used != count.size())
          throw ConfigError("schedule: bad repeat count '" + count + "'");
      }
      Peer p;
      if (tok == "LA") p = Peer::Lookahead;
      else if (tok == "CDCL") p = Peer::Cdcl;
      else throw ConfigError("schedule: unknown token '" + tok + "'");
      s.script_.insert(s.script_.end(), repeat, p);
    }
  }
  return s;
}

Schedule Schedule::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schedule file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

Peer Schedule::at(std::size_t i) const {
  if (i < script_.size()) return script_[i];
  if (!round_robin_) throw ScheduleExhausted(i);
  return (i - script_.size()) % 2 == 0 ? Peer::Lookahead : Peer::Cdcl;
}

const char* to_string(AbortCause c) {
  switch (c) {
    case AbortCause::None: return "none";
    case AbortCause::TooManyDiscrepancies: return "predictor-too-many-discrepancies";
    case AbortCause::CdclDominates: return "predictor-cdcl-dominates";
    case AbortCause::Budget: return "budget";
  }
  return "?";
}

const char* to_string(CccOutcome::Kind k) {
  switch (k) {
    case CccOutcome::Kind::Sat: return "sat";
    case CccOutcome::Kind::Unsat: return "unsat";
    case CccOutcome::Kind::Aborted: return "aborted";
    case CccOutcome::Kind::Cubes: return "cubes";
  }
  return "?";
}

void validate(const CccConfig& config) {
  if (!lookahead::is_concurrent(config.mode))
    throw ConfigError(std::string("run_ccc needs a concurrent mode, got ") +
                      lookahead::to_string(config.mode));
  if (config.scheduler == SchedulerKind::Threads &&
      (!config.schedule.script().empty() || !config.schedule.continues_round_robin()))
    throw ConfigError("a schedule script only applies to the deterministic scheduler");
  if (config.scheduler == SchedulerKind::Threads && config.branch_override)
    throw ConfigError("branch overrides need the deterministic scheduler");
  if (config.predictor_budget && *config.predictor_budget == 0)
    throw ConfigError("predictor budget must be positive");
  if (config.budget_seconds && *config.budget_seconds <= 0)
    throw ConfigError("time budget must be positive");
  if (config.max_candidates == 0) throw ConfigError("max_candidates must be positive");
}

namespace {

AbortCause cause_of(const PredictorState& p) {
  switch (p.reason) {
    case AbortReason::TooManyDiscrepancies: return AbortCause::TooManyDiscrepancies;
    case AbortReason::CdclDominates: return AbortCause::CdclDominates;
    case AbortReason::None: break;
  }
  return AbortCause::None;
}

struct Session {
  Session(const CnfFormula& f, const CccConfig& config)
      : la(f, la_options(config), &decisions, &solved, &trace),
        cdcl(f, decisions, solved, config.cdcl, &trace) {
    cdcl.set_check_invariants(config.check_invariants);
  }

  static lookahead::LookaheadOptions la_options(const CccConfig& config) {
    lookahead::LookaheadOptions o;
    o.mode = config.mode;
    o.max_candidates = config.max_candidates;
    o.heuristics = config.heuristics;
    o.branch_override = config.branch_override;
    return o;
  }

  Channel<DecisionMsg> decisions;
  Channel<SolvedMsg> solved;
  TraceLog trace;
  LookaheadPeer la;
  CdclPeer cdcl;
};

// Result of one lookahead step, if it ends the run.
std::optional<CccOutcome> la_result(const LookaheadPeer& la) {
  CccOutcome out;
  out.winner = Peer::Lookahead;
  switch (la.status()) {
    case LaStatus::Running: return std::nullopt;
    case LaStatus::Sat:
      out.kind = CccOutcome::Kind::Sat;
      out.model = la.model();
      break;
    case LaStatus::Unsat: out.kind = CccOutcome::Kind::Unsat; break;
    case LaStatus::Exhausted: out.kind = CccOutcome::Kind::Cubes; break;
  }
  return out;
}

std::optional<CccOutcome> cdcl_result(const CdclOutcome& o) {
  CccOutcome out;
  out.winner = Peer::Cdcl;
  if (o.kind == CdclOutcome::Kind::Sat) {
    out.kind = CccOutcome::Kind::Sat;
    out.model = o.model;
    return out;
  }
  if (o.kind == CdclOutcome::Kind::Unsat) {
    out.kind = CccOutcome::Kind::Unsat;
    return out;
  }
  return std::nullopt;
}

CccOutcome aborted(AbortCause cause) {
  CccOutcome out;
  out.kind = CccOutcome::Kind::Aborted;
  out.reason = cause;
  return out;
}

void collect(CccOutcome& out, const Session& s, const PredictorState& predictor) {
  out.cubes = s.la.output();
  out.predictor = predictor;
  out.la_stats = s.la.stats();
  out.cdcl_stats = s.cdcl.stats();
  out.la_steps = s.la.stats().steps;
  out.cdcl_steps = s.cdcl.stats().steps;
  out.la_propagations = s.la.propagations();
  out.cdcl_propagations = s.cdcl.solver().stats().propagations;
  out.trace = s.trace.lines();
  out.tree = s.la.dump_tree();
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

CccOutcome run_deterministic(const CnfFormula& f, const CccConfig& config) {
  Session s(f, config);
  PredictorState predictor;
  predictor.budget = config.predictor_budget.value_or(2'000'000);
  if (config.predictor)
    s.la.set_event_sink([&](const PredictorEvent& e) {
      predictor = predictor_observe(predictor, e, config.heuristics);
    });

  const auto start = Clock::now();
  std::optional<CccOutcome> out;
  for (std::size_t i = 0; !out; ++i) {
    if (config.schedule.at(i) == Peer::Lookahead) {
      s.la.step();
      out = la_result(s.la);
    } else {
      out = cdcl_result(s.cdcl.step());
    }
    if (out) break;
    const std::uint64_t props = s.la.propagations() + s.cdcl.solver().stats().propagations;
    if (config.predictor) {
      predictor = predictor_observe(predictor, PredictorEvent::tick(props), config.heuristics);
      if (predictor.verdict == Verdict::AbortToCdcl) out = aborted(cause_of(predictor));
    }
    if (!out && config.budget_propagations && props >= *config.budget_propagations)
      out = aborted(AbortCause::Budget);
    if (!out && config.budget_seconds && seconds_since(start) >= *config.budget_seconds)
      out = aborted(AbortCause::Budget);
  }
  collect(*out, s, predictor);
  return *out;
}

CccOutcome run_threaded(const CnfFormula& f, const CccConfig& config) {
  Session s(f, config);
  PredictorState predictor;
  predictor.budget = config.predictor_budget.value_or(5000);
  if (config.predictor)
    s.la.set_event_sink([&](const PredictorEvent& e) {
      predictor = predictor_observe(predictor, e, config.heuristics);
    });

  std::atomic<bool> stop{false};
  std::mutex cell_mutex;
  std::optional<CccOutcome> cell;
  auto publish = [&](CccOutcome o) {
    std::lock_guard lock(cell_mutex);
    if (!cell) cell = std::move(o);
    stop.store(true, std::memory_order_release);
  };

  const auto start = Clock::now();
  auto over_budget = [&](std::uint64_t own_props) {
    if (config.budget_propagations && own_props >= *config.budget_propagations) return true;
    return config.budget_seconds && seconds_since(start) >= *config.budget_seconds;
  };

  std::thread la_thread([&] {
    while (!stop.load(std::memory_order_acquire)) {
      s.la.step();
      if (auto o = la_result(s.la)) return publish(std::move(*o));
      if (config.predictor) {
        const auto ms = static_cast<std::uint64_t>(seconds_since(start) * 1000.0);
        predictor = predictor_observe(predictor, PredictorEvent::tick(ms), config.heuristics);
        if (predictor.verdict == Verdict::AbortToCdcl)
          return publish(aborted(cause_of(predictor)));
      }
      if (over_budget(s.la.propagations())) return publish(aborted(AbortCause::Budget));
    }
  });
  std::thread cdcl_thread([&] {
    while (!stop.load(std::memory_order_acquire)) {
      if (auto o = cdcl_result(s.cdcl.step())) return publish(std::move(*o));
      if (over_budget(s.cdcl.solver().stats().propagations))
        return publish(aborted(AbortCause::Budget));
    }
  });
  la_thread.join();
  cdcl_thread.join();

  CccOutcome out = std::move(*cell);
  collect(out, s, predictor);
  return out;
}

}  // namespace

CccOutcome run_ccc(const CnfFormula& f, const CccConfig& config) {
  validate(config);
  CccOutcome out = config.scheduler == SchedulerKind::Threads ? run_threaded(f, config)
                                                              : run_deterministic(f, config);
  if (out.kind == CccOutcome::Kind::Sat && !verify::check_model(f, out.model))
    throw std::logic_error(std::string("model from ") + to_string(out.winner) +
                           " does not satisfy the formula");
  return out;
}

}  // namespace ccc::protocol
