#include "ccc/driver.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ccc/cdcl.hpp"
#include "ccc/lookahead.hpp"
#include "ccc/verify.hpp"

namespace ccc::driver {

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::Cdcl: return "cdcl";
    case RunMode::Lookahead: return "lookahead";
    case RunMode::CccInf: return "ccc-inf";
    case RunMode::Cube: return "cube";
    case RunMode::Conquer: return "conquer";
    case RunMode::Auto: return "auto";
  }
  return "?";
}

RunMode parse_mode(const std::string& s) {
  for (RunMode m : {RunMode::Cdcl, RunMode::Lookahead, RunMode::CccInf, RunMode::Cube,
                    RunMode::Conquer, RunMode::Auto})
    if (s == to_string(m)) return m;
  throw UsageError("unknown mode '" + s + "'");
}

const char* to_string(Answer a) {
  switch (a) {
    case Answer::Satisfiable: return "SATISFIABLE";
    case Answer::Unsatisfiable: return "UNSATISFIABLE";
    case Answer::Unknown: return "UNKNOWN";
    case Answer::AbortedToCdcl: return "ABORTED-TO-CDCL";
  }
  return "?";
}

int exit_code(Answer a) {
  switch (a) {
    case Answer::Satisfiable: return 10;
    case Answer::Unsatisfiable: return 20;
    default: return 0;
  }
}

void validate(const RunConfig& c) {
  if (c.input.empty()) throw UsageError("an input file is required");
  if (c.workers == 0) throw UsageError("--workers must be at least 1");
  if (c.mode != RunMode::Cube && !c.icnf_out.empty())
    throw UsageError("--icnf-out only applies to cube mode");
  if (c.mode != RunMode::Cube && c.conquer_after)
    throw UsageError("--conquer-after only applies to cube mode");
  const bool concurrent = c.mode == RunMode::CccInf || c.mode == RunMode::Auto ||
                          (c.mode == RunMode::Cube && c.cube == CubeFlavor::Ccc);
  if (!c.schedule_path.empty() && !concurrent)
    throw UsageError("--schedule needs a mode that runs both peers");
  if (!c.schedule_path.empty() && c.scheduler == protocol::SchedulerKind::Threads)
    throw UsageError("--schedule cannot be combined with the threaded scheduler");
  if (c.predictor_budget && c.mode != RunMode::Auto)
    throw UsageError("--predictor-budget only applies to auto mode");
  if (c.budget_seconds && *c.budget_seconds <= 0)
    throw UsageError("--budget-seconds must be positive");
}

namespace {

using Clock = std::chrono::steady_clock;

// Sets a flag once a wall-clock budget runs out.
class Watchdog {
 public:
  Watchdog(std::optional<double> seconds, std::atomic<bool>& flag) {
    if (!seconds) return;
    thread_ = std::thread([this, s = *seconds, &flag] {
      std::unique_lock lock(mutex_);
      if (!cv_.wait_for(lock, std::chrono::duration<double>(s), [this] { return done_; }))
        flag.store(true);
    });
  }
  ~Watchdog() {
    {
      std::lock_guard lock(mutex_);
      done_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  bool done_ = false;
  std::thread thread_;
};

cdcl::SolverOptions solver_options(const RunConfig& c) {
  cdcl::SolverOptions o;
  o.seed = c.seed;
  return o;
}

void put(RunReport& r, const std::string& key, const std::string& value) { r.stats[key] = value; }
void put(RunReport& r, const std::string& key, std::uint64_t value) {
  r.stats[key] = std::to_string(value);
}

void put_cubes(RunReport& r, const lookahead::CubePhaseOutput& out) {
  using lookahead::Refuter;
  put(r, "cubes_emitted", out.count(Refuter::Cutoff));
  put(r, "cubes_refuted_la", out.count(Refuter::Lookahead));
  put(r, "cubes_refuted_cdcl", out.count(Refuter::Cdcl));
  put(r, "leaves", out.leaves.size());
  for (const auto& [d, n] : out.discrepancy_histogram())
    put(r, "discrepancies." + std::to_string(d), n);
}

void put_ccc(RunReport& r, const protocol::CccOutcome& o) {
  put_cubes(r, o.cubes);
  put(r, "la_steps", o.la_steps);
  put(r, "cdcl_steps", o.cdcl_steps);
  put(r, "la_propagations", o.la_propagations);
  put(r, "cdcl_propagations", o.cdcl_propagations);
  put(r, "decisions_sent", o.la_stats.decisions_sent);
  put(r, "decisions_discarded", o.cdcl_stats.decisions_discarded);
  put(r, "solved_sent", o.cdcl_stats.cubes_refuted);
  put(r, "solved_received", o.la_stats.solved_received);
  put(r, "solved_discarded", o.la_stats.solved_discarded);
  put(r, "ccc_outcome", protocol::to_string(o.kind));
  if (o.kind == protocol::CccOutcome::Kind::Sat || o.kind == protocol::CccOutcome::Kind::Unsat)
    put(r, "winner", ccc::to_string(o.winner));
  if (o.kind == protocol::CccOutcome::Kind::Aborted)
    put(r, "abort_reason", protocol::to_string(o.reason));
  r.trace = o.trace;
}

void put_predictor(RunReport& r, const PredictorState& p) {
  put(r, "predictor_verdict", to_string(p.verdict));
  put(r, "predictor_reason", to_string(p.reason));
  put(r, "predictor_la_wins", p.la_wins);
  put(r, "predictor_max_discrepancies", p.max_leaf_discrepancies);
}

void set_model(RunReport& r, const CnfFormula& f, const Assignment& model) {
  if (!verify::check_model(f, model))
    throw std::logic_error("model does not satisfy the input formula");
  r.answer = Answer::Satisfiable;
  r.model = model;
}

void run_cdcl(RunReport& r, const CnfFormula& f, const RunConfig& c) {
  cdcl::Solver solver(f, solver_options(c));
  std::atomic<bool> stop{false};
  solver.set_interrupt(&stop);
  if (c.budget_propagations)
    solver.set_learn_hook([&](const Clause&) {
      if (solver.stats().propagations >= *c.budget_propagations) stop.store(true);
    });
  cdcl::SolveResult res;
  {
    Watchdog dog(c.budget_seconds, stop);
    res = solver.solve();
  }
  if (res.kind == cdcl::SolveResult::Kind::Sat) set_model(r, f, res.model);
  else if (res.kind == cdcl::SolveResult::Kind::Unsat) r.answer = Answer::Unsatisfiable;
  const auto& s = solver.stats();
  put(r, "cdcl_conflicts", s.conflicts);
  put(r, "cdcl_decisions", s.decisions);
  put(r, "cdcl_propagations", s.propagations);
  put(r, "cdcl_restarts", s.restarts);
  put(r, "cdcl_learned", s.learned);
}

protocol::CccConfig ccc_config(const RunConfig& c, lookahead::Mode mode) {
  protocol::CccConfig cfg;
  cfg.mode = mode;
  cfg.scheduler = c.scheduler;
  if (!c.schedule_path.empty()) cfg.schedule = protocol::Schedule::parse_file(c.schedule_path);
  cfg.heuristics = c.heuristics;
  cfg.cdcl = solver_options(c);
  cfg.budget_propagations = c.budget_propagations;
  cfg.budget_seconds = c.budget_seconds;
  cfg.predictor_budget = c.predictor_budget;
  return cfg;
}

// Applies a finished CCC run; returns false if it ended without an answer.
bool apply_ccc(RunReport& r, const CnfFormula& f, const protocol::CccOutcome& o) {
  put_ccc(r, o);
  switch (o.kind) {
    case protocol::CccOutcome::Kind::Sat: set_model(r, f, o.model); return true;
    case protocol::CccOutcome::Kind::Unsat: r.answer = Answer::Unsatisfiable; return true;
    default: return false;
  }
}

void conquer_into(RunReport& r, const conquer::IcnfDocument& doc, const RunConfig& c) {
  const conquer::ConquerResult res = c.workers > 1
                                         ? conquer::conquer_parallel(doc, c.workers, solver_options(c))
                                         : conquer::conquer_serial(doc, solver_options(c));
  put(r, "conquer_cubes", doc.cubes.size());
  put(r, "conquer_attempted", res.attempts.size());
  put(r, "conquer_workers", c.workers);
  put(r, "conquer_winning_cube", res.winning_cube_index);
  std::uint64_t conflicts = 0;
  for (const auto& a : res.attempts) conflicts += a.conflicts;
  put(r, "conquer_conflicts", conflicts);
  if (res.kind == conquer::ConquerResult::Kind::Sat) set_model(r, doc.formula, res.model);
  else if (res.kind == conquer::ConquerResult::Kind::Unsat) r.answer = Answer::Unsatisfiable;
}

void run_lookahead(RunReport& r, const CnfFormula& f, const RunConfig& c) {
  lookahead::LookaheadOptions o;
  o.mode = lookahead::Mode::Pure;
  o.heuristics = c.heuristics;
  lookahead::LookaheadPeer la(f, o);
  const auto start = Clock::now();
  while (la.step() == lookahead::LaStatus::Running) {
    if (c.budget_propagations && la.propagations() >= *c.budget_propagations) break;
    if (c.budget_seconds &&
        std::chrono::duration<double>(Clock::now() - start).count() >= *c.budget_seconds)
      break;
  }
  if (la.status() == lookahead::LaStatus::Sat) set_model(r, f, la.model());
  else if (la.status() == lookahead::LaStatus::Unsat) r.answer = Answer::Unsatisfiable;
  put_cubes(r, la.output());
  put(r, "la_steps", la.stats().steps);
  put(r, "la_propagations", la.propagations());
  put(r, "la_nodes", la.stats().nodes);
}

void run_cube(RunReport& r, const CnfFormula& f, const RunConfig& c) {
  lookahead::CubePhaseOutput cubes;
  if (c.cube == CubeFlavor::Cc) {
    lookahead::LookaheadOptions o;
    o.mode = lookahead::Mode::CcCutoff;
    o.heuristics = c.heuristics;
    lookahead::LookaheadPeer la(f, o);
    la.run();
    put_cubes(r, la.output());
    put(r, "la_steps", la.stats().steps);
    put(r, "la_propagations", la.propagations());
    if (la.status() == lookahead::LaStatus::Sat) return set_model(r, f, la.model());
    if (la.status() == lookahead::LaStatus::Unsat) {
      r.answer = Answer::Unsatisfiable;
      return;
    }
    cubes = la.output();
  } else {
    const auto o = protocol::run_ccc(f, ccc_config(c, lookahead::Mode::CccCutoff));
    if (apply_ccc(r, f, o) || o.kind != protocol::CccOutcome::Kind::Cubes) return;
    cubes = o.cubes;
  }
  conquer::IcnfDocument doc{f, cubes.emitted()};
  if (!c.icnf_out.empty()) conquer::write_icnf_file(doc, c.icnf_out);
  if (c.conquer_after) conquer_into(r, doc, c);
}

void run_auto(RunReport& r, const CnfFormula& f, const RunConfig& c) {
  protocol::CccConfig cfg = ccc_config(c, lookahead::Mode::CccInf);
  cfg.predictor = true;
  const auto o = protocol::run_ccc(f, cfg);
  put_predictor(r, o.predictor);
  if (apply_ccc(r, f, o)) return;
  if (o.reason != protocol::AbortCause::TooManyDiscrepancies &&
      o.reason != protocol::AbortCause::CdclDominates)
    return;
  r.aborted_to_cdcl = true;
  if (!c.fallback) {
    r.answer = Answer::AbortedToCdcl;
    return;
  }
  run_cdcl(r, f, c);
}

}  // namespace

RunReport run_formula(const CnfFormula& f, const RunConfig& c) {
  RunReport r;
  put(r, "mode", to_string(c.mode));
  put(r, "vars", f.num_vars);
  put(r, "clauses", f.clauses.size());
  const auto start = Clock::now();
  switch (c.mode) {
    case RunMode::Cdcl: run_cdcl(r, f, c); break;
    case RunMode::Lookahead: run_lookahead(r, f, c); break;
    case RunMode::CccInf: {
      const auto o = protocol::run_ccc(f, ccc_config(c, lookahead::Mode::CccInf));
      apply_ccc(r, f, o);
      break;
    }
    case RunMode::Cube: run_cube(r, f, c); break;
    case RunMode::Auto: run_auto(r, f, c); break;
    case RunMode::Conquer: throw UsageError("conquer mode reads an iCNF document");
  }
  // Wall time would make deterministic reports differ between runs.
  if (c.scheduler == protocol::SchedulerKind::Threads)
    put(r, "wall_ms", static_cast<std::uint64_t>(
                          std::chrono::duration<double, std::milli>(Clock::now() - start).count()));
  put(r, "answer", to_string(r.answer));
  return r;
}

RunReport run_conquer(const conquer::IcnfDocument& doc, const RunConfig& c) {
  RunReport r;
  put(r, "mode", to_string(c.mode));
  put(r, "vars", doc.formula.num_vars);
  put(r, "clauses", doc.formula.clauses.size());
  conquer_into(r, doc, c);
  put(r, "answer", to_string(r.answer));
  return r;
}

RunReport run(const RunConfig& c) {
  validate(c);
  RunReport r = c.mode == RunMode::Conquer ? run_conquer(conquer::read_icnf_file(c.input), c)
                                           : run_formula(parse_dimacs_file(c.input), c);
  if (!c.stats_out.empty()) {
    std::ofstream out(c.stats_out);
    if (!out) throw std::runtime_error("cannot write " + c.stats_out);
    out << format_stats(r);
  }
  if (!c.trace_out.empty()) {
    std::ofstream out(c.trace_out);
    if (!out) throw std::runtime_error("cannot write " + c.trace_out);
    for (const auto& line : r.trace) out << line << '\n';
  }
  return r;
}

std::string format_stats(const RunReport& r) {
  std::string out;
  for (const auto& [k, v] : r.stats) out += k + "=" + v + "\n";
  return out;
}

std::string format_report(const RunReport& r) {
  std::ostringstream out;
  for (const auto& [k, v] : r.stats) out << "c " << k << '=' << v << '\n';
  if (r.aborted_to_cdcl) out << "c ABORTED-TO-CDCL\n";
  out << "s " << to_string(r.answer) << '\n';
  if (r.answer == Answer::Satisfiable) {
    std::string line = "v";
    for (std::uint32_t i = 1; i <= r.model.num_vars(); ++i) {
      const int lit = r.model.value(Var{i}) == LBool::True ? static_cast<int>(i)
                                                           : -static_cast<int>(i);
      const std::string tok = " " + std::to_string(lit);
      if (line.size() + tok.size() > 78) {
        out << line << '\n';
        line = "v";
      }
      line += tok;
    }
    out << line << " 0\n";
  }
  return out.str();
}

}  // namespace ccc::driver
