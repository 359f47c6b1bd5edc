#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccc/conquer.hpp"
#include "ccc/formula.hpp"
#include "ccc/heuristics.hpp"
#include "ccc/protocol.hpp"

namespace ccc::driver {

enum class RunMode { Cdcl, Lookahead, CccInf, Cube, Conquer, Auto };
enum class CubeFlavor { Ccc, Cc };

const char* to_string(RunMode m);
RunMode parse_mode(const std::string& s);

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  RunMode mode = RunMode::Auto;
  std::string input;
  std::string icnf_out;
  std::string stats_out;
  std::string trace_out;
  CubeFlavor cube = CubeFlavor::Ccc;
  bool conquer_after = false;  // cube mode: also conquer the emitted cubes
  bool fallback = true;        // auto mode: run CDCL after a predictor abort
  std::uint64_t seed = 0;
  protocol::SchedulerKind scheduler = protocol::SchedulerKind::Deterministic;
  std::string schedule_path;
  HeuristicConfig heuristics;
  std::size_t workers = 1;
  std::optional<std::uint64_t> budget_propagations;
  std::optional<double> budget_seconds;
  std::optional<std::uint64_t> predictor_budget;
};

// Throws UsageError for option combinations the mode cannot honour.
void validate(const RunConfig& config);

enum class Answer { Satisfiable, Unsatisfiable, Unknown, AbortedToCdcl };
const char* to_string(Answer a);

struct RunReport {
  Answer answer = Answer::Unknown;
  bool aborted_to_cdcl = false;
  Assignment model;
  std::map<std::string, std::string> stats;
  std::vector<std::string> trace;
};

// Every mode but conquer, on an already parsed formula.
RunReport run_formula(const CnfFormula& f, const RunConfig& config);
RunReport run_conquer(const conquer::IcnfDocument& doc, const RunConfig& config);
// Reads config.input and writes the optional icnf/stats/trace files.
RunReport run(const RunConfig& config);

// "c"/"s"/"v" lines in SAT competition style.
std::string format_report(const RunReport& report);
std::string format_stats(const RunReport& report);
int exit_code(Answer a);

}  // namespace ccc::driver
