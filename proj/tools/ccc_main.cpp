#include <iostream>

#include "CLI11.hpp"
#include "ccc/driver.hpp"

int main(int argc, char** argv) {
  using namespace ccc;
  driver::RunConfig cfg;
  HeuristicConfig& h = cfg.heuristics;

  CLI::App app{"Concurrent cube-and-conquer SAT solver"};
  std::string mode = "auto", cube = "ccc", scheduler = "deterministic";
  std::uint64_t budget_props = 0, predictor_budget = 0;
  double budget_seconds = 0;

  app.add_option("input", cfg.input, "DIMACS file (iCNF in conquer mode)")->required();
  app.add_option("--mode", mode, "cdcl | lookahead | ccc-inf | cube | conquer | auto")
      ->check(CLI::IsMember({"cdcl", "lookahead", "ccc-inf", "cube", "conquer", "auto"}));
  app.add_option("--cube", cube, "cube mode heuristic: ccc (concurrent) or cc")
      ->check(CLI::IsMember({"ccc", "cc"}));
  app.add_flag("--conquer-after", cfg.conquer_after, "cube mode: conquer the emitted cubes");
  app.add_flag("!--no-fallback", cfg.fallback, "auto mode: stop after a predictor abort");
  app.add_option("--seed", cfg.seed);
  app.add_option("--scheduler", scheduler)->check(CLI::IsMember({"deterministic", "threads"}));
  app.add_option("--schedule", cfg.schedule_path, "deterministic schedule script")
      ->check(CLI::ExistingFile);
  app.add_option("--workers", cfg.workers, "conquer workers");
  auto* bp = app.add_option("--budget-propagations", budget_props);
  auto* bs = app.add_option("--budget-seconds", budget_seconds);
  auto* pb = app.add_option("--predictor-budget", predictor_budget,
                            "propagations (deterministic) or ms (threads)");
  app.add_option("--icnf-out", cfg.icnf_out);
  app.add_option("--stats-out", cfg.stats_out);
  app.add_option("--trace-out", cfg.trace_out);

  app.add_option("--cc-init-threshold", h.cc_init_threshold);
  app.add_option("--cc-decay", h.cc_decay);
  app.add_option("--cc-growth", h.cc_growth);
  app.add_option("--cc-too-deep", h.cc_too_deep);
  app.add_option("--ccc-init-threshold", h.ccc_init_threshold);
  app.add_option("--ccc-cdcl-factor", h.ccc_cdcl_factor);
  app.add_option("--ccc-la-factor", h.ccc_la_factor);
  app.add_option("--ccc-filter", h.ccc_filter);
  app.add_option("--ccc-cutoff-growth", h.ccc_cutoff_growth);
  app.add_option("--predictor-discrepancy-limit", h.predictor_discrepancy_limit);
  app.add_option("--predictor-min-la-wins", h.predictor_min_la_wins);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    cfg.mode = driver::parse_mode(mode);
    cfg.cube = cube == "cc" ? driver::CubeFlavor::Cc : driver::CubeFlavor::Ccc;
    cfg.scheduler = scheduler == "threads" ? protocol::SchedulerKind::Threads
                                           : protocol::SchedulerKind::Deterministic;
    if (bp->count()) cfg.budget_propagations = budget_props;
    if (bs->count()) cfg.budget_seconds = budget_seconds;
    if (pb->count()) cfg.predictor_budget = predictor_budget;
    const driver::RunReport report = driver::run(cfg);
    std::cout << driver::format_report(report);
    return driver::exit_code(report.answer);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
