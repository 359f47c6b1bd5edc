#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ccc/driver.hpp"
#include "ccc/verify.hpp"

using namespace ccc;
using namespace ccc::driver;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ccc_driver_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::uint64_t stat(const RunReport& r, const std::string& key) {
  const auto it = r.stats.find(key);
  return it == r.stats.end() ? 0 : std::stoull(it->second);
}

// Reads the "v" lines of a report back into an assignment.
Assignment model_from_report(const std::string& report, std::uint32_t num_vars) {
  Assignment a(num_vars);
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("v", 0) != 0) continue;
    std::istringstream words(line.substr(1));
    int lit;
    while (words >> lit)
      if (lit != 0) a.assign(Lit::from_dimacs(lit));
  }
  return a;
}

// K forces x22 once x1..x21 all hold, and the four gadget clauses then
// refute x22, so the only satisfying leaves need a late discrepancy.
CnfFormula gadget() {
  std::vector<std::vector<int>> cls;
  std::vector<int> k;
  for (int i = 1; i <= 21; ++i) k.push_back(-i);
  k.push_back(22);
  cls.push_back(k);
  for (int a : {23, -23})
    for (int b : {24, -24}) cls.push_back({-22, a, b});
  return make_formula(24, cls);
}

RunConfig low_thresholds(RunConfig c) {
  c.heuristics.ccc_init_threshold = 2.0;
  c.heuristics.cc_init_threshold = 2.0;
  return c;
}

}  // namespace

TEST_CASE("modes agree with the oracle") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const std::uint32_t n = 8 + seed % 10;
    const CnfFormula f = verify::random_3sat(n, static_cast<std::uint32_t>(n * 4.26), seed);
    const bool sat = verify::brute_force_solve(f).satisfiable;
    const Answer expected = sat ? Answer::Satisfiable : Answer::Unsatisfiable;

    std::vector<RunConfig> configs;
    for (RunMode m : {RunMode::Cdcl, RunMode::Lookahead, RunMode::CccInf, RunMode::Auto}) {
      RunConfig c;
      c.mode = m;
      configs.push_back(c);
    }
    for (CubeFlavor flavor : {CubeFlavor::Ccc, CubeFlavor::Cc}) {
      RunConfig c;
      c.mode = RunMode::Cube;
      c.cube = flavor;
      c.conquer_after = true;
      configs.push_back(low_thresholds(c));
    }
    for (const RunConfig& c : configs) {
      CAPTURE(to_string(c.mode));
      const RunReport r = run_formula(f, c);
      CHECK(r.answer == expected);
      if (sat) CHECK(verify::check_model(f, r.model));
      CHECK(r.stats.at("answer") == to_string(expected));
    }
  }
}

TEST_CASE("cube then conquer through a file") {
  int with_cubes = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const CnfFormula f = verify::random_3sat(16, 68, seed);
    const fs::path cnf = scratch("in.cnf");
    const fs::path icnf = scratch("out.icnf");
    fs::remove(icnf);
    write_text(cnf, serialize_dimacs(f));

    RunConfig cube = low_thresholds({});
    cube.mode = RunMode::Cube;
    cube.input = cnf.string();
    cube.icnf_out = icnf.string();
    const RunReport cubed = run(cube);
    if (cubed.answer != Answer::Unknown) continue;
    ++with_cubes;
    REQUIRE(fs::exists(icnf));
    CHECK(stat(cubed, "cubes_emitted") == conquer::read_icnf_file(icnf.string()).cubes.size());

    RunConfig conquer;
    conquer.mode = RunMode::Conquer;
    conquer.input = icnf.string();
    conquer.workers = 1 + seed % 3;
    const RunReport solved = run(conquer);

    RunConfig inf;
    inf.mode = RunMode::CccInf;
    CHECK(solved.answer == run_formula(f, inf).answer);
  }
  CHECK(with_cubes > 0);
}

TEST_CASE("report lines") {
  const CnfFormula f = verify::random_3sat(90, 300, 4);
  RunConfig c;
  c.mode = RunMode::Cdcl;
  const RunReport r = run_formula(f, c);
  REQUIRE(r.answer == Answer::Satisfiable);
  const std::string text = format_report(r);
  CHECK(text.find("s SATISFIABLE\n") != std::string::npos);
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) CHECK(line.size() <= 80);
  CHECK(text.size() >= 3);
  CHECK(text.substr(text.size() - 3) == " 0\n");
  const Assignment back = model_from_report(text, f.num_vars);
  CHECK(back.is_total());
  CHECK(verify::check_model(f, back));
  CHECK(exit_code(Answer::Satisfiable) == 10);
  CHECK(exit_code(Answer::Unsatisfiable) == 20);
  CHECK(exit_code(Answer::Unknown) == 0);
  CHECK(exit_code(Answer::AbortedToCdcl) == 0);
}

TEST_CASE("usage errors") {
  RunConfig base;
  base.input = "x.cnf";
  CHECK_NOTHROW(validate(base));
  CHECK_THROWS_AS(validate(RunConfig{}), UsageError);
  CHECK_THROWS_AS(parse_mode("turbo"), UsageError);
  CHECK(parse_mode("ccc-inf") == RunMode::CccInf);

  RunConfig c = base;
  c.mode = RunMode::Cdcl;
  c.icnf_out = "o.icnf";
  CHECK_THROWS_AS(validate(c), UsageError);
  c = base;
  c.mode = RunMode::CccInf;
  c.conquer_after = true;
  CHECK_THROWS_AS(validate(c), UsageError);
  c = base;
  c.mode = RunMode::Lookahead;
  c.schedule_path = "s.txt";
  CHECK_THROWS_AS(validate(c), UsageError);
  c = base;
  c.mode = RunMode::Cube;
  c.cube = CubeFlavor::Cc;
  c.schedule_path = "s.txt";
  CHECK_THROWS_AS(validate(c), UsageError);
  c = base;
  c.schedule_path = "s.txt";
  c.scheduler = protocol::SchedulerKind::Threads;
  CHECK_THROWS_AS(validate(c), UsageError);
  c = base;
  c.mode = RunMode::CccInf;
  c.predictor_budget = 5;
  CHECK_THROWS_AS(validate(c), UsageError);
  c = base;
  c.workers = 0;
  CHECK_THROWS_AS(validate(c), UsageError);
  c = base;
  c.budget_seconds = 0.0;
  CHECK_THROWS_AS(validate(c), UsageError);
  c = base;
  c.mode = RunMode::Conquer;
  CHECK_THROWS_AS(run_formula(make_formula(1, {{1}}), c), UsageError);
}

TEST_CASE("auto mode hands over to cdcl") {
  const fs::path schedule = scratch("la_heavy.txt");
  write_text(schedule, "LA*200\nrr\n");
  RunConfig c;
  c.mode = RunMode::Auto;
  c.schedule_path = schedule.string();

  c.fallback = false;
  const RunReport stopped = run_formula(gadget(), c);
  CHECK(stopped.answer == Answer::AbortedToCdcl);
  CHECK(stopped.aborted_to_cdcl);
  CHECK(stopped.stats.at("predictor_reason") == "too-many-discrepancies");
  CHECK(stat(stopped, "predictor_max_discrepancies") == 21);
  CHECK(format_report(stopped).find("s ABORTED-TO-CDCL\n") != std::string::npos);

  c.fallback = true;
  const RunReport solved = run_formula(gadget(), c);
  CHECK(solved.answer == Answer::Satisfiable);
  CHECK(solved.aborted_to_cdcl);
  CHECK(verify::check_model(gadget(), solved.model));
  CHECK(format_report(solved).find("c ABORTED-TO-CDCL\n") != std::string::npos);
}

TEST_CASE("auto mode verdicts on the predictor budget") {
  RunConfig c;
  c.mode = RunMode::Auto;
  c.predictor_budget = 2000;
  const RunReport dominated = run_formula(verify::random_3sat(50, 213, 3), c);
  CHECK(dominated.aborted_to_cdcl);
  CHECK(dominated.stats.at("predictor_reason") == "cdcl-dominates");
  CHECK(stat(dominated, "predictor_la_wins") <= 10);
  CHECK(dominated.answer == Answer::Satisfiable);

  c.predictor_budget = 20000;
  const RunReport kept = run_formula(verify::random_3sat(120, 511, 1), c);
  CHECK_FALSE(kept.aborted_to_cdcl);
  CHECK(kept.stats.at("predictor_verdict") == "continue");
  CHECK(stat(kept, "predictor_la_wins") >= 11);
  CHECK(kept.answer == Answer::Unsatisfiable);
}

TEST_CASE("leaf counts add up") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const CnfFormula f = verify::random_3sat(16, 68, seed);
    RunConfig c = low_thresholds({});
    c.mode = seed % 2 ? RunMode::Cube : RunMode::CccInf;
    const RunReport r = run_formula(f, c);
    const std::uint64_t leaves = stat(r, "leaves");
    CHECK(stat(r, "cubes_emitted") + stat(r, "cubes_refuted_la") + stat(r, "cubes_refuted_cdcl") ==
          leaves);
    std::uint64_t histogram = 0;
    for (const auto& [k, v] : r.stats)
      if (k.rfind("discrepancies.", 0) == 0) histogram += std::stoull(v);
    CHECK(histogram == leaves);
    CHECK(stat(r, "solved_received") + stat(r, "solved_discarded") <= stat(r, "solved_sent"));
  }
}

TEST_CASE("deterministic runs write identical files") {
  const CnfFormula f = verify::random_3sat(40, 170, 9);
  const fs::path cnf = scratch("det.cnf");
  write_text(cnf, serialize_dimacs(f));
  std::vector<std::string> stats, traces, reports;
  for (int i = 0; i < 3; ++i) {
    RunConfig c;
    c.mode = RunMode::CccInf;
    c.input = cnf.string();
    c.seed = 5;
    c.stats_out = scratch("det.stats").string();
    c.trace_out = scratch("det.trace").string();
    const RunReport r = run(c);
    stats.push_back(read_text(c.stats_out));
    traces.push_back(read_text(c.trace_out));
    reports.push_back(format_report(r));
  }
  CHECK(!traces[0].empty());
  CHECK(stats[0].find("wall_ms") == std::string::npos);
  for (int i = 1; i < 3; ++i) {
    CHECK(stats[i] == stats[0]);
    CHECK(traces[i] == traces[0]);
    CHECK(reports[i] == reports[0]);
  }
}
