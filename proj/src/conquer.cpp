#include "ccc/conquer.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ccc/verify.hpp"

namespace ccc::conquer {

MalformedIcnf::MalformedIcnf(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error("iCNF line " + std::to_string(line) + " column " +
                         std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

void append_lits(std::string& out, const std::vector<Lit>& lits) {
  for (Lit l : lits) {
    out += std::to_string(l.to_dimacs());
    out += ' ';
  }
  out += "0\n";
}

struct Located {
  std::vector<Lit> lits;
  std::size_t line;
  std::vector<std::size_t> columns;
};

// Parses "<int>... 0" starting at `pos`; the terminating 0 must end the line.
Located parse_lits(std::string_view line, std::size_t pos, std::size_t line_no) {
  Located out{{}, line_no, {}};
  bool terminated = false;
  while (true) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r'))
      ++pos;
    if (pos >= line.size()) break;
    if (terminated) throw MalformedIcnf("text after terminating 0", line_no, pos + 1);
    long long v = 0;
    const auto [end, ec] = std::from_chars(line.data() + pos, line.data() + line.size(), v);
    const std::size_t stop = static_cast<std::size_t>(end - line.data());
    if (ec != std::errc() || (stop < line.size() && line[stop] != ' ' &&
                              line[stop] != '\t' && line[stop] != '\r'))
      throw MalformedIcnf("invalid token", line_no, pos + 1);
    if (v < -2147483647LL || v > 2147483647LL)
      throw MalformedIcnf("literal out of range", line_no, pos + 1);
    if (v == 0) terminated = true;
    else {
      out.lits.push_back(Lit::from_dimacs(static_cast<int>(v)));
      out.columns.push_back(pos + 1);
    }
    pos = stop;
  }
  if (!terminated) throw MalformedIcnf("line does not end with 0", line_no, line.size() + 1);
  return out;
}

}  // namespace

std::string write_icnf(const IcnfDocument& doc) {
  std::string out = "p inccnf\n";
  for (const Clause& c : doc.formula.clauses) append_lits(out, c);
  for (const Cube& c : doc.cubes) {
    out += "a ";
    append_lits(out, c);
  }
  return out;
}

IcnfDocument parse_icnf(std::string_view text) {
  IcnfDocument doc;
  std::vector<Located> cubes;
  bool header = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == 'c') continue;
    if (!header) {
      if (line != "p inccnf") throw MalformedIcnf("expected header 'p inccnf'", line_no, 1);
      header = true;
      continue;
    }
    if (line[first] == 'p') throw MalformedIcnf("duplicate header", line_no, first + 1);
    if (line[first] == 'a') {
      cubes.push_back(parse_lits(line, first + 1, line_no));
      continue;
    }
    Located clause = parse_lits(line, first, line_no);
    for (Lit l : clause.lits)
      doc.formula.num_vars = std::max(doc.formula.num_vars, l.var().index);
    doc.formula.clauses.push_back(std::move(clause.lits));
  }
  if (!header) throw MalformedIcnf("missing header 'p inccnf'", line_no + 1, 1);
  for (Located& c : cubes) {
    for (std::size_t i = 0; i < c.lits.size(); ++i)
      if (c.lits[i].var().index > doc.formula.num_vars)
        throw MalformedIcnf("cube variable " + std::to_string(c.lits[i].var().index) +
                                " is not a formula variable",
                            c.line, c.columns[i]);
    doc.cubes.push_back(std::move(c.lits));
  }
  return doc;
}

IcnfDocument read_icnf_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_icnf(buf.str());
}

void write_icnf_file(const IcnfDocument& doc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << write_icnf(doc);
}

const char* to_string(ConquerResult::Kind k) {
  switch (k) {
    case ConquerResult::Kind::Sat: return "sat";
    case ConquerResult::Kind::Unsat: return "unsat";
    case ConquerResult::Kind::Unknown: return "unknown";
  }
  return "?";
}

namespace {

bool refuted(cdcl::SolveResult::Kind k) {
  return k == cdcl::SolveResult::Kind::Unsat ||
         k == cdcl::SolveResult::Kind::UnsatUnderAssumptions;
}

void check_sat_model(const IcnfDocument& doc, const Assignment& model, std::size_t index) {
  if (!verify::check_model(doc.formula, model) ||
      !cube_satisfied(doc.cubes[index - 1], model))
    throw std::logic_error("conquer model for cube " + std::to_string(index) +
                           " is wrong");
}

}  // namespace

ConquerResult conquer_serial(const IcnfDocument& doc, cdcl::SolverOptions options) {
  if (doc.cubes.empty()) throw EmptyCubeList();
  cdcl::Solver solver(doc.formula, options);
  ConquerResult out;
  out.claims_per_worker = {0};
  for (std::size_t i = 0; i < doc.cubes.size(); ++i) {
    const std::uint64_t before = solver.stats().conflicts;
    const cdcl::SolveResult r = solver.solve(doc.cubes[i]);
    out.attempts.push_back({i + 1, 0, r.kind, solver.stats().conflicts - before});
    ++out.claims_per_worker[0];
    if (r.kind == cdcl::SolveResult::Kind::Sat) {
      check_sat_model(doc, r.model, i + 1);
      out.kind = ConquerResult::Kind::Sat;
      out.model = r.model;
      out.winning_cube_index = i + 1;
      return out;
    }
    if (!refuted(r.kind)) return out;
  }
  out.kind = ConquerResult::Kind::Unsat;
  return out;
}

ConquerResult conquer_parallel(const IcnfDocument& doc, std::size_t k,
                               cdcl::SolverOptions options) {
  if (doc.cubes.empty()) throw EmptyCubeList();
  if (k == 0) throw std::invalid_argument("conquer_parallel needs k >= 1");

  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex cell_mutex;
  ConquerResult out;
  out.claims_per_worker.assign(k, 0);
  std::vector<std::vector<CubeAttempt>> per_worker(k);

  auto work = [&](std::size_t w) {
    cdcl::SolverOptions o = options;
    o.seed = options.seed + w;
    cdcl::Solver solver(doc.formula, o);
    solver.set_interrupt(&stop);
    while (!stop.load(std::memory_order_acquire)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_acq_rel);
      if (i >= doc.cubes.size()) return;
      ++out.claims_per_worker[w];
      const std::uint64_t before = solver.stats().conflicts;
      const cdcl::SolveResult r = solver.solve(doc.cubes[i]);
      per_worker[w].push_back({i + 1, w, r.kind, solver.stats().conflicts - before});
      if (r.kind == cdcl::SolveResult::Kind::Sat) {
        check_sat_model(doc, r.model, i + 1);
        std::lock_guard lock(cell_mutex);
        if (out.kind != ConquerResult::Kind::Sat) {
          out.kind = ConquerResult::Kind::Sat;
          out.model = r.model;
          out.winning_cube_index = i + 1;
        }
        stop.store(true, std::memory_order_release);
        return;
      }
    }
  };

  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < k; ++w) workers.emplace_back(work, w);
  for (auto& t : workers) t.join();

  for (auto& attempts : per_worker)
    out.attempts.insert(out.attempts.end(), attempts.begin(), attempts.end());
  std::sort(out.attempts.begin(), out.attempts.end(),
            [](const CubeAttempt& a, const CubeAttempt& b) { return a.index < b.index; });

  if (out.kind != ConquerResult::Kind::Sat) {
    const bool all = out.attempts.size() == doc.cubes.size() &&
                     std::all_of(out.attempts.begin(), out.attempts.end(),
                                 [](const CubeAttempt& a) { return refuted(a.result); });
    out.kind = all ? ConquerResult::Kind::Unsat : ConquerResult::Kind::Unknown;
  }
  return out;
}

}  // namespace ccc::conquer
