#include "ctmck/ram.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ctmck/format.hpp"

namespace ctmck::ram {

RamParams satellite_defaults() { return {}; }

RamParams constellation_defaults() {
  RamParams p;
  p.mttr = 3600;  // repair means manufacture + launch + positioning
  return p;
}

Rates derive_rates(double r, double mtbf, double mttr) {
  if (!(r > 0.0 && r < 1.0))
    throw ModelError("design reliability must lie strictly between 0 and 1, got " +
                     format_double(r));
  if (!(mtbf > 0.0))
    throw ModelError("MTBF must be positive, got " + format_double(mtbf));
  if (!(mttr > 0.0))
    throw ModelError("MTTR must be positive, got " + format_double(mttr));
  return {-std::log(r) / mtbf, 1.0 / mttr};
}

double reliability_at(double lambda, double t) { return std::exp(-lambda * t); }

namespace {

std::string num(double v) { return format_double(v); }

}  // namespace

std::string satellite_source(const RamParams& p) {
  std::string s;
  s += "ctmc\n\n";
  s += "// Navigation-satellite RAM model. One module tracks the operating mode;\n";
  s += "// failure handling runs through on-orbit repair or the replacement pipeline\n";
  s += "// (decision, manufacture, launch, positioning). Times in hours.\n\n";
  s += "const double r = " + num(p.r) + "; // reliability at design life\n";
  s += "const double MTBF = " + num(p.mtbf) + ";\n";
  s += "const double MTTR = " + num(p.mttr) + ";\n";
  s += "const double t_u = " + num(p.t_u) + "; // mean up time between unplanned interruptions\n";
  s += "const double t_p = " + num(p.t_p) + "; // mean up time between planned interruptions\n";
  s += "const double d_u = " + num(p.d_u) + "; // unplanned interruption duration\n";
  s += "const double o = " + num(p.o) + "; // planned interruption duration\n";
  s += "const double p_b = " + num(p.p_b) + "; // failure is repairable on orbit\n";
  s += "const double t_r = " + num(p.t_r) + "; // replacement decision time\n";
  s += "const double t_d = " + num(p.t_d) + "; // manufacture lead time\n";
  s += "const double t_e = " + num(p.t_e) + "; // ground test time, reserved\n";
  s += "const double p_y = " + num(p.p_y) + "; // launch success probability\n";
  s += "const double t_k = " + num(p.t_k) + "; // positioning time\n";
  s += "const double T = " + num(p.horizon) + "; // default query horizon\n";
  s += "const double lambda = -ln(r) / MTBF;\n";
  s += "const double mu = 1 / MTTR;\n\n";
  s += "// s: 0 normal, 1 planned interruption, 2 unplanned interruption, 3 failed,\n";
  s += "// 4 on-orbit repair, 5 replacement decision, 6 manufacture, 7 positioning\n";
  s += "module satellite\n";
  s += "  s : [0..7] init 0;\n\n";
  s += "  [] s=0 -> 1/t_p : (s'=1);\n";
  s += "  [] s=1 -> 1/o : (s'=0);\n";
  s += "  [u] s=0 -> 1/t_u : (s'=2);\n";
  s += "  [] s=2 -> 1/d_u : (s'=0);\n";
  s += "  [] s=0 -> lambda : (s'=3);\n";
  s += "  [d] s=3 -> p_b*mu : (s'=4);\n";
  s += "  [] s=3 -> (1-p_b)*mu : (s'=5);\n";
  s += "  [] s=4 -> p_b*mu : (s'=0);\n";
  s += "  [f] s=4 -> (1-p_b)*mu : (s'=5);\n";
  s += "  [] s=5 -> 1/t_r : (s'=6);\n";
  s += "  [g] s=6 -> p_y/t_d : (s'=7);\n";
  s += "  [e] s=6 -> (1-p_y)/t_d : (s'=7);\n";
  s += "  [] s=7 -> 1/t_k : (s'=0);\n";
  s += "endmodule\n\n";
  s += "rewards \"num_replace\"\n  [g] true : 1;\n  [e] true : 1;\nendrewards\n\n";
  s += "rewards \"num_repair\"\n  [d] true : 1;\nendrewards\n\n";
  s += "rewards \"num_repair_fail\"\n  [f] true : 1;\nendrewards\n\n";
  s += "rewards \"num_unplanned\"\n  [u] true : 1;\nendrewards\n\n";
  s += "rewards \"availability\"\n  s=0 : 1;\nendrewards\n\n";
  s += "label \"operational\" = s=0;\n";
  s += "label \"replacing\" = s>=5;\n";
  return s;
}

std::string constellation_source(const RamParams& p) {
  int total = p.n + p.m;
  std::string s;
  s += "ctmc\n\n";
  s += "// Satellite constellation as a birth-death chain over the number of failed\n";
  s += "// satellites. Full service needs n populated slots; m spares cover failures.\n";
  s += "// A single facility repairs (replaces) one satellite at a time.\n\n";
  s += "const double r = " + num(p.r) + ";\n";
  s += "const double MTBF = " + num(p.mtbf) + ";\n";
  s += "const double MTTR = " + num(p.mttr) + "; // manufacture, launch and position a replacement\n";
  s += "const int n = " + std::to_string(p.n) + "; // operational slots\n";
  s += "const int m = " + std::to_string(p.m) + "; // on-orbit spares\n";
  s += "const double T = " + num(p.horizon) + "; // default query horizon\n";
  s += "const double lambda = -ln(r) / MTBF;\n";
  s += "const double mu = 1 / MTTR;\n\n";
  s += "module constellation\n";
  s += "  s : [0..n+m] init 0; // failed satellites\n\n";
  s += "  // only satellites in active service fail; spares are cold\n";
  s += "  [] s<m -> n*lambda : (s'=s+1);\n";
  s += "  [a2] s=m -> n*lambda : (s'=s+1);\n";
  s += "  [] s>m & s<n+m -> (n+m-s)*lambda : (s'=s+1);\n\n";
  for (int k = 1; k <= total; ++k)
    s += "  [b" + std::to_string(k) + "] s=" + std::to_string(k) +
         " -> mu : (s'=s-1);\n";
  s += "endmodule\n\n";
  s += "rewards \"num_fail\"\n  [a2] true : 1;\nendrewards\n\n";
  s += "rewards \"num_repair\"\n";
  for (int k = 1; k <= total; ++k)
    s += "  [b" + std::to_string(k) + "] true : 1;\n";
  s += "endrewards\n\n";
  s += "rewards \"availability\"\n  s<=m : 1;\nendrewards\n\n";
  s += "label \"full_service\" = s<=m;\n";
  return s;
}

ModelAst satellite_model(const RamParams& p) {
  return parse_model(satellite_source(p));
}

ModelAst constellation_model(const RamParams& p) {
  return parse_model(constellation_source(p));
}

// ---- parameter sweeps ----

SweepSpec parse_sweep(const std::string& text) {
  auto bad = [&](const std::string& why) {
    throw ModelError("bad sweep \"" + text + "\": " + why +
                     " (expected name=lo:hi:step)");
  };
  auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) bad("missing name");
  SweepSpec spec;
  spec.param = text.substr(0, eq);
  std::string rest = text.substr(eq + 1);
  double parts[3];
  size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    size_t end = i < 2 ? rest.find(':', start) : rest.size();
    if (end == std::string::npos) bad("expected three colon-separated numbers");
    std::string piece = rest.substr(start, end - start);
    try {
      size_t used = 0;
      parts[i] = std::stod(piece, &used);
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      bad("\"" + piece + "\" is not a number");
    }
    start = end + 1;
  }
  spec.lo = parts[0];
  spec.hi = parts[1];
  spec.step = parts[2];
  if (!(spec.step > 0.0)) bad("step must be positive");
  if (spec.lo > spec.hi) bad("lower bound exceeds upper bound");
  return spec;
}

std::vector<double> sweep_grid(const SweepSpec& spec) {
  std::vector<double> grid;
  double slack = spec.step * 1e-9;
  for (uint64_t k = 0;; ++k) {
    double v = spec.lo + double(k) * spec.step;
    if (v > spec.hi + slack) break;
    grid.push_back(v);
  }
  return grid;
}

SweepTable run_sweep(const ModelAst& base, const std::vector<Property>& queries,
                     const std::vector<SweepSpec>& sweeps,
                     const SolverOptions& opt, unsigned jobs) {
  if (sweeps.size() > 2)
    throw ModelError("at most two parameters can be swept together, got " +
                     std::to_string(sweeps.size()));
  if (queries.empty()) throw ModelError("sweep needs at least one query");

  SweepTable table;
  for (const auto& s : sweeps) table.columns.push_back(s.param);
  table.columns.push_back("query");
  table.columns.push_back("value");

  // Cartesian grid, row-major in declaration order.
  std::vector<std::vector<double>> grids;
  for (const auto& s : sweeps) grids.push_back(sweep_grid(s));
  std::vector<std::vector<double>> points;
  if (sweeps.empty()) {
    points.push_back({});
  } else if (sweeps.size() == 1) {
    for (double v : grids[0]) points.push_back({v});
  } else {
    for (double a : grids[0])
      for (double b : grids[1]) points.push_back({a, b});
  }

  table.rows.resize(points.size() * queries.size());
  auto run_point = [&](size_t pi) {
    std::map<std::string, Value> overrides;
    for (size_t k = 0; k < sweeps.size(); ++k)
      overrides[sweeps[k].param] = Value::real(points[pi][k]);
    ModelAst bound = bind_constants(base, overrides);
    Ctmc chain = build_state_space(bound);
    for (size_t qi = 0; qi < queries.size(); ++qi) {
      QueryResult res = check(chain, queries[qi], opt);
      SweepTable::Row& row = table.rows[pi * queries.size() + qi];
      row.params = points[pi];
      row.query = queries[qi].text;
      row.value = res.value;
    }
  };

  unsigned workers = std::min<size_t>(jobs > 0 ? jobs : 1, points.size());
  if (workers <= 1) {
    for (size_t pi = 0; pi < points.size(); ++pi) run_point(pi);
  } else {
    // Grid points are independent; each writes to its own row slots, so the
    // assembled table is identical for any worker count.
    std::mutex fail_mu;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (size_t pi = w; pi < points.size(); pi += workers) {
          try {
            run_point(pi);
          } catch (...) {
            std::lock_guard<std::mutex> lock(fail_mu);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }
  return table;
}

std::string sweep_csv(const SweepTable& t, int significant_digits) {
  std::string out = csv_row(t.columns);
  std::vector<std::string> cells;
  for (const auto& row : t.rows) {
    cells.clear();
    for (double p : row.params) cells.push_back(format_sig(p, significant_digits));
    cells.push_back(row.query);
    cells.push_back(format_sig(row.value, significant_digits));
    out += csv_row(cells);
  }
  return out;
}

// ---- experiment manifests ----

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool filename_safe(const std::string& s) {
  if (s.empty()) return false;
  for (char ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-')
      return false;
  return true;
}

}  // namespace

Manifest parse_manifest(const std::string& text, const std::string& name) {
  auto fail = [&](int line, const std::string& why) {
    throw ModelError(name + " line " + std::to_string(line) + ": " + why);
  };
  Manifest m;
  m.name = name;
  Experiment* current = nullptr;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(lineno, "unterminated [experiment] header");
      std::string ename = trim(line.substr(1, line.size() - 2));
      if (!filename_safe(ename))
        fail(lineno, "experiment name must use letters, digits, '_' or '-'");
      for (const auto& e : m.experiments)
        if (e.name == ename) fail(lineno, "duplicate experiment \"" + ename + "\"");
      m.experiments.push_back({ename, {}, {}});
      current = &m.experiments.back();
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!current) {
      if (key == "model") {
        if (!m.model.empty()) fail(lineno, "model named twice");
        if (value.empty()) fail(lineno, "model name is empty");
        m.model = value;
      } else {
        fail(lineno, "unknown key \"" + key + "\" before the first experiment");
      }
      continue;
    }
    if (key == "query") {
      if (value.empty()) fail(lineno, "query is empty");
      current->queries.push_back(value);
    } else if (key == "sweep") {
      if (current->sweeps.size() == 2)
        fail(lineno, "an experiment sweeps at most two parameters");
      current->sweeps.push_back(parse_sweep(value));
    } else {
      fail(lineno, "unknown key \"" + key + "\" in experiment \"" +
                       current->name + "\"");
    }
  }
  if (m.model.empty()) fail(lineno, "manifest never names a model");
  if (m.experiments.empty()) fail(lineno, "manifest declares no experiments");
  for (const auto& e : m.experiments)
    if (e.queries.empty())
      throw ModelError(name + ": experiment \"" + e.name + "\" has no query");
  return m;
}

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open manifest " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), std::filesystem::path(path).stem().string());
}

std::vector<ExperimentResult> run_manifest(const Manifest& m,
                                           const std::string& base_dir,
                                           const std::string& out_dir,
                                           const SolverOptions& opt,
                                           unsigned jobs) {
  ModelAst base;
  if (m.model == "satellite") {
    base = satellite_model(satellite_defaults());
  } else if (m.model == "constellation") {
    base = constellation_model(constellation_defaults());
  } else {
    std::filesystem::path p(m.model);
    if (!p.is_absolute() && !base_dir.empty())
      p = std::filesystem::path(base_dir) / p;
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ModelError("cannot open model " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    base = parse_model(buf.str());
  }

  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  std::vector<ExperimentResult> results;
  for (const auto& exp : m.experiments) {
    std::vector<Property> queries;
    for (const auto& q : exp.queries) queries.push_back(parse_property(q));
    ExperimentResult res;
    res.name = exp.name;
    res.table = run_sweep(base, queries, exp.sweeps, opt, jobs);
    res.csv = sweep_csv(res.table);
    if (!out_dir.empty()) {
      std::filesystem::path file =
          std::filesystem::path(out_dir) / (m.name + "__" + exp.name + ".csv");
      std::ofstream out(file, std::ios::binary);
      if (!out) throw ModelError("cannot write " + file.string());
      out << res.csv;
      res.file = file.string();
    }
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace ctmck::ram
