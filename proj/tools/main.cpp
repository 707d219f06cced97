#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ctmck/format.hpp"
#include "ctmck/ram.hpp"
#include "ctmck/sim.hpp"

namespace {

struct CommonOpts {
  std::vector<std::string> overrides;
  double eps = 1e-10;
  bool eps_given = false;
  bool full_precision = false;
  std::string output;

  int digits() const { return full_precision ? 17 : 6; }
  ctmck::SolverOptions solver() const {
    ctmck::SolverOptions opt;
    opt.eps = eps;
    opt.steady_tol = eps;
    opt.linear_tol = eps;
    return opt;
  }
};

void add_common(CLI::App* cmd, CommonOpts& c, bool with_output = true) {
  cmd->add_option("-c,--const", c.overrides,
                  "override a model constant, name=value (repeatable)");
  cmd->add_option("--eps", c.eps,
                  "solver tolerance for transient, steady-state and "
                  "reachability solves (env CTMCK_EPS)")
      ->check(CLI::Range(1e-300, 1e-3));
  cmd->add_flag("--full-precision", c.full_precision,
                "print 17 significant digits instead of 6");
  if (with_output)
    cmd->add_option("-o,--output", c.output, "write results here instead of stdout");
}

// The flag wins over the environment; a malformed environment value is a
// usage error rather than a silent fallback.
void apply_eps_env(CLI::App* cmd, CommonOpts& c) {
  if (cmd->count("--eps") > 0) return;
  const char* env = std::getenv("CTMCK_EPS");
  if (!env) return;
  try {
    size_t used = 0;
    double v = std::stod(env, &used);
    if (used != std::string(env).size() || !(v > 0.0) || v > 1e-3)
      throw std::invalid_argument(env);
    c.eps = v;
  } catch (const std::exception&) {
    throw CLI::ValidationError("CTMCK_EPS",
                               "must be a number in (0, 1e-3], got \"" +
                                   std::string(env) + "\"");
  }
}

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ctmck::ModelError(std::string("cannot open ") + what + " " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ctmck::ModelError("cannot write " + path);
  out << text;
}

ctmck::Ctmc load_chain(const std::string& model_path,
                       const std::vector<std::string>& overrides) {
  ctmck::ModelAst ast = ctmck::parse_model(read_file(model_path, "model"));
  ctmck::ModelAst bound =
      ctmck::bind_constants(ast, ctmck::parse_overrides(overrides));
  ctmck::Ctmc c = ctmck::build_state_space(bound);
  for (const auto& w : c.warnings)
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  return c;
}

std::vector<ctmck::Property> load_queries(const std::vector<std::string>& inline_q,
                                          const std::string& props_file) {
  std::vector<ctmck::Property> out;
  for (const auto& q : inline_q) out.push_back(ctmck::parse_property(q));
  if (!props_file.empty()) {
    auto file_props = ctmck::parse_properties(read_file(props_file, "properties file"));
    out.insert(out.end(), file_props.begin(), file_props.end());
  }
  return out;
}

std::string data_dir() {
  if (const char* env = std::getenv("CTMCK_DATA_DIR")) return env;
#ifdef CTMCK_DATA_DIR
  return CTMCK_DATA_DIR;
#else
  return ".";
#endif
}

int run_check(const std::string& model, const std::vector<std::string>& inline_q,
              const std::string& props_file, const CommonOpts& common) {
  ctmck::Ctmc c = load_chain(model, common.overrides);
  auto props = load_queries(inline_q, props_file);
  auto results = ctmck::check_all(c, props, common.solver());
  int d = common.digits();
  if (common.output.empty()) {
    for (const auto& r : results) {
      if (r.numeric) {
        std::printf("%s = %s  (tolerance %s, %.3f s)\n", r.text.c_str(),
                    ctmck::format_sig(r.value, d).c_str(),
                    ctmck::format_sig(r.tolerance, 3).c_str(), r.seconds);
      } else {
        std::printf("%s = %s  (value %s, tolerance %s, %.3f s)\n", r.text.c_str(),
                    r.satisfied ? "true" : "false",
                    ctmck::format_sig(r.value, d).c_str(),
                    ctmck::format_sig(r.tolerance, 3).c_str(), r.seconds);
      }
    }
    return 0;
  }
  std::string csv = ctmck::csv_row({"query", "value", "tolerance", "seconds"});
  for (const auto& r : results)
    csv += ctmck::csv_row({r.text, ctmck::format_sig(r.value, d),
                           ctmck::format_sig(r.tolerance, 3),
                           ctmck::format_sig(r.seconds, 6)});
  write_output(common.output, csv);
  return 0;
}

int run_sweep_cmd(const std::string& model, const std::vector<std::string>& inline_q,
                  const std::string& props_file,
                  const std::vector<std::string>& sweep_args, unsigned jobs,
                  const CommonOpts& common) {
  ctmck::ModelAst ast = ctmck::parse_model(read_file(model, "model"));
  // CLI -c overrides become part of the base model; sweeps rebind on top.
  if (!common.overrides.empty())
    ast = ctmck::bind_constants(ast, ctmck::parse_overrides(common.overrides));
  auto props = load_queries(inline_q, props_file);
  std::vector<ctmck::ram::SweepSpec> sweeps;
  for (const auto& s : sweep_args) sweeps.push_back(ctmck::ram::parse_sweep(s));
  auto table = ctmck::ram::run_sweep(ast, props, sweeps, common.solver(), jobs);
  write_output(common.output, ctmck::ram::sweep_csv(table, common.digits()));
  return 0;
}

int run_simulate(const std::string& model, const std::vector<std::string>& inline_q,
                 const std::string& props_file, const ctmck::SimConfig& cfg,
                 const CommonOpts& common) {
  ctmck::Ctmc c = load_chain(model, common.overrides);
  auto props = load_queries(inline_q, props_file);
  int d = common.digits();
  std::string csv = ctmck::csv_row(
      {"query", "estimate", "ci_low", "ci_high", "replications", "seed"});
  for (const auto& p : props) {
    ctmck::Estimate est = ctmck::estimate_query(c, p, cfg);
    csv += ctmck::csv_row({p.text, ctmck::format_sig(est.mean, d),
                           ctmck::format_sig(est.ci_low, d),
                           ctmck::format_sig(est.ci_high, d),
                           std::to_string(est.replications),
                           std::to_string(est.seed)});
  }
  write_output(common.output, csv);
  return 0;
}

int run_export(const std::string& model, const std::string& format,
               const CommonOpts& common) {
  ctmck::Ctmc c = load_chain(model, common.overrides);
  std::string text = format == "dot" ? ctmck::export_dot(c) : ctmck::export_csv(c);
  write_output(common.output, text);
  return 0;
}

int run_ram(const std::string& name, const std::string& out_dir, unsigned jobs,
            const CommonOpts& common) {
  namespace fs = std::filesystem;
  fs::path manifest_path(name);
  if (!fs::exists(manifest_path)) {
    fs::path bundled = fs::path(data_dir()) / "experiments" / (name + ".exp");
    if (!fs::exists(bundled))
      throw ctmck::ModelError("no manifest file \"" + name +
                              "\" and no bundled manifest " + bundled.string());
    manifest_path = bundled;
  }
  ctmck::ram::Manifest m = ctmck::ram::load_manifest(manifest_path.string());
  std::string base_dir = manifest_path.parent_path().string();
  auto results =
      ctmck::ram::run_manifest(m, base_dir, out_dir, common.solver(), jobs);
  for (const auto& r : results) {
    if (!r.file.empty())
      std::printf("wrote %s (%zu rows)\n", r.file.c_str(), r.table.rows.size());
    else
      std::fputs(r.csv.c_str(), stdout);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CSL model checking for guarded-command CTMC models"};
  app.require_subcommand(1);

  std::string model, props_file, format = "dot", ram_name, ram_out = "results";
  std::vector<std::string> queries, sweep_args;
  unsigned jobs = 1;
  ctmck::SimConfig sim_cfg;
  CommonOpts common;

  CLI::App* check = app.add_subcommand("check", "evaluate queries on a model");
  check->add_option("model", model, "model file")->required();
  check->add_option("-q,--query", queries, "query text (repeatable)");
  check->add_option("-p,--props", props_file, "file with one query per line");
  add_common(check, common);

  CLI::App* sweep = app.add_subcommand("sweep", "evaluate queries over a parameter grid");
  sweep->add_option("model", model, "model file")->required();
  sweep->add_option("-q,--query", queries, "query text (repeatable)");
  sweep->add_option("-p,--props", props_file, "file with one query per line");
  sweep->add_option("--sweep", sweep_args, "name=lo:hi:step (repeatable, max 2)")
      ->required();
  sweep->add_option("--jobs", jobs, "worker threads for grid points")
      ->check(CLI::Range(1u, 256u));
  add_common(sweep, common);

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimates for queries");
  simulate->add_option("model", model, "model file")->required();
  simulate->add_option("-q,--query", queries, "query text (repeatable)");
  simulate->add_option("-p,--props", props_file, "file with one query per line");
  simulate->add_option("--replications", sim_cfg.replications, "paths per query");
  simulate->add_option("--seed", sim_cfg.seed, "master seed");
  simulate->add_option("--confidence", sim_cfg.confidence, "CI level")
      ->check(CLI::Range(1e-6, 1.0 - 1e-9));
  add_common(simulate, common);

  CLI::App* export_cmd = app.add_subcommand("export", "write the built state space");
  export_cmd->add_option("model", model, "model file")->required();
  export_cmd->add_option("--format", format, "dot or csv")
      ->check(CLI::IsMember({"dot", "csv"}));
  add_common(export_cmd, common);

  CLI::App* ram = app.add_subcommand("ram", "run a bundled experiment manifest");
  ram->add_option("manifest", ram_name,
                  "bundled name (e.g. single-reliability) or a .exp path")
      ->required();
  ram->add_option("--out", ram_out, "directory for result CSVs");
  ram->add_option("--jobs", jobs, "worker threads for grid points")
      ->check(CLI::Range(1u, 256u));
  add_common(ram, common, /*with_output=*/false);

  try {
    app.parse(argc, argv);
    apply_eps_env(app.get_subcommands().front(), common);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (check->parsed()) {
      if (queries.empty() && props_file.empty()) {
        std::fprintf(stderr, "check: give at least one query (-q) or a properties file (-p)\n");
        return 1;
      }
      return run_check(model, queries, props_file, common);
    }
    if (sweep->parsed()) {
      if (queries.empty() && props_file.empty()) {
        std::fprintf(stderr, "sweep: give at least one query (-q) or a properties file (-p)\n");
        return 1;
      }
      return run_sweep_cmd(model, queries, props_file, sweep_args, jobs, common);
    }
    if (simulate->parsed()) {
      if (queries.empty() && props_file.empty()) {
        std::fprintf(stderr, "simulate: give at least one query (-q) or a properties file (-p)\n");
        return 1;
      }
      return run_simulate(model, queries, props_file, sim_cfg, common);
    }
    if (export_cmd->parsed()) return run_export(model, format, common);
    if (ram->parsed()) return run_ram(ram_name, ram_out, jobs, common);
  } catch (const ctmck::NumericsError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const ctmck::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ctmck::ModelError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
