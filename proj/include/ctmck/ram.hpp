#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctmck/engine.hpp"
#include "ctmck/model.hpp"

namespace ctmck::ram {

// Parameters of the navigation-satellite case study. Field names follow the
// constant names used in the generated model files; times are hours.
struct RamParams {
  double r = 0.8;         // reliability at design life: P(no failure by MTBF)
  double mtbf = 129600;   // design life (15 years)
  double mttr = 24;       // repair/replacement turnaround
  double t_u = 4320;      // mean up time between unplanned interruptions
  double t_p = 4320;      // mean up time between planned interruptions
  double d_u = 1.45;      // unplanned interruption duration (calibrated, see
                          // the availability acceptance checks)
  double o = 1.7;         // planned interruption duration (calibrated)
  double p_b = 0.8;       // probability a failure is repairable on orbit
  double t_r = 24;        // replacement decision time
  double t_d = 1440;      // manufacture lead time
  double t_e = 4320;      // ground test time; carried for configuration
                          // compatibility, feeds no transition
  double p_y = 0.9;       // launch success probability
  double t_k = 24;        // positioning time after launch
  int n = 24;             // constellation: operational slots
  int m = 3;              // constellation: on-orbit spares
  double horizon = 129600;  // default query horizon T
};

// Table defaults: the single satellite repairs within a day; constellation
// repair means replacing a satellite, which takes five months.
RamParams satellite_defaults();
RamParams constellation_defaults();

struct Rates {
  double lambda;  // failure rate, from R(MTBF) = r = e^{-lambda MTBF}
  double mu;      // repair rate 1/MTTR
};
Rates derive_rates(double r, double mtbf, double mttr);

// Reliability curve R(t) = e^{-lambda t}.
double reliability_at(double lambda, double t);

// Model source generators. The bundled .ctmc files are exactly these texts at
// default parameters; a unit test keeps them in sync.
std::string satellite_source(const RamParams& p);
std::string constellation_source(const RamParams& p);

// Parsed (unbound) models from the generators.
ModelAst satellite_model(const RamParams& p);
ModelAst constellation_model(const RamParams& p);

// ---- parameter sweeps ----

// Grid lo, lo+step, ..., up to hi (inclusive within step*1e-9 slack).
struct SweepSpec {
  std::string param;
  double lo = 0.0, hi = 0.0, step = 1.0;
};
SweepSpec parse_sweep(const std::string& text);  // "name=lo:hi:step"
std::vector<double> sweep_grid(const SweepSpec& spec);

// One row per grid point per query, in grid order (ascending parameters).
struct SweepTable {
  std::vector<std::string> columns;  // param names..., "query", "value"
  struct Row {
    std::vector<double> params;
    std::string query;
    double value;
  };
  std::vector<Row> rows;
};

// Rebinds the swept constants at every grid point, rebuilds the chain, and
// checks every query. `jobs` > 1 distributes grid points over threads; the
// row order (and therefore the CSV bytes) is independent of jobs.
SweepTable run_sweep(const ModelAst& base, const std::vector<Property>& queries,
                     const std::vector<SweepSpec>& sweeps,
                     const SolverOptions& opt = {}, unsigned jobs = 1);

std::string sweep_csv(const SweepTable& t, int significant_digits = 6);

// ---- experiment manifests ----
//
// INI-style key-value text: a preamble naming the model (a builtin name
// "satellite"/"constellation" or a path relative to the manifest), then one
// [experiment] section per figure or property with query/sweep keys:
//
//   model = satellite
//   [availability_vs_planned_outage]
//   query = (R{"availability"}=?[C<=T])/T
//   sweep = o=1:48:3

struct Experiment {
  std::string name;
  std::vector<std::string> queries;
  std::vector<SweepSpec> sweeps;  // 0 = point values, 1 or 2 = sweep
};

struct Manifest {
  std::string name;   // stem of the file name
  std::string model;  // builtin name or path
  std::vector<Experiment> experiments;
};

Manifest parse_manifest(const std::string& text, const std::string& name);
Manifest load_manifest(const std::string& path);

// Result of one experiment: the table plus the CSV text written for it.
struct ExperimentResult {
  std::string name;
  SweepTable table;  // point experiments produce param-less rows
  std::string csv;
  std::string file;  // path written, empty when out_dir was empty
};

// Runs every experiment; writes <out_dir>/<manifest>__<experiment>.csv when
// out_dir is non-empty. Model resolution: builtin names use the ram-suite
// generators at default parameters; anything else is read relative to
// `base_dir` (the manifest's directory).
std::vector<ExperimentResult> run_manifest(const Manifest& m,
                                           const std::string& base_dir,
                                           const std::string& out_dir,
                                           const SolverOptions& opt = {},
                                           unsigned jobs = 1);

}  // namespace ctmck::ram
