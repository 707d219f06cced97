#include "ctmck/sim.hpp"

#include <cmath>
#include <limits>

#include "ctmck/engine.hpp"

namespace ctmck {

namespace {

constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Safety valve for unbounded-until walks on chains where neither the target
// nor a dead state is ever reached.
constexpr uint64_t kJumpCap = 100'000'000;

uint64_t splitmix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Accumulator {
  uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    double d = x - mean;
    mean += d / double(n);
    m2 += d * (x - mean);
  }
};

Estimate finish(const Accumulator& acc, const SimConfig& cfg) {
  Estimate e;
  e.mean = acc.mean;
  e.stddev = acc.n > 1 ? std::sqrt(acc.m2 / double(acc.n - 1)) : 0.0;
  e.replications = acc.n;
  e.seed = cfg.seed;
  e.confidence = cfg.confidence;
  double half = acc.n > 0 ? normal_quantile_two_sided(cfg.confidence) * e.stddev /
                                std::sqrt(double(acc.n))
                          : 0.0;
  e.ci_low = e.mean - half;
  e.ci_high = e.mean + half;
  return e;
}

double constant_time(const Ctmc& c, const ExprPtr& e, double fallback) {
  if (!e) return fallback;
  Env env;
  env.constants = &c.constants;
  Value v = eval(*e, env);
  if (!v.is_numeric()) throw ModelError("time bound must be numeric");
  double t = v.as_real();
  if (!(t >= 0.0) || !std::isfinite(t))
    throw ModelError("time bound must be finite and nonnegative, got " +
                     format_double(t));
  return t;
}

// One replication of an until formula: does the path admit a time t in [a, b]
// where phi2 holds and phi1 held at every earlier instant?
bool until_outcome(const Ctmc& c, const std::vector<uint8_t>& phi1,
                   const std::vector<uint8_t>& phi2, double a, double b,
                   SimStream& rng) {
  const double inf = std::numeric_limits<double>::infinity();
  uint32_t s = c.initial_state();
  double enter = 0.0;
  for (uint64_t jumps = 0;; ++jumps) {
    if (jumps > kJumpCap)
      throw NumericsError(
          "a simulated path took over 1e8 jumps without resolving the until "
          "formula; the target may be unreachable");
    Jump j = sample_jump(c, s, rng);
    double leave = j.transition < 0 ? inf : enter + j.sojourn;
    if (phi2[s]) {
      // A witness inside this sojourn needs phi1 on [0, t). When s itself
      // fails phi1 the only candidate is t == enter.
      bool witness = phi1[s] ? std::max(enter, a) <= std::min(leave, b)
                             : (enter >= a && enter <= b);
      if (witness) return true;
    }
    if (!phi1[s]) return false;
    if (leave > b) return false;
    if (j.transition < 0) return false;
    s = c.transitions[size_t(j.transition)].dst;
    enter = leave;
  }
}

bool next_outcome(const Ctmc& c, const std::vector<uint8_t>& target, double a,
                  double b, SimStream& rng) {
  Jump j = sample_jump(c, c.initial_state(), rng);
  if (j.transition < 0) return false;
  if (j.sojourn < a || j.sojourn > b) return false;
  return target[c.transitions[size_t(j.transition)].dst] != 0;
}

}  // namespace

SimStream::SimStream(uint64_t master_seed, uint64_t replication) {
  // Element `replication` of the splitmix64 stream rooted at the master seed;
  // replications can be drawn in any order.
  eng_.seed(splitmix64(master_seed + (replication + 1) * kGolden));
}

double SimStream::uniform() {
  // Top 53 bits, mapped to [0, 1). Spelled out so every platform agrees
  // byte-for-byte.
  return double(eng_() >> 11) * 0x1.0p-53;
}

double SimStream::exponential(double rate) {
  // log1p keeps precision near u = 0 and never sees log(0) since u < 1.
  return -std::log1p(-uniform()) / rate;
}

Jump sample_jump(const Ctmc& c, uint32_t state, SimStream& rng) {
  Jump j;
  double e = c.exit_rate(state);
  if (e <= 0.0) return j;
  j.sojourn = rng.exponential(e);
  double u = rng.uniform() * e;
  double acc = 0.0;
  uint32_t last = c.row_begin[state];
  for (uint32_t k = c.row_begin[state]; k < c.row_begin[state + 1]; ++k) {
    acc += c.transitions[k].rate;
    last = k;
    if (u < acc) break;
  }
  j.transition = int64_t(last);  // rounding slack falls on the final entry
  return j;
}

Estimate estimate_occupancy(const Ctmc& c, const std::vector<uint8_t>& target,
                            double t, const SimConfig& cfg) {
  Accumulator acc;
  for (uint64_t rep = 0; rep < cfg.replications; ++rep) {
    SimStream rng(cfg.seed, rep);
    uint32_t at_t = c.initial_state();
    simulate_path(c, t, rng,
                  [&](uint32_t s, double, double, int64_t) { at_t = s; });
    acc.add(target[at_t] ? 1.0 : 0.0);
  }
  return finish(acc, cfg);
}

Estimate estimate_path_probability(const Ctmc& c, const PathFormula& f,
                                   const SimConfig& cfg) {
  SolverOptions opt;
  double a = constant_time(c, f.interval.lo, 0.0);
  double b = constant_time(c, f.interval.hi,
                           std::numeric_limits<double>::infinity());
  if (a > b)
    throw ModelError("time interval is empty: lower bound " + format_double(a) +
                     " exceeds upper bound " + format_double(b));
  std::vector<uint8_t> phi2 = sat_states(c, *f.rhs, opt);
  Accumulator acc;
  if (f.kind == PathFormula::Kind::Next) {
    for (uint64_t rep = 0; rep < cfg.replications; ++rep) {
      SimStream rng(cfg.seed, rep);
      acc.add(next_outcome(c, phi2, a, b, rng) ? 1.0 : 0.0);
    }
  } else {
    std::vector<uint8_t> phi1 = sat_states(c, *f.lhs, opt);
    for (uint64_t rep = 0; rep < cfg.replications; ++rep) {
      SimStream rng(cfg.seed, rep);
      acc.add(until_outcome(c, phi1, phi2, a, b, rng) ? 1.0 : 0.0);
    }
  }
  return finish(acc, cfg);
}

Estimate estimate_reward(const Ctmc& c, const CompiledRewards& rewards,
                         double t, const SimConfig& cfg) {
  Accumulator acc;
  for (uint64_t rep = 0; rep < cfg.replications; ++rep) {
    SimStream rng(cfg.seed, rep);
    double total = 0.0;
    simulate_path(c, t, rng, [&](uint32_t s, double enter, double leave,
                                 int64_t transition) {
      total += rewards.state[s] * (leave - enter);
      if (transition >= 0) total += rewards.transition[size_t(transition)];
    });
    acc.add(total);
  }
  return finish(acc, cfg);
}

Estimate estimate_query(const Ctmc& c, const Property& p, const SimConfig& cfg) {
  const PropertyQuery& q = *p.query;
  Estimate e;
  switch (q.kind) {
    case PropertyQuery::Kind::Prob:
      e = estimate_path_probability(c, *q.path, cfg);
      break;
    case PropertyQuery::Kind::Reward: {
      const CompiledRewards* rw = c.find_rewards(q.reward_name);
      if (!rw)
        throw ModelError("unknown reward structure \"" + q.reward_name + "\"");
      double t = constant_time(c, q.time_bound, 0.0);
      e = estimate_reward(c, *rw, t, cfg);
      break;
    }
    case PropertyQuery::Kind::Steady:
      throw ModelError(
          "steady-state queries have no finite-horizon estimator; check them "
          "numerically instead");
  }
  if (p.divisor) {
    Env env;
    env.constants = &c.constants;
    Value v = eval(*p.divisor, env);
    if (!v.is_numeric()) throw ModelError("query divisor must be numeric");
    double d = v.as_real();
    if (d == 0.0) throw ModelError("query divisor evaluates to zero");
    e.mean /= d;
    e.ci_low /= d;
    e.ci_high /= d;
    e.stddev /= std::abs(d);
    if (d < 0.0) std::swap(e.ci_low, e.ci_high);
  }
  return e;
}

double normal_quantile_two_sided(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ModelError("confidence level must lie strictly between 0 and 1");
  // Invert the standard normal CDF at (1 + confidence) / 2 by Newton steps on
  // erfc; the rational seed is accurate enough that three steps hit 1 ulp.
  double p_tail = (1.0 - confidence) / 2.0;  // upper tail mass
  // Seed: Beasley-Springer-Moro style approximation around the tail.
  double t = std::sqrt(-2.0 * std::log(p_tail));
  double z = t - (2.30753 + 0.27061 * t) / (1.0 + t * (0.99229 + 0.04481 * t));
  for (int i = 0; i < 3; ++i) {
    double err = 0.5 * std::erfc(z / std::sqrt(2.0)) - p_tail;
    double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
    z += err / pdf;
  }
  return z;
}

}  // namespace ctmck
