#include <cmath>
#include <set>

#include "ctmck/engine.hpp"
#include "ctmck/ram.hpp"
#include "ctmck/sim.hpp"
#include "doctest.h"

using namespace ctmck;

namespace {

Ctmc build(const std::string& src) {
  return build_state_space(bind_constants(parse_model(src), {}));
}

const char* kTwoState =
    "ctmc\n"
    "module m\n x : [0..1] init 0;\n"
    " [] x=0 -> 1 : (x'=1);\n [] x=1 -> 3 : (x'=0);\nendmodule\n";

const char* kAbsorbing =
    "ctmc\n"
    "module m\n x : [0..1] init 0;\n [] x=0 -> 2 : (x'=1);\nendmodule\n";

SimConfig quick(uint64_t reps, uint64_t seed = 7) {
  SimConfig cfg;
  cfg.replications = reps;
  cfg.seed = seed;
  cfg.confidence = 0.99;
  return cfg;
}

Ctmc satellite() {
  return build_state_space(
      bind_constants(ram::satellite_model(ram::satellite_defaults()), {}));
}

bool brackets(const Estimate& e, double truth) {
  return e.ci_low <= truth && truth <= e.ci_high;
}

}  // namespace

TEST_CASE("streams are deterministic per (seed, replication) pair") {
  SimStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  bool all_equal = true, rep_differs = false, seed_differs = false;
  for (int i = 0; i < 64; ++i) {
    double va = a.uniform(), vb = b.uniform();
    all_equal = all_equal && va == vb;
    rep_differs = rep_differs || va != c.uniform();
    seed_differs = seed_differs || va != d.uniform();
  }
  CHECK(all_equal);
  CHECK(rep_differs);
  CHECK(seed_differs);
}

TEST_CASE("uniform draws land in the half-open unit interval") {
  SimStream s(1, 0);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double u = s.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("exponential draws have the requested mean") {
  SimStream s(5, 0);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double x = s.exponential(4.0);
    CHECK(x >= 0.0);
    sum += x;
  }
  CHECK(sum / n == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("sampled jumps follow rates and flag absorbing states") {
  Ctmc c = build(kAbsorbing);
  SimStream s(9, 0);
  Jump j = sample_jump(c, 0, s);
  CHECK(j.transition >= 0);
  CHECK(c.transitions[size_t(j.transition)].dst == 1);
  Jump stuck = sample_jump(c, 1, s);
  CHECK(stuck.transition == -1);

  // Branching state: empirical split tracks the 2:1 rate ratio.
  Ctmc race = build(
      "ctmc\nmodule m\n x : [0..2] init 0;\n"
      " [] x=0 -> 2 : (x'=1);\n [] x=0 -> 1 : (x'=2);\nendmodule\n");
  int to1 = 0;
  const int n = 60000;
  for (int i = 0; i < n; ++i) {
    SimStream rng(11, uint64_t(i));
    Jump jj = sample_jump(race, 0, rng);
    if (race.transitions[size_t(jj.transition)].dst == 1) ++to1;
  }
  CHECK(double(to1) / n == doctest::Approx(2.0 / 3.0).epsilon(0.02));
}

TEST_CASE("mean sojourn in a unit-rate state is one") {
  Ctmc c = build(
      "ctmc\nmodule m\n x : [0..1] init 0;\n"
      " [] x=0 -> 1 : (x'=1);\n [] x=1 -> 1 : (x'=0);\nendmodule\n");
  double total = 0.0;
  uint64_t count = 0;
  SimStream rng(123, 0);
  uint32_t state = 0;
  for (int i = 0; i < 100000; ++i) {
    Jump j = sample_jump(c, state, rng);
    total += j.sojourn;
    ++count;
    state = c.transitions[size_t(j.transition)].dst;
  }
  CHECK(total / double(count) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("path simulation visits contiguous segments up to the horizon") {
  Ctmc c = build(kTwoState);
  SimStream rng(77, 0);
  double horizon = 25.0;
  double expect_start = 0.0;
  uint32_t segments = 0;
  bool saw_final = false;
  uint64_t jumps = simulate_path(c, horizon, rng,
                                 [&](uint32_t s, double enter, double leave, int64_t tr) {
                                   CHECK(enter == doctest::Approx(expect_start));
                                   CHECK(leave > enter);
                                   CHECK(s <= 1);
                                   expect_start = leave;
                                   ++segments;
                                   if (tr < 0) {
                                     CHECK(leave == horizon);
                                     saw_final = true;
                                   }
                                 });
  CHECK(saw_final);
  CHECK(segments == jumps + 1);
  CHECK(expect_start == horizon);
}

TEST_CASE("a path from an absorbing initial state is a single segment") {
  Ctmc c = build("ctmc\nmodule m\n x : [0..0] init 0;\nendmodule\n");
  SimStream rng(1, 0);
  int calls = 0;
  uint64_t jumps = simulate_path(c, 10.0, rng,
                                 [&](uint32_t s, double enter, double leave, int64_t tr) {
                                   ++calls;
                                   CHECK(s == 0);
                                   CHECK(enter == 0.0);
                                   CHECK(leave == 10.0);
                                   CHECK(tr == -1);
                                 });
  CHECK(calls == 1);
  CHECK(jumps == 0);
}

TEST_CASE("occupancy estimates bracket the transient distribution") {
  // Symmetric two-state chain at t=1: p1 = 0.5 (1 - e^{-2}) = 0.432332...
  Ctmc c = build(
      "ctmc\nmodule m\n x : [0..1] init 0;\n"
      " [] x=0 -> 1 : (x'=1);\n [] x=1 -> 1 : (x'=0);\nendmodule\n");
  Estimate e = estimate_occupancy(c, {0, 1}, 1.0, quick(200000));
  double truth = 0.5 * (1.0 - std::exp(-2.0));
  CHECK(brackets(e, truth));
  CHECK(e.mean == doctest::Approx(truth).epsilon(0.02));
  CHECK(e.replications == 200000);
  CHECK(e.ci_low <= e.mean);
  CHECK(e.mean <= e.ci_high);
}

TEST_CASE("occupancy at time zero is exact with zero variance") {
  Ctmc c = build(kTwoState);
  Estimate hit = estimate_occupancy(c, {1, 0}, 0.0, quick(1000));
  CHECK(hit.mean == 1.0);
  CHECK(hit.stddev == 0.0);
  CHECK(hit.ci_low == 1.0);
  CHECK(hit.ci_high == 1.0);
  Estimate miss = estimate_occupancy(c, {0, 1}, 0.0, quick(1000));
  CHECK(miss.mean == 0.0);
}

TEST_CASE("bounded reachability estimates bracket the exponential CDF") {
  Ctmc c = build(kAbsorbing);
  Property p = parse_property("P=?[F<=1 x=1]");
  Estimate e = estimate_path_probability(c, *p.query->path, quick(200000));
  CHECK(brackets(e, 1.0 - std::exp(-2.0)));
}

TEST_CASE("interval until estimates match the jump-window probability") {
  // Single rate-1 jump: witness iff the jump lands in [0.5, 1.5].
  Ctmc c = build(
      "ctmc\nmodule m\n x : [0..1] init 0;\n [] x=0 -> 1 : (x'=1);\nendmodule\n");
  Property p = parse_property("P=?[x=0 U[0.5,1.5] x=1]");
  Estimate e = estimate_path_probability(c, *p.query->path, quick(200000));
  CHECK(brackets(e, std::exp(-0.5) - std::exp(-1.5)));
}

TEST_CASE("unbounded until estimates settle absorbing races") {
  Ctmc race = build(
      "ctmc\nmodule m\n x : [0..2] init 0;\n"
      " [] x=0 -> 2 : (x'=1);\n [] x=0 -> 1 : (x'=2);\nendmodule\n");
  Property p = parse_property("P=?[true U x=1]");
  Estimate e = estimate_path_probability(race, *p.query->path, quick(200000));
  CHECK(brackets(e, 2.0 / 3.0));
}

TEST_CASE("next estimates respect the first-jump window") {
  Ctmc c = build(
      "ctmc\nmodule m\n x : [0..1] init 0;\n [] x=0 -> 3 : (x'=1);\nendmodule\n");
  Property p = parse_property("P=?[X<=1 x=1]");
  Estimate e = estimate_path_probability(c, *p.query->path, quick(200000));
  CHECK(brackets(e, 1.0 - std::exp(-3.0)));
}

TEST_CASE("reward estimates bracket the expected accumulation") {
  Ctmc c = build(kTwoState);
  CompiledRewards r;
  r.name = "up";
  r.state = {1.0, 0.0};
  r.transition.assign(c.transitions.size(), 0.0);
  Estimate e = estimate_reward(c, r, 1.0, quick(200000));
  CHECK(brackets(e, 0.75 + (1.0 - std::exp(-4.0)) / 16.0));
}

TEST_CASE("the all-ones reward accumulates the horizon with zero variance") {
  Ctmc c = build(kTwoState);
  CompiledRewards r;
  r.name = "time";
  r.state = {1.0, 1.0};
  r.transition.assign(c.transitions.size(), 0.0);
  Estimate e = estimate_reward(c, r, 5.0, quick(2000));
  CHECK(e.mean == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(e.stddev <= 1e-12);
}

TEST_CASE("transition rewards count jumps") {
  // Expected jumps of a rate-2 absorbing edge by t=1: 1 - e^{-2}.
  Ctmc c = build(kAbsorbing);
  CompiledRewards r;
  r.name = "fires";
  r.state = {0.0, 0.0};
  r.transition.assign(c.transitions.size(), 1.0);
  Estimate e = estimate_reward(c, r, 1.0, quick(200000));
  CHECK(brackets(e, 1.0 - std::exp(-2.0)));
}

TEST_CASE("query estimation covers probabilities, rewards, and ratios") {
  Ctmc c = build(kTwoState +
                 std::string("rewards \"up\"\n x=0 : 1;\nendrewards\n"));
  Estimate prob = estimate_query(c, parse_property("P=?[F<=1 x=1]"), quick(50000));
  CHECK(prob.mean > 0.5);

  Estimate plain = estimate_query(c, parse_property("R{\"up\"}=?[C<=2]"), quick(50000));
  Estimate ratio = estimate_query(c, parse_property("(R{\"up\"}=?[C<=2])/2"), quick(50000));
  CHECK(ratio.mean == doctest::Approx(plain.mean / 2.0).epsilon(1e-12));
  CHECK(ratio.ci_low == doctest::Approx(plain.ci_low / 2.0).epsilon(1e-12));
  CHECK(ratio.ci_high == doctest::Approx(plain.ci_high / 2.0).epsilon(1e-12));
}

TEST_CASE("steady-state queries cannot be simulated") {
  Ctmc c = build(kTwoState);
  CHECK_THROWS_AS(estimate_query(c, parse_property("S=?[x=0]"), quick(10)),
                  ModelError);
}

TEST_CASE("threshold queries estimate their underlying probability") {
  Ctmc c = build(kTwoState);
  Estimate thr = estimate_query(c, parse_property("P>=0.5[F<=1 x=1]"), quick(20000));
  Estimate num = estimate_query(c, parse_property("P=?[F<=1 x=1]"), quick(20000));
  CHECK(thr.mean == num.mean);
}

TEST_CASE("estimates are bit-identical for a fixed seed") {
  Ctmc c = build(kTwoState);
  Property p = parse_property("P=?[F<=1 x=1]");
  Estimate a = estimate_query(c, p, quick(20000, 99));
  Estimate b = estimate_query(c, p, quick(20000, 99));
  CHECK(a.mean == b.mean);
  CHECK(a.ci_low == b.ci_low);
  CHECK(a.ci_high == b.ci_high);
  CHECK(a.stddev == b.stddev);
  Estimate other = estimate_query(c, p, quick(20000, 100));
  CHECK(a.mean != other.mean);
  CHECK(a.seed == 99);
  CHECK(other.seed == 100);
}

TEST_CASE("estimates agree with the numerical engine inside the interval") {
  Ctmc c = satellite();
  QueryResult truth = check(c, parse_property("P=?[F<=129600 s=3]"));
  Estimate e = estimate_query(c, parse_property("P=?[F<=129600 s=3]"), quick(100000));
  CHECK(brackets(e, truth.value));
}

TEST_CASE("normal quantiles match standard table values") {
  CHECK(normal_quantile_two_sided(0.90) == doctest::Approx(1.6448536269514722).epsilon(1e-8));
  CHECK(normal_quantile_two_sided(0.95) == doctest::Approx(1.959963984540054).epsilon(1e-8));
  CHECK(normal_quantile_two_sided(0.99) == doctest::Approx(2.5758293035489004).epsilon(1e-8));
  CHECK(normal_quantile_two_sided(0.999) == doctest::Approx(3.2905267314919255).epsilon(1e-8));
  CHECK_THROWS_AS(normal_quantile_two_sided(0.0), ModelError);
  CHECK_THROWS_AS(normal_quantile_two_sided(1.0), ModelError);
}

TEST_CASE("wider confidence never narrows the interval") {
  Ctmc c = build(kTwoState);
  Property p = parse_property("P=?[F<=1 x=1]");
  SimConfig c95 = quick(20000);
  c95.confidence = 0.95;
  SimConfig c99 = quick(20000);
  Estimate e95 = estimate_query(c, p, c95);
  Estimate e99 = estimate_query(c, p, c99);
  CHECK(e95.mean == e99.mean);
  CHECK(e99.ci_high - e99.ci_low > e95.ci_high - e95.ci_low);
  CHECK(e95.confidence == 0.95);
  CHECK(e99.confidence == 0.99);
}

TEST_CASE("an unreachable unbounded target trips the jump cap") {
  // true U x=2 with x=2 unreachable: every path loops forever, and the
  // unbounded-until sampler has no horizon to stop at.
  Ctmc c = build(kTwoState);
  Property p = parse_property("P=?[true U x=5999]");
  // x ranges over [0..1]; x=5999 is simply never true.
  SimConfig cfg = quick(2);
  CHECK_THROWS_AS(estimate_path_probability(c, *p.query->path, cfg), NumericsError);
}
