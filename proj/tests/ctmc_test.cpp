#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ctmck/ctmc.hpp"
#include "ctmck/ram.hpp"
#include "doctest.h"

using namespace ctmck;

namespace {

Ctmc build(const std::string& src,
           const std::map<std::string, Value>& overrides = {},
           const BuildOptions& opt = {}) {
  return build_state_space(bind_constants(parse_model(src), overrides), opt);
}

const char* kTwoState =
    "ctmc\n"
    "module m\n x : [0..1] init 0;\n"
    " [] x=0 -> 1 : (x'=1);\n [] x=1 -> 3 : (x'=0);\nendmodule\n";

Ctmc satellite() {
  return build_state_space(
      bind_constants(ram::satellite_model(ram::satellite_defaults()), {}));
}

Ctmc constellation() {
  return build_state_space(
      bind_constants(ram::constellation_model(ram::constellation_defaults()), {}));
}

}  // namespace

TEST_CASE("two-state chain builds with the declared rates") {
  Ctmc c = build(kTwoState);
  REQUIRE(c.n_states() == 2);
  CHECK(c.initial_state() == 0);
  CHECK(c.var("x") == 0);
  CHECK(c.valuation(0)[0] == 0);
  CHECK(c.valuation(1)[0] == 1);
  CHECK(c.exit_rate(0) == doctest::Approx(1.0));
  CHECK(c.exit_rate(1) == doctest::Approx(3.0));
  auto rm = c.rate_matrix();
  CHECK(rm.at({0, 1}) == doctest::Approx(1.0));
  CHECK(rm.at({1, 0}) == doctest::Approx(3.0));
  CHECK(c.jump_probability(0, 1) == doctest::Approx(1.0));
  CHECK(c.state_str(0) == "x=0");
}

TEST_CASE("building an unbound model is an error") {
  ModelAst ast = parse_model(kTwoState);
  CHECK_THROWS_AS(build_state_space(ast), ModelError);
}

TEST_CASE("synchronizing commands multiply their rates") {
  Ctmc c = build(
      "ctmc\n"
      "module a\n x : [0..1] init 0;\n [go] x=0 -> 0.5 : (x'=1);\nendmodule\n"
      "module b\n y : [0..1] init 0;\n [go] y=0 -> 0.8 : (y'=1);\nendmodule\n");
  REQUIRE(c.n_states() == 2);
  auto rm = c.rate_matrix();
  CHECK(rm.at({0, 1}) == doctest::Approx(0.4));
  CHECK(c.valuation(1)[0] == 1);
  CHECK(c.valuation(1)[1] == 1);
}

TEST_CASE("a labeled command with no partner in another module is silent") {
  // Module b declares action go but never enables it from y=1 states.
  Ctmc c = build(
      "ctmc\n"
      "module a\n x : [0..1] init 0;\n [go] x=0 -> 0.5 : (x'=1);\n"
      " [] x=1 -> 1 : (x'=0);\nendmodule\n"
      "module b\n y : [0..1] init 1;\n [go] y=0 -> 0.8 : (y'=1);\nendmodule\n");
  // go never fires: module b's guard is false everywhere reachable, and a
  // shared action needs every declaring module to participate.
  CHECK(c.rate_matrix().count({0, 1}) == 0);
  CHECK(c.n_states() == 1);
  CHECK(!c.warnings.empty());
}

TEST_CASE("parallel commands keep separate transition entries that sum in the rate matrix") {
  Ctmc c = build(
      "ctmc\nmodule m\n x : [0..1] init 0;\n"
      " [] x=0 -> 2 : (x'=1);\n [] x=0 -> 1 : (x'=1);\n"
      " [] x=1 -> 1 : (x'=0);\nendmodule\n");
  int parallel = 0;
  for (const auto& t : c.transitions)
    if (t.src == 0 && t.dst == 1) ++parallel;
  CHECK(parallel == 2);
  CHECK(c.rate_matrix().at({0, 1}) == doctest::Approx(3.0));
  CHECK(c.exit_rate(0) == doctest::Approx(3.0));
  CHECK(c.jump_probability(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("self-loops count toward the exit rate") {
  Ctmc c = build(
      "ctmc\nmodule m\n x : [0..1] init 0;\n"
      " [] x=0 -> 2 : true;\n [] x=0 -> 1 : (x'=1);\n"
      " [] x=1 -> 1 : (x'=0);\nendmodule\n");
  CHECK(c.exit_rate(0) == doctest::Approx(3.0));
  CHECK(c.jump_probability(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(c.jump_probability(0, 1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("timed jump probability follows the exponential race") {
  Ctmc c = build(
      "ctmc\nmodule m\n x : [0..2] init 0;\n"
      " [] x=0 -> 2 : (x'=1);\n [] x=0 -> 1 : (x'=2);\nendmodule\n");
  // E(0)=3, jump share to state x=1 is 2/3.
  double p1 = c.timed_jump_probability(0, 1, 1.0);
  CHECK(p1 == doctest::Approx((2.0 / 3.0) * (1.0 - std::exp(-3.0))).epsilon(1e-12));
  CHECK(c.timed_jump_probability(0, 1, 0.0) == 0.0);
  CHECK(c.timed_jump_probability(0, 1, 1e9) == doctest::Approx(2.0 / 3.0));
  double prev = 0.0;
  for (double t : {0.1, 0.5, 1.0, 2.0, 8.0}) {
    double p = c.timed_jump_probability(0, 1, t);
    CHECK(p >= prev);
    CHECK(p <= c.jump_probability(0, 1) + 1e-15);
    prev = p;
  }
}

TEST_CASE("embedded jump probabilities form a stochastic row for non-absorbing states") {
  Ctmc c = satellite();
  for (uint32_t s = 0; s < c.n_states(); ++s) {
    if (c.exit_rate(s) == 0.0) continue;
    double sum = 0.0;
    for (uint32_t t = 0; t < c.n_states(); ++t) sum += c.jump_probability(s, t);
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("deadlock states are kept absorbing and reported") {
  Ctmc c = build(
      "ctmc\nmodule m\n x : [0..1] init 0;\n [] x=0 -> 1 : (x'=1);\nendmodule\n");
  REQUIRE(c.n_states() == 2);
  CHECK(c.exit_rate(1) == 0.0);
  CHECK(c.jump_probability(1, 0) == 0.0);
  REQUIRE(!c.warnings.empty());
  CHECK(c.warnings[0].find("x=1") != std::string::npos);
}

TEST_CASE("exceeding the state cap raises an error naming the cap") {
  BuildOptions opt;
  opt.state_cap = 3;
  CHECK_THROWS_AS(build("ctmc\nmodule m\n x : [0..9] init 0;\n"
                        " [] x<9 -> 1 : (x'=x+1);\nendmodule\n",
                        {}, opt),
                  ModelError);
}

TEST_CASE("updates that leave the declared range name the variable and command") {
  try {
    build("ctmc\nmodule m\n x : [0..2] init 0;\n"
          " [] x<=2 -> 1 : (x'=x+1);\nendmodule\n");
    FAIL("expected an error");
  } catch (const ModelError& e) {
    std::string msg = e.what();
    CHECK(msg.find("x") != std::string::npos);
    CHECK(msg.find("[0..2]") != std::string::npos);
  }
}

TEST_CASE("state-dependent rates are validated per state") {
  CHECK_THROWS_AS(build("ctmc\nmodule m\n x : [0..2] init 2;\n"
                        " [] x>=0 -> x-1 : (x'=0);\nendmodule\n"),
                  ModelError);
  Ctmc ok = build(
      "ctmc\nconst int n = 3;\nmodule m\n x : [0..3] init 0;\n"
      " [] x<n -> (n-x)*0.5 : (x'=x+1);\nendmodule\n");
  CHECK(ok.exit_rate(0) == doctest::Approx(1.5));
  CHECK(ok.exit_rate(2) == doctest::Approx(0.5));
}

TEST_CASE("rate matrix keyed by valuation is invariant under command order") {
  const char* a =
      "ctmc\nmodule m\n x : [0..2] init 0;\n"
      " [] x=0 -> 1 : (x'=1);\n [] x=1 -> 2 : (x'=2);\n [] x=2 -> 3 : (x'=0);\n"
      " [] x=0 -> 0.5 : (x'=2);\nendmodule\n";
  const char* b =
      "ctmc\nmodule m\n x : [0..2] init 0;\n"
      " [] x=0 -> 0.5 : (x'=2);\n [] x=2 -> 3 : (x'=0);\n [] x=1 -> 2 : (x'=2);\n"
      " [] x=0 -> 1 : (x'=1);\nendmodule\n";
  CHECK(build(a).rate_matrix_by_valuation() == build(b).rate_matrix_by_valuation());
}

TEST_CASE("merged update alternatives equal split commands in the rate matrix") {
  const char* merged =
      "ctmc\nmodule m\n x : [0..2] init 0;\n"
      " [] x=0 -> 0.5:(x'=1) + 0.8:(x'=2);\n [] x>0 -> 1:(x'=0);\nendmodule\n";
  const char* split =
      "ctmc\nmodule m\n x : [0..2] init 0;\n"
      " [] x=0 -> 0.5:(x'=1);\n [] x=0 -> 0.8:(x'=2);\n [] x>0 -> 1:(x'=0);\nendmodule\n";
  CHECK(build(merged).rate_matrix_by_valuation() ==
        build(split).rate_matrix_by_valuation());
}

TEST_CASE("strong connectivity distinguishes irreducible from absorbing chains") {
  CHECK(build(kTwoState).strongly_connected());
  CHECK(!build("ctmc\nmodule m\n x : [0..1] init 0;\n"
               " [] x=0 -> 1 : (x'=1);\nendmodule\n")
             .strongly_connected());
  CHECK(constellation().strongly_connected());
}

TEST_CASE("satellite model has the expected shape") {
  Ctmc c = satellite();
  CHECK(c.n_states() == 8);
  CHECK(c.transitions.size() == 13);
  ram::RamParams defaults = ram::satellite_defaults();
  ram::Rates rates = ram::derive_rates(defaults.r, defaults.mtbf, defaults.mttr);
  CHECK(c.exit_rate(c.initial_state()) ==
        doctest::Approx(rates.lambda + 2.0 / 4320.0).epsilon(1e-12));
}

TEST_CASE("constellation model has the expected shape") {
  Ctmc c = constellation();
  CHECK(c.n_states() == 28);
  CHECK(c.transitions.size() == 54);
}

TEST_CASE("reward structures compile to state and transition vectors") {
  Ctmc c = satellite();
  const CompiledRewards* rep = c.find_rewards("num_replace");
  REQUIRE(rep != nullptr);
  CHECK(rep->state == std::vector<double>(c.n_states(), 0.0));
  REQUIRE(rep->transition.size() == c.transitions.size());
  int charged = 0;
  for (size_t i = 0; i < rep->transition.size(); ++i)
    if (rep->transition[i] != 0.0) {
      ++charged;
      CHECK(rep->transition[i] == 1.0);
      const std::string& act = c.actions[size_t(c.transitions[i].action)];
      CHECK((act == "g" || act == "e"));
    }
  CHECK(charged == 2);

  const CompiledRewards* avail = c.find_rewards("availability");
  REQUIRE(avail != nullptr);
  CHECK(avail->state[c.initial_state()] == 1.0);
  CHECK(c.find_rewards("nonexistent") == nullptr);
}

TEST_CASE("state-dependent reward values are evaluated per state") {
  Ctmc c = build(
      "ctmc\nmodule m\n x : [0..3] init 0;\n"
      " [] x<3 -> 1 : (x'=x+1);\n [] x>0 -> 1 : (x'=x-1);\nendmodule\n"
      "rewards \"level\"\n x>0 : 2*x;\nendrewards\n");
  const CompiledRewards* r = c.find_rewards("level");
  REQUIRE(r != nullptr);
  for (uint32_t s = 0; s < c.n_states(); ++s) {
    int x = c.valuation(s)[0];
    CHECK(r->state[s] == doctest::Approx(x > 0 ? 2.0 * x : 0.0));
  }
}

TEST_CASE("dot export lists every state and edge") {
  Ctmc c = build(kTwoState);
  std::string dot = export_dot(c);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("x=0") != std::string::npos);
  CHECK(dot.find("x=1") != std::string::npos);
  CHECK(dot.find("-> ") != std::string::npos);
  CHECK(dot.find("3") != std::string::npos);
}

TEST_CASE("csv export carries full-precision rates") {
  Ctmc c = build(
      "ctmc\nconst double r = 0.8;\nconst double MTBF = 129600;\n"
      "const double lambda = -ln(r) / MTBF;\n"
      "module m\n x : [0..1] init 0;\n [u] x=0 -> lambda : (x'=1);\nendmodule\n");
  std::string csv = export_csv(c);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "source,target,rate,action");
  std::string row;
  std::getline(in, row);
  CHECK(row.find("1.7217866613750748e-06") != std::string::npos);
  CHECK(row.find("u") != std::string::npos);
}

TEST_CASE("multi-variable modules explore the product space breadth first") {
  Ctmc c = build(
      "ctmc\nmodule a\n x : [0..1] init 0;\n [] x=0 -> 1 : (x'=1);\n"
      " [] x=1 -> 1 : (x'=0);\nendmodule\n"
      "module b\n y : [0..2] init 0;\n [] y<2 -> 2 : (y'=y+1);\n"
      " [] y=2 -> 2 : (y'=0);\nendmodule\n");
  CHECK(c.n_states() == 6);
  CHECK(c.n_vars() == 2);
  CHECK(c.state_str(0) == "x=0,y=0");
  // Interleaving: both modules act independently, so exit = 1 + 2 everywhere.
  for (uint32_t s = 0; s < c.n_states(); ++s)
    CHECK(c.exit_rate(s) == doctest::Approx(3.0));
}

TEST_CASE("unreachable valuations are never materialized") {
  Ctmc c = build(
      "ctmc\nmodule m\n x : [0..9] init 0;\n"
      " [] x=0 -> 1 : (x'=1);\n [] x=1 -> 1 : (x'=0);\nendmodule\n");
  CHECK(c.n_states() == 2);
}

TEST_CASE("random chains keep CSR offsets consistent") {
  std::mt19937 gen(7);
  for (int round = 0; round < 20; ++round) {
    std::uniform_int_distribution<int> nd(2, 5);
    int n = nd(gen);
    std::ostringstream src;
    src << "ctmc\nmodule m\n x : [0.." << n - 1 << "] init 0;\n";
    std::uniform_real_distribution<double> rd(0.1, 4.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        if (gen() % 2 == 0) continue;
        src << " [] x=" << i << " -> " << rd(gen) << " : (x'=" << j << ");\n";
      }
    src << " [] x=" << n - 1 << " -> 1 : (x'=0);\nendmodule\n";
    Ctmc c = build(src.str());
    REQUIRE(c.row_begin.size() == c.n_states() + 1);
    CHECK(c.row_begin.front() == 0);
    CHECK(c.row_begin.back() == c.transitions.size());
    for (uint32_t s = 0; s < c.n_states(); ++s) {
      double sum = 0.0;
      for (uint32_t k = c.row_begin[s]; k < c.row_begin[s + 1]; ++k) {
        CHECK(c.transitions[k].src == s);
        sum += c.transitions[k].rate;
      }
      CHECK(sum == doctest::Approx(c.exit_rate(s)).epsilon(1e-12));
    }
  }
}
