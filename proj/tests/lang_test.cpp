#include <cmath>

#include "ctmck/model.hpp"
#include "ctmck/property.hpp"
#include "doctest.h"

using namespace ctmck;

namespace {

Value eval_const(const std::string& text) {
  ModelAst ast = parse_model("ctmc\nconst double v = " + text + ";\n");
  ModelAst bound = bind_constants(ast, {});
  return bound.resolved_constants.at("v");
}

Value eval_int_const(const std::string& text) {
  ModelAst ast = parse_model("ctmc\nconst int v = " + text + ";\n");
  ModelAst bound = bind_constants(ast, {});
  return bound.resolved_constants.at("v");
}

}  // namespace

TEST_CASE("command with two update alternatives parses into one command") {
  ModelAst ast = parse_model(
      "ctmc\nmodule m\n x : [0..2] init 0;\n"
      " [] x=0 -> 0.5:(x'=0) + 0.8:(x'=1);\nendmodule\n");
  REQUIRE(ast.modules.size() == 1);
  REQUIRE(ast.modules[0].commands.size() == 1);
  CHECK(ast.modules[0].commands[0].alternatives.size() == 2);
  CHECK(ast.modules[0].variables.size() == 1);
  CHECK(ast.modules[0].variables[0].name == "x");
}

TEST_CASE("empty module body yields zero commands") {
  ModelAst ast = parse_model("ctmc\nmodule m\n x : [0..2] init 0;\nendmodule\n");
  CHECK(ast.modules[0].commands.empty());
}

TEST_CASE("split commands parse as two distinct commands") {
  ModelAst ast = parse_model(
      "ctmc\nmodule m\n x : [0..2] init 0;\n"
      " [] x=0 -> 0.5:(x'=0);\n [] x=0 -> 0.8:(x'=1);\nendmodule\n");
  CHECK(ast.modules[0].commands.size() == 2);
}

TEST_CASE("pretty printing is a fixed point over parsing") {
  const char* sources[] = {
      "ctmc\nconst double a = 1.5;\nconst int k = 2;\n"
      "module m\n x : [0..3] init 1;\n y : [0..1];\n"
      " [go] x<3 & y=0 -> a*2 : (x'=x+1) & (y'=1) + 0.5 : true;\n"
      " [] x>0 -> 1/a : (x'=x-1);\nendmodule\n"
      "rewards \"speed\"\n [go] x=0 : 2;\n x>1 : a;\nendrewards\n"
      "label \"busy\" = x>0 | y=1;\n",
      "module m x:[0..2] init 0; [] x=0 -> 0.5:(x'=0) + 0.8:(x'=1); endmodule",
  };
  for (const char* src : sources) {
    std::string once = pretty_print(parse_model(src));
    std::string twice = pretty_print(parse_model(once));
    CHECK(once == twice);
  }
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_model("ctmc\nmodule m\n x : [0..2] init 0;\n [] x=0 -> ;\nendmodule\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("4:") != std::string::npos);
  }
}

TEST_CASE("initial value outside the declared range is rejected at parse time") {
  CHECK_THROWS_AS(parse_model("ctmc\nmodule m\n x : [0..2] init 7;\nendmodule\n"),
                  ParseError);
}

TEST_CASE("duplicate identifiers are rejected") {
  CHECK_THROWS_AS(parse_model("ctmc\nconst double a = 1;\nconst double a = 2;\n"),
                  ParseError);
  CHECK_THROWS_AS(
      parse_model("ctmc\nmodule m\n x : [0..1] init 0;\n x : [0..2] init 0;\nendmodule\n"),
      ParseError);
  CHECK_THROWS_AS(
      parse_model("ctmc\nconst int x = 1;\nmodule m\n x : [0..1] init 0;\nendmodule\n"),
      ParseError);
}

TEST_CASE("variables must be unique across modules") {
  CHECK_THROWS_AS(parse_model("ctmc\nmodule a\n x : [0..1] init 0;\nendmodule\n"
                              "module b\n x : [0..1] init 0;\nendmodule\n"),
                  ParseError);
}

TEST_CASE("division always produces a real value") {
  Value v = eval_const("7/2");
  CHECK(v.kind == Value::Kind::Real);
  CHECK(v.d == doctest::Approx(3.5));
}

TEST_CASE("arithmetic precedence matches conventional rules") {
  CHECK(eval_const("2+3*4").as_real() == 14.0);
  CHECK(eval_const("(2+3)*4").as_real() == 20.0);
  CHECK(eval_const("2-3-4").as_real() == -5.0);
  CHECK(eval_const("-2*3").as_real() == -6.0);
  CHECK(eval_const("12/3/2").as_real() == 2.0);
}

TEST_CASE("comparison and boolean operators evaluate correctly") {
  ModelAst ast = parse_model(
      "ctmc\nconst int a = 3;\n"
      "const double t = 1.5;\n"
      "label \"probe\" = a=3 & t<2 | !(a<=2);\n");
  ModelAst bound = bind_constants(ast, {});
  CHECK(bound.resolved_constants.at("a").i == 3);
}

TEST_CASE("builtin functions evaluate with standard semantics") {
  CHECK(eval_const("ln(exp(2))").as_real() == doctest::Approx(2.0));
  CHECK(eval_const("log(2.718281828459045)").as_real() == doctest::Approx(1.0));
  CHECK(eval_const("pow(2, 10)").as_real() == doctest::Approx(1024.0));
  CHECK(eval_const("exp(0)").as_real() == 1.0);
  Value mn = eval_int_const("min(3, 1, 2)");
  CHECK(mn.kind == Value::Kind::Int);
  CHECK(mn.i == 1);
  Value fl = eval_int_const("floor(2.7)");
  CHECK(fl.kind == Value::Kind::Int);
  CHECK(fl.i == 2);
  CHECK(eval_int_const("ceil(2.1)").i == 3);
  CHECK(eval_int_const("max(2, 5)").i == 5);
  CHECK(eval_const("min(1, 2.5)").kind == Value::Kind::Real);
}

TEST_CASE("unknown functions and bad arity are parse errors") {
  CHECK_THROWS_AS(eval_const("sqrt(2)"), ParseError);
  CHECK_THROWS_AS(eval_const("pow(2)"), ParseError);
  CHECK_THROWS_AS(eval_const("ln(1, 2)"), ParseError);
}

TEST_CASE("reserved words cannot name constants or variables") {
  CHECK_THROWS_AS(parse_model("ctmc\nconst double module = 1;\n"), ParseError);
  CHECK_THROWS_AS(parse_model("ctmc\nconst double min = 1;\n"), ParseError);
}

TEST_CASE("division by zero in a constant is an error") {
  CHECK_THROWS_AS(eval_const("1/0"), ModelError);
  CHECK_THROWS_AS(eval_const("ln(0)"), ModelError);
  CHECK_THROWS_AS(eval_const("ln(-1)"), ModelError);
}

TEST_CASE("constants may reference earlier and later constants acyclically") {
  ModelAst ast = parse_model(
      "ctmc\nconst double lambda = -ln(r) / MTBF;\n"
      "const double r = 0.8;\nconst double MTBF = 129600;\n");
  ModelAst bound = bind_constants(ast, {});
  CHECK(bound.resolved_constants.at("lambda").d ==
        doctest::Approx(1.7217866613750748e-06).epsilon(1e-12));
}

TEST_CASE("cyclic constants are rejected") {
  ModelAst ast = parse_model("ctmc\nconst double a = b;\nconst double b = a;\n");
  CHECK_THROWS_AS(bind_constants(ast, {}), ModelError);
}

TEST_CASE("a deferred constant requires an override") {
  ModelAst ast = parse_model("ctmc\nconst double a;\n");
  CHECK_THROWS_AS(bind_constants(ast, {}), ModelError);
  ModelAst bound = bind_constants(ast, {{"a", Value::real(2.5)}});
  CHECK(bound.resolved_constants.at("a").d == 2.5);
}

TEST_CASE("overrides rebind derived constants downstream") {
  ModelAst ast = parse_model(
      "ctmc\nconst double r = 0.8;\nconst double MTBF = 129600;\n"
      "const double lambda = -ln(r) / MTBF;\n");
  ModelAst bound = bind_constants(ast, {{"r", Value::real(0.5)}});
  CHECK(bound.resolved_constants.at("lambda").d ==
        doctest::Approx(-std::log(0.5) / 129600.0).epsilon(1e-14));
}

TEST_CASE("overriding an unknown constant is an error") {
  ModelAst ast = parse_model("ctmc\nconst double a = 1;\n");
  try {
    bind_constants(ast, {{"zz", Value::real(1)}});
    FAIL("expected an error");
  } catch (const ModelError& e) {
    CHECK(std::string(e.what()).find("unknown constant") != std::string::npos);
  }
}

TEST_CASE("integer constants accept exactly integral real overrides") {
  ModelAst ast = parse_model("ctmc\nconst int k = 1;\n");
  ModelAst bound = bind_constants(ast, {{"k", Value::real(24.0)}});
  CHECK(bound.resolved_constants.at("k").i == 24);
  CHECK_THROWS_AS(bind_constants(ast, {{"k", Value::real(2.5)}}), ModelError);
}

TEST_CASE("parse_overrides reads name=value pairs") {
  auto m = parse_overrides({"r=0.5", "k=-3", "MTTR=0.1"});
  CHECK(m.at("r").d == 0.5);
  CHECK(m.at("k").i == -3);
  CHECK(m.at("MTTR").d == 0.1);
  CHECK_THROWS_AS(parse_overrides({"r=0.5", "r=0.6"}), ModelError);
  CHECK_THROWS_AS(parse_overrides({"r"}), ModelError);
  CHECK_THROWS_AS(parse_overrides({"r=abc"}), ModelError);
}

TEST_CASE("guards must be boolean and rates numeric") {
  CHECK_THROWS_AS(
      bind_constants(parse_model("ctmc\nmodule m\n x : [0..1] init 0;\n"
                                 " [] x -> 1 : (x'=1);\nendmodule\n"),
                     {}),
      ModelError);
  CHECK_THROWS_AS(
      bind_constants(parse_model("ctmc\nmodule m\n x : [0..1] init 0;\n"
                                 " [] x=0 -> x=1 : (x'=1);\nendmodule\n"),
                     {}),
      ModelError);
}

TEST_CASE("constant rates must be strictly positive") {
  CHECK_THROWS_AS(
      bind_constants(parse_model("ctmc\nmodule m\n x : [0..1] init 0;\n"
                                 " [] x=0 -> 0 : (x'=1);\nendmodule\n"),
                     {}),
      ModelError);
  CHECK_THROWS_AS(
      bind_constants(parse_model("ctmc\nconst double neg = -2;\n"
                                 "module m\n x : [0..1] init 0;\n"
                                 " [] x=0 -> neg : (x'=1);\nendmodule\n"),
                     {}),
      ModelError);
}

TEST_CASE("updates must be integer typed and target the owning module") {
  CHECK_THROWS_AS(
      bind_constants(parse_model("ctmc\nmodule m\n x : [0..1] init 0;\n"
                                 " [] x=0 -> 1 : (x'=0.5);\nendmodule\n"),
                     {}),
      ModelError);
  try {
    bind_constants(parse_model("ctmc\nmodule a\n x : [0..1] init 0;\nendmodule\n"
                               "module b\n y : [0..1] init 0;\n"
                               " [] y=0 -> 1 : (x'=1);\nendmodule\n"),
                   {});
    FAIL("expected an error");
  } catch (const ModelError& e) {
    CHECK(std::string(e.what()).find("another module") != std::string::npos);
  }
}

TEST_CASE("reward actions must exist on some command") {
  CHECK_THROWS_AS(
      bind_constants(parse_model("ctmc\nmodule m\n x : [0..1] init 0;\n"
                                 " [] x=0 -> 1 : (x'=1);\nendmodule\n"
                                 "rewards \"w\"\n [nope] true : 1;\nendrewards\n"),
                     {}),
      ModelError);
}

TEST_CASE("variable ranges must be non-empty and hold the initial value") {
  CHECK_THROWS_AS(
      bind_constants(parse_model("ctmc\nconst int hi = -1;\n"
                                 "module m\n x : [0..hi] init 0;\nendmodule\n"),
                     {}),
      ModelError);
  ModelAst ast = parse_model("ctmc\nconst int i = 5;\n"
                             "module m\n x : [0..3] init i;\nendmodule\n");
  CHECK_THROWS_AS(bind_constants(ast, {}), ModelError);
  ModelAst ok = parse_model("ctmc\nconst int i = 2;\n"
                            "module m\n x : [0..3] init i;\nendmodule\n");
  CHECK_NOTHROW(bind_constants(ok, {}));
}

TEST_CASE("omitted init defaults to the range lower bound") {
  ModelAst ast = parse_model("ctmc\nmodule m\n x : [2..5];\nendmodule\n");
  CHECK(ast.modules[0].variables[0].init == nullptr);
}

// ---- property language ----

TEST_CASE("reachability query parses and prints canonically") {
  Property p = parse_property("P=?[F<=129600 s=5]");
  CHECK(p.query->kind == PropertyQuery::Kind::Prob);
  CHECK(p.query->path->kind == PathFormula::Kind::Until);
  CHECK(p.text == "P=?[F<=129600 s=5]");
}

TEST_CASE("unbounded until parses") {
  Property p = parse_property("P=?[!p2 U p1]");
  CHECK(p.query->path->kind == PathFormula::Kind::Until);
  CHECK(p.query->path->interval.lo == nullptr);
  CHECK(p.query->path->interval.hi == nullptr);
}

TEST_CASE("interval forms parse for until and next") {
  CHECK_NOTHROW(parse_property("P=?[x=0 U[2,5] x=1]"));
  CHECK_NOTHROW(parse_property("P=?[x=0 U>=2 x=1]"));
  CHECK_NOTHROW(parse_property("P=?[X<=3 x=1]"));
  CHECK_NOTHROW(parse_property("P=?[X[1,2] x=1]"));
  CHECK_NOTHROW(parse_property("P=?[F[8,9] x=1]"));
}

TEST_CASE("threshold queries parse with all four comparisons") {
  for (const char* q : {"P<=0.1[F<=1 x=1]", "P<0.1[F<=1 x=1]",
                        "P>=0.9[F<=1 x=1]", "P>0.9[F<=1 x=1]",
                        "S<=0.5[x=0]", "S>0.5[x=0]"}) {
    Property p = parse_property(q);
    CHECK(p.query->cmp.has_value());
  }
}

TEST_CASE("probability bounds outside [0,1] are rejected") {
  CHECK_THROWS_AS(parse_property("P<=1.5[F<=1 x=1]"), ParseError);
  CHECK_THROWS_AS(parse_property("S>=-0.1[x=0]"), ParseError);
}

TEST_CASE("reward queries parse with and without a ratio divisor") {
  Property plain = parse_property("R{\"num_replace\"}=?[C<=129600]");
  CHECK(plain.query->kind == PropertyQuery::Kind::Reward);
  CHECK(plain.query->reward_name == "num_replace");
  CHECK(plain.divisor == nullptr);

  Property ratio = parse_property("(R{\"availability\"}=?[C<=T])/T");
  CHECK(ratio.divisor != nullptr);
  CHECK(ratio.text == "(R{\"availability\"}=?[C<=T])/T");
}

TEST_CASE("only numeric queries accept a divisor") {
  CHECK_THROWS_AS(parse_property("(P>=0.5[F<=1 x=1])/2"), ParseError);
}

TEST_CASE("nested threshold queries parse as state formula atoms") {
  Property p = parse_property("P=?[F<=1 (P>=0.5[F<=1 x=1])]");
  CHECK(p.query->path->rhs->kind == Expr::Kind::Query);
}

TEST_CASE("property text round-trips through the printer") {
  for (const char* q :
       {"P=?[F<=129600 s=5]", "P=?[x=0 U[2,5] x=1]", "P=?[X<=3 x=1]",
        "S=?[s<=m]", "R{\"num_repair\"}=?[C<=T]",
        "(R{\"availability\"}=?[C<=T])/T", "P>=0.9[F<=1 x=1 | y=2]"}) {
    Property p = parse_property(q);
    Property again = parse_property(p.text);
    CHECK(p.text == again.text);
  }
}

TEST_CASE("property files take one query per line with comments") {
  auto props = parse_properties(
      "// anchors\nP=?[F<=T s=5]\n\nR{\"num_repair\"}=?[C<=T] // inline\n");
  REQUIRE(props.size() == 2);
  CHECK(props[0].text == "P=?[F<=T s=5]");
}

TEST_CASE("property file errors report the right line") {
  try {
    parse_properties("P=?[F<=1 x=1]\n\nP=?[oops\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("3:") != std::string::npos);
  }
}
