#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ctmck/expr.hpp"

namespace ctmck {

// Query grammar over state formulas:
//
//   P=?[ F<=T s=5 ]            transient reachability probability
//   P>=0.99[ phi U[a,b] psi ]  probability threshold over a path formula
//   X[a,b] phi                 next-state within a time window
//   S=?[ s<=m ]                long-run probability of a state formula
//   R{"name"}=?[ C<=t ]        expected reward accumulated up to t
//   (R{"name"}=?[ C<=t ])/t    arithmetic post-processing (ratio form)
//
// State formulas are boolean expressions over model variables, quoted label
// references, and nested threshold queries. Path formulas appear only inside
// P[...]. Time bounds are expressions over model constants.

enum class Cmp { Ge, Gt, Le, Lt };

struct TimeInterval {
  ExprPtr lo;  // null means 0
  ExprPtr hi;  // null means unbounded
};

struct PathFormula {
  enum class Kind { Next, Until };
  Kind kind = Kind::Until;
  ExprPtr lhs;  // Until only; state formula holding before rhs
  ExprPtr rhs;  // target state formula
  TimeInterval interval;
};

struct PropertyQuery {
  enum class Kind { Prob, Steady, Reward };
  Kind kind = Kind::Prob;
  // Threshold form (P>=p, S<p, ...); empty means the numeric =? form.
  std::optional<Cmp> cmp;
  double threshold = 0.0;
  // Prob payload.
  std::shared_ptr<const PathFormula> path;
  // Steady payload.
  ExprPtr state_formula;
  // Reward payload.
  std::string reward_name;
  ExprPtr time_bound;
  SourcePos pos;
};

struct Property {
  std::shared_ptr<const PropertyQuery> query;
  ExprPtr divisor;   // optional: (query)/expr
  std::string text;  // source text as parsed, used in reports and CSVs
};

// Parses a single query.
Property parse_property(const std::string& text);

// Parses one query per line; blank lines and // comments are skipped.
std::vector<Property> parse_properties(const std::string& text);

std::string print_property(const Property& p);

}  // namespace ctmck
