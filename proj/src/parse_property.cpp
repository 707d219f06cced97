#include "ctmck/property.hpp"

#include "parse_common.hpp"

namespace ctmck {

namespace {

const char* cmp_text(Cmp c) {
  switch (c) {
    case Cmp::Ge: return ">=";
    case Cmp::Gt: return ">";
    case Cmp::Le: return "<=";
    case Cmp::Lt: return "<";
  }
  return "?";
}

std::shared_ptr<const PropertyQuery> parse_query(Lexer& lx);

ExprPtr parse_state_formula(Lexer& lx) {
  ExprParseHooks hooks;
  hooks.allow_labels = true;
  hooks.query_atom = [](Lexer& l) -> ExprPtr {
    // A P/S/R identifier starts a nested query only ahead of the operator
    // syntax; "P<=0.5" alone is a comparison on a variable named P.
    if (!l.at(Tok::Ident)) return nullptr;
    const std::string& id = l.peek().text;
    bool starts_query = false;
    if (id == "R") {
      starts_query = l.peek(1).kind == Tok::LBrace;
    } else if (id == "P" || id == "S") {
      Tok t1 = l.peek(1).kind;
      if (t1 == Tok::EqQ) {
        starts_query = true;
      } else if (t1 == Tok::Le || t1 == Tok::Lt || t1 == Tok::Ge || t1 == Tok::Gt) {
        Tok t2 = l.peek(2).kind;
        starts_query = (t2 == Tok::Int || t2 == Tok::Real) &&
                       l.peek(3).kind == Tok::LBracket;
      }
    }
    if (!starts_query) return nullptr;
    SourcePos pos = l.peek().pos;
    return Expr::query_atom(parse_query(l), pos);
  };
  return parse_expr(lx, hooks);
}

// Reads the optional time window after X, F, or U:
//   <=b  ->  [0, b]      [a,b]  ->  both bounds
//   >=a  ->  [a, inf)    none   ->  [0, inf)
TimeInterval parse_interval(Lexer& lx) {
  TimeInterval iv;
  if (lx.accept(Tok::Le)) {
    iv.hi = parse_expr(lx);
  } else if (lx.accept(Tok::Ge)) {
    iv.lo = parse_expr(lx);
  } else if (lx.accept(Tok::LBracket)) {
    iv.lo = parse_expr(lx);
    lx.expect(Tok::Comma, "',' between interval bounds");
    iv.hi = parse_expr(lx);
    lx.expect(Tok::RBracket, "']' closing the interval");
  }
  return iv;
}

std::shared_ptr<PathFormula> parse_path(Lexer& lx) {
  auto path = std::make_shared<PathFormula>();
  if (lx.at_ident("X")) {
    lx.next();
    path->kind = PathFormula::Kind::Next;
    path->interval = parse_interval(lx);
    path->rhs = parse_state_formula(lx);
    return path;
  }
  if (lx.at_ident("F")) {
    Token f = lx.next();
    path->kind = PathFormula::Kind::Until;
    path->interval = parse_interval(lx);
    path->lhs = Expr::literal(Value::boolean(true), f.pos);
    path->rhs = parse_state_formula(lx);
    return path;
  }
  path->kind = PathFormula::Kind::Until;
  path->lhs = parse_state_formula(lx);
  lx.expect_ident("U");
  path->interval = parse_interval(lx);
  path->rhs = parse_state_formula(lx);
  return path;
}

double parse_threshold(Lexer& lx, bool is_probability) {
  bool neg = lx.accept(Tok::Minus);
  double v;
  if (lx.at(Tok::Int) || lx.at(Tok::Real)) {
    Token t = lx.next();
    v = t.kind == Tok::Int ? double(t.int_val) : t.real_val;
  } else {
    lx.fail("expected a numeric threshold");
    return 0;
  }
  if (neg) v = -v;
  if (is_probability && (v < 0.0 || v > 1.0))
    lx.fail("probability bound must lie in [0,1]");
  return v;
}

// Reads "=?", or a comparison + threshold, into the query.
void parse_bound(Lexer& lx, PropertyQuery& q, bool is_probability) {
  if (lx.accept(Tok::EqQ)) return;
  Cmp cmp;
  if (lx.accept(Tok::Ge)) {
    cmp = Cmp::Ge;
  } else if (lx.accept(Tok::Gt)) {
    cmp = Cmp::Gt;
  } else if (lx.accept(Tok::Le)) {
    cmp = Cmp::Le;
  } else if (lx.accept(Tok::Lt)) {
    cmp = Cmp::Lt;
  } else {
    lx.fail("expected '=?' or a probability bound");
    return;
  }
  q.cmp = cmp;
  q.threshold = parse_threshold(lx, is_probability);
}

std::shared_ptr<const PropertyQuery> parse_query(Lexer& lx) {
  auto q = std::make_shared<PropertyQuery>();
  q->pos = lx.peek().pos;
  if (lx.at_ident("P")) {
    lx.next();
    q->kind = PropertyQuery::Kind::Prob;
    parse_bound(lx, *q, true);
    lx.expect(Tok::LBracket, "'[' opening the path formula");
    q->path = parse_path(lx);
    lx.expect(Tok::RBracket, "']' closing the path formula");
    return q;
  }
  if (lx.at_ident("S")) {
    lx.next();
    q->kind = PropertyQuery::Kind::Steady;
    parse_bound(lx, *q, true);
    lx.expect(Tok::LBracket, "'[' opening the state formula");
    q->state_formula = parse_state_formula(lx);
    lx.expect(Tok::RBracket, "']' closing the state formula");
    return q;
  }
  if (lx.at_ident("R")) {
    lx.next();
    q->kind = PropertyQuery::Kind::Reward;
    lx.expect(Tok::LBrace, "'{' before the reward structure name");
    q->reward_name = lx.expect(Tok::String, "quoted reward structure name").text;
    lx.expect(Tok::RBrace, "'}' after the reward structure name");
    parse_bound(lx, *q, false);
    lx.expect(Tok::LBracket, "'[' opening the reward bound");
    lx.expect_ident("C");
    lx.expect(Tok::Le, "'<=' after C");
    q->time_bound = parse_expr(lx);
    lx.expect(Tok::RBracket, "']' closing the reward bound");
    return q;
  }
  lx.fail("expected a P, S, or R query");
  return nullptr;
}

Property parse_one(Lexer& lx) {
  Property p;
  if (lx.accept(Tok::LParen)) {
    p.query = parse_query(lx);
    lx.expect(Tok::RParen, "')' closing the query");
    if (lx.accept(Tok::Slash)) {
      if (p.query->cmp) lx.fail("only numeric =? queries can be divided");
      p.divisor = parse_expr(lx);
    }
  } else {
    p.query = parse_query(lx);
  }
  if (!lx.at(Tok::End)) lx.fail("unexpected trailing text after the query");
  p.text = print_property(p);
  return p;
}

void print_interval(const TimeInterval& iv, std::string& out) {
  if (!iv.lo && !iv.hi) return;
  if (!iv.lo) {
    out += "<=";
    out += print_expr(*iv.hi);
  } else if (!iv.hi) {
    out += ">=";
    out += print_expr(*iv.lo);
  } else {
    out += "[";
    out += print_expr(*iv.lo);
    out += ",";
    out += print_expr(*iv.hi);
    out += "]";
  }
}

bool is_literal_true(const ExprPtr& e) {
  return e && e->kind == Expr::Kind::Literal && e->lit.kind == Value::Kind::Bool &&
         e->lit.b;
}

void print_query_into(const PropertyQuery& q, std::string& out) {
  auto bound = [&] {
    if (!q.cmp) {
      out += "=?";
    } else {
      out += cmp_text(*q.cmp);
      out += format_double(q.threshold);
    }
  };
  switch (q.kind) {
    case PropertyQuery::Kind::Prob: {
      out += "P";
      bound();
      out += "[";
      const PathFormula& f = *q.path;
      if (f.kind == PathFormula::Kind::Next) {
        out += "X";
        print_interval(f.interval, out);
        out += " ";
        out += print_expr(*f.rhs);
      } else if (is_literal_true(f.lhs)) {
        out += "F";
        print_interval(f.interval, out);
        out += " ";
        out += print_expr(*f.rhs);
      } else {
        out += print_expr(*f.lhs);
        out += " U";
        print_interval(f.interval, out);
        out += " ";
        out += print_expr(*f.rhs);
      }
      out += "]";
      return;
    }
    case PropertyQuery::Kind::Steady:
      out += "S";
      bound();
      out += "[";
      out += print_expr(*q.state_formula);
      out += "]";
      return;
    case PropertyQuery::Kind::Reward:
      out += "R{\"";
      out += q.reward_name;
      out += "\"}";
      bound();
      out += "[C<=";
      out += print_expr(*q.time_bound);
      out += "]";
      return;
  }
}

}  // namespace

std::string print_query_text(const PropertyQuery& q) {
  std::string out;
  print_query_into(q, out);
  return out;
}

std::string print_property(const Property& p) {
  std::string out;
  if (p.divisor) {
    out += "(";
    print_query_into(*p.query, out);
    out += ")/";
    out += print_expr(*p.divisor);
  } else {
    print_query_into(*p.query, out);
  }
  return out;
}

Property parse_property(const std::string& text) {
  Lexer lx(text);
  return parse_one(lx);
}

std::vector<Property> parse_properties(const std::string& text) {
  std::vector<Property> out;
  size_t start = 0;
  int line = 1;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    std::string raw = text.substr(
        start, end == std::string::npos ? std::string::npos : end - start);
    size_t comment = raw.find("//");
    std::string body = comment == std::string::npos ? raw : raw.substr(0, comment);
    bool blank = body.find_first_not_of(" \t\r") == std::string::npos;
    if (!blank) {
      // Pad with newlines so error positions report the file line.
      out.push_back(parse_property(std::string(size_t(line - 1), '\n') + body));
    }
    if (end == std::string::npos) break;
    start = end + 1;
    ++line;
  }
  return out;
}

}  // namespace ctmck
