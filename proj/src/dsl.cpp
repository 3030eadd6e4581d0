#include "vcrules/dsl.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace vcrules::dsl {

// ---------------------------------------------------------------------------
// Values

bool Value::truthy() const {
  switch (data.index()) {
    case 0: return false;
    case 1: return std::get<bool>(data);
    case 2: return std::get<double>(data) != 0.0;
    case 3: return !std::get<std::string>(data).empty();
    case 4: return !std::get<List>(data).empty();
    case 5: return !std::get<Map>(data).empty();
  }
  return false;
}

bool Value::operator==(const Value& other) const {
  // Python-style: bool and number compare numerically; mismatched kinds are
  // simply unequal.
  auto as_number = [](const Value& v) -> double {
    return v.is_bool() ? (std::get<bool>(v.data) ? 1.0 : 0.0) : std::get<double>(v.data);
  };
  bool a_num = is_number() || is_bool();
  bool b_num = other.is_number() || other.is_bool();
  if (a_num && b_num) return as_number(*this) == as_number(other);
  if (data.index() != other.data.index()) return false;
  return data == other.data;
}

// ---------------------------------------------------------------------------
// Helper parsers. All total: any input maps to a number.

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_number_full(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  std::string buf(s);
  const char* begin = buf.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + buf.size()) return false;
  out = v;
  return true;
}

// Handles the three surface forms shared by the helpers: "A-B" ranges,
// "N+" suffixes, and bare numbers.
struct ParsedSize {
  enum Kind { none, bare, range, plus } kind = none;
  double lo = 0, hi = 0;
};

ParsedSize parse_size_forms(std::string_view raw) {
  std::string_view s = trim(raw);
  ParsedSize r;
  if (s.empty()) return r;
  if (s.back() == '+') {
    double v;
    if (parse_number_full(s.substr(0, s.size() - 1), v)) {
      r.kind = ParsedSize::plus;
      r.lo = r.hi = v;
    }
    return r;
  }
  // a '-' separator strictly inside the string; leading '-' is a sign
  size_t dash = s.find('-', 1);
  if (dash != std::string_view::npos) {
    double a, b;
    if (parse_number_full(s.substr(0, dash), a) && parse_number_full(s.substr(dash + 1), b)) {
      r.kind = ParsedSize::range;
      r.lo = a;
      r.hi = b;
      return r;
    }
  }
  double v;
  if (parse_number_full(s, v)) {
    r.kind = ParsedSize::bare;
    r.lo = r.hi = v;
  }
  return r;
}

}  // namespace

double parse_qs(std::string_view raw) {
  ParsedSize p = parse_size_forms(raw);
  switch (p.kind) {
    case ParsedSize::bare:
    case ParsedSize::plus: return p.lo;
    case ParsedSize::range: return (p.lo + p.hi) / 2.0;
    default: return kQsMissingSentinel;
  }
}

double parse_duration(std::string_view raw) {
  ParsedSize p = parse_size_forms(raw);
  switch (p.kind) {
    case ParsedSize::bare:
    case ParsedSize::plus: return p.lo;
    case ParsedSize::range: return (p.lo + p.hi) / 2.0;
    default: return 0.0;
  }
}

long long parse_company_size(std::string_view raw) {
  ParsedSize p = parse_size_forms(raw);
  switch (p.kind) {
    case ParsedSize::bare:
    case ParsedSize::plus: return static_cast<long long>(p.lo);
    case ParsedSize::range: return static_cast<long long>(p.hi);  // upper bound
    default: return 0;
  }
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace {

enum class Tok {
  end, number, string, ident,
  lparen, rparen, lbracket, rbracket, comma, dot, colon,
  plus, minus,
  lt, le, gt, ge, eq, ne,
};

struct Token {
  Tok kind = Tok::end;
  std::string text;
  double number = 0;
  size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> tokens() {
    std::vector<Token> out;
    for (;;) {
      Token t = next();
      out.push_back(t);
      if (t.kind == Tok::end) break;
    }
    return out;
  }

 private:
  Token next() {
    while (i_ < src_.size() &&
           (std::isspace(static_cast<unsigned char>(src_[i_])) || src_[i_] == '\\')) {
      ++i_;  // backslash line continuations are whitespace here
    }
    size_t start = i_;
    if (i_ >= src_.size()) return {Tok::end, "", 0, start};
    char c = src_[i_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
      size_t j = i_;
      while (j < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[j])) ||
                                 src_[j] == '.' || src_[j] == 'e' || src_[j] == 'E' ||
                                 ((src_[j] == '+' || src_[j] == '-') && j > i_ &&
                                  (src_[j - 1] == 'e' || src_[j - 1] == 'E')))) {
        ++j;
      }
      double v;
      if (!parse_number_full(src_.substr(i_, j - i_), v))
        throw ParseError("bad numeric literal", start);
      i_ = j;
      return {Tok::number, std::string(src_.substr(start, j - start)), v, start};
    }
    if (c == '"' || c == '\'') {
      char quote = c;
      std::string text;
      ++i_;
      while (i_ < src_.size() && src_[i_] != quote) {
        if (src_[i_] == '\\' && i_ + 1 < src_.size()) {
          char e = src_[i_ + 1];
          switch (e) {
            case 'n': text.push_back('\n'); break;
            case 't': text.push_back('\t'); break;
            case '\\': text.push_back('\\'); break;
            case '\'': text.push_back('\''); break;
            case '"': text.push_back('"'); break;
            default: text.push_back(e); break;
          }
          i_ += 2;
        } else {
          text.push_back(src_[i_++]);
        }
      }
      if (i_ >= src_.size()) throw ParseError("unterminated string literal", start);
      ++i_;
      return {Tok::string, text, 0, start};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i_;
      while (j < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_')) {
        ++j;
      }
      std::string text(src_.substr(i_, j - i_));
      i_ = j;
      return {Tok::ident, text, 0, start};
    }
    ++i_;
    switch (c) {
      case '(': return {Tok::lparen, "(", 0, start};
      case ')': return {Tok::rparen, ")", 0, start};
      case '[': return {Tok::lbracket, "[", 0, start};
      case ']': return {Tok::rbracket, "]", 0, start};
      case ',': return {Tok::comma, ",", 0, start};
      case '.': return {Tok::dot, ".", 0, start};
      case ':': return {Tok::colon, ":", 0, start};
      case '+': return {Tok::plus, "+", 0, start};
      case '-': return {Tok::minus, "-", 0, start};
      case '<':
        if (i_ < src_.size() && src_[i_] == '=') { ++i_; return {Tok::le, "<=", 0, start}; }
        return {Tok::lt, "<", 0, start};
      case '>':
        if (i_ < src_.size() && src_[i_] == '=') { ++i_; return {Tok::ge, ">=", 0, start}; }
        return {Tok::gt, ">", 0, start};
      case '=':
        if (i_ < src_.size() && src_[i_] == '=') { ++i_; return {Tok::eq, "==", 0, start}; }
        throw ParseError("assignment is not part of the rule language", start);
      case '!':
        if (i_ < src_.size() && src_[i_] == '=') { ++i_; return {Tok::ne, "!=", 0, start}; }
        throw ParseError("unexpected '!'", start);
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", start);
    }
  }

  std::string_view src_;
  size_t i_ = 0;
};

// ---------------------------------------------------------------------------
// Parser

bool is_helper_name(const std::string& s) {
  return s == "parse_qs" || s == "parse_duration" || s == "parse_company_size";
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(Lexer(src).tokens()) {}

  ExprPtr parse() {
    ExprPtr e = parse_or();
    if (cur().kind != Tok::end) throw ParseError("unexpected trailing input", cur().pos);
    return e;
  }

 private:
  const Token& cur() const { return toks_[i_]; }
  const Token& advance() { return toks_[i_++]; }
  bool at_ident(const char* kw) const { return cur().kind == Tok::ident && cur().text == kw; }
  bool eat_ident(const char* kw) {
    if (!at_ident(kw)) return false;
    ++i_;
    return true;
  }
  void expect(Tok k, const char* what) {
    if (cur().kind != k) throw ParseError(std::string("expected ") + what, cur().pos);
    ++i_;
  }

  static std::shared_ptr<Expr> node(Expr::Kind kind, size_t pos) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->pos = pos;
    return e;
  }

  ExprPtr parse_or() {
    ExprPtr left = parse_and();
    while (at_ident("or")) {
      size_t pos = advance().pos;
      auto e = node(Expr::Kind::Or, pos);
      e->a = left;
      e->b = parse_and();
      left = e;
    }
    return left;
  }

  ExprPtr parse_and() {
    ExprPtr left = parse_not();
    while (at_ident("and")) {
      size_t pos = advance().pos;
      auto e = node(Expr::Kind::And, pos);
      e->a = left;
      e->b = parse_not();
      left = e;
    }
    return left;
  }

  ExprPtr parse_not() {
    if (at_ident("not")) {
      size_t pos = advance().pos;
      auto e = node(Expr::Kind::Not, pos);
      e->a = parse_not();
      return e;
    }
    return parse_comparison();
  }

  ExprPtr parse_comparison() {
    ExprPtr left = parse_additive();
    auto make = [&](BinOp op) {
      size_t pos = advance().pos;
      auto e = node(Expr::Kind::Binary, pos);
      e->op = op;
      e->a = left;
      e->b = parse_additive();
      return e;
    };
    ExprPtr result = left;
    bool compared = false;
    for (;;) {
      BinOp op;
      bool negate = false;
      if (cur().kind == Tok::lt) op = BinOp::lt;
      else if (cur().kind == Tok::le) op = BinOp::le;
      else if (cur().kind == Tok::gt) op = BinOp::gt;
      else if (cur().kind == Tok::ge) op = BinOp::ge;
      else if (cur().kind == Tok::eq) op = BinOp::eq;
      else if (cur().kind == Tok::ne) op = BinOp::ne;
      else if (at_ident("in")) op = BinOp::contains;
      else if (at_ident("not") && i_ + 1 < toks_.size() && toks_[i_ + 1].kind == Tok::ident &&
               toks_[i_ + 1].text == "in") {
        negate = true;
        op = BinOp::contains;
        ++i_;  // consume 'not'; 'in' consumed by make()
      } else {
        break;
      }
      if (compared) throw ParseError("chained comparisons are not supported", cur().pos);
      compared = true;
      ExprPtr cmp = make(op);
      if (negate) {
        auto n = node(Expr::Kind::Not, cmp->pos);
        n->a = cmp;
        cmp = n;
      }
      result = cmp;
      left = result;
    }
    return result;
  }

  ExprPtr parse_additive() {
    ExprPtr left = parse_unary();
    for (;;) {
      BinOp op;
      if (cur().kind == Tok::plus) op = BinOp::add;
      else if (cur().kind == Tok::minus) op = BinOp::sub;
      else break;
      size_t pos = advance().pos;
      auto e = node(Expr::Kind::Binary, pos);
      e->op = op;
      e->a = left;
      e->b = parse_unary();
      left = e;
    }
    return left;
  }

  ExprPtr parse_unary() {
    if (cur().kind == Tok::minus) {
      size_t pos = advance().pos;
      auto e = node(Expr::Kind::Neg, pos);
      e->a = parse_unary();
      return e;
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    for (;;) {
      if (cur().kind == Tok::dot) {
        size_t pos = advance().pos;
        if (cur().kind != Tok::ident) throw ParseError("expected method name after '.'", cur().pos);
        std::string method = advance().text;
        if (method == "get") {
          expect(Tok::lparen, "'('");
          auto g = node(Expr::Kind::Get, pos);
          g->a = e;
          g->b = parse_or();
          if (cur().kind == Tok::comma) {
            ++i_;
            g->c = parse_or();
          }
          expect(Tok::rparen, "')'");
          e = g;
        } else if (method == "lower") {
          expect(Tok::lparen, "'('");
          expect(Tok::rparen, "')'");
          auto l = node(Expr::Kind::Lower, pos);
          l->a = e;
          e = l;
        } else {
          throw ParseError("unknown method '." + method + "'; only .get and .lower exist", pos);
        }
      } else if (cur().kind == Tok::lbracket) {
        size_t pos = advance().pos;
        auto ix = node(Expr::Kind::Index, pos);
        ix->a = e;
        ix->b = parse_or();
        expect(Tok::rbracket, "']'");
        e = ix;
      } else {
        break;
      }
    }
    return e;
  }

  ExprPtr parse_primary() {
    const Token& t = cur();
    switch (t.kind) {
      case Tok::number: {
        advance();
        auto e = node(Expr::Kind::Literal, t.pos);
        e->literal = Value(t.number);
        return e;
      }
      case Tok::string: {
        advance();
        auto e = node(Expr::Kind::Literal, t.pos);
        e->literal = Value(t.text);
        return e;
      }
      case Tok::lparen: {
        advance();
        ExprPtr e = parse_or();
        expect(Tok::rparen, "')'");
        return e;
      }
      case Tok::lbracket: {
        // only the empty-list literal is admitted (the ubiquitous `or []`)
        size_t pos = advance().pos;
        expect(Tok::rbracket, "']' (only [] list literals are supported)");
        auto e = node(Expr::Kind::Literal, pos);
        e->literal = Value(Value::List{});
        return e;
      }
      case Tok::ident: break;
      default: throw ParseError("unexpected token '" + t.text + "'", t.pos);
    }

    std::string name = t.text;
    size_t pos = t.pos;
    if (name == "True" || name == "False") {
      advance();
      auto e = node(Expr::Kind::Literal, pos);
      e->literal = Value(name == "True");
      return e;
    }
    if (name == "None") {
      advance();
      auto e = node(Expr::Kind::Literal, pos);
      return e;  // null literal
    }
    if (name == "len") {
      advance();
      expect(Tok::lparen, "'('");
      auto e = node(Expr::Kind::Len, pos);
      e->a = parse_or();
      expect(Tok::rparen, "')'");
      return e;
    }
    if (name == "any" || name == "all") {
      advance();
      expect(Tok::lparen, "'('");
      auto e = node(name == "any" ? Expr::Kind::Any : Expr::Kind::All, pos);
      ExprPtr body = parse_or();
      if (!eat_ident("for"))
        throw ParseError("any/all require a generator: any(<expr> for <var> in <seq>)", cur().pos);
      if (cur().kind != Tok::ident) throw ParseError("expected loop variable", cur().pos);
      e->name = advance().text;
      if (!eat_ident("in")) throw ParseError("expected 'in' in generator", cur().pos);
      e->a = parse_or();
      e->b = body;
      expect(Tok::rparen, "')'");
      return e;
    }
    if (is_helper_name(name)) {
      advance();
      expect(Tok::lparen, "'('");
      auto e = node(Expr::Kind::Helper, pos);
      e->name = name;
      e->a = parse_or();
      expect(Tok::rparen, "')'");
      return e;
    }
    if (name == "int" || name == "float") {
      advance();
      expect(Tok::lparen, "'('");
      auto e = node(Expr::Kind::Cast, pos);
      e->name = name;
      e->a = parse_or();
      expect(Tok::rparen, "')'");
      return e;
    }
    if (name == "and" || name == "or" || name == "not" || name == "in" || name == "for" ||
        name == "lambda" || name == "if" || name == "else" || name == "import") {
      throw ParseError("unexpected keyword '" + name + "'", pos);
    }
    advance();
    if (cur().kind == Tok::lparen) {
      throw ParseError("unknown function '" + name + "'", pos);
    }
    // Plain variable reference; binding validated in a post-pass.
    auto e = node(Expr::Kind::Var, pos);
    e->name = name;
    return e;
  }

  std::vector<Token> toks_;
  size_t i_ = 0;
};

// Binding and depth validation. Quantifier bodies may only reference their
// loop variables, the root record variable, and literals.
void validate(const Expr& e, std::vector<std::string>& scope, size_t depth) {
  if (depth > 64) throw ParseError("expression tree deeper than 64", e.pos);
  if (e.kind == Expr::Kind::Var) {
    for (const auto& s : scope) {
      if (s == e.name) return;
    }
    throw ParseError("unbound variable '" + e.name + "'", e.pos);
  }
  if (e.kind == Expr::Kind::Any || e.kind == Expr::Kind::All) {
    validate(*e.a, scope, depth + 1);  // sequence: outer scope
    scope.push_back(e.name);
    validate(*e.b, scope, depth + 1);
    scope.pop_back();
    if (e.c) validate(*e.c, scope, depth + 1);
    return;
  }
  if (e.a) validate(*e.a, scope, depth + 1);
  if (e.b) validate(*e.b, scope, depth + 1);
  if (e.c) validate(*e.c, scope, depth + 1);
}

}  // namespace

ExprPtr parse_rule_expression(std::string_view source) {
  std::string_view s = trim(source);
  constexpr std::string_view kLambda = "lambda";
  if (s.substr(0, kLambda.size()) != kLambda)
    throw ParseError("rule must start with 'lambda founder:'", 0);
  s.remove_prefix(kLambda.size());
  s = trim(s);
  constexpr std::string_view kVar = "founder";
  if (s.substr(0, kVar.size()) != kVar)
    throw ParseError("lambda parameter must be 'founder'", 0);
  s.remove_prefix(kVar.size());
  s = trim(s);
  if (s.empty() || s.front() != ':') throw ParseError("expected ':' after lambda parameter", 0);
  s.remove_prefix(1);

  ExprPtr ast = Parser(s).parse();
  std::vector<std::string> scope{"founder"};
  validate(*ast, scope, 1);
  return ast;
}

// ---------------------------------------------------------------------------
// Canonical serialization

namespace {

std::string format_double(double d) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
  (void)ec;
  return std::string(buf, end);
}

std::string quote_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

std::string literal_repr(const Value& v) {
  switch (v.data.index()) {
    case 0: return "None";
    case 1: return std::get<bool>(v.data) ? "True" : "False";
    case 2: return format_double(std::get<double>(v.data));
    case 3: return quote_string(std::get<std::string>(v.data));
    case 4: return "[]";  // only the empty list is expressible
    default: return "{}";
  }
}

std::string expr_repr(const Expr& e) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Literal: return literal_repr(e.literal);
    case K::Var: return e.name;
    case K::Get:
      return expr_repr(*e.a) + ".get(" + expr_repr(*e.b) +
             (e.c ? ", " + expr_repr(*e.c) : std::string()) + ")";
    case K::Index: return expr_repr(*e.a) + "[" + expr_repr(*e.b) + "]";
    case K::Lower: return expr_repr(*e.a) + ".lower()";
    case K::And: return "(" + expr_repr(*e.a) + " and " + expr_repr(*e.b) + ")";
    case K::Or: return "(" + expr_repr(*e.a) + " or " + expr_repr(*e.b) + ")";
    case K::Not: return "(not " + expr_repr(*e.a) + ")";
    case K::Neg: return "(-" + expr_repr(*e.a) + ")";
    case K::Binary: {
      const char* op = "";
      switch (e.op) {
        case BinOp::add: op = "+"; break;
        case BinOp::sub: op = "-"; break;
        case BinOp::lt: op = "<"; break;
        case BinOp::le: op = "<="; break;
        case BinOp::gt: op = ">"; break;
        case BinOp::ge: op = ">="; break;
        case BinOp::eq: op = "=="; break;
        case BinOp::ne: op = "!="; break;
        case BinOp::contains: op = "in"; break;
      }
      return "(" + expr_repr(*e.a) + " " + op + " " + expr_repr(*e.b) + ")";
    }
    case K::Len: return "len(" + expr_repr(*e.a) + ")";
    case K::Any:
    case K::All:
      return std::string(e.kind == K::Any ? "any" : "all") + "(" + expr_repr(*e.b) + " for " +
             e.name + " in " + expr_repr(*e.a) + ")";
    case K::Helper:
    case K::Cast: return e.name + "(" + expr_repr(*e.a) + ")";
  }
  return "";
}

}  // namespace

std::string canonical_source(const Expr& ast) { return "lambda founder: " + expr_repr(ast); }

bool ast_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.name != b.name) return false;
  if (a.kind == Expr::Kind::Binary && a.op != b.op) return false;
  if (a.kind == Expr::Kind::Literal) {
    if (a.literal.data.index() != b.literal.data.index()) return false;
    if (!(a.literal == b.literal) && !(a.literal.is_null() && b.literal.is_null())) return false;
  }
  auto child_eq = [](const ExprPtr& x, const ExprPtr& y) {
    if (!x != !y) return false;
    return !x || ast_equal(*x, *y);
  };
  return child_eq(a.a, b.a) && child_eq(a.b, b.b) && child_eq(a.c, b.c);
}

// ---------------------------------------------------------------------------
// Evaluation

Value to_value(const FounderRecord& record) {
  Value::Map m;
  m.emplace_back("industry", Value(record.industry));
  Value::List edus;
  for (const auto& e : record.educations) {
    Value::Map em;
    em.emplace_back("degree", Value(e.degree));
    em.emplace_back("field", Value(e.field));
    em.emplace_back("qs_ranking", Value(e.qs_ranking));
    edus.emplace_back(std::move(em));
  }
  m.emplace_back("educations", Value(std::move(edus)));
  Value::List jobs;
  for (const auto& j : record.jobs) {
    Value::Map jm;
    jm.emplace_back("role", Value(j.role));
    jm.emplace_back("company_size", Value(j.company_size));
    jm.emplace_back("industry", Value(j.industry));
    jm.emplace_back("duration", Value(j.duration));
    jobs.emplace_back(std::move(jm));
  }
  m.emplace_back("jobs", Value(std::move(jobs)));
  auto exits = [](const std::vector<ExitEvent>& evts) {
    Value::List out;
    for (const auto& e : evts) {
      Value::Map em;
      for (const auto& [k, v] : e.attributes) em.emplace_back(k, Value(v));
      out.emplace_back(std::move(em));
    }
    return out;
  };
  m.emplace_back("ipos", Value(exits(record.ipos)));
  m.emplace_back("acquisitions", Value(exits(record.acquisitions)));
  return Value(std::move(m));
}

namespace {

struct Fault {};  // internal control flow; never escapes evaluate()

struct Binding {
  const std::string* name;
  const Value* value;
};

class Evaluator {
 public:
  explicit Evaluator(const Value& founder) : founder_(founder) {}

  Value eval(const Expr& e) {
    using K = Expr::Kind;
    switch (e.kind) {
      case K::Literal: return e.literal;
      case K::Var: return lookup(e.name);
      case K::Get: {
        Value recv = eval(*e.a);
        if (!recv.is_map()) throw Fault{};
        Value key = eval(*e.b);
        if (!key.is_string()) throw Fault{};
        const auto& m = std::get<Value::Map>(recv.data);
        for (const auto& [k, v] : m) {
          if (k == std::get<std::string>(key.data)) return v;
        }
        return e.c ? eval(*e.c) : Value();
      }
      case K::Index: {
        Value recv = eval(*e.a);
        Value key = eval(*e.b);
        if (recv.is_list()) {
          if (!key.is_number()) throw Fault{};
          const auto& l = std::get<Value::List>(recv.data);
          double kd = std::get<double>(key.data);
          long long i = static_cast<long long>(kd);
          if (static_cast<double>(i) != kd) throw Fault{};
          if (i < 0) i += static_cast<long long>(l.size());
          if (i < 0 || i >= static_cast<long long>(l.size())) throw Fault{};
          return l[static_cast<size_t>(i)];
        }
        if (recv.is_map()) {
          if (!key.is_string()) throw Fault{};
          const auto& m = std::get<Value::Map>(recv.data);
          for (const auto& [k, v] : m) {
            if (k == std::get<std::string>(key.data)) return v;
          }
          throw Fault{};  // missing key without a default
        }
        throw Fault{};
      }
      case K::Lower: {
        Value v = eval(*e.a);
        if (!v.is_string()) throw Fault{};
        std::string s = std::get<std::string>(v.data);
        for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return Value(std::move(s));
      }
      case K::And: {
        Value a = eval(*e.a);
        return a.truthy() ? eval(*e.b) : a;  // value-returning
      }
      case K::Or: {
        Value a = eval(*e.a);
        return a.truthy() ? a : eval(*e.b);
      }
      case K::Not: return Value(!eval(*e.a).truthy());
      case K::Neg: {
        Value v = eval(*e.a);
        if (!v.is_number()) throw Fault{};
        return Value(-std::get<double>(v.data));
      }
      case K::Binary: return binary(e);
      case K::Len: {
        Value v = eval(*e.a);
        if (v.is_string()) return Value(static_cast<double>(std::get<std::string>(v.data).size()));
        if (v.is_list()) return Value(static_cast<double>(std::get<Value::List>(v.data).size()));
        if (v.is_map()) return Value(static_cast<double>(std::get<Value::Map>(v.data).size()));
        throw Fault{};
      }
      case K::Any:
      case K::All: {
        Value seq = eval(*e.a);
        if (!seq.is_list()) throw Fault{};
        bool want = e.kind == K::Any;
        for (const Value& item : std::get<Value::List>(seq.data)) {
          bindings_.push_back({&e.name, &item});
          bool t = eval(*e.b).truthy();
          bindings_.pop_back();
          if (t == want) return Value(want);
        }
        return Value(!want);  // vacuous any -> False, vacuous all -> True
      }
      case K::Helper: {
        Value v = eval(*e.a);
        if (!v.is_string()) throw Fault{};
        const std::string& s = std::get<std::string>(v.data);
        if (e.name == "parse_qs") return Value(parse_qs(s));
        if (e.name == "parse_duration") return Value(parse_duration(s));
        return Value(static_cast<double>(parse_company_size(s)));
      }
      case K::Cast: {
        Value v = eval(*e.a);
        double d;
        if (v.is_number()) d = std::get<double>(v.data);
        else if (v.is_bool()) d = std::get<bool>(v.data) ? 1.0 : 0.0;
        else if (v.is_string()) {
          if (!parse_number_full(std::get<std::string>(v.data), d)) throw Fault{};
        } else {
          throw Fault{};
        }
        if (e.name == "int") d = std::trunc(d);
        return Value(d);
      }
    }
    throw Fault{};
  }

 private:
  Value lookup(const std::string& name) {
    for (auto it = bindings_.rbegin(); it != bindings_.rend(); ++it) {
      if (*it->name == name) return *it->value;
    }
    if (name == "founder") return founder_;
    throw Fault{};
  }

  Value binary(const Expr& e) {
    Value a = eval(*e.a);
    Value b = eval(*e.b);
    auto num = [](const Value& v) { return std::get<double>(v.data); };
    switch (e.op) {
      case BinOp::add:
        if (a.is_number() && b.is_number()) return Value(num(a) + num(b));
        if (a.is_string() && b.is_string())
          return Value(std::get<std::string>(a.data) + std::get<std::string>(b.data));
        if (a.is_list() && b.is_list()) {
          Value::List out = std::get<Value::List>(a.data);
          for (const auto& v : std::get<Value::List>(b.data)) out.push_back(v);
          return Value(std::move(out));
        }
        throw Fault{};
      case BinOp::sub:
        if (a.is_number() && b.is_number()) return Value(num(a) - num(b));
        throw Fault{};
      case BinOp::lt:
      case BinOp::le:
      case BinOp::gt:
      case BinOp::ge: {
        int c;
        if (a.is_number() && b.is_number())
          c = num(a) < num(b) ? -1 : (num(a) > num(b) ? 1 : 0);
        else if (a.is_string() && b.is_string())
          c = std::get<std::string>(a.data).compare(std::get<std::string>(b.data));
        else
          throw Fault{};  // number vs non-number ordering is a counted fault
        switch (e.op) {
          case BinOp::lt: return Value(c < 0);
          case BinOp::le: return Value(c <= 0);
          case BinOp::gt: return Value(c > 0);
          default: return Value(c >= 0);
        }
      }
      case BinOp::eq: return Value(a == b);
      case BinOp::ne: return Value(!(a == b));
      case BinOp::contains: {
        if (b.is_string()) {
          if (!a.is_string()) throw Fault{};
          return Value(std::get<std::string>(b.data).find(std::get<std::string>(a.data)) !=
                       std::string::npos);
        }
        if (b.is_list()) {
          for (const auto& v : std::get<Value::List>(b.data)) {
            if (v == a) return Value(true);
          }
          return Value(false);
        }
        if (b.is_map()) {
          if (!a.is_string()) throw Fault{};
          for (const auto& [k, v] : std::get<Value::Map>(b.data)) {
            if (k == std::get<std::string>(a.data)) return Value(true);
          }
          return Value(false);
        }
        throw Fault{};
      }
    }
    throw Fault{};
  }

  const Value& founder_;
  std::vector<Binding> bindings_;
};

}  // namespace

EvalResult evaluate(const Expr& ast, const Value& founder) {
  try {
    return {Evaluator(founder).eval(ast).truthy(), false};
  } catch (const Fault&) {
    return {false, true};
  }
}

EvalResult evaluate(const Expr& ast, const FounderRecord& record) {
  Value v = to_value(record);
  return evaluate(ast, v);
}

ActivationColumn evaluate_over_dataset(const Expr& ast, const LabeledDataset& dataset) {
  ActivationColumn col;
  col.matches.reserve(dataset.size());
  for (const auto& record : dataset.records) {
    Value v = to_value(record);
    EvalResult r = evaluate(ast, v);
    col.matches.push_back(r.value ? 1 : 0);
    col.error_count += r.fault ? 1 : 0;
  }
  return col;
}

}  // namespace vcrules::dsl
