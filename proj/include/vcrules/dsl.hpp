#pragma once
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "vcrules/domain.hpp"

namespace vcrules::dsl {

// Runtime value for rule evaluation. Maps are association lists; records
// are tiny, linear lookup is fine.
struct Value {
  using List = std::vector<Value>;
  using Map = std::vector<std::pair<std::string, Value>>;
  using Storage = std::variant<std::monostate, bool, double, std::string, List, Map>;

  Storage data;

  Value() = default;  // null
  Value(bool b) : data(b) {}
  Value(double d) : data(d) {}
  Value(int i) : data(static_cast<double>(i)) {}
  Value(const char* s) : data(std::string(s)) {}
  Value(std::string s) : data(std::move(s)) {}
  Value(List l) : data(std::move(l)) {}
  Value(Map m) : data(std::move(m)) {}

  bool is_null() const { return std::holds_alternative<std::monostate>(data); }
  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_number() const { return std::holds_alternative<double>(data); }
  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_list() const { return std::holds_alternative<List>(data); }
  bool is_map() const { return std::holds_alternative<Map>(data); }

  // false, 0, "", [], {}, null are falsy; everything else truthy.
  bool truthy() const;
  bool operator==(const Value& other) const;
};

enum class BinOp { add, sub, lt, le, gt, ge, eq, ne, contains };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// One closed node set; no general calls, attributes, or mutation exist.
struct Expr {
  enum class Kind {
    Literal,     // literal value
    Var,         // founder or a quantifier loop variable
    Get,         // a.get(b [, c])   map access with default
    Index,       // a[b]             list or map subscript
    Lower,       // a.lower()
    And,         // value-returning
    Or,          // value-returning
    Not,
    Neg,         // unary minus
    Binary,      // op over (a, b)
    Len,         // len(a)
    Any,         // any(b for name in a)
    All,         // all(b for name in a)
    Helper,      // parse_qs / parse_duration / parse_company_size, arg a
    Cast,        // int(a) / float(a), name holds which
  };

  Kind kind = Kind::Literal;
  Value literal;
  std::string name;
  BinOp op = BinOp::add;
  ExprPtr a, b, c;
  size_t pos = 0;  // source offset, for diagnostics
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, size_t position)
      : std::runtime_error(msg + " (at offset " + std::to_string(position) + ")"),
        position_(position) {}
  size_t position() const { return position_; }

 private:
  size_t position_;
};

// Parses a full rule expression including the mandatory "lambda founder:"
// prefix. Throws ParseError on any deviation from the grammar, including
// unbound variables and depth > 64.
ExprPtr parse_rule_expression(std::string_view source);

// Canonical re-serialization: fully parenthesized, reparses to an equal
// tree. Includes the "lambda founder:" prefix.
std::string canonical_source(const Expr& ast);
bool ast_equal(const Expr& a, const Expr& b);

struct EvalResult {
  bool value = false;
  bool fault = false;  // a runtime fault occurred; value forced to false
};

Value to_value(const FounderRecord& record);
EvalResult evaluate(const Expr& ast, const Value& founder);
EvalResult evaluate(const Expr& ast, const FounderRecord& record);

struct ActivationColumn {
  std::vector<uint8_t> matches;  // dataset order
  size_t error_count = 0;
};

ActivationColumn evaluate_over_dataset(const Expr& ast, const LabeledDataset& dataset);

// Helper parsers. Total functions: any string maps to a number.
double parse_qs(std::string_view raw);        // "A-B" -> midpoint, "N+" -> N, else 1e9
double parse_duration(std::string_view raw);  // "A-B" -> midpoint, "N+" -> N, else 0
long long parse_company_size(std::string_view raw);  // "A-B" -> B, "N+" -> N, else 0

inline constexpr double kQsMissingSentinel = 1e9;

struct RuleCandidate {
  std::string name;
  std::string description;
  std::string source;  // verbatim, with the "lambda founder:" prefix
  ExprPtr ast;
  int iteration = 1;
};

}  // namespace vcrules::dsl
