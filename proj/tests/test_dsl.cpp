#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "vcrules/dsl.hpp"
#include "vcrules/rng.hpp"

using namespace vcrules;
using namespace vcrules::dsl;

namespace {

const char* kEliteSchoolAndExit =
    "lambda founder: (any(parse_qs(e.get(\"qs_ranking\",\"\")) <= 50 for e in "
    "founder.get(\"educations\", [])) and len(founder.get(\"ipos\", []) or []) + "
    "len(founder.get(\"acquisitions\", []) or []) > 0)";

FounderRecord appendix_founder() {
  FounderRecord r;
  r.industry = "Enterprise Software";
  r.educations = {{"BSc", "Computer Science", "15"}};
  r.jobs = {{"CTO", "51-200", "Enterprise Software", "4-5"},
            {"Senior Engineer", "10001+", "Enterprise Software", "2-3"}};
  r.acquisitions = {{ExitKind::acquisition, {{"company", "StartupCo"}}}};
  return r;
}

bool eval_on(const char* src, const FounderRecord& r, bool* fault = nullptr) {
  auto ast = parse_rule_expression(src);
  EvalResult res = evaluate(*ast, r);
  if (fault) *fault = res.fault;
  return res.value;
}

std::string random_string(Rng& rng) {
  static const char* pieces[] = {"", "15", "51-100", "10001+", "601+", "garbage", "-", "3.5",
                                 "1-10", "0", "abc-def", "+", "9 9", " 42 ", "1e3", "--"};
  std::string s = pieces[rng.below(16)];
  if (rng.below(3) == 0) s += static_cast<char>(rng.below(94) + 33);
  return s;
}

}  // namespace

TEST_CASE("helper parsers: pinned values") {
  CHECK(parse_qs("15") == doctest::Approx(15.0));
  CHECK(parse_qs("") == doctest::Approx(1e9));
  CHECK(parse_qs("51-100") == doctest::Approx(75.5));
  CHECK(parse_qs("601+") == doctest::Approx(601.0));
  CHECK(parse_qs("junk") == doctest::Approx(1e9));

  CHECK(parse_duration("4-5") == doctest::Approx(4.5));
  CHECK(parse_duration("2-3") == doctest::Approx(2.5));
  CHECK(parse_duration("") == doctest::Approx(0.0));
  CHECK(parse_duration("10+") == doctest::Approx(10.0));
  CHECK(parse_duration("7") == doctest::Approx(7.0));

  CHECK(parse_company_size("51-200") == 200);
  CHECK(parse_company_size("10001+") == 10001);
  CHECK(parse_company_size("garbage") == 0);
  CHECK(parse_company_size("42") == 42);
  CHECK(parse_company_size("") == 0);
}

TEST_CASE("helper parsers: totality fuzz") {
  Rng rng(123);
  for (int i = 0; i < 20000; ++i) {
    std::string s = random_string(rng);
    double q = parse_qs(s);
    double d = parse_duration(s);
    long long c = parse_company_size(s);
    CHECK(std::isfinite(q));
    CHECK(std::isfinite(d));
    CHECK(c >= 0);
  }
}

TEST_CASE("parse: lambda prefix is mandatory") {
  CHECK_THROWS_AS(parse_rule_expression("founder.get(\"ipos\", [])"), ParseError);
  CHECK_NOTHROW(parse_rule_expression("lambda founder: True"));
}

TEST_CASE("parse: grammar exclusions") {
  CHECK_THROWS_AS(parse_rule_expression("lambda founder: import os"), ParseError);
  CHECK_THROWS_AS(parse_rule_expression("lambda founder: __import__(\"os\")"), ParseError);
  CHECK_THROWS_AS(parse_rule_expression("lambda founder: open(\"x\")"), ParseError);
  CHECK_THROWS_AS(parse_rule_expression("lambda founder: founder.pop(\"x\")"), ParseError);
  CHECK_THROWS_AS(parse_rule_expression("lambda founder: x + 1"), ParseError);  // unbound
  CHECK_THROWS_AS(parse_rule_expression("lambda founder: 1 < 2 < 3"), ParseError);  // chained
  CHECK_THROWS_AS(parse_rule_expression("lambda founder: founder = 1"), ParseError);
}

TEST_CASE("parse: quantifier binds its loop variable only inside the body") {
  CHECK_NOTHROW(parse_rule_expression(
      "lambda founder: any(e.get(\"degree\", \"\") == \"PhD\" for e in "
      "founder.get(\"educations\", []))"));
  // loop var leaks outside the quantifier -> unbound
  CHECK_THROWS_AS(
      parse_rule_expression("lambda founder: any(True for e in founder.get(\"jobs\", [])) and "
                            "e.get(\"role\", \"\") == \"CTO\""),
      ParseError);
}

TEST_CASE("parse errors carry a position") {
  try {
    parse_rule_expression("lambda founder: 1 +");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() > 0);
    CHECK(std::string(e.what()).find("offset") != std::string::npos);
  }
}

TEST_CASE("elite school and exit: structure and truth on the reference founder") {
  auto ast = parse_rule_expression(kEliteSchoolAndExit);
  FounderRecord r = appendix_founder();
  CHECK(evaluate(*ast, r).value);
  CHECK_FALSE(evaluate(*ast, r).fault);

  // qs 15 <= 50 holds, but without any exit the conjunction fails
  FounderRecord no_exit = r;
  no_exit.acquisitions.clear();
  CHECK_FALSE(evaluate(*ast, no_exit).value);

  // exit present but ranking 601+ fails the elite check
  FounderRecord weak_school = r;
  weak_school.educations[0].qs_ranking = "601+";
  CHECK_FALSE(evaluate(*ast, weak_school).value);
}

TEST_CASE("ipos-only predicate is false on the reference founder") {
  CHECK_FALSE(
      eval_on("lambda founder: len(founder.get(\"ipos\", []) or []) > 0", appendix_founder()));
}

TEST_CASE("vacuous quantifiers") {
  FounderRecord empty;
  CHECK_FALSE(eval_on(
      "lambda founder: any(True for e in founder.get(\"educations\", []))", empty));
  CHECK(eval_on("lambda founder: all(False for e in founder.get(\"educations\", []))", empty));
}

TEST_CASE("value-returning or with truthiness") {
  FounderRecord r;
  CHECK(eval_on("lambda founder: (founder.get(\"ipos\", []) or []) == []", r));
  CHECK(eval_on("lambda founder: (0 or \"x\") == \"x\"", r));
  CHECK(eval_on("lambda founder: (\"\" and True) == \"\"", r));
  CHECK_FALSE(eval_on("lambda founder: \"\" or 0", r));
}

TEST_CASE("truthiness of the final result") {
  FounderRecord r = appendix_founder();
  CHECK(eval_on("lambda founder: founder.get(\"jobs\", [])", r));     // non-empty list
  CHECK_FALSE(eval_on("lambda founder: founder.get(\"ipos\", [])", r));  // empty list
  CHECK_FALSE(eval_on("lambda founder: 0", r));
  CHECK(eval_on("lambda founder: -1", r));
  CHECK_FALSE(eval_on("lambda founder: \"\"", r));
}

TEST_CASE("membership operator") {
  FounderRecord r = appendix_founder();
  CHECK(eval_on("lambda founder: any(\"cto\" in j.get(\"role\", \"\").lower() for j in "
                "founder.get(\"jobs\", []))",
                r));
  CHECK(eval_on("lambda founder: \"industry\" in founder", r));
  CHECK_FALSE(eval_on("lambda founder: \"nonexistent\" in founder", r));
  CHECK(eval_on("lambda founder: \"x\" not in \"abc\"", r));
  CHECK_THROWS_AS(parse_rule_expression("lambda founder: 2 in [1, 2]"), ParseError);
}

TEST_CASE("string comparisons are case sensitive without lower") {
  FounderRecord r = appendix_founder();
  CHECK_FALSE(eval_on("lambda founder: founder.get(\"industry\", \"\") == \"enterprise "
                      "software\"",
                      r));
  CHECK(eval_on("lambda founder: founder.get(\"industry\", \"\").lower() == \"enterprise "
                "software\"",
                r));
}

TEST_CASE("runtime faults flag and force false") {
  FounderRecord r = appendix_founder();
  bool fault = false;
  // ordering comparison between number and string is a fault
  CHECK_FALSE(eval_on("lambda founder: founder.get(\"industry\", \"\") > 3", r, &fault));
  CHECK(fault);
  // indexing a string as a list is a fault
  CHECK_FALSE(eval_on("lambda founder: founder.get(\"industry\", \"\")[0] == \"E\"", r, &fault));
  CHECK(fault);
  // out-of-range list index is a fault
  CHECK_FALSE(eval_on("lambda founder: founder.get(\"ipos\", [])[5]", r, &fault));
  CHECK(fault);
  // == between mismatched kinds is unequal, not a fault
  CHECK_FALSE(eval_on("lambda founder: founder.get(\"industry\", \"\") == 3", r, &fault));
  CHECK_FALSE(fault);
}

TEST_CASE("faulting rule over a dataset: all false, every record counted") {
  LabeledDataset ds = generate_synthetic_dataset(100, 0.2, {}, 5);
  auto ast = parse_rule_expression("lambda founder: founder.get(\"industry\", \"\")[0]");
  ActivationColumn col = evaluate_over_dataset(*ast, ds);
  CHECK(col.error_count == 100);
  for (uint8_t m : col.matches) CHECK(m == 0);
}

TEST_CASE("constant-true rule over a dataset") {
  LabeledDataset ds = generate_synthetic_dataset(100, 0.2, {}, 6);
  auto ast = parse_rule_expression("lambda founder: True");
  ActivationColumn col = evaluate_over_dataset(*ast, ds);
  CHECK(col.error_count == 0);
  CHECK(col.matches == std::vector<uint8_t>(100, 1));
}

TEST_CASE("evaluate_over_dataset equals per-record evaluate") {
  LabeledDataset ds = generate_synthetic_dataset(300, 0.15, {}, 8);
  const char* sources[] = {
      kEliteSchoolAndExit,
      "lambda founder: any(parse_company_size(j.get(\"company_size\", \"\")) >= 200 for j in "
      "founder.get(\"jobs\", []))",
      "lambda founder: len(founder.get(\"jobs\", [])) - len(founder.get(\"educations\", [])) "
      "> 1",
      "lambda founder: all(parse_duration(j.get(\"duration\", \"\")) >= 1 for j in "
      "founder.get(\"jobs\", []))",
  };
  for (const char* src : sources) {
    auto ast = parse_rule_expression(src);
    ActivationColumn col = evaluate_over_dataset(*ast, ds);
    size_t faults = 0;
    for (size_t i = 0; i < ds.size(); ++i) {
      EvalResult res = evaluate(*ast, ds.records[i]);
      CHECK(static_cast<bool>(col.matches[i]) == res.value);
      faults += res.fault;
    }
    CHECK(col.error_count == faults);
  }
}

TEST_CASE("evaluation is pure: record serialization unchanged") {
  FounderRecord r = appendix_founder();
  auto before = record_to_json(r).dump();
  auto ast = parse_rule_expression(kEliteSchoolAndExit);
  evaluate(*ast, r);
  CHECK(record_to_json(r).dump() == before);
}

TEST_CASE("canonical source reparses to an equal tree") {
  const char* sources[] = {
      kEliteSchoolAndExit,
      "lambda founder: True",
      "lambda founder: not (1 + 2 > 2) or len([]) == 0",
      "lambda founder: int(parse_qs(\"15\")) != 14 and float(3) == 3.0",
      "lambda founder: any(e.get(\"field\", \"x\").lower() in \"abc\" for e in "
      "founder.get(\"educations\", []))",
      "lambda founder: -parse_duration(\"2-3\") < 0",
      "lambda founder: founder[\"industry\"] == \"Fintech\"",
  };
  for (const char* src : sources) {
    auto ast = parse_rule_expression(src);
    std::string canon = canonical_source(*ast);
    auto back = parse_rule_expression(canon);
    CHECK(ast_equal(*ast, *back));
    CHECK(canonical_source(*back) == canon);
  }
}

TEST_CASE("ast_equal distinguishes different trees") {
  auto a = parse_rule_expression("lambda founder: 1 < 2");
  auto b = parse_rule_expression("lambda founder: 1 <= 2");
  auto c = parse_rule_expression("lambda founder: 1 < 2");
  CHECK_FALSE(ast_equal(*a, *b));
  CHECK(ast_equal(*a, *c));
}

TEST_CASE("depth limit") {
  std::string deep = "lambda founder: ";
  for (int i = 0; i < 100; ++i) deep += "not (";
  deep += "True";
  for (int i = 0; i < 100; ++i) deep += ")";
  CHECK_THROWS_AS(parse_rule_expression(deep), ParseError);
}

TEST_CASE("backslash line continuations are tolerated") {
  CHECK_NOTHROW(parse_rule_expression("lambda founder: True \\\n and True"));
}

TEST_CASE("map subscript and get default") {
  FounderRecord r = appendix_founder();
  CHECK(eval_on("lambda founder: founder.get(\"missing\", 7) == 7", r));
  bool fault = false;
  CHECK_FALSE(eval_on("lambda founder: founder[\"missing\"]", r, &fault));
  CHECK(fault);
  CHECK(
      eval_on("lambda founder: founder.get(\"acquisitions\", [])[0].get(\"company\", \"\") == "
              "\"StartupCo\"",
              r));
}
