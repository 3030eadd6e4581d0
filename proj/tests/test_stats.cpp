#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "vcrules/rng.hpp"
#include "vcrules/stats.hpp"

using namespace vcrules;
using namespace vcrules::stats;

namespace {

// Exact upper tail P[X >= k] for X ~ Binomial(n, p), via log-space pmf.
double exact_binomial_tail(size_t k, size_t n, double p) {
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  double tail = 0.0;
  for (size_t i = k; i <= n; ++i) {
    double log_pmf = std::lgamma(double(n) + 1) - std::lgamma(double(i) + 1) -
                     std::lgamma(double(n - i) + 1) + double(i) * std::log(p) +
                     double(n - i) * std::log1p(-p);
    tail += std::exp(log_pmf);
  }
  return std::min(tail, 1.0);
}

bool has_reason(const RuleStats& s, FailReason r) {
  return std::find(s.fail_reasons.begin(), s.fail_reasons.end(), r) != s.fail_reasons.end();
}

}  // namespace

TEST_CASE("f_beta closed form and edge cases") {
  CHECK(f_beta(0.300, 0.163, 0.5) == doctest::Approx(0.257).epsilon(0.01));
  CHECK(f_beta(0.158, 0.464, 0.5) == doctest::Approx(0.182).epsilon(0.01));
  CHECK(f_beta(0.0, 0.0, 0.5) == 0.0);
  CHECK(f_beta(1.0, 1.0, 0.5) == doctest::Approx(1.0));
  // beta = 1 reduces to the harmonic mean
  CHECK(f_beta(0.5, 0.25, 1.0) == doctest::Approx(2 * 0.5 * 0.25 / 0.75));
}

TEST_CASE("precision lift on the reference rule row") {
  CHECK(precision_lift(39, 142, 0.09) == doctest::Approx(3.05).epsilon(0.005));
  CHECK(coverage(142, 4500) == doctest::Approx(0.0316).epsilon(0.005));
  CHECK_THROWS_AS(precision_lift(0, 0, 0.09), StatsError);
  CHECK_THROWS_AS(precision_lift(1, 10, 0.0), StatsError);
}

TEST_CASE("validate_rule on the reference rule row") {
  RuleStats s = validate_rule(39, 142, 0, 4500, 0.09);
  CHECK(s.lift == doctest::Approx(3.05).epsilon(0.005));
  CHECK(s.coverage == doctest::Approx(0.0316).epsilon(0.005));
  CHECK(s.p_value < 1e-6);
  CHECK(s.significant);
  CHECK(s.passed);
  CHECK(s.fail_reasons.empty());
}

TEST_CASE("binomial normal approximation vs exact tail") {
  const double p0 = 0.09;
  for (size_t n : {size_t(45), size_t(100), size_t(500)}) {
    size_t agree = 0;
    for (size_t k = 0; k <= n; ++k) {
      double approx = binomial_p_one_sided(k, n, p0);
      double exact = exact_binomial_tail(k, n, p0);
      CHECK(approx >= 0.0);
      CHECK(approx <= 1.0);
      if ((approx < 0.05) == (exact < 0.05)) ++agree;
      if (std::min(double(n) * p0, double(n) * (1 - p0)) >= 5.0) {
        CHECK(std::abs(approx - exact) <= 0.05);
      }
    }
    CHECK(double(agree) / double(n + 1) >= 0.90);
  }
}

TEST_CASE("binomial p is monotone decreasing in k") {
  for (size_t k = 1; k <= 100; ++k) {
    CHECK(binomial_p_one_sided(k, 100, 0.09) <= binomial_p_one_sided(k - 1, 100, 0.09) + 1e-12);
  }
}

TEST_CASE("fail reasons: one per violated threshold") {
  // lift below 1 on a large matched set
  RuleStats low = validate_rule(50, 1000, 0, 4500, 0.09);
  CHECK_FALSE(low.passed);
  CHECK(has_reason(low, FailReason::lift));
  CHECK(has_reason(low, FailReason::p_value));

  // coverage above 50%
  RuleStats wide = validate_rule(300, 2500, 0, 4500, 0.09);
  CHECK(has_reason(wide, FailReason::coverage_high));

  // coverage below 1%
  RuleStats narrow = validate_rule(10, 12, 0, 4500, 0.09);
  CHECK(has_reason(narrow, FailReason::coverage_low));
  CHECK_FALSE(narrow.passed);

  // error rate above 5%
  RuleStats faulty = validate_rule(39, 142, 300, 4500, 0.09);
  CHECK(has_reason(faulty, FailReason::error_rate));
  CHECK_FALSE(faulty.passed);
}

TEST_CASE("boundary semantics: exclusive lift and alpha, inclusive coverage") {
  // lift exactly 1.0 fails the exclusive threshold
  RuleStats unit = validate_rule(90, 1000, 0, 10000, 0.09);
  CHECK(unit.lift == doctest::Approx(1.0));
  CHECK(has_reason(unit, FailReason::lift));

  // coverage exactly 50% passes the inclusive bound
  ValidationThresholds t;
  RuleStats half = validate_rule(900, 5000, 0, 10000, 0.09, t);
  CHECK(half.coverage == doctest::Approx(0.5));
  CHECK_FALSE(has_reason(half, FailReason::coverage_high));
}

TEST_CASE("zero matches: coverage_low only, lift undefined") {
  RuleStats s = validate_rule(0, 0, 0, 4500, 0.09);
  CHECK_FALSE(s.passed);
  CHECK_FALSE(s.lift_defined);
  CHECK(s.fail_reasons.size() == 1);
  CHECK(has_reason(s, FailReason::coverage_low));
}

TEST_CASE("confusion counts vs brute force") {
  Rng rng(555);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<uint8_t> pred(200), label(200);
    for (auto& v : pred) v = uint8_t(rng.below(2));
    for (auto& v : label) v = uint8_t(rng.below(2));
    Confusion c = confusion_counts(pred, label);
    size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (size_t i = 0; i < 200; ++i) {
      if (pred[i] && label[i]) ++tp;
      else if (pred[i]) ++fp;
      else if (label[i]) ++fn;
      else ++tn;
    }
    CHECK(c.tp == tp);
    CHECK(c.fp == fp);
    CHECK(c.fn == fn);
    CHECK(c.tn == tn);
  }
}
