#pragma once
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vcrules/dsl.hpp"

namespace vcrules::stats {

class StatsError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class FailReason { lift, p_value, coverage_low, coverage_high, error_rate };
std::string fail_reason_name(FailReason r);

struct RuleStats {
  size_t matched_total = 0;
  size_t matched_success = 0;
  size_t error_count = 0;
  double coverage = 0.0;
  double error_rate = 0.0;
  // lift and p_value are meaningful only when lift_defined is set
  // (matched_total > 0 and base_rate > 0).
  bool lift_defined = false;
  double lift = 0.0;
  double p_value = 1.0;
  bool significant = false;
  bool passed = false;
  std::vector<FailReason> fail_reasons;
};

struct ValidationThresholds {
  double min_lift = 1.0;       // exclusive
  double alpha = 0.05;         // exclusive
  double coverage_min = 0.01;  // inclusive
  double coverage_max = 0.50;  // inclusive
  double max_error_rate = 0.05;
};

// matched-success rate over the base rate. Throws on matched_total == 0 or
// base_rate <= 0.
double precision_lift(size_t matched_success, size_t matched_total, double base_rate);

double coverage(size_t matched_total, size_t dataset_size);

// Upper tail of Binomial(n, p0) at k under the normal approximation:
// z = (k - n*p0) / sqrt(n*p0*(1-p0)), returns 1 - Phi(z) clamped to [0,1].
double binomial_p_one_sided(size_t k, size_t n, double p0);

RuleStats validate_rule(size_t matched_success, size_t matched_total, size_t error_count,
                        size_t dataset_size, double base_rate,
                        const ValidationThresholds& thresholds = {});

// (1+beta^2)*P*R / (beta^2*P + R); 0 when both P and R are 0.
double f_beta(double precision, double recall, double beta);

struct Confusion {
  size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision() const { return tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0; }
  double recall() const { return tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0; }
};

Confusion confusion_counts(std::span<const uint8_t> predictions, std::span<const uint8_t> labels);

// A candidate together with its evaluation outcome; the unit the ruleset,
// feedback, and classifier all consume.
struct ScoredRule {
  dsl::RuleCandidate rule;
  RuleStats stats;
};

}  // namespace vcrules::stats
