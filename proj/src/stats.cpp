#include "vcrules/stats.hpp"

#include <algorithm>
#include <cmath>

namespace vcrules::stats {

std::string fail_reason_name(FailReason r) {
  switch (r) {
    case FailReason::lift: return "lift";
    case FailReason::p_value: return "p_value";
    case FailReason::coverage_low: return "coverage_low";
    case FailReason::coverage_high: return "coverage_high";
    case FailReason::error_rate: return "error_rate";
  }
  return "?";
}

double precision_lift(size_t matched_success, size_t matched_total, double base_rate) {
  if (matched_total == 0) throw StatsError("precision_lift: no matched founders, lift undefined");
  if (base_rate <= 0.0) throw StatsError("precision_lift: base rate must be positive");
  double matched_rate = static_cast<double>(matched_success) / static_cast<double>(matched_total);
  return matched_rate / base_rate;
}

double coverage(size_t matched_total, size_t dataset_size) {
  if (dataset_size == 0) throw StatsError("coverage: empty dataset");
  if (matched_total > dataset_size) throw StatsError("coverage: matched exceeds dataset size");
  return static_cast<double>(matched_total) / static_cast<double>(dataset_size);
}

double binomial_p_one_sided(size_t k, size_t n, double p0) {
  if (n == 0) throw StatsError("binomial test: n must be >= 1");
  if (p0 <= 0.0 || p0 >= 1.0) throw StatsError("binomial test: p0 must lie strictly in (0,1)");
  double nn = static_cast<double>(n);
  double z = (static_cast<double>(k) - nn * p0) / std::sqrt(nn * p0 * (1.0 - p0));
  double p = 0.5 * std::erfc(z / std::sqrt(2.0));  // 1 - Phi(z)
  return std::clamp(p, 0.0, 1.0);
}

RuleStats validate_rule(size_t matched_success, size_t matched_total, size_t error_count,
                        size_t dataset_size, double base_rate,
                        const ValidationThresholds& thresholds) {
  if (dataset_size == 0) throw StatsError("validate_rule: empty dataset");
  if (matched_success > matched_total || matched_total > dataset_size)
    throw StatsError("validate_rule: inconsistent counts");

  RuleStats s;
  s.matched_total = matched_total;
  s.matched_success = matched_success;
  s.error_count = error_count;
  s.coverage = coverage(matched_total, dataset_size);
  s.error_rate = static_cast<double>(error_count) / static_cast<double>(dataset_size);

  if (matched_total == 0) {
    // lift and p-value stay unset
    s.fail_reasons.push_back(FailReason::coverage_low);
    if (s.error_rate > thresholds.max_error_rate)
      s.fail_reasons.push_back(FailReason::error_rate);
    s.passed = false;
    return s;
  }

  if (base_rate > 0.0) {
    s.lift_defined = true;
    s.lift = precision_lift(matched_success, matched_total, base_rate);
    s.p_value = binomial_p_one_sided(matched_success, matched_total, base_rate);
    s.significant = s.p_value < thresholds.alpha;
  }

  if (!s.lift_defined || !(s.lift > thresholds.min_lift)) s.fail_reasons.push_back(FailReason::lift);
  if (!s.lift_defined || !(s.p_value < thresholds.alpha))
    s.fail_reasons.push_back(FailReason::p_value);
  if (s.coverage < thresholds.coverage_min) s.fail_reasons.push_back(FailReason::coverage_low);
  if (s.coverage > thresholds.coverage_max) s.fail_reasons.push_back(FailReason::coverage_high);
  if (s.error_rate > thresholds.max_error_rate) s.fail_reasons.push_back(FailReason::error_rate);
  s.passed = s.fail_reasons.empty();
  return s;
}

double f_beta(double precision, double recall, double beta) {
  if (precision == 0.0 && recall == 0.0) return 0.0;
  double b2 = beta * beta;
  double denom = b2 * precision + recall;
  if (denom == 0.0) return 0.0;
  return (1.0 + b2) * precision * recall / denom;
}

Confusion confusion_counts(std::span<const uint8_t> predictions, std::span<const uint8_t> labels) {
  if (predictions.size() != labels.size())
    throw StatsError("confusion_counts: length mismatch");
  Confusion c;
  for (size_t i = 0; i < predictions.size(); ++i) {
    bool p = predictions[i] != 0;
    bool y = labels[i] != 0;
    if (p && y) ++c.tp;
    else if (p && !y) ++c.fp;
    else if (!p && y) ++c.fn;
    else ++c.tn;
  }
  return c;
}

}  // namespace vcrules::stats
