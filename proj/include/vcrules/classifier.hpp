#pragma once
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vcrules/cluster.hpp"
#include "vcrules/stats.hpp"

namespace vcrules::model {

class ModelError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  double l2_strength = 1e-4;
  int max_iter = 1000;
  double tolerance = 1e-6;  // gradient max-norm on the mean objective
  uint64_t seed = 0;
  int folds = 5;
  double beta = 0.5;
};

struct EnsembleModel {
  std::vector<std::string> rule_ids;
  std::vector<double> weights;
  double intercept = 0.0;
  double threshold = 0.5;
  TrainConfig training_config;
  bool converged = true;
};

// Deterministic stratified assignment: within each class indices are
// shuffled by seed and dealt round-robin, the deal position carrying over
// between classes so fold sizes stay within 1.
std::vector<int> stratified_folds(std::span<const uint8_t> labels, int k, uint64_t seed);

// w_c = N / (2 * N_c); returned as (weight_negative, weight_positive).
std::pair<double, double> balanced_class_weights(std::span<const uint8_t> labels);

// Mean weighted L2-regularized negative log-likelihood and its gradient.
// Exposed so the finite-difference oracle can probe the same objective the
// optimizer minimizes. Intercept is unregularized.
double logistic_loss(const gap::ActivationMatrix& x, std::span<const uint8_t> y,
                     std::span<const double> weights, double intercept, double l2_strength);
void logistic_gradient(const gap::ActivationMatrix& x, std::span<const uint8_t> y,
                       std::span<const double> weights, double intercept, double l2_strength,
                       std::span<double> grad_weights, double& grad_intercept);

struct FitResult {
  std::vector<double> weights;
  double intercept = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> loss_history;  // accepted steps only
};

// Full-batch gradient descent with backtracking line search and balanced
// class weights. Throws on single-class labels.
FitResult fit_logistic(const gap::ActivationMatrix& x, std::span<const uint8_t> y,
                       double l2_strength = 1e-4, int max_iter = 1000, double tolerance = 1e-6);

double sigmoid(double z);
double predict_probability(const EnsembleModel& model, std::span<const uint8_t> activation_row);

// Candidate thresholds are the midpoints between consecutive distinct
// sorted probabilities plus 0.5; picks the max-F_beta candidate, ties to
// the higher threshold. Predictions use probability >= threshold.
double tune_threshold(std::span<const double> probabilities, std::span<const uint8_t> labels,
                      double beta = 0.5);

struct FoldMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f_beta = 0.0;
};

struct CrossValReport {
  int fold_count = 0;
  std::vector<FoldMetrics> per_fold;  // at the pooled tuned threshold
  FoldMetrics pooled;
  double threshold = 0.5;
  std::vector<double> oof_probabilities;
};

// Per-fold fit/predict, pooled out-of-fold threshold tuning, final refit on
// all data with the tuned threshold attached.
std::pair<CrossValReport, EnsembleModel> cross_validated_eval(const gap::ActivationMatrix& x,
                                                              std::span<const uint8_t> y,
                                                              const TrainConfig& config);

struct ActiveRule {
  std::string name;
  std::string description;
  double weight = 0.0;
  bool lift_defined = false;
  double lift = 0.0;
};

struct Explanation {
  double probability = 0.0;
  bool decision = false;
  std::vector<ActiveRule> active_rules;  // sorted by |weight| descending
};

// ruleset must contain every rule named in model.rule_ids.
Explanation explain_prediction(const EnsembleModel& model, const FounderRecord& founder,
                               const std::vector<stats::ScoredRule>& ruleset);

}  // namespace vcrules::model
