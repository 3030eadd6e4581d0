#include "vcrules/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vcrules/rng.hpp"

namespace vcrules::model {

std::vector<int> stratified_folds(std::span<const uint8_t> labels, int k, uint64_t seed) {
  if (k < 2) throw ModelError("stratified_folds: need k >= 2");
  std::vector<size_t> pos, neg;
  for (size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
  if (pos.size() < static_cast<size_t>(k) || neg.size() < static_cast<size_t>(k))
    throw ModelError("stratified_folds: each class needs at least k members");

  Rng rng(derive_seed(seed, 0xf01d));
  rng.shuffle(pos);
  rng.shuffle(neg);

  // Deal round-robin, carrying the position across classes so fold sizes
  // stay within one of each other.
  std::vector<int> fold(labels.size(), -1);
  int cursor = 0;
  for (size_t i : pos) fold[i] = cursor++ % k;
  for (size_t i : neg) fold[i] = cursor++ % k;
  return fold;
}

std::pair<double, double> balanced_class_weights(std::span<const uint8_t> labels) {
  size_t n_pos = 0;
  for (uint8_t l : labels) n_pos += l;
  size_t n = labels.size();
  size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw ModelError("balanced_class_weights: both classes must be present");
  return {static_cast<double>(n) / (2.0 * n_neg), static_cast<double>(n) / (2.0 * n_pos)};
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

double softplus(double z) {  // log(1 + e^z), overflow-safe
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

std::vector<double> logits(const gap::ActivationMatrix& x, std::span<const double> w, double b) {
  size_t n = x.rows, d = x.cols();
  std::vector<double> z(n, b);
  for (size_t i = 0; i < n; ++i) {
    auto row = x.row(i);
    for (size_t j = 0; j < d; ++j) {
      if (row[j]) z[i] += w[j];
    }
  }
  return z;
}

}  // namespace

double logistic_loss(const gap::ActivationMatrix& x, std::span<const uint8_t> y,
                     std::span<const double> weights, double intercept, double l2_strength) {
  auto [w_neg, w_pos] = balanced_class_weights(y);
  std::vector<double> z = logits(x, weights, intercept);
  double loss = 0;
  for (size_t i = 0; i < x.rows; ++i) {
    double cw = y[i] ? w_pos : w_neg;
    loss += cw * (softplus(z[i]) - (y[i] ? z[i] : 0.0));
  }
  double reg = 0;
  for (double w : weights) reg += w * w;
  return (loss + 0.5 * l2_strength * reg) / static_cast<double>(x.rows);
}

void logistic_gradient(const gap::ActivationMatrix& x, std::span<const uint8_t> y,
                       std::span<const double> weights, double intercept, double l2_strength,
                       std::span<double> grad_weights, double& grad_intercept) {
  auto [w_neg, w_pos] = balanced_class_weights(y);
  size_t n = x.rows, d = x.cols();
  std::vector<double> z = logits(x, weights, intercept);
  std::fill(grad_weights.begin(), grad_weights.end(), 0.0);
  grad_intercept = 0;
  for (size_t i = 0; i < n; ++i) {
    double cw = y[i] ? w_pos : w_neg;
    double resid = cw * (sigmoid(z[i]) - (y[i] ? 1.0 : 0.0));
    grad_intercept += resid;
    auto row = x.row(i);
    for (size_t j = 0; j < d; ++j) {
      if (row[j]) grad_weights[j] += resid;
    }
  }
  for (size_t j = 0; j < d; ++j) {
    grad_weights[j] = (grad_weights[j] + l2_strength * weights[j]) / static_cast<double>(n);
  }
  grad_intercept /= static_cast<double>(n);
}

FitResult fit_logistic(const gap::ActivationMatrix& x, std::span<const uint8_t> y,
                       double l2_strength, int max_iter, double tolerance) {
  if (x.rows == 0) throw ModelError("fit_logistic: empty feature matrix");
  if (x.rows != y.size()) throw ModelError("fit_logistic: matrix/label size mismatch");
  balanced_class_weights(y);  // rejects single-class labels up front

  size_t d = x.cols();
  FitResult r;
  r.weights.assign(d, 0.0);
  r.intercept = 0.0;

  std::vector<double> grad(d), trial_w(d);
  double grad_b = 0;
  double loss = logistic_loss(x, y, r.weights, r.intercept, l2_strength);
  r.loss_history.push_back(loss);
  double step = 1.0;

  for (int iter = 0; iter < max_iter; ++iter) {
    logistic_gradient(x, y, r.weights, r.intercept, l2_strength, grad, grad_b);
    double gmax = std::abs(grad_b);
    double gnorm2 = grad_b * grad_b;
    for (double g : grad) {
      gmax = std::max(gmax, std::abs(g));
      gnorm2 += g * g;
    }
    r.iterations = iter;
    if (gmax <= tolerance) {
      r.converged = true;
      return r;
    }

    // backtracking line search, Armijo condition
    double t = std::min(step * 2.0, 1e4);
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (size_t j = 0; j < d; ++j) trial_w[j] = r.weights[j] - t * grad[j];
      double trial_b = r.intercept - t * grad_b;
      double trial_loss = logistic_loss(x, y, trial_w, trial_b, l2_strength);
      if (trial_loss <= loss - 1e-4 * t * gnorm2) {
        r.weights = trial_w;
        r.intercept = trial_b;
        loss = trial_loss;
        r.loss_history.push_back(loss);
        step = t;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // step underflow; report as non-converged
  }
  r.converged = false;
  return r;
}

double predict_probability(const EnsembleModel& model, std::span<const uint8_t> activation_row) {
  if (activation_row.size() != model.weights.size())
    throw ModelError("predict_probability: activation row length mismatch");
  double z = model.intercept;
  for (size_t j = 0; j < model.weights.size(); ++j) {
    if (activation_row[j]) z += model.weights[j];
  }
  return sigmoid(z);
}

double tune_threshold(std::span<const double> probabilities, std::span<const uint8_t> labels,
                      double beta) {
  if (probabilities.size() != labels.size())
    throw ModelError("tune_threshold: probabilities/labels length mismatch");

  std::vector<double> distinct(probabilities.begin(), probabilities.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<double> candidates{0.5};
  for (size_t i = 0; i + 1 < distinct.size(); ++i) {
    candidates.push_back((distinct[i] + distinct[i + 1]) / 2.0);
  }
  std::sort(candidates.begin(), candidates.end());

  double best_t = 0.5, best_score = -1.0;
  std::vector<uint8_t> pred(labels.size());
  for (double t : candidates) {
    for (size_t i = 0; i < probabilities.size(); ++i) pred[i] = probabilities[i] >= t ? 1 : 0;
    stats::Confusion c = stats::confusion_counts(pred, labels);
    double score = stats::f_beta(c.precision(), c.recall(), beta);
    if (score >= best_score) {  // ties go to the higher threshold
      best_score = score;
      best_t = t;
    }
  }
  return best_t;
}

namespace {

FoldMetrics metrics_at(std::span<const double> probs, std::span<const uint8_t> labels,
                       double threshold, double beta) {
  std::vector<uint8_t> pred(labels.size());
  for (size_t i = 0; i < probs.size(); ++i) pred[i] = probs[i] >= threshold ? 1 : 0;
  stats::Confusion c = stats::confusion_counts(pred, labels);
  return {c.precision(), c.recall(), stats::f_beta(c.precision(), c.recall(), beta)};
}

gap::ActivationMatrix submatrix(const gap::ActivationMatrix& x, const std::vector<size_t>& rows) {
  gap::ActivationMatrix out;
  out.rows = rows.size();
  out.rule_ids = x.rule_ids;
  out.cells.reserve(rows.size() * x.cols());
  for (size_t r : rows) {
    auto row = x.row(r);
    out.cells.insert(out.cells.end(), row.begin(), row.end());
  }
  return out;
}

}  // namespace

std::pair<CrossValReport, EnsembleModel> cross_validated_eval(const gap::ActivationMatrix& x,
                                                              std::span<const uint8_t> y,
                                                              const TrainConfig& config) {
  std::vector<int> fold = stratified_folds(y, config.folds, config.seed);
  CrossValReport report;
  report.fold_count = config.folds;
  report.oof_probabilities.assign(y.size(), 0.0);

  for (int f = 0; f < config.folds; ++f) {
    std::vector<size_t> train_rows, val_rows;
    for (size_t i = 0; i < y.size(); ++i) (fold[i] == f ? val_rows : train_rows).push_back(i);
    gap::ActivationMatrix train_x = submatrix(x, train_rows);
    std::vector<uint8_t> train_y;
    for (size_t i : train_rows) train_y.push_back(y[i]);

    FitResult fit = fit_logistic(train_x, train_y, config.l2_strength, config.max_iter,
                                 config.tolerance);
    EnsembleModel fold_model;
    fold_model.rule_ids = x.rule_ids;
    fold_model.weights = fit.weights;
    fold_model.intercept = fit.intercept;
    for (size_t i : val_rows) {
      report.oof_probabilities[i] = predict_probability(fold_model, x.row(i));
    }
  }

  report.threshold = tune_threshold(report.oof_probabilities, y, config.beta);
  report.pooled = metrics_at(report.oof_probabilities, y, report.threshold, config.beta);
  for (int f = 0; f < config.folds; ++f) {
    std::vector<double> probs;
    std::vector<uint8_t> labels;
    for (size_t i = 0; i < y.size(); ++i) {
      if (fold[i] == f) {
        probs.push_back(report.oof_probabilities[i]);
        labels.push_back(y[i]);
      }
    }
    report.per_fold.push_back(metrics_at(probs, labels, report.threshold, config.beta));
  }

  FitResult final_fit =
      fit_logistic(x, y, config.l2_strength, config.max_iter, config.tolerance);
  EnsembleModel model;
  model.rule_ids = x.rule_ids;
  model.weights = final_fit.weights;
  model.intercept = final_fit.intercept;
  model.threshold = report.threshold;
  model.training_config = config;
  model.converged = final_fit.converged;
  return {std::move(report), std::move(model)};
}

Explanation explain_prediction(const EnsembleModel& model, const FounderRecord& founder,
                               const std::vector<stats::ScoredRule>& ruleset) {
  dsl::Value v = dsl::to_value(founder);
  Explanation ex;
  double z = model.intercept;
  for (size_t j = 0; j < model.rule_ids.size(); ++j) {
    const stats::ScoredRule* rule = nullptr;
    for (const auto& r : ruleset) {
      if (r.rule.name == model.rule_ids[j]) {
        rule = &r;
        break;
      }
    }
    if (!rule) throw ModelError("explain_prediction: rule '" + model.rule_ids[j] +
                                "' missing from ruleset");
    if (dsl::evaluate(*rule->rule.ast, v).value) {
      z += model.weights[j];
      ex.active_rules.push_back({rule->rule.name, rule->rule.description, model.weights[j],
                                 rule->stats.lift_defined, rule->stats.lift});
    }
  }
  std::stable_sort(ex.active_rules.begin(), ex.active_rules.end(),
                   [](const ActiveRule& a, const ActiveRule& b) {
                     return std::abs(a.weight) > std::abs(b.weight);
                   });
  ex.probability = sigmoid(z);
  ex.decision = ex.probability >= model.threshold;
  return ex;
}

}  // namespace vcrules::model
