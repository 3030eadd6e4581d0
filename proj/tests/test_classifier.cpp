#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "vcrules/classifier.hpp"
#include "vcrules/rng.hpp"

using namespace vcrules;
using namespace vcrules::model;

namespace {

gap::ActivationMatrix random_matrix(size_t rows, size_t cols, uint64_t seed,
                                    std::vector<uint8_t>* labels, double pos_rate = 0.2) {
  gap::ActivationMatrix m;
  for (size_t c = 0; c < cols; ++c) m.rule_ids.push_back("r" + std::to_string(c));
  m.rows = rows;
  m.cells.assign(rows * cols, 0);
  labels->assign(rows, 0);
  Rng rng(seed);
  for (size_t i = 0; i < rows; ++i) {
    (*labels)[i] = uint8_t(rng.uniform() < pos_rate);
    for (size_t c = 0; c < cols; ++c) m.cells[i * cols + c] = uint8_t(rng.below(3) == 0);
  }
  // force both classes
  (*labels)[0] = 1;
  (*labels)[1] = 0;
  return m;
}

}  // namespace

TEST_CASE("balanced class weights: 9 positives of 100") {
  std::vector<uint8_t> labels(100, 0);
  for (int i = 0; i < 9; ++i) labels[i] = 1;
  auto [w_neg, w_pos] = balanced_class_weights(labels);
  CHECK(w_pos == doctest::Approx(100.0 / (2 * 9)).epsilon(1e-4));   // 5.556
  CHECK(w_neg == doctest::Approx(100.0 / (2 * 91)).epsilon(1e-4));  // 0.549
  CHECK(std::abs(w_pos - 5.556) < 1e-3);
  CHECK(std::abs(w_neg - 0.549) < 1e-3);
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::vector<uint8_t> labels;
  gap::ActivationMatrix x = random_matrix(80, 6, 21, &labels);
  Rng rng(99);
  const double h = 1e-6, l2 = 1e-3;
  for (int point = 0; point < 10; ++point) {
    std::vector<double> w(6);
    for (auto& v : w) v = rng.uniform() * 2 - 1;
    double b = rng.uniform() * 2 - 1;
    std::vector<double> grad(6);
    double grad_b = 0.0;
    logistic_gradient(x, labels, w, b, l2, grad, grad_b);
    for (size_t j = 0; j < 6; ++j) {
      std::vector<double> wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      double fd = (logistic_loss(x, labels, wp, b, l2) - logistic_loss(x, labels, wm, b, l2)) /
                  (2 * h);
      CHECK(std::abs(grad[j] - fd) / std::max(1.0, std::abs(fd)) <= 1e-5);
    }
    double fd_b =
        (logistic_loss(x, labels, w, b + h, l2) - logistic_loss(x, labels, w, b - h, l2)) /
        (2 * h);
    CHECK(std::abs(grad_b - fd_b) / std::max(1.0, std::abs(fd_b)) <= 1e-5);
  }
}

TEST_CASE("separable toy reaches 100% training accuracy") {
  gap::ActivationMatrix x;
  x.rule_ids = {"signal"};
  x.rows = 40;
  x.cells.assign(40, 0);
  std::vector<uint8_t> labels(40, 0);
  for (size_t i = 0; i < 20; ++i) {
    x.cells[i] = 1;
    labels[i] = 1;
  }
  FitResult fit = fit_logistic(x, labels);
  CHECK(fit.converged);
  size_t correct = 0;
  for (size_t i = 0; i < 40; ++i) {
    double p = sigmoid(fit.intercept + fit.weights[0] * x.cells[i]);
    correct += (p >= 0.5) == (labels[i] == 1);
  }
  CHECK(correct == 40);
  CHECK(fit.weights[0] > 0);
}

TEST_CASE("loss history decreases across accepted steps") {
  std::vector<uint8_t> labels;
  gap::ActivationMatrix x = random_matrix(150, 5, 33, &labels);
  FitResult fit = fit_logistic(x, labels);
  for (size_t i = 1; i < fit.loss_history.size(); ++i) {
    CHECK(fit.loss_history[i] <= fit.loss_history[i - 1] + 1e-12);
  }
}

TEST_CASE("fit rejects single-class labels") {
  gap::ActivationMatrix x;
  x.rule_ids = {"a"};
  x.rows = 10;
  x.cells.assign(10, 1);
  std::vector<uint8_t> labels(10, 1);
  CHECK_THROWS_AS(fit_logistic(x, labels), ModelError);
}

TEST_CASE("stratified folds: per-class and total spread within one") {
  std::vector<uint8_t> labels(100, 0);
  for (int i = 0; i < 9; ++i) labels[i * 11] = 1;
  std::vector<int> folds = stratified_folds(labels, 5, 7);
  REQUIRE(folds.size() == 100);
  std::map<int, int> fold_sizes, fold_pos;
  for (size_t i = 0; i < 100; ++i) {
    ++fold_sizes[folds[i]];
    fold_pos[folds[i]] += labels[i];
  }
  REQUIRE(fold_sizes.size() == 5);
  auto spread = [](std::map<int, int>& counts) {
    int lo = 1 << 30, hi = 0;
    for (auto& [f, n] : counts) {
      lo = std::min(lo, n);
      hi = std::max(hi, n);
    }
    return hi - lo;
  };
  CHECK(spread(fold_sizes) <= 1);
  CHECK(spread(fold_pos) <= 1);
  // deterministic per seed, different across seeds
  CHECK(stratified_folds(labels, 5, 7) == folds);
  CHECK(stratified_folds(labels, 5, 8) != folds);
}

TEST_CASE("tuned threshold matches exhaustive midpoint scan") {
  Rng rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    size_t n = 30 + rng.below(60);
    std::vector<double> probs(n);
    std::vector<uint8_t> labels(n);
    for (size_t i = 0; i < n; ++i) {
      probs[i] = rng.uniform();
      labels[i] = uint8_t(rng.below(3) == 0);
    }
    double tuned = tune_threshold(probs, labels, 0.5);

    // oracle: scan every midpoint of distinct sorted probs plus 0.5
    std::vector<double> distinct(probs);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<double> candidates = {0.5};
    for (size_t i = 1; i < distinct.size(); ++i)
      candidates.push_back((distinct[i - 1] + distinct[i]) / 2);
    double best_t = 0.5, best_f = -1;
    for (double t : candidates) {
      stats::Confusion c;
      for (size_t i = 0; i < n; ++i) {
        bool pred = probs[i] >= t;
        if (pred && labels[i]) ++c.tp;
        else if (pred) ++c.fp;
        else if (labels[i]) ++c.fn;
        else ++c.tn;
      }
      double f = stats::f_beta(c.precision(), c.recall(), 0.5);
      if (f > best_f || (f == best_f && t > best_t)) {
        best_f = f;
        best_t = t;
      }
    }
    CHECK(tuned == doctest::Approx(best_t));
  }
}

TEST_CASE("cross validation: pooled metrics recomputable from oof probabilities") {
  std::vector<uint8_t> labels;
  gap::ActivationMatrix x = random_matrix(300, 8, 42, &labels, 0.15);
  TrainConfig cfg;
  cfg.seed = 9;
  auto [report, ensemble] = cross_validated_eval(x, labels, cfg);
  REQUIRE(report.oof_probabilities.size() == 300);
  CHECK(report.fold_count == 5);
  CHECK(ensemble.threshold == report.threshold);
  CHECK(ensemble.rule_ids == x.rule_ids);

  stats::Confusion c;
  for (size_t i = 0; i < 300; ++i) {
    bool pred = report.oof_probabilities[i] >= report.threshold;
    if (pred && labels[i]) ++c.tp;
    else if (pred) ++c.fp;
    else if (labels[i]) ++c.fn;
    else ++c.tn;
  }
  CHECK(report.pooled.precision == doctest::Approx(c.precision()));
  CHECK(report.pooled.recall == doctest::Approx(c.recall()));
  CHECK(report.pooled.f_beta ==
        doctest::Approx(stats::f_beta(c.precision(), c.recall(), 0.5)));

  // determinism
  auto [report2, ensemble2] = cross_validated_eval(x, labels, cfg);
  CHECK(report2.oof_probabilities == report.oof_probabilities);
  CHECK(ensemble2.weights == ensemble.weights);
}

TEST_CASE("predict_probability and explanation agree") {
  std::vector<uint8_t> labels;
  gap::ActivationMatrix x = random_matrix(200, 4, 77, &labels);
  TrainConfig cfg;
  auto [report, ensemble] = cross_validated_eval(x, labels, cfg);

  std::vector<stats::ScoredRule> ruleset;
  const char* sources[] = {
      "lambda founder: len(founder.get(\"ipos\", [])) > 0",
      "lambda founder: len(founder.get(\"acquisitions\", [])) > 0",
      "lambda founder: len(founder.get(\"jobs\", [])) > 2",
      "lambda founder: len(founder.get(\"educations\", [])) > 0",
  };
  for (size_t i = 0; i < 4; ++i) {
    stats::ScoredRule r;
    r.rule.name = x.rule_ids[i];
    r.rule.source = sources[i];
    r.rule.ast = dsl::parse_rule_expression(r.rule.source);
    r.stats.lift_defined = true;
    r.stats.lift = 2.0;
    ruleset.push_back(r);
  }
  LabeledDataset ds = generate_synthetic_dataset(30, 0.2, {}, 13);
  for (const auto& record : ds.records) {
    std::vector<uint8_t> row(4);
    for (size_t c = 0; c < 4; ++c)
      row[c] = uint8_t(dsl::evaluate(*ruleset[c].rule.ast, record).value);
    double p = predict_probability(ensemble, row);
    Explanation ex = explain_prediction(ensemble, record, ruleset);
    CHECK(ex.probability == doctest::Approx(p));
    CHECK(ex.decision == (p >= ensemble.threshold));
    size_t active = 0;
    for (uint8_t v : row) active += v;
    CHECK(ex.active_rules.size() == active);
    for (size_t i = 1; i < ex.active_rules.size(); ++i) {
      CHECK(std::abs(ex.active_rules[i - 1].weight) >=
            std::abs(ex.active_rules[i].weight) - 1e-12);
    }
  }
}
