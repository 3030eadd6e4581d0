#include "vcrules/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "vcrules/rng.hpp"

namespace vcrules::gap {

size_t ActivationMatrix::distinct_row_count() const {
  std::set<std::vector<uint8_t>> seen;
  for (size_t r = 0; r < rows; ++r) {
    auto row_span = row(r);
    seen.emplace(row_span.begin(), row_span.end());
  }
  return seen.size();
}

ActivationMatrix build_activation_matrix(const LabeledDataset& dataset,
                                         const std::vector<stats::ScoredRule>& rules) {
  ActivationMatrix m;
  m.rows = dataset.size();
  for (const auto& r : rules) m.rule_ids.push_back(r.rule.name);
  m.cells.assign(m.rows * rules.size(), 0);
  for (size_t c = 0; c < rules.size(); ++c) {
    dsl::ActivationColumn col = dsl::evaluate_over_dataset(*rules[c].rule.ast, dataset);
    for (size_t r = 0; r < m.rows; ++r) m.cells[r * rules.size() + c] = col.matches[r];
  }
  return m;
}

namespace {

double sq_distance(std::span<const uint8_t> row, const std::vector<double>& centroid) {
  double d = 0;
  for (size_t j = 0; j < centroid.size(); ++j) {
    double diff = static_cast<double>(row[j]) - centroid[j];
    d += diff * diff;
  }
  return d;
}

}  // namespace

KMeansResult kmeans(const ActivationMatrix& matrix, int k, uint64_t seed, int max_iter) {
  const size_t n = matrix.rows;
  const size_t dim = matrix.cols();
  if (k < 1) throw ClusterError("kmeans: k must be >= 1");
  if (static_cast<size_t>(k) > matrix.distinct_row_count())
    throw ClusterError("kmeans: k exceeds the number of distinct rows");

  Rng rng(derive_seed(seed, 0x6b6d));

  // k-means++ seeding
  std::vector<std::vector<double>> centroids;
  auto row_as_centroid = [&](size_t r) {
    std::vector<double> c(dim);
    for (size_t j = 0; j < dim; ++j) c[j] = matrix.at(r, j);
    return c;
  };
  centroids.push_back(row_as_centroid(rng.below(n)));
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  while (centroids.size() < static_cast<size_t>(k)) {
    double total = 0;
    for (size_t r = 0; r < n; ++r) {
      min_d2[r] = std::min(min_d2[r], sq_distance(matrix.row(r), centroids.back()));
      total += min_d2[r];
    }
    size_t chosen = 0;
    if (total > 0) {
      double target = rng.uniform() * total;
      double acc = 0;
      for (size_t r = 0; r < n; ++r) {
        acc += min_d2[r];
        if (acc >= target) {
          chosen = r;
          break;
        }
      }
    } else {
      // all remaining distances zero; pick the first unused distinct row
      chosen = rng.below(n);
    }
    centroids.push_back(row_as_centroid(chosen));
  }

  KMeansResult res;
  res.assignments.assign(n, -1);

  for (int iter = 0; iter < max_iter; ++iter) {
    // assignment
    bool changed = false;
    double inertia = 0;
    for (size_t r = 0; r < n; ++r) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        double d = sq_distance(matrix.row(r), centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      inertia += best_d;
      if (res.assignments[r] != best) {
        res.assignments[r] = best;
        changed = true;
      }
    }
    res.inertia = inertia;
    res.inertia_history.push_back(inertia);
    if (!changed && iter > 0) break;

    // update
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<size_t> counts(k, 0);
    for (size_t r = 0; r < n; ++r) {
      int c = res.assignments[r];
      ++counts[c];
      for (size_t j = 0; j < dim; ++j) sums[c][j] += matrix.at(r, j);
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // re-seed an empty cluster with the point farthest from its centroid
        size_t far = 0;
        double far_d = -1;
        for (size_t r = 0; r < n; ++r) {
          double d = sq_distance(matrix.row(r), centroids[res.assignments[r]]);
          if (d > far_d) {
            far_d = d;
            far = r;
          }
        }
        centroids[c] = row_as_centroid(far);
      } else {
        for (size_t j = 0; j < dim; ++j) centroids[c][j] = sums[c][j] / counts[c];
      }
    }
  }

  res.centroids = std::move(centroids);
  return res;
}

namespace {

double best_of_restarts(const ActivationMatrix& matrix, int k, uint64_t seed, int restarts) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    best = std::min(best, kmeans(matrix, k, derive_seed(seed, k, r)).inertia);
  }
  return best;
}

}  // namespace

int choose_k_elbow(const ActivationMatrix& matrix, uint64_t seed, int k_min, int k_max,
                   int restarts) {
  size_t distinct = matrix.distinct_row_count();
  if (distinct <= 1) return static_cast<int>(distinct);
  int cap = static_cast<int>(std::min<size_t>(distinct, static_cast<size_t>(k_max)));
  if (k_min > cap) return cap;

  std::map<int, double> inertia;
  int upper = std::min<int>(cap + 1, static_cast<int>(distinct));
  for (int k = k_min; k <= upper; ++k) inertia[k] = best_of_restarts(matrix, k, seed, restarts);

  for (int k = k_min; k <= cap; ++k) {
    if (inertia[k] <= 0.0) return k;  // perfect fit, nothing left to explain
    auto next = inertia.find(k + 1);
    if (next == inertia.end()) break;
    double improvement = (inertia[k] - next->second) / inertia[k];
    if (improvement < 0.10) return k;
  }
  return std::min(4, cap);  // no elbow found
}

std::string cluster_class_name(ClusterClass c) {
  switch (c) {
    case ClusterClass::high_success: return "high_success";
    case ClusterClass::low_success: return "low_success";
    case ClusterClass::mixed: return "mixed";
    case ClusterClass::no_action: return "no_action";
  }
  return "?";
}

ClusterClass classify_cluster(size_t size, double success_rate) {
  if (success_rate > 0.15) return ClusterClass::high_success;
  if (success_rate < 0.07 && size > 400) return ClusterClass::low_success;
  if (success_rate >= 0.07 && success_rate <= 0.12 && size > 400) return ClusterClass::mixed;
  return ClusterClass::no_action;
}

std::vector<size_t> uncovered_successes(const ActivationMatrix& matrix,
                                        std::span<const uint8_t> labels) {
  std::vector<size_t> out;
  for (size_t r = 0; r < matrix.rows; ++r) {
    if (!labels[r]) continue;
    auto row = matrix.row(r);
    bool any = false;
    for (uint8_t v : row) {
      if (v) {
        any = true;
        break;
      }
    }
    if (!any) out.push_back(r);
  }
  return out;
}

ClusterReport analyze_gaps(const ActivationMatrix& matrix, std::span<const uint8_t> labels,
                           uint64_t seed, int k_min, int k_max, int restarts) {
  ClusterReport report;
  int k = choose_k_elbow(matrix, seed, k_min, k_max, restarts);
  report.k = k;
  if (k < 1) return report;

  // rerun the best-of-restarts winner for the chosen k
  KMeansResult best;
  double best_inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    KMeansResult cand = kmeans(matrix, k, derive_seed(seed, k, r));
    if (cand.inertia < best_inertia) {
      best_inertia = cand.inertia;
      best = std::move(cand);
    }
  }
  report.assignments = best.assignments;
  report.inertia = best.inertia;

  size_t cols = matrix.cols();
  std::vector<double> global_rate(cols, 0.0);
  for (size_t r = 0; r < matrix.rows; ++r) {
    for (size_t c = 0; c < cols; ++c) global_rate[c] += matrix.at(r, c);
  }
  for (size_t c = 0; c < cols; ++c) global_rate[c] /= matrix.rows ? matrix.rows : 1;

  report.clusters.resize(k);
  std::vector<std::vector<double>> cluster_rate(k, std::vector<double>(cols, 0.0));
  for (size_t r = 0; r < matrix.rows; ++r) {
    int c = report.assignments[r];
    ++report.clusters[c].size;
    report.clusters[c].success_count += labels[r];
    for (size_t j = 0; j < cols; ++j) cluster_rate[c][j] += matrix.at(r, j);
  }
  for (int c = 0; c < k; ++c) {
    ClusterInfo& info = report.clusters[c];
    info.success_rate = info.size ? static_cast<double>(info.success_count) / info.size : 0.0;
    info.classification = classify_cluster(info.size, info.success_rate);
    std::vector<std::pair<std::string, double>> contrast;
    for (size_t j = 0; j < cols; ++j) {
      double rate = info.size ? cluster_rate[c][j] / info.size : 0.0;
      contrast.emplace_back(matrix.rule_ids[j], rate - global_rate[j]);
    }
    std::stable_sort(contrast.begin(), contrast.end(), [](const auto& a, const auto& b) {
      return std::abs(a.second) > std::abs(b.second);
    });
    if (contrast.size() > 5) contrast.resize(5);
    info.distinctive_rules = std::move(contrast);
  }

  report.uncovered_success_indices = uncovered_successes(matrix, labels);
  return report;
}

// ---------------------------------------------------------------------------
// Feedback

std::string founder_excerpt(const FounderRecord& r) {
  std::ostringstream os;
  os << "industry=" << (r.industry.empty() ? "?" : r.industry);
  os << " | educations=" << r.educations.size();
  if (!r.educations.empty()) {
    os << " (" << r.educations[0].degree;
    if (!r.educations[0].field.empty()) os << " " << r.educations[0].field;
    os << ")";
  }
  os << " | jobs=" << r.jobs.size();
  os << " | exits=" << (r.ipos.size() + r.acquisitions.size());
  return os.str();
}

namespace {

std::vector<std::string> pick_examples(const LabeledDataset& dataset,
                                       const std::vector<size_t>& candidates, size_t cap,
                                       Rng& rng) {
  std::vector<size_t> pool = candidates;
  rng.shuffle(pool);
  if (pool.size() > cap) pool.resize(cap);
  std::sort(pool.begin(), pool.end());  // stable presentation order
  std::vector<std::string> out;
  for (size_t i : pool) out.push_back(founder_excerpt(dataset.records[i]));
  return out;
}

GapSection make_section(int cluster_index, const ClusterInfo& info, const LabeledDataset& dataset,
                        const std::vector<int>& assignments, size_t cap, Rng& rng,
                        const std::string& instruction) {
  GapSection s;
  s.cluster_index = cluster_index;
  s.info = info;
  s.instruction = instruction;
  std::vector<size_t> succ, fail;
  for (size_t r = 0; r < dataset.size(); ++r) {
    if (assignments[r] != cluster_index) continue;
    (dataset.labels[r] ? succ : fail).push_back(r);
  }
  s.success_examples = pick_examples(dataset, succ, cap, rng);
  s.failure_examples = pick_examples(dataset, fail, cap, rng);
  return s;
}

}  // namespace

FeedbackPayload build_feedback(const ClusterReport& report,
                               const std::vector<stats::ScoredRule>& rules,
                               const LabeledDataset& dataset, size_t examples_per_section,
                               uint64_t seed) {
  FeedbackPayload fb;
  for (const auto& r : rules) fb.prior_rules.emplace_back(r.rule.name, r.stats);

  Rng rng(derive_seed(seed, 0xfeed));

  std::vector<int> by_size;
  for (int c = 0; c < report.k; ++c) by_size.push_back(c);
  std::stable_sort(by_size.begin(), by_size.end(), [&](int a, int b) {
    return report.clusters[a].size > report.clusters[b].size;
  });

  for (int c : by_size) {
    const ClusterInfo& info = report.clusters[c];
    if (info.classification == ClusterClass::mixed) {
      fb.mixed_sections.push_back(make_section(c, info, dataset, report.assignments,
                                               examples_per_section, rng, kMixedClusterQuestion));
    }
  }
  for (int c : by_size) {
    const ClusterInfo& info = report.clusters[c];
    if (info.classification == ClusterClass::low_success) {
      fb.low_success_sections.push_back(make_section(c, info, dataset, report.assignments,
                                                     examples_per_section, rng,
                                                     kLowSuccessQuestion));
    }
  }

  fb.uncovered_total = report.uncovered_success_indices.size();
  fb.uncovered_examples =
      pick_examples(dataset, report.uncovered_success_indices, examples_per_section, rng);
  return fb;
}

namespace {

void render_section(std::ostringstream& os, const GapSection& s, const char* kind) {
  os << "### " << kind << " cluster " << s.cluster_index << " (size " << s.info.size
     << ", success rate " << s.info.success_rate << ")\n";
  os << "Distinctive rule patterns (activation rate vs. global):\n";
  for (const auto& [name, delta] : s.info.distinctive_rules) {
    os << "  - " << name << ": " << (delta >= 0 ? "+" : "") << delta << "\n";
  }
  if (!s.success_examples.empty()) {
    os << "Successful founders in this cluster:\n";
    for (const auto& e : s.success_examples) os << "  - " << e << "\n";
  }
  if (!s.failure_examples.empty()) {
    os << "Unsuccessful founders in this cluster:\n";
    for (const auto& e : s.failure_examples) os << "  - " << e << "\n";
  }
  os << "Task: " << s.instruction << "\n\n";
}

}  // namespace

std::string FeedbackPayload::render() const {
  std::ostringstream os;
  os << "### Previously generated rules\n";
  for (const auto& [name, st] : prior_rules) {
    os << "  - " << name << ": ";
    if (st.lift_defined) {
      os << "lift " << st.lift << ", coverage " << st.coverage << ", p " << st.p_value << ", "
         << (st.significant ? "significant" : "not significant");
    } else {
      os << "matched nothing";
    }
    os << (st.passed ? " [passed]" : " [failed]") << "\n";
  }
  os << "\n";
  for (const auto& s : mixed_sections) render_section(os, s, "Mixed");
  for (const auto& s : low_success_sections) render_section(os, s, "Low-success");
  if (uncovered_total > 0) {
    os << "### Uncovered successes\n";
    os << uncovered_total << " successful founders match none of the validated rules. Examples:\n";
    for (const auto& e : uncovered_examples) os << "  - " << e << "\n";
    os << "Task: Propose rules capturing the success patterns these founders share.\n";
  }
  return os.str();
}

}  // namespace vcrules::gap
