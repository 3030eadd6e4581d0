#pragma once
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vcrules/stats.hpp"

namespace vcrules::gap {

class ClusterError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// founders x rules boolean matrix, row-major.
struct ActivationMatrix {
  size_t rows = 0;
  std::vector<std::string> rule_ids;  // column order
  std::vector<uint8_t> cells;

  size_t cols() const { return rule_ids.size(); }
  uint8_t at(size_t r, size_t c) const { return cells[r * rule_ids.size() + c]; }
  std::span<const uint8_t> row(size_t r) const {
    return {cells.data() + r * rule_ids.size(), rule_ids.size()};
  }
  size_t distinct_row_count() const;
};

// Evaluates the given rules over the dataset in order. Column j belongs to
// rules[j]; deterministic.
ActivationMatrix build_activation_matrix(const LabeledDataset& dataset,
                                         const std::vector<stats::ScoredRule>& rules);

struct KMeansResult {
  std::vector<int> assignments;
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;
  std::vector<double> inertia_history;  // after each assignment step
};

// Lloyd iterations with k-means++ seeding, Euclidean distance on 0/1 rows.
// Throws if k < 1 or k exceeds the number of distinct rows.
KMeansResult kmeans(const ActivationMatrix& matrix, int k, uint64_t seed, int max_iter = 100);

// Best-of-restarts inertia per k over [k_min, k_max]; returns the smallest
// k whose marginal relative improvement falls below 0.10, with fallback 4.
int choose_k_elbow(const ActivationMatrix& matrix, uint64_t seed, int k_min = 2, int k_max = 8,
                   int restarts = 5);

enum class ClusterClass { high_success, low_success, mixed, no_action };
std::string cluster_class_name(ClusterClass c);

// Paper taxonomy: high if rate > 0.15; low if rate < 0.07 and size > 400;
// mixed if rate in [0.07, 0.12] and size > 400; otherwise no_action.
ClusterClass classify_cluster(size_t size, double success_rate);

struct ClusterInfo {
  size_t size = 0;
  size_t success_count = 0;
  double success_rate = 0.0;
  ClusterClass classification = ClusterClass::no_action;
  // (rule name, cluster activation rate - global activation rate), top 5 by
  // absolute contrast.
  std::vector<std::pair<std::string, double>> distinctive_rules;
};

struct ClusterReport {
  int k = 0;
  std::vector<int> assignments;
  std::vector<ClusterInfo> clusters;
  std::vector<size_t> uncovered_success_indices;
  double inertia = 0.0;
};

// Success-labeled founders whose activation row is all false.
std::vector<size_t> uncovered_successes(const ActivationMatrix& matrix,
                                        std::span<const uint8_t> labels);

// Full gap analysis: elbow k selection, clustering, per-cluster statistics
// and classification, distinctive rules, uncovered successes.
ClusterReport analyze_gaps(const ActivationMatrix& matrix, std::span<const uint8_t> labels,
                           uint64_t seed, int k_min = 2, int k_max = 8, int restarts = 5);

inline constexpr const char* kMixedClusterQuestion =
    "What differentiates success from failure here?";
inline constexpr const char* kLowSuccessQuestion = "What makes these rare successes different?";

struct GapSection {
  int cluster_index = 0;
  ClusterInfo info;
  std::vector<std::string> success_examples;  // compact founder excerpts
  std::vector<std::string> failure_examples;
  std::string instruction;
};

struct FeedbackPayload {
  // (name, stats) for every previously generated rule, failed ones included.
  std::vector<std::pair<std::string, stats::RuleStats>> prior_rules;
  std::vector<GapSection> mixed_sections;        // descending size
  std::vector<GapSection> low_success_sections;  // descending size
  std::vector<std::string> uncovered_examples;
  size_t uncovered_total = 0;

  bool has_gaps() const {
    return !mixed_sections.empty() || !low_success_sections.empty() || uncovered_total > 0;
  }
  std::string render() const;  // deterministic text form
};

std::string founder_excerpt(const FounderRecord& r);

FeedbackPayload build_feedback(const ClusterReport& report,
                               const std::vector<stats::ScoredRule>& rules,
                               const LabeledDataset& dataset, size_t examples_per_section,
                               uint64_t seed);

}  // namespace vcrules::gap
