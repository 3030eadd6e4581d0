#pragma once
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vcrules/classifier.hpp"
#include "vcrules/cluster.hpp"
#include "vcrules/generation.hpp"

namespace vcrules::pipeline {

class PipelineError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ClusteringConfig {
  int k_min = 2;
  int k_max = 8;
  int restarts = 5;
};

struct RunConfig {
  std::string dataset_path;
  std::string label_key = "success";
  int iterations = 2;
  int rules_per_iteration = 30;
  size_t sample_success = 60;
  size_t sample_failure = 60;
  size_t feedback_examples = 3;  // example founders per gap section
  stats::ValidationThresholds thresholds;
  model::TrainConfig classifier;
  ClusteringConfig clustering;
  uint64_t seed = 0;
  gen::ProviderConfig provider;
  std::string out_dir = "out";
};

RunConfig run_config_from_json(const nlohmann::ordered_json& j);
RunConfig load_run_config(const std::string& path);

// App. D schema; statistics over significant rules of the iteration.
struct IterationMetrics {
  int iteration = 0;
  int rules_generated = 0;
  int significant_count = 0;
  double mean_lift_sig = 0.0;
  double median_lift_sig = 0.0;
  int lift_gt_2 = 0;
  int lift_gt_3 = 0;
  double mean_coverage_sig = 0.0;
  double median_coverage_sig = 0.0;
};

struct RunState {
  int version = 1;
  int iteration = 0;  // completed iterations
  std::vector<stats::ScoredRule> rules;  // every candidate ever accepted, append-only
  std::optional<gap::ClusterReport> cluster_report;  // from the latest gap analysis
  std::optional<model::EnsembleModel> ensemble;
  std::optional<model::CrossValReport> cross_val;
  std::vector<IterationMetrics> metrics;
  int provider_calls = 0;

  std::vector<stats::ScoredRule> passed_rules() const;
};

// One pipeline iteration: (gap feedback when iteration >= 2) -> sample ->
// prompt -> one provider call -> parse -> evaluate -> validate -> rebuild
// cumulative activation matrix -> retrain classifier -> append metrics.
// Every stage's artifact is written under out_dir/iteration_<i>/ before the
// next stage runs.
RunState run_iteration(RunState state, const RunConfig& config, const LabeledDataset& dataset,
                       gen::CompletionProvider& provider);

// Loads the dataset, builds the provider from config (unless one is
// injected), resumes from out_dir/ruleset.json when present, and runs the
// remaining iterations. Writes ruleset, model, and report artifacts.
RunState full_run(const RunConfig& config, gen::CompletionProvider* provider = nullptr);

// Lossless state persistence ("ruleset" artifact): rules verbatim, stats,
// model, metrics history, provider call count. Versioned; a mismatched
// version fails, never partially loads.
nlohmann::ordered_json state_to_json(const RunState& state);
RunState state_from_json(const nlohmann::ordered_json& j);
void persist_ruleset(const RunState& state, const std::string& path);
RunState load_ruleset(const std::string& path);

// Report recomputed from raw persisted stats on every call.
std::string render_report(const RunState& state);
nlohmann::ordered_json report_json(const RunState& state);
void emit_report(const RunState& state, const std::string& out_dir);

// `name ||| description ||| lambda founder: ...` line file for a ruleset.
std::string render_rule_lines(const std::vector<stats::ScoredRule>& rules);

std::string explain_founder(const RunState& state, const FounderRecord& founder);

}  // namespace vcrules::pipeline
