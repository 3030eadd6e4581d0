#include "vcrules/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vcrules/rng.hpp"

namespace vcrules::pipeline {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PipelineError("cannot write artifact: " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError("cannot read file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

constexpr uint64_t kSaltFeedback = 0x01;
constexpr uint64_t kSaltSample = 0x02;
constexpr uint64_t kSaltCluster = 0x03;

}  // namespace

// ---------------------------------------------------------------------------
// Config

RunConfig run_config_from_json(const ordered_json& j) {
  RunConfig c;
  if (auto it = j.find("dataset_path"); it != j.end()) c.dataset_path = it->get<std::string>();
  if (auto it = j.find("label_key"); it != j.end()) c.label_key = it->get<std::string>();
  if (auto it = j.find("iterations"); it != j.end()) c.iterations = it->get<int>();
  if (auto it = j.find("rules_per_iteration"); it != j.end())
    c.rules_per_iteration = it->get<int>();
  if (auto it = j.find("sample_success"); it != j.end()) c.sample_success = it->get<size_t>();
  if (auto it = j.find("sample_failure"); it != j.end()) c.sample_failure = it->get<size_t>();
  if (auto it = j.find("feedback_examples"); it != j.end())
    c.feedback_examples = it->get<size_t>();
  if (auto it = j.find("thresholds"); it != j.end()) {
    const auto& t = *it;
    if (auto f = t.find("min_lift"); f != t.end()) c.thresholds.min_lift = f->get<double>();
    if (auto f = t.find("alpha"); f != t.end()) c.thresholds.alpha = f->get<double>();
    if (auto f = t.find("coverage_min"); f != t.end())
      c.thresholds.coverage_min = f->get<double>();
    if (auto f = t.find("coverage_max"); f != t.end())
      c.thresholds.coverage_max = f->get<double>();
    if (auto f = t.find("max_error_rate"); f != t.end())
      c.thresholds.max_error_rate = f->get<double>();
  }
  if (auto it = j.find("classifier"); it != j.end()) {
    const auto& t = *it;
    if (auto f = t.find("l2_strength"); f != t.end())
      c.classifier.l2_strength = f->get<double>();
    if (auto f = t.find("max_iter"); f != t.end()) c.classifier.max_iter = f->get<int>();
    if (auto f = t.find("tolerance"); f != t.end()) c.classifier.tolerance = f->get<double>();
    if (auto f = t.find("folds"); f != t.end()) c.classifier.folds = f->get<int>();
    if (auto f = t.find("beta"); f != t.end()) c.classifier.beta = f->get<double>();
  }
  if (auto it = j.find("clustering"); it != j.end()) {
    const auto& t = *it;
    if (auto f = t.find("k_min"); f != t.end()) c.clustering.k_min = f->get<int>();
    if (auto f = t.find("k_max"); f != t.end()) c.clustering.k_max = f->get<int>();
    if (auto f = t.find("restarts"); f != t.end()) c.clustering.restarts = f->get<int>();
  }
  if (auto it = j.find("seed"); it != j.end()) c.seed = it->get<uint64_t>();
  if (auto it = j.find("provider"); it != j.end())
    c.provider = gen::provider_config_from_json(*it);
  if (auto it = j.find("out_dir"); it != j.end()) c.out_dir = it->get<std::string>();
  c.classifier.seed = c.seed;
  return c;
}

RunConfig load_run_config(const std::string& path) {
  try {
    return run_config_from_json(ordered_json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw PipelineError(std::string("malformed config file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// State serialization

namespace {

ordered_json stats_to_json(const stats::RuleStats& s) {
  ordered_json j;
  j["matched_total"] = s.matched_total;
  j["matched_success"] = s.matched_success;
  j["error_count"] = s.error_count;
  j["coverage"] = s.coverage;
  j["error_rate"] = s.error_rate;
  j["lift_defined"] = s.lift_defined;
  j["lift"] = s.lift;
  j["p_value"] = s.p_value;
  j["significant"] = s.significant;
  j["passed"] = s.passed;
  ordered_json reasons = ordered_json::array();
  for (auto r : s.fail_reasons) reasons.push_back(stats::fail_reason_name(r));
  j["fail_reasons"] = std::move(reasons);
  return j;
}

stats::RuleStats stats_from_json(const ordered_json& j) {
  stats::RuleStats s;
  s.matched_total = j.at("matched_total").get<size_t>();
  s.matched_success = j.at("matched_success").get<size_t>();
  s.error_count = j.at("error_count").get<size_t>();
  s.coverage = j.at("coverage").get<double>();
  s.error_rate = j.at("error_rate").get<double>();
  s.lift_defined = j.at("lift_defined").get<bool>();
  s.lift = j.at("lift").get<double>();
  s.p_value = j.at("p_value").get<double>();
  s.significant = j.at("significant").get<bool>();
  s.passed = j.at("passed").get<bool>();
  for (const auto& r : j.at("fail_reasons")) {
    std::string name = r.get<std::string>();
    if (name == "lift") s.fail_reasons.push_back(stats::FailReason::lift);
    else if (name == "p_value") s.fail_reasons.push_back(stats::FailReason::p_value);
    else if (name == "coverage_low") s.fail_reasons.push_back(stats::FailReason::coverage_low);
    else if (name == "coverage_high") s.fail_reasons.push_back(stats::FailReason::coverage_high);
    else if (name == "error_rate") s.fail_reasons.push_back(stats::FailReason::error_rate);
  }
  return s;
}

ordered_json metrics_to_json(const IterationMetrics& m) {
  ordered_json j;
  j["iteration"] = m.iteration;
  j["rules_generated"] = m.rules_generated;
  j["significant_count"] = m.significant_count;
  j["mean_lift_sig"] = m.mean_lift_sig;
  j["median_lift_sig"] = m.median_lift_sig;
  j["lift_gt_2"] = m.lift_gt_2;
  j["lift_gt_3"] = m.lift_gt_3;
  j["mean_coverage_sig"] = m.mean_coverage_sig;
  j["median_coverage_sig"] = m.median_coverage_sig;
  return j;
}

IterationMetrics metrics_from_json(const ordered_json& j) {
  IterationMetrics m;
  m.iteration = j.at("iteration").get<int>();
  m.rules_generated = j.at("rules_generated").get<int>();
  m.significant_count = j.at("significant_count").get<int>();
  m.mean_lift_sig = j.at("mean_lift_sig").get<double>();
  m.median_lift_sig = j.at("median_lift_sig").get<double>();
  m.lift_gt_2 = j.at("lift_gt_2").get<int>();
  m.lift_gt_3 = j.at("lift_gt_3").get<int>();
  m.mean_coverage_sig = j.at("mean_coverage_sig").get<double>();
  m.median_coverage_sig = j.at("median_coverage_sig").get<double>();
  return m;
}

ordered_json model_to_json(const model::EnsembleModel& m) {
  ordered_json j;
  j["rule_ids"] = m.rule_ids;
  j["weights"] = m.weights;
  j["intercept"] = m.intercept;
  j["threshold"] = m.threshold;
  j["training_config"] = {{"l2_strength", m.training_config.l2_strength},
                          {"max_iter", m.training_config.max_iter},
                          {"tolerance", m.training_config.tolerance},
                          {"seed", m.training_config.seed},
                          {"folds", m.training_config.folds},
                          {"beta", m.training_config.beta}};
  j["converged"] = m.converged;
  return j;
}

model::EnsembleModel model_from_json(const ordered_json& j) {
  model::EnsembleModel m;
  m.rule_ids = j.at("rule_ids").get<std::vector<std::string>>();
  m.weights = j.at("weights").get<std::vector<double>>();
  m.intercept = j.at("intercept").get<double>();
  m.threshold = j.at("threshold").get<double>();
  const auto& t = j.at("training_config");
  m.training_config.l2_strength = t.at("l2_strength").get<double>();
  m.training_config.max_iter = t.at("max_iter").get<int>();
  m.training_config.tolerance = t.at("tolerance").get<double>();
  m.training_config.seed = t.at("seed").get<uint64_t>();
  m.training_config.folds = t.at("folds").get<int>();
  m.training_config.beta = t.at("beta").get<double>();
  m.converged = j.at("converged").get<bool>();
  return m;
}

ordered_json cross_val_to_json(const model::CrossValReport& r) {
  ordered_json j;
  j["fold_count"] = r.fold_count;
  j["threshold"] = r.threshold;
  j["pooled"] = {{"precision", r.pooled.precision},
                 {"recall", r.pooled.recall},
                 {"f_beta", r.pooled.f_beta}};
  ordered_json folds = ordered_json::array();
  for (const auto& f : r.per_fold) {
    folds.push_back(
        {{"precision", f.precision}, {"recall", f.recall}, {"f_beta", f.f_beta}});
  }
  j["per_fold"] = std::move(folds);
  return j;
}

model::CrossValReport cross_val_from_json(const ordered_json& j) {
  model::CrossValReport r;
  r.fold_count = j.at("fold_count").get<int>();
  r.threshold = j.at("threshold").get<double>();
  r.pooled = {j.at("pooled").at("precision").get<double>(),
              j.at("pooled").at("recall").get<double>(),
              j.at("pooled").at("f_beta").get<double>()};
  for (const auto& f : j.at("per_fold")) {
    r.per_fold.push_back({f.at("precision").get<double>(), f.at("recall").get<double>(),
                          f.at("f_beta").get<double>()});
  }
  return r;
}

ordered_json cluster_report_to_json(const gap::ClusterReport& r) {
  ordered_json j;
  j["k"] = r.k;
  j["inertia"] = r.inertia;
  ordered_json clusters = ordered_json::array();
  for (const auto& c : r.clusters) {
    ordered_json cj;
    cj["size"] = c.size;
    cj["success_count"] = c.success_count;
    cj["success_rate"] = c.success_rate;
    cj["classification"] = gap::cluster_class_name(c.classification);
    ordered_json dr = ordered_json::array();
    for (const auto& [name, delta] : c.distinctive_rules) dr.push_back({{"rule", name}, {"contrast", delta}});
    cj["distinctive_rules"] = std::move(dr);
    clusters.push_back(std::move(cj));
  }
  j["clusters"] = std::move(clusters);
  j["assignments"] = r.assignments;
  j["uncovered_success_indices"] = r.uncovered_success_indices;
  return j;
}

gap::ClusterReport cluster_report_from_json(const ordered_json& j) {
  gap::ClusterReport r;
  r.k = j.at("k").get<int>();
  r.inertia = j.at("inertia").get<double>();
  for (const auto& cj : j.at("clusters")) {
    gap::ClusterInfo c;
    c.size = cj.at("size").get<size_t>();
    c.success_count = cj.at("success_count").get<size_t>();
    c.success_rate = cj.at("success_rate").get<double>();
    std::string cls = cj.at("classification").get<std::string>();
    if (cls == "high_success") c.classification = gap::ClusterClass::high_success;
    else if (cls == "low_success") c.classification = gap::ClusterClass::low_success;
    else if (cls == "mixed") c.classification = gap::ClusterClass::mixed;
    else c.classification = gap::ClusterClass::no_action;
    for (const auto& d : cj.at("distinctive_rules")) {
      c.distinctive_rules.emplace_back(d.at("rule").get<std::string>(),
                                       d.at("contrast").get<double>());
    }
    r.clusters.push_back(std::move(c));
  }
  r.assignments = j.at("assignments").get<std::vector<int>>();
  r.uncovered_success_indices = j.at("uncovered_success_indices").get<std::vector<size_t>>();
  return r;
}

}  // namespace

std::vector<stats::ScoredRule> RunState::passed_rules() const {
  std::vector<stats::ScoredRule> out;
  for (const auto& r : rules) {
    if (r.stats.passed) out.push_back(r);
  }
  return out;
}

ordered_json state_to_json(const RunState& state) {
  ordered_json j;
  j["format"] = "vcrules-ruleset";
  j["version"] = state.version;
  j["iteration"] = state.iteration;
  j["provider_calls"] = state.provider_calls;
  ordered_json rules = ordered_json::array();
  for (const auto& r : state.rules) {
    ordered_json rj;
    rj["name"] = r.rule.name;
    rj["description"] = r.rule.description;
    rj["source"] = r.rule.source;
    rj["iteration"] = r.rule.iteration;
    rj["stats"] = stats_to_json(r.stats);
    rules.push_back(std::move(rj));
  }
  j["rules"] = std::move(rules);
  ordered_json metrics = ordered_json::array();
  for (const auto& m : state.metrics) metrics.push_back(metrics_to_json(m));
  j["metrics"] = std::move(metrics);
  if (state.ensemble) j["model"] = model_to_json(*state.ensemble);
  if (state.cross_val) j["cross_val"] = cross_val_to_json(*state.cross_val);
  if (state.cluster_report) j["cluster_report"] = cluster_report_to_json(*state.cluster_report);
  return j;
}

RunState state_from_json(const ordered_json& j) {
  if (!j.is_object() || j.value("format", "") != "vcrules-ruleset")
    throw PipelineError("not a ruleset file");
  int version = j.value("version", -1);
  if (version != 1)
    throw PipelineError("unsupported ruleset version " + std::to_string(version) +
                        " (this build reads version 1)");
  RunState state;
  state.version = version;
  state.iteration = j.at("iteration").get<int>();
  state.provider_calls = j.at("provider_calls").get<int>();
  for (const auto& rj : j.at("rules")) {
    stats::ScoredRule r;
    r.rule.name = rj.at("name").get<std::string>();
    r.rule.description = rj.at("description").get<std::string>();
    r.rule.source = rj.at("source").get<std::string>();
    r.rule.iteration = rj.at("iteration").get<int>();
    r.rule.ast = dsl::parse_rule_expression(r.rule.source);
    r.stats = stats_from_json(rj.at("stats"));
    state.rules.push_back(std::move(r));
  }
  for (const auto& mj : j.at("metrics")) state.metrics.push_back(metrics_from_json(mj));
  if (j.contains("model")) state.ensemble = model_from_json(j.at("model"));
  if (j.contains("cross_val")) state.cross_val = cross_val_from_json(j.at("cross_val"));
  if (j.contains("cluster_report"))
    state.cluster_report = cluster_report_from_json(j.at("cluster_report"));
  return state;
}

void persist_ruleset(const RunState& state, const std::string& path) {
  write_file(path, state_to_json(state).dump(2) + "\n");
}

RunState load_ruleset(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw PipelineError(std::string("corrupt ruleset file: ") + e.what());
  }
  return state_from_json(j);
}

std::string render_rule_lines(const std::vector<stats::ScoredRule>& rules) {
  std::ostringstream os;
  for (const auto& r : rules) {
    os << r.rule.name << " ||| " << r.rule.description << " ||| " << r.rule.source << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Iteration

namespace {

std::string unique_name(const std::string& base, const std::vector<stats::ScoredRule>& existing,
                        const std::vector<dsl::RuleCandidate>& batch, size_t batch_upto,
                        int iteration) {
  auto taken = [&](const std::string& n) {
    for (const auto& r : existing) {
      if (r.rule.name == n) return true;
    }
    for (size_t i = 0; i < batch_upto; ++i) {
      if (batch[i].name == n) return true;
    }
    return false;
  };
  if (!taken(base)) return base;
  std::string with_iter = base + "_iter" + std::to_string(iteration);
  if (!taken(with_iter)) return with_iter;
  for (int i = 2;; ++i) {
    std::string candidate = with_iter + "_" + std::to_string(i);
    if (!taken(candidate)) return candidate;
  }
}

IterationMetrics compute_metrics(int iteration, const std::vector<stats::ScoredRule>& batch) {
  IterationMetrics m;
  m.iteration = iteration;
  m.rules_generated = static_cast<int>(batch.size());
  std::vector<double> lifts, coverages;
  for (const auto& r : batch) {
    if (!r.stats.significant) continue;
    ++m.significant_count;
    lifts.push_back(r.stats.lift);
    coverages.push_back(r.stats.coverage);
    if (r.stats.lift > 2.0) ++m.lift_gt_2;
    if (r.stats.lift > 3.0) ++m.lift_gt_3;
  }
  auto mean = [](std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto median = [](std::vector<double>& v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
  };
  m.mean_lift_sig = mean(lifts);
  m.median_lift_sig = median(lifts);
  m.mean_coverage_sig = mean(coverages);
  m.median_coverage_sig = median(coverages);
  return m;
}

bool can_train(const std::vector<stats::ScoredRule>& passed, std::span<const uint8_t> labels,
               int folds) {
  if (passed.empty()) return false;
  size_t pos = 0;
  for (uint8_t l : labels) pos += l;
  return pos >= static_cast<size_t>(folds) && labels.size() - pos >= static_cast<size_t>(folds);
}

}  // namespace

RunState run_iteration(RunState state, const RunConfig& config, const LabeledDataset& dataset,
                       gen::CompletionProvider& provider) {
  const int it = state.iteration + 1;
  const fs::path iter_dir = fs::path(config.out_dir) / ("iteration_" + std::to_string(it));
  fs::create_directories(iter_dir);

  // gap analysis and feedback (iteration 2+)
  std::optional<gap::FeedbackPayload> feedback;
  if (it >= 2) {
    gap::FeedbackPayload fb;
    for (const auto& r : state.rules) fb.prior_rules.emplace_back(r.rule.name, r.stats);
    auto passed = state.passed_rules();
    if (!passed.empty()) {
      gap::ActivationMatrix matrix = gap::build_activation_matrix(dataset, passed);
      gap::ClusterReport report =
          gap::analyze_gaps(matrix, dataset.labels, derive_seed(config.seed, it, kSaltCluster),
                            config.clustering.k_min, config.clustering.k_max,
                            config.clustering.restarts);
      fb = gap::build_feedback(report, state.rules, dataset, config.feedback_examples,
                               derive_seed(config.seed, it, kSaltFeedback));
      state.cluster_report = std::move(report);
      write_file(iter_dir / "cluster_report.json",
                 cluster_report_to_json(*state.cluster_report).dump(2) + "\n");
    }
    feedback = std::move(fb);
    write_file(iter_dir / "feedback.txt", feedback->render());
  }

  // stratified sample and prompt
  gen::PromptSpec spec;
  spec.dataset = &dataset;
  spec.sample = gen::stratified_prompt_sample(dataset, config.sample_success,
                                              config.sample_failure,
                                              derive_seed(config.seed, it, kSaltSample));
  spec.requested_rule_count = config.rules_per_iteration;
  spec.iteration = it;
  spec.feedback = feedback;
  std::string prompt = gen::build_generation_prompt(spec);
  write_file(iter_dir / "prompt.txt", prompt);

  // one provider call (plus bounded retries on transport failure)
  int calls_before = provider.call_count();
  std::string response;
  try {
    response = gen::request_rules(provider, prompt, config.provider.max_retries);
  } catch (...) {
    state.provider_calls += provider.call_count() - calls_before;
    throw;
  }
  state.provider_calls += provider.call_count() - calls_before;
  write_file(iter_dir / "response.txt", response);

  // parse, dedupe, evaluate, validate
  gen::ParsedRules parsed = gen::parse_rule_block(response, it);
  std::vector<stats::ScoredRule> batch;
  ordered_json rejects = ordered_json::array();
  for (const auto& rej : parsed.rejected) {
    rejects.push_back({{"line", rej.line}, {"reason", rej.reason}});
  }
  double base = dataset.base_rate();
  std::vector<dsl::RuleCandidate> accepted;
  for (auto& cand : parsed.candidates) {
    bool duplicate_ast = false;
    for (const auto& r : state.rules) {
      if (dsl::ast_equal(*r.rule.ast, *cand.ast)) {
        duplicate_ast = true;
        break;
      }
    }
    for (const auto& a : accepted) {
      if (duplicate_ast) break;
      if (dsl::ast_equal(*a.ast, *cand.ast)) duplicate_ast = true;
    }
    if (duplicate_ast) {
      rejects.push_back({{"line", cand.name + " ||| " + cand.description + " ||| " + cand.source},
                         {"reason", "duplicate expression"}});
      continue;
    }
    cand.name = unique_name(cand.name, state.rules, accepted, accepted.size(), it);
    accepted.push_back(cand);
  }
  write_file(iter_dir / "candidates.rules", [&] {
    std::ostringstream os;
    for (const auto& c : accepted)
      os << c.name << " ||| " << c.description << " ||| " << c.source << "\n";
    return os.str();
  }());

  for (const auto& cand : accepted) {
    dsl::ActivationColumn col = dsl::evaluate_over_dataset(*cand.ast, dataset);
    size_t matched = 0, matched_success = 0;
    for (size_t i = 0; i < dataset.size(); ++i) {
      if (col.matches[i]) {
        ++matched;
        matched_success += dataset.labels[i];
      }
    }
    stats::ScoredRule scored;
    scored.rule = cand;
    scored.stats = stats::validate_rule(matched_success, matched, col.error_count,
                                        dataset.size(), base, config.thresholds);
    batch.push_back(scored);
    state.rules.push_back(std::move(scored));
  }

  ordered_json stats_artifact;
  stats_artifact["iteration"] = it;
  ordered_json batch_json = ordered_json::array();
  for (const auto& r : batch) {
    ordered_json rj;
    rj["name"] = r.rule.name;
    rj["stats"] = stats_to_json(r.stats);
    batch_json.push_back(std::move(rj));
  }
  stats_artifact["rules"] = std::move(batch_json);
  stats_artifact["rejected"] = std::move(rejects);
  write_file(iter_dir / "stats.json", stats_artifact.dump(2) + "\n");

  // retrain on the cumulative passed-rule set
  auto passed = state.passed_rules();
  if (can_train(passed, dataset.labels, config.classifier.folds)) {
    gap::ActivationMatrix matrix = gap::build_activation_matrix(dataset, passed);
    model::TrainConfig train_config = config.classifier;
    train_config.seed = config.seed;
    auto [report, ensemble] = model::cross_validated_eval(matrix, dataset.labels, train_config);
    state.cross_val = std::move(report);
    state.ensemble = std::move(ensemble);
  } else {
    state.cross_val.reset();
    state.ensemble.reset();
  }

  state.metrics.push_back(compute_metrics(it, batch));
  state.iteration = it;
  return state;
}

RunState full_run(const RunConfig& config, gen::CompletionProvider* provider) {
  if (config.dataset_path.empty()) throw PipelineError("config: dataset_path is required");
  LabeledDataset dataset = load_dataset(config.dataset_path, config.label_key);

  std::unique_ptr<gen::CompletionProvider> owned;
  if (!provider) {
    owned = gen::make_provider(config.provider);
    provider = owned.get();
  }

  const fs::path ruleset_path = fs::path(config.out_dir) / "ruleset.json";
  RunState state;
  if (fs::exists(ruleset_path)) state = load_ruleset(ruleset_path.string());

  while (state.iteration < config.iterations) {
    try {
      state = run_iteration(std::move(state), config, dataset, *provider);
    } catch (const gen::ProviderError&) {
      persist_ruleset(state, ruleset_path.string());  // resumable
      throw;
    }
    persist_ruleset(state, ruleset_path.string());
    if (state.ensemble) {
      write_file(fs::path(config.out_dir) / "model.json",
                 model_to_json(*state.ensemble).dump(2) + "\n");
    }
  }
  emit_report(state, config.out_dir);
  return state;
}

// ---------------------------------------------------------------------------
// Reporting

ordered_json report_json(const RunState& state) {
  ordered_json j;
  ordered_json iterations = ordered_json::array();
  for (const auto& persisted : state.metrics) {
    // recomputed from raw per-rule stats, never from the cached metrics
    std::vector<stats::ScoredRule> batch;
    for (const auto& r : state.rules) {
      if (r.rule.iteration == persisted.iteration) batch.push_back(r);
    }
    iterations.push_back(metrics_to_json(compute_metrics(persisted.iteration, batch)));
  }
  j["iterations"] = std::move(iterations);

  ordered_json top = ordered_json::array();
  std::vector<const stats::ScoredRule*> sig;
  for (const auto& r : state.rules) {
    if (r.stats.significant) sig.push_back(&r);
  }
  std::stable_sort(sig.begin(), sig.end(), [](const auto* a, const auto* b) {
    return a->stats.lift > b->stats.lift;
  });
  for (size_t i = 0; i < sig.size() && i < 10; ++i) {
    top.push_back({{"iteration", sig[i]->rule.iteration},
                   {"name", sig[i]->rule.name},
                   {"lift", sig[i]->stats.lift},
                   {"coverage", sig[i]->stats.coverage},
                   {"p_value", sig[i]->stats.p_value}});
  }
  j["top_rules"] = std::move(top);

  if (state.cross_val) {
    j["classifier"] = {{"precision", state.cross_val->pooled.precision},
                       {"recall", state.cross_val->pooled.recall},
                       {"f_beta", state.cross_val->pooled.f_beta},
                       {"threshold", state.cross_val->threshold}};
  }
  if (state.cluster_report) {
    ordered_json clusters = ordered_json::array();
    for (const auto& c : state.cluster_report->clusters) {
      clusters.push_back({{"size", c.size},
                          {"success_rate", c.success_rate},
                          {"classification", gap::cluster_class_name(c.classification)}});
    }
    j["clusters"] = std::move(clusters);
    j["uncovered_successes"] = state.cluster_report->uncovered_success_indices.size();
  }
  return j;
}

std::string render_report(const RunState& state) {
  ordered_json j = report_json(state);
  std::ostringstream os;
  os << "Rule generation statistics per iteration\n";
  os << "----------------------------------------\n";
  for (const auto& m : j["iterations"]) {
    int gen_count = m["rules_generated"].get<int>();
    int sig = m["significant_count"].get<int>();
    os << "Iteration " << m["iteration"].get<int>() << "\n";
    os << "  Rules generated:          " << gen_count << "\n";
    os << "  Significant (p < 0.05):   " << sig;
    if (gen_count > 0) os << " (" << (100.0 * sig / gen_count) << "%)";
    os << "\n";
    os << "  Mean lift (sig. rules):   " << m["mean_lift_sig"].get<double>() << "\n";
    os << "  Median lift (sig. rules): " << m["median_lift_sig"].get<double>() << "\n";
    os << "  Rules with lift > 2x:     " << m["lift_gt_2"].get<int>() << "\n";
    os << "  Rules with lift > 3x:     " << m["lift_gt_3"].get<int>() << "\n";
    os << "  Mean coverage (sig.):     " << m["mean_coverage_sig"].get<double>() << "\n";
    os << "  Median coverage (sig.):   " << m["median_coverage_sig"].get<double>() << "\n";
  }
  os << "\nTop rules by lift\n-----------------\n";
  if (j["top_rules"].empty()) {
    os << "  (no significant rules)\n";
  }
  for (const auto& r : j["top_rules"]) {
    os << "  [iter " << r["iteration"].get<int>() << "] " << r["name"].get<std::string>()
       << ": lift " << r["lift"].get<double>() << ", coverage " << r["coverage"].get<double>()
       << ", p " << r["p_value"].get<double>() << "\n";
  }
  if (j.contains("classifier")) {
    os << "\nClassifier (pooled out-of-fold, tuned threshold "
       << j["classifier"]["threshold"].get<double>() << ")\n";
    os << "  precision " << j["classifier"]["precision"].get<double>() << ", recall "
       << j["classifier"]["recall"].get<double>() << ", F0.5 "
       << j["classifier"]["f_beta"].get<double>() << "\n";
  } else {
    os << "\nClassifier: not trained (no passed rules)\n";
  }
  if (j.contains("clusters")) {
    os << "\nCluster summary\n";
    for (const auto& c : j["clusters"]) {
      os << "  size " << c["size"].get<size_t>() << ", success rate "
         << c["success_rate"].get<double>() << ", " << c["classification"].get<std::string>()
         << "\n";
    }
    os << "  uncovered successes: " << j["uncovered_successes"].get<size_t>() << "\n";
  }
  return os.str();
}

void emit_report(const RunState& state, const std::string& out_dir) {
  write_file(fs::path(out_dir) / "report.json", report_json(state).dump(2) + "\n");
  write_file(fs::path(out_dir) / "report.txt", render_report(state));
}

std::string explain_founder(const RunState& state, const FounderRecord& founder) {
  if (!state.ensemble) throw PipelineError("no trained model in ruleset");
  model::Explanation ex = model::explain_prediction(*state.ensemble, founder, state.rules);
  std::ostringstream os;
  os << "probability: " << ex.probability << "\n";
  os << "decision:    " << (ex.decision ? "success" : "failure") << " (threshold "
     << state.ensemble->threshold << ")\n";
  if (ex.active_rules.empty()) {
    os << "no active rules; probability is sigmoid(intercept)\n";
  } else {
    os << "active rules:\n";
    for (const auto& r : ex.active_rules) {
      os << "  " << r.name << " (weight " << r.weight;
      if (r.lift_defined) os << ", lift " << r.lift;
      os << "): " << r.description << "\n";
    }
  }
  return os.str();
}

}  // namespace vcrules::pipeline
