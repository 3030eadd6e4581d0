// vcrules command-line front end: every pipeline stage as a subcommand.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vcrules/pipeline.hpp"
#include "vcrules/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace vcrules;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitProvider = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot write file: " + path.string());
  out << content;
}

// Rule line files carry `name ||| description ||| lambda founder: ...` per
// line; numbering them reuses the response parser verbatim.
std::vector<stats::ScoredRule> load_rule_lines(const std::string& path) {
  std::istringstream in(read_file(path));
  std::ostringstream numbered;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    numbered << ++n << ". " << line << "\n";
  }
  gen::ParsedRules parsed = gen::parse_rule_block(numbered.str(), 1);
  if (!parsed.rejected.empty()) {
    throw DatasetError("bad rule line in " + path + ": " + parsed.rejected.front().line +
                       " (" + parsed.rejected.front().reason + ")");
  }
  std::vector<stats::ScoredRule> out;
  for (auto& c : parsed.candidates) out.push_back({std::move(c), {}});
  return out;
}

std::vector<stats::ScoredRule> score_rules(std::vector<stats::ScoredRule> rules,
                                           const LabeledDataset& dataset,
                                           const stats::ValidationThresholds& thresholds) {
  double base = dataset.base_rate();
  for (auto& r : rules) {
    dsl::ActivationColumn col = dsl::evaluate_over_dataset(*r.rule.ast, dataset);
    size_t matched = 0, matched_success = 0;
    for (size_t i = 0; i < dataset.size(); ++i) {
      if (col.matches[i]) {
        ++matched;
        matched_success += dataset.labels[i];
      }
    }
    r.stats = stats::validate_rule(matched_success, matched, col.error_count, dataset.size(),
                                   base, thresholds);
  }
  return rules;
}

gen::ProviderConfig provider_config(const std::string& config_path, const std::string& kind,
                                    uint64_t seed) {
  gen::ProviderConfig cfg;
  if (!config_path.empty()) {
    ordered_json j = ordered_json::parse(read_file(config_path));
    cfg = gen::provider_config_from_json(j.contains("provider") ? j.at("provider") : j);
  }
  if (!kind.empty()) cfg.kind = kind;
  if (cfg.kind == "mock") cfg.mock_seed = seed;
  return cfg;
}

int cmd_ingest(const std::string& dataset_path, const std::string& label_key) {
  LabeledDataset ds = load_dataset(dataset_path, label_key);
  std::cout << "records:   " << ds.size() << "\n"
            << "successes: " << ds.success_count() << "\n"
            << "base rate: " << ds.base_rate() << "\n";
  return kExitOk;
}

int cmd_synth(size_t n, double base_rate, const std::vector<std::string>& plants,
              uint64_t seed, const std::string& out) {
  std::vector<PlantedRule> planted;
  for (const auto& spec : plants) {
    size_t at = spec.find('@');
    if (at == std::string::npos)
      throw DatasetError("--plant expects <success_rate>@<lambda founder: ...>");
    planted.push_back({spec.substr(at + 1), std::stod(spec.substr(0, at))});
  }
  LabeledDataset ds = generate_synthetic_dataset(n, base_rate, planted, seed);
  save_dataset(ds, out);
  std::cout << "wrote " << ds.size() << " records (" << ds.success_count()
            << " successes) to " << out << "\n";
  return kExitOk;
}

int cmd_generate(const std::string& dataset_path, const std::string& config_path,
                 const std::string& provider_kind, uint64_t seed, int rule_count,
                 size_t n_success, size_t n_failure, const std::string& out_dir) {
  LabeledDataset dataset = load_dataset(dataset_path);
  gen::ProviderConfig pcfg = provider_config(config_path, provider_kind, seed);
  auto provider = gen::make_provider(pcfg);

  gen::PromptSpec spec;
  spec.dataset = &dataset;
  spec.sample = gen::stratified_prompt_sample(dataset, n_success, n_failure,
                                              derive_seed(seed, 1, 0x02));
  spec.requested_rule_count = rule_count;
  spec.iteration = 1;
  std::string prompt = gen::build_generation_prompt(spec);
  write_file(fs::path(out_dir) / "prompt.txt", prompt);
  std::string response = gen::request_rules(*provider, prompt, pcfg.max_retries);
  write_file(fs::path(out_dir) / "response.txt", response);

  gen::ParsedRules parsed = gen::parse_rule_block(response, 1);
  std::ostringstream lines;
  for (const auto& c : parsed.candidates)
    lines << c.name << " ||| " << c.description << " ||| " << c.source << "\n";
  write_file(fs::path(out_dir) / "candidates.rules", lines.str());
  std::cout << "accepted " << parsed.candidates.size() << " candidates, rejected "
            << parsed.rejected.size() << " lines; provider calls: " << provider->call_count()
            << "\n";
  return kExitOk;
}

int cmd_evaluate(const std::string& dataset_path, const std::string& rules_path,
                 const std::string& out) {
  LabeledDataset dataset = load_dataset(dataset_path);
  auto rules = load_rule_lines(rules_path);
  gap::ActivationMatrix matrix = gap::build_activation_matrix(dataset, rules);
  ordered_json j;
  j["rule_ids"] = matrix.rule_ids;
  ordered_json rows = ordered_json::array();
  for (size_t r = 0; r < matrix.rows; ++r) {
    ordered_json row = ordered_json::array();
    for (uint8_t v : matrix.row(r)) row.push_back(static_cast<int>(v));
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  write_file(out, j.dump(2) + "\n");
  std::cout << "wrote " << matrix.rows << "x" << matrix.cols() << " activation matrix to "
            << out << "\n";
  return kExitOk;
}

int cmd_validate(const std::string& dataset_path, const std::string& rules_path,
                 const std::string& out, const std::string& passed_out) {
  LabeledDataset dataset = load_dataset(dataset_path);
  auto rules = score_rules(load_rule_lines(rules_path), dataset, {});
  ordered_json j = ordered_json::array();
  size_t passed = 0;
  std::vector<stats::ScoredRule> passed_rules;
  for (const auto& r : rules) {
    ordered_json rj;
    rj["name"] = r.rule.name;
    rj["lift_defined"] = r.stats.lift_defined;
    rj["lift"] = r.stats.lift;
    rj["p_value"] = r.stats.p_value;
    rj["coverage"] = r.stats.coverage;
    rj["error_rate"] = r.stats.error_rate;
    rj["significant"] = r.stats.significant;
    rj["passed"] = r.stats.passed;
    ordered_json reasons = ordered_json::array();
    for (auto fr : r.stats.fail_reasons) reasons.push_back(stats::fail_reason_name(fr));
    rj["fail_reasons"] = std::move(reasons);
    j.push_back(std::move(rj));
    if (r.stats.passed) {
      ++passed;
      passed_rules.push_back(r);
    }
  }
  std::string text = j.dump(2) + "\n";
  if (out.empty()) std::cout << text;
  else write_file(out, text);
  if (!passed_out.empty()) write_file(passed_out, pipeline::render_rule_lines(passed_rules));
  std::cerr << passed << "/" << rules.size() << " rules passed validation\n";
  return kExitOk;
}

int cmd_cluster(const std::string& dataset_path, const std::string& rules_path, uint64_t seed,
                size_t examples, const std::string& out_dir) {
  LabeledDataset dataset = load_dataset(dataset_path);
  auto rules = score_rules(load_rule_lines(rules_path), dataset, {});
  std::vector<stats::ScoredRule> passed;
  for (const auto& r : rules) {
    if (r.stats.passed) passed.push_back(r);
  }
  if (passed.empty()) throw gap::ClusterError("no rules passed validation; nothing to cluster");
  gap::ActivationMatrix matrix = gap::build_activation_matrix(dataset, passed);
  gap::ClusterReport report = gap::analyze_gaps(matrix, dataset.labels, seed);
  gap::FeedbackPayload feedback =
      gap::build_feedback(report, rules, dataset, examples, derive_seed(seed, 0x01));

  ordered_json rj;
  rj["k"] = report.k;
  rj["inertia"] = report.inertia;
  ordered_json clusters = ordered_json::array();
  for (const auto& c : report.clusters) {
    clusters.push_back({{"size", c.size},
                        {"success_count", c.success_count},
                        {"success_rate", c.success_rate},
                        {"classification", gap::cluster_class_name(c.classification)}});
  }
  rj["clusters"] = std::move(clusters);
  rj["uncovered_successes"] = report.uncovered_success_indices.size();
  write_file(fs::path(out_dir) / "cluster_report.json", rj.dump(2) + "\n");
  write_file(fs::path(out_dir) / "feedback.txt", feedback.render());
  std::cout << "k=" << report.k << ", " << report.uncovered_success_indices.size()
            << " uncovered successes; artifacts in " << out_dir << "\n";
  return kExitOk;
}

int cmd_train(const std::string& dataset_path, const std::string& rules_path, uint64_t seed,
              const std::string& out) {
  LabeledDataset dataset = load_dataset(dataset_path);
  auto rules = score_rules(load_rule_lines(rules_path), dataset, {});
  std::vector<stats::ScoredRule> passed;
  for (const auto& r : rules) {
    if (r.stats.passed) passed.push_back(r);
  }
  if (passed.empty()) throw model::ModelError("no rules passed validation; nothing to train on");
  gap::ActivationMatrix matrix = gap::build_activation_matrix(dataset, passed);
  model::TrainConfig cfg;
  cfg.seed = seed;
  auto [report, ensemble] = model::cross_validated_eval(matrix, dataset.labels, cfg);
  ordered_json j;
  j["rule_ids"] = ensemble.rule_ids;
  j["weights"] = ensemble.weights;
  j["intercept"] = ensemble.intercept;
  j["threshold"] = ensemble.threshold;
  j["converged"] = ensemble.converged;
  j["cross_val"] = {{"precision", report.pooled.precision},
                    {"recall", report.pooled.recall},
                    {"f_beta", report.pooled.f_beta}};
  write_file(out, j.dump(2) + "\n");
  std::cout << "pooled out-of-fold: precision " << report.pooled.precision << ", recall "
            << report.pooled.recall << ", F0.5 " << report.pooled.f_beta << ", threshold "
            << report.threshold << "\n";
  return kExitOk;
}

int cmd_run(const std::string& config_path, uint64_t seed, bool seed_set,
            const std::string& out_dir, const std::string& provider_kind) {
  pipeline::RunConfig config = pipeline::load_run_config(config_path);
  if (seed_set) {
    config.seed = seed;
    config.classifier.seed = seed;
  }
  if (!out_dir.empty()) config.out_dir = out_dir;
  if (!provider_kind.empty()) config.provider.kind = provider_kind;
  pipeline::RunState state = pipeline::full_run(config);
  std::cout << "completed " << state.iteration << " iterations, " << state.rules.size()
            << " rules (" << state.passed_rules().size() << " passed), "
            << state.provider_calls << " provider calls; artifacts in " << config.out_dir
            << "\n";
  return kExitOk;
}

int cmd_explain(const std::string& ruleset_path, const std::string& founder_path) {
  pipeline::RunState state = pipeline::load_ruleset(ruleset_path);
  FounderRecord founder;
  try {
    founder = record_from_json(ordered_json::parse(read_file(founder_path)));
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError(std::string("malformed founder file: ") + e.what());
  }
  std::cout << pipeline::explain_founder(state, founder);
  return kExitOk;
}

int cmd_report(const std::string& ruleset_path, const std::string& out_dir) {
  pipeline::RunState state = pipeline::load_ruleset(ruleset_path);
  if (out_dir.empty()) {
    std::cout << pipeline::render_report(state);
  } else {
    pipeline::emit_report(state, out_dir);
    std::cout << "wrote report.txt and report.json to " << out_dir << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpretable rule induction over founder records"};
  app.require_subcommand(1);

  uint64_t seed = 0;
  bool seed_set = false;
  std::string out, config_path, provider_kind, label_key = "success";
  app.add_option("--seed", seed, "Base seed")->each([&](const std::string&) { seed_set = true; });
  app.add_option("--out", out, "Output file or directory");
  app.add_option("--config", config_path, "Config file (JSON)");
  app.add_option("--provider", provider_kind, "Provider kind")
      ->check(CLI::IsMember({"mock", "network"}));

  std::string dataset_path, rules_path, ruleset_path, founder_path, passed_out;
  size_t synth_n = 1000, n_success = 60, n_failure = 60, examples = 3;
  double base_rate = 0.09;
  int rule_count = 30;
  std::vector<std::string> plants;

  auto* ingest = app.add_subcommand("ingest", "Validate a dataset file");
  ingest->add_option("dataset", dataset_path, "Dataset file")->required();
  ingest->add_option("--label-key", label_key, "Label field name");

  auto* synth = app.add_subcommand("synth", "Emit a synthetic dataset");
  synth->add_option("--n", synth_n, "Record count");
  synth->add_option("--base-rate", base_rate, "Success base rate");
  synth->add_option("--plant", plants, "Planted rule as <success_rate>@<lambda founder: ...>");

  auto* generate = app.add_subcommand("generate", "One provider call -> candidate file");
  generate->add_option("--dataset", dataset_path, "Dataset file")->required();
  generate->add_option("--rules-count", rule_count, "Requested rule count");
  generate->add_option("--sample-success", n_success, "Success sample quota");
  generate->add_option("--sample-failure", n_failure, "Failure sample quota");

  auto* evaluate = app.add_subcommand("evaluate", "Rules x dataset -> activation matrix");
  evaluate->add_option("--dataset", dataset_path, "Dataset file")->required();
  evaluate->add_option("--rules", rules_path, "Rule line file")->required();

  auto* validate = app.add_subcommand("validate", "Statistical validation of a rule file");
  validate->add_option("--dataset", dataset_path, "Dataset file")->required();
  validate->add_option("--rules", rules_path, "Rule line file")->required();
  validate->add_option("--passed", passed_out, "Write passing rules to this file");

  auto* cluster = app.add_subcommand("cluster", "Gap analysis + feedback file");
  cluster->add_option("--dataset", dataset_path, "Dataset file")->required();
  cluster->add_option("--rules", rules_path, "Rule line file")->required();
  cluster->add_option("--examples", examples, "Example founders per gap section");

  auto* train = app.add_subcommand("train", "Fit the rule ensemble classifier");
  train->add_option("--dataset", dataset_path, "Dataset file")->required();
  train->add_option("--rules", rules_path, "Rule line file")->required();

  auto* run = app.add_subcommand("run", "Full iteration loop from a config file");

  auto* explain = app.add_subcommand("explain", "Explain one founder against a ruleset");
  explain->add_option("--ruleset", ruleset_path, "ruleset.json from a run")->required();
  explain->add_option("--founder", founder_path, "Founder record JSON file")->required();

  auto* report = app.add_subcommand("report", "Render the run report");
  report->add_option("--ruleset", ruleset_path, "ruleset.json from a run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return cmd_ingest(dataset_path, label_key);
    if (*synth) {
      if (out.empty()) throw CLI::ValidationError("--out", "synth requires --out <file>");
      return cmd_synth(synth_n, base_rate, plants, seed, out);
    }
    if (*generate)
      return cmd_generate(dataset_path, config_path, provider_kind, seed, rule_count,
                          n_success, n_failure, out.empty() ? "out" : out);
    if (*evaluate) {
      if (out.empty()) throw CLI::ValidationError("--out", "evaluate requires --out <file>");
      return cmd_evaluate(dataset_path, rules_path, out);
    }
    if (*validate) return cmd_validate(dataset_path, rules_path, out, passed_out);
    if (*cluster)
      return cmd_cluster(dataset_path, rules_path, seed, examples, out.empty() ? "out" : out);
    if (*train) {
      if (out.empty()) throw CLI::ValidationError("--out", "train requires --out <file>");
      return cmd_train(dataset_path, rules_path, seed, out);
    }
    if (*run) {
      if (config_path.empty())
        throw CLI::ValidationError("--config", "run requires --config <file>");
      return cmd_run(config_path, seed, seed_set, out, provider_kind);
    }
    if (*explain) return cmd_explain(ruleset_path, founder_path);
    if (*report) return cmd_report(ruleset_path, out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const gen::ProviderError& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const gen::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const pipeline::PipelineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DatasetError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
