#pragma once
#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vcrules/cluster.hpp"
#include "vcrules/dsl.hpp"

namespace vcrules::gen {

class ProviderError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Bucket {
  std::string industry;
  int education_count = 0;  // clamped to 0..3 (3 means 3+)
  int job_count = 0;        // clamped to 0..5 (5 means 5+)
  bool operator==(const Bucket&) const = default;
  auto operator<=>(const Bucket&) const = default;
};

Bucket diversity_bucket(const FounderRecord& r);
std::vector<Bucket> diversity_buckets(const LabeledDataset& dataset);

struct SampleResult {
  std::vector<size_t> success_indices;
  std::vector<size_t> failure_indices;
  bool success_shortfall = false;
  bool failure_shortfall = false;
};

// Within each outcome class: seeded bucket order, seeded within-bucket
// order, round-robin one founder per bucket until the quota fills.
SampleResult stratified_prompt_sample(const LabeledDataset& dataset, size_t n_success,
                                      size_t n_failure, uint64_t seed);

struct PromptSpec {
  const LabeledDataset* dataset = nullptr;
  SampleResult sample;
  int requested_rule_count = 30;
  int iteration = 1;
  std::optional<gap::FeedbackPayload> feedback;  // iterations >= 2
};

std::string build_generation_prompt(const PromptSpec& spec);

struct RejectedLine {
  std::string line;
  std::string reason;  // "format", "parse: ...", "duplicate name"
};

struct ParsedRules {
  std::vector<dsl::RuleCandidate> candidates;
  std::vector<RejectedLine> rejected;
};

// Accepts lines of the form "<index>. <name> ||| <description> ||| lambda
// founder: <expr>". Never throws; bad lines land in rejected.
ParsedRules parse_rule_block(const std::string& response, int iteration);

class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;

  std::string complete(const std::string& prompt) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return do_complete(prompt);
  }
  int call_count() const { return calls_.load(std::memory_order_relaxed); }

 private:
  virtual std::string do_complete(const std::string& prompt) = 0;
  std::atomic<int> calls_{0};
};

// One provider call per attempt; on ProviderError retries up to
// max_retries more times, then rethrows.
std::string request_rules(CompletionProvider& provider, const std::string& prompt,
                          int max_retries = 2);

struct PoolEntry {
  std::string line;  // "name ||| description ||| lambda founder: ..." (or deliberately malformed)
  bool gap_targeted = false;
};

// The shipped offline rule pool: the paper-derived rule corpus plus two
// malformed lines. At least 30 well-formed entries.
const std::vector<PoolEntry>& default_rule_pool();

// Deterministic offline provider. Emits a numbered rule block sampled from
// the pool by seed; when the prompt carries a feedback section, gap-tagged
// entries are emitted first.
class MockProvider : public CompletionProvider {
 public:
  MockProvider(uint64_t seed, std::vector<PoolEntry> pool, int rule_count = 30);

 private:
  std::string do_complete(const std::string& prompt) override;
  uint64_t seed_;
  std::vector<PoolEntry> pool_;
  int rule_count_;
};

inline constexpr const char* kFeedbackHeader = "## FEEDBACK";

struct ProviderConfig {
  std::string kind = "mock";  // "mock" | "network"
  std::string model = "gpt-4o";
  double temperature = 0.2;
  int max_output_tokens = 4096;
  int max_retries = 2;
  uint64_t mock_seed = 0;
  // network settings
  std::string endpoint;                       // e.g. "http://localhost:8080"
  std::string path = "/v1/chat/completions";  // request path
  std::string api_key_env = "VCRULES_API_KEY";
  // request body; {{PROMPT}} / {{MODEL}} / {{TEMPERATURE}} / {{MAX_TOKENS}}
  // substituted (PROMPT and MODEL as JSON string contents)
  std::string body_template;
  std::string response_text_pointer = "/choices/0/message/content";
};

ProviderConfig provider_config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json provider_config_to_json(const ProviderConfig& c);

// Conventional chat-completion HTTP client driven entirely by the config.
class HttpProvider : public CompletionProvider {
 public:
  explicit HttpProvider(ProviderConfig config);

 private:
  std::string do_complete(const std::string& prompt) override;
  ProviderConfig config_;
};

std::unique_ptr<CompletionProvider> make_provider(const ProviderConfig& config);

}  // namespace vcrules::gen
