#include "vcrules/generation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <sstream>

#include "httplib.h"
#include "vcrules/rng.hpp"

namespace vcrules::gen {

Bucket diversity_bucket(const FounderRecord& r) {
  return Bucket{r.industry, static_cast<int>(std::min<size_t>(r.educations.size(), 3)),
                static_cast<int>(std::min<size_t>(r.jobs.size(), 5))};
}

std::vector<Bucket> diversity_buckets(const LabeledDataset& dataset) {
  std::vector<Bucket> out;
  out.reserve(dataset.size());
  for (const auto& r : dataset.records) out.push_back(diversity_bucket(r));
  return out;
}

namespace {

std::vector<size_t> sample_class(const LabeledDataset& dataset, uint8_t label, size_t quota,
                                 Rng& rng, bool& shortfall) {
  std::map<Bucket, std::vector<size_t>> buckets;
  for (size_t i = 0; i < dataset.size(); ++i) {
    if (dataset.labels[i] == label) buckets[diversity_bucket(dataset.records[i])].push_back(i);
  }
  std::vector<std::vector<size_t>> groups;
  for (auto& [key, members] : buckets) {
    rng.shuffle(members);
    groups.push_back(std::move(members));
  }
  rng.shuffle(groups);

  std::vector<size_t> picked;
  size_t available = 0;
  for (const auto& g : groups) available += g.size();
  shortfall = available < quota;

  // round-robin: one founder per bucket per pass
  size_t pass = 0;
  while (picked.size() < quota && picked.size() < available) {
    for (const auto& g : groups) {
      if (pass < g.size() && picked.size() < quota) picked.push_back(g[pass]);
    }
    ++pass;
  }
  return picked;
}

}  // namespace

SampleResult stratified_prompt_sample(const LabeledDataset& dataset, size_t n_success,
                                      size_t n_failure, uint64_t seed) {
  SampleResult res;
  Rng rng_s(derive_seed(seed, 0x5a3e, 1));
  Rng rng_f(derive_seed(seed, 0x5a3e, 0));
  res.success_indices = sample_class(dataset, 1, n_success, rng_s, res.success_shortfall);
  res.failure_indices = sample_class(dataset, 0, n_failure, rng_f, res.failure_shortfall);
  return res;
}

namespace {

const char* kExampleRules[] = {
    "prior_exit ||| Founder has at least one prior IPO or acquisition ||| lambda founder: "
    "len(founder.get(\"ipos\", []) or []) + len(founder.get(\"acquisitions\", []) or []) > 0",
    "elite_qs_top10 ||| Attended a top-10 QS-ranked university ||| lambda founder: "
    "any(parse_qs(e.get(\"qs_ranking\", \"\")) <= 10 for e in founder.get(\"educations\", []))",
    "founder_scaled_200plus ||| Founded or co-founded a company that grew past 200 employees ||| "
    "lambda founder: any(\"founder\" in j.get(\"role\", \"\").lower() and "
    "parse_company_size(j.get(\"company_size\", \"\")) > 200 for j in founder.get(\"jobs\", []))",
    "worked_in_vc_pe ||| Worked in venture capital or private equity ||| lambda founder: "
    "any(\"venture\" in j.get(\"industry\", \"\").lower() or \"private equity\" in "
    "j.get(\"industry\", \"\").lower() for j in founder.get(\"jobs\", []))",
    "long_tenure_operator ||| Held a role for six or more years ||| lambda founder: "
    "any(parse_duration(j.get(\"duration\", \"\")) >= 6 for j in founder.get(\"jobs\", []))",
    "technical_degree ||| Holds a technical degree ||| lambda founder: "
    "any(e.get(\"field\", \"\").lower() in \"computer science electrical engineering\" "
    "for e in founder.get(\"educations\", []))",
    "industry_match ||| Has worked in the startup's own industry ||| lambda founder: "
    "any(j.get(\"industry\", \"\").lower() == founder.get(\"industry\", \"\").lower() "
    "for j in founder.get(\"jobs\", []))",
    "executive_role ||| Held a C-level or VP role ||| lambda founder: "
    "any(\"ceo\" in j.get(\"role\", \"\").lower() or \"cto\" in j.get(\"role\", \"\").lower() "
    "or \"vp\" in j.get(\"role\", \"\").lower() for j in founder.get(\"jobs\", []))",
};

void render_founder_lines(std::ostringstream& os, const LabeledDataset& dataset,
                          const std::vector<size_t>& indices) {
  for (size_t i : indices) os << record_to_json(dataset.records[i]).dump() << "\n";
}

}  // namespace

std::string build_generation_prompt(const PromptSpec& spec) {
  if (!spec.dataset) throw ConfigError("build_generation_prompt: no dataset");
  const LabeledDataset& ds = *spec.dataset;
  std::ostringstream os;
  os << "You are an expert feature engineer. Generate binary classification rules\n"
        "to predict startup founder success.\n\n";
  os << "## TASK\n"
     << "Generate exactly " << spec.requested_rule_count
     << " binary rules. Each rule MUST be a valid Python lambda\n"
        "expression that takes a `founder` dict and returns True or False.\n\n";
  os << "## OUTPUT FORMAT\n"
        "1. rule_name ||| Description ||| lambda founder: <expr>\n\n";
  os << "## FOUNDER DATA STRUCTURE\n"
        "founder = {\n"
        "    \"industry\": str,\n"
        "    \"educations\": [\n"
        "        {\"degree\": str, \"field\": str,\n"
        "         \"qs_ranking\": str}\n"
        "    ],\n"
        "    \"jobs\": [\n"
        "        {\"role\": str, \"company_size\": str,\n"
        "         \"industry\": str, \"duration\": str}\n"
        "    ],\n"
        "    \"ipos\": list,\n"
        "    \"acquisitions\": list\n"
        "}\n\n";
  os << "## HELPER FUNCTIONS\n"
        "parse_qs(qs_str) -> float\n"
        "parse_duration(dur_str) -> float\n"
        "parse_company_size(size_str) -> int\n\n";
  os << "## RULES FOR WRITING EXPRESSIONS\n"
        "1. Handle empty lists with any(), len()\n"
        "2. Use .get() for dict access with defaults\n"
        "3. Use .lower() for string comparisons\n"
        "4. Return boolean (True/False)\n\n";
  os << "## EXAMPLE RULES\n";
  for (size_t i = 0; i < std::size(kExampleRules); ++i) {
    os << (i + 1) << ". " << kExampleRules[i] << "\n";
  }
  os << "\n";
  os << "## SUCCESSFUL FOUNDERS (" << spec.sample.success_indices.size() << " samples";
  if (spec.sample.success_shortfall) os << ", fewer than requested";
  os << ")\n";
  render_founder_lines(os, ds, spec.sample.success_indices);
  os << "\n## UNSUCCESSFUL FOUNDERS (" << spec.sample.failure_indices.size() << " samples";
  if (spec.sample.failure_shortfall) os << ", fewer than requested";
  os << ")\n";
  render_founder_lines(os, ds, spec.sample.failure_indices);
  if (spec.feedback) {
    os << "\n" << kFeedbackHeader << "\n" << spec.feedback->render();
  }
  return os.str();
}

namespace {

std::string trim_copy(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  size_t pos = 0;
  for (;;) {
    size_t sep = line.find("|||", pos);
    if (sep == std::string::npos) {
      out.push_back(trim_copy(line.substr(pos)));
      break;
    }
    out.push_back(trim_copy(line.substr(pos, sep - pos)));
    pos = sep + 3;
  }
  return out;
}

// "<index>. <name>" -> name, or empty on format violation
std::string strip_index(const std::string& field) {
  size_t i = 0;
  while (i < field.size() && std::isdigit(static_cast<unsigned char>(field[i]))) ++i;
  if (i == 0 || i >= field.size() || field[i] != '.') return "";
  return trim_copy(field.substr(i + 1));
}

bool valid_rule_name(const std::string& name) {
  if (name.empty()) return false;
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

}  // namespace

ParsedRules parse_rule_block(const std::string& response, int iteration) {
  ParsedRules out;
  std::istringstream in(response);
  std::string line;
  std::vector<std::string> seen_names;
  while (std::getline(in, line)) {
    if (line.find("|||") == std::string::npos) continue;  // prose, ignore
    std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 3) {
      out.rejected.push_back({line, "format"});
      continue;
    }
    std::string name = strip_index(fields[0]);
    if (!valid_rule_name(name)) {
      out.rejected.push_back({line, "format"});
      continue;
    }
    if (std::find(seen_names.begin(), seen_names.end(), name) != seen_names.end()) {
      out.rejected.push_back({line, "duplicate name"});
      continue;
    }
    dsl::RuleCandidate cand;
    cand.name = name;
    cand.description = fields[1];
    cand.source = fields[2];
    cand.iteration = iteration;
    try {
      cand.ast = dsl::parse_rule_expression(cand.source);
    } catch (const dsl::ParseError& e) {
      out.rejected.push_back({line, std::string("parse: ") + e.what()});
      continue;
    }
    seen_names.push_back(name);
    out.candidates.push_back(std::move(cand));
  }
  return out;
}

std::string request_rules(CompletionProvider& provider, const std::string& prompt,
                          int max_retries) {
  for (int attempt = 0;; ++attempt) {
    try {
      return provider.complete(prompt);
    } catch (const ProviderError&) {
      if (attempt >= max_retries) throw;
    }
  }
}

// ---------------------------------------------------------------------------
// Rule pool and mock provider

const std::vector<PoolEntry>& default_rule_pool() {
  static const std::vector<PoolEntry> pool = {
      // iteration-1 style rules
      {kExampleRules[0], false},  // prior_exit
      {kExampleRules[1], false},  // elite_qs_top10
      {kExampleRules[2], false},  // founder_scaled_200plus
      {kExampleRules[3], false},  // worked_in_vc_pe
      {kExampleRules[4], false},
      {kExampleRules[5], false},
      {kExampleRules[6], false},
      {kExampleRules[7], false},
      {"elite_school_and_exit ||| Top-50 QS university and at least one prior exit ||| "
       "lambda founder: (any(parse_qs(e.get(\"qs_ranking\",\"\")) <= 50 for e in "
       "founder.get(\"educations\", [])) and len(founder.get(\"ipos\", []) or []) + "
       "len(founder.get(\"acquisitions\", []) or []) > 0)",
       false},
      {"executive_chair_or_operating_partner ||| Served as executive chairman or operating "
       "partner ||| lambda founder: any(\"chair\" in j.get(\"role\", \"\").lower() or "
       "\"operating partner\" in j.get(\"role\", \"\").lower() for j in founder.get(\"jobs\", "
       "[]))",
       false},
      {"phd_holder ||| Holds a PhD ||| lambda founder: any(e.get(\"degree\", \"\") == \"PhD\" "
       "for e in founder.get(\"educations\", []))",
       false},
      {"mba_holder ||| Holds an MBA ||| lambda founder: any(e.get(\"degree\", \"\") == \"MBA\" "
       "for e in founder.get(\"educations\", []))",
       false},
      {"multiple_educations ||| Holds two or more degrees ||| lambda founder: "
       "len(founder.get(\"educations\", []) or []) >= 2",
       false},
      {"deep_career ||| Four or more prior roles ||| lambda founder: "
       "len(founder.get(\"jobs\", []) or []) >= 4",
       false},
      {"big_company_experience ||| Worked at a 10000+ employee company ||| lambda founder: "
       "any(parse_company_size(j.get(\"company_size\", \"\")) >= 10000 for j in "
       "founder.get(\"jobs\", []))",
       false},
      {"startup_experience ||| Worked at a company of at most 50 people ||| lambda founder: "
       "any(parse_company_size(j.get(\"company_size\", \"\")) <= 50 and "
       "len(j.get(\"company_size\", \"\")) > 0 for j in founder.get(\"jobs\", []))",
       false},
      {"elite_qs_top50 ||| Attended a top-50 QS-ranked university ||| lambda founder: "
       "any(parse_qs(e.get(\"qs_ranking\", \"\")) <= 50 for e in founder.get(\"educations\", "
       "[]))",
       false},
      {"fintech_founder ||| Startup operates in fintech ||| lambda founder: "
       "founder.get(\"industry\", \"\").lower() == \"fintech\"",
       false},
      {"cs_degree ||| Studied computer science ||| lambda founder: "
       "any(\"computer\" in e.get(\"field\", \"\").lower() for e in "
       "founder.get(\"educations\", []))",
       false},
      {"short_stints_only ||| Every role lasted under two years ||| lambda founder: "
       "len(founder.get(\"jobs\", []) or []) > 0 and all(parse_duration(j.get(\"duration\", "
       "\"\")) < 2 for j in founder.get(\"jobs\", []))",
       false},
      {"no_formal_education ||| No recorded education ||| lambda founder: "
       "len(founder.get(\"educations\", []) or []) == 0",
       false},
      {"product_background ||| Held a product role ||| lambda founder: "
       "any(\"product\" in j.get(\"role\", \"\").lower() for j in founder.get(\"jobs\", []))",
       false},
      {"healthcare_crossover ||| Worked in healthcare before founding ||| lambda founder: "
       "any(\"healthcare\" in j.get(\"industry\", \"\").lower() for j in "
       "founder.get(\"jobs\", []))",
       false},
      {"engineer_turned_founder ||| Was a senior engineer before founding ||| lambda founder: "
       "any(\"senior engineer\" in j.get(\"role\", \"\").lower() for j in "
       "founder.get(\"jobs\", []))",
       false},

      // gap-targeted rules (iteration-2 style)
      {"cybersecurity_domain_depth ||| Security-industry startup with technical security role "
       "experience ||| lambda founder: \"security\" in founder.get(\"industry\", \"\").lower() "
       "and any(\"security\" in j.get(\"role\", \"\").lower() for j in founder.get(\"jobs\", "
       "[]))",
       true},
      {"ipo_only_exit ||| Prior IPO but no acquisitions ||| lambda founder: "
       "len(founder.get(\"ipos\", []) or []) > 0 and len(founder.get(\"acquisitions\", []) or "
       "[]) == 0",
       true},
      {"repeat_exit_founder ||| Two or more prior exits ||| lambda founder: "
       "len(founder.get(\"ipos\", []) or []) + len(founder.get(\"acquisitions\", []) or []) >= "
       "2",
       true},
      {"board_plus_exit ||| Board or advisory experience combined with a prior exit ||| "
       "lambda founder: any(\"board\" in j.get(\"role\", \"\").lower() for j in "
       "founder.get(\"jobs\", [])) and len(founder.get(\"ipos\", []) or []) + "
       "len(founder.get(\"acquisitions\", []) or []) > 0",
       true},
      {"founder_scaled_500plus ||| Founded a company that grew past 500 employees ||| "
       "lambda founder: any(\"founder\" in j.get(\"role\", \"\").lower() and "
       "parse_company_size(j.get(\"company_size\", \"\")) > 500 for j in "
       "founder.get(\"jobs\", []))",
       true},
      {"exit_and_elite_field ||| Prior exit combined with a technical degree ||| "
       "lambda founder: len(founder.get(\"acquisitions\", []) or []) > 0 and "
       "any(\"engineering\" in e.get(\"field\", \"\").lower() or \"computer\" in "
       "e.get(\"field\", \"\").lower() for e in founder.get(\"educations\", []))",
       true},
      {"finance_background ||| Worked in finance ||| lambda founder: "
       "any(\"finance\" in j.get(\"industry\", \"\").lower() for j in founder.get(\"jobs\", "
       "[]))",
       true},
      {"exec_at_scaled_company ||| Executive role at a 1000+ employee company ||| "
       "lambda founder: any((\"ceo\" in j.get(\"role\", \"\").lower() or \"cto\" in "
       "j.get(\"role\", \"\").lower()) and parse_company_size(j.get(\"company_size\", \"\")) "
       ">= 1000 for j in founder.get(\"jobs\", []))",
       true},
      {"ai_with_phd ||| AI startup founded by a PhD ||| lambda founder: "
       "\"artificial\" in founder.get(\"industry\", \"\").lower() and "
       "any(e.get(\"degree\", \"\") == \"PhD\" for e in founder.get(\"educations\", []))",
       true},
      {"long_tenure_and_exit ||| Six-plus-year tenure plus a prior exit ||| lambda founder: "
       "any(parse_duration(j.get(\"duration\", \"\")) >= 6 for j in founder.get(\"jobs\", [])) "
       "and len(founder.get(\"acquisitions\", []) or []) + len(founder.get(\"ipos\", []) or "
       "[]) > 0",
       true},
      {"operator_depth ||| Three or more roles with one lasting four-plus years ||| "
       "lambda founder: len(founder.get(\"jobs\", []) or []) >= 3 and "
       "any(parse_duration(j.get(\"duration\", \"\")) >= 4 for j in founder.get(\"jobs\", []))",
       true},
      {"elite_and_executive ||| Top-50 university plus executive experience ||| "
       "lambda founder: any(parse_qs(e.get(\"qs_ranking\", \"\")) <= 50 for e in "
       "founder.get(\"educations\", [])) and any(\"ceo\" in j.get(\"role\", \"\").lower() or "
       "\"cto\" in j.get(\"role\", \"\").lower() for j in founder.get(\"jobs\", []))",
       true},
      {"security_engineer_background ||| Held a security engineering role ||| lambda founder: "
       "any(\"security engineer\" in j.get(\"role\", \"\").lower() for j in "
       "founder.get(\"jobs\", []))",
       true},
      {"vc_and_exit ||| VC/PE experience plus a prior exit ||| lambda founder: "
       "any(\"venture\" in j.get(\"industry\", \"\").lower() for j in founder.get(\"jobs\", "
       "[])) and len(founder.get(\"acquisitions\", []) or []) + len(founder.get(\"ipos\", []) "
       "or []) > 0",
       true},
      {"serial_operator ||| Five-plus roles across companies ||| lambda founder: "
       "len(founder.get(\"jobs\", []) or []) >= 5",
       true},
      {"elite_qs_top5 ||| Attended a top-5 QS-ranked university ||| lambda founder: "
       "any(parse_qs(e.get(\"qs_ranking\", \"\")) <= 5 for e in founder.get(\"educations\", "
       "[]))",
       true},

      // deliberately malformed lines; downstream parsing must reject these
      {"broken_rule_missing_field ||| lambda founder: True", false},
      {"broken_rule_bad_expr ||| Uses a construct outside the grammar ||| "
       "lambda founder: __import__(\"os\").system(\"true\")",
       false},
  };
  return pool;
}

MockProvider::MockProvider(uint64_t seed, std::vector<PoolEntry> pool, int rule_count)
    : seed_(seed), pool_(std::move(pool)), rule_count_(rule_count) {
  int well_formed = 0;
  for (const auto& e : pool_) {
    if (split_fields(e.line).size() == 3) ++well_formed;
  }
  if (static_cast<int>(pool_.size()) < rule_count_)
    throw ConfigError("mock provider: rule pool smaller than requested rule count");
  if (well_formed < 30)
    throw ConfigError("mock provider: rule pool needs at least 30 well-formed lines");
}

std::string MockProvider::do_complete(const std::string& prompt) {
  bool has_feedback = prompt.find(kFeedbackHeader) != std::string::npos;
  Rng rng(derive_seed(seed_, has_feedback ? 2 : 1));

  std::vector<size_t> order;
  if (has_feedback) {
    // emulate gap-targeted generation: gap-tagged entries first
    std::vector<size_t> gap, rest;
    for (size_t i = 0; i < pool_.size(); ++i) (pool_[i].gap_targeted ? gap : rest).push_back(i);
    rng.shuffle(gap);
    rng.shuffle(rest);
    order = gap;
    order.insert(order.end(), rest.begin(), rest.end());
  } else {
    for (size_t i = 0; i < pool_.size(); ++i) order.push_back(i);
    rng.shuffle(order);
  }
  if (order.size() > static_cast<size_t>(rule_count_)) order.resize(rule_count_);

  std::ostringstream os;
  for (size_t i = 0; i < order.size(); ++i) {
    os << (i + 1) << ". " << pool_[order[i]].line << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Provider configuration and HTTP client

namespace {

const char* kDefaultBodyTemplate =
    R"({"model":"{{MODEL}}","temperature":{{TEMPERATURE}},"max_tokens":{{MAX_TOKENS}},)"
    R"("messages":[{"role":"user","content":"{{PROMPT}}"}]})";

std::string json_escape(const std::string& s) {
  std::string dumped = nlohmann::json(s).dump();
  return dumped.substr(1, dumped.size() - 2);  // strip surrounding quotes
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

ProviderConfig provider_config_from_json(const nlohmann::ordered_json& j) {
  ProviderConfig c;
  c.body_template = kDefaultBodyTemplate;
  if (auto it = j.find("kind"); it != j.end()) c.kind = it->get<std::string>();
  if (c.kind != "mock" && c.kind != "network")
    throw ConfigError("provider kind must be 'mock' or 'network'");
  if (auto it = j.find("model"); it != j.end()) c.model = it->get<std::string>();
  if (auto it = j.find("temperature"); it != j.end()) c.temperature = it->get<double>();
  if (auto it = j.find("max_output_tokens"); it != j.end())
    c.max_output_tokens = it->get<int>();
  if (auto it = j.find("max_retries"); it != j.end()) c.max_retries = it->get<int>();
  if (auto it = j.find("mock_seed"); it != j.end()) c.mock_seed = it->get<uint64_t>();
  if (auto it = j.find("endpoint"); it != j.end()) c.endpoint = it->get<std::string>();
  if (auto it = j.find("path"); it != j.end()) c.path = it->get<std::string>();
  if (auto it = j.find("api_key_env"); it != j.end()) c.api_key_env = it->get<std::string>();
  if (auto it = j.find("body_template"); it != j.end())
    c.body_template = it->get<std::string>();
  if (auto it = j.find("response_text_pointer"); it != j.end())
    c.response_text_pointer = it->get<std::string>();
  return c;
}

nlohmann::ordered_json provider_config_to_json(const ProviderConfig& c) {
  nlohmann::ordered_json j;
  j["kind"] = c.kind;
  j["model"] = c.model;
  j["temperature"] = c.temperature;
  j["max_output_tokens"] = c.max_output_tokens;
  j["max_retries"] = c.max_retries;
  j["mock_seed"] = c.mock_seed;
  j["endpoint"] = c.endpoint;
  j["path"] = c.path;
  j["api_key_env"] = c.api_key_env;
  j["body_template"] = c.body_template;
  j["response_text_pointer"] = c.response_text_pointer;
  return j;
}

HttpProvider::HttpProvider(ProviderConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw ConfigError("network provider requires an endpoint");
  if (config_.body_template.empty()) config_.body_template = kDefaultBodyTemplate;
}

std::string HttpProvider::do_complete(const std::string& prompt) {
  std::string body = config_.body_template;
  replace_all(body, "{{PROMPT}}", json_escape(prompt));
  replace_all(body, "{{MODEL}}", json_escape(config_.model));
  replace_all(body, "{{TEMPERATURE}}", std::to_string(config_.temperature));
  replace_all(body, "{{MAX_TOKENS}}", std::to_string(config_.max_output_tokens));

  httplib::Client client(config_.endpoint);
  client.set_read_timeout(120, 0);
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  auto res = client.Post(config_.path, headers, body, "application/json");
  if (!res) throw ProviderError("provider transport failure: " + to_string(res.error()));
  if (res->status != 200)
    throw ProviderError("provider returned HTTP " + std::to_string(res->status));
  try {
    nlohmann::json parsed = nlohmann::json::parse(res->body);
    return parsed.at(nlohmann::json::json_pointer(config_.response_text_pointer))
        .get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("cannot extract completion text: ") + e.what());
  }
}

std::unique_ptr<CompletionProvider> make_provider(const ProviderConfig& config) {
  if (config.kind == "mock")
    return std::make_unique<MockProvider>(config.mock_seed, default_rule_pool());
  return std::make_unique<HttpProvider>(config);
}

}  // namespace vcrules::gen
