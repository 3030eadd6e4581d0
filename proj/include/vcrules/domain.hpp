#pragma once
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace vcrules {

struct EducationRecord {
  std::string degree;
  std::string field;
  std::string qs_ranking;  // raw string, parsed lazily by the DSL helper
  bool operator==(const EducationRecord&) const = default;
};

struct EmploymentRecord {
  std::string role;
  std::string company_size;  // raw range, e.g. "51-200"
  std::string industry;
  std::string duration;  // raw range in years, e.g. "4-5"
  bool operator==(const EmploymentRecord&) const = default;
};

enum class ExitKind { ipo, acquisition };

struct ExitEvent {
  ExitKind kind = ExitKind::acquisition;
  std::map<std::string, std::string> attributes;  // opaque payload
  bool operator==(const ExitEvent&) const = default;
};

struct FounderRecord {
  std::string industry;
  std::vector<EducationRecord> educations;
  std::vector<EmploymentRecord> jobs;
  std::vector<ExitEvent> ipos;
  std::vector<ExitEvent> acquisitions;
  // Unknown top-level keys from the source file, preserved but never
  // visible to rule evaluation.
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
  bool operator==(const FounderRecord&) const = default;
};

struct LabeledDataset {
  std::vector<FounderRecord> records;
  std::vector<uint8_t> labels;  // 1 = success, 0 = failure; aligned with records

  size_t size() const { return records.size(); }
  size_t success_count() const;
  // Always recomputed from labels.
  double base_rate() const;
  bool operator==(const LabeledDataset&) const = default;
};

class DatasetError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Record-level (de)serialization. record_to_json emits keys in the fixed
// order industry, educations, jobs, ipos, acquisitions, then extras.
nlohmann::ordered_json record_to_json(const FounderRecord& r);
FounderRecord record_from_json(const nlohmann::ordered_json& j);

// Dataset files: UTF-8, either one top-level JSON array of founder objects
// or newline-delimited objects. Each object carries label_field as 0/1 or
// false/true. Missing strings/lists are normalized away at ingestion.
LabeledDataset parse_dataset(const std::string& text, const std::string& label_field = "success");
LabeledDataset load_dataset(const std::string& path, const std::string& label_field = "success");

// Serializes as a JSON array, labels written as 0/1 integers under
// label_field. Deterministic byte output for a given dataset.
std::string serialize_dataset(const LabeledDataset& ds, const std::string& label_field = "success");
void save_dataset(const LabeledDataset& ds, const std::string& path,
                  const std::string& label_field = "success");

struct PlantedRule {
  std::string source;           // full "lambda founder: ..." expression
  double matched_success_rate;  // success probability for matching records
};

// Schema-valid random founders drawn from a small fixed vocabulary.
// Matching a planted rule overrides the label probability; first matching
// plant wins. Deterministic given seed.
LabeledDataset generate_synthetic_dataset(size_t n, double base_rate,
                                          const std::vector<PlantedRule>& planted_rules,
                                          uint64_t seed);

}  // namespace vcrules
