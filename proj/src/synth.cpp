#include "vcrules/domain.hpp"
#include "vcrules/dsl.hpp"
#include "vcrules/rng.hpp"

namespace vcrules {

namespace {

// Small fixed vocabularies keep planted-rule semantics auditable.
const std::vector<std::string> kIndustries = {
    "Software Development", "Cybersecurity", "Fintech",
    "Healthcare",           "E-Commerce",    "Artificial Intelligence",
};
const std::vector<std::string> kDegrees = {"BS", "MS", "MBA", "PhD"};
const std::vector<std::string> kFields = {
    "Computer Science", "Economics", "Electrical Engineering", "Biology", "Business",
};
const std::vector<std::string> kQsStrings = {"5", "15", "51-100", "101-200", "301-400", "601+", ""};
const std::vector<std::string> kRoles = {
    "CEO",           "CTO",           "Founder",          "VP Engineering",
    "Senior Engineer", "Product Manager", "Security Engineer", "Board Member",
    "Executive Chairman", "Operating Partner",
};
const std::vector<std::string> kCompanySizes = {
    "1-10", "11-50", "51-200", "201-500", "501-1000", "1001-5000", "10001+",
};
const std::vector<std::string> kDurations = {"0-1", "1-2", "2-3", "4-5", "6-8", "10+"};
const std::vector<std::string> kJobIndustries = {
    "Software", "Technology", "Finance", "Venture Capital & Private Equity",
    "Healthcare", "Retail",
};

template <class T>
const T& pick(Rng& rng, const std::vector<T>& pool) {
  return pool[rng.below(pool.size())];
}

FounderRecord random_record(Rng& rng) {
  FounderRecord r;
  r.industry = pick(rng, kIndustries);
  size_t n_edu = rng.below(4);  // 0..3
  for (size_t i = 0; i < n_edu; ++i) {
    r.educations.push_back(
        EducationRecord{pick(rng, kDegrees), pick(rng, kFields), pick(rng, kQsStrings)});
  }
  size_t n_jobs = rng.below(6);  // 0..5
  for (size_t i = 0; i < n_jobs; ++i) {
    r.jobs.push_back(EmploymentRecord{pick(rng, kRoles), pick(rng, kCompanySizes),
                                      pick(rng, kJobIndustries), pick(rng, kDurations)});
  }
  if (rng.uniform() < 0.08) {
    r.acquisitions.push_back(ExitEvent{ExitKind::acquisition, {{"company", "StartupCo"}}});
    if (rng.uniform() < 0.25)
      r.acquisitions.push_back(ExitEvent{ExitKind::acquisition, {{"company", "SecondCo"}}});
  }
  if (rng.uniform() < 0.04) {
    r.ipos.push_back(ExitEvent{ExitKind::ipo, {{"company", "ListedCo"}}});
  }
  return r;
}

}  // namespace

LabeledDataset generate_synthetic_dataset(size_t n, double base_rate,
                                          const std::vector<PlantedRule>& planted_rules,
                                          uint64_t seed) {
  if (n == 0) throw DatasetError("generate_synthetic_dataset: n must be >= 1");
  if (base_rate < 0.0 || base_rate > 1.0)
    throw DatasetError("generate_synthetic_dataset: base_rate must lie in [0,1]");

  struct Plant {
    dsl::ExprPtr ast;
    double rate;
  };
  std::vector<Plant> plants;
  for (const auto& p : planted_rules) {
    if (p.matched_success_rate < 0.0 || p.matched_success_rate > 1.0)
      throw DatasetError("generate_synthetic_dataset: planted rate must lie in [0,1]");
    try {
      plants.push_back({dsl::parse_rule_expression(p.source), p.matched_success_rate});
    } catch (const dsl::ParseError& e) {
      throw DatasetError(std::string("unparseable planted rule: ") + e.what());
    }
  }

  Rng rng(derive_seed(seed, 0x5e7a, 0xda7a));
  LabeledDataset ds;
  ds.records.reserve(n);
  ds.labels.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    FounderRecord r = random_record(rng);
    double rate = base_rate;
    dsl::Value v = dsl::to_value(r);
    for (const auto& plant : plants) {
      if (dsl::evaluate(*plant.ast, v).value) {
        rate = plant.rate;  // first matching plant wins
        break;
      }
    }
    ds.labels.push_back(rng.uniform() < rate ? 1 : 0);
    ds.records.push_back(std::move(r));
  }
  return ds;
}

}  // namespace vcrules
