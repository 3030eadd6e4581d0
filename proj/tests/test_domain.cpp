#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "doctest.h"
#include "vcrules/domain.hpp"
#include "vcrules/dsl.hpp"

using namespace vcrules;
using nlohmann::ordered_json;

namespace {

FounderRecord appendix_founder() {
  FounderRecord r;
  r.industry = "Enterprise Software";
  r.educations = {{"BSc", "Computer Science", "15"}};
  r.jobs = {{"CTO", "51-200", "Enterprise Software", "4-5"},
            {"Senior Engineer", "10001+", "Enterprise Software", "2-3"}};
  r.acquisitions = {{ExitKind::acquisition, {{"company", "StartupCo"}}}};
  return r;
}

}  // namespace

TEST_CASE("record json round-trip preserves every field") {
  FounderRecord r = appendix_founder();
  r.extra["note"] = "kept";
  FounderRecord back = record_from_json(record_to_json(r));
  CHECK(back == r);
}

TEST_CASE("record_from_json normalizes missing fields to empty") {
  ordered_json j = {{"industry", "Fintech"}};
  FounderRecord r = record_from_json(j);
  CHECK(r.educations.empty());
  CHECK(r.jobs.empty());
  CHECK(r.ipos.empty());
  CHECK(r.acquisitions.empty());
}

TEST_CASE("parse_dataset accepts array and ndjson forms equally") {
  std::string array_text = R"([{"industry":"Fintech","success":1},
                               {"industry":"Healthcare","success":0}])";
  std::string ndjson_text =
      "{\"industry\":\"Fintech\",\"success\":1}\n{\"industry\":\"Healthcare\",\"success\":0}\n";
  LabeledDataset a = parse_dataset(array_text);
  LabeledDataset b = parse_dataset(ndjson_text);
  CHECK(a == b);
  CHECK(a.size() == 2);
  CHECK(a.labels == std::vector<uint8_t>{1, 0});
}

TEST_CASE("labels accept bool or 0/1 and reject everything else") {
  CHECK(parse_dataset(R"([{"success":true},{"success":false}])").labels ==
        std::vector<uint8_t>{1, 0});
  CHECK_THROWS_AS(parse_dataset(R"([{"success":2}])"), DatasetError);
  CHECK_THROWS_AS(parse_dataset(R"([{"success":"yes"}])"), DatasetError);
  CHECK_THROWS_AS(parse_dataset(R"([{"industry":"Fintech"}])"), DatasetError);
}

TEST_CASE("label errors name the offending record") {
  try {
    parse_dataset(R"([{"success":1},{"success":7}])");
    FAIL("expected DatasetError");
  } catch (const DatasetError& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("custom label key") {
  LabeledDataset ds = parse_dataset(R"([{"outcome":1}])", "outcome");
  CHECK(ds.labels == std::vector<uint8_t>{1});
}

TEST_CASE("serialize-parse round trip is lossless and deterministic") {
  LabeledDataset ds = generate_synthetic_dataset(50, 0.2, {}, 7);
  std::string text = serialize_dataset(ds);
  LabeledDataset back = parse_dataset(text);
  CHECK(back == ds);
  CHECK(serialize_dataset(back) == text);
}

TEST_CASE("base_rate recomputed from labels") {
  LabeledDataset ds;
  ds.records.resize(4);
  ds.labels = {1, 0, 0, 1};
  CHECK(ds.base_rate() == doctest::Approx(0.5));
  CHECK_THROWS_AS(LabeledDataset{}.base_rate(), DatasetError);
}

TEST_CASE("synthetic generator is deterministic per seed") {
  LabeledDataset a = generate_synthetic_dataset(200, 0.09, {}, 42);
  LabeledDataset b = generate_synthetic_dataset(200, 0.09, {}, 42);
  LabeledDataset c = generate_synthetic_dataset(200, 0.09, {}, 43);
  CHECK(a == b);
  CHECK(a.records != c.records);
}

TEST_CASE("synthetic base rate lands near the target") {
  LabeledDataset ds = generate_synthetic_dataset(5000, 0.09, {}, 11);
  CHECK(ds.base_rate() == doctest::Approx(0.09).epsilon(0.35));
}

TEST_CASE("planted rule overrides the matched success rate") {
  PlantedRule plant{"lambda founder: len(founder.get(\"acquisitions\", [])) > 0", 0.8};
  LabeledDataset ds = generate_synthetic_dataset(4000, 0.05, {plant}, 9);
  auto ast = dsl::parse_rule_expression(plant.source);
  size_t matched = 0, matched_success = 0, unmatched = 0, unmatched_success = 0;
  for (size_t i = 0; i < ds.size(); ++i) {
    if (dsl::evaluate(*ast, ds.records[i]).value) {
      ++matched;
      matched_success += ds.labels[i];
    } else {
      ++unmatched;
      unmatched_success += ds.labels[i];
    }
  }
  REQUIRE(matched > 100);
  double matched_rate = double(matched_success) / matched;
  double unmatched_rate = double(unmatched_success) / unmatched;
  CHECK(matched_rate > 0.7);
  CHECK(unmatched_rate < 0.1);
}

TEST_CASE("synthetic vocabulary stays schema-valid") {
  LabeledDataset ds = generate_synthetic_dataset(500, 0.09, {}, 3);
  for (const auto& r : ds.records) {
    CHECK(!r.industry.empty());
    for (const auto& j : r.jobs) {
      CHECK(!j.role.empty());
      CHECK(!j.company_size.empty());
    }
  }
}
