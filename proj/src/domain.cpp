#include "vcrules/domain.hpp"

#include <fstream>
#include <sstream>

namespace vcrules {

using nlohmann::ordered_json;

size_t LabeledDataset::success_count() const {
  size_t n = 0;
  for (uint8_t l : labels) n += l;
  return n;
}

double LabeledDataset::base_rate() const {
  if (records.empty()) throw DatasetError("base_rate: empty dataset");
  return static_cast<double>(success_count()) / static_cast<double>(records.size());
}

namespace {

std::string string_field(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return "";
  if (it->is_string()) return it->get<std::string>();
  return it->dump();
}

std::map<std::string, std::string> attributes_from_json(const ordered_json& j) {
  std::map<std::string, std::string> out;
  if (!j.is_object()) return out;
  for (const auto& [k, v] : j.items()) {
    out[k] = v.is_string() ? v.get<std::string>() : v.dump();
  }
  return out;
}

std::vector<ExitEvent> exits_from_json(const ordered_json& j, ExitKind kind) {
  std::vector<ExitEvent> out;
  if (!j.is_array()) return out;
  for (const auto& e : j) out.push_back(ExitEvent{kind, attributes_from_json(e)});
  return out;
}

ordered_json exits_to_json(const std::vector<ExitEvent>& exits) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : exits) {
    ordered_json o = ordered_json::object();
    for (const auto& [k, v] : e.attributes) o[k] = v;
    arr.push_back(std::move(o));
  }
  return arr;
}

bool is_known_key(const std::string& k) {
  return k == "industry" || k == "educations" || k == "jobs" || k == "ipos" ||
         k == "acquisitions";
}

}  // namespace

ordered_json record_to_json(const FounderRecord& r) {
  ordered_json j = ordered_json::object();
  j["industry"] = r.industry;
  ordered_json edus = ordered_json::array();
  for (const auto& e : r.educations) {
    edus.push_back({{"degree", e.degree}, {"field", e.field}, {"qs_ranking", e.qs_ranking}});
  }
  j["educations"] = std::move(edus);
  ordered_json jobs = ordered_json::array();
  for (const auto& w : r.jobs) {
    jobs.push_back({{"role", w.role},
                    {"company_size", w.company_size},
                    {"industry", w.industry},
                    {"duration", w.duration}});
  }
  j["jobs"] = std::move(jobs);
  j["ipos"] = exits_to_json(r.ipos);
  j["acquisitions"] = exits_to_json(r.acquisitions);
  for (const auto& [k, v] : r.extra.items()) j[k] = v;
  return j;
}

FounderRecord record_from_json(const ordered_json& j) {
  if (!j.is_object()) throw DatasetError("founder record is not an object");
  FounderRecord r;
  r.industry = string_field(j, "industry");
  if (auto it = j.find("educations"); it != j.end() && it->is_array()) {
    for (const auto& e : *it) {
      r.educations.push_back(EducationRecord{string_field(e, "degree"), string_field(e, "field"),
                                             string_field(e, "qs_ranking")});
    }
  }
  if (auto it = j.find("jobs"); it != j.end() && it->is_array()) {
    for (const auto& w : *it) {
      r.jobs.push_back(EmploymentRecord{string_field(w, "role"), string_field(w, "company_size"),
                                        string_field(w, "industry"), string_field(w, "duration")});
    }
  }
  if (auto it = j.find("ipos"); it != j.end()) r.ipos = exits_from_json(*it, ExitKind::ipo);
  if (auto it = j.find("acquisitions"); it != j.end())
    r.acquisitions = exits_from_json(*it, ExitKind::acquisition);
  r.extra = ordered_json::object();
  for (const auto& [k, v] : j.items()) {
    if (!is_known_key(k)) r.extra[k] = v;
  }
  return r;
}

namespace {

uint8_t label_from_json(const ordered_json& v, size_t index) {
  if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
  if (v.is_number_integer()) {
    auto n = v.get<int64_t>();
    if (n == 0 || n == 1) return static_cast<uint8_t>(n);
  }
  throw DatasetError("record " + std::to_string(index) +
                     ": label must be 0/1 or true/false, got " + v.dump());
}

LabeledDataset dataset_from_objects(const std::vector<ordered_json>& objects,
                                    const std::string& label_field) {
  if (objects.empty()) throw DatasetError("empty dataset");
  LabeledDataset ds;
  ds.records.reserve(objects.size());
  ds.labels.reserve(objects.size());
  for (size_t i = 0; i < objects.size(); ++i) {
    const auto& obj = objects[i];
    auto it = obj.is_object() ? obj.find(label_field) : obj.end();
    if (it == obj.end()) {
      throw DatasetError("record " + std::to_string(i) + ": missing label field '" + label_field +
                         "'");
    }
    ds.labels.push_back(label_from_json(*it, i));
    ordered_json stripped = obj;
    stripped.erase(label_field);
    ds.records.push_back(record_from_json(stripped));
  }
  return ds;
}

}  // namespace

LabeledDataset parse_dataset(const std::string& text, const std::string& label_field) {
  size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw DatasetError("empty dataset");
  std::vector<ordered_json> objects;
  if (text[first] == '[') {
    ordered_json root;
    try {
      root = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError(std::string("malformed dataset file: ") + e.what());
    }
    for (const auto& o : root) objects.push_back(o);
  } else {
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        objects.push_back(ordered_json::parse(line));
      } catch (const nlohmann::json::exception& e) {
        throw DatasetError("malformed dataset file at line " + std::to_string(line_no) + ": " +
                           e.what());
      }
    }
  }
  return dataset_from_objects(objects, label_field);
}

LabeledDataset load_dataset(const std::string& path, const std::string& label_field) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open dataset file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), label_field);
}

std::string serialize_dataset(const LabeledDataset& ds, const std::string& label_field) {
  ordered_json arr = ordered_json::array();
  for (size_t i = 0; i < ds.records.size(); ++i) {
    ordered_json o = record_to_json(ds.records[i]);
    o[label_field] = static_cast<int>(ds.labels[i]);
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

void save_dataset(const LabeledDataset& ds, const std::string& path,
                  const std::string& label_field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot write dataset file: " + path);
  out << serialize_dataset(ds, label_field);
}

}  // namespace vcrules
