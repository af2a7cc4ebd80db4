#include "affinity/schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "affinity/errors.hpp"

namespace affinity {

std::vector<std::string> AttributeSchema::names() const {
  std::vector<std::string> out;
  out.reserve(attributes.size());
  for (const auto& a : attributes) out.push_back(a.name);
  return out;
}

long AttributeSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i].name == name) return static_cast<long>(i);
  return -1;
}

void AttributeSchema::validate() const {
  if (attributes.empty()) throw ValidationError("schema lists no attributes");
  std::set<std::string> seen;
  for (const auto& a : attributes) {
    if (a.name.empty()) throw ValidationError("schema has an attribute with an empty name");
    if (!seen.insert(a.name).second)
      throw ValidationError("schema has duplicate attribute name: " + a.name);
    if (a.kind == AttributeKind::Ordinal && a.encoding.empty())
      throw ValidationError("ordinal attribute '" + a.name + "' has an empty encoding");
  }
}

AttributeSchema AttributeSchema::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("schema is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("attributes") || !j["attributes"].is_array())
    throw ValidationError("schema must be a JSON object with an 'attributes' array");
  AttributeSchema schema;
  for (const auto& item : j["attributes"]) {
    Attribute a;
    if (!item.contains("name")) throw ValidationError("schema attribute missing 'name'");
    a.name = item["name"].get<std::string>();
    const std::string kind = item.value("kind", std::string("continuous"));
    if (kind == "continuous") {
      a.kind = AttributeKind::Continuous;
    } else if (kind == "ordinal") {
      a.kind = AttributeKind::Ordinal;
    } else {
      throw ValidationError("schema attribute '" + a.name + "' has unknown kind: " + kind);
    }
    if (item.contains("encoding")) {
      for (auto it = item["encoding"].begin(); it != item["encoding"].end(); ++it)
        a.encoding[it.key()] = it.value().get<double>();
    }
    for (auto it = item.begin(); it != item.end(); ++it) {
      const std::string& k = it.key();
      if (k != "name" && k != "kind" && k != "encoding")
        throw ValidationError("schema attribute '" + a.name + "' has unknown key: " + k);
    }
    schema.attributes.push_back(std::move(a));
  }
  schema.validate();
  return schema;
}

AttributeSchema AttributeSchema::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open schema file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

AttributeSchema AttributeSchema::continuous(const std::vector<std::string>& names) {
  AttributeSchema schema;
  for (const auto& n : names) schema.attributes.push_back({n, AttributeKind::Continuous, {}});
  schema.validate();
  return schema;
}

std::string AttributeSchema::to_json_text() const {
  nlohmann::json j;
  j["attributes"] = nlohmann::json::array();
  for (const auto& a : attributes) {
    nlohmann::json item;
    item["name"] = a.name;
    item["kind"] = a.kind == AttributeKind::Continuous ? "continuous" : "ordinal";
    if (!a.encoding.empty()) {
      nlohmann::json enc;
      for (const auto& [label, code] : a.encoding) enc[label] = code;
      item["encoding"] = enc;
    }
    j["attributes"].push_back(item);
  }
  return j.dump(2) + "\n";
}

}  // namespace affinity
