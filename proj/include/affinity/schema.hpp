#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace affinity {

enum class AttributeKind { Continuous, Ordinal };

struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::Continuous;
  // Ordinal attributes map category labels to ordinal codes.
  std::map<std::string, double> encoding;
};

// Ordered attribute list shared by both genders. Couples files carry one
// `male_<name>` and one `female_<name>` column per attribute.
struct AttributeSchema {
  std::vector<Attribute> attributes;

  long size() const { return static_cast<long>(attributes.size()); }
  std::vector<std::string> names() const;
  long index_of(const std::string& name) const;  // -1 when absent

  // Throws ValidationError on duplicate names or empty ordinal encodings.
  void validate() const;

  static AttributeSchema from_json_file(const std::string& path);
  static AttributeSchema from_json_text(const std::string& text);
  // All columns continuous; used when no schema file is supplied.
  static AttributeSchema continuous(const std::vector<std::string>& names);
  std::string to_json_text() const;
};

}  // namespace affinity
