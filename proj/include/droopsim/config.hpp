#pragma once

#include <map>
#include <string>
#include <vector>

#include "droopsim/types.hpp"

namespace droopsim::config {

/// One parsed scalar or (possibly nested) one-line array.
struct Value {
  enum class Kind { kNumber, kString, kBool, kArray };
  Kind kind = Kind::kNumber;
  double num = 0.0;
  std::string str;
  bool boolean = false;
  std::vector<Value> array;
  int line = -1;  // source line, for error messages

  double as_number() const;
  int as_int() const;  // as_number, but must be integral
  bool as_bool() const;
  const std::string& as_string() const;
  const std::vector<Value>& as_array() const;
};

/// A section ([name]), a table-array element ([[name]]), or the file root.
struct Table {
  std::map<std::string, Value> values;
  std::map<std::string, Table> subtables;
  std::map<std::string, std::vector<Table>> table_arrays;
  int line = 0;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  const Value& at(const std::string& key) const;  // throws ConfigError
  double number(const std::string& key) const { return at(key).as_number(); }
  double number_or(const std::string& key, double fallback) const;
  int int_or(const std::string& key, int fallback) const;
  bool bool_or(const std::string& key, bool fallback) const;
  std::string string_or(const std::string& key,
                        const std::string& fallback) const;

  bool has_sub(const std::string& name) const {
    return subtables.count(name) != 0;
  }
  const Table& sub(const std::string& name) const;  // throws ConfigError
};

/// Parses the supported configuration-file subset: `key = value` pairs,
/// `[section]` / `[section.nested]` headers, `[[table.array]]` headers,
/// `#` comments, quoted strings, booleans, numbers, and one-line
/// (possibly nested) arrays. Errors carry the source line.
Table parse_string(const std::string& text,
                   const std::string& origin = "<string>");
Table parse_file(const std::string& path);

}  // namespace droopsim::config
