#include "droopsim/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace droopsim::config {

namespace {

std::string kind_name(Value::Kind k) {
  switch (k) {
    case Value::Kind::kNumber: return "number";
    case Value::Kind::kString: return "string";
    case Value::Kind::kBool: return "boolean";
    case Value::Kind::kArray: return "array";
  }
  return "?";
}

[[noreturn]] void type_error(const Value& v, const char* wanted) {
  throw ConfigError(std::string("expected a ") + wanted + ", found a " +
                        kind_name(v.kind),
                    v.line);
}

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Cuts a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      return false;
  }
  return true;
}

std::vector<std::string> split_path(const std::string& path, int line) {
  std::vector<std::string> out;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    part = trim(part);
    if (!valid_key(part))
      throw ConfigError("bad section name '" + path + "'", line);
    out.push_back(part);
  }
  if (out.empty()) throw ConfigError("empty section name", line);
  return out;
}

// Recursive one-line value parser; `pos` advances past the parsed value.
Value parse_value(const std::string& s, std::size_t& pos, int line) {
  auto skip_ws = [&] {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
  };
  skip_ws();
  if (pos >= s.size()) throw ConfigError("missing value", line);

  Value v;
  v.line = line;
  const char c = s[pos];

  if (c == '"') {
    ++pos;
    std::string out;
    while (pos < s.size() && s[pos] != '"') out += s[pos++];
    if (pos >= s.size()) throw ConfigError("unterminated string", line);
    ++pos;  // closing quote
    v.kind = Value::Kind::kString;
    v.str = std::move(out);
    return v;
  }

  if (c == '[') {
    ++pos;
    v.kind = Value::Kind::kArray;
    skip_ws();
    if (pos < s.size() && s[pos] == ']') {
      ++pos;
      return v;
    }
    while (true) {
      v.array.push_back(parse_value(s, pos, line));
      skip_ws();
      if (pos < s.size() && s[pos] == ',') {
        ++pos;
        continue;
      }
      if (pos < s.size() && s[pos] == ']') {
        ++pos;
        return v;
      }
      throw ConfigError("expected ',' or ']' in array", line);
    }
  }

  // Bare word: boolean or number.
  std::size_t end = pos;
  while (end < s.size() && s[end] != ',' && s[end] != ']' &&
         !std::isspace(static_cast<unsigned char>(s[end])))
    ++end;
  const std::string word = s.substr(pos, end - pos);
  pos = end;
  if (word == "true" || word == "false") {
    v.kind = Value::Kind::kBool;
    v.boolean = (word == "true");
    return v;
  }
  char* parse_end = nullptr;
  const double num = std::strtod(word.c_str(), &parse_end);
  if (parse_end == word.c_str() || *parse_end != '\0' || !std::isfinite(num))
    throw ConfigError("cannot parse value '" + word + "'", line);
  v.kind = Value::Kind::kNumber;
  v.num = num;
  return v;
}

}  // namespace

double Value::as_number() const {
  if (kind != Kind::kNumber) type_error(*this, "number");
  return num;
}

int Value::as_int() const {
  const double x = as_number();
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-9)
    throw ConfigError("expected an integer, found " + std::to_string(x), line);
  return static_cast<int>(r);
}

bool Value::as_bool() const {
  if (kind != Kind::kBool) type_error(*this, "boolean");
  return boolean;
}

const std::string& Value::as_string() const {
  if (kind != Kind::kString) type_error(*this, "string");
  return str;
}

const std::vector<Value>& Value::as_array() const {
  if (kind != Kind::kArray) type_error(*this, "array");
  return array;
}

const Value& Table::at(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end())
    throw ConfigError("missing required key '" + key + "'", line);
  return it->second;
}

double Table::number_or(const std::string& key, double fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second.as_number();
}

int Table::int_or(const std::string& key, int fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second.as_int();
}

bool Table::bool_or(const std::string& key, bool fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second.as_bool();
}

std::string Table::string_or(const std::string& key,
                             const std::string& fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second.as_string();
}

const Table& Table::sub(const std::string& name) const {
  const auto it = subtables.find(name);
  if (it == subtables.end())
    throw ConfigError("missing required section [" + name + "]", line);
  return it->second;
}

Table parse_string(const std::string& text, const std::string& origin) {
  Table root;
  Table* current = &root;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;

  while (std::getline(in, raw)) {
    ++lineno;
    std::string lineText = trim(strip_comment(raw));
    if (lineText.empty()) continue;

    if (lineText.front() == '[') {
      const bool is_array = lineText.size() > 1 && lineText[1] == '[';
      const std::string closer = is_array ? "]]" : "]";
      const std::size_t open = is_array ? 2 : 1;
      const std::size_t close = lineText.find(closer, open);
      if (close == std::string::npos ||
          trim(lineText.substr(close + closer.size())) != "")
        throw ConfigError("malformed section header in " + origin, lineno);
      const auto path =
          split_path(lineText.substr(open, close - open), lineno);

      Table* node = &root;
      for (std::size_t d = 0; d + 1 < path.size(); ++d) {
        node = &node->subtables[path[d]];
        if (node->line == 0) node->line = lineno;
      }
      const std::string& leaf = path.back();
      if (is_array) {
        auto& vec = node->table_arrays[leaf];
        vec.emplace_back();
        vec.back().line = lineno;
        current = &vec.back();
      } else {
        if (node->values.count(leaf) || node->table_arrays.count(leaf))
          throw ConfigError("'" + leaf + "' already used in " + origin,
                            lineno);
        Table& sub = node->subtables[leaf];
        if (sub.line == 0) sub.line = lineno;
        current = &sub;
      }
      continue;
    }

    const std::size_t eq = lineText.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value' in " + origin, lineno);
    const std::string key = trim(lineText.substr(0, eq));
    if (!valid_key(key))
      throw ConfigError("bad key '" + key + "' in " + origin, lineno);
    if (current->values.count(key) || current->subtables.count(key) ||
        current->table_arrays.count(key))
      throw ConfigError("duplicate key '" + key + "' in " + origin, lineno);

    std::size_t pos = 0;
    const std::string rhs = trim(lineText.substr(eq + 1));
    Value v = parse_value(rhs, pos, lineno);
    while (pos < rhs.size() &&
           std::isspace(static_cast<unsigned char>(rhs[pos])))
      ++pos;
    if (pos != rhs.size())
      throw ConfigError("trailing characters after value", lineno);
    current->values.emplace(key, std::move(v));
  }
  return root;
}

Table parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

}  // namespace droopsim::config
