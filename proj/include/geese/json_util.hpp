#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace geese::json_util {

// Maps JSON pointers ("/cloudlets/3/batch_latency_s") to the source line
// where that member starts, so diagnostics can name a line after the
// document has been parsed into a DOM.
class LineIndex {
 public:
  LineIndex() = default;
  explicit LineIndex(std::string_view text);

  // Line of the pointer, or of its nearest indexed ancestor; 0 if unknown.
  int line_of(std::string_view pointer) const;
  int line_at_offset(std::size_t offset) const;

 private:
  std::map<std::string, int, std::less<>> lines_;
  std::string text_;
};

// Parses text, converting nlohmann parse errors into geese::ParseError
// with a line number.
nlohmann::json parse(std::string_view text, std::string_view what);

std::string pointer_append(std::string_view base, std::string_view key);
std::string pointer_append(std::string_view base, std::size_t index);

// Typed, path-aware access to one JSON object. Every failure throws
// ParseError naming the full field path and its source line.
class FieldReader {
 public:
  FieldReader(const nlohmann::json& node, std::string path, const LineIndex* index);

  bool has(std::string_view key) const;
  double number(std::string_view key) const;
  double number_or(std::string_view key, double fallback) const;
  std::optional<double> optional_number(std::string_view key) const;
  long long integer(std::string_view key) const;
  long long integer_or(std::string_view key, long long fallback) const;
  std::string text(std::string_view key) const;
  std::string text_or(std::string_view key, std::string fallback) const;
  bool boolean_or(std::string_view key, bool fallback) const;

  const nlohmann::json& array(std::string_view key) const;
  FieldReader object(std::string_view key) const;
  FieldReader element(std::string_view key, std::size_t i) const;

  const nlohmann::json& node() const { return node_; }
  const std::string& path() const { return path_; }
  const LineIndex* index() const { return index_; }
  std::string path_of(std::string_view key) const { return pointer_append(path_, key); }

  [[noreturn]] void fail(std::string_view key, const std::string& message) const;
  [[noreturn]] void fail_here(const std::string& message) const;

 private:
  const nlohmann::json& get(std::string_view key) const;

  const nlohmann::json& node_;
  std::string path_;
  const LineIndex* index_;
};

// Reads a number from a non-object node (array element, pair member).
double as_number(const nlohmann::json& node, const std::string& path, const LineIndex* index);

}  // namespace geese::json_util
