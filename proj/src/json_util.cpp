#include "geese/json_util.hpp"

#include <algorithm>
#include <cctype>

#include "geese/errors.hpp"

namespace geese::json_util {

namespace {

// Recursive walk over text that nlohmann has already accepted; it only
// tracks positions and never reports errors of its own.
class Scanner {
 public:
  Scanner(std::string_view text, std::map<std::string, int, std::less<>>& out) : text_(text), out_(out) {}

  void run() {
    skip_ws();
    if (pos_ < text_.size()) value("");
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  std::string read_string() {
    std::string s;
    ++pos_;  // opening quote
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
        char esc = text_[pos_ + 1];
        switch (esc) {
          case 'n': s += '\n'; break;
          case 't': s += '\t'; break;
          case '"': s += '"'; break;
          case '\\': s += '\\'; break;
          case '/': s += '/'; break;
          default: s += esc; break;
        }
        pos_ += 2;
        continue;
      }
      s += text_[pos_++];
    }
    ++pos_;  // closing quote
    return s;
  }

  void value(const std::string& path) {
    skip_ws();
    out_.emplace(path, line_);
    if (pos_ >= text_.size()) return;
    char c = text_[pos_];
    if (c == '{') {
      object(path);
    } else if (c == '[') {
      array(path);
    } else if (c == '"') {
      read_string();
    } else {
      while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '}' && text_[pos_] != ']' &&
             !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
    }
  }

  void object(const std::string& path) {
    ++pos_;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '}') {
      ++pos_;
      return;
    }
    while (pos_ < text_.size()) {
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != '"') return;
      int key_line = line_;
      std::string child = pointer_append(path, read_string());
      out_.emplace(child, key_line);
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ':') ++pos_;
      value(child);
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (pos_ < text_.size() && text_[pos_] == '}') ++pos_;
      return;
    }
  }

  void array(const std::string& path) {
    ++pos_;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ']') {
      ++pos_;
      return;
    }
    for (std::size_t i = 0; pos_ < text_.size(); ++i) {
      value(pointer_append(path, i));
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (pos_ < text_.size() && text_[pos_] == ']') ++pos_;
      return;
    }
  }

  std::string_view text_;
  std::map<std::string, int, std::less<>>& out_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

std::string type_name(const nlohmann::json& j) { return j.type_name(); }

}  // namespace

LineIndex::LineIndex(std::string_view text) : text_(text) { Scanner(text_, lines_).run(); }

int LineIndex::line_of(std::string_view pointer) const {
  std::string p(pointer);
  while (true) {
    if (auto it = lines_.find(p); it != lines_.end()) return it->second;
    if (p.empty()) return 0;
    auto slash = p.rfind('/');
    p = slash == std::string::npos ? std::string{} : p.substr(0, slash);
  }
}

int LineIndex::line_at_offset(std::size_t offset) const {
  offset = std::min(offset, text_.size());
  return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

nlohmann::json parse(std::string_view text, std::string_view what) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    int line = 1 + static_cast<int>(std::count(text.begin(),
                                               text.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(
                                                                  e.byte > 0 ? e.byte - 1 : 0, text.size())),
                                               '\n'));
    throw ParseError(std::string(what), line, e.what());
  }
}

std::string pointer_append(std::string_view base, std::string_view key) {
  std::string out(base);
  out += '/';
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

std::string pointer_append(std::string_view base, std::size_t index) {
  return std::string(base) + "/" + std::to_string(index);
}

FieldReader::FieldReader(const nlohmann::json& node, std::string path, const LineIndex* index)
    : node_(node), path_(std::move(path)), index_(index) {
  if (!node_.is_object()) fail_here("expected an object, found " + type_name(node_));
}

void FieldReader::fail(std::string_view key, const std::string& message) const {
  std::string p = path_of(key);
  throw ParseError(p, index_ ? index_->line_of(p) : 0, message);
}

void FieldReader::fail_here(const std::string& message) const {
  throw ParseError(path_.empty() ? "/" : path_, index_ ? index_->line_of(path_) : 0, message);
}

bool FieldReader::has(std::string_view key) const {
  auto it = node_.find(key);
  return it != node_.end() && !it->is_null();
}

const nlohmann::json& FieldReader::get(std::string_view key) const {
  auto it = node_.find(key);
  if (it == node_.end() || it->is_null()) fail(key, "required field is missing");
  return *it;
}

double FieldReader::number(std::string_view key) const {
  const auto& v = get(key);
  if (!v.is_number()) fail(key, "expected a number, found " + type_name(v));
  return v.get<double>();
}

double FieldReader::number_or(std::string_view key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::optional<double> FieldReader::optional_number(std::string_view key) const {
  if (!has(key)) return std::nullopt;
  return number(key);
}

long long FieldReader::integer(std::string_view key) const {
  const auto& v = get(key);
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (d == static_cast<double>(static_cast<long long>(d))) return static_cast<long long>(d);
  }
  fail(key, "expected an integer, found " + (v.is_number() ? std::string("a fractional number") : type_name(v)));
}

long long FieldReader::integer_or(std::string_view key, long long fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::string FieldReader::text(std::string_view key) const {
  const auto& v = get(key);
  if (!v.is_string()) fail(key, "expected a string, found " + type_name(v));
  return v.get<std::string>();
}

std::string FieldReader::text_or(std::string_view key, std::string fallback) const {
  return has(key) ? text(key) : fallback;
}

bool FieldReader::boolean_or(std::string_view key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& v = get(key);
  if (!v.is_boolean()) fail(key, "expected a boolean, found " + type_name(v));
  return v.get<bool>();
}

const nlohmann::json& FieldReader::array(std::string_view key) const {
  const auto& v = get(key);
  if (!v.is_array()) fail(key, "expected an array, found " + type_name(v));
  return v;
}

FieldReader FieldReader::object(std::string_view key) const {
  return FieldReader(get(key), path_of(key), index_);
}

FieldReader FieldReader::element(std::string_view key, std::size_t i) const {
  return FieldReader(array(key).at(i), pointer_append(path_of(key), i), index_);
}

double as_number(const nlohmann::json& node, const std::string& path, const LineIndex* index) {
  if (!node.is_number()) {
    throw ParseError(path, index ? index->line_of(path) : 0, "expected a number, found " + type_name(node));
  }
  return node.get<double>();
}

}  // namespace geese::json_util
