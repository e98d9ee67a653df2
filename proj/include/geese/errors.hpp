#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace geese {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed document: bad JSON or a field of the wrong shape.
class ParseError : public Error {
 public:
  ParseError(std::string field, int line, const std::string& message)
      : Error(format(field, line, message)), field_(std::move(field)), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& field, int line, const std::string& message) {
    std::string out = "parse error";
    if (line > 0) out += " at line " + std::to_string(line);
    if (!field.empty()) out += " (field '" + field + "')";
    return out + ": " + message;
  }

  std::string field_;
  int line_;
};

// Well-formed document whose content breaks one or more invariants.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> failures)
      : Error(format(failures)), failures_(std::move(failures)) {}

  const std::vector<std::string>& failures() const noexcept { return failures_; }

 private:
  static std::string format(const std::vector<std::string>& failures) {
    std::string out = "validation failed:";
    for (const auto& f : failures) out += "\n  - " + f;
    return out;
  }

  std::vector<std::string> failures_;
};

// Model evaluated outside its calibrated domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Cloudlet too heavy for the UAV it was paired with.
class InfeasiblePairingError : public Error {
 public:
  using Error::Error;
};

// A plan or run references ids the catalog does not know.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class SearchSpaceTooLarge : public Error {
 public:
  SearchSpaceTooLarge(double estimate, double limit)
      : Error("oracle search space too large: ~" + std::to_string(static_cast<long double>(estimate)) +
              " candidate vectors (limit " + std::to_string(static_cast<long double>(limit)) + ")"),
        estimate_(estimate) {}

  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace geese
