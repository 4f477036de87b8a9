#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace detox {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (lexicon lines, CSV, JSON documents, selectors).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A numeric value outside its permitted range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Invalid caller-supplied parameters (alpha <= 0, k == 0, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Rejected profile data; `fields` lists every offending field.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> fields)
      : Error(join(fields)), fields_(std::move(fields)) {}

  const std::vector<std::string>& fields() const noexcept { return fields_; }

 private:
  static std::string join(const std::vector<std::string>& fields) {
    std::string out = "invalid profile:";
    for (const auto& f : fields) {
      out += ' ';
      out += f;
      out += ';';
    }
    return out;
  }

  std::vector<std::string> fields_;
};

/// Optimistic-concurrency failure on profile writes.
class ConflictError : public Error {
 public:
  using Error::Error;
};

}  // namespace detox
