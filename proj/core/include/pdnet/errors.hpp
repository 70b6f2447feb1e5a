#pragma once

#include <stdexcept>
#include <string>

namespace pdnet {

// Every failure the library raises carries one of these categories so that
// callers (the CLI in particular) can map it to a stable exit code without
// string-matching messages.
enum class ErrorCategory { config, io, numeric, shape };

const char* category_name(ErrorCategory cat);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory cat, const std::string& msg)
      : std::runtime_error(msg), cat_(cat) {}
  ErrorCategory category() const { return cat_; }

 private:
  ErrorCategory cat_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(ErrorCategory::config, msg) {}
};
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(ErrorCategory::io, msg) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& msg) : Error(ErrorCategory::numeric, msg) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& msg) : Error(ErrorCategory::shape, msg) {}
};

}  // namespace pdnet
