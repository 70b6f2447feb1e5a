#include "pdnet/errors.hpp"

namespace pdnet {

const char* category_name(ErrorCategory cat) {
  switch (cat) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::io: return "io";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::shape: return "shape";
  }
  return "unknown";
}

}  // namespace pdnet
