// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/error.hpp"

namespace distilrobust {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kUnsupportedFormat: return "unsupported format";
    case ErrorKind::kIo: return "I/O error";
    case ErrorKind::kDegenerateSignal: return "degenerate signal";
    case ErrorKind::kRate: return "sample-rate error";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kParameter: return "parameter error";
    case ErrorKind::kContract: return "contract error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kLength: return "length error";
    case ErrorKind::kLookup: return "lookup error";
    case ErrorKind::kNumeric: return "numeric error";
    case ErrorKind::kValidation: return "validation error";
  }
  return "error";
}

void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, std::string(to_string(kind)) + ": " + what);
}

}  // namespace distilrobust
