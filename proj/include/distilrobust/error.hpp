// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace distilrobust {

enum class ErrorKind {
  kFormat,
  kUnsupportedFormat,
  kIo,
  kDegenerateSignal,
  kRate,
  kShape,
  kParameter,
  kContract,
  kConfig,
  kLength,
  kLookup,
  kNumeric,
  kValidation,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace distilrobust
