// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <optional>
#include <ostream>

#include "distilrobust/seed.hpp"

namespace distilrobust::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

// Value of DISTILROBUST_SEED, if set and parseable.
std::optional<Seed> env_seed();

// Entry point of the `distilrobust` tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace distilrobust::cli
