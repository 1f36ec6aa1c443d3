// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "distilrobust/tensor.hpp"

namespace distilrobust {

// A named finite-difference check over fixed, seeded inputs.
struct GradcheckCase {
  std::string name;
  std::function<GradcheckReport(const GradcheckOptions&)> run;
};

// Every differentiable op, the loss functions, and the student with its
// enhancement head.
const std::vector<GradcheckCase>& gradcheck_cases();

// nullptr when unknown.
const GradcheckCase* find_gradcheck_case(std::string_view name);

}  // namespace distilrobust
