// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

#include "distilrobust/trainer.hpp"

namespace distilrobust::plot {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

// Maps data coordinates onto pixel coordinates; SVG y grows downward.
struct Axis {
  double lo = 0.0, hi = 1.0;
  double px_lo = 0.0, px_hi = 1.0;

  double map(double v) const;
};

struct Panel {
  std::string title;
  std::vector<Series> series;
  Axis x, y;
};

// Four stacked panels: loss, learning rate, SNR lower bound tau, reverb
// threshold t. Throws kValidation on an empty log.
std::vector<Panel> training_panels(const std::vector<train::MetricsRecord>& metrics);

std::string render_svg(const std::vector<Panel>& panels);

}  // namespace distilrobust::plot
