// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "distilrobust/model.hpp"
#include "distilrobust/ops.hpp"
#include "distilrobust/tensor.hpp"

namespace distilrobust::losses {

struct KdOptions {
  // Divide by the frame count T. Off by default: the objective sums over
  // frames and layers.
  bool normalize_by_frames = false;
};

struct KdLoss {
  Tensor total;
  double l1 = 0.0;   // sum over (l, t) of |h - h_hat|_1 / D
  double cos = 0.0;  // sum over (l, t) of -log sigmoid(cos(h, h_hat))
};

// Layer-wise distillation loss
//   sum_l sum_t [ |h_t - h_hat_t|_1 / D - log sigmoid(cos(h_t, h_hat_t)) ].
KdLoss kd_loss(const model::FeatureMaps& teacher, const model::FeatureMaps& student,
               std::span<const int> layers, const KdOptions& options = {});

// Mean absolute sample difference.
Tensor l1_wav(const Tensor& enhanced, const Tensor& clean);

// Mean absolute difference of STFT magnitudes.
Tensor l1_freq(const Tensor& enhanced, const Tensor& clean, const StftParams& stft = {});

enum class EnhancementLoss { kNone, kL1Wav, kL1Freq };

std::string_view to_string(EnhancementLoss loss);
EnhancementLoss parse_enhancement_loss(std::string_view name);

// Lambda used with each enhancement loss unless configured otherwise.
double default_lambda(EnhancementLoss loss);

struct LossBreakdown {
  double kd_total = 0.0;
  double kd_l1 = 0.0;
  double kd_cos = 0.0;
  std::optional<double> enh;
  double combined = 0.0;
  double lambda = 0.0;
};

struct CombinedLoss {
  Tensor total;
  LossBreakdown breakdown;
};

// kd + lambda * enh; kd alone when enh is absent.
CombinedLoss combined_loss(const KdLoss& kd, const std::optional<Tensor>& enh,
                           double lambda);

}  // namespace distilrobust::losses
