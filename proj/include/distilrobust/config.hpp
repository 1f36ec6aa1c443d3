// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "distilrobust/augment.hpp"
#include "distilrobust/losses.hpp"
#include "distilrobust/model.hpp"
#include "distilrobust/ops.hpp"
#include "distilrobust/seed.hpp"

namespace distilrobust {

// A: augmentation only. B: + curriculum. C1/C2: + enhancement head with the
// waveform (lambda 10) or spectral-magnitude (lambda 1) L1 loss.
enum class Experiment { kA, kB, kC1, kC2 };

std::string_view to_string(Experiment e);
Experiment parse_experiment(std::string_view name);

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-6;
  double weight_decay = 0.01;
};

struct SeedConfig {
  Seed data = 0;     // batch order, crops, augmentation
  Seed teacher = 0;  // surrogate teacher weights
  Seed student = 0;  // prediction and enhancement heads
};

struct DataConfig {
  std::string speech_manifest;
  std::string noise_manifest;
  std::string rir_manifest;
};

// Reference-scale values: 200000 iterations, batch 24, warmup 14000.
inline constexpr std::int64_t kReferenceIterations = 200000;
inline constexpr std::int64_t kReferenceWarmup = 14000;
inline constexpr int kReferenceBatchSize = 24;

struct TrainConfig {
  Experiment experiment = Experiment::kC1;
  std::int64_t total_iterations = 2000;
  int batch_size = 4;
  double lr_peak = 2e-4;
  std::int64_t warmup_iterations = 140;
  double lambda = 10.0;
  losses::EnhancementLoss enhancement_loss = losses::EnhancementLoss::kL1Wav;
  bool augmentation = true;
  bool curriculum = true;
  std::vector<int> distill_layers{4, 8, 12};
  SeedConfig seeds;
  StftParams stft;
  model::ModelConfig model;
  AdamWConfig adamw;
  std::int64_t crop_samples = 16000;
  bool normalize_kd_by_frames = false;
  augment::CompositionOrder a4_order = augment::CompositionOrder::kNoiseThenReverb;
  bool narrowband_white_noise = true;
  bool parallel_augmentation = false;
  std::int64_t checkpoint_every = 500;
  // Neither is applied; kept so the config records the choice explicitly.
  std::optional<double> grad_clip;
  std::optional<double> dropout;
  DataConfig data;
};

// Warmup at the reference 14k/200k ratio.
std::int64_t default_warmup(std::int64_t total_iterations);

TrainConfig preset(Experiment e, std::int64_t total_iterations = 2000);

// Throws kValidation naming the offending field.
void validate(const TrainConfig& cfg);

std::string to_json(const TrainConfig& cfg);

// Fields absent (or null where nullable) take the experiment preset's value.
// `fallback_seed` fills seeds left null.
TrainConfig config_from_json(std::string_view json,
                             std::optional<Seed> fallback_seed = std::nullopt);

}  // namespace distilrobust
