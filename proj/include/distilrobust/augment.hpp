// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "distilrobust/audio.hpp"
#include "distilrobust/seed.hpp"

namespace distilrobust::augment {

enum class Action { kClean, kNoise, kReverb, kNoiseReverb };

inline constexpr int kNumActions = 4;

std::string_view to_string(Action a);  // "a1".."a4"
Action parse_action(std::string_view name);
inline int index_of(Action a) { return static_cast<int>(a); }
inline bool adds_noise(Action a) {
  return a == Action::kNoise || a == Action::kNoiseReverb;
}
inline bool may_reverb(Action a) {
  return a == Action::kReverb || a == Action::kNoiseReverb;
}

// Where the additive noise of a noisy plan comes from.
struct NoiseSource {
  std::optional<std::size_t> file_index;  // nullopt means white noise

  bool is_white() const { return !file_index.has_value(); }
  bool operator==(const NoiseSource&) const = default;
};

enum class CompositionOrder { kNoiseThenReverb, kReverbThenNoise };

struct AugmentPlan {
  Action action = Action::kClean;
  std::optional<int> snr_db;
  std::optional<NoiseSource> noise_source;
  std::optional<std::size_t> rir_index;
  bool reverb_applied = false;
  Seed seed = 0;

  bool operator==(const AugmentPlan&) const = default;
};

// Throws kContract if the plan's fields are mutually inconsistent.
void validate(const AugmentPlan& plan);

// Progress through training; `iteration` counts completed steps.
struct CurriculumState {
  std::int64_t iteration = 0;
  std::int64_t total_iterations = 1;

  CurriculumState(std::int64_t it, std::int64_t total);

  // Past the halfway mark: tau = 0, t = 1, i.e. plain augmentation.
  static CurriculumState disabled(std::int64_t total) { return {total, total}; }
};

// SNR lower bound: 20 (1 - 2 it / N) up to N/2, then 0.
double snr_lower_bound(const CurriculumState& state);

// Probability threshold for reverberation: 2 it / N up to N/2, then 1.
double reverb_threshold(const CurriculumState& state);

inline constexpr int kMaxSnrDb = 20;
inline constexpr double kFileNoiseProbability = 0.7;

AugmentPlan sample_plan(const CurriculumState& state, std::size_t n_noise_files,
                        std::size_t n_rirs, Seed seed);

struct Banks {
  std::vector<audio::Waveform> noises;
  std::vector<audio::RoomImpulseResponse> rirs;
};

struct ApplyOptions {
  CompositionOrder order = CompositionOrder::kNoiseThenReverb;
  bool narrowband_white_noise = true;
};

audio::Waveform apply_plan(const audio::Waveform& clean,
                           const AugmentPlan& plan, const Banks& banks,
                           const ApplyOptions& options = {});

// Seeds consumed by apply_plan, derived from plan.seed.
Seed mixing_seed(const AugmentPlan& plan);
Seed white_noise_seed(const AugmentPlan& plan);

Seed utterance_seed(Seed master_seed, std::int64_t iteration,
                    std::size_t index);

struct Augmented {
  audio::Waveform waveform;
  AugmentPlan plan;
};

std::vector<Augmented> augment_batch(const std::vector<audio::Waveform>& batch,
                                     const CurriculumState& state,
                                     const Banks& banks, Seed master_seed,
                                     const ApplyOptions& options = {},
                                     bool parallel = false);

}  // namespace distilrobust::augment
