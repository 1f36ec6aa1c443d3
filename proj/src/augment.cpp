// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/augment.hpp"

#include <cmath>
#include <future>
#include <string>

#include "distilrobust/error.hpp"

namespace distilrobust::augment {

std::string_view to_string(Action a) {
  switch (a) {
    case Action::kClean: return "a1";
    case Action::kNoise: return "a2";
    case Action::kReverb: return "a3";
    case Action::kNoiseReverb: return "a4";
  }
  return "?";
}

Action parse_action(std::string_view name) {
  if (name == "a1") return Action::kClean;
  if (name == "a2") return Action::kNoise;
  if (name == "a3") return Action::kReverb;
  if (name == "a4") return Action::kNoiseReverb;
  fail(ErrorKind::kValidation, "unknown action '" + std::string(name) + "'");
}

void validate(const AugmentPlan& plan) {
  if (plan.snr_db.has_value() != adds_noise(plan.action))
    fail(ErrorKind::kContract, "snr_db must be present iff the action adds noise");
  if (plan.noise_source.has_value() != adds_noise(plan.action))
    fail(ErrorKind::kContract,
         "noise_source must be present iff the action adds noise");
  if (plan.reverb_applied && !may_reverb(plan.action))
    fail(ErrorKind::kContract, "reverb applied under a non-reverb action");
  if (plan.rir_index.has_value() != plan.reverb_applied)
    fail(ErrorKind::kContract, "rir_index must be present iff reverb applied");
  if (plan.snr_db && (*plan.snr_db < 0 || *plan.snr_db > kMaxSnrDb))
    fail(ErrorKind::kContract, "snr_db outside [0, 20]");
}

CurriculumState::CurriculumState(std::int64_t it, std::int64_t total)
    : iteration(it), total_iterations(total) {
  if (total <= 0) fail(ErrorKind::kParameter, "total_iterations must be positive");
  if (it < 0 || it > total)
    fail(ErrorKind::kParameter, "iteration outside [0, total_iterations]");
}

// it <= N/2 is tested as 2 it <= N to stay exact for odd N.
double snr_lower_bound(const CurriculumState& s) {
  const auto n = s.total_iterations;
  if (2 * s.iteration > n) return 0.0;
  return 20.0 * (1.0 - 2.0 * static_cast<double>(s.iteration) /
                           static_cast<double>(n));
}

double reverb_threshold(const CurriculumState& s) {
  const auto n = s.total_iterations;
  if (2 * s.iteration > n) return 1.0;
  return 2.0 * static_cast<double>(s.iteration) / static_cast<double>(n);
}

AugmentPlan sample_plan(const CurriculumState& state, std::size_t n_noise_files,
                        std::size_t n_rirs, Seed seed) {
  if (n_noise_files == 0) fail(ErrorKind::kParameter, "empty noise bank");
  if (n_rirs == 0) fail(ErrorKind::kParameter, "empty impulse-response bank");

  Rng rng = make_rng(seed);
  std::uniform_int_distribution<int> pick_action(0, kNumActions - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  AugmentPlan plan;
  plan.seed = seed;
  plan.action = static_cast<Action>(pick_action(rng));

  if (adds_noise(plan.action)) {
    const int lo = static_cast<int>(std::ceil(snr_lower_bound(state)));
    std::uniform_int_distribution<int> pick_snr(lo, kMaxSnrDb);
    plan.snr_db = pick_snr(rng);
    const double p_n = unit(rng);
    NoiseSource src;
    if (p_n <= kFileNoiseProbability) {
      std::uniform_int_distribution<std::size_t> pick(0, n_noise_files - 1);
      src.file_index = pick(rng);
    }
    plan.noise_source = src;
  }
  if (may_reverb(plan.action)) {
    const double p_r = unit(rng);
    if (p_r <= reverb_threshold(state)) {
      std::uniform_int_distribution<std::size_t> pick(0, n_rirs - 1);
      plan.reverb_applied = true;
      plan.rir_index = pick(rng);
    }
  }
  return plan;
}

Seed mixing_seed(const AugmentPlan& plan) { return derive_seed({plan.seed, 1}); }
Seed white_noise_seed(const AugmentPlan& plan) {
  return derive_seed({plan.seed, 2});
}

namespace {

audio::Waveform add_noise(const audio::Waveform& x, const AugmentPlan& plan,
                          const Banks& banks, const ApplyOptions& options) {
  const NoiseSource& src = *plan.noise_source;
  if (src.is_white()) {
    audio::Waveform noise =
        audio::white_noise(x.size(), white_noise_seed(plan),
                           options.narrowband_white_noise, x.sample_rate_hz());
    return audio::mix_at_snr(x, noise, *plan.snr_db, mixing_seed(plan));
  }
  if (*src.file_index >= banks.noises.size())
    fail(ErrorKind::kLookup, "noise index " + std::to_string(*src.file_index) +
                                 " outside bank of " +
                                 std::to_string(banks.noises.size()));
  return audio::mix_at_snr(x, banks.noises[*src.file_index], *plan.snr_db,
                           mixing_seed(plan));
}

audio::Waveform add_reverb(const audio::Waveform& x, const AugmentPlan& plan,
                           const Banks& banks) {
  if (!plan.reverb_applied) return x;
  if (*plan.rir_index >= banks.rirs.size())
    fail(ErrorKind::kLookup, "impulse-response index " +
                                 std::to_string(*plan.rir_index) +
                                 " outside bank of " +
                                 std::to_string(banks.rirs.size()));
  return audio::convolve_rir(x, banks.rirs[*plan.rir_index]);
}

}  // namespace

audio::Waveform apply_plan(const audio::Waveform& clean,
                           const AugmentPlan& plan, const Banks& banks,
                           const ApplyOptions& options) {
  validate(plan);
  switch (plan.action) {
    case Action::kClean:
      return clean;
    case Action::kNoise:
      return add_noise(clean, plan, banks, options);
    case Action::kReverb:
      return add_reverb(clean, plan, banks);
    case Action::kNoiseReverb:
      if (options.order == CompositionOrder::kNoiseThenReverb)
        return add_reverb(add_noise(clean, plan, banks, options), plan, banks);
      return add_noise(add_reverb(clean, plan, banks), plan, banks, options);
  }
  return clean;
}

Seed utterance_seed(Seed master_seed, std::int64_t iteration,
                    std::size_t index) {
  return derive_seed({master_seed, static_cast<std::uint64_t>(iteration),
                      static_cast<std::uint64_t>(index)});
}

std::vector<Augmented> augment_batch(const std::vector<audio::Waveform>& batch,
                                     const CurriculumState& state,
                                     const Banks& banks, Seed master_seed,
                                     const ApplyOptions& options,
                                     bool parallel) {
  if (batch.empty()) fail(ErrorKind::kLength, "empty batch");
  auto one = [&](std::size_t i) {
    AugmentPlan plan =
        sample_plan(state, banks.noises.size(), banks.rirs.size(),
                    utterance_seed(master_seed, state.iteration, i));
    return Augmented{apply_plan(batch[i], plan, banks, options), plan};
  };

  std::vector<Augmented> out;
  out.reserve(batch.size());
  if (!parallel) {
    for (std::size_t i = 0; i < batch.size(); ++i) out.push_back(one(i));
    return out;
  }
  std::vector<std::future<Augmented>> jobs;
  jobs.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i)
    jobs.push_back(std::async(std::launch::async, one, i));
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

}  // namespace distilrobust::augment
