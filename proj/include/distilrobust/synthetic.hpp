// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <vector>

#include "distilrobust/audio.hpp"
#include "distilrobust/augment.hpp"
#include "distilrobust/manifest.hpp"
#include "distilrobust/seed.hpp"

namespace distilrobust::synthetic {

// Harmonic sine mixtures with a slow amplitude envelope, 1.2 to 2.0 s long.
std::vector<audio::Waveform> speech_like(std::size_t count, Seed seed,
                                         int sample_rate_hz = audio::kDefaultSampleRate);

// Broadband, low-frequency rumble and hum-like noises, 3 s each.
std::vector<audio::Waveform> noises(std::size_t count, Seed seed,
                                    int sample_rate_hz = audio::kDefaultSampleRate);

// Direct path plus exponentially decaying Gaussian tail. Decay time grows and
// the direct-to-reverberant ratio (6, 2, -2 dB) falls with room class,
// cycling small, medium, large.
std::vector<audio::RoomImpulseResponse> rirs(std::size_t count, Seed seed,
                                             int sample_rate_hz = audio::kDefaultSampleRate);

augment::Banks banks(std::size_t n_noises, std::size_t n_rirs, Seed seed,
                     int sample_rate_hz = audio::kDefaultSampleRate);

struct Corpus {
  std::vector<data::Utterance> speech;
  augment::Banks banks;
};

// The corpus used when a training config names no data: 20 utterances,
// 4 noises, 3 RIRs, all derived from the data seed.
Corpus training_corpus(Seed data_seed);

struct FixtureSet {
  std::filesystem::path speech_manifest;
  std::filesystem::path noise_manifest;
  std::filesystem::path rir_manifest;
};

// Writes WAVs plus speech.jsonl, noise.jsonl and rir.jsonl under `dir`.
FixtureSet write_fixtures(const std::filesystem::path& dir, std::size_t n_speech,
                          std::size_t n_noise, std::size_t n_rir, Seed seed);

}  // namespace distilrobust::synthetic
