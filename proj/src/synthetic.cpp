// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "distilrobust/manifest.hpp"
#include "distilrobust/tensor_io.hpp"

namespace distilrobust::synthetic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

std::vector<audio::Waveform> speech_like(std::size_t count, Seed seed, int rate) {
  std::vector<audio::Waveform> out;
  for (std::size_t u = 0; u < count; ++u) {
    Rng rng = make_rng(derive_seed({seed, 0x5bee, u}));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>((1.2 + 0.8 * unit(rng)) * rate);
    const double f0 = 100.0 + 150.0 * unit(rng);
    const double vibrato = 2.0 + 4.0 * unit(rng);
    const double syllable_rate = 2.5 + 2.0 * unit(rng);
    const double phase = kTwoPi * unit(rng);
    const int harmonics = 3 + static_cast<int>(3 * unit(rng));
    Eigen::VectorXd x(n);
    double theta = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / rate;
      const double f = f0 * (1.0 + 0.03 * std::sin(kTwoPi * vibrato * t));
      theta += kTwoPi * f / rate;
      double s = 0.0;
      for (int h = 1; h <= harmonics; ++h) s += std::sin(h * theta) / h;
      const double env = 0.55 + 0.45 * std::sin(kTwoPi * syllable_rate * t + phase);
      x[i] = 0.25 * env * s;
    }
    out.emplace_back(std::move(x), rate);
  }
  return out;
}

std::vector<audio::Waveform> noises(std::size_t count, Seed seed, int rate) {
  std::vector<audio::Waveform> out;
  const auto n = static_cast<Eigen::Index>(3 * rate);
  for (std::size_t k = 0; k < count; ++k) {
    const Seed s = derive_seed({seed, 0x2015e, k});
    Eigen::VectorXd x;
    switch (k % 3) {
      case 0:
        x = audio::white_noise(n, s, false, rate).samples();
        break;
      case 1:
        x = audio::lowpass4(audio::white_noise(n, s, false, rate).samples(), 300.0, rate);
        break;
      default: {
        Rng rng = make_rng(s);
        std::normal_distribution<double> normal(0.0, 0.2);
        x.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          const double t = static_cast<double>(i) / rate;
          x[i] = std::sin(kTwoPi * 60.0 * t) + 0.5 * std::sin(kTwoPi * 180.0 * t) +
                 normal(rng);
        }
      }
    }
    x *= 0.3 / audio::rms(x);
    out.emplace_back(std::move(x), rate);
  }
  return out;
}

std::vector<audio::RoomImpulseResponse> rirs(std::size_t count, Seed seed, int rate) {
  static constexpr audio::RoomClass kClasses[] = {
      audio::RoomClass::kSmall, audio::RoomClass::kMedium, audio::RoomClass::kLarge};
  static constexpr double kRt60[] = {0.15, 0.35, 0.6};
  // Direct-to-reverberant energy ratio in dB; larger rooms, more tail.
  static constexpr double kDrrDb[] = {6.0, 2.0, -2.0};
  std::vector<audio::RoomImpulseResponse> out;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t c = k % 3;
    Rng rng = make_rng(derive_seed({seed, 0x4124, k}));
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(kRt60[c] * rate);
    const double decay = std::log(1000.0) / (kRt60[c] * rate);  // -60 dB at rt60
    Eigen::VectorXd taps = Eigen::VectorXd::Zero(n);
    const Eigen::Index onset = 1 + static_cast<Eigen::Index>(rate / 1000);
    taps[0] = 1.0;
    for (Eigen::Index i = onset; i < n; ++i)
      taps[i] = normal(rng) * std::exp(-decay * static_cast<double>(i));
    const double tail_energy = taps.tail(n - onset).squaredNorm();
    taps.tail(n - onset) *= std::sqrt(std::pow(10.0, -kDrrDb[c] / 10.0) / tail_energy);
    out.emplace_back(std::move(taps), rate, kClasses[c]);
  }
  return out;
}

augment::Banks banks(std::size_t n_noises, std::size_t n_rirs, Seed seed, int rate) {
  return {noises(n_noises, derive_seed({seed, 1}), rate),
          rirs(n_rirs, derive_seed({seed, 2}), rate)};
}

Corpus training_corpus(Seed data_seed) {
  Corpus c;
  const auto speech = speech_like(20, derive_seed({data_seed, 0x5}));
  for (std::size_t i = 0; i < speech.size(); ++i)
    c.speech.push_back({"synthetic" + std::to_string(i), speech[i]});
  c.banks = banks(4, 3, derive_seed({data_seed, 0x6}));
  return c;
}

FixtureSet write_fixtures(const std::filesystem::path& dir, std::size_t n_speech,
                          std::size_t n_noise, std::size_t n_rir, Seed seed) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "speech");
  fs::create_directories(dir / "noise");
  fs::create_directories(dir / "rir");

  auto name = [](const char* stem, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%03zu", stem, i);
    return std::string(buf);
  };

  std::vector<data::ManifestRecord> speech, noise, rir;
  auto utts = speech_like(n_speech, derive_seed({seed, 0}));
  for (std::size_t i = 0; i < utts.size(); ++i) {
    data::ManifestRecord r{name("utt", i), dir / "speech" / (name("utt", i) + ".wav"),
                           data::RecordKind::kSpeech, std::nullopt, utts[i].duration_s()};
    audio::write_wav(utts[i], r.path);
    speech.push_back(std::move(r));
  }
  const augment::Banks b = banks(n_noise, n_rir, seed);
  for (std::size_t i = 0; i < b.noises.size(); ++i) {
    data::ManifestRecord r{name("noise", i), dir / "noise" / (name("noise", i) + ".wav"),
                           data::RecordKind::kNoise, std::nullopt, b.noises[i].duration_s()};
    audio::write_wav(b.noises[i], r.path);
    noise.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < b.rirs.size(); ++i) {
    const auto& h = b.rirs[i];
    data::ManifestRecord r{name("rir", i), dir / "rir" / (name("rir", i) + ".wav"),
                           data::RecordKind::kRir, h.room_class(), std::nullopt};
    audio::write_wav(audio::Waveform(h.taps(), h.sample_rate_hz()), r.path);
    rir.push_back(std::move(r));
  }

  FixtureSet set{dir / "speech.jsonl", dir / "noise.jsonl", dir / "rir.jsonl"};
  io::write_file(set.speech_manifest, data::to_jsonl(speech, dir));
  io::write_file(set.noise_manifest, data::to_jsonl(noise, dir));
  io::write_file(set.rir_manifest, data::to_jsonl(rir, dir));
  return set;
}

}  // namespace distilrobust::synthetic
