// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Core>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string_view>

#include "distilrobust/seed.hpp"

namespace distilrobust::audio {

inline constexpr int kDefaultSampleRate = 16000;

// Mono PCM audio. Samples are nominally in [-1, 1] but mixtures may exceed
// that range; only write_wav clamps.
class Waveform {
 public:
  Waveform(Eigen::VectorXd samples, int sample_rate_hz = kDefaultSampleRate);

  const Eigen::VectorXd& samples() const { return samples_; }
  int sample_rate_hz() const { return sample_rate_hz_; }
  Eigen::Index size() const { return samples_.size(); }
  double duration_s() const {
    return static_cast<double>(samples_.size()) / sample_rate_hz_;
  }

  bool operator==(const Waveform& other) const {
    return sample_rate_hz_ == other.sample_rate_hz_ &&
           samples_.size() == other.samples_.size() &&
           samples_ == other.samples_;
  }

 private:
  Eigen::VectorXd samples_;
  int sample_rate_hz_;
};

enum class RoomClass { kSmall, kMedium, kLarge };

std::string_view to_string(RoomClass room);
RoomClass parse_room_class(std::string_view name);

class RoomImpulseResponse {
 public:
  RoomImpulseResponse(Eigen::VectorXd taps, int sample_rate_hz,
                      std::optional<RoomClass> room_class = std::nullopt);

  const Eigen::VectorXd& taps() const { return taps_; }
  int sample_rate_hz() const { return sample_rate_hz_; }
  std::optional<RoomClass> room_class() const { return room_class_; }

 private:
  Eigen::VectorXd taps_;
  int sample_rate_hz_;
  std::optional<RoomClass> room_class_;
};

// Reads PCM16 or float32 RIFF/WAVE, averaging channels down to mono.
Waveform read_wav(const std::filesystem::path& path);
Waveform decode_wav(std::string_view bytes);

// Writes PCM16 mono; samples outside [-1, 1] are clamped.
void write_wav(const Waveform& w, const std::filesystem::path& path);
std::string encode_wav(const Waveform& w);

template <typename Derived>
double rms(const Eigen::MatrixBase<Derived>& x) {
  if (x.size() == 0) return 0.0;
  return std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
}

inline double rms(const Waveform& w) { return rms(w.samples()); }

// The two addends of a mixture, kept so that the realized SNR can be
// recomputed exactly.
struct NoiseMix {
  Eigen::VectorXd scaled_noise;
  double gain = 0.0;
  Eigen::Index crop_offset = 0;
};

// Tiles (noise shorter than clean) or randomly crops (noise longer) the
// noise to the clean length and scales it so that
// 20 log10(rms(clean) / rms(gain * noise)) == snr_db.
NoiseMix scaled_noise_for_snr(const Waveform& clean, const Waveform& noise,
                              double snr_db, Seed seed);

Waveform mix_at_snr(const Waveform& clean, const Waveform& noise,
                    double snr_db, Seed seed);

double snr_db(const Eigen::VectorXd& signal, const Eigen::VectorXd& noise);

// Full linear convolution truncated to the length of x.
Eigen::VectorXd convolve_truncated(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& taps);

// convolve_truncated rescaled to the RMS of the input.
Waveform convolve_rir(const Waveform& clean, const RoomImpulseResponse& rir);

// 4th-order Butterworth low-pass as two cascaded biquads.
Eigen::VectorXd lowpass4(const Eigen::VectorXd& x, double cutoff_hz,
                         int sample_rate_hz);

inline constexpr double kNarrowbandCutoffHz = 2000.0;

// i.i.d. N(0, 1); low-passed at kNarrowbandCutoffHz when narrowband.
Waveform white_noise(Eigen::Index length, Seed seed, bool narrowband,
                     int sample_rate_hz = kDefaultSampleRate);

}  // namespace distilrobust::audio
