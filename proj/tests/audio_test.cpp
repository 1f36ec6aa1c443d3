// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/audio.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <numbers>

#include "distilrobust/error.hpp"
#include "oracles.hpp"

namespace distilrobust::audio {
namespace {

Eigen::VectorXd random_signal(Eigen::Index n, std::mt19937_64& rng, double amp = 0.5) {
  std::uniform_real_distribution<double> u(-amp, amp);
  Eigen::VectorXd x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kContract;
}

// Minimal RIFF writer, independent of encode_wav.
std::string wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                      std::uint16_t bits, const std::string& payload) {
  std::string s;
  auto u16 = [&](std::uint16_t v) { s.append(reinterpret_cast<const char*>(&v), 2); };
  auto u32 = [&](std::uint32_t v) { s.append(reinterpret_cast<const char*>(&v), 4); };
  s += "RIFF";
  u32(static_cast<std::uint32_t>(36 + payload.size()));
  s += "WAVEfmt ";
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(static_cast<std::uint16_t>(channels * bits / 8));
  u16(bits);
  s += "data";
  u32(static_cast<std::uint32_t>(payload.size()));
  s += payload;
  return s;
}

TEST(Waveform, RejectsEmptyNonFiniteAndBadRate) {
  EXPECT_EQ(kind_of([] { Waveform(Eigen::VectorXd()); }), ErrorKind::kLength);
  EXPECT_EQ(kind_of([] { Waveform(Eigen::VectorXd::Ones(4), 0); }), ErrorKind::kRate);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  x[1] = std::nan("");
  EXPECT_EQ(kind_of([&] { Waveform w(x); }), ErrorKind::kNumeric);
}

TEST(RoomImpulseResponse, RejectsAllZeroTaps) {
  EXPECT_EQ(kind_of([] { RoomImpulseResponse(Eigen::VectorXd::Zero(8), 16000); }),
            ErrorKind::kDegenerateSignal);
}

TEST(Wav, Pcm16RoundTripWithinQuantization) {
  std::mt19937_64 rng(1);
  const Waveform w(random_signal(1000, rng, 0.9), 16000);
  const Waveform back = decode_wav(encode_wav(w));
  EXPECT_EQ(back.sample_rate_hz(), 16000);
  ASSERT_EQ(back.size(), w.size());
  EXPECT_LE((back.samples() - w.samples()).cwiseAbs().maxCoeff(), 0.5 / 32768 + 1e-12);
}

TEST(Wav, EncodeIsByteStable) {
  std::mt19937_64 rng(2);
  const Waveform w(random_signal(100, rng), 8000);
  EXPECT_EQ(encode_wav(w), encode_wav(w));
}

TEST(Wav, ClampsOutOfRangeSamples) {
  Eigen::VectorXd x(3);
  x << 2.0, -2.0, 0.0;
  const Waveform back = decode_wav(encode_wav(Waveform(x)));
  EXPECT_NEAR(back.samples()[0], 32767.0 / 32768.0, 1e-12);
  EXPECT_DOUBLE_EQ(back.samples()[1], -1.0);
}

TEST(Wav, DecodesHandBuiltStereoPcm16AsMonoAverage) {
  std::string payload;
  for (std::int16_t v : {std::int16_t{16384}, std::int16_t{0}, std::int16_t{-32768}, std::int16_t{-32768}})
    payload.append(reinterpret_cast<const char*>(&v), 2);
  const Waveform w = decode_wav(wav_bytes(1, 2, 22050, 16, payload));
  EXPECT_EQ(w.sample_rate_hz(), 22050);
  ASSERT_EQ(w.size(), 2);
  EXPECT_DOUBLE_EQ(w.samples()[0], 0.25);
  EXPECT_DOUBLE_EQ(w.samples()[1], -1.0);
}

TEST(Wav, DecodesFloat32) {
  std::string payload;
  for (float v : {0.5f, -0.25f, 1.5f}) payload.append(reinterpret_cast<const char*>(&v), 4);
  const Waveform w = decode_wav(wav_bytes(3, 1, 16000, 32, payload));
  ASSERT_EQ(w.size(), 3);
  EXPECT_DOUBLE_EQ(w.samples()[2], 1.5);
}

TEST(Wav, MalformedInputsAreFormatErrors) {
  EXPECT_EQ(kind_of([] { decode_wav("RIFX...."); }), ErrorKind::kFormat);
  std::string payload(3, '\0');  // 1.5 PCM16 samples
  EXPECT_EQ(kind_of([&] { decode_wav(wav_bytes(1, 1, 16000, 16, payload)); }), ErrorKind::kFormat);
  std::string ok(4, '\0');
  std::string truncated = wav_bytes(1, 1, 16000, 16, ok);
  truncated.resize(truncated.size() - 2);
  EXPECT_EQ(kind_of([&] { decode_wav(truncated); }), ErrorKind::kFormat);
  EXPECT_EQ(kind_of([&] { decode_wav(wav_bytes(1, 1, 16000, 24, std::string(6, '\0'))); }),
            ErrorKind::kUnsupportedFormat);
}

TEST(Wav, MissingFileIsIoError) {
  EXPECT_EQ(kind_of([] { read_wav("/nonexistent/x.wav"); }), ErrorKind::kIo);
}

TEST(Mixing, RealizedSnrMatchesRequest) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Waveform clean(random_signal(800 + 37 * trial, rng));
    const Waveform noise(random_signal(300 + 91 * trial, rng, 0.1));
    const double snr = -5.0 + trial;
    const NoiseMix mix = scaled_noise_for_snr(clean, noise, snr, static_cast<Seed>(trial));
    ASSERT_EQ(mix.scaled_noise.size(), clean.size());
    const double realized =
        20.0 * std::log10(oracle::sqrt_mean_square(clean.samples()) /
                          oracle::sqrt_mean_square(mix.scaled_noise));
    EXPECT_NEAR(realized, snr, 1e-9);
    EXPECT_NEAR(snr_db(clean.samples(), mix.scaled_noise), snr, 1e-9);
  }
}

TEST(Mixing, MixtureIsCleanPlusScaledNoise) {
  std::mt19937_64 rng(4);
  const Waveform clean(random_signal(500, rng));
  const Waveform noise(random_signal(2000, rng));
  const NoiseMix mix = scaled_noise_for_snr(clean, noise, 7.0, 9);
  const Waveform y = mix_at_snr(clean, noise, 7.0, 9);
  EXPECT_LE((y.samples() - clean.samples() - mix.scaled_noise).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Mixing, LongNoiseIsCroppedShortNoiseTiled) {
  Eigen::VectorXd ramp = Eigen::VectorXd::LinSpaced(1000, 1.0, 1000.0);
  const Waveform clean(Eigen::VectorXd::Ones(100));
  const NoiseMix crop = scaled_noise_for_snr(clean, Waveform(ramp), 0.0, 5);
  for (Eigen::Index i = 0; i < 100; ++i)
    EXPECT_NEAR(crop.scaled_noise[i] / crop.gain, ramp[crop.crop_offset + i], 1e-9);

  Eigen::VectorXd short_noise(3);
  short_noise << 1.0, -2.0, 3.0;
  const NoiseMix tile = scaled_noise_for_snr(clean, Waveform(short_noise), 0.0, 5);
  for (Eigen::Index i = 0; i < 100; ++i)
    EXPECT_NEAR(tile.scaled_noise[i] / tile.gain, short_noise[i % 3], 1e-12);
}

TEST(Mixing, DegenerateAndMismatchedInputs) {
  const Waveform clean(Eigen::VectorXd::Ones(10));
  EXPECT_EQ(kind_of([&] { mix_at_snr(Waveform(Eigen::VectorXd::Zero(10)), clean, 0.0, 1); }),
            ErrorKind::kDegenerateSignal);
  EXPECT_EQ(kind_of([&] { mix_at_snr(clean, Waveform(Eigen::VectorXd::Zero(10)), 0.0, 1); }),
            ErrorKind::kDegenerateSignal);
  EXPECT_EQ(kind_of([&] { mix_at_snr(clean, Waveform(Eigen::VectorXd::Ones(10), 8000), 0.0, 1); }),
            ErrorKind::kRate);
}

TEST(Convolution, MatchesDirectLoopBothPaths) {
  std::mt19937_64 rng(5);
  for (Eigen::Index k : {Eigen::Index{5}, Eigen::Index{300}, Eigen::Index{4000}}) {
    const Eigen::VectorXd x = random_signal(6000, rng);
    const Eigen::VectorXd h = random_signal(k, rng);
    const auto ref = oracle::direct_convolution(std::vector<double>(x.begin(), x.end()),
                                                std::vector<double>(h.begin(), h.end()));
    const Eigen::VectorXd y = convolve_truncated(x, h);
    ASSERT_EQ(y.size(), x.size());
    double err = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
      err = std::max(err, std::fabs(y[i] - ref[static_cast<std::size_t>(i)]));
    EXPECT_LT(err, 1e-9) << "k=" << k;
  }
}

TEST(Convolution, UnitImpulseIsExactIdentity) {
  std::mt19937_64 rng(6);
  const Waveform x(random_signal(1234, rng));
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(7000);
  delta[0] = 1.0;
  EXPECT_TRUE(convolve_rir(x, RoomImpulseResponse(delta, 16000)) == x);
}

TEST(Convolution, OutputRescaledToInputRms) {
  std::mt19937_64 rng(7);
  const Waveform x(random_signal(3000, rng));
  const RoomImpulseResponse h(random_signal(800, rng), 16000);
  EXPECT_NEAR(rms(convolve_rir(x, h)), rms(x), 1e-12);
}

TEST(Lowpass, ButterworthMagnitudeResponse) {
  const int rate = 16000;
  auto gain_at = [&](double f) {
    Eigen::VectorXd x(16000);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::sin(2 * std::numbers::pi * f * i / rate);
    const Eigen::VectorXd y = lowpass4(x, 2000.0, rate);
    return oracle::sqrt_mean_square(y.tail(8000)) / oracle::sqrt_mean_square(x.tail(8000));
  };
  EXPECT_NEAR(gain_at(100.0), 1.0, 1e-3);
  EXPECT_NEAR(gain_at(2000.0), std::sqrt(0.5), 5e-3);
  EXPECT_LT(gain_at(6000.0), 0.01);
}

TEST(WhiteNoise, SeededAndNarrowbandRemovesHighBand) {
  const Waveform a = white_noise(4096, 11, false);
  EXPECT_TRUE(a == white_noise(4096, 11, false));
  EXPECT_FALSE(a == white_noise(4096, 12, false));
  EXPECT_NEAR(rms(a), 1.0, 0.05);

  const Waveform nb = white_noise(4096, 11, true);
  const auto spec = oracle::stft_magnitude(std::vector<double>(nb.samples().begin(), nb.samples().end()),
                                           oracle::periodic_hann(512), 512, 512);
  double low = 0.0, high = 0.0;
  for (const auto& row : spec) {
    for (int k = 1; k < 48; ++k) low += row[static_cast<std::size_t>(k)];       // < 1.5 kHz
    for (int k = 160; k < 208; ++k) high += row[static_cast<std::size_t>(k)];   // 5 - 6.5 kHz
  }
  EXPECT_LT(high, 0.02 * low);
}

}  // namespace
}  // namespace distilrobust::audio
