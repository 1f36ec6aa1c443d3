// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/audio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unsupported/Eigen/FFT>

#include "distilrobust/error.hpp"

namespace distilrobust::audio {

Waveform::Waveform(Eigen::VectorXd samples, int sample_rate_hz)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz) {
  if (samples_.size() == 0) fail(ErrorKind::kLength, "empty waveform");
  if (sample_rate_hz_ <= 0)
    fail(ErrorKind::kRate, "sample rate must be positive");
  if (!samples_.allFinite())
    fail(ErrorKind::kNumeric, "waveform contains non-finite samples");
}

std::string_view to_string(RoomClass room) {
  switch (room) {
    case RoomClass::kSmall: return "small";
    case RoomClass::kMedium: return "medium";
    case RoomClass::kLarge: return "large";
  }
  return "unknown";
}

RoomClass parse_room_class(std::string_view name) {
  if (name == "small") return RoomClass::kSmall;
  if (name == "medium") return RoomClass::kMedium;
  if (name == "large") return RoomClass::kLarge;
  fail(ErrorKind::kValidation,
       "unknown room_class '" + std::string(name) + "'");
}

RoomImpulseResponse::RoomImpulseResponse(Eigen::VectorXd taps,
                                         int sample_rate_hz,
                                         std::optional<RoomClass> room_class)
    : taps_(std::move(taps)),
      sample_rate_hz_(sample_rate_hz),
      room_class_(room_class) {
  if (taps_.size() == 0) fail(ErrorKind::kLength, "empty impulse response");
  if (sample_rate_hz_ <= 0)
    fail(ErrorKind::kRate, "sample rate must be positive");
  if (!taps_.allFinite())
    fail(ErrorKind::kNumeric, "impulse response contains non-finite taps");
  if (taps_.cwiseAbs().maxCoeff() == 0.0)
    fail(ErrorKind::kDegenerateSignal, "all-zero impulse response");
}

// ---------------------------------------------------------------------------
// WAV

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n)
      fail(ErrorKind::kFormat, std::string("truncated ") + what);
  }
  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint16_t u16(const char* what) {
    auto b = take(2, what);
    return static_cast<std::uint16_t>(static_cast<std::uint8_t>(b[0]) |
                                      static_cast<std::uint8_t>(b[1]) << 8);
  }
  std::uint32_t u32(const char* what) {
    auto b = take(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
      v = (v << 8) | static_cast<std::uint8_t>(b[static_cast<std::size_t>(i)]);
    return v;
  }
  void skip(std::size_t n, const char* what) { take(n, what); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

struct FormatChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

}  // namespace

Waveform decode_wav(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.take(4, "RIFF header") != "RIFF")
    fail(ErrorKind::kFormat, "missing RIFF magic");
  r.u32("RIFF size");
  if (r.take(4, "WAVE tag") != "WAVE")
    fail(ErrorKind::kFormat, "missing WAVE tag");

  std::optional<FormatChunk> fmt;
  std::optional<std::string_view> data;
  while (r.remaining() >= 8 && !data) {
    auto id = r.take(4, "chunk id");
    std::uint32_t size = r.u32("chunk size");
    if (id == "fmt ") {
      if (size < 16) fail(ErrorKind::kFormat, "fmt chunk too small");
      auto body = r.take(size, "fmt chunk");
      ByteReader f(body);
      FormatChunk c;
      c.format = f.u16("format tag");
      c.channels = f.u16("channel count");
      c.sample_rate = f.u32("sample rate");
      f.u32("byte rate");
      c.block_align = f.u16("block align");
      c.bits = f.u16("bits per sample");
      if (c.format == kFormatExtensible) {
        if (size < 40) fail(ErrorKind::kFormat, "extensible fmt too small");
        f.skip(8, "extension header");
        c.format = f.u16("sub-format");
      }
      fmt = c;
    } else if (id == "data") {
      if (!fmt) fail(ErrorKind::kFormat, "data chunk precedes fmt chunk");
      data = r.take(size, "data chunk");
    } else {
      r.skip(size + (size & 1u), "chunk body");
    }
  }
  if (!fmt) fail(ErrorKind::kFormat, "missing fmt chunk");
  if (!data) fail(ErrorKind::kFormat, "missing data chunk");
  if (fmt->channels == 0) fail(ErrorKind::kFormat, "zero channels");
  if (fmt->sample_rate == 0) fail(ErrorKind::kFormat, "zero sample rate");

  std::size_t width = 0;
  if (fmt->format == kFormatPcm && fmt->bits == 16) {
    width = 2;
  } else if (fmt->format == kFormatFloat && fmt->bits == 32) {
    width = 4;
  } else {
    fail(ErrorKind::kUnsupportedFormat,
         "codec " + std::to_string(fmt->format) + " with " +
             std::to_string(fmt->bits) + " bits per sample");
  }
  const std::size_t frame_bytes = width * fmt->channels;
  if (fmt->block_align != frame_bytes)
    fail(ErrorKind::kFormat, "block align disagrees with channel layout");
  if (data->size() % frame_bytes != 0)
    fail(ErrorKind::kFormat, "data chunk ends mid-sample");
  const auto frames = static_cast<Eigen::Index>(data->size() / frame_bytes);
  if (frames == 0) fail(ErrorKind::kFormat, "no audio frames");

  Eigen::VectorXd mono = Eigen::VectorXd::Zero(frames);
  const auto* p = reinterpret_cast<const unsigned char*>(data->data());
  for (Eigen::Index i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < fmt->channels; ++c, p += width) {
      if (width == 2) {
        auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
        acc += v / 32768.0;
      } else {
        std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                             static_cast<std::uint32_t>(p[1]) << 8 |
                             static_cast<std::uint32_t>(p[2]) << 16 |
                             static_cast<std::uint32_t>(p[3]) << 24;
        acc += std::bit_cast<float>(bits);
      }
    }
    mono[i] = acc / fmt->channels;
  }
  return Waveform(std::move(mono), static_cast<int>(fmt->sample_rate));
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return decode_wav(ss.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string encode_wav(const Waveform& w) {
  const auto n = static_cast<std::uint32_t>(w.size());
  const std::uint32_t data_bytes = n * 2;
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate_hz()));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate_hz()) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    double q = std::round(w.samples()[i] * 32768.0);
    q = std::clamp(q, -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return out;
}

void write_wav(const Waveform& w, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string());
  const std::string bytes = encode_wav(w);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Mixing

double snr_db(const Eigen::VectorXd& signal, const Eigen::VectorXd& noise) {
  return 20.0 * std::log10(rms(signal) / rms(noise));
}

NoiseMix scaled_noise_for_snr(const Waveform& clean, const Waveform& noise,
                              double snr, Seed seed) {
  if (clean.sample_rate_hz() != noise.sample_rate_hz())
    fail(ErrorKind::kRate, "clean at " + std::to_string(clean.sample_rate_hz()) +
                               " Hz, noise at " +
                               std::to_string(noise.sample_rate_hz()) + " Hz");
  if (!std::isfinite(snr)) fail(ErrorKind::kNumeric, "non-finite SNR");
  const double clean_rms = rms(clean);
  if (clean_rms == 0.0) fail(ErrorKind::kDegenerateSignal, "zero-RMS clean");
  if (rms(noise) == 0.0) fail(ErrorKind::kDegenerateSignal, "zero-RMS noise");

  const Eigen::Index n = clean.size();
  const Eigen::Index m = noise.size();
  NoiseMix mix;
  mix.scaled_noise.resize(n);
  if (m > n) {
    Rng rng = make_rng(seed);
    std::uniform_int_distribution<Eigen::Index> pick(0, m - n);
    mix.crop_offset = pick(rng);
    mix.scaled_noise = noise.samples().segment(mix.crop_offset, n);
  } else {
    for (Eigen::Index i = 0; i < n; ++i)
      mix.scaled_noise[i] = noise.samples()[i % m];
  }
  const double noise_rms = rms(mix.scaled_noise);
  if (noise_rms == 0.0)
    fail(ErrorKind::kDegenerateSignal, "noise segment has zero RMS");
  mix.gain = clean_rms / (noise_rms * std::pow(10.0, snr / 20.0));
  mix.scaled_noise *= mix.gain;
  return mix;
}

Waveform mix_at_snr(const Waveform& clean, const Waveform& noise, double snr,
                    Seed seed) {
  NoiseMix mix = scaled_noise_for_snr(clean, noise, snr, seed);
  return Waveform(clean.samples() + mix.scaled_noise, clean.sample_rate_hz());
}

// ---------------------------------------------------------------------------
// Convolution

namespace {

Eigen::VectorXd convolve_direct(const Eigen::VectorXd& x,
                                const Eigen::VectorXd& taps) {
  const Eigen::Index n = x.size();
  const Eigen::Index k = std::min<Eigen::Index>(taps.size(), n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < k; ++j) {
    if (taps[j] == 0.0) continue;
    y.tail(n - j) += taps[j] * x.head(n - j);
  }
  return y;
}

Eigen::VectorXd convolve_fft(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& taps) {
  const Eigen::Index n = x.size();
  const Eigen::Index k = std::min<Eigen::Index>(taps.size(), n);
  Eigen::Index len = 1;
  while (len < n + k - 1) len <<= 1;
  std::vector<double> a(static_cast<std::size_t>(len), 0.0);
  std::vector<double> b(static_cast<std::size_t>(len), 0.0);
  std::copy(x.data(), x.data() + n, a.begin());
  std::copy(taps.data(), taps.data() + k, b.begin());
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> fa, fb;
  fft.fwd(fa, a);
  fft.fwd(fb, b);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  std::vector<double> y;
  fft.inv(y, fa);
  return Eigen::Map<Eigen::VectorXd>(y.data(), n);
}

}  // namespace

Eigen::VectorXd convolve_truncated(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& taps) {
  const auto k = std::min(taps.size(), x.size());
  if (k <= 512 || x.size() * k <= (Eigen::Index{1} << 22))
    return convolve_direct(x, taps);
  return convolve_fft(x, taps);
}

Waveform convolve_rir(const Waveform& clean, const RoomImpulseResponse& rir) {
  if (clean.sample_rate_hz() != rir.sample_rate_hz())
    fail(ErrorKind::kRate, "waveform at " +
                               std::to_string(clean.sample_rate_hz()) +
                               " Hz, impulse response at " +
                               std::to_string(rir.sample_rate_hz()) + " Hz");
  Eigen::VectorXd y = convolve_truncated(clean.samples(), rir.taps());
  const double in_rms = rms(clean);
  const double out_rms = rms(y);
  if (out_rms == 0.0) {
    if (in_rms == 0.0) return clean;
    fail(ErrorKind::kDegenerateSignal,
         "reverberated signal vanishes within the input window");
  }
  const double scale = in_rms / out_rms;
  if (scale != 1.0) y *= scale;
  return Waveform(std::move(y), clean.sample_rate_hz());
}

// ---------------------------------------------------------------------------
// Noise sources

Eigen::VectorXd lowpass4(const Eigen::VectorXd& x, double cutoff_hz,
                         int sample_rate_hz) {
  if (cutoff_hz <= 0.0 || cutoff_hz >= sample_rate_hz / 2.0)
    fail(ErrorKind::kParameter, "cutoff must lie in (0, Nyquist)");
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / sample_rate_hz;
  const double cw = std::cos(w0);
  const double sw = std::sin(w0);
  // Pole-pair Q values of a 4th-order Butterworth prototype.
  const std::array<double, 2> qs{1.0 / (2.0 * std::cos(std::numbers::pi / 8)),
                                 1.0 / (2.0 * std::cos(3 * std::numbers::pi / 8))};
  Eigen::VectorXd y = x;
  for (double q : qs) {
    const double alpha = sw / (2.0 * q);
    const double a0 = 1.0 + alpha;
    const double b0 = (1.0 - cw) / 2.0 / a0;
    const double b1 = (1.0 - cw) / a0;
    const double b2 = b0;
    const double a1 = -2.0 * cw / a0;
    const double a2 = (1.0 - alpha) / a0;
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double in = y[i];
      const double out = b0 * in + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = in;
      y2 = y1;
      y1 = out;
      y[i] = out;
    }
  }
  return y;
}

Waveform white_noise(Eigen::Index length, Seed seed, bool narrowband,
                     int sample_rate_hz) {
  if (length <= 0) fail(ErrorKind::kLength, "noise length must be positive");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x(length);
  for (Eigen::Index i = 0; i < length; ++i) x[i] = normal(rng);
  if (narrowband) x = lowpass4(x, kNarrowbandCutoffHz, sample_rate_hz);
  return Waveform(std::move(x), sample_rate_hz);
}

}  // namespace distilrobust::audio
