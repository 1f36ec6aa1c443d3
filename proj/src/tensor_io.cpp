// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/tensor_io.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "distilrobust/error.hpp"

namespace distilrobust::io {

namespace {

constexpr std::string_view kDrtnMagic = "DRTN";
constexpr std::string_view kCheckpointMagic = "DRCK";
constexpr std::uint8_t kCheckpointVersion = 1;

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Cursor {
 public:
  explicit Cursor(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n)
      fail(ErrorKind::kFormat, std::string("truncated ") + what);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename T>
  T le(const char* what) {
    auto s = take(sizeof(T), what);
    T v = 0;
    for (std::size_t i = sizeof(T); i-- > 0;)
      v = static_cast<T>((v << 8) | static_cast<std::uint8_t>(s[i]));
    return v;
  }
  std::size_t position() const { return pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_drtn(const DrtnArray& array) {
  std::uint64_t count = 1;
  for (auto d : array.dims) count *= d;
  if (count != array.values.size())
    fail(ErrorKind::kShape, "DRTN dims disagree with value count");
  if (array.dims.size() > 255) fail(ErrorKind::kShape, "DRTN rank above 255");
  std::string out(kDrtnMagic);
  out.push_back(static_cast<char>(kDrtnVersion));
  out.push_back(static_cast<char>(array.dims.size()));
  for (auto d : array.dims) put_le<std::uint64_t>(out, d);
  for (double v : array.values) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

DrtnArray decode_drtn(std::string_view bytes, std::size_t* consumed) {
  Cursor c(bytes);
  if (c.take(4, "DRTN magic") != kDrtnMagic)
    fail(ErrorKind::kFormat, "missing DRTN magic");
  const auto version = c.le<std::uint8_t>("DRTN version");
  if (version != kDrtnVersion)
    fail(ErrorKind::kUnsupportedFormat, "DRTN version " + std::to_string(version));
  const auto rank = c.le<std::uint8_t>("DRTN rank");
  DrtnArray a;
  std::uint64_t count = 1;
  for (int i = 0; i < rank; ++i) {
    a.dims.push_back(c.le<std::uint64_t>("DRTN dims"));
    count *= a.dims.back();
  }
  if (count > (bytes.size() - c.position()) / 8)
    fail(ErrorKind::kFormat, "truncated DRTN values");
  a.values.resize(count);
  for (auto& v : a.values) v = std::bit_cast<double>(c.le<std::uint64_t>("DRTN values"));
  if (consumed) *consumed = c.position();
  return a;
}

Matrix to_matrix(const DrtnArray& a) {
  Eigen::Index rows = 1, cols = 1;
  if (a.dims.size() == 1) {
    cols = static_cast<Eigen::Index>(a.dims[0]);
  } else if (a.dims.size() == 2) {
    rows = static_cast<Eigen::Index>(a.dims[0]);
    cols = static_cast<Eigen::Index>(a.dims[1]);
  } else if (!a.dims.empty()) {
    fail(ErrorKind::kShape, "rank-" + std::to_string(a.dims.size()) +
                                " DRTN tensor cannot load as a matrix");
  }
  Matrix m(rows, cols);
  std::copy(a.values.begin(), a.values.end(), m.data());
  return m;
}

std::string encode_matrix(const Matrix& m) {
  DrtnArray a;
  a.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
  a.values.assign(m.data(), m.data() + m.size());
  return encode_drtn(a);
}

Matrix decode_matrix(std::string_view bytes) { return to_matrix(decode_drtn(bytes)); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

void write_matrix(const Matrix& m, const std::filesystem::path& path) {
  write_file(path, encode_matrix(m));
}

Matrix read_matrix(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    return decode_matrix(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

const Matrix* Checkpoint::find(std::string_view name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t.value;
  return nullptr;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string out(kCheckpointMagic);
  out.push_back(static_cast<char>(kCheckpointVersion));
  put_le<std::uint64_t>(out, ckpt.metadata_json.size());
  out += ckpt.metadata_json;
  put_le<std::uint64_t>(out, ckpt.tensors.size());
  for (const auto& t : ckpt.tensors) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    const std::string blob = encode_matrix(t.value);
    put_le<std::uint64_t>(out, blob.size());
    out += blob;
  }
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Cursor c(bytes);
  if (c.take(4, "checkpoint magic") != kCheckpointMagic)
    fail(ErrorKind::kFormat, "missing checkpoint magic");
  const auto version = c.le<std::uint8_t>("checkpoint version");
  if (version != kCheckpointVersion)
    fail(ErrorKind::kUnsupportedFormat, "checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  const auto json_len = c.le<std::uint64_t>("metadata length");
  ckpt.metadata_json = std::string(c.take(json_len, "metadata"));
  const auto count = c.le<std::uint64_t>("tensor count");
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedMatrix t;
    const auto name_len = c.le<std::uint32_t>("tensor name length");
    t.name = std::string(c.take(name_len, "tensor name"));
    const auto blob_len = c.le<std::uint64_t>("tensor blob length");
    t.value = decode_matrix(c.take(blob_len, "tensor blob"));
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file(path, encode_checkpoint(ckpt));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    return decode_checkpoint(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace distilrobust::io
