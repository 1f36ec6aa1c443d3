// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "distilrobust/tensor.hpp"

namespace distilrobust::io {

// DRTN layout, all little-endian:
//   "DRTN" | u8 version | u8 rank | u64 dims[rank] | f64 values (row-major)
inline constexpr std::uint8_t kDrtnVersion = 1;

struct DrtnArray {
  std::vector<std::uint64_t> dims;
  std::vector<double> values;
};

std::string encode_drtn(const DrtnArray& array);
DrtnArray decode_drtn(std::string_view bytes, std::size_t* consumed = nullptr);

// Matrices are stored as rank 2. Rank 0 and 1 load as 1x1 and 1xN.
std::string encode_matrix(const Matrix& m);
Matrix decode_matrix(std::string_view bytes);
Matrix to_matrix(const DrtnArray& array);

void write_matrix(const Matrix& m, const std::filesystem::path& path);
Matrix read_matrix(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// Checkpoint container:
//   "DRCK" | u8 version | u64 json_len | json | u64 count |
//   count x (u32 name_len | name | u64 blob_len | DRTN blob)
struct NamedMatrix {
  std::string name;
  Matrix value;
};

struct Checkpoint {
  std::string metadata_json;
  std::vector<NamedMatrix> tensors;

  const Matrix* find(std::string_view name) const;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);
void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace distilrobust::io
