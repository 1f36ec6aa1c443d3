// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "distilrobust/audio.hpp"
#include "distilrobust/augment.hpp"

namespace distilrobust::data {

enum class RecordKind { kSpeech, kNoise, kRir };

std::string_view to_string(RecordKind kind);

// One JSON-lines record: {id, path, kind, room_class?, duration_s?}.
struct ManifestRecord {
  std::string id;
  std::filesystem::path path;  // resolved against the manifest's directory
  RecordKind kind = RecordKind::kSpeech;
  std::optional<audio::RoomClass> room_class;
  std::optional<double> duration_s;
};

// Parses every line; ids default to the path when absent and must be unique.
// Blank lines are skipped. Errors name the line number.
std::vector<ManifestRecord> parse_manifest(std::string_view text,
                                           const std::filesystem::path& base_dir);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

std::string to_jsonl(const std::vector<ManifestRecord>& records,
                     const std::filesystem::path& base_dir);

struct Utterance {
  std::string id;
  audio::Waveform waveform;
};

// Loads every record of the expected kind. All load failures are collected
// into a single error listing each offending record.
std::vector<Utterance> load_speech(const std::vector<ManifestRecord>& records);
augment::Banks load_banks(const std::vector<ManifestRecord>& noise,
                          const std::vector<ManifestRecord>& rirs);

}  // namespace distilrobust::data
