// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/manifest.hpp"

#include <json.hpp>
#include <set>
#include <sstream>

#include "distilrobust/error.hpp"
#include "distilrobust/tensor_io.hpp"

namespace distilrobust::data {

using nlohmann::json;

std::string_view to_string(RecordKind kind) {
  switch (kind) {
    case RecordKind::kSpeech: return "speech";
    case RecordKind::kNoise: return "noise";
    case RecordKind::kRir: return "rir";
  }
  return "?";
}

namespace {

RecordKind parse_kind(const std::string& s, std::size_t line) {
  if (s == "speech") return RecordKind::kSpeech;
  if (s == "noise") return RecordKind::kNoise;
  if (s == "rir") return RecordKind::kRir;
  fail(ErrorKind::kValidation,
       "manifest line " + std::to_string(line) + ": unknown kind '" + s + "'");
}

}  // namespace

std::vector<ManifestRecord> parse_manifest(std::string_view text,
                                           const std::filesystem::path& base_dir) {
  std::vector<ManifestRecord> out;
  std::set<std::string> ids;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "manifest line " + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      fail(ErrorKind::kValidation, where + ": not valid JSON");
    }
    if (!j.is_object()) fail(ErrorKind::kValidation, where + ": expected an object");
    try {
      ManifestRecord r;
      if (!j.contains("path")) fail(ErrorKind::kValidation, where + ": missing path");
      const std::filesystem::path p = j.at("path").get<std::string>();
      r.path = p.is_absolute() ? p : base_dir / p;
      r.id = j.contains("id") && !j["id"].is_null() ? j["id"].get<std::string>()
                                                    : p.generic_string();
      if (!j.contains("kind")) fail(ErrorKind::kValidation, where + ": missing kind");
      r.kind = parse_kind(j.at("kind").get<std::string>(), lineno);
      if (j.contains("room_class") && !j["room_class"].is_null())
        r.room_class = audio::parse_room_class(j["room_class"].get<std::string>());
      if (j.contains("duration_s") && !j["duration_s"].is_null())
        r.duration_s = j["duration_s"].get<double>();
      if (!ids.insert(r.id).second)
        fail(ErrorKind::kValidation, where + ": duplicate id '" + r.id + "'");
      out.push_back(std::move(r));
    } catch (const json::exception&) {
      fail(ErrorKind::kValidation, where + ": field has the wrong type");
    }
  }
  return out;
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  try {
    return parse_manifest(text, path.parent_path());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string to_jsonl(const std::vector<ManifestRecord>& records,
                     const std::filesystem::path& base_dir) {
  std::string out;
  for (const auto& r : records) {
    json j;
    j["id"] = r.id;
    j["path"] = r.path.lexically_relative(base_dir).generic_string();
    j["kind"] = std::string(to_string(r.kind));
    if (r.room_class) j["room_class"] = std::string(audio::to_string(*r.room_class));
    if (r.duration_s) j["duration_s"] = *r.duration_s;
    out += j.dump() + "\n";
  }
  return out;
}

namespace {

template <typename Fn>
void collect(const std::vector<ManifestRecord>& records, RecordKind want, Fn&& load,
             std::vector<std::string>& errors) {
  for (const auto& r : records) {
    if (r.kind != want) {
      errors.push_back(r.id + ": expected kind " + std::string(to_string(want)) +
                       ", got " + std::string(to_string(r.kind)));
      continue;
    }
    if (!std::filesystem::exists(r.path)) {
      errors.push_back(r.id + ": missing file " + r.path.string());
      continue;
    }
    try {
      load(r);
    } catch (const Error& e) {
      errors.push_back(r.id + ": " + e.what());
    }
  }
}

[[noreturn]] void report(const std::vector<std::string>& errors) {
  std::string msg = std::to_string(errors.size()) + " manifest record(s) failed to load";
  for (const auto& e : errors) msg += "\n  " + e;
  fail(ErrorKind::kIo, msg);
}

}  // namespace

std::vector<Utterance> load_speech(const std::vector<ManifestRecord>& records) {
  std::vector<Utterance> out;
  std::vector<std::string> errors;
  collect(records, RecordKind::kSpeech,
          [&](const ManifestRecord& r) { out.push_back({r.id, audio::read_wav(r.path)}); },
          errors);
  if (!errors.empty()) report(errors);
  if (out.empty()) fail(ErrorKind::kValidation, "speech manifest is empty");
  return out;
}

augment::Banks load_banks(const std::vector<ManifestRecord>& noise,
                          const std::vector<ManifestRecord>& rirs) {
  augment::Banks banks;
  std::vector<std::string> errors;
  collect(noise, RecordKind::kNoise,
          [&](const ManifestRecord& r) { banks.noises.push_back(audio::read_wav(r.path)); },
          errors);
  collect(rirs, RecordKind::kRir,
          [&](const ManifestRecord& r) {
            audio::Waveform w = audio::read_wav(r.path);
            banks.rirs.emplace_back(w.samples(), w.sample_rate_hz(), r.room_class);
          },
          errors);
  if (!errors.empty()) report(errors);
  return banks;
}

}  // namespace distilrobust::data
