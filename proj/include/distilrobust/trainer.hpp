// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "distilrobust/augment.hpp"
#include "distilrobust/config.hpp"
#include "distilrobust/manifest.hpp"
#include "distilrobust/model.hpp"
#include "distilrobust/tensor_io.hpp"

namespace distilrobust::train {

// Linear warmup 0 -> lr_peak over [0, warmup], then linear decay to 0 at N.
double lr_at(std::int64_t iteration, const TrainConfig& cfg);

struct AdamWMoments {
  Matrix first;
  Matrix second;
};

// One decoupled-weight-decay Adam update; `step` is 1-based.
void adamw_step(Matrix& param, const Matrix& grad, AdamWMoments& moments,
                std::int64_t step, double lr, const AdamWConfig& hp);

class AdamW {
 public:
  explicit AdamW(AdamWConfig hp) : hp_(hp) {}

  // Uses each parameter's accumulated gradient (zero when absent).
  void step(const model::Parameters& params, double lr);

  std::int64_t steps() const { return steps_; }
  const std::map<std::string, AdamWMoments>& moments() const { return moments_; }
  void restore(std::int64_t steps, std::map<std::string, AdamWMoments> moments);

 private:
  AdamWConfig hp_;
  std::int64_t steps_ = 0;
  std::map<std::string, AdamWMoments> moments_;
};

struct MetricsRecord {
  std::int64_t iter = 0;
  double lr = 0.0;
  double kd_l1 = 0.0;
  double kd_cos = 0.0;
  double kd_total = 0.0;
  std::optional<double> enh;
  double combined = 0.0;
  double smoothed = 0.0;  // trailing mean of combined over kSmoothingWindow
  double lambda = 0.0;
  std::array<int, augment::kNumActions> action_counts{};
  double tau = 0.0;
  double reverb_threshold = 0.0;
};

inline constexpr std::size_t kSmoothingWindow = 10;

std::string to_jsonl(const MetricsRecord& r);
MetricsRecord metrics_from_json(std::string_view line);
std::vector<MetricsRecord> read_metrics(const std::filesystem::path& path);

class Trainer {
 public:
  Trainer(TrainConfig cfg, std::vector<data::Utterance> corpus, augment::Banks banks);

  // Rebuilds the run from a checkpoint written by checkpoint().
  static Trainer resume(const io::Checkpoint& ckpt, std::vector<data::Utterance> corpus,
                        augment::Banks banks);

  MetricsRecord step();

  std::int64_t iteration() const { return iteration_; }
  bool finished() const { return iteration_ >= cfg_.total_iterations; }
  const TrainConfig& config() const { return cfg_; }
  const model::TeacherSurrogate& teacher() const { return teacher_; }
  const model::StudentModel& student() const { return student_; }
  const AdamW& optimizer() const { return optimizer_; }

  // Full training state: student, optimizer moments, counters, config.
  io::Checkpoint checkpoint() const;

  // Encoder parameters only.
  io::Checkpoint export_student() const;

  // Positions (into the corpus) of the utterances used at 1-based step k.
  std::vector<std::size_t> batch_indices(std::int64_t k) const;

 private:
  TrainConfig cfg_;
  std::vector<data::Utterance> corpus_;
  augment::Banks banks_;
  model::TeacherSurrogate teacher_;
  model::StudentModel student_;
  AdamW optimizer_;
  std::int64_t iteration_ = 0;
  std::deque<double> recent_;
};

struct TrainOptions {
  std::optional<std::filesystem::path> output_dir;  // checkpoints + metrics.jsonl
  std::optional<std::int64_t> stop_at;              // stop early at this iteration
  std::function<void(const MetricsRecord&)> on_metrics;
};

struct TrainResult {
  std::vector<MetricsRecord> metrics;
  std::uint64_t teacher_checksum_before = 0;
  std::uint64_t teacher_checksum_after = 0;
};

// Runs `trainer` to completion (or stop_at), checkpointing every
// checkpoint_every iterations and at the end.
TrainResult run(Trainer& trainer, const TrainOptions& options = {});

std::filesystem::path checkpoint_path(const std::filesystem::path& dir,
                                      std::int64_t iteration);

// Representation-only model loaded from export_student() output.
class ExportedStudent {
 public:
  explicit ExportedStudent(const io::Checkpoint& ckpt);

  Tensor representation(const audio::Waveform& input) const;
  const model::Encoder& encoder() const { return encoder_; }

 private:
  model::ModelConfig config_;
  model::Encoder encoder_;
};

}  // namespace distilrobust::train
