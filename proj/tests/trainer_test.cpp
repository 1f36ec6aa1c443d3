// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/trainer.hpp"

#include <gtest/gtest.h>

#include <json.hpp>
#include <set>

#include "distilrobust/error.hpp"
#include "distilrobust/synthetic.hpp"
#include "oracles.hpp"

namespace distilrobust::train {
namespace {

TrainConfig tiny(Experiment e, std::int64_t n = 6) {
  TrainConfig cfg = preset(e, n);
  cfg.batch_size = 2;
  cfg.lr_peak = 1e-3;
  cfg.crop_samples = 3200;
  cfg.distill_layers = {2, 4};
  cfg.model.dim = 8;
  cfg.model.teacher_layers = 4;
  cfg.model.rnn_hidden = 4;
  cfg.checkpoint_every = 3;
  cfg.seeds = {11, 12, 13};
  return cfg;
}

std::vector<data::Utterance> corpus(std::size_t n = 5) {
  std::vector<data::Utterance> out;
  const auto speech = synthetic::speech_like(n, 21);
  for (std::size_t i = 0; i < n; ++i) out.push_back({"utt" + std::to_string(i), speech[i]});
  return out;
}

augment::Banks banks() { return synthetic::banks(2, 3, 22); }

TEST(LearningRate, WarmupThenLinearDecay) {
  TrainConfig cfg = preset(Experiment::kC1, 200);
  cfg.lr_peak = 1.0;
  EXPECT_EQ(lr_at(0, cfg), 0.0);
  EXPECT_DOUBLE_EQ(lr_at(7, cfg), 0.5);
  EXPECT_DOUBLE_EQ(lr_at(14, cfg), 1.0);
  EXPECT_DOUBLE_EQ(lr_at(107, cfg), 0.5);
  EXPECT_EQ(lr_at(200, cfg), 0.0);
  for (std::int64_t k = 15; k <= 200; ++k) EXPECT_LT(lr_at(k, cfg), lr_at(k - 1, cfg));
  EXPECT_THROW(lr_at(201, cfg), Error);
}

TEST(LearningRate, ReferenceScheduleShape) {
  TrainConfig cfg = preset(Experiment::kC1, kReferenceIterations);
  EXPECT_DOUBLE_EQ(lr_at(kReferenceWarmup, cfg), 2e-4);
  EXPECT_DOUBLE_EQ(lr_at(kReferenceWarmup / 2, cfg), 1e-4);
}

TEST(AdamW, MatchesScalarRecursion) {
  std::mt19937_64 rng(1);
  Matrix theta = oracle::random_matrix(2, 3, rng);
  std::vector<oracle::ScalarAdamW> ref(6);
  std::vector<double> ref_theta(theta.data(), theta.data() + 6);
  AdamWMoments m;
  for (int step = 1; step <= 20; ++step) {
    const Matrix g = oracle::random_matrix(2, 3, rng);
    const double lr = 1e-2 * step;
    adamw_step(theta, g, m, step, lr, {});
    for (int i = 0; i < 6; ++i)
      ref_theta[static_cast<std::size_t>(i)] =
          ref[static_cast<std::size_t>(i)].step(ref_theta[static_cast<std::size_t>(i)], g.data()[i], lr);
  }
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(theta.data()[i], ref_theta[static_cast<std::size_t>(i)], 1e-14);
}

TEST(AdamW, WeightDecayIsDecoupled) {
  Matrix theta = Matrix::Constant(1, 1, 2.0);
  AdamWMoments m;
  adamw_step(theta, Matrix::Zero(1, 1), m, 1, 0.1, {});
  EXPECT_DOUBLE_EQ(theta(0, 0), 2.0 * (1.0 - 0.1 * 0.01));
}

TEST(Metrics, JsonRoundTrip) {
  MetricsRecord r;
  r.iter = 7;
  r.lr = 1.25e-4;
  r.kd_l1 = 1.0 / 3.0;
  r.kd_cos = 2.0;
  r.kd_total = r.kd_l1 + r.kd_cos;
  r.enh = 0.1;
  r.combined = 3.3;
  r.smoothed = 3.4;
  r.lambda = 10;
  r.action_counts = {1, 2, 0, 1};
  r.tau = 18.5;
  r.reverb_threshold = 0.075;
  const std::string line = to_jsonl(r);
  const MetricsRecord back = metrics_from_json(line);
  EXPECT_EQ(to_jsonl(back), line);
  const auto j = nlohmann::json::parse(line);
  for (const char* key : {"iter", "lr", "kd_l1", "kd_cos", "enh", "combined", "action_counts", "tau",
                          "reverb_threshold"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Trainer, BatchesCoverEachEpochWithoutReplacement) {
  Trainer t(tiny(Experiment::kB, 20), corpus(5), banks());
  std::vector<std::size_t> seq;
  for (std::int64_t k = 1; k <= 5; ++k)
    for (std::size_t i : t.batch_indices(k)) seq.push_back(i);
  for (std::size_t epoch = 0; epoch < 2; ++epoch) {
    std::set<std::size_t> seen(seq.begin() + static_cast<long>(epoch * 5),
                               seq.begin() + static_cast<long>(epoch * 5 + 5));
    EXPECT_EQ(seen.size(), 5u);
  }
}

TEST(Trainer, MetricsCarryScheduleAndLambda) {
  Trainer t(tiny(Experiment::kC1), corpus(), banks());
  const MetricsRecord r1 = t.step();
  EXPECT_EQ(r1.iter, 1);
  EXPECT_EQ(r1.tau, 20.0);
  EXPECT_EQ(r1.reverb_threshold, 0.0);
  EXPECT_EQ(r1.lambda, 10.0);
  ASSERT_TRUE(r1.enh.has_value());
  EXPECT_NEAR(r1.combined, r1.kd_total + 10.0 * *r1.enh, 1e-9);
  int total = 0;
  for (int c : r1.action_counts) total += c;
  EXPECT_EQ(total, 2);
}

TEST(Trainer, PresetAHasNoCurriculumOrEnhancement) {
  Trainer t(tiny(Experiment::kA), corpus(), banks());
  const MetricsRecord r = t.step();
  EXPECT_EQ(r.tau, 0.0);
  EXPECT_EQ(r.reverb_threshold, 1.0);
  EXPECT_FALSE(r.enh.has_value());
  EXPECT_FALSE(t.student().has_enhancement_head());
}

TEST(Trainer, DeterministicAndResumable) {
  const TrainConfig cfg = tiny(Experiment::kC2);
  Trainer a(cfg, corpus(), banks());
  Trainer b(cfg, corpus(), banks());
  run(a);
  run(b);
  const std::string full = io::encode_checkpoint(a.checkpoint());
  EXPECT_EQ(full, io::encode_checkpoint(b.checkpoint()));

  Trainer half(cfg, corpus(), banks());
  run(half, {std::nullopt, 3, {}});
  const std::string mid = io::encode_checkpoint(half.checkpoint());
  Trainer resumed = Trainer::resume(io::decode_checkpoint(mid), corpus(), banks());
  EXPECT_EQ(resumed.iteration(), 3);
  run(resumed);
  EXPECT_EQ(io::encode_checkpoint(resumed.checkpoint()), full);
}

TEST(Trainer, TeacherFrozenAndExportIsEncoderOnly) {
  Trainer t(tiny(Experiment::kC1), corpus(), banks());
  const TrainResult r = run(t);
  EXPECT_EQ(r.teacher_checksum_before, r.teacher_checksum_after);
  EXPECT_EQ(r.metrics.size(), 6u);
  const io::Checkpoint ex = t.export_student();
  for (const auto& nm : ex.tensors) EXPECT_EQ(nm.name.rfind("encoder.", 0), 0u) << nm.name;
  const ExportedStudent loaded(io::decode_checkpoint(io::encode_checkpoint(ex)));
  const audio::Waveform w = corpus().front().waveform;
  EXPECT_EQ(loaded.representation(w).value(), t.student().representation(w).value());
}

TEST(Trainer, OutputDirectoryLayoutAndMetricsTruncationOnResume) {
  oracle::TempDir dir("train");
  const TrainConfig cfg = tiny(Experiment::kB);
  Trainer t(cfg, corpus(), banks());
  run(t, {dir.path(), 5, {}});
  EXPECT_TRUE(std::filesystem::exists(checkpoint_path(dir.path(), 3)));
  EXPECT_TRUE(std::filesystem::exists(checkpoint_path(dir.path(), 5)));
  EXPECT_FALSE(std::filesystem::exists(dir / "student_encoder.drck"));
  Trainer r = Trainer::resume(io::read_checkpoint(checkpoint_path(dir.path(), 3)), corpus(), banks());
  run(r, {dir.path(), std::nullopt, {}});
  const auto metrics = read_metrics(dir / "metrics.jsonl");
  ASSERT_EQ(metrics.size(), 6u);
  for (std::size_t i = 0; i < metrics.size(); ++i) EXPECT_EQ(metrics[i].iter, static_cast<std::int64_t>(i + 1));
  EXPECT_TRUE(std::filesystem::exists(dir / "student_encoder.drck"));
}

TEST(Trainer, DataErrorsNameTheUtterance) {
  auto c = corpus(3);
  c[1].waveform = audio::Waveform(c[1].waveform.samples(), 8000);
  try {
    Trainer t(tiny(Experiment::kB), c, banks());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("utt1"), std::string::npos);
  }
}

TEST(Trainer, InvalidConfigRejectedBeforeTraining) {
  TrainConfig cfg = tiny(Experiment::kA);
  cfg.curriculum = true;
  EXPECT_THROW(Trainer(cfg, corpus(), banks()), Error);
}

TEST(Trainer, StepPastEndIsContractError) {
  Trainer t(tiny(Experiment::kB, 1), corpus(), banks());
  t.step();
  EXPECT_TRUE(t.finished());
  EXPECT_THROW(t.step(), Error);
}

}  // namespace
}  // namespace distilrobust::train
