// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/config.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include "distilrobust/error.hpp"

namespace distilrobust {
namespace {

using nlohmann::json;

std::string validation_message(const std::string& text) {
  try {
    config_from_json(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kValidation);
    return e.what();
  }
  ADD_FAILURE() << "accepted: " << text;
  return "";
}

struct PresetRow {
  Experiment e;
  bool curriculum;
  losses::EnhancementLoss enh;
  double lambda;
};

TEST(Presets, ExactCombinations) {
  const PresetRow rows[] = {
      {Experiment::kA, false, losses::EnhancementLoss::kNone, 0.0},
      {Experiment::kB, true, losses::EnhancementLoss::kNone, 0.0},
      {Experiment::kC1, true, losses::EnhancementLoss::kL1Wav, 10.0},
      {Experiment::kC2, true, losses::EnhancementLoss::kL1Freq, 1.0},
  };
  for (const auto& r : rows) {
    const TrainConfig cfg = preset(r.e);
    EXPECT_TRUE(cfg.augmentation);
    EXPECT_EQ(cfg.curriculum, r.curriculum);
    EXPECT_EQ(cfg.enhancement_loss, r.enh);
    EXPECT_EQ(cfg.lambda, r.lambda);
    EXPECT_NO_THROW(validate(cfg));
    EXPECT_EQ(parse_experiment(to_string(r.e)), r.e);
  }
}

TEST(Presets, WarmupKeepsReferenceRatio) {
  EXPECT_EQ(default_warmup(kReferenceIterations), kReferenceWarmup);
  EXPECT_EQ(default_warmup(2000), 140);
  EXPECT_EQ(preset(Experiment::kB, 200).warmup_iterations, 14);
}

TEST(Validate, EveryPresetViolationNamesItsField) {
  for (Experiment e : {Experiment::kA, Experiment::kB, Experiment::kC1, Experiment::kC2}) {
    TrainConfig cfg = preset(e);
    cfg.curriculum = !cfg.curriculum;
    EXPECT_THROW(validate(cfg), Error);

    cfg = preset(e);
    cfg.lambda += 1.0;
    try {
      validate(cfg);
      ADD_FAILURE();
    } catch (const Error& err) {
      EXPECT_NE(std::string(err.what()).find("lambda"), std::string::npos);
    }

    cfg = preset(e);
    cfg.augmentation = false;
    EXPECT_THROW(validate(cfg), Error);

    for (auto enh : {losses::EnhancementLoss::kNone, losses::EnhancementLoss::kL1Wav,
                     losses::EnhancementLoss::kL1Freq}) {
      cfg = preset(e);
      if (enh == cfg.enhancement_loss) continue;
      cfg.enhancement_loss = enh;
      EXPECT_THROW(validate(cfg), Error);
    }
  }
}

TEST(Json, RoundTripIsStable) {
  TrainConfig cfg = preset(Experiment::kC2, 321);
  cfg.seeds = {1, 2, 3};
  cfg.model.rnn_cell = RecurrentCell::kGated;
  cfg.a4_order = augment::CompositionOrder::kReverbThenNoise;
  const std::string text = to_json(cfg);
  EXPECT_EQ(to_json(config_from_json(text)), text);
}

TEST(Json, UnsetOptionsAreExplicitNulls) {
  const json j = json::parse(to_json(preset(Experiment::kA)));
  ASSERT_TRUE(j.contains("grad_clip"));
  EXPECT_TRUE(j["grad_clip"].is_null());
  EXPECT_TRUE(j["dropout"].is_null());
}

TEST(Json, MinimalDocumentTakesPreset) {
  const TrainConfig cfg = config_from_json(R"({"experiment": "C2"})");
  EXPECT_EQ(cfg.lambda, 1.0);
  EXPECT_EQ(cfg.enhancement_loss, losses::EnhancementLoss::kL1Freq);
}

TEST(Json, PresetAWithCurriculumIsRejected) {
  const std::string msg = validation_message(R"({"experiment": "A", "curriculum": true})");
  EXPECT_NE(msg.find("curriculum"), std::string::npos);
}

TEST(Json, BadDocumentsNameTheField) {
  EXPECT_NE(validation_message(R"({"curriculum": true})").find("experiment"), std::string::npos);
  EXPECT_NE(validation_message(R"({"experiment": "C1", "lr_peek": 1})").find("lr_peek"),
            std::string::npos);
  EXPECT_NE(validation_message(R"({"experiment": "C1", "model": {"dimm": 3}})").find("dimm"),
            std::string::npos);
  EXPECT_NE(validation_message(R"({"experiment": "C1", "batch_size": "four"})").find("batch_size"),
            std::string::npos);
  EXPECT_NE(validation_message(R"({"experiment": "C1", "grad_clip": 1.0})").find("grad_clip"),
            std::string::npos);
  EXPECT_NE(validation_message(R"({"experiment": "B", "distill_layers": [4, 13]})")
                .find("distill_layers"),
            std::string::npos);
  EXPECT_NE(validation_message(R"({"experiment": "B", "model": {"student_layers": 0}})")
                .find("student_layers"),
            std::string::npos);
  EXPECT_THROW(config_from_json("not json"), Error);
}

TEST(Json, NullSeedsTakeFallback) {
  const TrainConfig cfg =
      config_from_json(R"({"experiment": "B", "seeds": {"data": null, "teacher": 5, "student": null}})", 77);
  EXPECT_EQ(cfg.seeds.data, 77u);
  EXPECT_EQ(cfg.seeds.teacher, 5u);
  EXPECT_EQ(cfg.seeds.student, 77u);
}

}  // namespace
}  // namespace distilrobust
