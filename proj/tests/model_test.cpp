// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/model.hpp"

#include <gtest/gtest.h>

#include <set>

#include "distilrobust/error.hpp"
#include "distilrobust/synthetic.hpp"

namespace distilrobust::model {
namespace {

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.dim = 8;
  cfg.teacher_layers = 4;
  cfg.student_layers = 2;
  cfg.rnn_hidden = 4;
  return cfg;
}

audio::Waveform utterance(Eigen::Index n = 3200) {
  return audio::Waveform(synthetic::speech_like(1, 5).front().samples().head(n));
}

TEST(ModelConfig, StridesMustMultiplyToFrameStride) {
  ModelConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.deconv_strides = {2, 2, 2, 2, 2, 2, 4};
  EXPECT_THROW(cfg.validate(), Error);
  cfg.deconv_strides = {2, 2, 2, 2, 2, 10};
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Teacher, DeterministicFromSeedWithOneMapPerLayer) {
  const TeacherSurrogate a(small_config(), 3), b(small_config(), 3), c(small_config(), 4);
  EXPECT_EQ(a.checksum(), b.checksum());
  EXPECT_NE(a.checksum(), c.checksum());
  const FeatureMaps maps = a.forward(utterance());
  ASSERT_EQ(maps.size(), 4u);
  for (const auto& [l, h] : maps) {
    EXPECT_EQ(h.rows(), 10);  // 3200 / 320
    EXPECT_EQ(h.cols(), 8);
    EXPECT_FALSE(h.requires_grad());
  }
}

TEST(Teacher, FrameCountFloorsPartialFrames) {
  const TeacherSurrogate t(small_config(), 1);
  EXPECT_EQ(t.forward(utterance(3519)).at(1).rows(), 10);
  EXPECT_EQ(frame_count(3519, 320), 10);
}

TEST(Teacher, RejectsWrongRateAndTooShortInput) {
  const TeacherSurrogate t(small_config(), 1);
  EXPECT_THROW(t.forward(audio::Waveform(Eigen::VectorXd::Ones(3200), 8000)), Error);
  EXPECT_THROW(t.forward(audio::Waveform(Eigen::VectorXd::Ones(100))), Error);
}

TEST(Student, InitialisedFromTeacherPrefix) {
  const TeacherSurrogate t(small_config(), 1);
  const StudentModel s = init_student_from_teacher(t, {{2, 4}, false, 9});
  const auto w = utterance();
  const auto teacher_layers = t.encoder().forward_layers(w);
  EXPECT_EQ(s.representation(w).value(), teacher_layers[1].value());
  EXPECT_EQ(s.encoder().depth(), 2u);
}

TEST(Student, ZeroDepthIsConfigError) {
  ModelConfig cfg = small_config();
  cfg.student_layers = 0;
  const TeacherSurrogate t(cfg, 1);
  try {
    init_student_from_teacher(t, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

TEST(Student, DistillLayersValidated) {
  const TeacherSurrogate t(small_config(), 1);
  EXPECT_THROW(init_student_from_teacher(t, {{}, false, 0}), Error);
  EXPECT_THROW(init_student_from_teacher(t, {{2, 2}, false, 0}), Error);
  EXPECT_THROW(init_student_from_teacher(t, {{5}, false, 0}), Error);
}

TEST(Student, OutputsShapesAndOptionalEnhancement) {
  const TeacherSurrogate t(small_config(), 1);
  const StudentModel with = init_student_from_teacher(t, {{2, 4}, true, 9});
  const StudentModel without = init_student_from_teacher(t, {{2, 4}, false, 9});
  const auto w = utterance(3300);
  const StudentOutput a = with.forward(w);
  ASSERT_TRUE(a.enhanced.has_value());
  EXPECT_EQ(a.enhanced->rows(), 1);
  EXPECT_EQ(a.enhanced->cols(), 3300);
  EXPECT_EQ(a.predictions.size(), 2u);
  EXPECT_FALSE(without.forward(w).enhanced.has_value());
  EXPECT_FALSE(with.forward(w, false).enhanced.has_value());
}

TEST(Student, ParameterNamesUniqueAndOrdered) {
  const TeacherSurrogate t(small_config(), 1);
  const StudentModel s = init_student_from_teacher(t, {{2, 4}, true, 9});
  std::set<std::string> seen;
  std::size_t encoder_count = 0;
  bool past_encoder = false;
  for (const auto& p : s.parameters()) {
    EXPECT_TRUE(seen.insert(p.name).second) << p.name;
    EXPECT_TRUE(p.tensor.requires_grad());
    const bool is_encoder = p.name.rfind("encoder.", 0) == 0;
    if (!is_encoder) past_encoder = true;
    EXPECT_FALSE(past_encoder && is_encoder) << "encoder parameter after heads: " << p.name;
    encoder_count += is_encoder;
  }
  EXPECT_EQ(encoder_count, s.encoder_parameters().size());
  EXPECT_TRUE(seen.count("head.4.weight"));
  EXPECT_TRUE(seen.count("enhancement.deconv.6.bias"));
  EXPECT_TRUE(seen.count("enhancement.rnn.backward.recurrent"));
}

TEST(Student, TrainingStudentLeavesTeacherUntouched) {
  const TeacherSurrogate t(small_config(), 1);
  const std::uint64_t before = t.checksum();
  const StudentModel s = init_student_from_teacher(t, {{2, 4}, false, 9});
  for (const auto& p : s.parameters()) {
    Tensor handle = p.tensor;
    handle.mutable_value().array() += 1.0;
  }
  EXPECT_EQ(t.checksum(), before);
}

TEST(Student, EnhancementHeadAbsentFromGraphWithoutIt) {
  const TeacherSurrogate t(small_config(), 1);
  const StudentModel s = init_student_from_teacher(t, {{2, 4}, true, 9});
  const StudentOutput out = s.forward(utterance(), false);
  sum(out.predictions.at(4)).backward();
  for (const auto& p : s.parameters())
    if (p.name.rfind("enhancement.", 0) == 0) {
      EXPECT_FALSE(p.tensor.has_grad()) << p.name;
    }
}

TEST(LoadValues, RoundTripAndStrictness) {
  const TeacherSurrogate t(small_config(), 1);
  const StudentModel a = init_student_from_teacher(t, {{2, 4}, false, 9});
  const StudentModel b = init_student_from_teacher(t, {{2, 4}, false, 10});
  std::map<std::string, Matrix> values;
  for (const auto& p : a.parameters()) values.emplace(p.name, p.tensor.value());
  load_values(b.parameters(), values);
  EXPECT_EQ(checksum(a.parameters()), checksum(b.parameters()));

  values.emplace("bogus", Matrix::Zero(1, 1));
  EXPECT_THROW(load_values(b.parameters(), values, true), Error);
  EXPECT_NO_THROW(load_values(b.parameters(), values, false));
}

TEST(EncoderFromValues, RebuildsRepresentation) {
  const TeacherSurrogate t(small_config(), 1);
  const StudentModel s = init_student_from_teacher(t, {{2, 4}, false, 9});
  std::map<std::string, Matrix> values;
  for (const auto& p : s.encoder_parameters()) values.emplace(p.name, p.tensor.value());
  const Encoder e = encoder_from_values(small_config(), values);
  const auto w = utterance();
  EXPECT_EQ(e.forward(w).value(), s.representation(w).value());
}

}  // namespace
}  // namespace distilrobust::model
