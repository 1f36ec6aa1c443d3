// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/augment.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "distilrobust/error.hpp"
#include "distilrobust/synthetic.hpp"

namespace distilrobust::augment {
namespace {

double tau_formula(std::int64_t it, std::int64_t n) {
  return it <= n / 2.0 ? 20.0 * (1.0 - 2.0 * it / static_cast<double>(n)) : 0.0;
}
double t_formula(std::int64_t it, std::int64_t n) {
  return it <= n / 2.0 ? 2.0 * it / static_cast<double>(n) : 1.0;
}

TEST(Curriculum, EndpointsExact) {
  for (std::int64_t n : {1, 2, 7, 1000, 200000}) {
    EXPECT_EQ(snr_lower_bound({0, n}), 20.0);
    EXPECT_EQ(reverb_threshold({0, n}), 0.0);
    EXPECT_EQ(snr_lower_bound({n, n}), 0.0);
    EXPECT_EQ(reverb_threshold({n, n}), 1.0);
    if (n % 2 == 0) {
      EXPECT_EQ(snr_lower_bound({n / 2, n}), 0.0);
      EXPECT_EQ(reverb_threshold({n / 2, n}), 1.0);
    }
  }
}

TEST(Curriculum, MatchesFormulaEverywhere) {
  for (std::int64_t n : {3, 10, 999, 1000}) {
    for (std::int64_t it = 0; it <= n; ++it) {
      EXPECT_NEAR(snr_lower_bound({it, n}), tau_formula(it, n), 1e-12);
      EXPECT_NEAR(reverb_threshold({it, n}), t_formula(it, n), 1e-12);
    }
  }
}

TEST(Curriculum, MonotoneAndBounded) {
  double prev_tau = 21.0, prev_t = -1.0;
  for (std::int64_t it = 0; it <= 501; ++it) {
    const double tau = snr_lower_bound({it, 501});
    const double t = reverb_threshold({it, 501});
    EXPECT_LE(tau, prev_tau);
    EXPECT_GE(t, prev_t);
    EXPECT_GE(tau, 0.0);
    EXPECT_LE(t, 1.0);
    prev_tau = tau;
    prev_t = t;
  }
}

TEST(Curriculum, DisabledIsPlainAugmentation) {
  const auto s = CurriculumState::disabled(100);
  EXPECT_EQ(snr_lower_bound(s), 0.0);
  EXPECT_EQ(reverb_threshold(s), 1.0);
}

TEST(Curriculum, RejectsOutOfRange) {
  EXPECT_THROW(CurriculumState(-1, 10), Error);
  EXPECT_THROW(CurriculumState(11, 10), Error);
  EXPECT_THROW(CurriculumState(0, 0), Error);
}

TEST(SamplePlan, DeterministicAndValid) {
  for (Seed s = 0; s < 2000; ++s) {
    const CurriculumState st(static_cast<std::int64_t>(s % 100), 100);
    const AugmentPlan p = sample_plan(st, 5, 3, s);
    EXPECT_EQ(p, sample_plan(st, 5, 3, s));
    EXPECT_NO_THROW(validate(p));
    if (p.snr_db) {
      EXPECT_GE(*p.snr_db, static_cast<int>(std::ceil(snr_lower_bound(st))));
      EXPECT_LE(*p.snr_db, 20);
    }
    if (p.noise_source && p.noise_source->file_index) {
      EXPECT_LT(*p.noise_source->file_index, 5u);
    }
    if (p.rir_index) {
      EXPECT_LT(*p.rir_index, 3u);
    }
  }
}

TEST(SamplePlan, FirstIterationForcesTwentyDbAndNoReverb) {
  for (Seed s = 0; s < 500; ++s) {
    const AugmentPlan p = sample_plan({0, 1000}, 4, 4, s);
    if (p.snr_db) {
      EXPECT_EQ(*p.snr_db, 20);
    }
    EXPECT_FALSE(p.reverb_applied);
  }
}

TEST(SamplePlan, LateTrainingAlwaysReverbsReverbActions) {
  for (Seed s = 0; s < 500; ++s) {
    const AugmentPlan p = sample_plan({600, 1000}, 4, 4, s);
    EXPECT_EQ(p.reverb_applied, may_reverb(p.action));
  }
}

TEST(SamplePlan, ReverbFrequencyTracksThreshold) {
  int reverb_actions = 0, applied = 0;
  for (Seed s = 0; s < 20000; ++s) {
    const AugmentPlan p = sample_plan({125, 1000}, 4, 4, s);  // t = 0.25
    if (may_reverb(p.action)) {
      ++reverb_actions;
      applied += p.reverb_applied;
    }
  }
  EXPECT_NEAR(static_cast<double>(applied) / reverb_actions, 0.25, 0.02);
}

TEST(SamplePlan, EmptyBanksRejected) {
  EXPECT_THROW(sample_plan({0, 10}, 0, 1, 1), Error);
  EXPECT_THROW(sample_plan({0, 10}, 1, 0, 1), Error);
}

TEST(Validate, RejectsInconsistentPlans) {
  AugmentPlan p;
  p.action = Action::kNoise;
  EXPECT_THROW(validate(p), Error);
  p.action = Action::kClean;
  p.reverb_applied = true;
  p.rir_index = 0;
  EXPECT_THROW(validate(p), Error);
}

class ApplyPlanTest : public ::testing::Test {
 protected:
  Banks banks = synthetic::banks(3, 3, 42);
  audio::Waveform clean = synthetic::speech_like(1, 7).front();
};

TEST_F(ApplyPlanTest, CleanActionIsIdentity) {
  AugmentPlan p;
  EXPECT_TRUE(apply_plan(clean, p, banks) == clean);
}

TEST_F(ApplyPlanTest, NoiseActionHitsRequestedSnr) {
  AugmentPlan p;
  p.action = Action::kNoise;
  p.snr_db = 5;
  p.noise_source = NoiseSource{1};
  p.seed = 99;
  const audio::Waveform y = apply_plan(clean, p, banks);
  const Eigen::VectorXd noise = y.samples() - clean.samples();
  EXPECT_NEAR(audio::snr_db(clean.samples(), noise), 5.0, 1e-9);
}

TEST_F(ApplyPlanTest, CompositionOrderMatters) {
  AugmentPlan p;
  p.action = Action::kNoiseReverb;
  p.snr_db = 0;
  p.noise_source = NoiseSource{};
  p.reverb_applied = true;
  p.rir_index = 2;
  p.seed = 5;
  const audio::Waveform a = apply_plan(clean, p, banks, {CompositionOrder::kNoiseThenReverb});
  const audio::Waveform b = apply_plan(clean, p, banks, {CompositionOrder::kReverbThenNoise});
  EXPECT_FALSE(a == b);
  EXPECT_TRUE(a == apply_plan(clean, p, banks));
}

TEST_F(ApplyPlanTest, BadBankIndexIsLookupError) {
  AugmentPlan p;
  p.action = Action::kReverb;
  p.reverb_applied = true;
  p.rir_index = 17;
  try {
    apply_plan(clean, p, banks);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kLookup);
  }
}

TEST_F(ApplyPlanTest, BatchParallelEqualsSerial) {
  const auto batch = synthetic::speech_like(6, 3);
  const CurriculumState st(40, 100);
  const auto serial = augment_batch(batch, st, banks, 1234, {}, false);
  const auto parallel = augment_batch(batch, st, banks, 1234, {}, true);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].plan, parallel[i].plan);
    EXPECT_TRUE(serial[i].waveform == parallel[i].waveform);
  }
}

TEST_F(ApplyPlanTest, BatchSeedsDifferPerIndexAndIteration) {
  const auto batch = synthetic::speech_like(2, 3);
  const auto a = augment_batch(batch, {10, 100}, banks, 1);
  const auto b = augment_batch(batch, {11, 100}, banks, 1);
  EXPECT_NE(a[0].plan.seed, a[1].plan.seed);
  EXPECT_NE(a[0].plan.seed, b[0].plan.seed);
}

}  // namespace
}  // namespace distilrobust::augment
