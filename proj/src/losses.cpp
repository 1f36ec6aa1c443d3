// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/losses.hpp"

#include <cmath>
#include <string>

#include "distilrobust/error.hpp"

namespace distilrobust::losses {

KdLoss kd_loss(const model::FeatureMaps& teacher, const model::FeatureMaps& student,
               std::span<const int> layers, const KdOptions& options) {
  if (layers.empty()) fail(ErrorKind::kConfig, "kd_loss: empty layer set");
  KdLoss out;
  Tensor total;
  for (int l : layers) {
    auto t_it = teacher.find(l);
    auto s_it = student.find(l);
    if (t_it == teacher.end())
      fail(ErrorKind::kLookup, "kd_loss: teacher has no layer " + std::to_string(l));
    if (s_it == student.end())
      fail(ErrorKind::kLookup, "kd_loss: student has no layer " + std::to_string(l));
    const Tensor& h = t_it->second;
    const Tensor& h_hat = s_it->second;
    if (h.rows() != h_hat.rows() || h.cols() != h_hat.cols())
      fail(ErrorKind::kShape, "kd_loss: layer " + std::to_string(l) + " teacher " +
                                  std::to_string(h.rows()) + "x" + std::to_string(h.cols()) +
                                  " vs student " + std::to_string(h_hat.rows()) + "x" +
                                  std::to_string(h_hat.cols()));
    const auto frames = static_cast<double>(h.rows());
    // sum_t |.|_1 / D == T * mean|.|
    Tensor l1 = scale(frames, l1_distance(h, h_hat));
    Tensor cos = scale(-1.0, sum(log(sigmoid(cosine_sim_rows(h, h_hat)))));
    Tensor layer_loss = add(l1, cos);
    if (options.normalize_by_frames) layer_loss = scale(1.0 / frames, layer_loss);
    const double norm = options.normalize_by_frames ? frames : 1.0;
    out.l1 += l1.item() / norm;
    out.cos += cos.item() / norm;
    total = total.defined() ? add(total, layer_loss) : layer_loss;
  }
  out.total = total;
  return out;
}

namespace {

void require_same_length(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorKind::kShape, std::string(op) + ": lengths " + std::to_string(a.size()) +
                                " and " + std::to_string(b.size()) + " differ");
}

}  // namespace

Tensor l1_wav(const Tensor& enhanced, const Tensor& clean) {
  require_same_length(enhanced, clean, "l1_wav");
  return l1_distance(enhanced, clean);
}

Tensor l1_freq(const Tensor& enhanced, const Tensor& clean, const StftParams& stft) {
  require_same_length(enhanced, clean, "l1_freq");
  if (enhanced.cols() < stft.window)
    fail(ErrorKind::kLength, "l1_freq: signal shorter than one STFT window");
  return l1_distance(stft_mag(enhanced, stft), stft_mag(clean, stft));
}

std::string_view to_string(EnhancementLoss loss) {
  switch (loss) {
    case EnhancementLoss::kNone: return "none";
    case EnhancementLoss::kL1Wav: return "l1_wav";
    case EnhancementLoss::kL1Freq: return "l1_freq";
  }
  return "none";
}

EnhancementLoss parse_enhancement_loss(std::string_view name) {
  if (name == "none") return EnhancementLoss::kNone;
  if (name == "l1_wav") return EnhancementLoss::kL1Wav;
  if (name == "l1_freq") return EnhancementLoss::kL1Freq;
  fail(ErrorKind::kValidation, "enhancement_loss: unknown value '" + std::string(name) + "'");
}

double default_lambda(EnhancementLoss loss) {
  switch (loss) {
    case EnhancementLoss::kNone: return 0.0;
    case EnhancementLoss::kL1Wav: return 10.0;
    case EnhancementLoss::kL1Freq: return 1.0;
  }
  return 0.0;
}

CombinedLoss combined_loss(const KdLoss& kd, const std::optional<Tensor>& enh,
                           double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0)
    fail(ErrorKind::kNumeric, "lambda must be finite and non-negative");
  const double kd_value = kd.total.item();
  if (!std::isfinite(kd_value)) fail(ErrorKind::kNumeric, "non-finite distillation loss");
  CombinedLoss out;
  out.breakdown.kd_total = kd_value;
  out.breakdown.kd_l1 = kd.l1;
  out.breakdown.kd_cos = kd.cos;
  out.breakdown.lambda = lambda;
  if (enh) {
    const double e = enh->item();
    if (!std::isfinite(e)) fail(ErrorKind::kNumeric, "non-finite enhancement loss");
    out.breakdown.enh = e;
    out.total = scale_add(1.0, kd.total, lambda, *enh);
  } else {
    out.total = kd.total;
  }
  out.breakdown.combined = out.total.item();
  return out;
}

}  // namespace distilrobust::losses
