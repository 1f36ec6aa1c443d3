// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/config.hpp"

#include <cmath>
#include <json.hpp>
#include <set>

#include "distilrobust/error.hpp"

namespace distilrobust {

using nlohmann::json;

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::kA: return "A";
    case Experiment::kB: return "B";
    case Experiment::kC1: return "C1";
    case Experiment::kC2: return "C2";
  }
  return "?";
}

Experiment parse_experiment(std::string_view name) {
  if (name == "A") return Experiment::kA;
  if (name == "B") return Experiment::kB;
  if (name == "C1") return Experiment::kC1;
  if (name == "C2") return Experiment::kC2;
  fail(ErrorKind::kValidation, "experiment: unknown preset '" + std::string(name) + "'");
}

std::int64_t default_warmup(std::int64_t total_iterations) {
  return total_iterations * kReferenceWarmup / kReferenceIterations;
}

namespace {

struct PresetSpec {
  bool curriculum;
  losses::EnhancementLoss enhancement;
  double lambda;
};

PresetSpec preset_spec(Experiment e) {
  using losses::EnhancementLoss;
  switch (e) {
    case Experiment::kA: return {false, EnhancementLoss::kNone, 0.0};
    case Experiment::kB: return {true, EnhancementLoss::kNone, 0.0};
    case Experiment::kC1: return {true, EnhancementLoss::kL1Wav, 10.0};
    case Experiment::kC2: return {true, EnhancementLoss::kL1Freq, 1.0};
  }
  return {false, EnhancementLoss::kNone, 0.0};
}

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  fail(ErrorKind::kValidation, field + ": " + why);
}

}  // namespace

TrainConfig preset(Experiment e, std::int64_t total_iterations) {
  TrainConfig cfg;
  const PresetSpec spec = preset_spec(e);
  cfg.experiment = e;
  cfg.total_iterations = total_iterations;
  cfg.warmup_iterations = default_warmup(total_iterations);
  cfg.augmentation = true;
  cfg.curriculum = spec.curriculum;
  cfg.enhancement_loss = spec.enhancement;
  cfg.lambda = spec.lambda;
  return cfg;
}

void validate(const TrainConfig& cfg) {
  const PresetSpec spec = preset_spec(cfg.experiment);
  const std::string exp(to_string(cfg.experiment));
  if (!cfg.augmentation)
    invalid("augmentation", "every preset trains on augmented input (experiment " + exp + ")");
  if (cfg.curriculum != spec.curriculum)
    invalid("curriculum", std::string("must be ") + (spec.curriculum ? "true" : "false") +
                              " for experiment " + exp);
  if (cfg.enhancement_loss != spec.enhancement)
    invalid("enhancement_loss", "must be " + std::string(losses::to_string(spec.enhancement)) +
                                    " for experiment " + exp);
  if (cfg.lambda != spec.lambda)
    invalid("lambda", "must be " + std::to_string(spec.lambda) + " for experiment " + exp);

  if (cfg.total_iterations <= 0) invalid("total_iterations", "must be positive");
  if (cfg.warmup_iterations < 0 || cfg.warmup_iterations >= cfg.total_iterations)
    invalid("warmup_iterations", "must lie in [0, total_iterations)");
  if (cfg.batch_size <= 0) invalid("batch_size", "must be positive");
  if (!(cfg.lr_peak > 0.0) || !std::isfinite(cfg.lr_peak))
    invalid("lr_peak", "must be positive and finite");
  if (cfg.distill_layers.empty()) invalid("distill_layers", "must not be empty");
  if (std::set<int>(cfg.distill_layers.begin(), cfg.distill_layers.end()).size() !=
      cfg.distill_layers.size())
    invalid("distill_layers", "contains duplicates");
  for (int l : cfg.distill_layers)
    if (l < 1 || l > cfg.model.teacher_layers)
      invalid("distill_layers", "layer " + std::to_string(l) + " outside 1.." +
                                    std::to_string(cfg.model.teacher_layers));
  if (cfg.crop_samples < cfg.model.frame_stride)
    invalid("crop_samples", "shorter than one frame");
  if (cfg.stft.window <= 0 || cfg.stft.hop <= 0 || cfg.stft.fft_size < cfg.stft.window)
    invalid("stft", "need window > 0, hop > 0, fft_size >= window");
  if (cfg.enhancement_loss == losses::EnhancementLoss::kL1Freq &&
      cfg.crop_samples < cfg.stft.window)
    invalid("crop_samples", "shorter than one STFT window");
  if (cfg.adamw.beta1 < 0 || cfg.adamw.beta1 >= 1) invalid("adamw.beta1", "must lie in [0, 1)");
  if (cfg.adamw.beta2 < 0 || cfg.adamw.beta2 >= 1) invalid("adamw.beta2", "must lie in [0, 1)");
  if (!(cfg.adamw.eps > 0)) invalid("adamw.eps", "must be positive");
  if (cfg.adamw.weight_decay < 0) invalid("adamw.weight_decay", "must be non-negative");
  if (cfg.checkpoint_every <= 0) invalid("checkpoint_every", "must be positive");
  if (cfg.grad_clip) invalid("grad_clip", "gradient clipping is not supported; use null");
  if (cfg.dropout) invalid("dropout", "dropout is not supported; use null");
  if (cfg.model.student_layers <= 0) invalid("model.student_layers", "must be positive");
  if (cfg.model.student_layers > cfg.model.teacher_layers)
    invalid("model.student_layers", "exceeds model.teacher_layers");
  try {
    cfg.model.validate();
  } catch (const Error& e) {
    fail(ErrorKind::kValidation, e.what());
  }
}

std::string to_json(const TrainConfig& cfg) {
  json j;
  j["experiment"] = std::string(to_string(cfg.experiment));
  j["total_iterations"] = cfg.total_iterations;
  j["batch_size"] = cfg.batch_size;
  j["lr_peak"] = cfg.lr_peak;
  j["warmup_iterations"] = cfg.warmup_iterations;
  j["lambda"] = cfg.lambda;
  j["enhancement_loss"] = std::string(losses::to_string(cfg.enhancement_loss));
  j["augmentation"] = cfg.augmentation;
  j["curriculum"] = cfg.curriculum;
  j["distill_layers"] = cfg.distill_layers;
  j["seeds"] = {{"data", cfg.seeds.data},
                {"teacher", cfg.seeds.teacher},
                {"student", cfg.seeds.student}};
  j["stft"] = {{"window", cfg.stft.window},
               {"hop", cfg.stft.hop},
               {"fft_size", cfg.stft.fft_size}};
  j["model"] = {{"dim", cfg.model.dim},
                {"ffn_multiplier", cfg.model.ffn_multiplier},
                {"teacher_layers", cfg.model.teacher_layers},
                {"student_layers", cfg.model.student_layers},
                {"frame_stride", cfg.model.frame_stride},
                {"sample_rate_hz", cfg.model.sample_rate_hz},
                {"rnn_hidden", cfg.model.rnn_hidden},
                {"rnn_cell", std::string(to_string(cfg.model.rnn_cell))},
                {"deconv_strides", cfg.model.deconv_strides},
                {"gelu_on_output", cfg.model.gelu_on_output}};
  j["adamw"] = {{"beta1", cfg.adamw.beta1},
                {"beta2", cfg.adamw.beta2},
                {"eps", cfg.adamw.eps},
                {"weight_decay", cfg.adamw.weight_decay}};
  j["crop_samples"] = cfg.crop_samples;
  j["normalize_kd_by_frames"] = cfg.normalize_kd_by_frames;
  j["a4_order"] = cfg.a4_order == augment::CompositionOrder::kNoiseThenReverb
                      ? "noise_then_reverb"
                      : "reverb_then_noise";
  j["narrowband_white_noise"] = cfg.narrowband_white_noise;
  j["parallel_augmentation"] = cfg.parallel_augmentation;
  j["checkpoint_every"] = cfg.checkpoint_every;
  j["grad_clip"] = cfg.grad_clip ? json(*cfg.grad_clip) : json(nullptr);
  j["dropout"] = cfg.dropout ? json(*cfg.dropout) : json(nullptr);
  j["data"] = {{"speech_manifest", cfg.data.speech_manifest},
               {"noise_manifest", cfg.data.noise_manifest},
               {"rir_manifest", cfg.data.rir_manifest}};
  return j.dump(2);
}

namespace {

// Reads obj[key] into `out` when present and non-null; reports the dotted path.
class Reader {
 public:
  Reader(const json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) invalid(prefix_.empty() ? "config" : prefix_, "must be an object");
  }

  template <typename T>
  bool read(const char* key, T& out) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return false;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      invalid(path(key), "has the wrong type");
    }
    return true;
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  void reject_unknown() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) invalid(path(it.key().c_str()), "unknown field");
  }

  std::string path(const char* key) const {
    return prefix_.empty() ? std::string(key) : prefix_ + "." + key;
  }

 private:
  const json& obj_;
  std::string prefix_;
  std::set<std::string> seen_;
};

}  // namespace

TrainConfig config_from_json(std::string_view text, std::optional<Seed> fallback_seed) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kValidation, std::string("config is not valid JSON: ") + e.what());
  }
  Reader r(root, "");
  std::string exp_name;
  if (!r.read("experiment", exp_name)) invalid("experiment", "is required");
  const Experiment exp = parse_experiment(exp_name);
  std::int64_t total = 2000;
  r.read("total_iterations", total);
  TrainConfig cfg = preset(exp, total);

  r.read("batch_size", cfg.batch_size);
  r.read("lr_peak", cfg.lr_peak);
  r.read("warmup_iterations", cfg.warmup_iterations);
  r.read("lambda", cfg.lambda);
  std::string enh;
  if (r.read("enhancement_loss", enh)) {
    try {
      cfg.enhancement_loss = losses::parse_enhancement_loss(enh);
    } catch (const Error&) {
      invalid("enhancement_loss", "unknown value '" + enh + "'");
    }
  }
  r.read("augmentation", cfg.augmentation);
  r.read("curriculum", cfg.curriculum);
  r.read("distill_layers", cfg.distill_layers);

  if (fallback_seed) cfg.seeds = {*fallback_seed, *fallback_seed, *fallback_seed};
  if (const json* s = r.child("seeds")) {
    Reader sr(*s, "seeds");
    sr.read("data", cfg.seeds.data);
    sr.read("teacher", cfg.seeds.teacher);
    sr.read("student", cfg.seeds.student);
    sr.reject_unknown();
  }
  if (const json* s = r.child("stft")) {
    Reader sr(*s, "stft");
    sr.read("window", cfg.stft.window);
    sr.read("hop", cfg.stft.hop);
    sr.read("fft_size", cfg.stft.fft_size);
    sr.reject_unknown();
  }
  if (const json* m = r.child("model")) {
    Reader mr(*m, "model");
    mr.read("dim", cfg.model.dim);
    mr.read("ffn_multiplier", cfg.model.ffn_multiplier);
    mr.read("teacher_layers", cfg.model.teacher_layers);
    mr.read("student_layers", cfg.model.student_layers);
    mr.read("frame_stride", cfg.model.frame_stride);
    mr.read("sample_rate_hz", cfg.model.sample_rate_hz);
    mr.read("rnn_hidden", cfg.model.rnn_hidden);
    std::string cell;
    if (mr.read("rnn_cell", cell)) {
      try {
        cfg.model.rnn_cell = parse_recurrent_cell(cell);
      } catch (const Error&) {
        invalid("model.rnn_cell", "unknown value '" + cell + "'");
      }
    }
    mr.read("deconv_strides", cfg.model.deconv_strides);
    mr.read("gelu_on_output", cfg.model.gelu_on_output);
    mr.reject_unknown();
  }
  if (const json* a = r.child("adamw")) {
    Reader ar(*a, "adamw");
    ar.read("beta1", cfg.adamw.beta1);
    ar.read("beta2", cfg.adamw.beta2);
    ar.read("eps", cfg.adamw.eps);
    ar.read("weight_decay", cfg.adamw.weight_decay);
    ar.reject_unknown();
  }
  r.read("crop_samples", cfg.crop_samples);
  r.read("normalize_kd_by_frames", cfg.normalize_kd_by_frames);
  std::string order;
  if (r.read("a4_order", order)) {
    if (order == "noise_then_reverb")
      cfg.a4_order = augment::CompositionOrder::kNoiseThenReverb;
    else if (order == "reverb_then_noise")
      cfg.a4_order = augment::CompositionOrder::kReverbThenNoise;
    else
      invalid("a4_order", "unknown value '" + order + "'");
  }
  r.read("narrowband_white_noise", cfg.narrowband_white_noise);
  r.read("parallel_augmentation", cfg.parallel_augmentation);
  r.read("checkpoint_every", cfg.checkpoint_every);
  double v = 0.0;
  if (r.read("grad_clip", v)) cfg.grad_clip = v;
  if (r.read("dropout", v)) cfg.dropout = v;
  if (const json* d = r.child("data")) {
    Reader dr(*d, "data");
    dr.read("speech_manifest", cfg.data.speech_manifest);
    dr.read("noise_manifest", cfg.data.noise_manifest);
    dr.read("rir_manifest", cfg.data.rir_manifest);
    dr.reject_unknown();
  }
  r.reject_unknown();
  validate(cfg);
  return cfg;
}

}  // namespace distilrobust
