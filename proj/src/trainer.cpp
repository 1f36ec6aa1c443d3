// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/trainer.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "distilrobust/error.hpp"
#include "distilrobust/losses.hpp"

namespace distilrobust::train {

using nlohmann::json;

double lr_at(std::int64_t iteration, const TrainConfig& cfg) {
  const std::int64_t n = cfg.total_iterations;
  const std::int64_t w = cfg.warmup_iterations;
  if (iteration < 0 || iteration > n)
    fail(ErrorKind::kParameter, "lr_at: iteration " + std::to_string(iteration) +
                                    " outside [0, " + std::to_string(n) + "]");
  if (iteration <= w) {
    if (w == 0) return cfg.lr_peak;
    return cfg.lr_peak * static_cast<double>(iteration) / static_cast<double>(w);
  }
  return cfg.lr_peak * static_cast<double>(n - iteration) / static_cast<double>(n - w);
}

void adamw_step(Matrix& param, const Matrix& grad, AdamWMoments& moments,
                std::int64_t step, double lr, const AdamWConfig& hp) {
  if (grad.rows() != param.rows() || grad.cols() != param.cols())
    fail(ErrorKind::kShape, "adamw_step: gradient shape differs from parameter");
  if (moments.first.size() == 0) moments.first = Matrix::Zero(param.rows(), param.cols());
  if (moments.second.size() == 0) moments.second = Matrix::Zero(param.rows(), param.cols());
  if (moments.first.rows() != param.rows() || moments.first.cols() != param.cols() ||
      moments.second.rows() != param.rows() || moments.second.cols() != param.cols())
    fail(ErrorKind::kShape, "adamw_step: moment shape differs from parameter");
  if (step < 1) fail(ErrorKind::kParameter, "adamw_step: step is 1-based");

  moments.first = hp.beta1 * moments.first + (1.0 - hp.beta1) * grad;
  moments.second =
      hp.beta2 * moments.second + (1.0 - hp.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(step));
  param *= 1.0 - lr * hp.weight_decay;
  param.array() -= lr * (moments.first.array() / c1) /
                   ((moments.second.array() / c2).sqrt() + hp.eps);
}

void AdamW::step(const model::Parameters& params, double lr) {
  ++steps_;
  for (const auto& [name, t] : params) {
    Tensor handle = t;
    const Matrix grad = handle.grad();
    adamw_step(handle.mutable_value(), grad, moments_[name], steps_, lr, hp_);
  }
}

void AdamW::restore(std::int64_t steps, std::map<std::string, AdamWMoments> moments) {
  steps_ = steps;
  moments_ = std::move(moments);
}

// ---------------------------------------------------------------------------
// Metrics

namespace {

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::string to_jsonl(const MetricsRecord& r) {
  json j;
  j["iter"] = r.iter;
  j["lr"] = r.lr;
  j["kd_l1"] = r.kd_l1;
  j["kd_cos"] = r.kd_cos;
  j["kd_total"] = r.kd_total;
  j["enh"] = optional_number(r.enh);
  j["combined"] = r.combined;
  j["smoothed"] = r.smoothed;
  j["lambda"] = r.lambda;
  json counts;
  for (int a = 0; a < augment::kNumActions; ++a)
    counts[std::string(augment::to_string(static_cast<augment::Action>(a)))] =
        r.action_counts[static_cast<std::size_t>(a)];
  j["action_counts"] = counts;
  j["tau"] = r.tau;
  j["reverb_threshold"] = r.reverb_threshold;
  return j.dump();
}

MetricsRecord metrics_from_json(std::string_view line) {
  MetricsRecord r;
  try {
    const json j = json::parse(line);
    r.iter = j.at("iter").get<std::int64_t>();
    r.lr = j.at("lr").get<double>();
    r.kd_l1 = j.value("kd_l1", 0.0);
    r.kd_cos = j.value("kd_cos", 0.0);
    r.kd_total = j.value("kd_total", r.kd_l1 + r.kd_cos);
    if (j.contains("enh") && !j["enh"].is_null()) r.enh = j["enh"].get<double>();
    r.combined = j.at("combined").get<double>();
    r.smoothed = j.value("smoothed", r.combined);
    r.lambda = j.value("lambda", 0.0);
    if (j.contains("action_counts"))
      for (int a = 0; a < augment::kNumActions; ++a)
        r.action_counts[static_cast<std::size_t>(a)] = j["action_counts"].value(
            std::string(augment::to_string(static_cast<augment::Action>(a))), 0);
    r.tau = j.at("tau").get<double>();
    r.reverb_threshold = j.at("reverb_threshold").get<double>();
  } catch (const json::exception& e) {
    fail(ErrorKind::kValidation, std::string("bad metrics record: ") + e.what());
  }
  return r;
}

std::vector<MetricsRecord> read_metrics(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  std::istringstream in(text);
  std::vector<MetricsRecord> out;
  std::string line;
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos)
      out.push_back(metrics_from_json(line));
  return out;
}

// ---------------------------------------------------------------------------
// Trainer

namespace {

model::StudentOptions student_options(const TrainConfig& cfg) {
  return {cfg.distill_layers, cfg.enhancement_loss != losses::EnhancementLoss::kNone,
          cfg.seeds.student};
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

void check_data(const TrainConfig& cfg, const std::vector<data::Utterance>& corpus,
                const augment::Banks& banks) {
  if (corpus.empty()) fail(ErrorKind::kValidation, "training corpus is empty");
  if (cfg.augmentation && (banks.noises.empty() || banks.rirs.empty()))
    fail(ErrorKind::kValidation, "augmentation needs nonempty noise and RIR banks");
  for (const auto& u : corpus) {
    if (u.waveform.sample_rate_hz() != cfg.model.sample_rate_hz)
      fail(ErrorKind::kRate, u.id + ": sample rate " +
                                 std::to_string(u.waveform.sample_rate_hz()) +
                                 " Hz, expected " + std::to_string(cfg.model.sample_rate_hz));
    if (u.waveform.size() < cfg.model.frame_stride)
      fail(ErrorKind::kLength, u.id + ": shorter than one frame");
  }
}

}  // namespace

Trainer::Trainer(TrainConfig cfg, std::vector<data::Utterance> corpus, augment::Banks banks)
    : cfg_((validate(cfg), std::move(cfg))),
      corpus_(std::move(corpus)),
      banks_(std::move(banks)),
      teacher_(cfg_.model, cfg_.seeds.teacher),
      student_(model::init_student_from_teacher(teacher_, student_options(cfg_))),
      optimizer_(cfg_.adamw) {
  check_data(cfg_, corpus_, banks_);
}

std::vector<std::size_t> Trainer::batch_indices(std::int64_t k) const {
  const std::size_t n = corpus_.size();
  const auto b = static_cast<std::size_t>(cfg_.batch_size);
  std::vector<std::size_t> out;
  out.reserve(b);
  std::int64_t cached_epoch = -1;
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < b; ++j) {
    const auto pos = static_cast<std::uint64_t>(k - 1) * b + j;
    const auto epoch = static_cast<std::int64_t>(pos / n);
    if (epoch != cached_epoch) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      Rng rng = make_rng(derive_seed({cfg_.seeds.data, 0xe90c, static_cast<std::uint64_t>(epoch)}));
      std::shuffle(perm.begin(), perm.end(), rng);
      cached_epoch = epoch;
    }
    out.push_back(perm[pos % n]);
  }
  return out;
}

MetricsRecord Trainer::step() {
  if (finished()) fail(ErrorKind::kContract, "training already finished");
  const std::int64_t k = iteration_ + 1;
  const std::int64_t n_total = cfg_.total_iterations;
  const augment::CurriculumState state =
      cfg_.curriculum ? augment::CurriculumState(iteration_, n_total)
                      : augment::CurriculumState::disabled(n_total);

  MetricsRecord rec;
  rec.iter = k;
  rec.lr = lr_at(k, cfg_);
  rec.lambda = cfg_.lambda;
  rec.tau = augment::snr_lower_bound(state);
  rec.reverb_threshold = augment::reverb_threshold(state);

  // Crops.
  const auto indices = batch_indices(k);
  std::vector<audio::Waveform> clean;
  std::vector<std::string> ids;
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const auto& utt = corpus_[indices[j]];
    const Eigen::Index len = std::min<Eigen::Index>(cfg_.crop_samples, utt.waveform.size());
    Rng rng = make_rng(derive_seed({cfg_.seeds.data, 0xc409, static_cast<std::uint64_t>(k), j}));
    std::uniform_int_distribution<Eigen::Index> pick(0, utt.waveform.size() - len);
    clean.emplace_back(utt.waveform.samples().segment(pick(rng), len),
                       utt.waveform.sample_rate_hz());
    ids.push_back(utt.id);
  }

  // Augmentation.
  const Seed master = derive_seed({cfg_.seeds.data, 0xa06, static_cast<std::uint64_t>(k)});
  const augment::ApplyOptions apply{cfg_.a4_order, cfg_.narrowband_white_noise};
  std::vector<audio::Waveform> noisy;
  if (cfg_.augmentation) {
    try {
      for (auto& a : augment::augment_batch(clean, state, banks_, master, apply,
                                            cfg_.parallel_augmentation)) {
        rec.action_counts[static_cast<std::size_t>(augment::index_of(a.plan.action))]++;
        noisy.push_back(std::move(a.waveform));
      }
    } catch (const Error& e) {
      for (std::size_t j = 0; j < clean.size(); ++j) {
        try {
          const auto plan = augment::sample_plan(state, banks_.noises.size(), banks_.rirs.size(),
                                                 augment::utterance_seed(master, state.iteration, j));
          augment::apply_plan(clean[j], plan, banks_, apply);
        } catch (const Error& inner) {
          throw Error(inner.kind(), "utterance " + ids[j] + " at iteration " +
                                        std::to_string(k) + ": " + inner.what());
        }
      }
      throw;
    }
  } else {
    noisy = clean;
    rec.action_counts[0] = static_cast<int>(clean.size());
  }

  // Forward and backward.
  const model::Parameters params = student_.parameters();
  for (const auto& p : params) {
    Tensor handle = p.tensor;
    handle.zero_grad();
  }
  const bool enhance = cfg_.enhancement_loss != losses::EnhancementLoss::kNone;
  const losses::KdOptions kd_opts{cfg_.normalize_kd_by_frames};
  Tensor total;
  double enh_sum = 0.0;
  for (std::size_t j = 0; j < clean.size(); ++j) {
    try {
      const model::FeatureMaps targets = teacher_.forward(clean[j]);
      const model::StudentOutput out = student_.forward(noisy[j], enhance);
      const losses::KdLoss kd =
          losses::kd_loss(targets, out.predictions, cfg_.distill_layers, kd_opts);
      std::optional<Tensor> enh;
      if (enhance) {
        const Tensor target(Matrix(clean[j].samples().transpose()));
        enh = cfg_.enhancement_loss == losses::EnhancementLoss::kL1Wav
                  ? losses::l1_wav(*out.enhanced, target)
                  : losses::l1_freq(*out.enhanced, target, cfg_.stft);
      }
      const losses::CombinedLoss c = losses::combined_loss(kd, enh, cfg_.lambda);
      rec.kd_l1 += c.breakdown.kd_l1;
      rec.kd_cos += c.breakdown.kd_cos;
      rec.kd_total += c.breakdown.kd_total;
      if (c.breakdown.enh) enh_sum += *c.breakdown.enh;
      total = total.defined() ? add(total, c.total) : c.total;
    } catch (const Error& e) {
      throw Error(e.kind(), "utterance " + ids[j] + " at iteration " + std::to_string(k) +
                                ": " + e.what());
    }
  }
  const double inv_b = 1.0 / static_cast<double>(clean.size());
  const Tensor loss = scale(inv_b, total);
  loss.backward();
  optimizer_.step(params, rec.lr);

  rec.kd_l1 *= inv_b;
  rec.kd_cos *= inv_b;
  rec.kd_total *= inv_b;
  if (enhance) rec.enh = enh_sum * inv_b;
  rec.combined = loss.item();
  if (!std::isfinite(rec.combined))
    fail(ErrorKind::kNumeric, "non-finite loss at iteration " + std::to_string(k));

  recent_.push_back(rec.combined);
  while (recent_.size() > kSmoothingWindow) recent_.pop_front();
  rec.smoothed = std::accumulate(recent_.begin(), recent_.end(), 0.0) /
                 static_cast<double>(recent_.size());
  iteration_ = k;
  return rec;
}

io::Checkpoint Trainer::checkpoint() const {
  json meta;
  meta["kind"] = "train_state";
  meta["config"] = json::parse(to_json(cfg_));
  meta["iteration"] = iteration_;
  meta["optimizer_steps"] = optimizer_.steps();
  meta["recent_losses"] = std::vector<double>(recent_.begin(), recent_.end());
  meta["teacher_checksum"] = hex64(teacher_.checksum());

  io::Checkpoint ckpt;
  ckpt.metadata_json = meta.dump();
  for (const auto& [name, t] : student_.parameters()) ckpt.tensors.push_back({name, t.value()});
  for (const auto& [name, m] : optimizer_.moments()) {
    ckpt.tensors.push_back({"adamw.first/" + name, m.first});
    ckpt.tensors.push_back({"adamw.second/" + name, m.second});
  }
  return ckpt;
}

io::Checkpoint Trainer::export_student() const {
  json meta;
  meta["kind"] = "student_encoder";
  meta["config"] = json::parse(to_json(cfg_));
  meta["iteration"] = iteration_;
  io::Checkpoint ckpt;
  ckpt.metadata_json = meta.dump();
  for (const auto& [name, t] : student_.encoder_parameters())
    ckpt.tensors.push_back({name, t.value()});
  return ckpt;
}

Trainer Trainer::resume(const io::Checkpoint& ckpt, std::vector<data::Utterance> corpus,
                        augment::Banks banks) {
  json meta;
  try {
    meta = json::parse(ckpt.metadata_json);
  } catch (const json::exception&) {
    fail(ErrorKind::kFormat, "checkpoint metadata is not JSON");
  }
  if (meta.value("kind", "") != "train_state")
    fail(ErrorKind::kValidation, "not a training checkpoint");
  Trainer t(config_from_json(meta.at("config").dump()), std::move(corpus), std::move(banks));
  if (hex64(t.teacher_.checksum()) != meta.at("teacher_checksum").get<std::string>())
    fail(ErrorKind::kValidation, "teacher rebuilt from the config does not match the checkpoint");

  std::map<std::string, Matrix> values;
  std::map<std::string, AdamWMoments> moments;
  for (const auto& [name, m] : ckpt.tensors) {
    if (name.rfind("adamw.first/", 0) == 0)
      moments[name.substr(12)].first = m;
    else if (name.rfind("adamw.second/", 0) == 0)
      moments[name.substr(13)].second = m;
    else
      values.emplace(name, m);
  }
  model::load_values(t.student_.parameters(), values, true);
  t.optimizer_.restore(meta.at("optimizer_steps").get<std::int64_t>(), std::move(moments));
  t.iteration_ = meta.at("iteration").get<std::int64_t>();
  for (double v : meta.at("recent_losses")) t.recent_.push_back(v);
  return t;
}

std::filesystem::path checkpoint_path(const std::filesystem::path& dir,
                                      std::int64_t iteration) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt-%08" PRId64 ".drck", iteration);
  return dir / buf;
}

TrainResult run(Trainer& trainer, const TrainOptions& options) {
  TrainResult result;
  result.teacher_checksum_before = trainer.teacher().checksum();
  const auto& cfg = trainer.config();

  std::ofstream metrics;
  if (options.output_dir) {
    std::filesystem::create_directories(*options.output_dir);
    const auto path = *options.output_dir / "metrics.jsonl";
    // Keep only the history that precedes the starting point.
    std::string kept;
    if (trainer.iteration() > 0 && std::filesystem::exists(path)) {
      for (const auto& r : read_metrics(path))
        if (r.iter <= trainer.iteration()) kept += to_jsonl(r) + "\n";
    }
    metrics.open(path, std::ios::binary | std::ios::trunc);
    if (!metrics) fail(ErrorKind::kIo, "cannot open " + path.string());
    metrics << kept;
  }

  while (!trainer.finished() && (!options.stop_at || trainer.iteration() < *options.stop_at)) {
    MetricsRecord rec = trainer.step();
    if (metrics.is_open()) {
      metrics << to_jsonl(rec) << '\n';
      metrics.flush();
    }
    if (options.on_metrics) options.on_metrics(rec);
    if (options.output_dir && rec.iter % cfg.checkpoint_every == 0)
      io::write_checkpoint(trainer.checkpoint(), checkpoint_path(*options.output_dir, rec.iter));
    result.metrics.push_back(std::move(rec));
  }
  if (options.output_dir) {
    const auto last = checkpoint_path(*options.output_dir, trainer.iteration());
    if (!std::filesystem::exists(last) || trainer.iteration() % cfg.checkpoint_every != 0)
      io::write_checkpoint(trainer.checkpoint(), last);
    if (trainer.finished())
      io::write_checkpoint(trainer.export_student(), *options.output_dir / "student_encoder.drck");
  }
  result.teacher_checksum_after = trainer.teacher().checksum();
  return result;
}

ExportedStudent::ExportedStudent(const io::Checkpoint& ckpt) {
  json meta;
  try {
    meta = json::parse(ckpt.metadata_json);
  } catch (const json::exception&) {
    fail(ErrorKind::kFormat, "checkpoint metadata is not JSON");
  }
  config_ = config_from_json(meta.at("config").dump()).model;
  std::map<std::string, Matrix> values;
  for (const auto& [name, m] : ckpt.tensors) {
    if (name.rfind("encoder.", 0) != 0)
      fail(ErrorKind::kValidation, "exported student carries non-encoder tensor " + name);
    values.emplace(name, m);
  }
  encoder_ = model::encoder_from_values(config_, values);
}

Tensor ExportedStudent::representation(const audio::Waveform& input) const {
  if (input.sample_rate_hz() != config_.sample_rate_hz)
    fail(ErrorKind::kRate, "exported student expects " +
                               std::to_string(config_.sample_rate_hz) + " Hz input");
  return encoder_.forward(input);
}

}  // namespace distilrobust::train
