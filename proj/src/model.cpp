// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <set>

#include "distilrobust/error.hpp"

namespace distilrobust::model {

void ModelConfig::validate() const {
  auto positive = [](int v, const char* field) {
    if (v <= 0) fail(ErrorKind::kConfig, std::string(field) + " must be positive");
  };
  positive(dim, "model.dim");
  positive(ffn_multiplier, "model.ffn_multiplier");
  positive(teacher_layers, "model.teacher_layers");
  positive(frame_stride, "model.frame_stride");
  positive(sample_rate_hz, "model.sample_rate_hz");
  positive(rnn_hidden, "model.rnn_hidden");
  if (deconv_strides.size() != kDeconvLayers)
    fail(ErrorKind::kConfig, "model.deconv_strides must list exactly 7 strides");
  long product = 1;
  for (int s : deconv_strides) {
    positive(s, "model.deconv_strides");
    product *= s;
  }
  if (product != frame_stride)
    fail(ErrorKind::kConfig, "model.deconv_strides multiply to " +
                                 std::to_string(product) + ", expected frame_stride " +
                                 std::to_string(frame_stride));
}

std::uint64_t checksum(const Parameters& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [name, t] : params) {
    feed(name.data(), name.size());
    const std::int64_t shape[2] = {t.rows(), t.cols()};
    feed(shape, sizeof(shape));
    feed(t.value().data(), sizeof(double) * static_cast<std::size_t>(t.size()));
  }
  return h;
}

Eigen::Index frame_count(Eigen::Index samples, int frame_stride) {
  return samples / frame_stride;
}

Tensor FrontEnd::forward(const audio::Waveform& w) const {
  if (w.size() < stride)
    fail(ErrorKind::kLength, "input of " + std::to_string(w.size()) +
                                 " samples is shorter than one frame (" +
                                 std::to_string(stride) + ")");
  Tensor x(Matrix(w.samples().transpose()));
  return gelu(transpose(conv1d(x, weight, bias, stride)));
}

Tensor MixingBlock::forward(const Tensor& h) const {
  return add(h, linear(gelu(linear(h, fc1_weight, fc1_bias)), fc2_weight, fc2_bias));
}

Encoder::Encoder(FrontEnd front_end, std::vector<MixingBlock> blocks)
    : front_end_(std::move(front_end)), blocks_(std::move(blocks)) {}

std::vector<Tensor> Encoder::forward_layers(const audio::Waveform& w) const {
  std::vector<Tensor> out;
  out.reserve(blocks_.size());
  Tensor h = front_end_.forward(w);
  for (const auto& b : blocks_) {
    h = b.forward(h);
    out.push_back(h);
  }
  return out;
}

Tensor Encoder::forward(const audio::Waveform& w) const {
  Tensor h = front_end_.forward(w);
  for (const auto& b : blocks_) h = b.forward(h);
  return h;
}

Parameters Encoder::parameters() const {
  Parameters p{{"encoder.frontend.weight", front_end_.weight},
               {"encoder.frontend.bias", front_end_.bias}};
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string prefix = "encoder.layers." + std::to_string(i) + ".";
    p.push_back({prefix + "fc1.weight", blocks_[i].fc1_weight});
    p.push_back({prefix + "fc1.bias", blocks_[i].fc1_bias});
    p.push_back({prefix + "fc2.weight", blocks_[i].fc2_weight});
    p.push_back({prefix + "fc2.bias", blocks_[i].fc2_bias});
  }
  return p;
}

namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

Tensor trainable_copy(const Tensor& t) { return Tensor::parameter(t.value()); }

}  // namespace

TeacherSurrogate::TeacherSurrogate(ModelConfig config, Seed seed)
    : config_(std::move(config)), seed_(seed) {
  config_.validate();
  Rng rng = make_rng(derive_seed({seed, 0x7eac4e7}));
  const int d = config_.dim;
  const int f = config_.ffn_multiplier * d;
  FrontEnd fe;
  fe.stride = config_.frame_stride;
  fe.weight = Tensor(gaussian(d, config_.frame_stride,
                              2.0 / std::sqrt(config_.frame_stride), rng));
  fe.bias = Tensor(gaussian(d, 1, 0.1, rng));
  std::vector<MixingBlock> blocks;
  for (int l = 0; l < config_.teacher_layers; ++l) {
    MixingBlock b;
    b.fc1_weight = Tensor(gaussian(f, d, 1.0 / std::sqrt(d), rng));
    b.fc1_bias = Tensor(gaussian(1, f, 0.05, rng));
    b.fc2_weight = Tensor(gaussian(d, f, 0.5 / std::sqrt(f), rng));
    b.fc2_bias = Tensor(gaussian(1, d, 0.05, rng));
    blocks.push_back(std::move(b));
  }
  encoder_ = Encoder(std::move(fe), std::move(blocks));
}

FeatureMaps TeacherSurrogate::forward(const audio::Waveform& clean) const {
  if (clean.sample_rate_hz() != config_.sample_rate_hz)
    fail(ErrorKind::kRate, "teacher expects " + std::to_string(config_.sample_rate_hz) +
                               " Hz input");
  FeatureMaps maps;
  auto layers = encoder_.forward_layers(clean);
  for (std::size_t i = 0; i < layers.size(); ++i)
    maps.emplace(static_cast<int>(i) + 1, std::move(layers[i]));
  return maps;
}

std::uint64_t TeacherSurrogate::checksum() const {
  return model::checksum(encoder_.parameters());
}

EnhancementHead::EnhancementHead(const ModelConfig& config, Rng& rng)
    : cell_(config.rnn_cell), gelu_on_output_(config.gelu_on_output) {
  const int h = config.rnn_hidden;
  const int g = gate_count(cell_);
  const double rs = 1.0 / std::sqrt(h);
  auto direction = [&] {
    RecurrentWeights w;
    w.input = Tensor::parameter(gaussian(g * h, config.dim, rs, rng));
    w.recurrent = Tensor::parameter(gaussian(g * h, h, rs, rng));
    w.bias = Tensor::parameter(Matrix::Zero(1, g * h));
    return w;
  };
  rnn_.forward = direction();
  rnn_.backward = direction();

  int channels = 2 * h;
  for (std::size_t i = 0; i < config.deconv_strides.size(); ++i) {
    const int stride = config.deconv_strides[i];
    const int k = 2 * stride;
    const bool last = i + 1 == config.deconv_strides.size();
    const int out = last ? 1 : std::max(1, channels / 2);
    Deconv layer;
    layer.stride = stride;
    layer.weight = Tensor::parameter(
        gaussian(out, channels * k, 1.0 / std::sqrt(2.0 * channels), rng));
    layer.bias = Tensor::parameter(Matrix::Zero(out, 1));
    deconv_.push_back(std::move(layer));
    channels = out;
  }
}

Tensor EnhancementHead::forward(const Tensor& representation,
                                Eigen::Index samples) const {
  Tensor x = transpose(bidir_recurrent(representation, rnn_, cell_));
  for (std::size_t i = 0; i < deconv_.size(); ++i) {
    x = conv1d_transposed(x, deconv_[i].weight, deconv_[i].bias, deconv_[i].stride);
    if (i + 1 < deconv_.size() || gelu_on_output_) x = gelu(x);
  }
  if (x.cols() < samples)
    fail(ErrorKind::kLength, "enhancement head produced " + std::to_string(x.cols()) +
                                 " samples, need " + std::to_string(samples));
  return slice_cols(x, 0, samples);
}

Parameters EnhancementHead::parameters() const {
  Parameters p;
  for (const auto& [dir, w] : {std::pair{"forward", &rnn_.forward},
                               std::pair{"backward", &rnn_.backward}}) {
    const std::string prefix = std::string("enhancement.rnn.") + dir + ".";
    p.push_back({prefix + "input", w->input});
    p.push_back({prefix + "recurrent", w->recurrent});
    p.push_back({prefix + "bias", w->bias});
  }
  for (std::size_t i = 0; i < deconv_.size(); ++i) {
    const std::string prefix = "enhancement.deconv." + std::to_string(i) + ".";
    p.push_back({prefix + "weight", deconv_[i].weight});
    p.push_back({prefix + "bias", deconv_[i].bias});
  }
  return p;
}

StudentModel::StudentModel(const ModelConfig& config, Encoder encoder,
                           const StudentOptions& options)
    : config_(config),
      encoder_(std::move(encoder)),
      distill_layers_(options.distill_layers) {
  config_.validate();
  if (distill_layers_.empty())
    fail(ErrorKind::kConfig, "distill_layers must not be empty");
  if (std::set<int>(distill_layers_.begin(), distill_layers_.end()).size() !=
      distill_layers_.size())
    fail(ErrorKind::kConfig, "distill_layers contains duplicates");
  for (int l : distill_layers_)
    if (l < 1 || l > config_.teacher_layers)
      fail(ErrorKind::kConfig, "distill layer " + std::to_string(l) +
                                   " outside the teacher's 1.." +
                                   std::to_string(config_.teacher_layers));

  Rng rng = make_rng(derive_seed({options.head_seed, 0x4ead5}));
  const int d = config_.dim;
  for (int l : distill_layers_) {
    LinearHead head;
    head.weight = Tensor::parameter(gaussian(d, d, 1.0 / std::sqrt(d), rng));
    head.bias = Tensor::parameter(Matrix::Zero(1, d));
    heads_.emplace(l, std::move(head));
  }
  if (options.enhancement) enhancement_.emplace(config_, rng);
}

Tensor StudentModel::representation(const audio::Waveform& input) const {
  if (input.sample_rate_hz() != config_.sample_rate_hz)
    fail(ErrorKind::kRate, "student expects " + std::to_string(config_.sample_rate_hz) +
                               " Hz input");
  return encoder_.forward(input);
}

StudentOutput StudentModel::forward(const audio::Waveform& input, bool enhance) const {
  StudentOutput out;
  out.representation = representation(input);
  for (const auto& [layer, head] : heads_)
    out.predictions.emplace(layer, linear(out.representation, head.weight, head.bias));
  if (enhancement_ && enhance)
    out.enhanced = enhancement_->forward(out.representation, input.size());
  return out;
}

Parameters StudentModel::parameters() const {
  Parameters p = encoder_.parameters();
  for (const auto& [layer, head] : heads_) {
    const std::string prefix = "head." + std::to_string(layer) + ".";
    p.push_back({prefix + "weight", head.weight});
    p.push_back({prefix + "bias", head.bias});
  }
  if (enhancement_) {
    for (auto& np : enhancement_->parameters()) p.push_back(std::move(np));
  }
  return p;
}

StudentModel init_student_from_teacher(const TeacherSurrogate& teacher,
                                       const StudentOptions& options) {
  const ModelConfig& cfg = teacher.config();
  if (cfg.student_layers <= 0)
    fail(ErrorKind::kConfig, "model.student_layers must be positive");
  if (static_cast<std::size_t>(cfg.student_layers) > teacher.encoder().depth())
    fail(ErrorKind::kConfig, "model.student_layers exceeds the teacher depth");
  const Encoder& te = teacher.encoder();
  FrontEnd fe{trainable_copy(te.front_end().weight), trainable_copy(te.front_end().bias),
              te.front_end().stride};
  std::vector<MixingBlock> blocks;
  for (int i = 0; i < cfg.student_layers; ++i) {
    const auto& b = te.blocks()[static_cast<std::size_t>(i)];
    blocks.push_back({trainable_copy(b.fc1_weight), trainable_copy(b.fc1_bias),
                      trainable_copy(b.fc2_weight), trainable_copy(b.fc2_bias)});
  }
  return StudentModel(cfg, Encoder(std::move(fe), std::move(blocks)), options);
}

void load_values(const Parameters& params, const std::map<std::string, Matrix>& values,
                 bool strict) {
  std::set<std::string> used;
  for (const auto& [name, t] : params) {
    auto it = values.find(name);
    if (it == values.end()) {
      if (strict) fail(ErrorKind::kLookup, "missing parameter " + name);
      continue;
    }
    if (it->second.rows() != t.rows() || it->second.cols() != t.cols())
      fail(ErrorKind::kShape, "parameter " + name + " has the wrong shape");
    Tensor handle = t;
    handle.mutable_value() = it->second;
    used.insert(name);
  }
  if (strict && used.size() != values.size()) {
    for (const auto& [name, v] : values)
      if (!used.count(name)) fail(ErrorKind::kLookup, "unexpected parameter " + name);
  }
}

Encoder encoder_from_values(const ModelConfig& config,
                            const std::map<std::string, Matrix>& values) {
  auto get = [&](const std::string& name) {
    auto it = values.find(name);
    if (it == values.end()) fail(ErrorKind::kLookup, "missing parameter " + name);
    return Tensor(it->second);
  };
  FrontEnd fe{get("encoder.frontend.weight"), get("encoder.frontend.bias"),
              config.frame_stride};
  if (fe.weight.cols() != config.frame_stride)
    fail(ErrorKind::kShape, "front-end width disagrees with frame_stride");
  std::vector<MixingBlock> blocks;
  for (int i = 0;; ++i) {
    const std::string prefix = "encoder.layers." + std::to_string(i) + ".";
    if (!values.count(prefix + "fc1.weight")) break;
    blocks.push_back({get(prefix + "fc1.weight"), get(prefix + "fc1.bias"),
                      get(prefix + "fc2.weight"), get(prefix + "fc2.bias")});
  }
  if (blocks.empty()) fail(ErrorKind::kLookup, "no encoder layers found");
  return Encoder(std::move(fe), std::move(blocks));
}

}  // namespace distilrobust::model
