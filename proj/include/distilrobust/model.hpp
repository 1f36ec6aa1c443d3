// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "distilrobust/audio.hpp"
#include "distilrobust/ops.hpp"
#include "distilrobust/seed.hpp"
#include "distilrobust/tensor.hpp"

namespace distilrobust::model {

struct ModelConfig {
  int dim = 32;
  int ffn_multiplier = 4;  // mixing-block hidden width = ffn_multiplier * dim
  int teacher_layers = 12;
  int student_layers = 2;
  int frame_stride = 320;  // 20 ms at 16 kHz
  int sample_rate_hz = audio::kDefaultSampleRate;
  int rnn_hidden = 32;
  RecurrentCell rnn_cell = RecurrentCell::kLstm;
  // Seven transposed convolutions whose strides multiply to frame_stride;
  // kernel = 2 * stride, channels halve from 2 * rnn_hidden down to 1.
  std::vector<int> deconv_strides{2, 2, 2, 2, 2, 2, 5};
  // GELU after the last transposed convolution as well.
  bool gelu_on_output = false;

  void validate() const;
};

inline constexpr std::size_t kDeconvLayers = 7;

// 1-based layer index -> [T x D] activations.
using FeatureMaps = std::map<int, Tensor>;

struct NamedTensor {
  std::string name;
  Tensor tensor;
};
using Parameters = std::vector<NamedTensor>;

// FNV-1a over names, shapes and value bytes.
std::uint64_t checksum(const Parameters& params);

// Frames with a [D x frame_stride] convolution at stride frame_stride, then GELU.
struct FrontEnd {
  Tensor weight;  // [D x frame_stride]
  Tensor bias;    // [D x 1]
  int stride = 0;

  Tensor forward(const audio::Waveform& w) const;  // [T x D]
};

// h + fc2(gelu(fc1(h))), fc1 widening D to ffn_multiplier * D.
struct MixingBlock {
  Tensor fc1_weight, fc1_bias, fc2_weight, fc2_bias;

  Tensor forward(const Tensor& h) const;
};

class Encoder {
 public:
  Encoder() = default;
  Encoder(FrontEnd front_end, std::vector<MixingBlock> blocks);

  // Output of every block, index 0 holding layer 1.
  std::vector<Tensor> forward_layers(const audio::Waveform& w) const;
  Tensor forward(const audio::Waveform& w) const;

  std::size_t depth() const { return blocks_.size(); }
  const FrontEnd& front_end() const { return front_end_; }
  const std::vector<MixingBlock>& blocks() const { return blocks_; }

  // Names under "encoder.".
  Parameters parameters() const;

 private:
  FrontEnd front_end_;
  std::vector<MixingBlock> blocks_;
};

Eigen::Index frame_count(Eigen::Index samples, int frame_stride);

// Frozen random-weight stand-in for the pretrained teacher.
class TeacherSurrogate {
 public:
  TeacherSurrogate(ModelConfig config, Seed seed);

  // All layers 1..teacher_layers. Feed the clean utterance.
  FeatureMaps forward(const audio::Waveform& clean) const;

  const ModelConfig& config() const { return config_; }
  Seed seed() const { return seed_; }
  const Encoder& encoder() const { return encoder_; }
  std::uint64_t checksum() const;

 private:
  ModelConfig config_;
  Seed seed_;
  Encoder encoder_;
};

struct LinearHead {
  Tensor weight;  // [D x D]
  Tensor bias;    // [1 x D]
};

// BiLSTM (or the gated fallback) followed by seven transposed convolutions.
class EnhancementHead {
 public:
  EnhancementHead(const ModelConfig& config, Rng& rng);

  // representation [T x D] -> waveform [1 x samples].
  Tensor forward(const Tensor& representation, Eigen::Index samples) const;

  Parameters parameters() const;  // names under "enhancement."
  std::size_t depth() const { return deconv_.size(); }

 private:
  struct Deconv {
    Tensor weight, bias;
    int stride;
  };
  RecurrentCell cell_;
  BidirectionalWeights rnn_;
  std::vector<Deconv> deconv_;
  bool gelu_on_output_;
};

struct StudentOptions {
  std::vector<int> distill_layers{4, 8, 12};
  bool enhancement = false;
  Seed head_seed = 0;
};

struct StudentOutput {
  Tensor representation;
  FeatureMaps predictions;
  std::optional<Tensor> enhanced;
};

class StudentModel {
 public:
  StudentModel(const ModelConfig& config, Encoder encoder,
               const StudentOptions& options);

  // Feed the augmented utterance. `enhance` is ignored without a head.
  StudentOutput forward(const audio::Waveform& input, bool enhance = true) const;
  Tensor representation(const audio::Waveform& input) const;

  const Encoder& encoder() const { return encoder_; }
  const std::vector<int>& distill_layers() const { return distill_layers_; }
  bool has_enhancement_head() const { return enhancement_.has_value(); }

  // Stable order: encoder, heads, enhancement.
  Parameters parameters() const;
  Parameters encoder_parameters() const { return encoder_.parameters(); }

 private:
  ModelConfig config_;
  Encoder encoder_;
  std::vector<int> distill_layers_;
  std::map<int, LinearHead> heads_;
  std::optional<EnhancementHead> enhancement_;
};

// Copies the teacher's front end and first student_layers blocks into
// trainable tensors; heads are seeded from options.head_seed.
StudentModel init_student_from_teacher(const TeacherSurrogate& teacher,
                                       const StudentOptions& options);

// Overwrites parameter values by name. Unknown names are an error when strict.
void load_values(const Parameters& params,
                 const std::map<std::string, Matrix>& values, bool strict = true);

// Rebuilds a representation-only encoder from "encoder.*" tensors.
Encoder encoder_from_values(const ModelConfig& config,
                            const std::map<std::string, Matrix>& values);

}  // namespace distilrobust::model
