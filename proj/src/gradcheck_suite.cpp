// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/gradcheck_suite.hpp"

#include <random>

#include "distilrobust/losses.hpp"
#include "distilrobust/model.hpp"
#include "distilrobust/ops.hpp"
#include "distilrobust/seed.hpp"

namespace distilrobust {

namespace {

std::uint64_t name_hash(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : s) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
  return h;
}

class Inputs {
 public:
  explicit Inputs(std::string_view name) : rng_(make_rng(derive_seed({0x6c0c4, name_hash(name)}))) {}

  Matrix uniform(Eigen::Index r, Eigen::Index c, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng_);
    return m;
  }
  Tensor param(Eigen::Index r, Eigen::Index c, double lo = -1.0, double hi = 1.0) {
    return Tensor::parameter(uniform(r, c, lo, hi));
  }
  Rng& rng() { return rng_; }

 private:
  Rng rng_;
};

// Reduces a non-scalar output to a scalar with fixed random weights so every
// output entry contributes a distinct gradient.
Tensor project(const Tensor& out, const Matrix& weights) {
  return sum(mul(out, Tensor(weights)));
}

using Builder = std::function<Tensor(std::span<Tensor>)>;

GradcheckCase op_case(std::string name, std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes,
                      Builder build, double lo = -1.0, double hi = 1.0) {
  auto run = [name, shapes, build, lo, hi](const GradcheckOptions& opt) {
    Inputs in(name);
    std::vector<Tensor> xs;
    for (auto [r, c] : shapes) xs.push_back(in.param(r, c, lo, hi));
    const Tensor probe = build(xs);
    const Matrix w = in.uniform(probe.rows(), probe.cols());
    return gradcheck([&] { return project(build(xs), w); }, xs, opt);
  };
  return {std::move(name), std::move(run)};
}

BidirectionalWeights split_rnn(std::span<Tensor> xs) {
  return {{xs[1], xs[2], xs[3]}, {xs[4], xs[5], xs[6]}};
}

GradcheckCase recurrent_case(std::string name, RecurrentCell cell) {
  const Eigen::Index t = 4, in = 3, h = 2, g = gate_count(cell);
  return op_case(std::move(name),
                 {{t, in}, {g * h, in}, {g * h, h}, {1, g * h}, {g * h, in}, {g * h, h}, {1, g * h}},
                 [cell](std::span<Tensor> xs) { return bidir_recurrent(xs[0], split_rnn(xs), cell); });
}

model::ModelConfig tiny_model(RecurrentCell cell) {
  model::ModelConfig cfg;
  cfg.dim = 4;
  cfg.teacher_layers = 2;
  cfg.student_layers = 1;
  cfg.frame_stride = 4;
  cfg.rnn_hidden = 2;
  cfg.rnn_cell = cell;
  cfg.deconv_strides = {1, 1, 1, 1, 1, 2, 2};
  return cfg;
}

GradcheckCase student_case(std::string name, losses::EnhancementLoss loss, RecurrentCell cell) {
  auto run = [name, loss, cell](const GradcheckOptions& opt) {
    const model::ModelConfig cfg = tiny_model(cell);
    const model::TeacherSurrogate teacher(cfg, 11);
    const model::StudentModel student =
        model::init_student_from_teacher(teacher, {{1, 2}, true, 12});
    Inputs in(name);
    const audio::Waveform clean(in.uniform(1, 16, -0.5, 0.5).row(0).transpose(), cfg.sample_rate_hz);
    const audio::Waveform noisy(clean.samples() + 0.1 * in.uniform(1, 16).row(0).transpose(),
                                cfg.sample_rate_hz);
    const model::FeatureMaps targets = teacher.forward(clean);
    const Tensor clean_row(Matrix(clean.samples().transpose()));
    const std::vector<int> layers{1, 2};
    const StftParams stft{8, 4, 8};

    std::vector<Tensor> params;
    for (const auto& p : student.parameters()) params.push_back(p.tensor);
    auto objective = [&] {
      const model::StudentOutput out = student.forward(noisy, true);
      const losses::KdLoss kd = losses::kd_loss(targets, out.predictions, layers);
      const Tensor enh = loss == losses::EnhancementLoss::kL1Freq
                             ? losses::l1_freq(*out.enhanced, clean_row, stft)
                             : losses::l1_wav(*out.enhanced, clean_row);
      return losses::combined_loss(kd, enh, losses::default_lambda(loss)).total;
    };
    return gradcheck(objective, params, opt);
  };
  return {std::move(name), std::move(run)};
}

std::vector<GradcheckCase> build_cases() {
  std::vector<GradcheckCase> c;
  c.push_back(op_case("linear", {{3, 4}, {5, 4}, {1, 5}}, [](std::span<Tensor> x) {
    return linear(x[0], x[1], x[2]);
  }));
  c.push_back(op_case("conv1d", {{2, 9}, {3, 6}, {3, 1}}, [](std::span<Tensor> x) {
    return conv1d(x[0], x[1], x[2], 2);
  }));
  c.push_back(op_case("conv1d_transposed", {{2, 4}, {3, 8}, {3, 1}}, [](std::span<Tensor> x) {
    return conv1d_transposed(x[0], x[1], x[2], 2);
  }));
  c.push_back(recurrent_case("bidir_lstm", RecurrentCell::kLstm));
  c.push_back(recurrent_case("bidir_gated", RecurrentCell::kGated));
  c.push_back(op_case("gelu", {{3, 4}}, [](std::span<Tensor> x) { return gelu(x[0]); }, -3.0, 3.0));
  c.push_back(op_case("sigmoid", {{3, 4}}, [](std::span<Tensor> x) { return sigmoid(x[0]); }, -3.0, 3.0));
  c.push_back(op_case("tanh", {{3, 4}}, [](std::span<Tensor> x) { return distilrobust::tanh(x[0]); }, -2.0, 2.0));
  c.push_back(op_case("log", {{3, 4}}, [](std::span<Tensor> x) { return distilrobust::log(x[0]); }, 0.5, 2.0));
  c.push_back(op_case("l1_distance", {{3, 4}, {3, 4}}, [](std::span<Tensor> x) {
    return l1_distance(x[0], x[1]);
  }));
  c.push_back(op_case("cosine_sim_rows", {{3, 5}, {3, 5}}, [](std::span<Tensor> x) {
    return cosine_sim_rows(x[0], x[1]);
  }));
  c.push_back(op_case("scale_add", {{2, 3}, {2, 3}}, [](std::span<Tensor> x) {
    return scale_add(0.7, x[0], -1.3, x[1]);
  }));
  c.push_back(op_case("mul", {{2, 3}, {2, 3}}, [](std::span<Tensor> x) { return mul(x[0], x[1]); }));
  c.push_back(op_case("mean", {{2, 3}}, [](std::span<Tensor> x) { return mean(x[0]); }));
  c.push_back(op_case("sum", {{2, 3}}, [](std::span<Tensor> x) { return sum(x[0]); }));
  c.push_back(op_case("transpose", {{2, 3}}, [](std::span<Tensor> x) { return transpose(x[0]); }));
  c.push_back(op_case("slice_cols", {{2, 6}}, [](std::span<Tensor> x) { return slice_cols(x[0], 1, 3); }));
  c.push_back(op_case("stft_mag", {{1, 40}}, [](std::span<Tensor> x) {
    return stft_mag(x[0], hann_window(16), 8, 16);
  }));
  c.push_back(op_case("composition", {{2, 9}, {3, 6}, {3, 1}, {4, 3}, {1, 4}}, [](std::span<Tensor> x) {
    return linear(gelu(transpose(conv1d(x[0], x[1], x[2], 2))), x[3], x[4]);
  }));
  c.push_back(op_case("kd_loss", {{4, 6}, {4, 6}, {4, 6}, {4, 6}}, [](std::span<Tensor> x) {
    const model::FeatureMaps teacher{{4, x[0]}, {8, x[1]}};
    const model::FeatureMaps student{{4, x[2]}, {8, x[3]}};
    const int layers[] = {4, 8};
    return losses::kd_loss(teacher, student, layers).total;
  }));
  c.push_back(op_case("l1_wav", {{1, 30}, {1, 30}}, [](std::span<Tensor> x) {
    return losses::l1_wav(x[0], x[1]);
  }));
  c.push_back(op_case("l1_freq", {{1, 40}, {1, 40}}, [](std::span<Tensor> x) {
    return losses::l1_freq(x[0], x[1], {16, 8, 16});
  }));
  c.push_back(student_case("student_l1_wav", losses::EnhancementLoss::kL1Wav, RecurrentCell::kLstm));
  c.push_back(student_case("student_l1_freq", losses::EnhancementLoss::kL1Freq, RecurrentCell::kGated));
  return c;
}

}  // namespace

const std::vector<GradcheckCase>& gradcheck_cases() {
  static const std::vector<GradcheckCase> cases = build_cases();
  return cases;
}

const GradcheckCase* find_gradcheck_case(std::string_view name) {
  for (const auto& c : gradcheck_cases())
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace distilrobust
