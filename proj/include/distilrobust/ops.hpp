// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string_view>

#include "distilrobust/tensor.hpp"

namespace distilrobust {

// Differentiable ops. None mutates its inputs; each records graph edges only
// when an input requires a gradient. Bias arguments may be undefined tensors.

// x [T x in], weight [out x in], bias [1 x out] -> [T x out].
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias = {});

// Valid 1-D convolution. x [C_in x L], weight [C_out x (C_in * k)] with the
// kernel taps of input channel c at columns [c*k, (c+1)*k), bias [C_out x 1].
// Output [C_out x ((L - k) / stride + 1)].
Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              int stride);

// Transposed 1-D convolution, same weight layout as conv1d.
// Output [C_out x ((L - 1) * stride + k)].
Tensor conv1d_transposed(const Tensor& x, const Tensor& weight,
                         const Tensor& bias, int stride);

enum class RecurrentCell { kLstm, kGated };

std::string_view to_string(RecurrentCell cell);
RecurrentCell parse_recurrent_cell(std::string_view name);
int gate_count(RecurrentCell cell);  // 4 for LSTM, 2 for the gated cell

// One direction of a recurrent layer. Gate order for the LSTM is
// (input, forget, cell, output); for the gated cell (update, candidate).
struct RecurrentWeights {
  Tensor input;      // [G*H x in]
  Tensor recurrent;  // [G*H x H]
  Tensor bias;       // [1 x G*H]
};

struct BidirectionalWeights {
  RecurrentWeights forward;
  RecurrentWeights backward;
};

// x [T x in] -> [T x 2H]; columns [0, H) run forward in time, [H, 2H) backward.
Tensor bidir_recurrent(const Tensor& x, const BidirectionalWeights& weights,
                       RecurrentCell cell);

// tanh approximation.
Tensor gelu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor log(const Tensor& x);

// Mean absolute difference over all elements -> 1x1.
Tensor l1_distance(const Tensor& a, const Tensor& b);

inline constexpr double kCosineEps = 1e-8;

// Row-wise cosine similarity a_t.b_t / (max(|a_t|, eps) max(|b_t|, eps)) -> [T x 1].
Tensor cosine_sim_rows(const Tensor& a, const Tensor& b);

// alpha * a + beta * b, elementwise.
Tensor scale_add(double alpha, const Tensor& a, double beta, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(double alpha, const Tensor& x);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor mean(const Tensor& x);
Tensor sum(const Tensor& x);

Tensor transpose(const Tensor& x);
Tensor slice_cols(const Tensor& x, Eigen::Index begin, Eigen::Index count);

// Periodic Hann window as a 1 x n row.
Matrix hann_window(int n);

struct StftParams {
  int window = 400;
  int hop = 160;
  int fft_size = 512;
};

// Magnitude STFT of x [1 x N] without centering padding.
// Output [frames x (fft_size/2 + 1)], frames = (N - window_len) / hop + 1.
Tensor stft_mag(const Tensor& x, const Matrix& window, int hop, int fft_size);
Tensor stft_mag(const Tensor& x, const StftParams& params);

}  // namespace distilrobust
