// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Reference implementations written with plain loops. They share nothing
// with the library beyond the Matrix type.

#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "distilrobust/tensor.hpp"

namespace oracle {

using distilrobust::Matrix;

// sum_l sum_t [ (1/D) sum_d |h - p| - log(1 / (1 + exp(-cos))) ]
inline double kd_loss(const std::map<int, Matrix>& teacher, const std::map<int, Matrix>& student,
                      const std::vector<int>& layers, double* l1_out = nullptr,
                      double* cos_out = nullptr) {
  double l1 = 0.0, cos_term = 0.0;
  for (int l : layers) {
    const Matrix& h = teacher.at(l);
    const Matrix& p = student.at(l);
    for (Eigen::Index t = 0; t < h.rows(); ++t) {
      double abs_sum = 0.0, dot = 0.0, nh = 0.0, np = 0.0;
      for (Eigen::Index d = 0; d < h.cols(); ++d) {
        abs_sum += std::fabs(h(t, d) - p(t, d));
        dot += h(t, d) * p(t, d);
        nh += h(t, d) * h(t, d);
        np += p(t, d) * p(t, d);
      }
      const double c = dot / (std::max(std::sqrt(nh), 1e-8) * std::max(std::sqrt(np), 1e-8));
      l1 += abs_sum / static_cast<double>(h.cols());
      cos_term += -std::log(1.0 / (1.0 + std::exp(-c)));
    }
  }
  if (l1_out) *l1_out = l1;
  if (cos_out) *cos_out = cos_term;
  return l1 + cos_term;
}

// y[n] = sum_k h[k] x[n - k] for n < len(x).
inline std::vector<double> direct_convolution(const std::vector<double>& x,
                                              const std::vector<double>& h) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n)
    for (std::size_t k = 0; k < h.size() && k <= n; ++k) y[n] += h[k] * x[n - k];
  return y;
}

// |X_f(k)| for frames of `window.size()` samples every `hop`, zero-padded to fft.
inline std::vector<std::vector<double>> stft_magnitude(const std::vector<double>& x,
                                                       const std::vector<double>& window,
                                                       int hop, int fft) {
  std::vector<std::vector<double>> out;
  const std::size_t win = window.size();
  for (std::size_t start = 0; start + win <= x.size(); start += static_cast<std::size_t>(hop)) {
    std::vector<double> row;
    for (int k = 0; k <= fft / 2; ++k) {
      double re = 0.0, im = 0.0;
      for (std::size_t n = 0; n < win; ++n) {
        const double a = 2.0 * std::numbers::pi * k * static_cast<double>(n) / fft;
        re += x[start + n] * window[n] * std::cos(a);
        im -= x[start + n] * window[n] * std::sin(a);
      }
      row.push_back(std::hypot(re, im));
    }
    out.push_back(row);
  }
  return out;
}

inline std::vector<double> periodic_hann(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

// One AdamW step on a single scalar.
struct ScalarAdamW {
  double m = 0.0, v = 0.0;
  int t = 0;
  double step(double theta, double g, double lr, double b1 = 0.9, double b2 = 0.98,
              double eps = 1e-6, double wd = 0.01) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    theta -= lr * wd * theta;
    return theta - lr * mh / (std::sqrt(vh) + eps);
  }
};

template <typename Vec>
double sqrt_mean_square(const Vec& x) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += x[i] * x[i];
  return std::sqrt(acc / static_cast<double>(x.size()));
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// LSTM forward over rows of x; gate order (i, f, g, o); W [4H x in], U [4H x H], b [4H].
inline Matrix lstm_forward(const Matrix& x, const Matrix& w, const Matrix& u, const Matrix& b,
                           bool reverse) {
  const Eigen::Index t_len = x.rows(), h = u.cols();
  Matrix out(t_len, h);
  std::vector<double> hs(static_cast<std::size_t>(h), 0.0), cs(static_cast<std::size_t>(h), 0.0);
  for (Eigen::Index step = 0; step < t_len; ++step) {
    const Eigen::Index t = reverse ? t_len - 1 - step : step;
    std::vector<double> z(static_cast<std::size_t>(4 * h));
    for (Eigen::Index r = 0; r < 4 * h; ++r) {
      double acc = b(0, r);
      for (Eigen::Index c = 0; c < x.cols(); ++c) acc += w(r, c) * x(t, c);
      for (Eigen::Index c = 0; c < h; ++c) acc += u(r, c) * hs[static_cast<std::size_t>(c)];
      z[static_cast<std::size_t>(r)] = acc;
    }
    for (Eigen::Index j = 0; j < h; ++j) {
      const auto J = static_cast<std::size_t>(j), H = static_cast<std::size_t>(h);
      const double i = sigmoid(z[J]), f = sigmoid(z[H + J]), g = std::tanh(z[2 * H + J]),
                   o = sigmoid(z[3 * H + J]);
      cs[J] = f * cs[J] + i * g;
      hs[J] = o * std::tanh(cs[J]);
      out(t, j) = hs[J];
    }
  }
  return out;
}

inline Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng,
                            double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("distilrobust-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace oracle
