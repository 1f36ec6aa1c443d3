// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/ops.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "distilrobust/error.hpp"

namespace distilrobust {

namespace {

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorKind::kShape, std::string(op) + ": " + dims(a.value()) + " vs " +
                                dims(b.value()));
}

void require_stride(int stride, const char* op) {
  if (stride < 1)
    fail(ErrorKind::kParameter, std::string(op) + ": stride must be >= 1");
}

// Kernel width for a [C_out x (C_in * k)] weight applied to C_in channels.
Eigen::Index kernel_width(const Tensor& x, const Tensor& weight, const char* op) {
  const auto cin = x.rows();
  if (cin == 0 || weight.cols() % cin != 0 || weight.cols() == 0)
    fail(ErrorKind::kShape, std::string(op) + ": weight " + dims(weight.value()) +
                                " does not match " + std::to_string(cin) +
                                " input channels");
  return weight.cols() / cin;
}

void require_bias(const Tensor& bias, Eigen::Index rows, Eigen::Index cols,
                  const char* op) {
  if (bias.defined() && (bias.rows() != rows || bias.cols() != cols))
    fail(ErrorKind::kShape, std::string(op) + ": bias " + dims(bias.value()) +
                                ", expected " + std::to_string(rows) + "x" +
                                std::to_string(cols));
}

using Array = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Fn, typename Deriv>
Tensor unary(const Tensor& x, std::string_view name, Fn fn, Deriv deriv) {
  Matrix y = x.value().unaryExpr(fn);
  Matrix xv = x.value();
  Matrix yv = y;
  return Tensor::from_op(
      std::move(y), name, {x},
      [xv = std::move(xv), yv = std::move(yv), deriv](
          const Matrix& g, std::span<Matrix* const> acc) {
        if (acc[0]) {
          const Array d = deriv(xv.array(), yv.array());
          acc[0]->array() += g.array() * d;
        }
      });
}

}  // namespace

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.cols() != weight.cols())
    fail(ErrorKind::kShape, "linear: input " + dims(x.value()) + ", weight " +
                                dims(weight.value()));
  require_bias(bias, 1, weight.rows(), "linear");
  Matrix y = x.value() * weight.value().transpose();
  if (bias.defined()) y.rowwise() += bias.value().row(0);
  return Tensor::from_op(
      std::move(y), "linear", {x, weight, bias},
      [xv = x.value(), wv = weight.value()](const Matrix& g,
                                            std::span<Matrix* const> acc) {
        if (acc[0]) acc[0]->noalias() += g * wv;
        if (acc[1]) acc[1]->noalias() += g.transpose() * xv;
        if (acc[2]) *acc[2] += g.colwise().sum();
      });
}

Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              int stride) {
  require_stride(stride, "conv1d");
  const Eigen::Index k = kernel_width(x, weight, "conv1d");
  const Eigen::Index cin = x.rows();
  const Eigen::Index len = x.cols();
  if (len < k)
    fail(ErrorKind::kLength, "conv1d: input length " + std::to_string(len) +
                                 " shorter than kernel " + std::to_string(k));
  require_bias(bias, weight.rows(), 1, "conv1d");
  const Eigen::Index lout = (len - k) / stride + 1;

  Matrix cols(cin * k, lout);
  for (Eigen::Index c = 0; c < cin; ++c)
    for (Eigen::Index j = 0; j < k; ++j)
      for (Eigen::Index t = 0; t < lout; ++t)
        cols(c * k + j, t) = x.value()(c, t * stride + j);
  Matrix y = weight.value() * cols;
  if (bias.defined()) y.colwise() += bias.value().col(0);

  return Tensor::from_op(
      std::move(y), "conv1d", {x, weight, bias},
      [cols = std::move(cols), wv = weight.value(), cin, k, lout, stride](
          const Matrix& g, std::span<Matrix* const> acc) {
        if (acc[0]) {
          const Matrix dcols = wv.transpose() * g;
          for (Eigen::Index c = 0; c < cin; ++c)
            for (Eigen::Index j = 0; j < k; ++j)
              for (Eigen::Index t = 0; t < lout; ++t)
                (*acc[0])(c, t * stride + j) += dcols(c * k + j, t);
        }
        if (acc[1]) acc[1]->noalias() += g * cols.transpose();
        if (acc[2]) *acc[2] += g.rowwise().sum();
      });
}

Tensor conv1d_transposed(const Tensor& x, const Tensor& weight,
                         const Tensor& bias, int stride) {
  require_stride(stride, "conv1d_transposed");
  const Eigen::Index k = kernel_width(x, weight, "conv1d_transposed");
  const Eigen::Index cin = x.rows();
  const Eigen::Index cout = weight.rows();
  const Eigen::Index len = x.cols();
  require_bias(bias, cout, 1, "conv1d_transposed");
  const Eigen::Index lout = (len - 1) * stride + k;

  // Row co*k + j of `taps` holds weight(co, ci*k + j) over ci.
  Matrix taps(cout * k, cin);
  for (Eigen::Index co = 0; co < cout; ++co)
    for (Eigen::Index ci = 0; ci < cin; ++ci)
      for (Eigen::Index j = 0; j < k; ++j)
        taps(co * k + j, ci) = weight.value()(co, ci * k + j);
  const Matrix partial = taps * x.value();

  Matrix y = Matrix::Zero(cout, lout);
  for (Eigen::Index co = 0; co < cout; ++co)
    for (Eigen::Index t = 0; t < len; ++t)
      for (Eigen::Index j = 0; j < k; ++j)
        y(co, t * stride + j) += partial(co * k + j, t);
  if (bias.defined()) y.colwise() += bias.value().col(0);

  return Tensor::from_op(
      std::move(y), "conv1d_transposed", {x, weight, bias},
      [taps = std::move(taps), xv = x.value(), cin, cout, len, k, stride](
          const Matrix& g, std::span<Matrix* const> acc) {
        Matrix dpartial(cout * k, len);
        for (Eigen::Index co = 0; co < cout; ++co)
          for (Eigen::Index t = 0; t < len; ++t)
            for (Eigen::Index j = 0; j < k; ++j)
              dpartial(co * k + j, t) = g(co, t * stride + j);
        if (acc[0]) acc[0]->noalias() += taps.transpose() * dpartial;
        if (acc[1]) {
          const Matrix dtaps = dpartial * xv.transpose();
          for (Eigen::Index co = 0; co < cout; ++co)
            for (Eigen::Index ci = 0; ci < cin; ++ci)
              for (Eigen::Index j = 0; j < k; ++j)
                (*acc[1])(co, ci * k + j) += dtaps(co * k + j, ci);
        }
        if (acc[2]) *acc[2] += g.rowwise().sum();
      });
}

// ---------------------------------------------------------------------------
// Recurrent layer

std::string_view to_string(RecurrentCell cell) {
  return cell == RecurrentCell::kLstm ? "lstm" : "gated";
}

RecurrentCell parse_recurrent_cell(std::string_view name) {
  if (name == "lstm") return RecurrentCell::kLstm;
  if (name == "gated") return RecurrentCell::kGated;
  fail(ErrorKind::kConfig, "unknown recurrent cell '" + std::string(name) + "'");
}

int gate_count(RecurrentCell cell) { return cell == RecurrentCell::kLstm ? 4 : 2; }

namespace {

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Activations of one direction, one row per time step (in processing order).
struct DirectionTrace {
  Matrix gates;   // post-nonlinearity, [T x G*H]
  Matrix cells;   // LSTM only, [T x H]
  Matrix hidden;  // [T x H]
};

DirectionTrace run_direction(const Matrix& x, const RecurrentWeights& w,
                             RecurrentCell cell, bool reverse) {
  const Eigen::Index steps = x.rows();
  const Eigen::Index h = w.recurrent.cols();
  const Matrix& wi = w.input.value();
  const Matrix& wh = w.recurrent.value();
  const Matrix& b = w.bias.value();

  DirectionTrace tr;
  tr.gates.resize(steps, wi.rows());
  tr.hidden.resize(steps, h);
  if (cell == RecurrentCell::kLstm) tr.cells.resize(steps, h);

  Eigen::RowVectorXd hprev = Eigen::RowVectorXd::Zero(h);
  Eigen::RowVectorXd cprev = Eigen::RowVectorXd::Zero(h);
  for (Eigen::Index s = 0; s < steps; ++s) {
    const Eigen::Index t = reverse ? steps - 1 - s : s;
    Eigen::RowVectorXd a = x.row(t) * wi.transpose() + hprev * wh.transpose() + b;
    if (cell == RecurrentCell::kLstm) {
      for (Eigen::Index q = 0; q < h; ++q) {
        a[q] = logistic(a[q]);
        a[h + q] = logistic(a[h + q]);
        a[2 * h + q] = std::tanh(a[2 * h + q]);
        a[3 * h + q] = logistic(a[3 * h + q]);
      }
      Eigen::RowVectorXd c = a.segment(h, h).cwiseProduct(cprev) +
                             a.segment(0, h).cwiseProduct(a.segment(2 * h, h));
      hprev = a.segment(3 * h, h).cwiseProduct(c.array().tanh().matrix());
      cprev = c;
      tr.cells.row(s) = c;
    } else {
      for (Eigen::Index q = 0; q < h; ++q) {
        a[q] = logistic(a[q]);
        a[h + q] = std::tanh(a[h + q]);
      }
      const auto z = a.segment(0, h).array();
      hprev = ((1.0 - z) * hprev.array() + z * a.segment(h, h).array()).matrix();
    }
    tr.gates.row(s) = a;
    tr.hidden.row(s) = hprev;
  }
  return tr;
}

struct DirectionGrads {
  Matrix input, recurrent, bias;
};

// Backpropagation through time for one direction. `gout` is the gradient of
// this direction's hidden outputs indexed by time (not processing order).
void backprop_direction(const Matrix& x, const Matrix& wi, const Matrix& wh,
                        const DirectionTrace& tr, RecurrentCell cell,
                        bool reverse, const Matrix& gout, Matrix* dx,
                        DirectionGrads& dw) {
  const Eigen::Index steps = x.rows();
  const Eigen::Index h = wh.cols();
  dw.input = Matrix::Zero(wi.rows(), wi.cols());
  dw.recurrent = Matrix::Zero(wh.rows(), wh.cols());
  dw.bias = Matrix::Zero(1, wi.rows());

  Eigen::RowVectorXd dh_next = Eigen::RowVectorXd::Zero(h);
  Eigen::RowVectorXd dc_next = Eigen::RowVectorXd::Zero(h);
  Eigen::RowVectorXd da(wi.rows());
  for (Eigen::Index s = steps - 1; s >= 0; --s) {
    const Eigen::Index t = reverse ? steps - 1 - s : s;
    const Eigen::RowVectorXd hprev =
        s > 0 ? Eigen::RowVectorXd(tr.hidden.row(s - 1))
              : Eigen::RowVectorXd::Zero(h);
    const Eigen::RowVectorXd dh = gout.row(t) + dh_next;
    const auto gates = tr.gates.row(s);

    if (cell == RecurrentCell::kLstm) {
      const Eigen::RowVectorXd cprev = s > 0 ? Eigen::RowVectorXd(tr.cells.row(s - 1))
                                             : Eigen::RowVectorXd::Zero(h);
      for (Eigen::Index q = 0; q < h; ++q) {
        const double i = gates[q], f = gates[h + q], g = gates[2 * h + q],
                     o = gates[3 * h + q];
        const double tc = std::tanh(tr.cells(s, q));
        const double dc = dc_next[q] + dh[q] * o * (1.0 - tc * tc);
        da[q] = dc * g * i * (1.0 - i);
        da[h + q] = dc * cprev[q] * f * (1.0 - f);
        da[2 * h + q] = dc * i * (1.0 - g * g);
        da[3 * h + q] = dh[q] * tc * o * (1.0 - o);
        dc_next[q] = dc * f;
      }
      dh_next = da * wh;
    } else {
      for (Eigen::Index q = 0; q < h; ++q) {
        const double z = gates[q], n = gates[h + q];
        da[q] = dh[q] * (n - hprev[q]) * z * (1.0 - z);
        da[h + q] = dh[q] * z * (1.0 - n * n);
      }
      dh_next = da * wh + dh.cwiseProduct(
                              (1.0 - gates.segment(0, h).array()).matrix());
    }
    dw.input.noalias() += da.transpose() * x.row(t);
    dw.recurrent.noalias() += da.transpose() * hprev;
    dw.bias += da;
    if (dx) dx->row(t) += da * wi;
  }
}

void check_direction(const RecurrentWeights& w, Eigen::Index in, int gates,
                     const char* name) {
  if (!w.input.defined() || !w.recurrent.defined() || !w.bias.defined())
    fail(ErrorKind::kShape, std::string("bidir_recurrent: missing ") + name + " weights");
  const auto h = w.recurrent.cols();
  if (h == 0 || w.recurrent.rows() != gates * h || w.input.rows() != gates * h ||
      w.input.cols() != in || w.bias.rows() != 1 || w.bias.cols() != gates * h)
    fail(ErrorKind::kShape, std::string("bidir_recurrent: inconsistent ") + name +
                                " weights");
}

}  // namespace

Tensor bidir_recurrent(const Tensor& x, const BidirectionalWeights& w,
                       RecurrentCell cell) {
  const int g = gate_count(cell);
  check_direction(w.forward, x.cols(), g, "forward");
  check_direction(w.backward, x.cols(), g, "backward");
  const Eigen::Index h = w.forward.recurrent.cols();
  if (w.backward.recurrent.cols() != h)
    fail(ErrorKind::kShape, "bidir_recurrent: direction widths differ");
  if (x.rows() == 0) fail(ErrorKind::kLength, "bidir_recurrent: empty sequence");

  DirectionTrace fwd = run_direction(x.value(), w.forward, cell, false);
  DirectionTrace bwd = run_direction(x.value(), w.backward, cell, true);
  Matrix y(x.rows(), 2 * h);
  y.leftCols(h) = fwd.hidden;
  y.rightCols(h) = bwd.hidden.colwise().reverse();

  return Tensor::from_op(
      std::move(y), "bidir_recurrent",
      {x, w.forward.input, w.forward.recurrent, w.forward.bias, w.backward.input,
       w.backward.recurrent, w.backward.bias},
      [xv = x.value(), fwi = w.forward.input.value(),
       fwh = w.forward.recurrent.value(), bwi = w.backward.input.value(),
       bwh = w.backward.recurrent.value(), fwd = std::move(fwd),
       bwd = std::move(bwd), cell, h](const Matrix& g,
                                      std::span<Matrix* const> acc) {
        Matrix dx = Matrix::Zero(xv.rows(), xv.cols());
        DirectionGrads df, db;
        backprop_direction(xv, fwi, fwh, fwd, cell, false, g.leftCols(h), &dx, df);
        backprop_direction(xv, bwi, bwh, bwd, cell, true, g.rightCols(h), &dx, db);
        if (acc[0]) *acc[0] += dx;
        if (acc[1]) *acc[1] += df.input;
        if (acc[2]) *acc[2] += df.recurrent;
        if (acc[3]) *acc[3] += df.bias;
        if (acc[4]) *acc[4] += db.input;
        if (acc[5]) *acc[5] += db.recurrent;
        if (acc[6]) *acc[6] += db.bias;
      });
}

// ---------------------------------------------------------------------------
// Elementwise

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluK = 0.044715;

Tensor gelu(const Tensor& x) {
  constexpr double c = kGeluC;
  constexpr double k = kGeluK;
  return unary(
      x, "gelu",
      [](double v) { return 0.5 * v * (1.0 + std::tanh(c * (v + k * v * v * v))); },
      [](const auto& xv, const auto&) -> Array {
        const Array u = (kGeluC * (xv + kGeluK * xv.cube())).tanh();
        return 0.5 * (1.0 + u) + 0.5 * xv * (1.0 - u.square()) * kGeluC *
                                     (1.0 + 3.0 * kGeluK * xv.square());
      });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x, "sigmoid", [](double v) { return logistic(v); },
      [](const auto&, const auto& yv) -> Array { return yv * (1.0 - yv); });
}

Tensor tanh(const Tensor& x) {
  return unary(
      x, "tanh", [](double v) { return std::tanh(v); },
      [](const auto&, const auto& yv) -> Array { return 1.0 - yv.square(); });
}

Tensor log(const Tensor& x) {
  if ((x.value().array() <= 0.0).any())
    fail(ErrorKind::kNumeric, "log of a non-positive value");
  return unary(
      x, "log", [](double v) { return std::log(v); },
      [](const auto& xv, const auto&) -> Array { return xv.inverse(); });
}

Tensor l1_distance(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "l1_distance");
  const Matrix diff = a.value() - b.value();
  const auto n = static_cast<double>(diff.size());
  Matrix y(1, 1);
  y(0, 0) = diff.cwiseAbs().sum() / n;
  return Tensor::from_op(
      std::move(y), "l1_distance", {a, b},
      [sign = Matrix(diff.array().sign().matrix()), n](
          const Matrix& g, std::span<Matrix* const> acc) {
        const double s = g(0, 0) / n;
        if (acc[0]) *acc[0] += s * sign;
        if (acc[1]) *acc[1] -= s * sign;
      });
}

Tensor cosine_sim_rows(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "cosine_sim_rows");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  const Eigen::Index rows = av.rows();
  Eigen::VectorXd na(rows), nb(rows), dot(rows);
  Matrix y(rows, 1);
  for (Eigen::Index t = 0; t < rows; ++t) {
    na[t] = std::max(av.row(t).norm(), kCosineEps);
    nb[t] = std::max(bv.row(t).norm(), kCosineEps);
    dot[t] = av.row(t).dot(bv.row(t));
    y(t, 0) = dot[t] / (na[t] * nb[t]);
  }
  return Tensor::from_op(
      std::move(y), "cosine_sim_rows", {a, b},
      [av, bv, na, nb, dot](const Matrix& g, std::span<Matrix* const> acc) {
        for (Eigen::Index t = 0; t < av.rows(); ++t) {
          const double gt = g(t, 0);
          const double inv = 1.0 / (na[t] * nb[t]);
          const double cos = dot[t] * inv;
          // A clamped norm is constant, so it contributes no radial term.
          const bool a_live = av.row(t).norm() > kCosineEps;
          const bool b_live = bv.row(t).norm() > kCosineEps;
          if (acc[0]) {
            Eigen::RowVectorXd d = bv.row(t) * inv;
            if (a_live) d -= cos * av.row(t) / (na[t] * na[t]);
            acc[0]->row(t) += gt * d;
          }
          if (acc[1]) {
            Eigen::RowVectorXd d = av.row(t) * inv;
            if (b_live) d -= cos * bv.row(t) / (nb[t] * nb[t]);
            acc[1]->row(t) += gt * d;
          }
        }
      });
}

Tensor scale_add(double alpha, const Tensor& a, double beta, const Tensor& b) {
  require_same_shape(a, b, "scale_add");
  Matrix y = alpha * a.value() + beta * b.value();
  return Tensor::from_op(std::move(y), "scale_add", {a, b},
                         [alpha, beta](const Matrix& g, std::span<Matrix* const> acc) {
                           if (acc[0]) *acc[0] += alpha * g;
                           if (acc[1]) *acc[1] += beta * g;
                         });
}

Tensor add(const Tensor& a, const Tensor& b) { return scale_add(1.0, a, 1.0, b); }

Tensor scale(double alpha, const Tensor& x) {
  return Tensor::from_op(alpha * x.value(), "scale", {x},
                         [alpha](const Matrix& g, std::span<Matrix* const> acc) {
                           if (acc[0]) *acc[0] += alpha * g;
                         });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Matrix y = a.value().cwiseProduct(b.value());
  return Tensor::from_op(std::move(y), "mul", {a, b},
                         [av = a.value(), bv = b.value()](
                             const Matrix& g, std::span<Matrix* const> acc) {
                           if (acc[0]) *acc[0] += g.cwiseProduct(bv);
                           if (acc[1]) *acc[1] += g.cwiseProduct(av);
                         });
}

Tensor sum(const Tensor& x) {
  Matrix y(1, 1);
  y(0, 0) = x.value().sum();
  return Tensor::from_op(std::move(y), "sum", {x},
                         [](const Matrix& g, std::span<Matrix* const> acc) {
                           if (acc[0]) acc[0]->array() += g(0, 0);
                         });
}

Tensor mean(const Tensor& x) {
  if (x.size() == 0) fail(ErrorKind::kShape, "mean of an empty tensor");
  const auto n = static_cast<double>(x.size());
  Matrix y(1, 1);
  y(0, 0) = x.value().sum() / n;
  return Tensor::from_op(std::move(y), "mean", {x},
                         [n](const Matrix& g, std::span<Matrix* const> acc) {
                           if (acc[0]) acc[0]->array() += g(0, 0) / n;
                         });
}

Tensor transpose(const Tensor& x) {
  return Tensor::from_op(x.value().transpose(), "transpose", {x},
                         [](const Matrix& g, std::span<Matrix* const> acc) {
                           if (acc[0]) *acc[0] += g.transpose();
                         });
}

Tensor slice_cols(const Tensor& x, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > x.cols())
    fail(ErrorKind::kShape, "slice_cols: [" + std::to_string(begin) + ", " +
                                std::to_string(begin + count) + ") outside " +
                                std::to_string(x.cols()) + " columns");
  return Tensor::from_op(x.value().middleCols(begin, count), "slice_cols", {x},
                         [begin, count](const Matrix& g, std::span<Matrix* const> acc) {
                           if (acc[0]) acc[0]->middleCols(begin, count) += g;
                         });
}

// ---------------------------------------------------------------------------
// STFT

Matrix hann_window(int n) {
  if (n <= 0) fail(ErrorKind::kParameter, "window length must be positive");
  Matrix w(1, n);
  for (int i = 0; i < n; ++i)
    w(0, i) = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

namespace {

// Windowed real DFT basis: frame * cos_basis = Re, frame * sin_basis = Im.
struct DftBasis {
  Matrix cos_basis;
  Matrix sin_basis;
};

std::shared_ptr<const DftBasis> dft_basis(const Matrix& window, int fft_size) {
  static std::mutex mu;
  static std::map<std::pair<std::vector<double>, int>,
                  std::shared_ptr<const DftBasis>>
      cache;
  std::vector<double> key(window.data(), window.data() + window.size());
  std::lock_guard lock(mu);
  auto it = cache.find({key, fft_size});
  if (it != cache.end()) return it->second;

  const Eigen::Index n = window.size();
  const Eigen::Index bins = fft_size / 2 + 1;
  auto basis = std::make_shared<DftBasis>();
  basis->cos_basis.resize(n, bins);
  basis->sin_basis.resize(n, bins);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < bins; ++k) {
      // Reduce i*k mod fft_size first to keep the angle small and exact.
      const double phase = 2.0 * std::numbers::pi *
                           static_cast<double>((i * k) % fft_size) / fft_size;
      basis->cos_basis(i, k) = window(0, i) * std::cos(phase);
      basis->sin_basis(i, k) = -window(0, i) * std::sin(phase);
    }
  }
  if (cache.size() > 16) cache.clear();
  cache.emplace(std::make_pair(std::move(key), fft_size), basis);
  return basis;
}

}  // namespace

Tensor stft_mag(const Tensor& x, const Matrix& window, int hop, int fft_size) {
  if (x.rows() != 1)
    fail(ErrorKind::kShape, "stft_mag: expected a 1xN signal, got " + dims(x.value()));
  const Eigen::Index win = window.size();
  if (win == 0) fail(ErrorKind::kParameter, "stft_mag: empty window");
  if (hop < 1) fail(ErrorKind::kParameter, "stft_mag: hop must be >= 1");
  if (fft_size < win)
    fail(ErrorKind::kParameter, "stft_mag: fft_size smaller than the window");
  const Eigen::Index n = x.cols();
  if (n < win)
    fail(ErrorKind::kLength, "stft_mag: signal of " + std::to_string(n) +
                                 " samples shorter than window " + std::to_string(win));
  const Eigen::Index frames = (n - win) / hop + 1;

  auto basis = dft_basis(window, fft_size);
  Matrix framed(frames, win);
  for (Eigen::Index f = 0; f < frames; ++f)
    framed.row(f) = x.value().block(0, f * hop, 1, win);
  const Matrix re = framed * basis->cos_basis;
  const Matrix im = framed * basis->sin_basis;
  Matrix mag = (re.array().square() + im.array().square()).sqrt().matrix();

  return Tensor::from_op(
      Matrix(mag), "stft_mag", {x},
      [basis, re, im, mag, hop, win, frames](const Matrix& g,
                                             std::span<Matrix* const> acc) {
        if (!acc[0]) return;
        const Matrix scale =
            (mag.array() > 0.0).select(g.array() / mag.array(), 0.0).matrix();
        const Matrix dframed =
            re.cwiseProduct(scale) * basis->cos_basis.transpose() +
            im.cwiseProduct(scale) * basis->sin_basis.transpose();
        for (Eigen::Index f = 0; f < frames; ++f)
          acc[0]->block(0, f * hop, 1, win) += dframed.row(f);
      });
}

Tensor stft_mag(const Tensor& x, const StftParams& params) {
  return stft_mag(x, hann_window(params.window), params.hop, params.fft_size);
}

}  // namespace distilrobust
