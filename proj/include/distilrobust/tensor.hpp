// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace distilrobust {

// Every tensor in the core is a dense row-major double matrix. Vectors are
// 1xN rows, scalars are 1x1.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Receives the gradient of the op's output and one accumulator per parent
// (nullptr where the parent does not require a gradient). Implementations
// must add into the accumulators, never assign.
using BackwardFn =
    std::function<void(const Matrix& grad_out, std::span<Matrix* const>)>;

namespace detail {
struct Node;
}

// Handle to a node of a reverse-mode graph. Copies share the node.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Matrix value, bool requires_grad = false);

  static Tensor scalar(double v);
  static Tensor parameter(Matrix value) { return Tensor(std::move(value), true); }

  // Result of an op; records graph edges only when some parent requires grad.
  static Tensor from_op(Matrix value, std::string_view op,
                        std::vector<Tensor> parents, BackwardFn backward);

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Eigen::Index size() const { return value().size(); }
  double item() const;

  bool requires_grad() const;
  bool is_leaf() const;
  std::string_view op() const;

  // Zeros if backward has not reached this tensor.
  bool has_grad() const;
  Matrix grad() const;

  void zero_grad();

  // Populates grad on every requires_grad leaf reachable from this scalar.
  // Leaf gradients accumulate across calls.
  void backward() const;

  // Same values, no history.
  Tensor detach() const;

  // Leaves only: optimizers and finite differences write through these.
  Matrix& mutable_value();
  Matrix& mutable_grad();

  bool same_node(const Tensor& other) const { return node_ == other.node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

struct GradcheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Relative error is |a - n| / max(|a|, |n|, error_floor).
  double error_floor = 1e-3;
  // Multiplies analytic gradients by (1 + analytic_fault); negative control.
  double analytic_fault = 0.0;
};

struct GradcheckReport {
  std::vector<double> max_rel_error;  // one per input
  double tolerance = 0.0;

  double worst() const;
  bool passed() const { return worst() < tolerance; }
};

// Compares backward() gradients of the scalar `loss` against central
// differences, perturbing each entry of each (leaf, requires_grad) input.
// `loss` must rebuild the graph from the inputs on every call.
GradcheckReport gradcheck(const std::function<Tensor()>& loss,
                          std::span<Tensor> inputs,
                          const GradcheckOptions& options = {});

}  // namespace distilrobust
