// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "distilrobust/error.hpp"

namespace distilrobust {

namespace detail {

struct Node {
  Matrix value;
  Matrix grad;
  bool grad_ready = false;
  bool requires_grad = false;
  std::string_view op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn backward;

  void ensure_grad() {
    if (!grad_ready) {
      grad = Matrix::Zero(value.rows(), value.cols());
      grad_ready = true;
    }
  }
};

}  // namespace detail

namespace {

const detail::Node& checked(const std::shared_ptr<detail::Node>& n) {
  if (!n) fail(ErrorKind::kContract, "use of an undefined tensor");
  return *n;
}

}  // namespace

Tensor::Tensor(Matrix value, bool requires_grad)
    : node_(std::make_shared<detail::Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::scalar(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return Tensor(std::move(m));
}

Tensor Tensor::from_op(Matrix value, std::string_view op,
                       std::vector<Tensor> parents, BackwardFn backward) {
  Tensor out(std::move(value));
  out.node_->op = op;
  const bool any = std::any_of(parents.begin(), parents.end(), [](const Tensor& p) {
    return p.defined() && p.requires_grad();
  });
  if (!any) return out;
  out.node_->requires_grad = true;
  out.node_->backward = std::move(backward);
  out.node_->parents.reserve(parents.size());
  for (auto& p : parents) out.node_->parents.push_back(p.node_);
  return out;
}

const Matrix& Tensor::value() const { return checked(node_).value; }

double Tensor::item() const {
  const Matrix& v = value();
  if (v.size() != 1)
    fail(ErrorKind::kShape, "item() on a tensor of " + std::to_string(v.rows()) +
                                "x" + std::to_string(v.cols()));
  return v(0, 0);
}

bool Tensor::requires_grad() const { return checked(node_).requires_grad; }
bool Tensor::is_leaf() const { return !checked(node_).backward; }
std::string_view Tensor::op() const { return checked(node_).op; }
bool Tensor::has_grad() const { return checked(node_).grad_ready; }

Matrix Tensor::grad() const {
  const auto& n = checked(node_);
  if (n.grad_ready) return n.grad;
  return Matrix::Zero(n.value.rows(), n.value.cols());
}

void Tensor::zero_grad() {
  checked(node_);
  node_->grad.resize(0, 0);
  node_->grad_ready = false;
}

Tensor Tensor::detach() const { return Tensor(value()); }

Matrix& Tensor::mutable_value() {
  checked(node_);
  if (node_->backward)
    fail(ErrorKind::kContract, "only leaf tensors may be mutated");
  return node_->value;
}

Matrix& Tensor::mutable_grad() {
  checked(node_);
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::backward() const {
  const auto& root = checked(node_);
  if (root.value.size() != 1)
    fail(ErrorKind::kContract, "backward() requires a scalar loss");
  if (!root.requires_grad) return;

  // Iterative post-order DFS; `order` ends up parents-before-children.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      detail::Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  // Interior gradients are per-pass; leaf gradients accumulate.
  for (detail::Node* n : order) {
    if (n->backward) {
      n->grad_ready = false;
      n->ensure_grad();
    }
  }
  node_->ensure_grad();
  node_->grad(0, 0) += 1.0;

  std::vector<Matrix*> accumulators;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (!n->backward) continue;
    accumulators.clear();
    for (auto& p : n->parents) {
      if (p->requires_grad) {
        p->ensure_grad();
        accumulators.push_back(&p->grad);
      } else {
        accumulators.push_back(nullptr);
      }
    }
    n->backward(n->grad, accumulators);
  }
}

double GradcheckReport::worst() const {
  double w = 0.0;
  for (double e : max_rel_error) w = std::max(w, std::isnan(e) ? INFINITY : e);
  return w;
}

GradcheckReport gradcheck(const std::function<Tensor()>& loss,
                          std::span<Tensor> inputs,
                          const GradcheckOptions& options) {
  for (auto& in : inputs) {
    if (!in.is_leaf() || !in.requires_grad())
      fail(ErrorKind::kContract, "gradcheck inputs must be trainable leaves");
    in.zero_grad();
  }
  loss().backward();

  GradcheckReport report;
  report.tolerance = options.tolerance;
  for (auto& in : inputs) {
    const Matrix analytic = in.grad() * (1.0 + options.analytic_fault);
    Matrix& v = in.mutable_value();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double saved = v.data()[i];
      v.data()[i] = saved + options.step;
      const double up = loss().item();
      v.data()[i] = saved - options.step;
      const double down = loss().item();
      v.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double a = analytic.data()[i];
      const double denom =
          std::max({std::abs(a), std::abs(numeric), options.error_floor});
      const double err = std::abs(a - numeric) / denom;
      worst = std::isnan(err) ? err : std::max(worst, err);
      if (std::isnan(worst)) break;
    }
    report.max_rel_error.push_back(worst);
  }
  return report;
}

}  // namespace distilrobust
