#pragma once

#include <Eigen/Dense>
#include <cassert>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

// Reverse-mode automatic differentiation over dense matrices.
//
// Graphs are built eagerly inside a GradTape scope; the tape owns every
// intermediate node in creation order, which is also a valid topological
// order, so backward() is a single reverse sweep. Outside a tape (or inside
// NoGradScope) the same ops run as plain numerics and retain no graph.
//
// The scalar type is a template parameter: training uses float, gradient
// tests instantiate the identical code in double.

namespace love::nn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <typename S>
struct Node {
  Mat<S> value;
  Mat<S> grad;  // empty until touched by backward
  bool requires_grad = false;
  // Owning links: temporaries (constants) stay alive as long as the graph
  // references them. The tape severs these on teardown, so destruction of
  // long chains never recurses.
  std::vector<std::shared_ptr<Node<S>>> parents;
  std::function<void(const Mat<S>&)> backward;

  void add_grad(const Mat<S>& g) {
    if (grad.size() == 0) {
      grad = g;
    } else {
      grad += g;
    }
  }
};

template <typename S>
class GradTape;

namespace detail {
template <typename S>
inline GradTape<S>*& current_tape() {
  thread_local GradTape<S>* tape = nullptr;
  return tape;
}
}  // namespace detail

template <typename S>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node<S>> node) : node_(std::move(node)) {}

  static Tensor leaf(Mat<S> value, bool requires_grad = false) {
    auto n = std::make_shared<Node<S>>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }

  static Tensor constant(Mat<S> value) { return leaf(std::move(value), false); }

  static Tensor scalar(S v) {
    Mat<S> m(1, 1);
    m(0, 0) = v;
    return leaf(std::move(m), false);
  }

  bool defined() const { return node_ != nullptr; }
  const Mat<S>& value() const { return node_->value; }
  Mat<S>& value() { return node_->value; }
  Mat<S>& grad() { return node_->grad; }
  const Mat<S>& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }

  // Value of a 1x1 tensor.
  S item() const {
    assert(node_->value.size() == 1);
    return node_->value(0, 0);
  }

  Node<S>* node() const { return node_.get(); }
  const std::shared_ptr<Node<S>>& handle() const { return node_; }

 private:
  std::shared_ptr<Node<S>> node_;
};

// Owns all intermediate nodes created while it is the active tape.
// Destruction severs parent links tape-entry by tape-entry, so arbitrarily
// deep graphs (long BPTT chains) never unwind recursively.
template <typename S>
class GradTape {
 public:
  GradTape() : prev_(detail::current_tape<S>()) { detail::current_tape<S>() = this; }

  ~GradTape() {
    for (auto& n : nodes_) {
      n->parents.clear();
      n->backward = nullptr;
    }
    detail::current_tape<S>() = prev_;
  }

  GradTape(const GradTape&) = delete;
  GradTape& operator=(const GradTape&) = delete;

  static GradTape* current() { return detail::current_tape<S>(); }

  void record(std::shared_ptr<Node<S>> node) { nodes_.push_back(std::move(node)); }

  // Backpropagate from a scalar root recorded on this tape.
  void backward(const Tensor<S>& root) {
    if (root.value().size() != 1) {
      throw std::invalid_argument("backward: root must be a 1x1 tensor");
    }
    Mat<S> one(1, 1);
    one(0, 0) = S(1);
    root.node()->add_grad(one);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      Node<S>* n = it->get();
      if (n->backward && n->grad.size() != 0) {
        n->backward(n->grad);
      }
    }
    // Intermediate grads are not reused; drop them so a second backward on
    // the same tape starts clean.
    for (auto& n : nodes_) n->grad.resize(0, 0);
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  GradTape<S>* prev_;
  std::vector<std::shared_ptr<Node<S>>> nodes_;
};

// Disables graph recording within its scope.
template <typename S>
class NoGradScope {
 public:
  NoGradScope() : saved_(detail::current_tape<S>()) { detail::current_tape<S>() = nullptr; }
  ~NoGradScope() { detail::current_tape<S>() = saved_; }
  NoGradScope(const NoGradScope&) = delete;

 private:
  GradTape<S>* saved_;
};

namespace detail {

template <typename S, typename Backward>
Tensor<S> make_op(Mat<S> value, std::initializer_list<Tensor<S>> parents, Backward&& bw) {
  auto n = std::make_shared<Node<S>>();
  n->value = std::move(value);
  GradTape<S>* tape = GradTape<S>::current();
  if (tape) {
    bool rg = false;
    for (const auto& p : parents) rg = rg || p.requires_grad();
    if (rg) {
      n->requires_grad = true;
      for (const auto& p : parents) n->parents.push_back(p.handle());
      n->backward = std::forward<Backward>(bw);
    }
    tape->record(n);
  }
  return Tensor<S>(std::move(n));
}

// Variant for ops whose backward needs the output value: the factory is
// called with the output node and returns the backward closure.
template <typename S, typename BackwardFactory>
Tensor<S> make_op_out(Mat<S> value, std::initializer_list<Tensor<S>> parents,
                      BackwardFactory&& make_bw) {
  auto n = std::make_shared<Node<S>>();
  n->value = std::move(value);
  GradTape<S>* tape = GradTape<S>::current();
  if (tape) {
    bool rg = false;
    for (const auto& p : parents) rg = rg || p.requires_grad();
    if (rg) {
      n->requires_grad = true;
      for (const auto& p : parents) n->parents.push_back(p.handle());
      n->backward = make_bw(n.get());
    }
    tape->record(n);
  }
  return Tensor<S>(std::move(n));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Core ops. Each backward closure captures raw parent pointers; the tape
// guarantees they outlive the closure.
// ---------------------------------------------------------------------------

template <typename S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  Node<S>* an = a.node();
  Node<S>* bn = b.node();
  return detail::make_op<S>(
      a.value() * b.value(), {a, b}, [an, bn](const Mat<S>& g) {
        if (an->requires_grad) an->add_grad(g * bn->value.transpose());
        if (bn->requires_grad) bn->add_grad(an->value.transpose() * g);
      });
}

template <typename S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  Node<S>* an = a.node();
  Node<S>* bn = b.node();
  if (a.rows() == b.rows() && a.cols() == b.cols()) {
    return detail::make_op<S>(a.value() + b.value(), {a, b}, [an, bn](const Mat<S>& g) {
      if (an->requires_grad) an->add_grad(g);
      if (bn->requires_grad) bn->add_grad(g);
    });
  }
  // Row-vector broadcast (bias add).
  if (b.rows() == 1 && b.cols() == a.cols()) {
    Mat<S> out = a.value();
    out.rowwise() += b.value().row(0);
    return detail::make_op<S>(std::move(out), {a, b}, [an, bn](const Mat<S>& g) {
      if (an->requires_grad) an->add_grad(g);
      if (bn->requires_grad) bn->add_grad(g.colwise().sum());
    });
  }
  throw std::invalid_argument("add: incompatible shapes");
}

template <typename S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("sub: incompatible shapes");
  }
  Node<S>* an = a.node();
  Node<S>* bn = b.node();
  return detail::make_op<S>(a.value() - b.value(), {a, b}, [an, bn](const Mat<S>& g) {
    if (an->requires_grad) an->add_grad(g);
    if (bn->requires_grad) bn->add_grad(-g);
  });
}

template <typename S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("mul: incompatible shapes");
  }
  Node<S>* an = a.node();
  Node<S>* bn = b.node();
  return detail::make_op<S>(
      a.value().cwiseProduct(b.value()), {a, b}, [an, bn](const Mat<S>& g) {
        if (an->requires_grad) an->add_grad(g.cwiseProduct(bn->value));
        if (bn->requires_grad) bn->add_grad(g.cwiseProduct(an->value));
      });
}

template <typename S>
Tensor<S> div(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("div: incompatible shapes");
  }
  Node<S>* an = a.node();
  Node<S>* bn = b.node();
  return detail::make_op<S>(
      a.value().cwiseQuotient(b.value()), {a, b}, [an, bn](const Mat<S>& g) {
        if (an->requires_grad) an->add_grad(g.cwiseQuotient(bn->value));
        if (bn->requires_grad) {
          bn->add_grad(-g.cwiseProduct(an->value)
                            .cwiseQuotient(bn->value.cwiseProduct(bn->value)));
        }
      });
}

template <typename S>
Tensor<S> scale(const Tensor<S>& a, S c) {
  Node<S>* an = a.node();
  return detail::make_op<S>(a.value() * c, {a}, [an, c](const Mat<S>& g) {
    if (an->requires_grad) an->add_grad(g * c);
  });
}

template <typename S>
Tensor<S> add_scalar(const Tensor<S>& a, S c) {
  Node<S>* an = a.node();
  return detail::make_op<S>((a.value().array() + c).matrix(), {a}, [an](const Mat<S>& g) {
    if (an->requires_grad) an->add_grad(g);
  });
}

template <typename S>
Tensor<S> neg(const Tensor<S>& a) {
  return scale(a, S(-1));
}

// --- elementwise nonlinearities ---

template <typename S>
Tensor<S> tanh(const Tensor<S>& a) {
  Node<S>* an = a.node();
  return detail::make_op_out<S>(
      a.value().array().tanh().matrix(), {a}, [an](Node<S>* on) {
        return [an, on](const Mat<S>& g) {
          if (an->requires_grad)
            an->add_grad((g.array() * (S(1) - on->value.array().square())).matrix());
        };
      });
}

template <typename S>
Tensor<S> sigmoid(const Tensor<S>& a) {
  Node<S>* an = a.node();
  return detail::make_op_out<S>(
      (S(1) / (S(1) + (-a.value().array()).exp())).matrix(), {a}, [an](Node<S>* on) {
        return [an, on](const Mat<S>& g) {
          if (an->requires_grad)
            an->add_grad(
                (g.array() * on->value.array() * (S(1) - on->value.array())).matrix());
        };
      });
}

template <typename S>
Tensor<S> relu(const Tensor<S>& a) {
  Node<S>* an = a.node();
  return detail::make_op<S>(a.value().cwiseMax(S(0)), {a}, [an](const Mat<S>& g) {
    if (an->requires_grad)
      an->add_grad((g.array() * (an->value.array() > S(0)).template cast<S>()).matrix());
  });
}

template <typename S>
Tensor<S> elu(const Tensor<S>& a) {
  Mat<S> y = a.value().unaryExpr([](S x) { return x > S(0) ? x : S(std::expm1(double(x))); });
  Node<S>* an = a.node();
  return detail::make_op<S>(std::move(y), {a}, [an](const Mat<S>& g) {
    if (an->requires_grad) {
      Mat<S> d = an->value.unaryExpr(
          [](S x) { return x > S(0) ? S(1) : S(std::exp(double(x))); });
      an->add_grad(g.cwiseProduct(d));
    }
  });
}

template <typename S>
Tensor<S> softplus(const Tensor<S>& a) {
  // log(1 + e^x), numerically stable.
  Mat<S> y = a.value().unaryExpr([](S x) {
    return S(std::max(double(x), 0.0) + std::log1p(std::exp(-std::abs(double(x)))));
  });
  Node<S>* an = a.node();
  return detail::make_op<S>(std::move(y), {a}, [an](const Mat<S>& g) {
    if (an->requires_grad) {
      Mat<S> d = an->value.unaryExpr(
          [](S x) { return S(1.0 / (1.0 + std::exp(-double(x)))); });
      an->add_grad(g.cwiseProduct(d));
    }
  });
}

template <typename S>
Tensor<S> exp(const Tensor<S>& a) {
  Node<S>* an = a.node();
  return detail::make_op_out<S>(
      a.value().array().exp().matrix(), {a}, [an](Node<S>* on) {
        return [an, on](const Mat<S>& g) {
          if (an->requires_grad) an->add_grad(g.cwiseProduct(on->value));
        };
      });
}

template <typename S>
Tensor<S> log(const Tensor<S>& a) {
  Node<S>* an = a.node();
  return detail::make_op<S>(a.value().array().log().matrix(), {a}, [an](const Mat<S>& g) {
    if (an->requires_grad) an->add_grad(g.cwiseQuotient(an->value));
  });
}

template <typename S>
Tensor<S> square(const Tensor<S>& a) {
  Node<S>* an = a.node();
  return detail::make_op<S>(a.value().array().square().matrix(), {a}, [an](const Mat<S>& g) {
    if (an->requires_grad) an->add_grad((g.array() * S(2) * an->value.array()).matrix());
  });
}

// sqrt with zero subgradient at zero, so ensemble standard deviations of
// identical particles backpropagate cleanly.
template <typename S>
Tensor<S> sqrt_guarded(const Tensor<S>& a) {
  Node<S>* an = a.node();
  return detail::make_op_out<S>(
      a.value().array().max(S(0)).sqrt().matrix(), {a}, [an](Node<S>* on) {
        return [an, on](const Mat<S>& g) {
          if (an->requires_grad) {
            Mat<S> d = on->value.unaryExpr(
                [](S y) { return y > S(0) ? S(0.5) / y : S(0); });
            an->add_grad(g.cwiseProduct(d));
          }
        };
      });
}

// --- reductions ---

template <typename S>
Tensor<S> sum(const Tensor<S>& a) {
  Mat<S> y(1, 1);
  y(0, 0) = a.value().sum();
  Node<S>* an = a.node();
  return detail::make_op<S>(std::move(y), {a}, [an](const Mat<S>& g) {
    if (an->requires_grad)
      an->add_grad(Mat<S>::Constant(an->value.rows(), an->value.cols(), g(0, 0)));
  });
}

template <typename S>
Tensor<S> mean(const Tensor<S>& a) {
  const S n = static_cast<S>(a.value().size());
  Mat<S> y(1, 1);
  y(0, 0) = a.value().sum() / n;
  Node<S>* an = a.node();
  return detail::make_op<S>(std::move(y), {a}, [an, n](const Mat<S>& g) {
    if (an->requires_grad)
      an->add_grad(Mat<S>::Constant(an->value.rows(), an->value.cols(), g(0, 0) / n));
  });
}

// Sum over columns: (n x m) -> (n x 1).
template <typename S>
Tensor<S> rowwise_sum(const Tensor<S>& a) {
  Node<S>* an = a.node();
  return detail::make_op<S>(a.value().rowwise().sum(), {a}, [an](const Mat<S>& g) {
    if (an->requires_grad) an->add_grad(g.replicate(1, an->value.cols()));
  });
}

// --- structure ---

template <typename S>
Tensor<S> concat_cols(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("concat_cols: row mismatch");
  Mat<S> y(a.rows(), a.cols() + b.cols());
  y.leftCols(a.cols()) = a.value();
  y.rightCols(b.cols()) = b.value();
  Node<S>* an = a.node();
  Node<S>* bn = b.node();
  const Eigen::Index ac = a.cols();
  return detail::make_op<S>(std::move(y), {a, b}, [an, bn, ac](const Mat<S>& g) {
    if (an->requires_grad) an->add_grad(g.leftCols(ac));
    if (bn->requires_grad) bn->add_grad(g.rightCols(g.cols() - ac));
  });
}

template <typename S>
Tensor<S> slice_cols(const Tensor<S>& a, Eigen::Index start, Eigen::Index n) {
  if (start < 0 || start + n > a.cols()) throw std::out_of_range("slice_cols");
  Node<S>* an = a.node();
  return detail::make_op<S>(
      Mat<S>(a.value().middleCols(start, n)), {a}, [an, start, n](const Mat<S>& g) {
        if (an->requires_grad) {
          Mat<S> full = Mat<S>::Zero(an->value.rows(), an->value.cols());
          full.middleCols(start, n) = g;
          an->add_grad(full);
        }
      });
}

// Cuts the graph: output value aliases the input value, no gradient flows.
template <typename S>
Tensor<S> detach(const Tensor<S>& a) {
  return Tensor<S>::constant(a.value());
}

// --- convenience ---

template <typename S>
Tensor<S> linear(const Tensor<S>& x, const Tensor<S>& W, const Tensor<S>& b) {
  return add(matmul(x, W), b);
}

template <typename S>
Tensor<S> operator+(const Tensor<S>& a, const Tensor<S>& b) { return add(a, b); }
template <typename S>
Tensor<S> operator-(const Tensor<S>& a, const Tensor<S>& b) { return sub(a, b); }
template <typename S>
Tensor<S> operator*(const Tensor<S>& a, S c) { return scale(a, c); }
template <typename S>
Tensor<S> operator*(S c, const Tensor<S>& a) { return scale(a, c); }

}  // namespace love::nn
