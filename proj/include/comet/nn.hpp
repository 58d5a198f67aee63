#pragma once

// Minimal reverse-mode automatic differentiation over Eigen matrices, plus
// a named parameter store and an adaptive-moment optimizer. The scalar type
// is a template parameter: models train in single precision and switch to
// double precision for finite-difference gradient verification.
//
// A Graph is a tape: forward execution appends nodes in topological order,
// backward() walks the tape in reverse. Sequence lengths and layer widths
// in this project are tiny, so per-node closures and value copies are an
// acceptable cost in exchange for a simple, auditable core.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "comet/token.hpp"

namespace comet {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <typename S>
class Graph;

// Lightweight handle to a tape node.
template <typename S>
struct Var {
  Graph<S>* graph = nullptr;
  int index = -1;
  bool valid() const { return graph != nullptr && index >= 0; }
  const Mat<S>& value() const;
  const Mat<S>& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

// One learnable tensor plus its optimizer state.
template <typename S>
struct Param {
  std::string name;
  Mat<S> value;
  Mat<S> grad;
  Mat<S> adam_m, adam_v;
  void zero_grad() { grad = Mat<S>::Zero(value.rows(), value.cols()); }
};

template <typename S>
class Graph {
 public:
  struct Node {
    Mat<S> value;
    Mat<S> grad;
    // Propagates this node's grad into its parents; `self` is this node's
    // tape index (closures must not capture Node references: the vector
    // reallocates as the tape grows).
    std::function<void(Graph&, int self)> back;
    bool needs_grad = false;
    Param<S>* param = nullptr;  // set for parameter leaves
  };

  Var<S> leaf(Mat<S> value, bool needs_grad) {
    Node n;
    n.value = std::move(value);
    n.grad = Mat<S>::Zero(n.value.rows(), n.value.cols());
    n.needs_grad = needs_grad;
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  Var<S> constant(Mat<S> value) { return leaf(std::move(value), false); }

  Var<S> scalar(S value) {
    Mat<S> m(1, 1);
    m(0, 0) = value;
    return constant(std::move(m));
  }

  Var<S> param(Param<S>& p) {
    Var<S> v = leaf(p.value, true);
    nodes_[v.index].param = &p;
    return v;
  }

  Var<S> make(Mat<S> value, bool needs_grad,
              std::function<void(Graph&, int)> back) {
    Var<S> v = leaf(std::move(value), needs_grad);
    if (needs_grad) nodes_[v.index].back = std::move(back);
    return v;
  }

  Node& node(int i) { return nodes_[i]; }
  const Node& node(int i) const { return nodes_[i]; }
  size_t size() const { return nodes_.size(); }

  // Seeds d(root)/d(root) = 1 and replays the tape in reverse. The root
  // must be a 1x1 scalar. Parameter-leaf gradients are folded back into
  // their Param slots at the end.
  void backward(Var<S> root) {
    if (root.value().rows() != 1 || root.value().cols() != 1)
      throw Error(ErrorCode::BadConfig, "backward root must be scalar");
    nodes_[root.index].grad(0, 0) = S(1);
    for (int i = root.index; i >= 0; --i) {
      Node& n = nodes_[i];
      if (n.needs_grad && n.back) n.back(*this, i);
    }
    for (Node& n : nodes_)
      if (n.param != nullptr && n.needs_grad) n.param->grad += n.grad;
  }

 private:
  std::vector<Node> nodes_;
};

template <typename S>
const Mat<S>& Var<S>::value() const {
  return graph->node(index).value;
}
template <typename S>
const Mat<S>& Var<S>::grad() const {
  return graph->node(index).grad;
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

namespace nn_detail {

template <typename S>
bool needs(Var<S> v) {
  return v.graph->node(v.index).needs_grad;
}

}  // namespace nn_detail

// a * b (matrix product).
template <typename S>
Var<S> matmul(Var<S> a, Var<S> b) {
  Graph<S>& g = *a.graph;
  if (a.cols() != b.rows())
    throw Error(ErrorCode::BadConfig, "matmul shape mismatch");
  int ai = a.index, bi = b.index;
  return g.make(a.value() * b.value(),
                nn_detail::needs(a) || nn_detail::needs(b),
                [ai, bi](Graph<S>& gr, int self) {
                  const Mat<S>& go = gr.node(self).grad;
                  if (gr.node(ai).needs_grad)
                    gr.node(ai).grad += go * gr.node(bi).value.transpose();
                  if (gr.node(bi).needs_grad)
                    gr.node(bi).grad += gr.node(ai).value.transpose() * go;
                });
}

template <typename S>
Var<S> transpose(Var<S> a) {
  Graph<S>& g = *a.graph;
  int ai = a.index;
  return g.make(a.value().transpose(), nn_detail::needs(a),
                [ai](Graph<S>& gr, int self) {
                  gr.node(ai).grad += gr.node(self).grad.transpose();
                });
}

// Same-shape elementwise sum.
template <typename S>
Var<S> add(Var<S> a, Var<S> b) {
  Graph<S>& g = *a.graph;
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorCode::BadConfig, "add shape mismatch");
  int ai = a.index, bi = b.index;
  return g.make(a.value() + b.value(),
                nn_detail::needs(a) || nn_detail::needs(b),
                [ai, bi](Graph<S>& gr, int self) {
                  const Mat<S>& go = gr.node(self).grad;
                  if (gr.node(ai).needs_grad) gr.node(ai).grad += go;
                  if (gr.node(bi).needs_grad) gr.node(bi).grad += go;
                });
}

// a + b broadcast over columns: b is a column vector added to every column.
template <typename S>
Var<S> add_bias(Var<S> a, Var<S> b) {
  Graph<S>& g = *a.graph;
  if (a.rows() != b.rows() || b.cols() != 1)
    throw Error(ErrorCode::BadConfig, "add_bias shape mismatch");
  if (a.cols() == 1) return add(a, b);
  Mat<S> value = a.value();
  value.colwise() += b.value().col(0);
  int ai = a.index, bi = b.index;
  return g.make(std::move(value), nn_detail::needs(a) || nn_detail::needs(b),
                [ai, bi](Graph<S>& gr, int self) {
                  const Mat<S>& go = gr.node(self).grad;
                  if (gr.node(ai).needs_grad) gr.node(ai).grad += go;
                  if (gr.node(bi).needs_grad)
                    gr.node(bi).grad += go.rowwise().sum();
                });
}

// Elementwise product.
template <typename S>
Var<S> hadamard(Var<S> a, Var<S> b) {
  Graph<S>& g = *a.graph;
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorCode::BadConfig, "hadamard shape mismatch");
  int ai = a.index, bi = b.index;
  return g.make(
      a.value().cwiseProduct(b.value()),
      nn_detail::needs(a) || nn_detail::needs(b),
      [ai, bi](Graph<S>& gr, int self) {
        const Mat<S>& go = gr.node(self).grad;
        if (gr.node(ai).needs_grad)
          gr.node(ai).grad += go.cwiseProduct(gr.node(bi).value);
        if (gr.node(bi).needs_grad)
          gr.node(bi).grad += go.cwiseProduct(gr.node(ai).value);
      });
}

// alpha * a + beta (elementwise, constants).
template <typename S>
Var<S> affine(Var<S> a, S alpha, S beta) {
  Graph<S>& g = *a.graph;
  Mat<S> value = (a.value().array() * alpha + beta).matrix();
  int ai = a.index;
  return g.make(std::move(value), nn_detail::needs(a),
                [ai, alpha](Graph<S>& gr, int self) {
                  gr.node(ai).grad += gr.node(self).grad * alpha;
                });
}

template <typename S>
Var<S> sub(Var<S> a, Var<S> b) {
  return add(a, affine(b, S(-1), S(0)));
}

template <typename S>
Var<S> sigmoid(Var<S> a) {
  Graph<S>& g = *a.graph;
  Mat<S> value =
      (S(1) / (S(1) + (-a.value().array()).exp())).matrix();
  int ai = a.index;
  return g.make(std::move(value), nn_detail::needs(a),
                [ai](Graph<S>& gr, int self) {
                  const Mat<S>& y = gr.node(self).value;
                  gr.node(ai).grad += gr.node(self).grad.cwiseProduct(
                      (y.array() * (S(1) - y.array())).matrix());
                });
}

template <typename S>
Var<S> tanh_op(Var<S> a) {
  Graph<S>& g = *a.graph;
  Mat<S> value = a.value().array().tanh().matrix();
  int ai = a.index;
  return g.make(std::move(value), nn_detail::needs(a),
                [ai](Graph<S>& gr, int self) {
                  const Mat<S>& y = gr.node(self).value;
                  gr.node(ai).grad += gr.node(self).grad.cwiseProduct(
                      (S(1) - y.array().square()).matrix());
                });
}

// Natural log, elementwise. Inputs must be strictly positive.
template <typename S>
Var<S> log_op(Var<S> a) {
  Graph<S>& g = *a.graph;
  Mat<S> value = a.value().array().log().matrix();
  int ai = a.index;
  return g.make(std::move(value), nn_detail::needs(a),
                [ai](Graph<S>& gr, int self) {
                  gr.node(ai).grad += gr.node(self)
                                          .grad.cwiseQuotient(gr.node(ai).value);
                });
}

// Column-wise softmax (each column normalized independently).
template <typename S>
Var<S> softmax_col(Var<S> a) {
  Graph<S>& g = *a.graph;
  Mat<S> value = a.value();
  for (Eigen::Index c = 0; c < value.cols(); ++c) {
    Eigen::Array<S, Eigen::Dynamic, 1> col = value.col(c).array();
    col -= col.maxCoeff();
    col = col.exp();
    value.col(c) = (col / col.sum()).matrix();
  }
  int ai = a.index;
  return g.make(std::move(value), nn_detail::needs(a),
                [ai](Graph<S>& gr, int self) {
                  const Mat<S>& y = gr.node(self).value;
                  const Mat<S>& go = gr.node(self).grad;
                  Mat<S>& da = gr.node(ai).grad;
                  for (Eigen::Index c = 0; c < y.cols(); ++c) {
                    S dot = y.col(c).dot(go.col(c));
                    da.col(c) +=
                        y.col(c).cwiseProduct(go.col(c) -
                                              Mat<S>::Constant(y.rows(), 1, dot));
                  }
                });
}

// Vertical stack: [a; b].
template <typename S>
Var<S> concat_rows(Var<S> a, Var<S> b) {
  Graph<S>& g = *a.graph;
  if (a.cols() != b.cols())
    throw Error(ErrorCode::BadConfig, "concat_rows shape mismatch");
  Mat<S> value(a.rows() + b.rows(), a.cols());
  value.topRows(a.rows()) = a.value();
  value.bottomRows(b.rows()) = b.value();
  int ai = a.index, bi = b.index;
  Eigen::Index ar = a.rows();
  return g.make(std::move(value), nn_detail::needs(a) || nn_detail::needs(b),
                [ai, bi, ar](Graph<S>& gr, int self) {
                  const Mat<S>& go = gr.node(self).grad;
                  if (gr.node(ai).needs_grad)
                    gr.node(ai).grad += go.topRows(ar);
                  if (gr.node(bi).needs_grad)
                    gr.node(bi).grad += go.bottomRows(go.rows() - ar);
                });
}

// Horizontal stack of column vectors / matrices with equal row counts.
template <typename S>
Var<S> concat_cols(const std::vector<Var<S>>& vs) {
  if (vs.empty())
    throw Error(ErrorCode::BadConfig, "concat_cols needs at least one input");
  Graph<S>& g = *vs[0].graph;
  Eigen::Index rows = vs[0].rows(), cols = 0;
  bool needs = false;
  for (const Var<S>& v : vs) {
    if (v.rows() != rows)
      throw Error(ErrorCode::BadConfig, "concat_cols shape mismatch");
    cols += v.cols();
    needs = needs || nn_detail::needs(v);
  }
  Mat<S> value(rows, cols);
  std::vector<int> idx;
  std::vector<Eigen::Index> width;
  Eigen::Index at = 0;
  for (const Var<S>& v : vs) {
    value.middleCols(at, v.cols()) = v.value();
    idx.push_back(v.index);
    width.push_back(v.cols());
    at += v.cols();
  }
  return g.make(std::move(value), needs,
                [idx, width](Graph<S>& gr, int self) {
                  const Mat<S>& go = gr.node(self).grad;
                  Eigen::Index at = 0;
                  for (size_t k = 0; k < idx.size(); ++k) {
                    if (gr.node(idx[k]).needs_grad)
                      gr.node(idx[k]).grad += go.middleCols(at, width[k]);
                    at += width[k];
                  }
                });
}

// Row slice [begin, begin+count).
template <typename S>
Var<S> rows(Var<S> a, Eigen::Index begin, Eigen::Index count) {
  Graph<S>& g = *a.graph;
  if (begin < 0 || begin + count > a.rows())
    throw Error(ErrorCode::BadConfig, "rows slice out of range");
  int ai = a.index;
  return g.make(Mat<S>(a.value().middleRows(begin, count)),
                nn_detail::needs(a), [ai, begin, count](Graph<S>& gr, int self) {
                  gr.node(ai).grad.middleRows(begin, count) +=
                      gr.node(self).grad;
                });
}

// Column slice [begin, begin+count).
template <typename S>
Var<S> cols(Var<S> a, Eigen::Index begin, Eigen::Index count) {
  Graph<S>& g = *a.graph;
  if (begin < 0 || begin + count > a.cols())
    throw Error(ErrorCode::BadConfig, "cols slice out of range");
  int ai = a.index;
  return g.make(Mat<S>(a.value().middleCols(begin, count)),
                nn_detail::needs(a), [ai, begin, count](Graph<S>& gr, int self) {
                  gr.node(ai).grad.middleCols(begin, count) +=
                      gr.node(self).grad;
                });
}

// Extends a column vector with zero rows up to total_rows.
template <typename S>
Var<S> pad_rows(Var<S> a, Eigen::Index total_rows) {
  Graph<S>& g = *a.graph;
  if (total_rows < a.rows())
    throw Error(ErrorCode::BadConfig, "pad_rows shrinks input");
  Mat<S> value = Mat<S>::Zero(total_rows, a.cols());
  value.topRows(a.rows()) = a.value();
  int ai = a.index;
  Eigen::Index ar = a.rows();
  return g.make(std::move(value), nn_detail::needs(a),
                [ai, ar](Graph<S>& gr, int self) {
                  gr.node(ai).grad += gr.node(self).grad.topRows(ar);
                });
}

// Single element as a 1x1 node.
template <typename S>
Var<S> pick(Var<S> a, Eigen::Index r, Eigen::Index c) {
  Graph<S>& g = *a.graph;
  if (r < 0 || r >= a.rows() || c < 0 || c >= a.cols())
    throw Error(ErrorCode::BadConfig, "pick out of range");
  Mat<S> value(1, 1);
  value(0, 0) = a.value()(r, c);
  int ai = a.index;
  return g.make(std::move(value), nn_detail::needs(a),
                [ai, r, c](Graph<S>& gr, int self) {
                  gr.node(ai).grad(r, c) += gr.node(self).grad(0, 0);
                });
}

// Sum of all entries as a 1x1 node.
template <typename S>
Var<S> sum_all(Var<S> a) {
  Graph<S>& g = *a.graph;
  Mat<S> value(1, 1);
  value(0, 0) = a.value().sum();
  int ai = a.index;
  return g.make(std::move(value), nn_detail::needs(a),
                [ai](Graph<S>& gr, int self) {
                  gr.node(ai).grad.array() += gr.node(self).grad(0, 0);
                });
}

// a scaled by a 1x1 node s (broadcast scalar multiply).
template <typename S>
Var<S> scale_by(Var<S> a, Var<S> s) {
  Graph<S>& g = *a.graph;
  if (s.rows() != 1 || s.cols() != 1)
    throw Error(ErrorCode::BadConfig, "scale_by expects 1x1 scale");
  int ai = a.index, si = s.index;
  return g.make(Mat<S>(a.value() * s.value()(0, 0)),
                nn_detail::needs(a) || nn_detail::needs(s),
                [ai, si](Graph<S>& gr, int self) {
                  const Mat<S>& go = gr.node(self).grad;
                  if (gr.node(ai).needs_grad)
                    gr.node(ai).grad += go * gr.node(si).value(0, 0);
                  if (gr.node(si).needs_grad)
                    gr.node(si).grad(0, 0) +=
                        go.cwiseProduct(gr.node(ai).value).sum();
                });
}

// Inverted dropout. Identity when rate <= 0; mask sampled from `rng` at
// construction, so a seeded caller is deterministic.
template <typename S>
Var<S> dropout(Var<S> a, double rate, std::mt19937_64& rng) {
  if (rate <= 0.0) return a;
  if (rate >= 1.0)
    throw Error(ErrorCode::BadConfig, "dropout rate must be < 1");
  Graph<S>& g = *a.graph;
  std::bernoulli_distribution keep(1.0 - rate);
  Mat<S> mask(a.rows(), a.cols());
  const S inv = S(1.0 / (1.0 - rate));
  for (Eigen::Index c = 0; c < mask.cols(); ++c)
    for (Eigen::Index r = 0; r < mask.rows(); ++r)
      mask(r, c) = keep(rng) ? inv : S(0);
  int ai = a.index;
  auto mask_ptr = std::make_shared<Mat<S>>(std::move(mask));
  return g.make(a.value().cwiseProduct(*mask_ptr), nn_detail::needs(a),
                [ai, mask_ptr](Graph<S>& gr, int self) {
                  gr.node(ai).grad +=
                      gr.node(self).grad.cwiseProduct(*mask_ptr);
                });
}

// ---------------------------------------------------------------------------
// Parameter store and optimizer
// ---------------------------------------------------------------------------

template <typename S>
class ParamStore {
 public:
  // Registers (or returns the existing) tensor of the given shape. New
  // tensors are filled uniformly from [-limit, limit]; pass limit 0 for
  // zero initialization (biases).
  Param<S>& get(const std::string& name, Eigen::Index rows,
                Eigen::Index cols, double limit, std::mt19937_64& rng) {
    auto it = params_.find(name);
    if (it != params_.end()) return *it->second;
    auto p = std::make_unique<Param<S>>();
    p->name = name;
    p->value = Mat<S>::Zero(rows, cols);
    if (limit > 0) {
      std::uniform_real_distribution<double> u(-limit, limit);
      for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
          p->value(r, c) = static_cast<S>(u(rng));
    }
    p->zero_grad();
    p->adam_m = Mat<S>::Zero(rows, cols);
    p->adam_v = Mat<S>::Zero(rows, cols);
    Param<S>& ref = *p;
    params_.emplace(name, std::move(p));
    order_.push_back(name);
    return ref;
  }

  Param<S>* find(const std::string& name) {
    auto it = params_.find(name);
    return it == params_.end() ? nullptr : it->second.get();
  }

  const std::vector<std::string>& names() const { return order_; }

  void zero_grads() {
    for (const std::string& n : order_) params_.at(n)->zero_grad();
  }

  size_t scalar_count() const {
    size_t n = 0;
    for (const std::string& name : order_) {
      const Param<S>& p = *params_.at(name);
      n += static_cast<size_t>(p.value.rows() * p.value.cols());
    }
    return n;
  }

  template <typename T>
  void copy_values_from(const ParamStore<T>& other) {
    for (const std::string& name : other.names()) {
      const Param<T>* src = const_cast<ParamStore<T>&>(other).find(name);
      auto p = std::make_unique<Param<S>>();
      p->name = name;
      p->value = src->value.template cast<S>();
      p->zero_grad();
      p->adam_m = Mat<S>::Zero(src->value.rows(), src->value.cols());
      p->adam_v = Mat<S>::Zero(src->value.rows(), src->value.cols());
      params_[name] = std::move(p);
    }
    order_ = other.names();
  }

 private:
  std::map<std::string, std::unique_ptr<Param<S>>> params_;
  std::vector<std::string> order_;
};

// Adaptive-moment estimation with bias correction.
template <typename S>
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double lr = 1e-3, double beta1 = 0.9,
                         double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamStore<S>& store) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (const std::string& name : store.names()) {
      Param<S>& p = *store.find(name);
      p.adam_m = S(beta1_) * p.adam_m + S(1 - beta1_) * p.grad;
      p.adam_v =
          (S(beta2_) * p.adam_v.array() +
           S(1 - beta2_) * p.grad.array().square())
              .matrix();
      Eigen::Array<S, Eigen::Dynamic, Eigen::Dynamic> m_hat =
          p.adam_m.array() / S(bc1);
      Eigen::Array<S, Eigen::Dynamic, Eigen::Dynamic> v_hat =
          p.adam_v.array() / S(bc2);
      p.value.array() -= S(lr_) * m_hat / (v_hat.sqrt() + S(eps_));
    }
  }

  int64_t steps_taken() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
};

}  // namespace comet
