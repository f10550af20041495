#ifndef ORGMOL_TENSOR_TAPE_HPP
#define ORGMOL_TENSOR_TAPE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "orgmol/tensor/tensor.hpp"

namespace orgmol {

// Reverse-mode tape. Node ids are topological by construction; backward walks
// them once in reverse and releases intermediate gradients after use.
class Tape {
 public:
  using NodeId = int;

  explicit Tape(bool check_finite = false) : check_finite_(check_finite) {}

  NodeId leaf(Tensor value, bool requires_grad = false) {
    return push(std::move(value), requires_grad, nullptr);
  }
  NodeId constant(Tensor value) { return leaf(std::move(value), false); }

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  const Tensor& grad(NodeId id) const { return nodes_[id].grad; }

  NodeId matmul(NodeId a, NodeId b) {
    const Tensor& x = value(a);
    const Tensor& y = value(b);
    if (x.cols() != y.rows()) throw ShapeMismatch("matmul inner dimensions");
    Tensor out({x.rows(), y.cols()});
    gemm(x, false, y, false, out);
    return push(std::move(out), true, [this, a, b](const Tensor& g, NodeId) {
      if (wants(a)) {
        Tensor ga({value(a).rows(), value(a).cols()});
        gemm(g, false, value(b), true, ga);  // g * y^T
        accumulate(a, ga);
      }
      if (wants(b)) {
        Tensor gb({value(b).rows(), value(b).cols()});
        gemm(value(a), true, g, false, gb);  // x^T * g
        accumulate(b, gb);
      }
    });
  }

  // Elementwise add; also accepts a row vector (1 x M) broadcast over rows.
  NodeId add(NodeId a, NodeId b) {
    const Tensor& x = value(a);
    const Tensor& y = value(b);
    if (x.same_shape(y)) {
      Tensor out = x;
      for (size_t i = 0; i < out.size(); ++i) out.data[i] += y.data[i];
      return push(std::move(out), true, [this, a, b](const Tensor& g, NodeId) {
        if (wants(a)) accumulate(a, g);
        if (wants(b)) accumulate(b, g);
      });
    }
    if (y.rows() == 1 && y.cols() == x.cols()) {
      Tensor out = x;
      for (int r = 0; r < x.rows(); ++r)
        for (int c = 0; c < x.cols(); ++c) out.at(r, c) += y.at(0, c);
      return push(std::move(out), true, [this, a, b](const Tensor& g, NodeId) {
        if (wants(a)) accumulate(a, g);
        if (wants(b)) {
          Tensor gb({1, g.cols()});
          for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < g.cols(); ++c) gb.at(0, c) += g.at(r, c);
          accumulate(b, gb);
        }
      });
    }
    throw ShapeMismatch("add operands");
  }

  NodeId mul(NodeId a, NodeId b) {
    const Tensor& x = value(a);
    const Tensor& y = value(b);
    if (!x.same_shape(y)) throw ShapeMismatch("mul operands");
    Tensor out = x;
    for (size_t i = 0; i < out.size(); ++i) out.data[i] *= y.data[i];
    return push(std::move(out), true, [this, a, b](const Tensor& g, NodeId) {
      if (wants(a)) {
        Tensor ga = g;
        for (size_t i = 0; i < ga.size(); ++i) ga.data[i] *= value(b).data[i];
        accumulate(a, ga);
      }
      if (wants(b)) {
        Tensor gb = g;
        for (size_t i = 0; i < gb.size(); ++i) gb.data[i] *= value(a).data[i];
        accumulate(b, gb);
      }
    });
  }

  NodeId scale(NodeId a, double s) {
    Tensor out = value(a);
    for (double& v : out.data) v *= s;
    return push(std::move(out), true, [this, a, s](const Tensor& g, NodeId) {
      if (!wants(a)) return;
      Tensor ga = g;
      for (double& v : ga.data) v *= s;
      accumulate(a, ga);
    });
  }

  NodeId add_scalar(NodeId a, double s) {
    Tensor out = value(a);
    for (double& v : out.data) v += s;
    return push(std::move(out), true, [this, a](const Tensor& g, NodeId) {
      if (wants(a)) accumulate(a, g);
    });
  }

  NodeId relu(NodeId a) {
    Tensor out = value(a);
    for (double& v : out.data) v = v > 0 ? v : 0.0;
    return push(std::move(out), true, [this, a](const Tensor& g, NodeId out_id) {
      if (!wants(a)) return;
      Tensor ga = g;
      const Tensor& y = value(out_id);
      for (size_t i = 0; i < ga.size(); ++i)
        if (y.data[i] <= 0) ga.data[i] = 0.0;
      accumulate(a, ga);
    });
  }

  NodeId log(NodeId a) {
    Tensor out = value(a);
    for (double& v : out.data) v = std::log(v);
    return push(std::move(out), true, [this, a](const Tensor& g, NodeId) {
      if (!wants(a)) return;
      Tensor ga = g;
      for (size_t i = 0; i < ga.size(); ++i) ga.data[i] /= value(a).data[i];
      accumulate(a, ga);
    });
  }

  // Row softmax (axis 1 of a 2-D tensor).
  NodeId softmax_rows(NodeId a) {
    const Tensor& x = value(a);
    Tensor out = x;
    for (int r = 0; r < x.rows(); ++r) {
      double mx = x.at(r, 0);
      for (int c = 1; c < x.cols(); ++c) mx = std::max(mx, x.at(r, c));
      double sum = 0.0;
      for (int c = 0; c < x.cols(); ++c) {
        out.at(r, c) = std::exp(x.at(r, c) - mx);
        sum += out.at(r, c);
      }
      for (int c = 0; c < x.cols(); ++c) out.at(r, c) /= sum;
    }
    return push(std::move(out), true, [this, a](const Tensor& g, NodeId out_id) {
      if (!wants(a)) return;
      const Tensor& y = value(out_id);
      Tensor ga({y.rows(), y.cols()});
      for (int r = 0; r < y.rows(); ++r) {
        double dot = 0.0;
        for (int c = 0; c < y.cols(); ++c) dot += g.at(r, c) * y.at(r, c);
        for (int c = 0; c < y.cols(); ++c)
          ga.at(r, c) = y.at(r, c) * (g.at(r, c) - dot);
      }
      accumulate(a, ga);
    });
  }

  // Concatenate 2-D tensors along columns (axis 1) or rows (axis 0).
  NodeId concat(const std::vector<NodeId>& parts, int axis) {
    if (parts.empty()) throw ShapeMismatch("concat of nothing");
    if (axis != 0 && axis != 1) throw ShapeMismatch("concat axis");
    int rows = value(parts[0]).rows(), cols = value(parts[0]).cols();
    int total = 0;
    for (NodeId p : parts) {
      const Tensor& t = value(p);
      if (axis == 1 && t.rows() != rows) throw ShapeMismatch("concat rows");
      if (axis == 0 && t.cols() != cols) throw ShapeMismatch("concat cols");
      total += axis == 1 ? t.cols() : t.rows();
    }
    Tensor out(axis == 1 ? std::vector<int>{rows, total}
                         : std::vector<int>{total, cols});
    int offset = 0;
    for (NodeId p : parts) {
      const Tensor& t = value(p);
      if (axis == 1) {
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < t.cols(); ++c) out.at(r, offset + c) = t.at(r, c);
        offset += t.cols();
      } else {
        for (int r = 0; r < t.rows(); ++r)
          for (int c = 0; c < cols; ++c) out.at(offset + r, c) = t.at(r, c);
        offset += t.rows();
      }
    }
    return push(std::move(out), true,
                [this, parts, axis](const Tensor& g, NodeId) {
                  int offset = 0;
                  for (NodeId p : parts) {
                    const Tensor& t = value(p);
                    int span = axis == 1 ? t.cols() : t.rows();
                    if (wants(p)) {
                      Tensor gp({t.rows(), t.cols()});
                      if (axis == 1) {
                        for (int r = 0; r < t.rows(); ++r)
                          for (int c = 0; c < t.cols(); ++c)
                            gp.at(r, c) = g.at(r, offset + c);
                      } else {
                        for (int r = 0; r < t.rows(); ++r)
                          for (int c = 0; c < t.cols(); ++c)
                            gp.at(r, c) = g.at(offset + r, c);
                      }
                      accumulate(p, gp);
                    }
                    offset += span;
                  }
                });
  }

  NodeId transpose(NodeId a) {
    const Tensor& x = value(a);
    Tensor out({x.cols(), x.rows()});
    for (int r = 0; r < x.rows(); ++r)
      for (int c = 0; c < x.cols(); ++c) out.at(c, r) = x.at(r, c);
    return push(std::move(out), true, [this, a](const Tensor& g, NodeId) {
      if (!wants(a)) return;
      Tensor ga({g.cols(), g.rows()});
      for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) ga.at(c, r) = g.at(r, c);
      accumulate(a, ga);
    });
  }

  NodeId reshape(NodeId a, std::vector<int> shape) {
    if (Tensor::count(shape) != value(a).size())
      throw ShapeMismatch("reshape element count");
    Tensor out(std::move(shape), value(a).data);
    return push(std::move(out), true, [this, a](const Tensor& g, NodeId) {
      if (!wants(a)) return;
      Tensor ga(value(a).shape, g.data);
      accumulate(a, ga);
    });
  }

  NodeId sum(NodeId a) {
    double total = 0.0;
    for (double v : value(a).data) total += v;
    Tensor out({1, 1});
    out.data[0] = total;
    return push(std::move(out), true, [this, a](const Tensor& g, NodeId) {
      if (!wants(a)) return;
      Tensor ga(value(a).shape, g.data[0]);
      accumulate(a, ga);
    });
  }

  NodeId mean(NodeId a) { return scale(sum(a), 1.0 / value(a).size()); }

  // Embedding lookup: row `idx[i]` of `table` becomes row i of the output.
  NodeId gather_rows(NodeId table, std::vector<int> idx) {
    const Tensor& t = value(table);
    Tensor out({static_cast<int>(idx.size()), t.cols()});
    for (size_t i = 0; i < idx.size(); ++i)
      for (int c = 0; c < t.cols(); ++c)
        out.at(static_cast<int>(i), c) = t.at(idx[i], c);
    return push(std::move(out), true,
                [this, table, idx = std::move(idx)](const Tensor& g, NodeId) {
                  if (!wants(table)) return;
                  Tensor gt(value(table).shape);
                  for (size_t i = 0; i < idx.size(); ++i)
                    for (int c = 0; c < g.cols(); ++c)
                      gt.at(idx[i], c) += g.at(static_cast<int>(i), c);
                  accumulate(table, gt);
                });
  }

  // Gradients of all requires-grad leaves reachable from `loss` (scalar).
  void backward(NodeId loss) {
    if (value(loss).size() != 1) throw ShapeMismatch("backward from non-scalar");
    for (auto& n : nodes_) n.grad = Tensor();
    nodes_[loss].grad = Tensor(value(loss).shape, 1.0);
    for (NodeId id = loss; id >= 0; --id) {
      Node& n = nodes_[id];
      if (n.grad.size() == 0) continue;  // disconnected: gradient is zero
      if (n.backward) n.backward(n.grad, id);
      if (n.backward) n.grad = Tensor();  // free non-leaf gradients after use
    }
  }

  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::function<void(const Tensor&, NodeId)> backward;
  };

  bool wants(NodeId id) const {
    return nodes_[id].requires_grad || nodes_[id].backward != nullptr;
  }

  void accumulate(NodeId id, const Tensor& g) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      for (size_t i = 0; i < g.size(); ++i) n.grad.data[i] += g.data[i];
    }
  }

  NodeId push(Tensor value, bool requires_grad,
              std::function<void(const Tensor&, NodeId)> backward) {
    if (check_finite_ && !value.all_finite())
      throw NonFiniteValue("produced on tape");
    bytes_ += value.size() * sizeof(double);
    TensorGauge::observe(bytes_);
    nodes_.push_back(Node{std::move(value), Tensor(), requires_grad,
                          std::move(backward)});
    return static_cast<NodeId>(nodes_.size()) - 1;
  }

  std::vector<Node> nodes_;
  bool check_finite_;
  std::size_t bytes_ = 0;
};

}  // namespace orgmol

#endif  // ORGMOL_TENSOR_TAPE_HPP
