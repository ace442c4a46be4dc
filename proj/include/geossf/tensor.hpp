// Copyright 2026 geossf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Minimal dense real-valued tensor with reverse-mode automatic
// differentiation. Covers exactly what the mask-estimation network and its
// training loop need: rank-n arrays, trailing-dimension broadcasting,
// matmul/conv1d/LSTM-cell building blocks, and a deterministic backward
// pass over a dynamically recorded graph.
//
// A computation graph must stay on one thread; distinct graphs may run
// concurrently (parameters are cloned per graph by the trainer).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <cblas.h>

#include "geossf/error.hpp"

namespace geossf {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ")";
  return os.str();
}

namespace detail {

template <class S>
inline void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
                 std::size_t k, S alpha, const S* a, std::size_t lda,
                 const S* b, std::size_t ldb, S beta, S* c, std::size_t ldc) {
  if constexpr (std::is_same_v<S, float>) {
    cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, (int)m, (int)n, (int)k,
                alpha, a, (int)lda, b, (int)ldb, beta, c, (int)ldc);
  } else {
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, (int)m, (int)n, (int)k,
                alpha, a, (int)lda, b, (int)ldb, beta, c, (int)ldc);
  }
}

}  // namespace detail

template <class S>
struct TensorNode {
  Shape shape;
  std::vector<S> data;
  std::vector<S> grad;  // allocated on demand, same length as data
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode<S>>> parents;
  // Accumulates this node's grad into the parents' grads.
  std::function<void(TensorNode<S>&)> backward;

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), S(0));
  }
};

template <class S>
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    auto n = std::make_shared<TensorNode<S>>();
    n->shape = std::move(shape);
    n->data.assign(shape_numel(n->shape), S(0));
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }

  static Tensor full(Shape shape, S value, bool requires_grad = false) {
    Tensor t = zeros(std::move(shape), requires_grad);
    std::fill(t.node()->data.begin(), t.node()->data.end(), value);
    return t;
  }

  static Tensor from(Shape shape, std::vector<S> data,
                     bool requires_grad = false) {
    if (shape_numel(shape) != data.size())
      throw DimensionError("tensor data length " + std::to_string(data.size()) +
                           " does not match shape " + shape_str(shape));
    auto n = std::make_shared<TensorNode<S>>();
    n->shape = std::move(shape);
    n->data = std::move(data);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }

  template <class T>
  static Tensor cast_from(Shape shape, const T* src, bool requires_grad = false) {
    std::vector<S> d(shape_numel(shape));
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<S>(src[i]);
    return from(std::move(shape), std::move(d), requires_grad);
  }

  static Tensor scalar(S v) { return from({1}, {v}); }

  bool valid() const { return n_ != nullptr; }
  const Shape& shape() const { return n_->shape; }
  std::size_t rank() const { return n_->shape.size(); }
  std::size_t numel() const { return n_->data.size(); }
  std::vector<S>& data() { return n_->data; }
  const std::vector<S>& data() const { return n_->data; }
  S value() const {
    if (numel() != 1)
      throw DimensionError("value() requires a scalar, got " + shape_str(shape()));
    return n_->data[0];
  }
  bool requires_grad() const { return n_->requires_grad; }
  std::vector<S>& grad() {
    n_->ensure_grad();
    return n_->grad;
  }
  void zero_grad() {
    if (!n_->grad.empty()) std::fill(n_->grad.begin(), n_->grad.end(), S(0));
  }

  Tensor clone(bool requires_grad) const {
    return from(shape(), data(), requires_grad);
  }

  // Reverse-mode pass from a scalar root. Seeds d(root)/d(root) = 1 and
  // walks the recorded graph in reverse topological order. Accumulation
  // order is fixed by graph construction order, so repeated runs are
  // bit-identical.
  void backward() const {
    if (numel() != 1)
      throw DimensionError("backward() requires a scalar root, got " +
                           shape_str(shape()));
    std::vector<TensorNode<S>*> order;
    std::unordered_set<TensorNode<S>*> seen;
    std::vector<std::pair<TensorNode<S>*, std::size_t>> stack;
    stack.push_back({n_.get(), 0});
    seen.insert(n_.get());
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->parents.size()) {
        TensorNode<S>* p = node->parents[next++].get();
        if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }
    n_->ensure_grad();
    n_->grad[0] += S(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if ((*it)->backward) (*it)->backward(**it);
    }
  }

  std::shared_ptr<TensorNode<S>>& node() { return n_; }
  const std::shared_ptr<TensorNode<S>>& node() const { return n_; }

  explicit Tensor(std::shared_ptr<TensorNode<S>> n) : n_(std::move(n)) {}

 private:
  std::shared_ptr<TensorNode<S>> n_;
};

namespace detail {

template <class S>
Tensor<S> make_op(Shape shape, std::vector<Tensor<S>> parents,
                  std::function<void(TensorNode<S>&)> backward) {
  auto n = std::make_shared<TensorNode<S>>();
  n->shape = std::move(shape);
  n->data.assign(shape_numel(n->shape), S(0));
  bool rg = false;
  for (auto& p : parents) rg = rg || p.requires_grad();
  n->requires_grad = rg;
  if (rg) {
    for (auto& p : parents) n->parents.push_back(p.node());
    n->backward = std::move(backward);
  }
  return Tensor<S>(std::move(n));
}

// Trailing-dimension broadcasting: the smaller operand's shape must equal a
// suffix of the larger one's (a scalar always qualifies). In row-major
// layout the smaller operand then repeats with period numel(small).
inline bool suffix_shape(const Shape& big, const Shape& small) {
  if (small.size() > big.size()) return false;
  for (std::size_t i = 0; i < small.size(); ++i)
    if (small[small.size() - 1 - i] != big[big.size() - 1 - i]) return false;
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise binary ops (add, sub, mul) with trailing broadcasting.
// ---------------------------------------------------------------------------

enum class BinOp { kAdd, kSub, kMul };

template <class S>
Tensor<S> binary_op(BinOp op, const Tensor<S>& a, const Tensor<S>& b) {
  const bool a_big = b.numel() == 1 || detail::suffix_shape(a.shape(), b.shape());
  const bool b_big = a.numel() == 1 || detail::suffix_shape(b.shape(), a.shape());
  if (!a_big && !b_big)
    throw DimensionError("incompatible shapes for elementwise op: " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const Tensor<S>& big = a_big ? a : b;
  const std::size_t n = big.numel();
  const std::size_t na = a.numel(), nb = b.numel();

  auto an = a.node();
  auto bn = b.node();
  Tensor<S> out = detail::make_op<S>(
      big.shape(), {a, b}, [op, an, bn, n, na, nb](TensorNode<S>& self) {
        const S* g = self.grad.data();
        if (an->requires_grad) {
          an->ensure_grad();
          S* ga = an->grad.data();
          const S* bd = bn->data.data();
          switch (op) {
            case BinOp::kAdd:
            case BinOp::kSub:
              for (std::size_t i = 0; i < n; ++i) ga[i % na] += g[i];
              break;
            case BinOp::kMul:
              for (std::size_t i = 0; i < n; ++i) ga[i % na] += g[i] * bd[i % nb];
              break;
          }
        }
        if (bn->requires_grad) {
          bn->ensure_grad();
          S* gb = bn->grad.data();
          const S* ad = an->data.data();
          switch (op) {
            case BinOp::kAdd:
              for (std::size_t i = 0; i < n; ++i) gb[i % nb] += g[i];
              break;
            case BinOp::kSub:
              for (std::size_t i = 0; i < n; ++i) gb[i % nb] -= g[i];
              break;
            case BinOp::kMul:
              for (std::size_t i = 0; i < n; ++i) gb[i % nb] += g[i] * ad[i % na];
              break;
          }
        }
      });

  S* o = out.data().data();
  const S* ad = a.data().data();
  const S* bd = b.data().data();
  switch (op) {
    case BinOp::kAdd:
      for (std::size_t i = 0; i < n; ++i) o[i] = ad[i % na] + bd[i % nb];
      break;
    case BinOp::kSub:
      for (std::size_t i = 0; i < n; ++i) o[i] = ad[i % na] - bd[i % nb];
      break;
    case BinOp::kMul:
      for (std::size_t i = 0; i < n; ++i) o[i] = ad[i % na] * bd[i % nb];
      break;
  }
  return out;
}

template <class S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  return binary_op(BinOp::kAdd, a, b);
}
template <class S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
  return binary_op(BinOp::kSub, a, b);
}
template <class S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  return binary_op(BinOp::kMul, a, b);
}

// ---------------------------------------------------------------------------
// Elementwise unary ops.
// ---------------------------------------------------------------------------

template <class S, class Fwd, class Dfn>
Tensor<S> unary_op(const Tensor<S>& x, Fwd fwd, Dfn dfn) {
  auto xn = x.node();
  Tensor<S> out = detail::make_op<S>(
      x.shape(), {x}, [xn, dfn](TensorNode<S>& self) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        S* gx = xn->grad.data();
        const S* g = self.grad.data();
        const S* xd = xn->data.data();
        const S* yd = self.data.data();
        for (std::size_t i = 0; i < self.data.size(); ++i)
          gx[i] += g[i] * dfn(xd[i], yd[i]);
      });
  S* o = out.data().data();
  const S* xd = x.data().data();
  for (std::size_t i = 0; i < out.numel(); ++i) o[i] = fwd(xd[i]);
  return out;
}

template <class S>
Tensor<S> sigmoid(const Tensor<S>& x) {
  return unary_op(
      x, [](S v) { return S(1) / (S(1) + std::exp(-v)); },
      [](S, S y) { return y * (S(1) - y); });
}

template <class S>
Tensor<S> tanh_op(const Tensor<S>& x) {
  return unary_op(
      x, [](S v) { return std::tanh(v); }, [](S, S y) { return S(1) - y * y; });
}

template <class S>
Tensor<S> leaky_relu(const Tensor<S>& x, S slope) {
  return unary_op(
      x, [slope](S v) { return v >= S(0) ? v : slope * v; },
      [slope](S v, S) { return v >= S(0) ? S(1) : slope; });
}

// Subgradient 0 at the kink.
template <class S>
Tensor<S> abs_op(const Tensor<S>& x) {
  return unary_op(
      x, [](S v) { return std::abs(v); },
      [](S v, S) { return v > S(0) ? S(1) : (v < S(0) ? S(-1) : S(0)); });
}

// Subgradient 0 at x == 0.
template <class S>
Tensor<S> sqrt_op(const Tensor<S>& x) {
  return unary_op(
      x, [](S v) { return std::sqrt(v); },
      [](S, S y) { return y > S(0) ? S(1) / (S(2) * y) : S(0); });
}

template <class S>
Tensor<S> scale(const Tensor<S>& x, S c) {
  return unary_op(
      x, [c](S v) { return c * v; }, [c](S, S) { return c; });
}

// ---------------------------------------------------------------------------
// Reductions and layout ops.
// ---------------------------------------------------------------------------

template <class S>
Tensor<S> sum(const Tensor<S>& x) {
  auto xn = x.node();
  Tensor<S> out =
      detail::make_op<S>({1}, {x}, [xn](TensorNode<S>& self) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        const S g = self.grad[0];
        for (auto& v : xn->grad) v += g;
      });
  S acc = S(0);
  for (S v : x.data()) acc += v;
  out.data()[0] = acc;
  return out;
}

template <class S>
Tensor<S> mean(const Tensor<S>& x) {
  return scale(sum(x), S(1) / S(x.numel()));
}

template <class S>
Tensor<S> reshape(const Tensor<S>& x, Shape shape) {
  if (shape_numel(shape) != x.numel())
    throw DimensionError("reshape from " + shape_str(x.shape()) + " to " +
                         shape_str(shape) + " changes element count");
  auto xn = x.node();
  Tensor<S> out = detail::make_op<S>(
      std::move(shape), {x}, [xn](TensorNode<S>& self) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
          xn->grad[i] += self.grad[i];
      });
  out.data() = x.data();
  return out;
}

template <class S>
Tensor<S> transpose2(const Tensor<S>& x) {
  if (x.rank() != 2)
    throw DimensionError("transpose2 requires rank 2, got " + shape_str(x.shape()));
  const std::size_t r = x.shape()[0], c = x.shape()[1];
  auto xn = x.node();
  Tensor<S> out = detail::make_op<S>(
      {c, r}, {x}, [xn, r, c](TensorNode<S>& self) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j)
            xn->grad[i * c + j] += self.grad[j * r + i];
      });
  const S* xd = x.data().data();
  S* o = out.data().data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) o[j * r + i] = xd[i * c + j];
  return out;
}

// Contiguous slice [start, start+len) along one axis.
template <class S>
Tensor<S> slice(const Tensor<S>& x, std::size_t axis, std::size_t start,
                std::size_t len) {
  if (axis >= x.rank())
    throw DimensionError("slice axis " + std::to_string(axis) +
                         " out of range for " + shape_str(x.shape()));
  if (start + len > x.shape()[axis])
    throw DimensionError("slice [" + std::to_string(start) + "," +
                         std::to_string(start + len) + ") exceeds axis size " +
                         std::to_string(x.shape()[axis]));
  Shape out_shape = x.shape();
  out_shape[axis] = len;
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= x.shape()[i];
  for (std::size_t i = axis + 1; i < x.rank(); ++i) inner *= x.shape()[i];
  const std::size_t xaxis = x.shape()[axis];

  auto xn = x.node();
  Tensor<S> out = detail::make_op<S>(
      out_shape, {x},
      [xn, outer, inner, xaxis, start, len](TensorNode<S>& self) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t o = 0; o < outer; ++o)
          for (std::size_t j = 0; j < len; ++j) {
            const S* g = self.grad.data() + (o * len + j) * inner;
            S* gx = xn->grad.data() + (o * xaxis + start + j) * inner;
            for (std::size_t k = 0; k < inner; ++k) gx[k] += g[k];
          }
      });
  const S* xd = x.data().data();
  S* od = out.data().data();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t j = 0; j < len; ++j)
      std::copy_n(xd + (o * xaxis + start + j) * inner, inner,
                  od + (o * len + j) * inner);
  return out;
}

// Concatenate along one axis; all other axes must match.
template <class S>
Tensor<S> concat(const std::vector<Tensor<S>>& parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat of zero tensors");
  const Shape& s0 = parts[0].shape();
  if (axis >= s0.size())
    throw DimensionError("concat axis out of range for " + shape_str(s0));
  Shape out_shape = s0;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rank() != s0.size())
      throw DimensionError("concat rank mismatch");
    for (std::size_t i = 0; i < s0.size(); ++i)
      if (i != axis && p.shape()[i] != s0[i])
        throw DimensionError("concat shape mismatch: " + shape_str(p.shape()) +
                             " vs " + shape_str(s0));
    total += p.shape()[axis];
  }
  out_shape[axis] = total;

  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s0[i];
  for (std::size_t i = axis + 1; i < s0.size(); ++i) inner *= s0[i];

  std::vector<std::shared_ptr<TensorNode<S>>> pnodes;
  std::vector<std::size_t> sizes;
  for (const auto& p : parts) {
    pnodes.push_back(p.node());
    sizes.push_back(p.shape()[axis]);
  }
  Tensor<S> out = detail::make_op<S>(
      out_shape, parts,
      [pnodes, sizes, outer, inner, total](TensorNode<S>& self) {
        std::size_t off = 0;
        for (std::size_t pi = 0; pi < pnodes.size(); ++pi) {
          auto& pn = pnodes[pi];
          const std::size_t len = sizes[pi];
          if (pn->requires_grad) {
            pn->ensure_grad();
            for (std::size_t o = 0; o < outer; ++o)
              for (std::size_t j = 0; j < len; ++j) {
                const S* g = self.grad.data() + (o * total + off + j) * inner;
                S* gp = pn->grad.data() + (o * len + j) * inner;
                for (std::size_t k = 0; k < inner; ++k) gp[k] += g[k];
              }
          }
          off += len;
        }
      });
  S* od = out.data().data();
  std::size_t off = 0;
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const S* pd = parts[pi].data().data();
    const std::size_t len = sizes[pi];
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t j = 0; j < len; ++j)
        std::copy_n(pd + (o * len + j) * inner, inner,
                    od + (o * total + off + j) * inner);
    off += len;
  }
  return out;
}

// ---------------------------------------------------------------------------
// matmul
// ---------------------------------------------------------------------------

template <class S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw DimensionError("matmul requires rank-2 tensors, got " +
                         shape_str(a.shape()) + " and " + shape_str(b.shape()));
  const std::size_t m = a.shape()[0], k = a.shape()[1];
  const std::size_t k2 = b.shape()[0], n = b.shape()[1];
  if (k != k2)
    throw DimensionError("matmul inner dimension mismatch: " +
                         shape_str(a.shape()) + " x " + shape_str(b.shape()));
  auto an = a.node();
  auto bn = b.node();
  Tensor<S> out = detail::make_op<S>(
      {m, n}, {a, b}, [an, bn, m, n, k](TensorNode<S>& self) {
        const S* g = self.grad.data();
        if (an->requires_grad) {
          an->ensure_grad();
          // dA = dC * B^T
          detail::gemm<S>(false, true, m, k, n, S(1), g, n, bn->data.data(), n,
                          S(1), an->grad.data(), k);
        }
        if (bn->requires_grad) {
          bn->ensure_grad();
          // dB = A^T * dC
          detail::gemm<S>(true, false, k, n, m, S(1), an->data.data(), k, g, n,
                          S(1), bn->grad.data(), n);
        }
      });
  detail::gemm<S>(false, false, m, n, k, S(1), a.data().data(), k,
                  b.data().data(), n, S(0), out.data().data(), n);
  return out;
}

// ---------------------------------------------------------------------------
// conv1d: input (C_in, L), weight (C_out, C_in, kernel), bias (C_out).
// Cross-correlation convention, zero padding, L_out = (L+2p-k)/stride + 1.
// Implemented as im2col + gemm.
// ---------------------------------------------------------------------------

template <class S>
Tensor<S> conv1d(const Tensor<S>& input, const Tensor<S>& weight,
                 const Tensor<S>& bias, std::size_t stride,
                 std::size_t padding) {
  if (input.rank() != 2 || weight.rank() != 3 || bias.rank() != 1)
    throw DimensionError("conv1d expects input (C_in,L), weight (C_out,C_in,k), bias (C_out)");
  const std::size_t c_in = input.shape()[0], len = input.shape()[1];
  const std::size_t c_out = weight.shape()[0], kc_in = weight.shape()[1],
                    kernel = weight.shape()[2];
  if (kc_in != c_in)
    throw DimensionError("conv1d channel mismatch: input " +
                         shape_str(input.shape()) + " vs weight " +
                         shape_str(weight.shape()));
  if (bias.shape()[0] != c_out)
    throw DimensionError("conv1d bias size mismatch");
  if (stride == 0) throw DimensionError("conv1d stride must be positive");
  if (kernel > len + 2 * padding)
    throw DimensionError("conv1d kernel " + std::to_string(kernel) +
                         " larger than padded input " +
                         std::to_string(len + 2 * padding));
  const std::size_t l_out = (len + 2 * padding - kernel) / stride + 1;

  // cols: (C_in*kernel, L_out); col(ci*kernel+j, l) = x(ci, l*stride - p + j)
  auto im2col = [=](const S* x, std::vector<S>& cols) {
    cols.assign(c_in * kernel * l_out, S(0));
    for (std::size_t ci = 0; ci < c_in; ++ci)
      for (std::size_t j = 0; j < kernel; ++j) {
        S* row = cols.data() + (ci * kernel + j) * l_out;
        for (std::size_t l = 0; l < l_out; ++l) {
          const std::ptrdiff_t src = (std::ptrdiff_t)(l * stride + j) - (std::ptrdiff_t)padding;
          if (src >= 0 && src < (std::ptrdiff_t)len) row[l] = x[ci * len + src];
        }
      }
  };

  auto in = input.node();
  auto wn = weight.node();
  auto bn = bias.node();
  Tensor<S> out = detail::make_op<S>(
      {c_out, l_out}, {input, weight, bias},
      [=](TensorNode<S>& self) {
        const S* g = self.grad.data();  // (c_out, l_out)
        if (bn->requires_grad) {
          bn->ensure_grad();
          for (std::size_t co = 0; co < c_out; ++co) {
            S acc = S(0);
            for (std::size_t l = 0; l < l_out; ++l) acc += g[co * l_out + l];
            bn->grad[co] += acc;
          }
        }
        if (wn->requires_grad) {
          wn->ensure_grad();
          std::vector<S> cols;
          im2col(in->data.data(), cols);
          // dW (c_out, c_in*k) = g (c_out, l_out) * cols^T
          detail::gemm<S>(false, true, c_out, c_in * kernel, l_out, S(1), g,
                          l_out, cols.data(), l_out, S(1), wn->grad.data(),
                          c_in * kernel);
        }
        if (in->requires_grad) {
          in->ensure_grad();
          // dcols (c_in*k, l_out) = W^T (c_in*k, c_out) * g
          std::vector<S> dcols(c_in * kernel * l_out);
          detail::gemm<S>(true, false, c_in * kernel, l_out, c_out, S(1),
                          wn->data.data(), c_in * kernel, g, l_out, S(0),
                          dcols.data(), l_out);
          for (std::size_t ci = 0; ci < c_in; ++ci)
            for (std::size_t j = 0; j < kernel; ++j) {
              const S* row = dcols.data() + (ci * kernel + j) * l_out;
              for (std::size_t l = 0; l < l_out; ++l) {
                const std::ptrdiff_t dst = (std::ptrdiff_t)(l * stride + j) - (std::ptrdiff_t)padding;
                if (dst >= 0 && dst < (std::ptrdiff_t)len)
                  in->grad[ci * len + dst] += row[l];
              }
            }
        }
      });

  std::vector<S> cols;
  im2col(input.data().data(), cols);
  detail::gemm<S>(false, false, c_out, l_out, c_in * kernel, S(1),
                  weight.data().data(), c_in * kernel, cols.data(), l_out,
                  S(0), out.data().data(), l_out);
  S* od = out.data().data();
  const S* bd = bias.data().data();
  for (std::size_t co = 0; co < c_out; ++co)
    for (std::size_t l = 0; l < l_out; ++l) od[co * l_out + l] += bd[co];
  return out;
}

inline std::size_t conv1d_out_len(std::size_t len, std::size_t kernel,
                                  std::size_t stride, std::size_t padding) {
  if (kernel > len + 2 * padding) return 0;
  return (len + 2 * padding - kernel) / stride + 1;
}

// ---------------------------------------------------------------------------
// LSTM cell. Gate order {input, forget, cell, output}; c' = f*c + i*g,
// h' = o * tanh(c'). Weights: wx (D, 4H), wh (H, 4H), b (4H).
// ---------------------------------------------------------------------------

template <class S>
struct LstmWeights {
  Tensor<S> wx, wh, b;
};

template <class S>
struct LstmState {
  Tensor<S> h, c;
};

// Batched step: x (B, D), h/c (B, H).
template <class S>
LstmState<S> lstm_cell(const Tensor<S>& x, const Tensor<S>& h,
                       const Tensor<S>& c, const LstmWeights<S>& w) {
  const bool vec = x.rank() == 1;
  Tensor<S> xb = vec ? reshape(x, {1, x.shape()[0]}) : x;
  Tensor<S> hb = vec ? reshape(h, {1, h.shape()[0]}) : h;
  Tensor<S> cb = vec ? reshape(c, {1, c.shape()[0]}) : c;
  if (xb.rank() != 2 || hb.rank() != 2 || cb.rank() != 2)
    throw DimensionError("lstm_cell expects rank-1 or rank-2 x, h, c");
  if (w.wx.rank() != 2 || w.wh.rank() != 2 || w.b.rank() != 1)
    throw DimensionError("lstm_cell expects wx (D,4H), wh (H,4H), b (4H)");
  const std::size_t hsz = hb.shape()[1];
  if (w.wx.shape()[0] != xb.shape()[1] || w.wx.shape()[1] != 4 * hsz ||
      w.wh.shape()[0] != hsz || w.wh.shape()[1] != 4 * hsz ||
      w.b.shape()[0] != 4 * hsz || cb.shape()[1] != hsz ||
      hb.shape()[0] != xb.shape()[0] || cb.shape()[0] != xb.shape()[0])
    throw DimensionError(
        "lstm_cell shape mismatch: x " + shape_str(xb.shape()) + ", h " +
        shape_str(hb.shape()) + ", wx " + shape_str(w.wx.shape()) + ", wh " +
        shape_str(w.wh.shape()) + ", b " + shape_str(w.b.shape()));

  Tensor<S> gates = add(add(matmul(xb, w.wx), matmul(hb, w.wh)), w.b);
  Tensor<S> i = sigmoid(slice(gates, 1, 0, hsz));
  Tensor<S> f = sigmoid(slice(gates, 1, hsz, hsz));
  Tensor<S> g = tanh_op(slice(gates, 1, 2 * hsz, hsz));
  Tensor<S> o = sigmoid(slice(gates, 1, 3 * hsz, hsz));
  Tensor<S> c_new = add(mul(f, cb), mul(i, g));
  Tensor<S> h_new = mul(o, tanh_op(c_new));
  if (vec) {
    h_new = reshape(h_new, {hsz});
    c_new = reshape(c_new, {hsz});
  }
  return {h_new, c_new};
}

}  // namespace geossf
