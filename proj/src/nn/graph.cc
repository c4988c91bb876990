#include "srl/nn/graph.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "srl/data_model.h"
#include "srl/nn/kernels.h"

namespace srl::nn {
namespace {

[[noreturn]] void ShapeError(const char* op, const std::string& detail) {
  throw ContractViolation(std::string("shape mismatch in ") + op + ": " +
                          detail);
}

}  // namespace

template <typename Real>
Graph<Real>::Graph(const ParamStore<Real>& store)
    : store_(&store), param_nodes_(store.size(), -1) {}

template <typename Real>
Graph<Real>::Graph(ParamStore<Real>* store)
    : store_(store), grad_store_(store), param_nodes_(store->size(), -1) {}

template <typename Real>
typename Graph<Real>::Node Graph<Real>::Make(Op op, int rows, int cols,
                                             std::vector<int> args) {
  Node n;
  n.op = op;
  n.rows = rows;
  n.cols = cols;
  for (int a : args) n.needs_grad = n.needs_grad || nodes_[a].needs_grad;
  n.args = std::move(args);
  n.value.assign(static_cast<size_t>(rows) * cols, Real(0));
  return n;
}

template <typename Real>
Expr Graph<Real>::Push(Node node) {
  nodes_.push_back(std::move(node));
  return Expr{static_cast<int>(nodes_.size()) - 1};
}

template <typename Real>
Real* Graph<Real>::G(int id) {
  Node& n = nodes_[id];
  if (n.ext_grad) return n.ext_grad;
  if (n.grad.empty()) n.grad.assign(static_cast<size_t>(n.rows) * n.cols, Real(0));
  return n.grad.data();
}

template <typename Real>
void Graph<Real>::CheckSameShape(const char* op, Expr a, Expr b) const {
  const Node& x = nodes_[a.id];
  const Node& y = nodes_[b.id];
  if (x.rows != y.rows || x.cols != y.cols) {
    ShapeError(op, ShapeString(x.rows, x.cols) + " vs " +
                       ShapeString(y.rows, y.cols));
  }
}

template <typename Real>
void Graph<Real>::CheckColumn(const char* op, Expr a) const {
  const Node& x = nodes_[a.id];
  if (x.cols != 1) {
    ShapeError(op, "expected a column vector, got " +
                       ShapeString(x.rows, x.cols));
  }
}

template <typename Real>
Expr Graph<Real>::Input(Tensor<Real> value) {
  Node n;
  n.op = Op::kInput;
  n.rows = value.rows;
  n.cols = value.cols;
  n.value = std::move(value.data);
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::Input(std::vector<Real> column) {
  return Input(Tensor<Real>::Column(std::move(column)));
}

template <typename Real>
Expr Graph<Real>::Zeros(int rows, int cols) {
  return Input(Tensor<Real>(rows, cols));
}

template <typename Real>
Expr Graph<Real>::Param(int param) {
  if (param < 0 || param >= store_->size()) {
    throw ContractViolation("unknown parameter index " + std::to_string(param));
  }
  if (param_nodes_[param] >= 0) return Expr{param_nodes_[param]};
  const auto& p = store_->at(param);
  Node n;
  n.op = Op::kParam;
  n.rows = p.value.rows;
  n.cols = p.value.cols;
  n.iaux = param;
  n.ext_value = p.value.data.data();
  if (grad_store_ && p.trainable) {
    n.needs_grad = true;
    n.ext_grad = grad_store_->at(param).grad.data.data();
  }
  Expr e = Push(std::move(n));
  param_nodes_[param] = e.id;
  return e;
}

template <typename Real>
Expr Graph<Real>::Lookup(int param, int row) {
  const auto& p = store_->at(param);
  if (row < 0 || row >= p.value.rows) {
    throw ContractViolation("lookup row " + std::to_string(row) +
                            " out of range for '" + p.name + "'");
  }
  Node n;
  n.op = Op::kLookup;
  n.rows = p.value.cols;
  n.cols = 1;
  n.iaux = param;
  n.idx = {row};
  const Real* src = p.value.data.data() + static_cast<size_t>(row) * p.value.cols;
  n.value.assign(src, src + p.value.cols);
  n.needs_grad = grad_store_ != nullptr && p.trainable;
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::Affine(Expr bias, std::initializer_list<Expr> pairs) {
  return Affine(bias, std::span<const Expr>(pairs.begin(), pairs.size()));
}

template <typename Real>
Expr Graph<Real>::Affine(Expr bias, std::span<const Expr> pairs) {
  CheckColumn("affine", bias);
  if (pairs.size() % 2 != 0) ShapeError("affine", "odd weight/input list");
  const int m = nodes_[bias.id].rows;
  std::vector<int> args{bias.id};
  for (size_t k = 0; k < pairs.size(); k += 2) {
    const Node& w = nodes_[pairs[k].id];
    const Node& x = nodes_[pairs[k + 1].id];
    if (w.rows != m || x.cols != 1 || w.cols != x.rows) {
      ShapeError("affine", "W" + ShapeString(w.rows, w.cols) + " x" +
                               ShapeString(x.rows, x.cols) + " bias" +
                               ShapeString(m, 1));
    }
    args.push_back(pairs[k].id);
    args.push_back(pairs[k + 1].id);
  }
  Node n = Make(Op::kAffine, m, 1, args);
  std::copy(V(bias.id), V(bias.id) + m, n.value.begin());
  for (size_t k = 1; k < args.size(); k += 2) {
    const Node& w = nodes_[args[k]];
    kernels::MatVecAccum(V(args[k]), w.rows, w.cols, V(args[k + 1]),
                         n.value.data());
  }
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::MatMul(Expr a, Expr b) {
  const Node& x = nodes_[a.id];
  const Node& y = nodes_[b.id];
  if (x.cols != y.rows) {
    ShapeError("matmul", ShapeString(x.rows, x.cols) + " * " +
                             ShapeString(y.rows, y.cols));
  }
  Node n = Make(Op::kMatMul, x.rows, y.cols, {a.id, b.id});
  kernels::MatMulAccum(V(a.id), V(b.id), n.value.data(), x.rows, x.cols,
                       y.cols);
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::Add(Expr a, Expr b) {
  CheckSameShape("add", a, b);
  Node n = Make(Op::kAdd, rows(a), cols(a), {a.id, b.id});
  const Real* x = V(a.id);
  const Real* y = V(b.id);
  for (size_t i = 0; i < n.value.size(); ++i) n.value[i] = x[i] + y[i];
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::Sub(Expr a, Expr b) {
  CheckSameShape("sub", a, b);
  Node n = Make(Op::kSub, rows(a), cols(a), {a.id, b.id});
  const Real* x = V(a.id);
  const Real* y = V(b.id);
  for (size_t i = 0; i < n.value.size(); ++i) n.value[i] = x[i] - y[i];
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::CMult(Expr a, Expr b) {
  CheckSameShape("cmult", a, b);
  Node n = Make(Op::kCMult, rows(a), cols(a), {a.id, b.id});
  const Real* x = V(a.id);
  const Real* y = V(b.id);
  for (size_t i = 0; i < n.value.size(); ++i) n.value[i] = x[i] * y[i];
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::Scale(Expr a, Real factor) {
  Node n = Make(Op::kScale, rows(a), cols(a), {a.id});
  n.raux = factor;
  const Real* x = V(a.id);
  for (size_t i = 0; i < n.value.size(); ++i) n.value[i] = factor * x[i];
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::Tanh(Expr a) {
  Node n = Make(Op::kTanh, rows(a), cols(a), {a.id});
  const Real* x = V(a.id);
  for (size_t i = 0; i < n.value.size(); ++i) n.value[i] = std::tanh(x[i]);
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::Sigmoid(Expr a) {
  Node n = Make(Op::kSigmoid, rows(a), cols(a), {a.id});
  const Real* x = V(a.id);
  for (size_t i = 0; i < n.value.size(); ++i) {
    n.value[i] = Real(1) / (Real(1) + std::exp(-x[i]));
  }
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::Softmax(Expr a) {
  CheckColumn("softmax", a);
  Node n = Make(Op::kSoftmax, rows(a), 1, {a.id});
  const Real* x = V(a.id);
  const Real mx = *std::max_element(x, x + n.rows);
  Real z = 0;
  for (int i = 0; i < n.rows; ++i) {
    n.value[i] = std::exp(x[i] - mx);
    z += n.value[i];
  }
  for (Real& v : n.value) v /= z;
  return Push(std::move(n));
}

namespace {

template <typename Real>
Real MaskedLogSumExp(const Real* x, int n, std::span<const uint8_t> mask) {
  Real mx = -std::numeric_limits<Real>::infinity();
  bool any = false;
  for (int i = 0; i < n; ++i) {
    if (!mask.empty() && !mask[i]) continue;
    mx = std::max(mx, x[i]);
    any = true;
  }
  if (!any) throw ContractViolation("log-softmax with every entry masked");
  Real z = 0;
  for (int i = 0; i < n; ++i) {
    if (!mask.empty() && !mask[i]) continue;
    z += std::exp(x[i] - mx);
  }
  return mx + std::log(z);
}

}  // namespace

template <typename Real>
Expr Graph<Real>::LogSoftmax(Expr a, std::span<const uint8_t> mask) {
  CheckColumn("log_softmax", a);
  const int m = rows(a);
  if (!mask.empty() && static_cast<int>(mask.size()) != m) {
    ShapeError("log_softmax", "mask size " + std::to_string(mask.size()) +
                                  " for " + ShapeString(m, 1));
  }
  Node n = Make(Op::kLogSoftmax, m, 1, {a.id});
  n.idx.assign(mask.begin(), mask.end());
  const Real* x = V(a.id);
  const Real lse = MaskedLogSumExp(x, m, mask);
  for (int i = 0; i < m; ++i) {
    n.value[i] = (mask.empty() || mask[i])
                     ? x[i] - lse
                     : -std::numeric_limits<Real>::infinity();
  }
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::Concat(std::initializer_list<Expr> parts) {
  return Concat(std::span<const Expr>(parts.begin(), parts.size()));
}

template <typename Real>
Expr Graph<Real>::Concat(std::span<const Expr> parts) {
  if (parts.empty()) ShapeError("concat", "no operands");
  int total = 0;
  std::vector<int> args;
  for (Expr p : parts) {
    CheckColumn("concat", p);
    total += rows(p);
    args.push_back(p.id);
  }
  Node n = Make(Op::kConcat, total, 1, args);
  int offset = 0;
  for (Expr p : parts) {
    std::copy(V(p.id), V(p.id) + rows(p), n.value.begin() + offset);
    offset += rows(p);
  }
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::ConcatCols(std::span<const Expr> parts) {
  if (parts.empty()) ShapeError("concat_cols", "no operands");
  const int m = rows(parts[0]);
  std::vector<int> args;
  for (Expr p : parts) {
    CheckColumn("concat_cols", p);
    if (rows(p) != m) ShapeError("concat_cols", "unequal heights");
    args.push_back(p.id);
  }
  const int k = static_cast<int>(parts.size());
  Node n = Make(Op::kConcatCols, m, k, args);
  for (int c = 0; c < k; ++c) {
    const Real* x = V(args[c]);
    for (int r = 0; r < m; ++r) n.value[static_cast<size_t>(r) * k + c] = x[r];
  }
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::Slice(Expr a, int begin, int end) {
  CheckColumn("slice", a);
  if (begin < 0 || end > rows(a) || begin >= end) {
    ShapeError("slice", "[" + std::to_string(begin) + "," +
                            std::to_string(end) + ") of " +
                            ShapeString(rows(a), 1));
  }
  Node n = Make(Op::kSlice, end - begin, 1, {a.id});
  n.iaux = begin;
  std::copy(V(a.id) + begin, V(a.id) + end, n.value.begin());
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::MaxPool(std::span<const Expr> parts) {
  if (parts.empty()) ShapeError("max_pool", "no operands");
  std::vector<int> args;
  for (Expr p : parts) {
    CheckSameShape("max_pool", parts[0], p);
    args.push_back(p.id);
  }
  Node n = Make(Op::kMaxPool, rows(parts[0]), cols(parts[0]), args);
  n.idx.assign(n.value.size(), 0);
  std::copy(V(args[0]), V(args[0]) + n.value.size(), n.value.begin());
  for (size_t k = 1; k < args.size(); ++k) {
    const Real* x = V(args[k]);
    for (size_t i = 0; i < n.value.size(); ++i) {
      if (x[i] > n.value[i]) {
        n.value[i] = x[i];
        n.idx[i] = static_cast<int>(k);
      }
    }
  }
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::Sum(std::span<const Expr> parts) {
  if (parts.empty()) ShapeError("sum", "no operands");
  std::vector<int> args;
  for (Expr p : parts) {
    CheckSameShape("sum", parts[0], p);
    args.push_back(p.id);
  }
  Node n = Make(Op::kSum, rows(parts[0]), cols(parts[0]), args);
  for (int id : args) {
    const Real* x = V(id);
    for (size_t i = 0; i < n.value.size(); ++i) n.value[i] += x[i];
  }
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::Dot(Expr a, Expr b) {
  CheckSameShape("dot", a, b);
  Node n = Make(Op::kDot, 1, 1, {a.id, b.id});
  const Real* x = V(a.id);
  const Real* y = V(b.id);
  const size_t len = static_cast<size_t>(rows(a)) * cols(a);
  Real acc = 0;
  for (size_t i = 0; i < len; ++i) acc += x[i] * y[i];
  n.value[0] = acc;
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::Pick(Expr a, int index) {
  const int len = rows(a) * cols(a);
  if (index < 0 || index >= len) {
    ShapeError("pick", "index " + std::to_string(index) + " of " +
                           ShapeString(rows(a), cols(a)));
  }
  Node n = Make(Op::kPick, 1, 1, {a.id});
  n.iaux = index;
  n.value[0] = V(a.id)[index];
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::CrossEntropy(Expr logits, int target,
                               std::span<const uint8_t> mask) {
  CheckColumn("cross_entropy", logits);
  const int m = rows(logits);
  if (target < 0 || target >= m) {
    ShapeError("cross_entropy", "target " + std::to_string(target) + " of " +
                                    ShapeString(m, 1));
  }
  if (!mask.empty() && (static_cast<int>(mask.size()) != m || !mask[target])) {
    throw ContractViolation("cross_entropy target is masked out");
  }
  Node n = Make(Op::kCrossEntropy, 1, 1, {logits.id});
  n.iaux = target;
  n.idx.assign(mask.begin(), mask.end());
  const Real* x = V(logits.id);
  n.value[0] = MaskedLogSumExp(x, m, mask) - x[target];
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::SquaredNorm(Expr a) {
  Node n = Make(Op::kSquaredNorm, 1, 1, {a.id});
  const Real* x = V(a.id);
  const size_t len = static_cast<size_t>(rows(a)) * cols(a);
  Real acc = 0;
  for (size_t i = 0; i < len; ++i) acc += x[i] * x[i];
  n.value[0] = acc;
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::L2Penalty(std::span<const int> params) {
  std::vector<int> args;
  for (int p : params) args.push_back(Param(p).id);
  Node n = Make(Op::kL2Penalty, 1, 1, args);
  Real acc = 0;
  for (int id : args) {
    const Node& p = nodes_[id];
    const Real* x = V(id);
    const size_t len = static_cast<size_t>(p.rows) * p.cols;
    for (size_t i = 0; i < len; ++i) acc += x[i] * x[i];
  }
  n.value[0] = acc;
  return Push(std::move(n));
}

template <typename Real>
Expr Graph<Real>::ScalarMul(Expr vec, Expr scalar) {
  CheckColumn("scalar_mul", vec);
  if (rows(scalar) != 1 || cols(scalar) != 1) {
    ShapeError("scalar_mul", "scalar operand is " +
                                 ShapeString(rows(scalar), cols(scalar)));
  }
  Node n = Make(Op::kScalarMul, rows(vec), 1, {vec.id, scalar.id});
  const Real s = V(scalar.id)[0];
  const Real* x = V(vec.id);
  for (int i = 0; i < n.rows; ++i) n.value[i] = s * x[i];
  return Push(std::move(n));
}

template <typename Real>
std::vector<Real> Graph<Real>::Values(Expr e) const {
  const Node& n = nodes_[e.id];
  const Real* v = V(e.id);
  return std::vector<Real>(v, v + static_cast<size_t>(n.rows) * n.cols);
}

template <typename Real>
Real Graph<Real>::Scalar(Expr e) const {
  if (rows(e) != 1 || cols(e) != 1) {
    ShapeError("scalar", ShapeString(rows(e), cols(e)));
  }
  return V(e.id)[0];
}

template <typename Real>
std::vector<Real> Graph<Real>::Gradient(Expr e) const {
  const Node& n = nodes_[e.id];
  const size_t len = static_cast<size_t>(n.rows) * n.cols;
  if (n.ext_grad) return std::vector<Real>(n.ext_grad, n.ext_grad + len);
  if (n.grad.empty()) return std::vector<Real>(len, Real(0));
  return n.grad;
}

template <typename Real>
void Graph<Real>::Backward(Expr loss, Real seed) {
  if (rows(loss) != 1 || cols(loss) != 1) {
    ShapeError("backward", "loss must be 1x1, got " +
                               ShapeString(rows(loss), cols(loss)));
  }
  if (!nodes_[loss.id].needs_grad) return;
  G(loss.id)[0] += seed;
  for (int id = loss.id; id >= 0; --id) {
    const Node& n = nodes_[id];
    if (!n.needs_grad || n.ext_grad || n.grad.empty()) continue;
    BackwardNode(id);
  }
}

template <typename Real>
void Graph<Real>::BackwardNode(int id) {
  // Index-based access: G() may allocate gradients of other nodes but never
  // reallocates nodes_.
  Node& n = nodes_[id];
  const Real* g = n.grad.data();
  const size_t len = n.grad.size();
  auto wants = [this](int arg) { return nodes_[arg].needs_grad; };
  switch (n.op) {
    case Op::kInput:
    case Op::kParam:
      break;
    case Op::kLookup: {
      auto& p = grad_store_->at(n.iaux);
      Real* dst = p.grad.data.data() + static_cast<size_t>(n.idx[0]) * p.grad.cols;
      for (size_t i = 0; i < len; ++i) dst[i] += g[i];
      break;
    }
    case Op::kAffine: {
      if (wants(n.args[0])) {
        Real* db = G(n.args[0]);
        for (size_t i = 0; i < len; ++i) db[i] += g[i];
      }
      for (size_t k = 1; k < n.args.size(); k += 2) {
        const int w = n.args[k];
        const int x = n.args[k + 1];
        const int m = nodes_[w].rows;
        const int kk = nodes_[w].cols;
        if (wants(w)) kernels::OuterAccum(G(w), m, kk, g, V(x));
        if (wants(x)) kernels::MatTVecAccum(V(w), m, kk, g, G(x));
      }
      break;
    }
    case Op::kMatMul: {
      const int a = n.args[0];
      const int b = n.args[1];
      const int m = nodes_[a].rows;
      const int k = nodes_[a].cols;
      const int c = nodes_[b].cols;
      if (wants(a)) {
        Real* da = G(a);
        const Real* bv = V(b);
        for (int i = 0; i < m; ++i) {
          for (int p = 0; p < k; ++p) {
            da[static_cast<size_t>(i) * k + p] += kernels::Dot(
                g + static_cast<size_t>(i) * c, bv + static_cast<size_t>(p) * c, c);
          }
        }
      }
      if (wants(b)) {
        Real* db = G(b);
        const Real* av = V(a);
        for (int i = 0; i < m; ++i) {
          for (int p = 0; p < k; ++p) {
            kernels::Axpy(av[static_cast<size_t>(i) * k + p],
                          g + static_cast<size_t>(i) * c,
                          db + static_cast<size_t>(p) * c, c);
          }
        }
      }
      break;
    }
    case Op::kAdd:
    case Op::kSub: {
      const Real sign = n.op == Op::kAdd ? Real(1) : Real(-1);
      if (wants(n.args[0])) {
        Real* da = G(n.args[0]);
        for (size_t i = 0; i < len; ++i) da[i] += g[i];
      }
      if (wants(n.args[1])) {
        Real* db = G(n.args[1]);
        for (size_t i = 0; i < len; ++i) db[i] += sign * g[i];
      }
      break;
    }
    case Op::kCMult: {
      const int a = n.args[0];
      const int b = n.args[1];
      if (wants(a)) {
        Real* da = G(a);
        const Real* bv = V(b);
        for (size_t i = 0; i < len; ++i) da[i] += g[i] * bv[i];
      }
      if (wants(b)) {
        Real* db = G(b);
        const Real* av = V(a);
        for (size_t i = 0; i < len; ++i) db[i] += g[i] * av[i];
      }
      break;
    }
    case Op::kScale: {
      Real* da = G(n.args[0]);
      for (size_t i = 0; i < len; ++i) da[i] += n.raux * g[i];
      break;
    }
    case Op::kTanh: {
      Real* da = G(n.args[0]);
      for (size_t i = 0; i < len; ++i) {
        da[i] += g[i] * (Real(1) - n.value[i] * n.value[i]);
      }
      break;
    }
    case Op::kSigmoid: {
      Real* da = G(n.args[0]);
      for (size_t i = 0; i < len; ++i) {
        da[i] += g[i] * n.value[i] * (Real(1) - n.value[i]);
      }
      break;
    }
    case Op::kSoftmax: {
      Real dot = 0;
      for (size_t i = 0; i < len; ++i) dot += g[i] * n.value[i];
      Real* da = G(n.args[0]);
      for (size_t i = 0; i < len; ++i) da[i] += n.value[i] * (g[i] - dot);
      break;
    }
    case Op::kLogSoftmax: {
      Real total = 0;
      for (size_t i = 0; i < len; ++i) {
        if (n.idx.empty() || n.idx[i]) total += g[i];
      }
      Real* da = G(n.args[0]);
      for (size_t i = 0; i < len; ++i) {
        if (!n.idx.empty() && !n.idx[i]) continue;
        da[i] += g[i] - std::exp(n.value[i]) * total;
      }
      break;
    }
    case Op::kConcat: {
      int offset = 0;
      for (int a : n.args) {
        const int r = nodes_[a].rows;
        if (wants(a)) {
          Real* da = G(a);
          for (int i = 0; i < r; ++i) da[i] += g[offset + i];
        }
        offset += r;
      }
      break;
    }
    case Op::kConcatCols: {
      const int k = n.cols;
      for (int c = 0; c < k; ++c) {
        if (!wants(n.args[c])) continue;
        Real* da = G(n.args[c]);
        for (int r = 0; r < n.rows; ++r) da[r] += g[static_cast<size_t>(r) * k + c];
      }
      break;
    }
    case Op::kSlice: {
      Real* da = G(n.args[0]);
      for (size_t i = 0; i < len; ++i) da[n.iaux + i] += g[i];
      break;
    }
    case Op::kMaxPool: {
      for (size_t i = 0; i < len; ++i) {
        const int a = n.args[n.idx[i]];
        if (wants(a)) G(a)[i] += g[i];
      }
      break;
    }
    case Op::kSum: {
      for (int a : n.args) {
        if (!wants(a)) continue;
        Real* da = G(a);
        for (size_t i = 0; i < len; ++i) da[i] += g[i];
      }
      break;
    }
    case Op::kDot: {
      const int a = n.args[0];
      const int b = n.args[1];
      const size_t m = static_cast<size_t>(nodes_[a].rows) * nodes_[a].cols;
      if (wants(a)) {
        Real* da = G(a);
        const Real* bv = V(b);
        for (size_t i = 0; i < m; ++i) da[i] += g[0] * bv[i];
      }
      if (wants(b)) {
        Real* db = G(b);
        const Real* av = V(a);
        for (size_t i = 0; i < m; ++i) db[i] += g[0] * av[i];
      }
      break;
    }
    case Op::kPick: {
      G(n.args[0])[n.iaux] += g[0];
      break;
    }
    case Op::kCrossEntropy: {
      const int a = n.args[0];
      const int m = nodes_[a].rows;
      const Real* x = V(a);
      std::span<const uint8_t> mask;
      std::vector<uint8_t> mask_bytes(n.idx.begin(), n.idx.end());
      mask = mask_bytes;
      const Real lse = MaskedLogSumExp(x, m, mask);
      Real* da = G(a);
      for (int i = 0; i < m; ++i) {
        if (!mask.empty() && !mask[i]) continue;
        const Real p = std::exp(x[i] - lse);
        da[i] += g[0] * (p - (i == n.iaux ? Real(1) : Real(0)));
      }
      break;
    }
    case Op::kSquaredNorm: {
      const int a = n.args[0];
      const size_t m = static_cast<size_t>(nodes_[a].rows) * nodes_[a].cols;
      Real* da = G(a);
      const Real* x = V(a);
      for (size_t i = 0; i < m; ++i) da[i] += Real(2) * g[0] * x[i];
      break;
    }
    case Op::kL2Penalty: {
      for (int a : n.args) {
        if (!wants(a)) continue;
        const size_t m = static_cast<size_t>(nodes_[a].rows) * nodes_[a].cols;
        Real* da = G(a);
        const Real* x = V(a);
        for (size_t i = 0; i < m; ++i) da[i] += Real(2) * g[0] * x[i];
      }
      break;
    }
    case Op::kScalarMul: {
      const int v = n.args[0];
      const int s = n.args[1];
      const Real* x = V(v);
      if (wants(v)) {
        Real* dv = G(v);
        const Real sv = V(s)[0];
        for (size_t i = 0; i < len; ++i) dv[i] += g[i] * sv;
      }
      if (wants(s)) {
        Real acc = 0;
        for (size_t i = 0; i < len; ++i) acc += g[i] * x[i];
        G(s)[0] += acc;
      }
      break;
    }
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace srl::nn
