// Dynamic computation graph with reverse-mode differentiation.
//
// Nodes are appended as operations are applied and their values are
// computed eagerly. Backward() walks the nodes in reverse creation order.
// Parameter nodes read values directly from a ParamStore and, when the graph
// tracks gradients, accumulate into the store's gradient buffers.

#ifndef SRL_NN_GRAPH_H_
#define SRL_NN_GRAPH_H_

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "srl/nn/param_store.h"
#include "srl/nn/tensor.h"

namespace srl::nn {

struct Expr {
  int id = -1;
  bool valid() const { return id >= 0; }
};

enum class Op : uint8_t {
  kInput,
  kParam,
  kLookup,
  kAffine,
  kMatMul,
  kAdd,
  kSub,
  kCMult,
  kScale,
  kTanh,
  kSigmoid,
  kSoftmax,
  kLogSoftmax,
  kConcat,
  kConcatCols,
  kSlice,
  kMaxPool,
  kSum,
  kDot,
  kPick,
  kCrossEntropy,
  kSquaredNorm,
  kL2Penalty,
  kScalarMul,
};

template <typename Real>
class Graph {
 public:
  // Inference graph: reads parameters, never writes gradients.
  explicit Graph(const ParamStore<Real>& store);
  // Training graph: Backward() accumulates into store gradients.
  explicit Graph(ParamStore<Real>* store);

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Leaves.
  Expr Input(Tensor<Real> value);
  Expr Input(std::vector<Real> column);
  Expr Zeros(int rows, int cols = 1);
  Expr Param(int param);
  // Row `row` of a parameter matrix, as a column vector.
  Expr Lookup(int param, int row);

  // bias + sum_k W_k * x_k, given as {W_1, x_1, W_2, x_2, ...}.
  Expr Affine(Expr bias, std::initializer_list<Expr> weight_input_pairs);
  Expr Affine(Expr bias, std::span<const Expr> weight_input_pairs);
  Expr MatMul(Expr a, Expr b);
  Expr Add(Expr a, Expr b);
  Expr Sub(Expr a, Expr b);
  Expr CMult(Expr a, Expr b);
  Expr Scale(Expr a, Real factor);
  Expr Tanh(Expr a);
  Expr Sigmoid(Expr a);
  // Column-vector softmax.
  Expr Softmax(Expr a);
  // Masked log-softmax; entries with mask 0 get -inf. Empty mask = all on.
  Expr LogSoftmax(Expr a, std::span<const uint8_t> mask = {});
  // Row-wise concatenation of column vectors.
  Expr Concat(std::span<const Expr> parts);
  Expr Concat(std::initializer_list<Expr> parts);
  // Column-wise concatenation of equal-height column vectors into a matrix.
  Expr ConcatCols(std::span<const Expr> parts);
  // Rows [begin, end) of a column vector.
  Expr Slice(Expr a, int begin, int end);
  // Elementwise maximum over equal-shape operands.
  Expr MaxPool(std::span<const Expr> parts);
  Expr Sum(std::span<const Expr> parts);
  Expr Dot(Expr a, Expr b);
  Expr Pick(Expr a, int index);
  // -log softmax(logits)[target] under an optional mask.
  Expr CrossEntropy(Expr logits, int target, std::span<const uint8_t> mask = {});
  Expr SquaredNorm(Expr a);
  // Sum of squared entries over the given parameters.
  Expr L2Penalty(std::span<const int> params);
  // Column vector scaled by a 1x1 expression.
  Expr ScalarMul(Expr vec, Expr scalar);

  int rows(Expr e) const { return nodes_[e.id].rows; }
  int cols(Expr e) const { return nodes_[e.id].cols; }
  const Real* data(Expr e) const { return V(e.id); }
  std::vector<Real> Values(Expr e) const;
  Real Scalar(Expr e) const;
  int size() const { return static_cast<int>(nodes_.size()); }
  const ParamStore<Real>& store() const { return *store_; }

  // Seeds d(loss) = seed and propagates to every reachable node and
  // trainable parameter. loss must be 1x1.
  void Backward(Expr loss, Real seed = Real(1));
  // Gradient of a node after Backward(); zeros if none reached it.
  std::vector<Real> Gradient(Expr e) const;

 private:
  struct Node {
    Op op = Op::kInput;
    int rows = 0;
    int cols = 0;
    std::vector<int> args;
    std::vector<Real> value;
    const Real* ext_value = nullptr;
    Real* ext_grad = nullptr;
    std::vector<Real> grad;
    bool needs_grad = false;
    int iaux = 0;
    Real raux = 0;
    std::vector<int> idx;
  };

  const Real* V(int id) const {
    const Node& n = nodes_[id];
    return n.ext_value ? n.ext_value : n.value.data();
  }
  Real* G(int id);
  Expr Push(Node node);
  Node Make(Op op, int rows, int cols, std::vector<int> args);
  void CheckSameShape(const char* op, Expr a, Expr b) const;
  void CheckColumn(const char* op, Expr a) const;
  void BackwardNode(int id);

  const ParamStore<Real>* store_;
  ParamStore<Real>* grad_store_ = nullptr;
  std::vector<Node> nodes_;
  std::vector<int> param_nodes_;  // param index -> node id
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace srl::nn

#endif  // SRL_NN_GRAPH_H_
