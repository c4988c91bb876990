// Layer building blocks on top of Graph. Each layer owns parameter indices
// into a ParamStore and builds expressions on a per-sentence graph.

#ifndef SRL_NN_LAYERS_H_
#define SRL_NN_LAYERS_H_

#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "srl/nn/graph.h"
#include "srl/nn/param_store.h"

namespace srl::nn {

// y = W x + b
template <typename Real>
struct Linear {
  int w = -1;
  int b = -1;
  int in = 0;
  int out = 0;

  static Linear Create(ParamStore<Real>& store, const std::string& name,
                       int in, int out, std::mt19937_64& rng);
  Expr operator()(Graph<Real>& g, Expr x) const;
};

// Two-layer perceptron: W2 tanh(sum_k W1_k x_k + b1) + b2. The first layer
// keeps one weight block per input so that inputs can be supplied separately.
template <typename Real>
struct Ffn {
  std::vector<int> w1;
  std::vector<int> in_dims;
  int b1 = -1;
  int w2 = -1;
  int b2 = -1;
  int hidden = 0;
  int out = 0;

  static Ffn Create(ParamStore<Real>& store, const std::string& name,
                    std::vector<int> in_dims, int hidden, int out,
                    std::mt19937_64& rng);
  Expr operator()(Graph<Real>& g, std::span<const Expr> inputs) const;
  Expr operator()(Graph<Real>& g, std::initializer_list<Expr> inputs) const {
    return (*this)(g, std::span<const Expr>(inputs.begin(), inputs.size()));
  }
};

template <typename Real>
struct LstmState {
  Expr h;
  Expr c;
};

// Standard LSTM cell with input, forget, output gates and tanh candidate.
// Gate pre-activations are stacked as [i; f; o; u].
template <typename Real>
struct LstmCell {
  int wx = -1;
  int wh = -1;
  int b = -1;
  int in = 0;
  int hidden = 0;

  static LstmCell Create(ParamStore<Real>& store, const std::string& name,
                         int in, int hidden, std::mt19937_64& rng);
  LstmState<Real> Initial(Graph<Real>& g) const;
  LstmState<Real> Step(Graph<Real>& g, const LstmState<Real>& prev,
                       Expr x) const;
};

// Multi-layer bidirectional LSTM. Layer l > 0 reads the concatenated
// forward/backward outputs of layer l - 1.
template <typename Real>
struct BiLstm {
  std::vector<LstmCell<Real>> fwd;
  std::vector<LstmCell<Real>> bwd;
  int hidden = 0;

  static BiLstm Create(ParamStore<Real>& store, const std::string& name,
                       int in, int hidden, int layers, std::mt19937_64& rng);
  int out_dim() const { return 2 * hidden; }
  // Per-position [h_fwd; h_bwd] of the top layer. Throws ContractViolation
  // on an empty sequence.
  std::vector<Expr> operator()(Graph<Real>& g, std::span<const Expr> xs) const;
};

// Character convolution with max-pooling over window positions.
template <typename Real>
struct CharCnn {
  int embed = -1;
  int w = -1;
  int b = -1;
  int char_dim = 0;
  int filters = 0;
  int width = 0;

  static CharCnn Create(ParamStore<Real>& store, const std::string& name,
                        int num_chars, int char_dim, int filters, int width,
                        std::mt19937_64& rng);
  // Character ids are padded with id 0 on both sides (at least one window).
  Expr operator()(Graph<Real>& g, std::span<const int> chars) const;
};

// Child-sum tree LSTM.
template <typename Real>
struct TreeLstm {
  int w_iou = -1;
  int u_iou = -1;
  int b_iou = -1;
  int w_f = -1;
  int u_f = -1;
  int b_f = -1;
  int in = 0;
  int hidden = 0;

  static TreeLstm Create(ParamStore<Real>& store, const std::string& name,
                         int in, int hidden, std::mt19937_64& rng);
  // heads[i] is the parent index or -1 for a root. Children are composed
  // before parents. Throws ContractViolation on a cycle or bad index.
  std::vector<Expr> operator()(Graph<Real>& g, std::span<const int> heads,
                               std::span<const Expr> xs) const;
};

// Persistent stack of recurrent states. Push and Pop return new stacks and
// share structure, so copies are cheap and Pop restores the exact state
// from before the matching Push.
template <typename Real>
class StackLstm {
 public:
  struct Frame {
    std::vector<LstmState<Real>> layers;
    std::shared_ptr<const Frame> parent;
    int depth = 0;
  };
  using Stack = std::shared_ptr<const Frame>;

  static StackLstm Create(ParamStore<Real>& store, const std::string& name,
                          int in, int hidden, int layers,
                          std::mt19937_64& rng);

  int hidden() const { return cells_.front().hidden; }
  Stack Empty() const { return nullptr; }
  Stack Push(Graph<Real>& g, const Stack& s, Expr x) const;
  // Throws ContractViolation on an empty stack.
  Stack Pop(const Stack& s) const;
  // Top-layer hidden state, or the learned empty-stack vector.
  Expr Current(Graph<Real>& g, const Stack& s) const;
  static int Depth(const Stack& s) { return s ? s->depth : 0; }

 private:
  std::vector<LstmCell<Real>> cells_;
  int empty_ = -1;
};

}  // namespace srl::nn

#endif  // SRL_NN_LAYERS_H_
