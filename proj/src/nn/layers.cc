#include "srl/nn/layers.h"

#include <algorithm>

#include "srl/data_model.h"

namespace srl::nn {

template <typename Real>
Linear<Real> Linear<Real>::Create(ParamStore<Real>& store,
                                  const std::string& name, int in, int out,
                                  std::mt19937_64& rng) {
  Linear l;
  l.in = in;
  l.out = out;
  l.w = store.Add(name + ".W", out, in, Init::kXavier, rng);
  l.b = store.Add(name + ".b", out, 1, Init::kZero, rng);
  return l;
}

template <typename Real>
Expr Linear<Real>::operator()(Graph<Real>& g, Expr x) const {
  return g.Affine(g.Param(b), {g.Param(w), x});
}

template <typename Real>
Ffn<Real> Ffn<Real>::Create(ParamStore<Real>& store, const std::string& name,
                            std::vector<int> in_dims, int hidden, int out,
                            std::mt19937_64& rng) {
  Ffn f;
  f.hidden = hidden;
  f.out = out;
  for (size_t k = 0; k < in_dims.size(); ++k) {
    f.w1.push_back(store.Add(name + ".W1_" + std::to_string(k), hidden,
                             in_dims[k], Init::kXavier, rng));
  }
  f.in_dims = std::move(in_dims);
  f.b1 = store.Add(name + ".b1", hidden, 1, Init::kZero, rng);
  f.w2 = store.Add(name + ".W2", out, hidden, Init::kXavier, rng);
  f.b2 = store.Add(name + ".b2", out, 1, Init::kZero, rng);
  return f;
}

template <typename Real>
Expr Ffn<Real>::operator()(Graph<Real>& g, std::span<const Expr> inputs) const {
  if (inputs.size() != w1.size()) {
    throw ContractViolation("ffn expects " + std::to_string(w1.size()) +
                            " inputs, got " + std::to_string(inputs.size()));
  }
  std::vector<Expr> pairs;
  for (size_t k = 0; k < inputs.size(); ++k) {
    pairs.push_back(g.Param(w1[k]));
    pairs.push_back(inputs[k]);
  }
  Expr h = g.Tanh(g.Affine(g.Param(b1), pairs));
  return g.Affine(g.Param(b2), {g.Param(w2), h});
}

template <typename Real>
LstmCell<Real> LstmCell<Real>::Create(ParamStore<Real>& store,
                                      const std::string& name, int in,
                                      int hidden, std::mt19937_64& rng) {
  LstmCell c;
  c.in = in;
  c.hidden = hidden;
  c.wx = store.Add(name + ".Wx", 4 * hidden, in, Init::kXavier, rng);
  c.wh = store.Add(name + ".Wh", 4 * hidden, hidden, Init::kXavier, rng);
  c.b = store.Add(name + ".b", 4 * hidden, 1, Init::kZero, rng);
  auto& bias = store.at(c.b).value.data;
  std::fill(bias.begin() + hidden, bias.begin() + 2 * hidden, Real(1));
  return c;
}

template <typename Real>
LstmState<Real> LstmCell<Real>::Initial(Graph<Real>& g) const {
  return {g.Zeros(hidden), g.Zeros(hidden)};
}

template <typename Real>
LstmState<Real> LstmCell<Real>::Step(Graph<Real>& g, const LstmState<Real>& prev,
                                     Expr x) const {
  Expr gates = g.Affine(g.Param(b), {g.Param(wx), x, g.Param(wh), prev.h});
  const int h = hidden;
  Expr i = g.Sigmoid(g.Slice(gates, 0, h));
  Expr f = g.Sigmoid(g.Slice(gates, h, 2 * h));
  Expr o = g.Sigmoid(g.Slice(gates, 2 * h, 3 * h));
  Expr u = g.Tanh(g.Slice(gates, 3 * h, 4 * h));
  Expr c = g.Add(g.CMult(i, u), g.CMult(f, prev.c));
  return {g.CMult(o, g.Tanh(c)), c};
}

template <typename Real>
BiLstm<Real> BiLstm<Real>::Create(ParamStore<Real>& store,
                                  const std::string& name, int in, int hidden,
                                  int layers, std::mt19937_64& rng) {
  BiLstm b;
  b.hidden = hidden;
  for (int l = 0; l < layers; ++l) {
    const int layer_in = l == 0 ? in : 2 * hidden;
    const std::string prefix = name + ".l" + std::to_string(l);
    b.fwd.push_back(LstmCell<Real>::Create(store, prefix + ".fwd", layer_in,
                                           hidden, rng));
    b.bwd.push_back(LstmCell<Real>::Create(store, prefix + ".bwd", layer_in,
                                           hidden, rng));
  }
  return b;
}

template <typename Real>
std::vector<Expr> BiLstm<Real>::operator()(Graph<Real>& g,
                                           std::span<const Expr> xs) const {
  if (xs.empty()) throw ContractViolation("bilstm over an empty sequence");
  const int n = static_cast<int>(xs.size());
  std::vector<Expr> cur(xs.begin(), xs.end());
  for (size_t l = 0; l < fwd.size(); ++l) {
    std::vector<Expr> hf(n), hb(n);
    LstmState<Real> s = fwd[l].Initial(g);
    for (int i = 0; i < n; ++i) {
      s = fwd[l].Step(g, s, cur[i]);
      hf[i] = s.h;
    }
    s = bwd[l].Initial(g);
    for (int i = n - 1; i >= 0; --i) {
      s = bwd[l].Step(g, s, cur[i]);
      hb[i] = s.h;
    }
    for (int i = 0; i < n; ++i) cur[i] = g.Concat({hf[i], hb[i]});
  }
  return cur;
}

template <typename Real>
CharCnn<Real> CharCnn<Real>::Create(ParamStore<Real>& store,
                                    const std::string& name, int num_chars,
                                    int char_dim, int filters, int width,
                                    std::mt19937_64& rng) {
  CharCnn c;
  c.char_dim = char_dim;
  c.filters = filters;
  c.width = width;
  c.embed = store.Add(name + ".E", num_chars, char_dim, Init::kEmbedding, rng);
  c.w = store.Add(name + ".W", filters, width * char_dim, Init::kXavier, rng);
  c.b = store.Add(name + ".b", filters, 1, Init::kZero, rng);
  return c;
}

template <typename Real>
Expr CharCnn<Real>::operator()(Graph<Real>& g, std::span<const int> chars) const {
  const int rows = g.store().at(embed).value.rows;
  std::vector<int> ids(width / 2, 0);
  for (int c : chars) ids.push_back(c >= 0 && c < rows ? c : 1);
  ids.insert(ids.end(), width / 2, 0);
  while (static_cast<int>(ids.size()) < width) ids.push_back(0);
  std::vector<Expr> vecs;
  for (int id : ids) vecs.push_back(g.Lookup(embed, id));
  const Expr wp = g.Param(w);
  const Expr bp = g.Param(b);
  std::vector<Expr> windows;
  for (size_t s = 0; s + width <= ids.size(); ++s) {
    Expr x = g.Concat(std::span<const Expr>(vecs.data() + s, width));
    windows.push_back(g.Affine(bp, {wp, x}));
  }
  return g.MaxPool(windows);
}

template <typename Real>
TreeLstm<Real> TreeLstm<Real>::Create(ParamStore<Real>& store,
                                      const std::string& name, int in,
                                      int hidden, std::mt19937_64& rng) {
  TreeLstm t;
  t.in = in;
  t.hidden = hidden;
  t.w_iou = store.Add(name + ".W_iou", 3 * hidden, in, Init::kXavier, rng);
  t.u_iou = store.Add(name + ".U_iou", 3 * hidden, hidden, Init::kXavier, rng);
  t.b_iou = store.Add(name + ".b_iou", 3 * hidden, 1, Init::kZero, rng);
  t.w_f = store.Add(name + ".W_f", hidden, in, Init::kXavier, rng);
  t.u_f = store.Add(name + ".U_f", hidden, hidden, Init::kXavier, rng);
  t.b_f = store.Add(name + ".b_f", hidden, 1, Init::kZero, rng);
  auto& bias = store.at(t.b_f).value.data;
  std::fill(bias.begin(), bias.end(), Real(1));
  return t;
}

template <typename Real>
std::vector<Expr> TreeLstm<Real>::operator()(Graph<Real>& g,
                                             std::span<const int> heads,
                                             std::span<const Expr> xs) const {
  const int n = static_cast<int>(xs.size());
  if (static_cast<int>(heads.size()) != n) {
    throw ContractViolation("tree_lstm: head count differs from input count");
  }
  std::vector<std::vector<int>> children(n);
  for (int i = 0; i < n; ++i) {
    if (heads[i] < -1 || heads[i] >= n || heads[i] == i) {
      throw ContractViolation("tree_lstm: bad head for token " +
                              std::to_string(i));
    }
    if (heads[i] >= 0) children[heads[i]].push_back(i);
  }
  // Post-order from every root; tokens never reached lie on a cycle.
  std::vector<int> order;
  std::vector<int> stack;
  std::vector<size_t> next(n, 0);
  for (int r = 0; r < n; ++r) {
    if (heads[r] != -1) continue;
    stack.push_back(r);
    while (!stack.empty()) {
      const int v = stack.back();
      if (next[v] < children[v].size()) {
        stack.push_back(children[v][next[v]++]);
      } else {
        order.push_back(v);
        stack.pop_back();
      }
    }
  }
  if (static_cast<int>(order.size()) != n) {
    throw ContractViolation("tree_lstm: cyclic head links");
  }
  std::vector<LstmState<Real>> states(n);
  const Expr wiou = g.Param(w_iou), uiou = g.Param(u_iou), biou = g.Param(b_iou);
  const Expr wf = g.Param(w_f), uf = g.Param(u_f), bf = g.Param(b_f);
  const int h = hidden;
  for (int v : order) {
    Expr h_sum;
    if (children[v].empty()) {
      h_sum = g.Zeros(h);
    } else {
      std::vector<Expr> hs;
      for (int c : children[v]) hs.push_back(states[c].h);
      h_sum = g.Sum(hs);
    }
    Expr iou = g.Affine(biou, {wiou, xs[v], uiou, h_sum});
    Expr i = g.Sigmoid(g.Slice(iou, 0, h));
    Expr o = g.Sigmoid(g.Slice(iou, h, 2 * h));
    Expr u = g.Tanh(g.Slice(iou, 2 * h, 3 * h));
    std::vector<Expr> terms{g.CMult(i, u)};
    if (!children[v].empty()) {
      Expr fx = g.Affine(bf, {wf, xs[v]});
      for (int c : children[v]) {
        Expr f = g.Sigmoid(g.Affine(fx, {uf, states[c].h}));
        terms.push_back(g.CMult(f, states[c].c));
      }
    }
    Expr c = terms.size() == 1 ? terms[0] : g.Sum(terms);
    states[v] = {g.CMult(o, g.Tanh(c)), c};
  }
  std::vector<Expr> out(n);
  for (int i = 0; i < n; ++i) out[i] = states[i].h;
  return out;
}

template <typename Real>
StackLstm<Real> StackLstm<Real>::Create(ParamStore<Real>& store,
                                        const std::string& name, int in,
                                        int hidden, int layers,
                                        std::mt19937_64& rng) {
  StackLstm s;
  for (int l = 0; l < layers; ++l) {
    s.cells_.push_back(LstmCell<Real>::Create(
        store, name + ".l" + std::to_string(l), l == 0 ? in : hidden, hidden,
        rng));
  }
  s.empty_ = store.Add(name + ".empty", hidden, 1, Init::kEmbedding, rng);
  return s;
}

template <typename Real>
typename StackLstm<Real>::Stack StackLstm<Real>::Push(Graph<Real>& g,
                                                      const Stack& s,
                                                      Expr x) const {
  auto frame = std::make_shared<Frame>();
  frame->parent = s;
  frame->depth = Depth(s) + 1;
  Expr input = x;
  for (size_t l = 0; l < cells_.size(); ++l) {
    const LstmState<Real> prev = s ? s->layers[l] : cells_[l].Initial(g);
    LstmState<Real> next = cells_[l].Step(g, prev, input);
    frame->layers.push_back(next);
    input = next.h;
  }
  return frame;
}

template <typename Real>
typename StackLstm<Real>::Stack StackLstm<Real>::Pop(const Stack& s) const {
  if (!s) throw ContractViolation("pop on an empty stack encoder");
  return s->parent;
}

template <typename Real>
Expr StackLstm<Real>::Current(Graph<Real>& g, const Stack& s) const {
  return s ? s->layers.back().h : g.Param(empty_);
}

template struct Linear<float>;
template struct Linear<double>;
template struct Ffn<float>;
template struct Ffn<double>;
template struct LstmCell<float>;
template struct LstmCell<double>;
template struct BiLstm<float>;
template struct BiLstm<double>;
template struct CharCnn<float>;
template struct CharCnn<double>;
template struct TreeLstm<float>;
template struct TreeLstm<double>;
template class StackLstm<float>;
template class StackLstm<double>;

}  // namespace srl::nn
