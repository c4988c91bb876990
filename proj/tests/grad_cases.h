// Finite-difference cases covering every graph op and the recurrent layers.
// Each case owns a small double-precision store; the acceptance runner and
// the unit tests evaluate them at random parameter points.

#ifndef SRL_TESTS_GRAD_CASES_H_
#define SRL_TESTS_GRAD_CASES_H_

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "srl/nn/graph.h"
#include "srl/nn/layers.h"
#include "test_util.h"

namespace srl::testing {

struct GradCase {
  std::string name;
  std::shared_ptr<nn::ParamStore<double>> store;
  std::function<nn::Expr(nn::Graph<double>&)> build;
};

namespace internal {

using nn::Expr;
using G = nn::Graph<double>;

inline nn::Tensor<double> RandomTensor(int rows, int cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  nn::Tensor<double> t(rows, cols);
  for (double& v : t.data) v = u(rng);
  return t;
}

// Contracts an arbitrary-shape expression with a fixed random tensor so
// that every output entry influences the scalar.
inline std::function<Expr(G&, Expr)> Contractor(uint64_t seed) {
  return [seed](G& g, Expr e) {
    std::mt19937_64 rng(seed + 1000 * g.rows(e) + g.cols(e));
    return g.Dot(e, g.Input(RandomTensor(g.rows(e), g.cols(e), rng)));
  };
}

class CaseBuilder {
 public:
  explicit CaseBuilder(std::vector<GradCase>* out) : out_(out) {}

  // Adds a case whose parameters have the given shapes.
  void Add(const std::string& name, std::vector<std::pair<int, int>> shapes,
           std::function<Expr(G&, const std::vector<Expr>&)> body) {
    auto store = std::make_shared<nn::ParamStore<double>>();
    std::mt19937_64 rng(out_->size() + 1);
    std::vector<int> ids;
    for (size_t i = 0; i < shapes.size(); ++i) {
      ids.push_back(store->Add(name + ".p" + std::to_string(i), shapes[i].first,
                               shapes[i].second, nn::Init::kXavier, rng));
    }
    auto reduce = Contractor(out_->size() + 17);
    out_->push_back({name, store, [ids, body, reduce](G& g) {
                       std::vector<Expr> ps;
                       for (int id : ids) ps.push_back(g.Param(id));
                       const Expr e = body(g, ps);
                       return g.rows(e) == 1 && g.cols(e) == 1 ? e : reduce(g, e);
                     }});
  }

  // Adds a case whose store and expression are built by the caller.
  void AddCustom(const std::string& name,
                 std::function<std::function<Expr(G&)>(nn::ParamStore<double>&,
                                                       std::mt19937_64&)> make) {
    auto store = std::make_shared<nn::ParamStore<double>>();
    std::mt19937_64 rng(out_->size() + 1);
    auto body = make(*store, rng);
    auto reduce = Contractor(out_->size() + 17);
    out_->push_back({name, store, [body, reduce](G& g) {
                       const Expr e = body(g);
                       return g.rows(e) == 1 && g.cols(e) == 1 ? e : reduce(g, e);
                     }});
  }

 private:
  std::vector<GradCase>* out_;
};

}  // namespace internal

// One case per graph op.
inline std::vector<GradCase> OpGradCases() {
  using internal::Expr;
  using internal::G;
  std::vector<GradCase> cases;
  internal::CaseBuilder b(&cases);
  using P = const std::vector<Expr>&;
  b.Add("param", {{3, 2}}, [](G&, P p) { return p[0]; });
  b.AddCustom("lookup", [](nn::ParamStore<double>& s, std::mt19937_64& rng) {
    const int table = s.Add("table", 5, 3, nn::Init::kEmbedding, rng);
    return [table](G& g) {
      // Rows 1 and 3, with row 3 read twice.
      return g.Sum(std::vector<Expr>{g.Lookup(table, 1), g.Lookup(table, 3),
                                     g.Scale(g.Lookup(table, 3), 2.0)});
    };
  });
  b.Add("affine", {{4, 1}, {4, 3}, {3, 1}, {4, 2}, {2, 1}},
        [](G& g, P p) { return g.Affine(p[0], {p[1], p[2], p[3], p[4]}); });
  b.Add("matmul", {{3, 4}, {4, 2}}, [](G& g, P p) { return g.MatMul(p[0], p[1]); });
  b.Add("add", {{3, 1}, {3, 1}}, [](G& g, P p) { return g.Add(p[0], p[1]); });
  b.Add("sub", {{3, 1}, {3, 1}}, [](G& g, P p) { return g.Sub(p[0], p[1]); });
  b.Add("cmult", {{4, 1}, {4, 1}}, [](G& g, P p) { return g.CMult(p[0], p[1]); });
  b.Add("cmult_shared", {{4, 1}}, [](G& g, P p) { return g.CMult(p[0], p[0]); });
  b.Add("scale", {{3, 1}}, [](G& g, P p) { return g.Scale(p[0], -1.7); });
  b.Add("tanh", {{5, 1}}, [](G& g, P p) { return g.Tanh(p[0]); });
  b.Add("sigmoid", {{5, 1}}, [](G& g, P p) { return g.Sigmoid(p[0]); });
  b.Add("softmax", {{5, 1}}, [](G& g, P p) { return g.Softmax(p[0]); });
  b.Add("log_softmax", {{5, 1}}, [](G& g, P p) { return g.LogSoftmax(p[0]); });
  b.Add("log_softmax_masked", {{5, 1}}, [](G& g, P p) {
    static const uint8_t mask[] = {1, 0, 1, 1, 0};
    // Masked entries are -inf; pick only the finite ones.
    const Expr l = g.LogSoftmax(p[0], mask);
    return g.Sum(std::vector<Expr>{g.Pick(l, 0), g.Scale(g.Pick(l, 2), 0.5),
                                   g.Scale(g.Pick(l, 3), -2.0)});
  });
  b.Add("concat", {{2, 1}, {3, 1}}, [](G& g, P p) { return g.Concat({p[0], p[1]}); });
  b.Add("concat_cols", {{3, 1}, {3, 1}, {3, 1}},
        [](G& g, P p) { return g.ConcatCols(std::vector<Expr>{p[0], p[1], p[2]}); });
  b.Add("slice", {{6, 1}}, [](G& g, P p) { return g.Slice(p[0], 1, 4); });
  b.Add("max_pool", {{4, 1}, {4, 1}, {4, 1}},
        [](G& g, P p) { return g.MaxPool(std::vector<Expr>{p[0], p[1], p[2]}); });
  b.Add("sum", {{3, 1}, {3, 1}, {3, 1}},
        [](G& g, P p) { return g.Sum(std::vector<Expr>{p[0], p[1], p[2], p[0]}); });
  b.Add("dot", {{4, 1}, {4, 1}}, [](G& g, P p) { return g.Dot(p[0], p[1]); });
  b.Add("pick", {{4, 1}}, [](G& g, P p) { return g.Pick(p[0], 2); });
  b.Add("cross_entropy", {{5, 1}}, [](G& g, P p) { return g.CrossEntropy(p[0], 3); });
  b.Add("cross_entropy_masked", {{5, 1}}, [](G& g, P p) {
    static const uint8_t mask[] = {0, 1, 1, 0, 1};
    return g.CrossEntropy(p[0], 2, mask);
  });
  b.Add("squared_norm", {{4, 1}}, [](G& g, P p) { return g.SquaredNorm(p[0]); });
  b.AddCustom("l2_penalty", [](nn::ParamStore<double>& s, std::mt19937_64& rng) {
    const int a = s.Add("a", 3, 2, nn::Init::kXavier, rng);
    const int c = s.Add("c", 4, 1, nn::Init::kXavier, rng);
    return [a, c](G& g) { return g.L2Penalty(std::vector<int>{a, c}); };
  });
  b.Add("scalar_mul", {{4, 1}, {1, 1}}, [](G& g, P p) { return g.ScalarMul(p[0], p[1]); });
  return cases;
}

// Layer-level cases: LSTM cell, BiLSTM over 5 steps, character CNN,
// TreeLSTM on a 6-node tree, Stack-LSTM push/push/pop/push, FFN.
inline std::vector<GradCase> LayerGradCases() {
  using internal::Expr;
  using internal::G;
  std::vector<GradCase> cases;
  internal::CaseBuilder b(&cases);
  auto inputs = [](nn::ParamStore<double>& s, std::mt19937_64& rng, int count,
                   int dim, const std::string& prefix = "x") {
    std::vector<int> ids;
    for (int i = 0; i < count; ++i) {
      ids.push_back(s.Add(prefix + std::to_string(i), dim, 1, nn::Init::kXavier, rng));
    }
    return ids;
  };
  auto params = [](G& g, const std::vector<int>& ids) {
    std::vector<Expr> out;
    for (int id : ids) out.push_back(g.Param(id));
    return out;
  };
  b.AddCustom("linear", [&](nn::ParamStore<double>& s, std::mt19937_64& rng) {
    auto layer = nn::Linear<double>::Create(s, "lin", 3, 2, rng);
    auto x = inputs(s, rng, 1, 3);
    return [=](G& g) { return layer(g, g.Param(x[0])); };
  });
  b.AddCustom("ffn", [&](nn::ParamStore<double>& s, std::mt19937_64& rng) {
    auto ffn = nn::Ffn<double>::Create(s, "ffn", {3, 2}, 4, 3, rng);
    auto x = inputs(s, rng, 1, 3);
    auto y = inputs(s, rng, 1, 2, "y");
    return [=](G& g) { return ffn(g, {g.Param(x[0]), g.Param(y[0])}); };
  });
  b.AddCustom("lstm_cell", [&](nn::ParamStore<double>& s, std::mt19937_64& rng) {
    auto cell = nn::LstmCell<double>::Create(s, "cell", 3, 2, rng);
    auto x = inputs(s, rng, 2, 3);
    return [=](G& g) {
      auto st = cell.Step(g, cell.Initial(g), g.Param(x[0]));
      st = cell.Step(g, st, g.Param(x[1]));
      return g.Concat({st.h, st.c});
    };
  });
  b.AddCustom("bilstm_len5", [&](nn::ParamStore<double>& s, std::mt19937_64& rng) {
    auto lstm = nn::BiLstm<double>::Create(s, "bi", 3, 2, 2, rng);
    auto x = inputs(s, rng, 5, 3);
    return [=](G& g) { return g.Concat(lstm(g, params(g, x))); };
  });
  b.AddCustom("char_cnn", [&](nn::ParamStore<double>& s, std::mt19937_64& rng) {
    auto cnn = nn::CharCnn<double>::Create(s, "cnn", 6, 3, 4, 3, rng);
    return [=](G& g) {
      const std::vector<int> word = {2, 5, 3, 3};
      const std::vector<int> one = {4};
      return g.Concat({cnn(g, word), cnn(g, one)});
    };
  });
  b.AddCustom("tree_lstm_6", [&](nn::ParamStore<double>& s, std::mt19937_64& rng) {
    auto tree = nn::TreeLstm<double>::Create(s, "tree", 3, 2, rng);
    auto x = inputs(s, rng, 6, 3);
    return [=](G& g) {
      //        1
      //      / | \.
      //     0  3  5
      //       / \.
      //      2   4
      const std::vector<int> heads = {1, -1, 3, 1, 3, 1};
      return g.Concat(tree(g, heads, params(g, x)));
    };
  });
  b.AddCustom("stack_lstm", [&](nn::ParamStore<double>& s, std::mt19937_64& rng) {
    auto stack = nn::StackLstm<double>::Create(s, "stack", 3, 2, 2, rng);
    auto x = inputs(s, rng, 3, 3);
    return [=](G& g) {
      auto st = stack.Empty();
      std::vector<Expr> outs{stack.Current(g, st)};
      st = stack.Push(g, st, g.Param(x[0]));
      outs.push_back(stack.Current(g, st));
      st = stack.Push(g, st, g.Param(x[1]));
      outs.push_back(stack.Current(g, st));
      st = stack.Pop(st);
      outs.push_back(stack.Current(g, st));
      st = stack.Push(g, st, g.Param(x[2]));
      outs.push_back(stack.Current(g, st));
      return g.Concat(outs);
    };
  });
  return cases;
}

// Worst relative error of a case over `points` random parameter draws.
inline GradCheck CheckCase(GradCase& c, int points, uint64_t seed) {
  std::mt19937_64 rng(seed);
  GradCheck worst;
  for (int k = 0; k < points; ++k) {
    Randomize(*c.store, rng);
    const GradCheck r = CheckGradients(*c.store, c.build);
    worst.checked += r.checked;
    if (r.max_rel_error >= worst.max_rel_error) {
      worst.max_rel_error = r.max_rel_error;
      worst.worst = r.worst;
    }
  }
  return worst;
}

}  // namespace srl::testing

#endif  // SRL_TESTS_GRAD_CASES_H_
