// Neural scorer: sentence encoding, transition-state representation, and
// the action and role classifiers with optional high-order features.

#ifndef SRL_SCORER_H_
#define SRL_SCORER_H_

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "srl/data_model.h"
#include "srl/embeddings.h"
#include "srl/nn/graph.h"
#include "srl/nn/layers.h"
#include "srl/nn/param_store.h"
#include "srl/transition.h"

namespace srl {

struct ModelConfig {
  // Input features.
  int word_dim = 100;
  bool use_pretrained = false;
  int pretrained_dim = 0;  // taken from the embedding file when loaded
  bool use_char = true;
  int char_dim = 30;
  int char_filters = 30;
  int char_width = 3;
  bool use_pos = true;
  int pos_dim = 50;
  bool use_dep = true;
  int tree_hidden = 200;
  int contextual_dim = 0;  // 0 disables precomputed contextual vectors
  double dropout = 0.0;    // on x_i, training only

  // Encoders.
  int lstm_hidden = 200;
  int lstm_layers = 2;
  int stack_hidden = 200;
  int stack_layers = 2;
  int pred_hidden = 200;
  int pred_layers = 1;
  int action_dim = 50;
  int state_dim = 150;
  int ffn_hidden = 150;

  // High-order features.
  bool high_order_action = true;
  bool high_order_role = true;
  int high_order_hidden = 100;
  int attention_dim = 100;

  // Transition system.
  ParsingOrder order = ParsingOrder::kCloseFirst;
  bool trailing_no_arcs = false;

  bool high_order() const { return high_order_action || high_order_role; }
  // Throws ConfigError on out-of-range values.
  void Validate() const;
  nlohmann::json ToJson() const;
  // Missing keys keep their defaults; unknown keys raise ConfigError.
  static ModelConfig FromJson(const nlohmann::json& j);
};

// Index of each state component in the concatenated representation g_t.
enum StateComponent {
  kSigmaL = 0,
  kSigmaR,
  kAlphaL,
  kAlphaR,
  kLambdaP,
  kBeta,
  kDelta,
  kNumStateComponents,
};
const char* StateComponentName(int component);

template <typename Real>
struct Attention {
  int w1 = -1;  // attention_dim x state
  int w2 = -1;  // attention_dim x feature
  int b = -1;
  int v = -1;   // attention_dim x 1
};

template <typename Real>
class Model {
 public:
  // Builds parameters for the given vocabularies. With a pretrained table,
  // its words are added to the word vocabulary, the frozen table is filled
  // from it and the trainable word vectors start as a copy.
  Model(const ModelConfig& config, VocabSet vocabs, uint64_t seed,
        const PretrainedEmbeddings* pretrained = nullptr);

  // Checkpoint directory: manifest.json, vocab/*.txt, tensors/NNNN.bin.
  void Save(const std::string& dir) const;
  static Model Load(const std::string& dir);

  const ModelConfig& config() const { return config_; }
  const VocabSet& vocabs() const { return vocabs_; }
  nn::ParamStore<Real>& store() { return store_; }
  const nn::ParamStore<Real>& store() const { return store_; }

  int TreeInputDim() const;
  int InputDim() const;
  int EncodingDim() const { return encoder.out_dim(); }
  int StateDim() const { return kNumStateComponents * config_.state_dim; }
  int NumRoles() const { return vocabs_.NumRoles(); }

  // Parameter indices and layers; -1 / empty when the feature is disabled.
  int word_embed = -1;
  int pretrained_embed = -1;
  int pos_embed = -1;
  int action_embed = -1;
  int empty_beta = -1;
  int empty_pred = -1;
  nn::CharCnn<Real> char_cnn;
  nn::TreeLstm<Real> tree;
  nn::BiLstm<Real> encoder;
  nn::BiLstm<Real> pred_encoder;
  std::array<nn::StackLstm<Real>, 5> stacks;  // sigma_l, sigma_r, alpha_l, alpha_r, delta
  std::array<nn::Linear<Real>, kNumStateComponents> projections;
  nn::Ffn<Real> action_head;
  nn::Ffn<Real> role_head;
  nn::Ffn<Real> high_order_action_ffn;
  nn::Ffn<Real> high_order_role_ffn;
  Attention<Real> action_attention;
  Attention<Real> role_attention;

 private:
  ModelConfig config_;
  VocabSet vocabs_;
  nn::ParamStore<Real> store_;
};

template <typename Real>
using StackOf = typename nn::StackLstm<Real>::Stack;

// Per-sentence encodings shared by every hypothesis of a decode.
template <typename Real>
struct SentenceContext {
  const Sentence* sentence = nullptr;
  std::vector<nn::Expr> x;  // input representation x_i
  std::vector<nn::Expr> h;  // BiLSTM encoding h_i
  StackOf<Real> sigma_r_initial;
  std::vector<nn::Expr> predicate_repr;  // filled on first use
};

// Transition state plus its mirrored stack encodings and high-order history.
template <typename Real>
struct ScorerState {
  TransitionState ts;
  StackOf<Real> sigma_l, sigma_r, alpha_l, alpha_r, delta;
  StackOf<Real> saved_sigma_l, saved_sigma_r;  // at the last PRD-GEN
  std::vector<nn::Expr> history_action;
  std::vector<nn::Expr> history_role;
};

template <typename Real>
struct StepScores {
  ActionMask mask;
  nn::Expr g;
  nn::Expr pair_action;  // I^a for the current pair, if any
  nn::Expr pair_role;    // I^r for the current pair, if any
  nn::Expr action_logp;  // masked log-probabilities over the six kinds
  nn::Expr role_logp;    // set by Scorer::RoleLogProbs
};

template <typename Real>
class Scorer {
 public:
  Scorer(const Model<Real>& model, nn::Graph<Real>& graph)
      : model_(model), g_(graph) {}

  // dropout_rng enables input dropout when the config asks for it.
  SentenceContext<Real> Encode(const Sentence& sentence,
                               std::mt19937_64* dropout_rng = nullptr);
  ScorerState<Real> Initial(const SentenceContext<Real>& ctx) const;

  // Projected components and their concatenation g_t.
  std::array<nn::Expr, kNumStateComponents> Components(
      SentenceContext<Real>& ctx, const ScorerState<Real>& state);
  nn::Expr StateRepr(SentenceContext<Real>& ctx, const ScorerState<Real>& state);

  // Legal kinds for the state; arcs are dropped when no roles exist.
  ActionMask Mask(const ScorerState<Real>& state) const;
  StepScores<Real> Score(SentenceContext<Real>& ctx,
                         const ScorerState<Real>& state);
  nn::Expr RoleLogProbs(StepScores<Real>& scores, const ScorerState<Real>& state);

  // Attention pooling of distribution features guided by g. Returns the
  // zero vector for an empty list. weights, when given, receives alpha.
  nn::Expr Attend(const Attention<Real>& att, nn::Expr g,
                  const std::vector<nn::Expr>& features, int dim,
                  nn::Expr* weights = nullptr);

  ScorerState<Real> Advance(const SentenceContext<Real>& ctx,
                            const ScorerState<Real>& state,
                            const StepScores<Real>& scores,
                            const ActionStep& action);

  nn::Graph<Real>& graph() { return g_; }
  const Model<Real>& model() const { return model_; }

 private:
  nn::Expr PredicateRepr(SentenceContext<Real>& ctx, int predicate);
  std::vector<nn::Expr> CurrentFeatures(const std::vector<nn::Expr>& history,
                                        nn::Expr current) const;

  const Model<Real>& model_;
  nn::Graph<Real>& g_;
};

extern template class Model<float>;
extern template class Model<double>;
extern template class Scorer<float>;
extern template class Scorer<double>;

}  // namespace srl

#endif  // SRL_SCORER_H_
