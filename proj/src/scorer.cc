#include "srl/scorer.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace srl {

using nn::Expr;

// ---------------------------------------------------------------------------
// Configuration

void ModelConfig::Validate() const {
  auto positive = [](const char* name, int v) {
    if (v <= 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive("word_dim", word_dim);
  positive("lstm_hidden", lstm_hidden);
  positive("lstm_layers", lstm_layers);
  positive("stack_hidden", stack_hidden);
  positive("stack_layers", stack_layers);
  positive("pred_hidden", pred_hidden);
  positive("pred_layers", pred_layers);
  positive("action_dim", action_dim);
  positive("state_dim", state_dim);
  positive("ffn_hidden", ffn_hidden);
  if (use_char) {
    positive("char_dim", char_dim);
    positive("char_filters", char_filters);
    positive("char_width", char_width);
  }
  if (use_pos) positive("pos_dim", pos_dim);
  if (use_dep) positive("tree_hidden", tree_hidden);
  if (high_order()) {
    positive("high_order_hidden", high_order_hidden);
    positive("attention_dim", attention_dim);
  }
  if (contextual_dim < 0) throw ConfigError("contextual_dim must be >= 0");
  if (pretrained_dim < 0) throw ConfigError("pretrained_dim must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError("dropout must lie in [0, 1)");
  }
}

nlohmann::json ModelConfig::ToJson() const {
  return {
      {"word_dim", word_dim},
      {"use_pretrained", use_pretrained},
      {"pretrained_dim", pretrained_dim},
      {"use_char", use_char},
      {"char_dim", char_dim},
      {"char_filters", char_filters},
      {"char_width", char_width},
      {"use_pos", use_pos},
      {"pos_dim", pos_dim},
      {"use_dep", use_dep},
      {"tree_hidden", tree_hidden},
      {"contextual_dim", contextual_dim},
      {"dropout", dropout},
      {"lstm_hidden", lstm_hidden},
      {"lstm_layers", lstm_layers},
      {"stack_hidden", stack_hidden},
      {"stack_layers", stack_layers},
      {"pred_hidden", pred_hidden},
      {"pred_layers", pred_layers},
      {"action_dim", action_dim},
      {"state_dim", state_dim},
      {"ffn_hidden", ffn_hidden},
      {"high_order_action", high_order_action},
      {"high_order_role", high_order_role},
      {"high_order_hidden", high_order_hidden},
      {"attention_dim", attention_dim},
      {"order", ParsingOrderName(order)},
      {"trailing_no_arcs", trailing_no_arcs},
  };
}

ModelConfig ModelConfig::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  ModelConfig c;
  const nlohmann::json defaults = c.ToJson();
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "high_order") continue;
    if (!defaults.contains(it.key())) {
      throw ConfigError("unknown model config key '" + it.key() + "'");
    }
  }
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("word_dim", c.word_dim);
    get("use_pretrained", c.use_pretrained);
    get("pretrained_dim", c.pretrained_dim);
    get("use_char", c.use_char);
    get("char_dim", c.char_dim);
    get("char_filters", c.char_filters);
    get("char_width", c.char_width);
    get("use_pos", c.use_pos);
    get("pos_dim", c.pos_dim);
    get("use_dep", c.use_dep);
    get("tree_hidden", c.tree_hidden);
    get("contextual_dim", c.contextual_dim);
    get("dropout", c.dropout);
    get("lstm_hidden", c.lstm_hidden);
    get("lstm_layers", c.lstm_layers);
    get("stack_hidden", c.stack_hidden);
    get("stack_layers", c.stack_layers);
    get("pred_hidden", c.pred_hidden);
    get("pred_layers", c.pred_layers);
    get("action_dim", c.action_dim);
    get("state_dim", c.state_dim);
    get("ffn_hidden", c.ffn_hidden);
    // "high_order" sets both heads; the specific keys take precedence.
    if (j.contains("high_order")) {
      c.high_order_action = c.high_order_role = j.at("high_order").get<bool>();
    }
    get("high_order_action", c.high_order_action);
    get("high_order_role", c.high_order_role);
    get("high_order_hidden", c.high_order_hidden);
    get("attention_dim", c.attention_dim);
    get("trailing_no_arcs", c.trailing_no_arcs);
    if (j.contains("order")) {
      c.order = ParseParsingOrder(j.at("order").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad model config value: ") + e.what());
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  c.Validate();
  return c;
}

const char* StateComponentName(int component) {
  static constexpr const char* kNames[] = {"sigma_l", "sigma_r", "alpha_l",
                                           "alpha_r", "lambda_p", "beta",
                                           "delta"};
  return kNames[component];
}

// ---------------------------------------------------------------------------
// Model

template <typename Real>
Model<Real>::Model(const ModelConfig& config, VocabSet vocabs, uint64_t seed,
                   const PretrainedEmbeddings* pretrained)
    : config_(config), vocabs_(std::move(vocabs)) {
  if (config_.use_pretrained) {
    if (pretrained) {
      config_.pretrained_dim = pretrained->dim;
      config_.word_dim = pretrained->dim;
      for (const auto& w : pretrained->words) vocabs_.words.Add(w);
    } else if (config_.pretrained_dim <= 0) {
      throw ConfigError("use_pretrained is set but no embedding table given");
    }
  }
  config_.Validate();
  std::mt19937_64 rng(seed);
  const auto& c = config_;
  auto& s = store_;
  using nn::Init;

  word_embed = s.Add("embed.word", vocabs_.words.size(), c.word_dim,
                     Init::kEmbedding, rng);
  if (c.use_pretrained) {
    pretrained_embed = s.Add("embed.pretrained", vocabs_.words.size(),
                             c.pretrained_dim, Init::kZero, rng,
                             /*trainable=*/false);
    if (pretrained) {
      auto& frozen = s.at(pretrained_embed).value;
      auto& trainable = s.at(word_embed).value;
      for (int id = 0; id < vocabs_.words.size(); ++id) {
        const auto* vec = pretrained->Find(vocabs_.words.Symbol(id));
        if (!vec) continue;
        for (int k = 0; k < c.pretrained_dim; ++k) {
          frozen.at(id, k) = static_cast<Real>((*vec)[k]);
          trainable.at(id, k) = static_cast<Real>((*vec)[k]);
        }
      }
    }
  }
  if (c.use_char) {
    char_cnn = nn::CharCnn<Real>::Create(s, "char_cnn", vocabs_.chars.size(),
                                         c.char_dim, c.char_filters,
                                         c.char_width, rng);
  }
  if (c.use_pos) {
    pos_embed = s.Add("embed.pos", vocabs_.pos.size(), c.pos_dim,
                      Init::kEmbedding, rng);
  }
  if (c.use_dep) {
    tree = nn::TreeLstm<Real>::Create(s, "tree_lstm", TreeInputDim(),
                                      c.tree_hidden, rng);
  }
  encoder = nn::BiLstm<Real>::Create(s, "encoder", InputDim(), c.lstm_hidden,
                                     c.lstm_layers, rng);
  const int h = encoder.out_dim();
  pred_encoder = nn::BiLstm<Real>::Create(s, "pred_encoder", h, c.pred_hidden,
                                          c.pred_layers, rng);
  static constexpr const char* kStackNames[] = {"stack.sigma_l", "stack.sigma_r",
                                                "stack.alpha_l", "stack.alpha_r",
                                                "stack.delta"};
  for (int k = 0; k < 4; ++k) {
    stacks[k] = nn::StackLstm<Real>::Create(s, kStackNames[k], h,
                                            c.stack_hidden, c.stack_layers, rng);
  }
  action_embed = s.Add("embed.action", kNumActionKinds, c.action_dim,
                       Init::kEmbedding, rng);
  stacks[4] = nn::StackLstm<Real>::Create(s, kStackNames[4], c.action_dim,
                                          c.stack_hidden, c.stack_layers, rng);
  empty_beta = s.Add("empty.beta", h, 1, Init::kEmbedding, rng);
  empty_pred = s.Add("empty.lambda_p", pred_encoder.out_dim(), 1,
                     Init::kEmbedding, rng);

  const int in_dims[kNumStateComponents] = {
      c.stack_hidden, c.stack_hidden, c.stack_hidden, c.stack_hidden,
      pred_encoder.out_dim(), h, c.stack_hidden};
  for (int k = 0; k < kNumStateComponents; ++k) {
    projections[k] = nn::Linear<Real>::Create(
        s, std::string("proj.") + StateComponentName(k), in_dims[k],
        c.state_dim, rng);
  }

  const int num_roles = std::max(1, NumRoles());
  std::vector<int> action_in{StateDim()};
  if (c.high_order_action) action_in.push_back(kNumActionKinds);
  action_head = nn::Ffn<Real>::Create(s, "head.action", action_in,
                                      c.ffn_hidden, kNumActionKinds, rng);
  std::vector<int> role_in{StateDim()};
  if (c.high_order_role) role_in.push_back(num_roles);
  role_head = nn::Ffn<Real>::Create(s, "head.role", role_in, c.ffn_hidden,
                                    num_roles, rng);

  auto make_attention = [&](const std::string& name, int feature_dim) {
    Attention<Real> a;
    a.w1 = s.Add(name + ".W1", c.attention_dim, StateDim(), Init::kXavier, rng);
    a.w2 = s.Add(name + ".W2", c.attention_dim, feature_dim, Init::kXavier, rng);
    a.b = s.Add(name + ".b", c.attention_dim, 1, Init::kZero, rng);
    a.v = s.Add(name + ".v", c.attention_dim, 1, Init::kXavier, rng);
    return a;
  };
  if (c.high_order_action) {
    high_order_action_ffn = nn::Ffn<Real>::Create(
        s, "high_order.action_ffn", {h, h}, c.high_order_hidden,
        kNumActionKinds, rng);
    action_attention = make_attention("high_order.action_attention",
                                      kNumActionKinds);
  }
  if (c.high_order_role) {
    high_order_role_ffn = nn::Ffn<Real>::Create(
        s, "high_order.role_ffn", {h, h}, c.high_order_hidden, num_roles, rng);
    role_attention = make_attention("high_order.role_attention", num_roles);
  }
}

template <typename Real>
int Model<Real>::TreeInputDim() const {
  const auto& c = config_;
  int d = c.word_dim;
  if (c.use_pretrained) d += c.pretrained_dim;
  if (c.use_char) d += c.char_filters;
  if (c.use_pos) d += c.pos_dim;
  d += c.contextual_dim;
  return d;
}

template <typename Real>
int Model<Real>::InputDim() const {
  return TreeInputDim() + (config_.use_dep ? config_.tree_hidden : 0);
}

namespace {

constexpr const char* kCheckpointFormat = "srl-checkpoint";
constexpr int kCheckpointVersion = 1;

const std::pair<const char*, Vocab VocabSet::*> kVocabFiles[] = {
    {"words", &VocabSet::words},     {"chars", &VocabSet::chars},
    {"pos", &VocabSet::pos},         {"deprels", &VocabSet::deprels},
    {"roles", &VocabSet::roles},     {"actions", &VocabSet::actions},
};

std::string ReadWholeFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

template <typename Real>
void Model<Real>::Save(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "vocab");
  nlohmann::json vocab_files = nlohmann::json::object();
  for (const auto& [name, member] : kVocabFiles) {
    const std::string rel = std::string("vocab/") + name + ".txt";
    std::ofstream out(fs::path(dir) / rel, std::ios::binary);
    out << (vocabs_.*member).Serialize();
    if (!out) throw InputError("cannot write '" + rel + "' in '" + dir + "'");
    vocab_files[name] = rel;
  }
  nlohmann::json manifest = {
      {"format", kCheckpointFormat},
      {"version", kCheckpointVersion},
      {"dtype", nn::ParamStore<Real>::DType()},
      {"config", config_.ToJson()},
      {"vocab", vocab_files},
      {"tensors", store_.SaveTensors(dir)},
  };
  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << "\n";
  if (!out) throw InputError("cannot write manifest in '" + dir + "'");
}

template <typename Real>
Model<Real> Model<Real>::Load(const std::string& dir) {
  namespace fs = std::filesystem;
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(ReadWholeFile(fs::path(dir) / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed checkpoint manifest in '" + dir + "': " + e.what());
  }
  try {
    if (manifest.at("format").get<std::string>() != kCheckpointFormat ||
        manifest.at("version").get<int>() != kCheckpointVersion) {
      throw InputError("'" + dir + "' is not a supported checkpoint");
    }
    if (manifest.at("dtype").get<std::string>() != nn::ParamStore<Real>::DType()) {
      throw InputError("checkpoint dtype " + manifest.at("dtype").get<std::string>() +
                       " does not match " + nn::ParamStore<Real>::DType());
    }
    ModelConfig config;
    try {
      config = ModelConfig::FromJson(manifest.at("config"));
    } catch (const ConfigError& e) {
      throw InputError(std::string("checkpoint config: ") + e.what());
    }
    VocabSet vocabs;
    for (const auto& [name, member] : kVocabFiles) {
      const auto rel = manifest.at("vocab").at(name).template get<std::string>();
      vocabs.*member = Vocab::Deserialize(ReadWholeFile(fs::path(dir) / rel));
    }
    Model model(config, std::move(vocabs), 0);
    model.store_.LoadTensors(dir, manifest.at("tensors"));
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed checkpoint manifest in '" + dir + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Scorer

template <typename Real>
SentenceContext<Real> Scorer<Real>::Encode(const Sentence& sentence,
                                           std::mt19937_64* dropout_rng) {
  const auto& m = model_;
  const auto& c = m.config();
  const auto& v = m.vocabs();
  const int n = sentence.size();
  if (n == 0) throw InputError("cannot encode an empty sentence");
  if (c.contextual_dim > 0) {
    if (static_cast<int>(sentence.contextual.size()) != n) {
      throw InputError("sentence " + sentence.id +
                       " lacks contextual vectors required by the model");
    }
    for (const auto& vec : sentence.contextual) {
      if (static_cast<int>(vec.size()) != c.contextual_dim) {
        throw InputError("sentence " + sentence.id +
                         " has contextual vectors of the wrong dimension");
      }
    }
  }

  auto safe_id = [](int id, int rows) {
    return id >= 0 && id < rows ? id : Vocab::kUnk;
  };
  SentenceContext<Real> ctx;
  ctx.sentence = &sentence;
  std::vector<Expr> base(n);
  for (int i = 0; i < n; ++i) {
    const Token& tok = sentence.tokens[i];
    const int wid = safe_id(v.words.Lookup(tok.form), v.words.size());
    std::vector<Expr> parts{g_.Lookup(m.word_embed, wid)};
    if (c.use_pretrained) parts.push_back(g_.Lookup(m.pretrained_embed, wid));
    if (c.use_char) {
      std::vector<int> chars;
      for (const auto& ch : SplitCharacters(tok.form)) {
        chars.push_back(v.chars.Lookup(ch));
      }
      parts.push_back(m.char_cnn(g_, chars));
    }
    if (c.use_pos) {
      parts.push_back(g_.Lookup(m.pos_embed, safe_id(v.pos.Lookup(tok.pos),
                                                     v.pos.size())));
    }
    if (c.contextual_dim > 0) {
      const auto& cv = sentence.contextual[i];
      parts.push_back(g_.Input(std::vector<Real>(cv.begin(), cv.end())));
    }
    base[i] = parts.size() == 1 ? parts[0] : g_.Concat(parts);
  }

  ctx.x = base;
  if (c.use_dep) {
    // Sentences without syntax are treated as forests of single nodes.
    std::vector<int> heads(n, -1);
    if (sentence.HasSyntax()) {
      for (int i = 0; i < n; ++i) {
        heads[i] = sentence.tokens[i].head.value_or(-1);
      }
    }
    std::vector<Expr> syn = m.tree(g_, heads, base);
    for (int i = 0; i < n; ++i) ctx.x[i] = g_.Concat({base[i], syn[i]});
  }

  if (dropout_rng && c.dropout > 0) {
    std::bernoulli_distribution keep(1.0 - c.dropout);
    const Real scale = static_cast<Real>(1.0 / (1.0 - c.dropout));
    for (int i = 0; i < n; ++i) {
      std::vector<Real> mask(g_.rows(ctx.x[i]));
      for (Real& val : mask) val = keep(*dropout_rng) ? scale : Real(0);
      ctx.x[i] = g_.CMult(ctx.x[i], g_.Input(std::move(mask)));
    }
  }

  ctx.h = m.encoder(g_, ctx.x);
  // sigma_r starts with tokens n-1 .. 1, token 1 on top.
  ctx.sigma_r_initial = m.stacks[kSigmaR].Empty();
  for (int i = n - 1; i >= 1; --i) {
    ctx.sigma_r_initial = m.stacks[kSigmaR].Push(g_, ctx.sigma_r_initial, ctx.h[i]);
  }
  ctx.predicate_repr.assign(n, Expr{});
  return ctx;
}

template <typename Real>
ScorerState<Real> Scorer<Real>::Initial(const SentenceContext<Real>& ctx) const {
  ScorerState<Real> s{
      TransitionState::Initial(*ctx.sentence, model_.config().order),
      nullptr, ctx.sigma_r_initial, nullptr, nullptr, nullptr, nullptr,
      nullptr, {}, {}};
  return s;
}

template <typename Real>
Expr Scorer<Real>::PredicateRepr(SentenceContext<Real>& ctx, int predicate) {
  Expr& cached = ctx.predicate_repr[predicate];
  if (!cached.valid()) {
    const Expr hp[] = {ctx.h[predicate]};
    cached = model_.pred_encoder(g_, hp)[0];
  }
  return cached;
}

template <typename Real>
std::array<Expr, kNumStateComponents> Scorer<Real>::Components(
    SentenceContext<Real>& ctx, const ScorerState<Real>& s) {
  const auto& m = model_;
  std::array<Expr, kNumStateComponents> raw;
  raw[kSigmaL] = m.stacks[kSigmaL].Current(g_, s.sigma_l);
  raw[kSigmaR] = m.stacks[kSigmaR].Current(g_, s.sigma_r);
  raw[kAlphaL] = m.stacks[kAlphaL].Current(g_, s.alpha_l);
  raw[kAlphaR] = m.stacks[kAlphaR].Current(g_, s.alpha_r);
  raw[kLambdaP] = s.ts.lambda_p() ? PredicateRepr(ctx, *s.ts.lambda_p())
                                  : g_.Param(m.empty_pred);
  raw[kBeta] = s.ts.beta_empty() ? g_.Param(m.empty_beta)
                                 : ctx.h[s.ts.beta_front()];
  raw[kDelta] = m.stacks[4].Current(g_, s.delta);
  std::array<Expr, kNumStateComponents> out;
  for (int k = 0; k < kNumStateComponents; ++k) {
    out[k] = m.projections[k](g_, raw[k]);
  }
  return out;
}

template <typename Real>
Expr Scorer<Real>::StateRepr(SentenceContext<Real>& ctx,
                             const ScorerState<Real>& s) {
  auto parts = Components(ctx, s);
  return g_.Concat(std::span<const Expr>(parts.data(), parts.size()));
}

template <typename Real>
ActionMask Scorer<Real>::Mask(const ScorerState<Real>& s) const {
  const ActionMask legal = s.ts.LegalActions();
  if (model_.NumRoles() > 0) return legal;
  ActionMask out;
  for (int k = 0; k < kNumActionKinds; ++k) {
    const auto kind = static_cast<ActionKind>(k);
    if (legal.Contains(kind) && !IsArc(kind)) out.Set(kind);
  }
  return out;
}

template <typename Real>
std::vector<Expr> Scorer<Real>::CurrentFeatures(const std::vector<Expr>& history,
                                                Expr current) const {
  std::vector<Expr> out = history;
  if (current.valid()) out.push_back(current);
  return out;
}

template <typename Real>
Expr Scorer<Real>::Attend(const Attention<Real>& att, Expr g,
                          const std::vector<Expr>& features, int dim,
                          Expr* weights) {
  if (features.empty()) {
    if (weights) *weights = Expr{};
    return g_.Zeros(dim);
  }
  const Expr guide = g_.Affine(g_.Param(att.b), {g_.Param(att.w1), g});
  const Expr w2 = g_.Param(att.w2);
  const Expr v = g_.Param(att.v);
  std::vector<Expr> scores;
  for (Expr f : features) {
    scores.push_back(g_.Dot(v, g_.Tanh(g_.Affine(guide, {w2, f}))));
  }
  const Expr alpha = g_.Softmax(g_.Concat(scores));
  if (weights) *weights = alpha;
  return g_.MatMul(g_.ConcatCols(features), alpha);
}

template <typename Real>
StepScores<Real> Scorer<Real>::Score(SentenceContext<Real>& ctx,
                                     const ScorerState<Real>& s) {
  const auto& m = model_;
  const auto& c = m.config();
  StepScores<Real> out;
  out.mask = Mask(s);
  out.g = StateRepr(ctx, s);

  const auto candidate = s.ts.ScheduledToken();
  if (s.ts.lambda_p() && candidate) {
    const Expr ha = ctx.h[*candidate];
    const Expr hp = ctx.h[*s.ts.lambda_p()];
    if (c.high_order_action) {
      out.pair_action = g_.Softmax(m.high_order_action_ffn(g_, {ha, hp}));
    }
    if (c.high_order_role) {
      out.pair_role = g_.Softmax(m.high_order_role_ffn(g_, {ha, hp}));
    }
  }

  Expr logits;
  if (c.high_order_action) {
    const Expr o = Attend(m.action_attention, out.g,
                          CurrentFeatures(s.history_action, out.pair_action),
                          kNumActionKinds);
    logits = m.action_head(g_, {out.g, o});
  } else {
    logits = m.action_head(g_, {out.g});
  }
  uint8_t mask[kNumActionKinds];
  for (int k = 0; k < kNumActionKinds; ++k) {
    mask[k] = out.mask.Contains(static_cast<ActionKind>(k)) ? 1 : 0;
  }
  out.action_logp = g_.LogSoftmax(logits, mask);
  return out;
}

template <typename Real>
Expr Scorer<Real>::RoleLogProbs(StepScores<Real>& scores,
                                const ScorerState<Real>& s) {
  if (scores.role_logp.valid()) return scores.role_logp;
  const auto& m = model_;
  Expr logits;
  if (m.config().high_order_role) {
    const Expr o = Attend(m.role_attention, scores.g,
                          CurrentFeatures(s.history_role, scores.pair_role),
                          m.role_head.out);
    logits = m.role_head(g_, {scores.g, o});
  } else {
    logits = m.role_head(g_, {scores.g});
  }
  scores.role_logp = g_.LogSoftmax(logits);
  return scores.role_logp;
}

template <typename Real>
ScorerState<Real> Scorer<Real>::Advance(const SentenceContext<Real>& ctx,
                                        const ScorerState<Real>& s,
                                        const StepScores<Real>& scores,
                                        const ActionStep& action) {
  const auto& st = model_.stacks;
  ScorerState<Real> next = s;
  const int cand = s.ts.beta_front();
  switch (action.kind) {
    case ActionKind::kNoPrd:
      next.sigma_l = st[kSigmaL].Push(g_, s.sigma_l, ctx.h[cand]);
      if (s.sigma_r) next.sigma_r = st[kSigmaR].Pop(s.sigma_r);
      break;
    case ActionKind::kPrdGen:
      next.saved_sigma_l = s.sigma_l;
      next.saved_sigma_r = s.sigma_r;
      break;
    case ActionKind::kLeftArc:
    case ActionKind::kRightArc:
    case ActionKind::kNoArc: {
      const Side side = s.ts.Schedule();
      const auto tok = s.ts.ScheduledToken();
      if (side == Side::kNone || !tok) break;  // rejected by ApplyInPlace
      if (side == Side::kLeft) {
        next.sigma_l = st[kSigmaL].Pop(s.sigma_l);
        next.alpha_l = st[kAlphaL].Push(g_, s.alpha_l, ctx.h[*tok]);
      } else {
        next.sigma_r = st[kSigmaR].Pop(s.sigma_r);
        next.alpha_r = st[kAlphaR].Push(g_, s.alpha_r, ctx.h[*tok]);
      }
      if (IsArc(action.kind)) {
        if (scores.pair_action.valid()) next.history_action.push_back(scores.pair_action);
        if (scores.pair_role.valid()) next.history_role.push_back(scores.pair_role);
      }
      break;
    }
    case ActionKind::kShift:
      next.sigma_l = st[kSigmaL].Push(g_, s.saved_sigma_l, ctx.h[cand]);
      next.sigma_r = s.saved_sigma_r ? st[kSigmaR].Pop(s.saved_sigma_r)
                                     : s.saved_sigma_r;
      next.alpha_l = nullptr;
      next.alpha_r = nullptr;
      break;
  }
  next.ts.ApplyInPlace(action);
  next.delta = st[4].Push(
      g_, s.delta, g_.Lookup(model_.action_embed, static_cast<int>(action.kind)));
  return next;
}

template class Model<float>;
template class Model<double>;
template class Scorer<float>;
template class Scorer<double>;

}  // namespace srl
