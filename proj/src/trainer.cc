#include "srl/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "srl/decoder.h"
#include "srl/evaluator.h"
#include "srl/oracle.h"

namespace srl {

using nn::Expr;

void TrainConfig::Validate() const {
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (l2 < 0) throw ConfigError("l2 must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (!(clip_norm > 0)) throw ConfigError("clip_norm must be positive");
  if (word_min_freq < 1) throw ConfigError("word_min_freq must be >= 1");
  if (dev_beam < 1) throw ConfigError("dev_beam must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (time_budget < 0) throw ConfigError("time_budget must be >= 0");
  if (select_metric != "arg_f1" && select_metric != "prd_f1" &&
      select_metric != "sum") {
    throw ConfigError("select_metric must be arg_f1, prd_f1 or sum");
  }
}

nlohmann::json TrainConfig::ToJson() const {
  return {{"learning_rate", learning_rate}, {"l2", l2},
          {"batch_size", batch_size},       {"max_epochs", max_epochs},
          {"patience", patience},           {"seed", seed},
          {"clip_norm", clip_norm},         {"word_min_freq", word_min_freq},
          {"dev_beam", dev_beam},           {"select_metric", select_metric},
          {"stop_arg_f1", stop_arg_f1},     {"stop_prd_f1", stop_prd_f1},
          {"time_budget", time_budget},     {"workers", workers}};
}

TrainConfig TrainConfig::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  TrainConfig c;
  const nlohmann::json defaults = c.ToJson();
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!defaults.contains(it.key())) {
      throw ConfigError("unknown train config key '" + it.key() + "'");
    }
  }
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("learning_rate", c.learning_rate);
    get("l2", c.l2);
    get("batch_size", c.batch_size);
    get("max_epochs", c.max_epochs);
    get("patience", c.patience);
    get("seed", c.seed);
    get("clip_norm", c.clip_norm);
    get("word_min_freq", c.word_min_freq);
    get("dev_beam", c.dev_beam);
    get("select_metric", c.select_metric);
    get("stop_arg_f1", c.stop_arg_f1);
    get("stop_prd_f1", c.stop_prd_f1);
    get("time_budget", c.time_budget);
    get("workers", c.workers);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad train config value: ") + e.what());
  }
  c.Validate();
  return c;
}

nlohmann::json EpochMetrics::ToJson() const {
  return {{"epoch", epoch},
          {"loss", loss},
          {"data_loss", data_loss},
          {"dev_arg_precision", dev_arg_precision},
          {"dev_arg_recall", dev_arg_recall},
          {"dev_arg_f1", dev_arg_f1},
          {"dev_prd_f1", dev_prd_f1},
          {"improved", improved}};
}

template <typename Real>
Expr SentenceLoss(Scorer<Real>& scorer, const Example& example,
                  std::mt19937_64* dropout_rng) {
  const auto& model = scorer.model();
  auto& g = scorer.graph();
  OracleOptions oracle{model.config().order, model.config().trailing_no_arcs};
  const auto actions = DeriveActions(example.sentence, example.graph, oracle);
  SentenceContext<Real> ctx = scorer.Encode(example.sentence, dropout_rng);
  ScorerState<Real> state = scorer.Initial(ctx);
  std::vector<Expr> terms;
  for (const ActionStep& action : actions) {
    StepScores<Real> scores = scorer.Score(ctx, state);
    terms.push_back(g.Pick(scores.action_logp, static_cast<int>(action.kind)));
    if (IsArc(action.kind)) {
      const int role = model.vocabs().RoleClass(action.role);
      if (role < 0) {
        throw InputError("role '" + action.role + "' in sentence " +
                         example.sentence.id + " is not in the role vocabulary");
      }
      terms.push_back(g.Pick(scorer.RoleLogProbs(scores, state), role));
    }
    state = scorer.Advance(ctx, state, scores, action);
  }
  return g.Scale(g.Sum(terms), Real(-1));
}

template <typename Real>
double SentenceLossValue(const Model<Real>& model, const Example& example) {
  nn::Graph<Real> g(model.store());
  Scorer<Real> scorer(model, g);
  return static_cast<double>(g.Scalar(SentenceLoss(scorer, example)));
}

template <typename Real>
double L2Term(const Model<Real>& model, double zeta) {
  return 0.5 * zeta * model.store().SquaredNorm(true);
}

template <typename Real>
double TrainBatch(Model<Real>& model, const Corpus& corpus,
                  std::span<const int> batch, const TrainConfig& config,
                  std::mt19937_64& rng, double* data_loss) {
  auto& store = model.store();
  store.ZeroGrad();
  const Real inv = Real(1) / static_cast<Real>(batch.size());
  double objective = 0.0;
  for (int idx : batch) {
    nn::Graph<Real> g(&store);
    Scorer<Real> scorer(model, g);
    const Expr loss = SentenceLoss(scorer, corpus[idx], &rng);
    objective += static_cast<double>(g.Scalar(loss));
    g.Backward(loss, inv);
  }
  objective /= static_cast<double>(batch.size());
  if (data_loss) *data_loss = objective;
  if (config.l2 > 0) {
    nn::Graph<Real> g(&store);
    const auto params = store.TrainableIndices();
    const Expr penalty = g.L2Penalty(params);
    objective += 0.5 * config.l2 * static_cast<double>(g.Scalar(penalty));
    g.Backward(penalty, static_cast<Real>(0.5 * config.l2));
  }
  store.ClipGradNorm(config.clip_norm);
  nn::AdamConfig adam;
  adam.learning_rate = config.learning_rate;
  store.AdamStep(adam);
  return objective;
}

namespace {

double Selection(const std::string& metric, const EpochMetrics& m) {
  if (metric == "prd_f1") return m.dev_prd_f1;
  if (metric == "sum") return m.dev_arg_f1 + m.dev_prd_f1;
  return m.dev_arg_f1;
}

}  // namespace

template <typename Real>
TrainResult<Real> Train(const Corpus& train, const Corpus& dev,
                        const ModelConfig& model_config,
                        const TrainConfig& config,
                        const PretrainedEmbeddings* pretrained,
                        const TrainHooks& hooks) {
  config.Validate();
  model_config.Validate();
  if (train.empty()) throw ConfigError("training corpus is empty");
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  };

  std::mt19937_64 rng(config.seed);
  Model<Real> model(model_config, BuildVocabs(train, config.word_min_freq), rng(),
                    pretrained);
  TrainResult<Real> result{model, 0, -1.0, {}, "max_epochs"};

  std::vector<Sentence> dev_sentences;
  std::vector<SrlGraph> dev_gold;
  for (const auto& ex : dev) {
    dev_sentences.push_back(ex.sentence);
    dev_gold.push_back(ex.graph);
  }
  DecodeOptions dev_options;
  dev_options.beam = config.dev_beam;

  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  int since_best = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double epoch_start = elapsed();
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    double data_sum = 0.0;
    int batches = 0;
    for (size_t b = 0; b < order.size(); b += config.batch_size) {
      const size_t e = std::min(order.size(), b + config.batch_size);
      double data = 0.0;
      loss_sum += TrainBatch(model, train,
                             std::span<const int>(order.data() + b, e - b), config,
                             rng, &data);
      data_sum += data;
      ++batches;
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.loss = loss_sum / batches;
    m.data_loss = data_sum / batches;
    if (!dev.empty()) {
      const auto decoded = DecodeCorpus(model, dev_sentences, dev_options,
                                        config.workers);
      std::vector<SrlGraph> pred;
      for (const auto& d : decoded) pred.push_back(d.graph);
      const Prf arg = ScoreTriplets(dev_gold, pred);
      m.dev_arg_precision = arg.precision();
      m.dev_arg_recall = arg.recall();
      m.dev_arg_f1 = arg.f1();
      m.dev_prd_f1 = ScorePredicates(dev_gold, pred).f1();
    }
    const double score = Selection(config.select_metric, m);
    if (score > result.best_score) {
      m.improved = true;
      result.best_score = score;
      result.best_epoch = epoch;
      result.best_model = model;
      since_best = 0;
      if (!hooks.checkpoint_dir.empty()) model.Save(hooks.checkpoint_dir);
    } else {
      ++since_best;
    }
    result.epochs.push_back(m);
    if (hooks.metrics_log) *hooks.metrics_log << m.ToJson().dump() << "\n" << std::flush;
    if (hooks.on_epoch) hooks.on_epoch(m, elapsed() - epoch_start);

    const bool targets_set = config.stop_arg_f1 > 0 || config.stop_prd_f1 > 0;
    if (targets_set && m.dev_arg_f1 >= config.stop_arg_f1 &&
        m.dev_prd_f1 >= config.stop_prd_f1) {
      result.stop_reason = "target";
      break;
    }
    if (since_best >= config.patience) {
      result.stop_reason = "patience";
      break;
    }
    if (config.time_budget > 0 && elapsed() >= config.time_budget) {
      result.stop_reason = "time_budget";
      break;
    }
  }
  return result;
}

template Expr SentenceLoss(Scorer<float>&, const Example&, std::mt19937_64*);
template Expr SentenceLoss(Scorer<double>&, const Example&, std::mt19937_64*);
template double SentenceLossValue(const Model<float>&, const Example&);
template double SentenceLossValue(const Model<double>&, const Example&);
template double L2Term(const Model<float>&, double);
template double L2Term(const Model<double>&, double);
template TrainResult<float> Train(const Corpus&, const Corpus&, const ModelConfig&,
                                  const TrainConfig&, const PretrainedEmbeddings*,
                                  const TrainHooks&);
template TrainResult<double> Train(const Corpus&, const Corpus&, const ModelConfig&,
                                   const TrainConfig&, const PretrainedEmbeddings*,
                                   const TrainHooks&);
template double TrainBatch(Model<float>&, const Corpus&, std::span<const int>,
                           const TrainConfig&, std::mt19937_64&, double*);
template double TrainBatch(Model<double>&, const Corpus&, std::span<const int>,
                           const TrainConfig&, std::mt19937_64&, double*);

}  // namespace srl
