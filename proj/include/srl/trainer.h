// Teacher-forced training of the transition scorer.

#ifndef SRL_TRAINER_H_
#define SRL_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "srl/data_model.h"
#include "srl/embeddings.h"
#include "srl/nn/graph.h"
#include "srl/scorer.h"

namespace srl {

struct TrainConfig {
  double learning_rate = 1e-5;
  double l2 = 0.2;  // zeta; the loss adds (zeta / 2) * ||theta||^2 per batch
  int batch_size = 16;
  int max_epochs = 500;
  int patience = 10;
  uint64_t seed = 1;
  double clip_norm = 5.0;
  int word_min_freq = 1;
  int dev_beam = 1;
  // "arg_f1", "prd_f1" or "sum".
  std::string select_metric = "arg_f1";
  // Stop as soon as the dev scores reach these values; 0 disables.
  double stop_arg_f1 = 0.0;
  double stop_prd_f1 = 0.0;
  // Wall-clock limit in seconds; 0 disables.
  double time_budget = 0.0;
  int workers = 1;  // dev decoding threads

  void Validate() const;
  nlohmann::json ToJson() const;
  static TrainConfig FromJson(const nlohmann::json& j);
};

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;       // mean batch objective including the L2 term
  double data_loss = 0.0;  // mean sentence loss without the L2 term
  double dev_arg_precision = 0.0;
  double dev_arg_recall = 0.0;
  double dev_arg_f1 = 0.0;
  double dev_prd_f1 = 0.0;
  bool improved = false;

  nlohmann::json ToJson() const;
};

template <typename Real>
struct TrainResult {
  Model<Real> best_model;
  int best_epoch = 0;
  double best_score = 0.0;
  std::vector<EpochMetrics> epochs;
  std::string stop_reason;
};

// Negative log-likelihood of the oracle actions and of the gold roles at
// arc steps, with states following the gold actions.
template <typename Real>
nn::Expr SentenceLoss(Scorer<Real>& scorer, const Example& example,
                      std::mt19937_64* dropout_rng = nullptr);

// Loss value on its own graph, without the L2 term.
template <typename Real>
double SentenceLossValue(const Model<Real>& model, const Example& example);

// (zeta / 2) * ||theta||^2 over trainable parameters.
template <typename Real>
double L2Term(const Model<Real>& model, double zeta);

struct TrainHooks {
  // One JSON object per epoch, one line each.
  std::ostream* metrics_log = nullptr;
  // Best checkpoint directory; empty to skip saving.
  std::string checkpoint_dir;
  // Called after every epoch (progress logging).
  std::function<void(const EpochMetrics&, double seconds)> on_epoch;
};

// Builds vocabularies from the training corpus, trains, and returns the
// model with the best dev selection score. Throws ConfigError on an empty
// training corpus or invalid configuration.
template <typename Real>
TrainResult<Real> Train(const Corpus& train, const Corpus& dev,
                        const ModelConfig& model_config,
                        const TrainConfig& config,
                        const PretrainedEmbeddings* pretrained = nullptr,
                        const TrainHooks& hooks = {});

// One optimizer step over a batch: mean sentence loss plus the L2 term,
// gradient clipping, then Adam. Returns the batch objective; data_loss,
// when given, receives the mean sentence loss alone.
template <typename Real>
double TrainBatch(Model<Real>& model, const Corpus& corpus,
                  std::span<const int> batch, const TrainConfig& config,
                  std::mt19937_64& rng, double* data_loss = nullptr);

extern template nn::Expr SentenceLoss(Scorer<float>&, const Example&,
                                      std::mt19937_64*);
extern template nn::Expr SentenceLoss(Scorer<double>&, const Example&,
                                      std::mt19937_64*);
extern template double SentenceLossValue(const Model<float>&, const Example&);
extern template double SentenceLossValue(const Model<double>&, const Example&);
extern template double L2Term(const Model<float>&, double);
extern template double L2Term(const Model<double>&, double);
extern template TrainResult<float> Train(const Corpus&, const Corpus&,
                                         const ModelConfig&, const TrainConfig&,
                                         const PretrainedEmbeddings*,
                                         const TrainHooks&);
extern template TrainResult<double> Train(const Corpus&, const Corpus&,
                                          const ModelConfig&, const TrainConfig&,
                                          const PretrainedEmbeddings*,
                                          const TrainHooks&);
extern template double TrainBatch(Model<float>&, const Corpus&,
                                  std::span<const int>, const TrainConfig&,
                                  std::mt19937_64&, double*);
extern template double TrainBatch(Model<double>&, const Corpus&,
                                  std::span<const int>, const TrainConfig&,
                                  std::mt19937_64&, double*);

}  // namespace srl

#endif  // SRL_TRAINER_H_
