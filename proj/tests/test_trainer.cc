#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "scenarios.h"
#include "srl/trainer.h"
#include "test_util.h"

using namespace srl;

namespace {

Corpus Tiny() { return ReadJsonCorpus(testing::DataPath("tiny.json")); }

Example ThreeTokens() {
  Example ex;
  ex.sentence.id = "three";
  const char* forms[] = {"Ann", "sleeps", "today"};
  for (int i = 0; i < 3; ++i) {
    Token t;
    t.index = i;
    t.form = forms[i];
    t.pos = i == 1 ? "VBZ" : "NN";
    if (i != 1) t.head = 1;
    t.deprel = i == 1 ? "ROOT" : "DEP";
    ex.sentence.tokens.push_back(t);
  }
  ex.graph.AddTriplet(1, 0, "A0");
  ex.graph.AddTriplet(1, 2, "AM-TMP");
  return ex;
}

std::vector<int> All(const Corpus& c) {
  std::vector<int> idx(c.size());
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace

TEST_SUITE("trainer") {
  TEST_CASE("batch objective is the mean sentence loss plus the L2 term") {
    const Corpus corpus = Tiny();
    Model<double> model(testing::SmallConfig(), BuildVocabs(corpus, 1), 5);
    TrainConfig tc;
    tc.l2 = 0.3;
    double expected_data = 0;
    for (const auto& ex : corpus) expected_data += SentenceLossValue(model, ex);
    expected_data /= static_cast<double>(corpus.size());
    const double expected_l2 = L2Term(model, tc.l2);
    std::mt19937_64 rng(1);
    double data = 0;
    const auto idx = All(corpus);
    const double objective = TrainBatch(model, corpus, idx, tc, rng, &data);
    CHECK(data == doctest::Approx(expected_data).epsilon(1e-12));
    CHECK(objective == doctest::Approx(expected_data + expected_l2).epsilon(1e-12));
  }

  TEST_CASE("L2 term is half zeta times the squared norm of trainable values") {
    Model<double> model(testing::SmallConfig(), BuildVocabs(Tiny(), 1), 5);
    double sq = 0;
    for (int p : model.store().TrainableIndices()) {
      for (double v : model.store().at(p).value.data) sq += v * v;
    }
    CHECK(L2Term(model, 0.2) == doctest::Approx(0.1 * sq));
    CHECK(L2Term(model, 0.0) == 0.0);
  }

  TEST_CASE("untrained sentence losses are positive") {
    const Corpus corpus = Tiny();
    Model<float> model(testing::SmallConfig(), BuildVocabs(corpus, 1), 5);
    for (const auto& ex : corpus) CHECK(SentenceLossValue(model, ex) > 0.0);
  }

  TEST_CASE("finite-difference gradient on a 3-token fixture") {
    const Example ex = ThreeTokens();
    Model<double> model(testing::SmallConfig(), BuildVocabs({ex}, 1), 9);
    auto build = [&](nn::Graph<double>& g) {
      Scorer<double> scorer(model, g);
      return SentenceLoss(scorer, ex);
    };
    const auto r = testing::CheckGradients(model.store(), build, 500, 3);
    INFO(r.worst);
    CHECK(r.max_rel_error <= 1e-4);
  }

  TEST_CASE("L2 gradient reaches the parameters") {
    const Example ex = ThreeTokens();
    Model<double> model(testing::SmallConfig(), BuildVocabs({ex}, 1), 9);
    const auto before = model.store().at(model.word_embed).value;
    TrainConfig tc;
    tc.l2 = 1.0;
    tc.learning_rate = 1e-3;
    std::mt19937_64 rng(1);
    const Corpus c{ex};
    TrainBatch(model, c, All(c), tc, rng);
    // Rows never looked up still move under the penalty.
    const auto& after = model.store().at(model.word_embed).value;
    CHECK(after.at(Vocab::kPad, 0) != before.at(Vocab::kPad, 0));
  }

  TEST_CASE("first epochs lower the training loss") {
    const Corpus corpus = Tiny();
    TrainConfig tc;
    tc.learning_rate = 1e-2;
    tc.l2 = 0;
    tc.max_epochs = 5;
    tc.patience = 100;
    const auto r = Train<float>(corpus, {}, testing::SmallConfig(), tc);
    REQUIRE(r.epochs.size() == 5);
    CHECK(r.epochs.back().data_loss < r.epochs.front().data_loss);
  }

  TEST_CASE("patience stops training after a flat dev score") {
    const Corpus corpus = testing::RandomCorpus(4, 2);
    TrainConfig tc;
    tc.patience = 3;
    tc.max_epochs = 50;
    std::ostringstream metrics;
    TrainHooks hooks;
    hooks.metrics_log = &metrics;
    // No dev sentences: the selection score stays at 0 after epoch 1.
    const auto r = Train<float>(corpus, {}, testing::SmallConfig(), tc, nullptr, hooks);
    CHECK(r.best_epoch == 1);
    CHECK(r.epochs.size() == 4);
    CHECK(r.stop_reason == "patience");
    const std::string log = metrics.str();
    CHECK(std::count(log.begin(), log.end(), '\n') == 4);
    CHECK(nlohmann::json::parse(log.substr(0, log.find('\n'))).contains("dev_arg_f1"));
  }

  TEST_CASE("empty training corpus is a configuration error") {
    CHECK_THROWS_AS(Train<float>({}, {}, testing::SmallConfig(), TrainConfig{}),
                    ConfigError);
    TrainConfig bad;
    bad.batch_size = 0;
    CHECK_THROWS_AS(Train<float>(Tiny(), {}, testing::SmallConfig(), bad), ConfigError);
  }

  TEST_CASE("same seed, same run") {
    const Corpus corpus = Tiny();
    TrainConfig tc;
    tc.learning_rate = 1e-2;
    tc.max_epochs = 3;
    tc.seed = 17;
    ModelConfig mc = testing::SmallConfig();
    mc.dropout = 0.2;
    const auto a = Train<float>(corpus, corpus, mc, tc);
    const auto b = Train<float>(corpus, corpus, mc, tc);
    REQUIRE(a.epochs.size() == b.epochs.size());
    for (size_t i = 0; i < a.epochs.size(); ++i) {
      CHECK(a.epochs[i].ToJson() == b.epochs[i].ToJson());
    }
    const std::string da = testing::ScratchDir("seed_a");
    const std::string db = testing::ScratchDir("seed_b");
    a.best_model.Save(da);
    b.best_model.Save(db);
    CHECK(testing::SameDirectoryBytes(da, db));
  }

  TEST_CASE("train config json") {
    TrainConfig c;
    c.learning_rate = 0.5;
    c.select_metric = "sum";
    CHECK(TrainConfig::FromJson(c.ToJson()).ToJson() == c.ToJson());
    CHECK_THROWS_AS(TrainConfig::FromJson({{"lr", 1}}), ConfigError);
    CHECK_THROWS_AS(TrainConfig::FromJson({{"select_metric", "loss"}}), ConfigError);
  }

  TEST_CASE("a larger learning rate overfits the tiny corpus") {
    const Corpus corpus = Tiny();
    TrainConfig tc;
    tc.learning_rate = 2e-3;
    tc.l2 = 1e-6;
    tc.max_epochs = 150;
    tc.patience = 150;
    tc.stop_arg_f1 = 0.99;
    tc.stop_prd_f1 = 1.0;
    const auto r = Train<float>(corpus, corpus, ModelConfig{}, tc);
    REQUIRE_FALSE(r.epochs.empty());
    INFO("epochs run: " << r.epochs.size());
    CHECK(r.stop_reason == "target");
    CHECK(r.epochs.back().dev_arg_f1 >= 0.99);
    CHECK(r.epochs.back().dev_prd_f1 == 1.0);
  }
}
