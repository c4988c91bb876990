#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "scenarios.h"
#include "srl/decoder.h"
#include "srl/oracle.h"
#include "test_util.h"

using namespace srl;

namespace {

Corpus Tiny() { return ReadJsonCorpus(testing::DataPath("tiny.json")); }

const Model<float>& SharedModel() {
  static const Model<float> model(testing::SmallConfig(), BuildVocabs(Tiny(), 1), 11);
  return model;
}

}  // namespace

TEST_SUITE("decoder") {
  TEST_CASE("beam 1 equals greedy on random sentences") {
    std::mt19937_64 rng(3);
    std::vector<Sentence> sentences;
    for (int i = 0; i < 100; ++i) {
      const int n = 1 + static_cast<int>(rng() % 12);
      sentences.push_back(testing::RandomSentence(n, rng, "r" + std::to_string(i)));
    }
    const auto r = testing::BeamDominance(SharedModel(), sentences, 32);
    INFO(r.first_failure);
    CHECK(r.greedy_equal == 100);
    CHECK(r.dominated == 100);
  }

  TEST_CASE("best score does not decrease with the beam width") {
    for (const auto& ex : Tiny()) {
      double prev = -INFINITY;
      for (int b : {1, 2, 4, 8, 32}) {
        DecodeOptions o;
        o.beam = b;
        const double score = DecodeBeam(SharedModel(), ex.sentence, o).score;
        CHECK(score >= prev);
        prev = score;
      }
    }
  }

  TEST_CASE("one-token sentences take at most two steps") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 10; ++i) {
      const Sentence s = testing::RandomSentence(1, rng, "one");
      for (int beam : {1, 32}) {
        DecodeOptions o;
        o.beam = beam;
        const auto r = DecodeBeam(SharedModel(), s, o);
        CHECK(r.actions.size() <= 2);
        CHECK(r.graph.triplets().empty());
      }
    }
  }

  TEST_CASE("beam 0 is a configuration error") {
    DecodeOptions o;
    o.beam = 0;
    CHECK_THROWS_AS(DecodeBeam(SharedModel(), Tiny()[0].sentence, o), ConfigError);
  }

  TEST_CASE("decodes are legal, bounded and replayable") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 60; ++i) {
      const int n = 1 + static_cast<int>(rng() % 12);
      const Sentence s = testing::RandomSentence(n, rng, "d" + std::to_string(i));
      for (int beam : {1, 4}) {
        for (bool expand : {false, true}) {
          DecodeOptions o;
          o.beam = beam;
          o.expand_roles = expand;
          o.check_invariants = true;
          const DecodeResult r = DecodeBeam(SharedModel(), s, o);
          CHECK(static_cast<int>(r.actions.size()) <=
                ActionCountBound(n, static_cast<int>(r.graph.predicates().size())));
          CHECK(r.step_logprobs.size() == r.actions.size());
          double total = 0;
          for (double lp : r.step_logprobs) {
            CHECK(lp <= 1e-9);
            total += lp;
          }
          CHECK(total == doctest::Approx(r.score).epsilon(1e-6));
          CHECK(Replay(s, r.actions) == r.graph);
          CHECK_NOTHROW(r.graph.CheckBounds(n));
        }
      }
    }
  }

  TEST_CASE("role expansion never lowers the best score") {
    for (const auto& ex : Tiny()) {
      DecodeOptions narrow;
      narrow.beam = 8;
      DecodeOptions wide = narrow;
      wide.expand_roles = true;
      CHECK(DecodeBeam(SharedModel(), ex.sentence, wide).score >=
            DecodeBeam(SharedModel(), ex.sentence, narrow).score - 1e-9);
    }
  }

  TEST_CASE("parallel corpus decoding matches serial") {
    const auto sentences = testing::SentencesOf(Tiny());
    for (int beam : {1, 4}) {
      DecodeOptions o;
      o.beam = beam;
      const auto serial = DecodeCorpus(SharedModel(), sentences, o, 1);
      const auto parallel = DecodeCorpus(SharedModel(), sentences, o, 3);
      REQUIRE(serial.size() == parallel.size());
      for (size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].actions == parallel[i].actions);
        CHECK(serial[i].score == parallel[i].score);
      }
    }
  }

  TEST_CASE("directional orders decode") {
    ModelConfig c = testing::SmallConfig();
    c.order = ParsingOrder::kRightToLeft;
    const Model<float> model(c, BuildVocabs(Tiny(), 1), 2);
    for (const auto& ex : Tiny()) {
      DecodeOptions o;
      o.check_invariants = true;
      const auto r = DecodeGreedy(model, ex.sentence, o);
      CHECK(Replay(ex.sentence, r.actions, ParsingOrder::kRightToLeft) == r.graph);
    }
  }

  TEST_CASE("trace has a header and one line per step") {
    const Sentence s = Tiny()[0].sentence;
    const auto r = DecodeGreedy(SharedModel(), s);
    const std::string trace = FormatTrace(s, r, ParsingOrder::kCloseFirst);
    CHECK(static_cast<size_t>(std::count(trace.begin(), trace.end(), '\n')) ==
          r.actions.size() + 1);
    CHECK(trace.rfind(TraceHeader(true), 0) == 0);
    CHECK(trace.find(r.actions.back().ToString()) != std::string::npos);
  }

  TEST_CASE("repeated decodes are identical") {
    const auto sentences = testing::SentencesOf(Tiny());
    DecodeOptions o;
    o.beam = 4;
    const auto a = DecodeCorpus(SharedModel(), sentences, o);
    const auto b = DecodeCorpus(SharedModel(), sentences, o);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].actions == b[i].actions);
  }
}
