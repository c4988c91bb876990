// Multi-module scenarios shared by the unit tests and the acceptance runner.

#ifndef SRL_TESTS_SCENARIOS_H_
#define SRL_TESTS_SCENARIOS_H_

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "srl/decoder.h"
#include "srl/oracle.h"
#include "srl/scorer.h"
#include "srl/trainer.h"
#include "test_util.h"

namespace srl::testing {

// Copies every parameter of `to` from the same-named parameter of `from`.
// Returns false if a name is missing or a shape differs.
template <typename Real>
bool CopySharedParameters(const Model<Real>& from, Model<Real>& to) {
  for (int i = 0; i < to.store().size(); ++i) {
    auto& dst = to.store().at(i);
    const int j = from.store().Find(dst.name);
    if (j < 0) return false;
    const auto& src = from.store().at(j).value;
    if (src.rows != dst.value.rows || src.cols != dst.value.cols) return false;
    dst.value = src;
  }
  return true;
}

// Zeroes the weight blocks that read the high-order features and freezes
// them, leaving the model to depend on g_t alone.
template <typename Real>
void ZeroAndFreezeHighOrderSlices(Model<Real>& model) {
  auto zero = [&](const nn::Ffn<Real>& head) {
    if (head.w1.size() < 2) return;
    auto& p = model.store().at(head.w1[1]);
    std::fill(p.value.data.begin(), p.value.data.end(), Real(0));
    p.trainable = false;
  };
  zero(model.action_head);
  zero(model.role_head);
}

struct EquivalenceReport {
  int steps_compared = 0;
  int mismatches = 0;
  int decodes_compared = 0;
  int decode_mismatches = 0;
  std::string first_mismatch;
  bool copied = false;

  bool ok() const {
    return copied && steps_compared > 0 && mismatches == 0 && decode_mismatches == 0;
  }
};

// Teacher-forced action and role log-probabilities of `a` and `b` along the
// oracle sequences of `corpus`, compared bit for bit, plus greedy decodes.
template <typename Real>
void CompareModels(const Model<Real>& a, const Model<Real>& b, const Corpus& corpus,
                   EquivalenceReport* report) {
  for (const Example& ex : corpus) {
    nn::Graph<Real> ga(a.store()), gb(b.store());
    Scorer<Real> sa(a, ga), sb(b, gb);
    auto ca = sa.Encode(ex.sentence);
    auto cb = sb.Encode(ex.sentence);
    auto xa = sa.Initial(ca);
    auto xb = sb.Initial(cb);
    const auto actions =
        DeriveActions(ex.sentence, ex.graph, {a.config().order, a.config().trailing_no_arcs});
    for (size_t t = 0; t < actions.size(); ++t) {
      auto pa = sa.Score(ca, xa);
      auto pb = sb.Score(cb, xb);
      std::vector<Real> va = ga.Values(pa.action_logp);
      std::vector<Real> vb = gb.Values(pb.action_logp);
      if (IsArc(actions[t].kind)) {
        const auto ra = ga.Values(sa.RoleLogProbs(pa, xa));
        const auto rb = gb.Values(sb.RoleLogProbs(pb, xb));
        va.insert(va.end(), ra.begin(), ra.end());
        vb.insert(vb.end(), rb.begin(), rb.end());
      }
      ++report->steps_compared;
      if (va.size() != vb.size() ||
          std::memcmp(va.data(), vb.data(), va.size() * sizeof(Real)) != 0) {
        if (report->mismatches++ == 0) {
          report->first_mismatch = ex.sentence.id + " step " + std::to_string(t + 1);
        }
      }
      xa = sa.Advance(ca, xa, pa, actions[t]);
      xb = sb.Advance(cb, xb, pb, actions[t]);
    }
    const DecodeResult da = DecodeGreedy(a, ex.sentence);
    const DecodeResult db = DecodeGreedy(b, ex.sentence);
    ++report->decodes_compared;
    if (!(da.actions == db.actions) || da.score != db.score) ++report->decode_mismatches;
  }
}

// With the high-order slices zeroed and frozen, the high-order model must
// reproduce the vanilla model exactly, before and after a few optimizer
// steps (frozen slices stay at zero).
template <typename Real>
EquivalenceReport HighOrderEquivalence(const Corpus& corpus, ModelConfig config,
                                       uint64_t seed) {
  ModelConfig high = config;
  high.high_order_action = high.high_order_role = true;
  ModelConfig vanilla = config;
  vanilla.high_order_action = vanilla.high_order_role = false;
  const VocabSet vocabs = BuildVocabs(corpus, 1);
  Model<Real> ho(high, vocabs, seed);
  Model<Real> van(vanilla, vocabs, seed + 1);
  ZeroAndFreezeHighOrderSlices(ho);

  EquivalenceReport report;
  report.copied = CopySharedParameters(ho, van);
  if (!report.copied) return report;
  CompareModels(ho, van, corpus, &report);

  TrainConfig tc;
  tc.learning_rate = 1e-2;
  std::mt19937_64 rng(seed);
  std::vector<int> batch(corpus.size());
  std::iota(batch.begin(), batch.end(), 0);
  for (int step = 0; step < 3; ++step) TrainBatch(ho, corpus, batch, tc, rng);
  report.copied = CopySharedParameters(ho, van);
  if (report.copied) CompareModels(ho, van, corpus, &report);
  return report;
}

struct DominanceReport {
  int sentences = 0;
  int dominated = 0;     // score(B=wide) >= score(B=1)
  int greedy_equal = 0;  // B=1 output and score equal to greedy
  std::string first_failure;
};

template <typename Real>
DominanceReport BeamDominance(const Model<Real>& model,
                              const std::vector<Sentence>& sentences, int wide) {
  DominanceReport r;
  for (const Sentence& s : sentences) {
    ++r.sentences;
    DecodeOptions one;
    one.beam = 1;
    DecodeOptions many;
    many.beam = wide;
    const DecodeResult greedy = DecodeGreedy(model, s);
    const DecodeResult b1 = DecodeBeam(model, s, one);
    const DecodeResult bw = DecodeBeam(model, s, many);
    if (bw.score >= b1.score) {
      ++r.dominated;
    } else if (r.first_failure.empty()) {
      r.first_failure = s.id;
    }
    if (b1.actions == greedy.actions && b1.score == greedy.score &&
        b1.step_logprobs == greedy.step_logprobs && b1.graph == greedy.graph) {
      ++r.greedy_equal;
    } else if (r.first_failure.empty()) {
      r.first_failure = s.id + " (beam 1 differs from greedy)";
    }
  }
  return r;
}

inline std::string ReadBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// True when both directories hold the same relative file names with
// identical bytes.
inline bool SameDirectoryBytes(const std::string& a, const std::string& b) {
  namespace fs = std::filesystem;
  auto listing = [](const std::string& root) {
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root).string());
    }
    std::sort(files.begin(), files.end());
    return files;
  };
  const auto fa = listing(a);
  if (fa != listing(b) || fa.empty()) return false;
  for (const auto& f : fa) {
    if (ReadBytes(a + "/" + f) != ReadBytes(b + "/" + f)) return false;
  }
  return true;
}

inline std::vector<Sentence> SentencesOf(const Corpus& corpus) {
  std::vector<Sentence> out;
  for (const auto& ex : corpus) out.push_back(ex.sentence);
  return out;
}

}  // namespace srl::testing

#endif  // SRL_TESTS_SCENARIOS_H_
