// Greedy and beam-search decoding over the transition system.

#ifndef SRL_DECODER_H_
#define SRL_DECODER_H_

#include <string>
#include <vector>

#include "srl/data_model.h"
#include "srl/scorer.h"
#include "srl/transition.h"

namespace srl {

struct DecodeOptions {
  int beam = 1;
  // Expand arc actions over every role instead of only the best one.
  bool expand_roles = false;
  // Re-check state invariants after every step.
  bool check_invariants = false;
};

struct DecodeResult {
  SrlGraph graph;
  std::vector<ActionStep> actions;
  // Per-step log-probability: action plus role for arc steps.
  std::vector<double> step_logprobs;
  double score = 0.0;
};

template <typename Real>
DecodeResult DecodeGreedy(const Model<Real>& model, const Sentence& sentence,
                          const DecodeOptions& options = {});

// Throws ConfigError when options.beam < 1.
template <typename Real>
DecodeResult DecodeBeam(const Model<Real>& model, const Sentence& sentence,
                        const DecodeOptions& options);

// Beam search with beam 1 is the greedy decoder, so this dispatches on
// options.beam only for speed. Sentences are decoded by `workers` threads;
// results keep corpus order.
template <typename Real>
std::vector<DecodeResult> DecodeCorpus(const Model<Real>& model,
                                       const std::vector<Sentence>& sentences,
                                       const DecodeOptions& options,
                                       int workers = 1);

// One trace line per step, in the transition module's textual format.
std::string FormatTrace(const Sentence& sentence, const DecodeResult& result,
                        ParsingOrder order);

extern template DecodeResult DecodeGreedy(const Model<float>&, const Sentence&,
                                          const DecodeOptions&);
extern template DecodeResult DecodeGreedy(const Model<double>&, const Sentence&,
                                          const DecodeOptions&);
extern template DecodeResult DecodeBeam(const Model<float>&, const Sentence&,
                                        const DecodeOptions&);
extern template DecodeResult DecodeBeam(const Model<double>&, const Sentence&,
                                        const DecodeOptions&);
extern template std::vector<DecodeResult> DecodeCorpus(
    const Model<float>&, const std::vector<Sentence>&, const DecodeOptions&, int);
extern template std::vector<DecodeResult> DecodeCorpus(
    const Model<double>&, const std::vector<Sentence>&, const DecodeOptions&, int);

}  // namespace srl

#endif  // SRL_DECODER_H_
