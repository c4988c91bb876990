#include "srl/decoder.h"

#include <algorithm>
#include <exception>
#include <sstream>

#include "srl/nn/graph.h"

namespace srl {
namespace {

template <typename Real>
struct Hypothesis {
  ScorerState<Real> state;
  double score = 0.0;
  std::vector<ActionStep> actions;
  std::vector<double> step_logprobs;
};

struct Candidate {
  int hyp = 0;
  ActionStep action;
  double step = 0.0;   // log-probability of this step
  double total = 0.0;  // hypothesis score after the step
};

// Expansions of one hypothesis in a fixed order: ascending action kind,
// then ascending role class. Returns the scores used to advance survivors.
template <typename Real>
StepScores<Real> Expand(Scorer<Real>& scorer, SentenceContext<Real>& ctx,
                        const Hypothesis<Real>& hyp, int hyp_index,
                        bool expand_roles, std::vector<Candidate>* out) {
  auto& g = scorer.graph();
  StepScores<Real> scores = scorer.Score(ctx, hyp.state);
  const Real* lp_action = g.data(scores.action_logp);
  const VocabSet& vocabs = scorer.model().vocabs();
  for (int k = 0; k < kNumActionKinds; ++k) {
    const auto kind = static_cast<ActionKind>(k);
    if (!scores.mask.Contains(kind)) continue;
    const double la = static_cast<double>(lp_action[k]);
    if (!IsArc(kind)) {
      out->push_back({hyp_index, ActionStep::Of(kind), la, hyp.score + la});
      continue;
    }
    const nn::Expr role_expr = scorer.RoleLogProbs(scores, hyp.state);
    const Real* lp_role = g.data(role_expr);
    const int num_roles = scorer.model().NumRoles();
    if (expand_roles) {
      for (int r = 0; r < num_roles; ++r) {
        const double step = la + static_cast<double>(lp_role[r]);
        out->push_back({hyp_index, ActionStep::Of(kind, vocabs.RoleName(r)),
                        step, hyp.score + step});
      }
    } else {
      int best = 0;
      for (int r = 1; r < num_roles; ++r) {
        if (lp_role[r] > lp_role[best]) best = r;
      }
      const double step = la + static_cast<double>(lp_role[best]);
      out->push_back({hyp_index, ActionStep::Of(kind, vocabs.RoleName(best)),
                      step, hyp.score + step});
    }
  }
  return scores;
}

template <typename Real>
Hypothesis<Real> AdvanceHypothesis(Scorer<Real>& scorer,
                                   const SentenceContext<Real>& ctx,
                                   const Hypothesis<Real>& hyp,
                                   const StepScores<Real>& scores,
                                   const Candidate& cand, bool check) {
  Hypothesis<Real> next{scorer.Advance(ctx, hyp.state, scores, cand.action),
                        cand.total, hyp.actions, {}};
  if (check) next.state.ts.CheckInvariants();
  next.actions.push_back(cand.action);
  next.step_logprobs = hyp.step_logprobs;
  next.step_logprobs.push_back(cand.step);
  return next;
}

template <typename Real>
DecodeResult Finish(Hypothesis<Real>&& hyp) {
  DecodeResult r;
  r.graph = hyp.state.ts.graph();
  r.actions = std::move(hyp.actions);
  r.step_logprobs = std::move(hyp.step_logprobs);
  r.score = hyp.score;
  return r;
}

// Cap on steps; legality masking guarantees termination well before it.
int StepLimit(int n) { return n + n * (n + 1) + 1; }

}  // namespace

template <typename Real>
DecodeResult DecodeGreedy(const Model<Real>& model, const Sentence& sentence,
                          const DecodeOptions& options) {
  nn::Graph<Real> g(model.store());
  Scorer<Real> scorer(model, g);
  SentenceContext<Real> ctx = scorer.Encode(sentence);
  Hypothesis<Real> hyp{scorer.Initial(ctx), 0.0, {}, {}};
  const int limit = StepLimit(sentence.size());
  std::vector<Candidate> cands;
  for (int step = 0; !hyp.state.ts.IsTerminal(); ++step) {
    if (step >= limit) throw ContractViolation("greedy decode did not terminate");
    cands.clear();
    StepScores<Real> scores =
        Expand(scorer, ctx, hyp, 0, options.expand_roles, &cands);
    size_t best = 0;
    for (size_t i = 1; i < cands.size(); ++i) {
      if (cands[i].total > cands[best].total) best = i;
    }
    hyp = AdvanceHypothesis(scorer, ctx, hyp, scores, cands[best],
                            options.check_invariants);
  }
  return Finish(std::move(hyp));
}

template <typename Real>
DecodeResult DecodeBeam(const Model<Real>& model, const Sentence& sentence,
                        const DecodeOptions& options) {
  if (options.beam < 1) {
    throw ConfigError("beam width must be at least 1, got " +
                      std::to_string(options.beam));
  }
  nn::Graph<Real> g(model.store());
  Scorer<Real> scorer(model, g);
  SentenceContext<Real> ctx = scorer.Encode(sentence);
  std::vector<Hypothesis<Real>> active{{scorer.Initial(ctx), 0.0, {}, {}}};
  std::vector<Hypothesis<Real>> finished;
  const int limit = StepLimit(sentence.size());
  std::vector<Candidate> cands;
  std::vector<StepScores<Real>> scores;
  for (int step = 0; !active.empty(); ++step) {
    if (step >= limit) throw ContractViolation("beam decode did not terminate");
    cands.clear();
    scores.clear();
    for (size_t i = 0; i < active.size(); ++i) {
      scores.push_back(Expand(scorer, ctx, active[i], static_cast<int>(i),
                              options.expand_roles, &cands));
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) {
                       return a.total > b.total;
                     });
    if (static_cast<int>(cands.size()) > options.beam) cands.resize(options.beam);
    std::vector<Hypothesis<Real>> next;
    for (const Candidate& c : cands) {
      Hypothesis<Real> h = AdvanceHypothesis(scorer, ctx, active[c.hyp],
                                             scores[c.hyp], c,
                                             options.check_invariants);
      if (h.state.ts.IsTerminal()) {
        finished.push_back(std::move(h));
      } else {
        next.push_back(std::move(h));
      }
    }
    active = std::move(next);
    // Scores only decrease, so no active hypothesis can overtake a
    // finished one that already scores at least as high.
    if (!finished.empty() && !active.empty()) {
      double best_finished = finished[0].score;
      for (const auto& f : finished) best_finished = std::max(best_finished, f.score);
      if (best_finished >= active[0].score) break;
    }
  }
  size_t best = 0;
  for (size_t i = 1; i < finished.size(); ++i) {
    if (finished[i].score > finished[best].score) best = i;
  }
  return Finish(std::move(finished[best]));
}

template <typename Real>
std::vector<DecodeResult> DecodeCorpus(const Model<Real>& model,
                                       const std::vector<Sentence>& sentences,
                                       const DecodeOptions& options,
                                       int workers) {
  if (options.beam < 1) {
    throw ConfigError("beam width must be at least 1, got " +
                      std::to_string(options.beam));
  }
  const int n = static_cast<int>(sentences.size());
  std::vector<DecodeResult> results(n);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, workers))
  for (int i = 0; i < n; ++i) {
    try {
      results[i] = options.beam == 1
                       ? DecodeGreedy(model, sentences[i], options)
                       : DecodeBeam(model, sentences[i], options);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::string FormatTrace(const Sentence& sentence, const DecodeResult& result,
                        ParsingOrder order) {
  std::ostringstream out;
  out << TraceHeader(true) << "\n";
  TransitionState state = TransitionState::Initial(sentence, order);
  for (size_t t = 0; t < result.actions.size(); ++t) {
    out << TraceLine(static_cast<int>(t), sentence, state, result.actions[t],
                     result.step_logprobs[t])
        << "\n";
    state.ApplyInPlace(result.actions[t]);
  }
  return out.str();
}

template DecodeResult DecodeGreedy(const Model<float>&, const Sentence&,
                                   const DecodeOptions&);
template DecodeResult DecodeGreedy(const Model<double>&, const Sentence&,
                                   const DecodeOptions&);
template DecodeResult DecodeBeam(const Model<float>&, const Sentence&,
                                 const DecodeOptions&);
template DecodeResult DecodeBeam(const Model<double>&, const Sentence&,
                                 const DecodeOptions&);
template std::vector<DecodeResult> DecodeCorpus(const Model<float>&,
                                                const std::vector<Sentence>&,
                                                const DecodeOptions&, int);
template std::vector<DecodeResult> DecodeCorpus(const Model<double>&,
                                                const std::vector<Sentence>&,
                                                const DecodeOptions&, int);

}  // namespace srl
