#include "srl/oracle.h"

#include <map>

namespace srl {

std::vector<ActionStep> DeriveActions(const Sentence& sentence,
                                      const SrlGraph& gold,
                                      const OracleOptions& options) {
  const int n = sentence.size();
  gold.CheckBounds(n);
  std::map<int, std::map<int, std::string>> frames;
  for (int p : gold.predicates()) frames[p];
  for (const Triplet& t : gold.triplets()) {
    frames[t.predicate][t.argument] = t.role;
  }

  TransitionState state = TransitionState::Initial(sentence, options.order);
  std::vector<ActionStep> actions;
  std::map<int, std::string> remaining;
  auto emit = [&](ActionStep a) {
    state.ApplyInPlace(a);
    actions.push_back(std::move(a));
  };
  while (!state.IsTerminal()) {
    if (!state.lambda_p()) {
      const int candidate = state.beta_front();
      auto it = frames.find(candidate);
      if (it == frames.end()) {
        emit(ActionStep::Of(ActionKind::kNoPrd));
      } else {
        remaining = it->second;
        emit(ActionStep::Of(ActionKind::kPrdGen));
      }
      continue;
    }
    const Side side = state.Schedule();
    if (side == Side::kNone ||
        (remaining.empty() && !options.trailing_no_arcs)) {
      emit(ActionStep::Of(ActionKind::kShift));
      continue;
    }
    const int top = *state.ScheduledToken();
    auto it = remaining.find(top);
    if (it != remaining.end()) {
      emit(ActionStep::Of(side == Side::kLeft ? ActionKind::kLeftArc
                                              : ActionKind::kRightArc,
                          it->second));
      remaining.erase(it);
    } else {
      emit(ActionStep::Of(ActionKind::kNoArc));
    }
  }
  return actions;
}

SrlGraph Replay(const Sentence& sentence, std::span<const ActionStep> actions,
                ParsingOrder order) {
  TransitionState state = TransitionState::Initial(sentence, order);
  for (size_t t = 0; t < actions.size(); ++t) {
    try {
      state.ApplyInPlace(actions[t]);
    } catch (const IllegalActionError& e) {
      throw IllegalActionError("step " + std::to_string(t + 1) + ": " +
                               e.what());
    } catch (const InputError& e) {
      // e.g. a duplicate arc inserted into Y
      throw IllegalActionError("step " + std::to_string(t + 1) + ": " +
                               e.what());
    }
  }
  if (!state.IsTerminal()) {
    throw InputError("action sequence ends before a terminal state (" +
                     std::to_string(actions.size()) + " actions)");
  }
  return state.graph();
}

int ActionCountBound(int num_tokens, int num_predicates) {
  return num_tokens + num_predicates * (num_tokens + 1);
}

RoundtripReport RoundtripCheck(const Corpus& corpus,
                               const OracleOptions& options) {
  RoundtripReport report;
  for (const Example& ex : corpus) {
    ++report.checked;
    std::string error;
    try {
      auto actions = DeriveActions(ex.sentence, ex.graph, options);
      SrlGraph replayed = Replay(ex.sentence, actions, options.order);
      if (!(replayed == ex.graph)) error = "replayed graph differs from gold";
    } catch (const Error& e) {
      error = e.what();
    }
    if (!error.empty()) {
      ++report.failed;
      if (!report.first_failing_id) report.first_failing_id = ex.sentence.id;
      report.errors.push_back(ex.sentence.id + ": " + error);
    }
  }
  return report;
}

}  // namespace srl
