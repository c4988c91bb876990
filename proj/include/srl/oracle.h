// Static oracle: gold graph -> canonical action sequence, and replay of an
// action sequence back into a graph.

#ifndef SRL_ORACLE_H_
#define SRL_ORACLE_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srl/data_model.h"
#include "srl/transition.h"

namespace srl {

struct OracleOptions {
  ParsingOrder order = ParsingOrder::kCloseFirst;
  // When set, NO-ARC continues until both context stacks are exhausted
  // instead of shifting right after the last gold argument.
  bool trailing_no_arcs = false;
};

// Throws InputError if the gold graph does not fit the sentence.
std::vector<ActionStep> DeriveActions(const Sentence& sentence,
                                      const SrlGraph& gold,
                                      const OracleOptions& options = {});

// Throws IllegalActionError naming the failing step, or InputError if the
// sequence ends before a terminal state.
SrlGraph Replay(const Sentence& sentence, std::span<const ActionStep> actions,
                ParsingOrder order = ParsingOrder::kCloseFirst);

// Upper bound on an oracle sequence length: n + k * (n + 1).
int ActionCountBound(int num_tokens, int num_predicates);

struct RoundtripReport {
  int checked = 0;
  int failed = 0;
  std::optional<std::string> first_failing_id;
  std::vector<std::string> errors;  // one entry per failing sentence
};

RoundtripReport RoundtripCheck(const Corpus& corpus,
                               const OracleOptions& options = {});

}  // namespace srl

#endif  // SRL_ORACLE_H_
