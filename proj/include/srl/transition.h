// Transition system for end-to-end SRL.
//
// A state is (sigma_l, alpha_l, lambda_p, alpha_r, sigma_r, beta, Y) plus the
// action history delta. sigma_l holds processed tokens left of the current
// candidate (nearest on top), sigma_r the tokens to its right (nearest on
// top, pre-loaded at construction). While a predicate sits in lambda_p, arc
// decisions pop the top of sigma_l or sigma_r into alpha_l or alpha_r. SHIFT
// restores both sigma stacks and consumes the candidate.

#ifndef SRL_TRANSITION_H_
#define SRL_TRANSITION_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "srl/data_model.h"

namespace srl {

enum class ActionKind : uint8_t {
  kNoPrd = 0,
  kPrdGen,
  kLeftArc,
  kRightArc,
  kNoArc,
  kShift,
};

inline constexpr int kNumActionKinds = 6;

const char* ActionKindName(ActionKind kind);
std::optional<ActionKind> ParseActionKind(const std::string& name);
inline bool IsArc(ActionKind k) {
  return k == ActionKind::kLeftArc || k == ActionKind::kRightArc;
}

struct ActionStep {
  ActionKind kind = ActionKind::kNoPrd;
  std::string role;  // non-empty exactly for arc kinds

  static ActionStep Of(ActionKind kind, std::string role = {}) {
    return ActionStep{kind, std::move(role)};
  }
  std::string ToString() const;
  bool operator==(const ActionStep&) const = default;
};

// Small bitset over action kinds.
class ActionMask {
 public:
  void Set(ActionKind k) { bits_ |= Bit(k); }
  bool Contains(ActionKind k) const { return (bits_ & Bit(k)) != 0; }
  bool empty() const { return bits_ == 0; }
  int count() const { return __builtin_popcount(bits_); }
  uint8_t bits() const { return bits_; }
  bool operator==(const ActionMask&) const = default;

 private:
  static uint8_t Bit(ActionKind k) { return uint8_t{1} << static_cast<int>(k); }
  uint8_t bits_ = 0;
};

enum class Side { kNone, kLeft, kRight };
const char* SideName(Side side);

// Order in which a predicate's context tokens are inspected.
//   close_first:   nearer stack top first, ties to the left.
//   left_to_right: left stack until exhausted, then right.
//   right_to_left: right stack until exhausted, then left.
enum class ParsingOrder { kCloseFirst, kLeftToRight, kRightToLeft };
const char* ParsingOrderName(ParsingOrder order);
// Accepts close_first, left_to_right / l2r, right_to_left / r2l.
ParsingOrder ParseParsingOrder(const std::string& name);

// Raised for an action that is not legal in the state it is applied to.
class IllegalActionError : public InputError {
 public:
  using InputError::InputError;
};

class TransitionState {
 public:
  // Throws InputError on an empty sentence.
  static TransitionState Initial(const Sentence& sentence,
                                 ParsingOrder order = ParsingOrder::kCloseFirst);
  static TransitionState Initial(int num_tokens,
                                 ParsingOrder order = ParsingOrder::kCloseFirst);

  // Stacks are stored bottom first; back() is the top.
  const std::vector<int>& sigma_l() const { return sigma_l_; }
  const std::vector<int>& alpha_l() const { return alpha_l_; }
  const std::vector<int>& alpha_r() const { return alpha_r_; }
  const std::vector<int>& sigma_r() const { return sigma_r_; }
  const std::optional<int>& lambda_p() const { return lambda_p_; }
  // beta is always the suffix [beta_front, n).
  int beta_front() const { return beta_front_; }
  bool beta_empty() const { return beta_front_ >= num_tokens_; }
  std::vector<int> beta() const;
  const SrlGraph& graph() const { return graph_; }
  const std::vector<ActionStep>& history() const { return history_; }
  int num_tokens() const { return num_tokens_; }
  ParsingOrder order() const { return order_; }

  bool IsTerminal() const { return beta_empty() && !lambda_p_.has_value(); }

  // Which stack the next arc decision inspects. kNone when no predicate is
  // active or both stacks are exhausted.
  Side Schedule() const;
  // Token on top of the scheduled stack, if any.
  std::optional<int> ScheduledToken() const;

  // Throws ContractViolation on a terminal state.
  ActionMask LegalActions() const;

  // Returns a new state; throws IllegalActionError naming the constraint.
  TransitionState Apply(const ActionStep& action) const;
  void ApplyInPlace(const ActionStep& action);

  // Throws ContractViolation if any structural invariant fails.
  void CheckInvariants() const;

 private:
  TransitionState() = default;

  int num_tokens_ = 0;
  ParsingOrder order_ = ParsingOrder::kCloseFirst;
  std::vector<int> sigma_l_;
  std::vector<int> alpha_l_;
  std::optional<int> lambda_p_;
  std::vector<int> alpha_r_;
  std::vector<int> sigma_r_;
  int beta_front_ = 0;
  SrlGraph graph_;
  std::vector<ActionStep> history_;
};

// Textual trace: tab-separated header plus one line per step showing the
// state before the step and the arc added by it.
std::string TraceHeader(bool with_logprob);
std::string TraceLine(int step, const Sentence& sentence,
                      const TransitionState& before, const ActionStep& action,
                      std::optional<double> logprob = std::nullopt);

}  // namespace srl

#endif  // SRL_TRANSITION_H_
