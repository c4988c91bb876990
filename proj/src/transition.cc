#include "srl/transition.h"

#include <algorithm>
#include <cstdio>

namespace srl {

const char* ActionKindName(ActionKind kind) {
  return kActionKindNames[static_cast<int>(kind)];
}

std::optional<ActionKind> ParseActionKind(const std::string& name) {
  for (int k = 0; k < kNumActionKinds; ++k) {
    if (name == kActionKindNames[k]) return static_cast<ActionKind>(k);
  }
  return std::nullopt;
}

std::string ActionStep::ToString() const {
  std::string s = ActionKindName(kind);
  if (!role.empty()) s += "(" + role + ")";
  return s;
}

const char* SideName(Side side) {
  switch (side) {
    case Side::kLeft: return "left";
    case Side::kRight: return "right";
    case Side::kNone: break;
  }
  return "none";
}

const char* ParsingOrderName(ParsingOrder order) {
  switch (order) {
    case ParsingOrder::kLeftToRight: return "left_to_right";
    case ParsingOrder::kRightToLeft: return "right_to_left";
    case ParsingOrder::kCloseFirst: break;
  }
  return "close_first";
}

ParsingOrder ParseParsingOrder(const std::string& name) {
  if (name == "close_first") return ParsingOrder::kCloseFirst;
  if (name == "left_to_right" || name == "l2r") return ParsingOrder::kLeftToRight;
  if (name == "right_to_left" || name == "r2l") return ParsingOrder::kRightToLeft;
  throw ConfigError("unknown parsing order '" + name + "'");
}

TransitionState TransitionState::Initial(const Sentence& sentence,
                                         ParsingOrder order) {
  if (sentence.size() == 0) {
    throw InputError("cannot build a transition state for an empty sentence");
  }
  return Initial(sentence.size(), order);
}

TransitionState TransitionState::Initial(int num_tokens, ParsingOrder order) {
  if (num_tokens <= 0) {
    throw InputError("cannot build a transition state for an empty sentence");
  }
  TransitionState s;
  s.num_tokens_ = num_tokens;
  s.order_ = order;
  // Every token except the first, in reverse order: token 1 ends on top.
  for (int i = num_tokens - 1; i >= 1; --i) s.sigma_r_.push_back(i);
  return s;
}

std::vector<int> TransitionState::beta() const {
  std::vector<int> out;
  for (int i = beta_front_; i < num_tokens_; ++i) out.push_back(i);
  return out;
}

Side TransitionState::Schedule() const {
  if (!lambda_p_) return Side::kNone;
  const bool left = !sigma_l_.empty();
  const bool right = !sigma_r_.empty();
  if (!left && !right) return Side::kNone;
  switch (order_) {
    case ParsingOrder::kLeftToRight:
      return left ? Side::kLeft : Side::kRight;
    case ParsingOrder::kRightToLeft:
      return right ? Side::kRight : Side::kLeft;
    case ParsingOrder::kCloseFirst:
      break;
  }
  if (!right) return Side::kLeft;
  if (!left) return Side::kRight;
  const int dl = *lambda_p_ - sigma_l_.back();
  const int dr = sigma_r_.back() - *lambda_p_;
  return dl <= dr ? Side::kLeft : Side::kRight;
}

std::optional<int> TransitionState::ScheduledToken() const {
  switch (Schedule()) {
    case Side::kLeft: return sigma_l_.back();
    case Side::kRight: return sigma_r_.back();
    case Side::kNone: break;
  }
  return std::nullopt;
}

ActionMask TransitionState::LegalActions() const {
  if (IsTerminal()) {
    throw ContractViolation("legal actions requested for a terminal state");
  }
  ActionMask mask;
  if (!lambda_p_) {
    mask.Set(ActionKind::kNoPrd);
    mask.Set(ActionKind::kPrdGen);
    return mask;
  }
  mask.Set(ActionKind::kShift);
  switch (Schedule()) {
    case Side::kLeft:
      mask.Set(ActionKind::kLeftArc);
      mask.Set(ActionKind::kNoArc);
      break;
    case Side::kRight:
      mask.Set(ActionKind::kRightArc);
      mask.Set(ActionKind::kNoArc);
      break;
    case Side::kNone:
      break;
  }
  return mask;
}

TransitionState TransitionState::Apply(const ActionStep& action) const {
  TransitionState next = *this;
  next.ApplyInPlace(action);
  return next;
}

void TransitionState::ApplyInPlace(const ActionStep& action) {
  auto reject = [&](const std::string& why) {
    throw IllegalActionError(action.ToString() + " is illegal: " + why);
  };
  if (IsTerminal()) reject("state is terminal");
  if (IsArc(action.kind) && action.role.empty()) {
    reject("arc actions require a role label");
  }
  if (!IsArc(action.kind) && !action.role.empty()) {
    reject("only arc actions carry a role label");
  }
  auto consume_candidate = [this] {
    sigma_l_.push_back(beta_front_);
    ++beta_front_;
    if (!sigma_r_.empty()) sigma_r_.pop_back();
  };
  const Side side = Schedule();
  switch (action.kind) {
    case ActionKind::kNoPrd:
      if (lambda_p_) reject("a predicate is active; NO-PRD needs an empty lambda_p");
      consume_candidate();
      break;
    case ActionKind::kPrdGen:
      if (lambda_p_) reject("a predicate is already active");
      lambda_p_ = beta_front_;
      graph_.AddPredicate(beta_front_);
      break;
    case ActionKind::kLeftArc:
    case ActionKind::kRightArc: {
      if (!lambda_p_) reject("*-ARC must be preceded by PRD-GEN");
      const bool left = action.kind == ActionKind::kLeftArc;
      if (side != (left ? Side::kLeft : Side::kRight)) {
        reject(std::string("the scheduled side is ") + SideName(side));
      }
      auto& from = left ? sigma_l_ : sigma_r_;
      auto& to = left ? alpha_l_ : alpha_r_;
      const int arg = from.back();
      from.pop_back();
      to.push_back(arg);
      graph_.AddTriplet(*lambda_p_, arg, action.role);
      break;
    }
    case ActionKind::kNoArc: {
      if (!lambda_p_) reject("NO-ARC must be preceded by PRD-GEN");
      if (side == Side::kNone) reject("both context stacks are exhausted");
      auto& from = side == Side::kLeft ? sigma_l_ : sigma_r_;
      auto& to = side == Side::kLeft ? alpha_l_ : alpha_r_;
      to.push_back(from.back());
      from.pop_back();
      break;
    }
    case ActionKind::kShift:
      if (!lambda_p_) reject("SHIFT needs an active predicate");
      while (!alpha_l_.empty()) {
        sigma_l_.push_back(alpha_l_.back());
        alpha_l_.pop_back();
      }
      while (!alpha_r_.empty()) {
        sigma_r_.push_back(alpha_r_.back());
        alpha_r_.pop_back();
      }
      lambda_p_.reset();
      consume_candidate();
      break;
  }
  history_.push_back(action);
}

void TransitionState::CheckInvariants() const {
  auto fail = [](const std::string& why) {
    throw ContractViolation("transition state invariant violated: " + why);
  };
  const int n = num_tokens_;
  if (beta_front_ < 0 || beta_front_ > n) fail("beta front out of range");
  if (lambda_p_ && *lambda_p_ != beta_front_) {
    fail("lambda_p differs from the beta front");
  }
  // Left: sigma_l is a prefix 0..k-1, alpha_l holds k..front-1 with the
  // nearest token at the bottom.
  std::vector<int> left(sigma_l_);
  for (auto it = alpha_l_.rbegin(); it != alpha_l_.rend(); ++it) {
    left.push_back(*it);
  }
  if (static_cast<int>(left.size()) != beta_front_) fail("left context size");
  for (int i = 0; i < beta_front_; ++i) {
    if (left[i] != i) fail("left context order");
  }
  // Right: sigma_r holds n-1..m (top m), alpha_r the popped tokens m-1..front+1
  // with the nearest at the bottom.
  std::vector<int> right(sigma_r_);
  for (auto it = alpha_r_.rbegin(); it != alpha_r_.rend(); ++it) {
    right.push_back(*it);
  }
  const int expected_right = beta_front_ < n ? n - beta_front_ - 1 : 0;
  if (static_cast<int>(right.size()) != expected_right) {
    fail("right context size");
  }
  for (int i = 0; i < expected_right; ++i) {
    if (right[i] != n - 1 - i) fail("right context order");
  }
  if (!lambda_p_ && (!alpha_l_.empty() || !alpha_r_.empty())) {
    fail("alpha stacks must be empty without a predicate");
  }
  for (int p : graph_.predicates()) {
    if (p > beta_front_ || (p == beta_front_ && lambda_p_ != p)) {
      fail("graph predicate " + std::to_string(p) + " was never generated");
    }
  }
}

namespace {

std::string TokenRef(const Sentence& s, std::optional<int> i) {
  if (!i) return "-";
  std::string out = std::to_string(*i);
  if (*i >= 0 && *i < s.size()) out += ":" + s.tokens[*i].form;
  return out;
}

std::optional<int> Top(const std::vector<int>& stack) {
  if (stack.empty()) return std::nullopt;
  return stack.back();
}

}  // namespace

std::string TraceHeader(bool with_logprob) {
  std::string h =
      "step\taction\tside\tcandidate\tsigma_l\talpha_l\tlambda_p\talpha_r\t"
      "sigma_r\ty_delta";
  if (with_logprob) h += "\tlogprob";
  return h;
}

std::string TraceLine(int step, const Sentence& sentence,
                      const TransitionState& before, const ActionStep& action,
                      std::optional<double> logprob) {
  const bool arc_phase = before.lambda_p().has_value() &&
                         action.kind != ActionKind::kShift;
  std::string delta = "-";
  if (IsArc(action.kind)) {
    const int arg = *before.ScheduledToken();
    delta = "+(" + std::to_string(*before.lambda_p()) + "," +
            std::to_string(arg) + "," + action.role + ")";
  }
  std::optional<int> candidate;
  if (!before.beta_empty()) candidate = before.beta_front();
  std::string line = std::to_string(step) + "\t" + action.ToString() + "\t" +
                     (arc_phase ? SideName(before.Schedule()) : "-") + "\t" +
                     TokenRef(sentence, candidate) + "\t" +
                     TokenRef(sentence, Top(before.sigma_l())) + "\t" +
                     TokenRef(sentence, Top(before.alpha_l())) + "\t" +
                     TokenRef(sentence, before.lambda_p()) + "\t" +
                     TokenRef(sentence, Top(before.alpha_r())) + "\t" +
                     TokenRef(sentence, Top(before.sigma_r())) + "\t" + delta;
  if (logprob) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", *logprob);
    line += "\t";
    line += buf;
  }
  return line;
}

}  // namespace srl
