#include "doctest.h"
#include "srl/oracle.h"
#include "srl/transition.h"
#include "test_util.h"

using namespace srl;

namespace {

ActionStep A(ActionKind k, const std::string& role = {}) {
  return ActionStep::Of(k, role);
}

ActionMask MaskOf(std::initializer_list<ActionKind> kinds) {
  ActionMask m;
  for (ActionKind k : kinds) m.Set(k);
  return m;
}

}  // namespace

TEST_SUITE("transition") {
  TEST_CASE("initial state pre-loads sigma_r") {
    const auto s3 = TransitionState::Initial(3);
    CHECK(s3.beta() == std::vector<int>{0, 1, 2});
    CHECK(s3.sigma_r() == std::vector<int>{2, 1});
    CHECK(s3.sigma_l().empty());
    CHECK_FALSE(s3.lambda_p().has_value());
    CHECK(s3.graph().empty());
    CHECK(TransitionState::Initial(1).sigma_r().empty());
    CHECK(TransitionState::Initial(2).sigma_r() == std::vector<int>{1});
    CHECK_THROWS_AS(TransitionState::Initial(0), InputError);
  }

  TEST_CASE("legal actions without a predicate") {
    CHECK(TransitionState::Initial(3).LegalActions() ==
          MaskOf({ActionKind::kNoPrd, ActionKind::kPrdGen}));
  }

  TEST_CASE("only SHIFT when both stacks are empty") {
    auto s = TransitionState::Initial(1).Apply(A(ActionKind::kPrdGen));
    CHECK(s.Schedule() == Side::kNone);
    CHECK(s.LegalActions() == MaskOf({ActionKind::kShift}));
  }

  TEST_CASE("schedule prefers the nearer stack top") {
    // Predicate 2 of 6: tie at distance 1 goes left; after the left NO-ARC
    // the right top (distance 1) is strictly nearer than the left (2).
    auto s = TransitionState::Initial(6)
                 .Apply(A(ActionKind::kNoPrd))
                 .Apply(A(ActionKind::kNoPrd))
                 .Apply(A(ActionKind::kPrdGen));
    CHECK(s.Schedule() == Side::kLeft);
    s = s.Apply(A(ActionKind::kNoArc));
    CHECK(s.Schedule() == Side::kRight);
    CHECK(s.LegalActions() ==
          MaskOf({ActionKind::kRightArc, ActionKind::kNoArc, ActionKind::kShift}));
    s = s.Apply(A(ActionKind::kNoArc));
    CHECK(s.Schedule() == Side::kLeft);  // distances 2 and 2 tie
    CHECK(s.LegalActions() ==
          MaskOf({ActionKind::kLeftArc, ActionKind::kNoArc, ActionKind::kShift}));
  }

  TEST_CASE("exhausted stack is skipped") {
    auto s = TransitionState::Initial(4).Apply(A(ActionKind::kPrdGen));
    CHECK(s.Schedule() == Side::kRight);
    auto t = TransitionState::Initial(2).Apply(A(ActionKind::kNoPrd)).Apply(
        A(ActionKind::kPrdGen));
    CHECK(t.Schedule() == Side::kLeft);
  }

  TEST_CASE("directional orders") {
    auto l2r = TransitionState::Initial(5, ParsingOrder::kLeftToRight)
                   .Apply(A(ActionKind::kNoPrd))
                   .Apply(A(ActionKind::kNoPrd))
                   .Apply(A(ActionKind::kPrdGen));
    CHECK(l2r.Schedule() == Side::kLeft);
    l2r = l2r.Apply(A(ActionKind::kNoArc)).Apply(A(ActionKind::kNoArc));
    CHECK(l2r.Schedule() == Side::kRight);
    auto r2l = TransitionState::Initial(5, ParsingOrder::kRightToLeft)
                   .Apply(A(ActionKind::kNoPrd))
                   .Apply(A(ActionKind::kPrdGen));
    CHECK(r2l.Schedule() == Side::kRight);
  }

  TEST_CASE("worked example reaches the expected graph") {
    auto s = TransitionState::Initial(3);
    for (const auto& a : {A(ActionKind::kNoPrd), A(ActionKind::kPrdGen),
                          A(ActionKind::kLeftArc, "A0"),
                          A(ActionKind::kRightArc, "A1"), A(ActionKind::kShift),
                          A(ActionKind::kNoPrd)}) {
      CHECK_FALSE(s.IsTerminal());
      s = s.Apply(a);
      s.CheckInvariants();
    }
    CHECK(s.IsTerminal());
    SrlGraph expected;
    expected.AddTriplet(1, 0, "A0");
    expected.AddTriplet(1, 2, "A1");
    CHECK(s.graph() == expected);
    CHECK(s.history().size() == 6);
    CHECK(s.history()[2].role == "A0");
  }

  TEST_CASE("PRD-GEN keeps the candidate in beta") {
    auto s = TransitionState::Initial(3).Apply(A(ActionKind::kPrdGen));
    CHECK(s.lambda_p() == 0);
    CHECK(s.beta_front() == 0);
    CHECK_FALSE(s.IsTerminal());
  }

  TEST_CASE("NO-ARC moves the scheduled top to alpha") {
    auto s = TransitionState::Initial(3).Apply(A(ActionKind::kNoPrd)).Apply(
        A(ActionKind::kPrdGen));
    REQUIRE(s.Schedule() == Side::kLeft);
    s = s.Apply(A(ActionKind::kNoArc));
    CHECK(s.alpha_l() == std::vector<int>{0});
    CHECK(s.sigma_l().empty());
    CHECK(s.graph().triplets().empty());
  }

  TEST_CASE("terminal examples") {
    auto s = TransitionState::Initial(1);
    CHECK_FALSE(s.IsTerminal());
    CHECK(s.Apply(A(ActionKind::kNoPrd)).IsTerminal());
    CHECK_FALSE(s.Apply(A(ActionKind::kPrdGen)).IsTerminal());
    CHECK_THROWS_AS(s.Apply(A(ActionKind::kNoPrd)).LegalActions(), ContractViolation);
  }

  TEST_CASE("illegal actions name the constraint") {
    const auto s = TransitionState::Initial(3);
    CHECK_THROWS_AS(s.Apply(A(ActionKind::kLeftArc, "A0")), IllegalActionError);
    CHECK_THROWS_AS(s.Apply(A(ActionKind::kShift)), IllegalActionError);
    CHECK_THROWS_AS(s.Apply(A(ActionKind::kNoArc)), IllegalActionError);
    const auto p = s.Apply(A(ActionKind::kPrdGen));
    CHECK_THROWS_AS(p.Apply(A(ActionKind::kRightArc)), IllegalActionError);
    CHECK_THROWS_AS(p.Apply(A(ActionKind::kShift, "A0")), IllegalActionError);
    CHECK_THROWS_AS(p.Apply(A(ActionKind::kLeftArc, "A0")), IllegalActionError);
    CHECK_THROWS_AS(p.Apply(A(ActionKind::kNoPrd)), IllegalActionError);
    try {
      s.Apply(A(ActionKind::kLeftArc, "A0"));
    } catch (const IllegalActionError& e) {
      CHECK(std::string(e.what()).find("PRD-GEN") != std::string::npos);
    }
  }

  TEST_CASE("apply is pure") {
    std::mt19937_64 rng(5);
    auto s = TransitionState::Initial(6);
    for (int i = 0; i < 20 && !s.IsTerminal(); ++i) {
      const ActionMask m = s.LegalActions();
      ActionKind k = ActionKind::kShift;
      for (int c = 0; c < kNumActionKinds; ++c) {
        if (m.Contains(static_cast<ActionKind>(c)) && rng() % 2) k = static_cast<ActionKind>(c);
      }
      if (!m.Contains(k)) k = m.Contains(ActionKind::kShift) ? ActionKind::kShift : ActionKind::kNoPrd;
      const auto a = A(k, IsArc(k) ? "A1" : "");
      const auto before = s;
      const auto x = s.Apply(a);
      const auto y = s.Apply(a);
      CHECK(x.sigma_l() == y.sigma_l());
      CHECK(x.sigma_r() == y.sigma_r());
      CHECK(x.graph() == y.graph());
      CHECK(s.sigma_l() == before.sigma_l());
      s = x;
    }
  }

  TEST_CASE("random walks keep invariants, conservation and SHIFT restore") {
    std::mt19937_64 rng(17);
    for (int walk = 0; walk < 500; ++walk) {
      const int n = 1 + static_cast<int>(rng() % 12);
      const auto order = static_cast<ParsingOrder>(rng() % 3);
      auto s = TransitionState::Initial(n, order);
      std::vector<int> saved_l, saved_r;
      int steps = 0, predicates = 0;
      while (!s.IsTerminal()) {
        const ActionMask m = s.LegalActions();
        std::vector<ActionKind> kinds;
        for (int c = 0; c < kNumActionKinds; ++c) {
          if (m.Contains(static_cast<ActionKind>(c))) kinds.push_back(static_cast<ActionKind>(c));
        }
        const ActionKind k = kinds[rng() % kinds.size()];
        if (k == ActionKind::kPrdGen) {
          saved_l = s.sigma_l();
          saved_r = s.sigma_r();
          ++predicates;
        }
        const int candidate = s.beta_front();
        s.ApplyInPlace(A(k, IsArc(k) ? "A0" : ""));
        s.CheckInvariants();
        ++steps;
        if (k == ActionKind::kShift) {
          std::vector<int> l = saved_l;
          l.push_back(candidate);
          std::vector<int> r = saved_r;
          if (!r.empty()) r.pop_back();
          CHECK(s.sigma_l() == l);
          CHECK(s.sigma_r() == r);
        }
        if (!s.lambda_p()) {
          std::vector<int> all = s.sigma_l();
          all.insert(all.end(), s.alpha_l().begin(), s.alpha_l().end());
          for (int b : s.beta()) all.push_back(b);
          std::sort(all.begin(), all.end());
          std::vector<int> expected(n);
          std::iota(expected.begin(), expected.end(), 0);
          CHECK(all == expected);
        }
      }
      CHECK(steps <= ActionCountBound(n, predicates));
    }
  }

  TEST_CASE("action names round trip") {
    for (int k = 0; k < kNumActionKinds; ++k) {
      const auto kind = static_cast<ActionKind>(k);
      CHECK(ParseActionKind(ActionKindName(kind)) == kind);
    }
    CHECK_FALSE(ParseActionKind("JUMP").has_value());
    CHECK(A(ActionKind::kLeftArc, "A0").ToString() == "LEFT-ARC(A0)");
    CHECK(ParseParsingOrder("l2r") == ParsingOrder::kLeftToRight);
    CHECK(ParseParsingOrder("right_to_left") == ParsingOrder::kRightToLeft);
    CHECK_THROWS_AS(ParseParsingOrder("zigzag"), ConfigError);
  }

  TEST_CASE("trace line shows the arc added") {
    Sentence s;
    for (int i = 0; i < 3; ++i) {
      Token t;
      t.index = i;
      t.form = std::string(1, static_cast<char>('a' + i));
      s.tokens.push_back(t);
    }
    auto st = TransitionState::Initial(s).Apply(A(ActionKind::kNoPrd)).Apply(
        A(ActionKind::kPrdGen));
    const std::string line = TraceLine(3, s, st, A(ActionKind::kLeftArc, "A0"), -0.5);
    CHECK(line.find("LEFT-ARC(A0)") != std::string::npos);
    CHECK(line.find("+(1,0,A0)") != std::string::npos);
    CHECK(line.find("-0.500000") != std::string::npos);
    CHECK(TraceHeader(false).find("sigma_l") != std::string::npos);
  }
}
