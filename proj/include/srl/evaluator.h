// Scoring of predicted SRL graphs against gold: labeled triplet P/R/F1,
// predicate identification F1, distance buckets, role-consistency
// violations, and decoding throughput.

#ifndef SRL_EVALUATOR_H_
#define SRL_EVALUATOR_H_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "srl/data_model.h"
#include "srl/decoder.h"

namespace srl {

struct Prf {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  // 0 when the denominator is 0.
  double precision() const;
  double recall() const;
  double f1() const;
  Prf& operator+=(const Prf& o);
  nlohmann::json ToJson() const;
};

// Buckets of |argument - predicate|: 1, 2, 3, 4, 5, 6 and >= 7.
inline constexpr int kNumDistanceBuckets = 7;
int DistanceBucket(int distance);
std::string DistanceBucketName(int bucket);

struct Violations {
  long unique = 0;        // U: repeated core roles
  long continuation = 0;  // C: C-X without an earlier X
  long reference = 0;     // R: R-X without any X

  bool operator==(const Violations&) const = default;
  Violations& operator+=(const Violations& o);
};

bool IsCoreRole(const std::string& role);
Violations FrameViolations(const Frame& frame);
Violations RoleViolations(std::span<const SrlGraph> graphs);

Prf ScoreTriplets(std::span<const SrlGraph> gold, std::span<const SrlGraph> pred);
Prf ScorePredicates(std::span<const SrlGraph> gold,
                    std::span<const SrlGraph> pred);
std::array<Prf, kNumDistanceBuckets> ScoreDistanceBuckets(
    std::span<const SrlGraph> gold, std::span<const SrlGraph> pred);

struct EvalReport {
  Prf arg;
  Prf prd;
  std::array<Prf, kNumDistanceBuckets> buckets;
  Violations gold_violations;
  Violations pred_violations;
  double tokens_per_second = 0.0;  // 0 when not measured

  nlohmann::json ToJson() const;
  std::string ToText() const;
};

// Throws InputError when the corpora differ in length or sentence ids.
EvalReport Evaluate(const Corpus& gold, const Corpus& pred);
EvalReport EvaluateGraphs(std::span<const SrlGraph> gold,
                          std::span<const SrlGraph> pred);

struct BenchResult {
  long tokens = 0;
  std::vector<double> seconds;  // one entry per timed repetition
  double median_seconds = 0.0;
  double tokens_per_second = 0.0;
};

// Untimed warm-up pass, then `repetitions` (at least 3) timed passes.
template <typename Real>
BenchResult BenchDecode(const Model<Real>& model,
                        const std::vector<Sentence>& sentences,
                        const DecodeOptions& options, int repetitions = 3,
                        int workers = 1);

extern template BenchResult BenchDecode(const Model<float>&,
                                        const std::vector<Sentence>&,
                                        const DecodeOptions&, int, int);
extern template BenchResult BenchDecode(const Model<double>&,
                                        const std::vector<Sentence>&,
                                        const DecodeOptions&, int, int);

}  // namespace srl

#endif  // SRL_EVALUATOR_H_
