#include "srl/evaluator.h"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <map>
#include <sstream>

namespace srl {

double Prf::precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
}

double Prf::recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
}

double Prf::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

Prf& Prf::operator+=(const Prf& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

nlohmann::json Prf::ToJson() const {
  return {{"tp", tp},
          {"fp", fp},
          {"fn", fn},
          {"precision", precision()},
          {"recall", recall()},
          {"f1", f1()}};
}

int DistanceBucket(int distance) {
  return std::clamp(std::abs(distance), 1, kNumDistanceBuckets) - 1;
}

std::string DistanceBucketName(int bucket) {
  return bucket == kNumDistanceBuckets - 1
             ? ">=" + std::to_string(kNumDistanceBuckets)
             : std::to_string(bucket + 1);
}

Violations& Violations::operator+=(const Violations& o) {
  unique += o.unique;
  continuation += o.continuation;
  reference += o.reference;
  return *this;
}

bool IsCoreRole(const std::string& role) {
  if (role == "AA") return true;
  return role.size() == 2 && role[0] == 'A' && role[1] >= '0' && role[1] <= '5';
}

Violations FrameViolations(const Frame& frame) {
  Violations v;
  std::map<std::string, int> seen;
  for (const auto& [arg, role] : frame) {
    if (IsCoreRole(role) && seen[role]++ > 0) ++v.unique;
    if (role.rfind("C-", 0) == 0) {
      const std::string base = role.substr(2);
      const bool earlier = std::any_of(frame.begin(), frame.end(), [&](const auto& e) {
        return e.second == base && e.first < arg;
      });
      if (!earlier) ++v.continuation;
    } else if (role.rfind("R-", 0) == 0) {
      const std::string base = role.substr(2);
      const bool present = std::any_of(frame.begin(), frame.end(),
                                       [&](const auto& e) { return e.second == base; });
      if (!present) ++v.reference;
    }
  }
  return v;
}

Violations RoleViolations(std::span<const SrlGraph> graphs) {
  Violations total;
  for (const auto& g : graphs) {
    for (const auto& [pred, frame] : GraphToFrames(g)) total += FrameViolations(frame);
  }
  return total;
}

namespace {

void CheckAligned(size_t gold, size_t pred) {
  if (gold != pred) {
    throw InputError("gold has " + std::to_string(gold) + " sentences, prediction has " +
                     std::to_string(pred));
  }
}

template <typename Set, typename Fn>
void CountSets(const Set& gold, const Set& pred, Fn&& add) {
  for (const auto& t : pred) add(t, gold.count(t) ? 0 : 1, gold.count(t) ? 1 : 0, 0);
  for (const auto& t : gold) {
    if (!pred.count(t)) add(t, 0, 0, 1);
  }
}

}  // namespace

Prf ScoreTriplets(std::span<const SrlGraph> gold, std::span<const SrlGraph> pred) {
  CheckAligned(gold.size(), pred.size());
  Prf out;
  for (size_t i = 0; i < gold.size(); ++i) {
    CountSets(gold[i].triplets(), pred[i].triplets(),
              [&](const Triplet&, int fp, int tp, int fn) {
                out.tp += tp;
                out.fp += fp;
                out.fn += fn;
              });
  }
  return out;
}

Prf ScorePredicates(std::span<const SrlGraph> gold, std::span<const SrlGraph> pred) {
  CheckAligned(gold.size(), pred.size());
  Prf out;
  for (size_t i = 0; i < gold.size(); ++i) {
    CountSets(gold[i].predicates(), pred[i].predicates(),
              [&](int, int fp, int tp, int fn) {
                out.tp += tp;
                out.fp += fp;
                out.fn += fn;
              });
  }
  return out;
}

std::array<Prf, kNumDistanceBuckets> ScoreDistanceBuckets(
    std::span<const SrlGraph> gold, std::span<const SrlGraph> pred) {
  CheckAligned(gold.size(), pred.size());
  std::array<Prf, kNumDistanceBuckets> out{};
  for (size_t i = 0; i < gold.size(); ++i) {
    CountSets(gold[i].triplets(), pred[i].triplets(),
              [&](const Triplet& t, int fp, int tp, int fn) {
                Prf& b = out[DistanceBucket(t.argument - t.predicate)];
                b.tp += tp;
                b.fp += fp;
                b.fn += fn;
              });
  }
  return out;
}

EvalReport EvaluateGraphs(std::span<const SrlGraph> gold,
                          std::span<const SrlGraph> pred) {
  EvalReport r;
  r.arg = ScoreTriplets(gold, pred);
  r.prd = ScorePredicates(gold, pred);
  r.buckets = ScoreDistanceBuckets(gold, pred);
  r.gold_violations = RoleViolations(gold);
  r.pred_violations = RoleViolations(pred);
  return r;
}

EvalReport Evaluate(const Corpus& gold, const Corpus& pred) {
  CheckAligned(gold.size(), pred.size());
  std::vector<SrlGraph> g, p;
  for (size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].sentence.id != pred[i].sentence.id) {
      throw InputError("sentence id mismatch at position " + std::to_string(i) +
                       ": gold '" + gold[i].sentence.id + "', prediction '" +
                       pred[i].sentence.id + "'");
    }
    g.push_back(gold[i].graph);
    p.push_back(pred[i].graph);
  }
  return EvaluateGraphs(g, p);
}

nlohmann::json EvalReport::ToJson() const {
  nlohmann::json buckets_json = nlohmann::json::array();
  for (int b = 0; b < kNumDistanceBuckets; ++b) {
    auto entry = buckets[b].ToJson();
    entry["bucket"] = DistanceBucketName(b);
    buckets_json.push_back(entry);
  }
  auto violations = [](const Violations& v) {
    return nlohmann::json{{"U", v.unique}, {"C", v.continuation}, {"R", v.reference}};
  };
  return {{"arg_precision", arg.precision()},
          {"arg_recall", arg.recall()},
          {"arg_f1", arg.f1()},
          {"prd_precision", prd.precision()},
          {"prd_recall", prd.recall()},
          {"prd_f1", prd.f1()},
          {"arg_counts", arg.ToJson()},
          {"prd_counts", prd.ToJson()},
          {"distance_buckets", buckets_json},
          {"violations", violations(pred_violations)},
          {"gold_violations", violations(gold_violations)},
          {"tokens_per_second", tokens_per_second}};
}

std::string EvalReport::ToText() const {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(4);
  out << "arguments   P " << arg.precision() << "  R " << arg.recall() << "  F1 "
      << arg.f1() << "  (tp " << arg.tp << ", fp " << arg.fp << ", fn " << arg.fn
      << ")\n";
  out << "predicates  P " << prd.precision() << "  R " << prd.recall() << "  F1 "
      << prd.f1() << "\n";
  out << "distance buckets (F1):\n";
  for (int b = 0; b < kNumDistanceBuckets; ++b) {
    out << "  " << DistanceBucketName(b) << "\t" << buckets[b].f1() << "\t(gold "
        << buckets[b].tp + buckets[b].fn << ")\n";
  }
  out << "violations  U " << pred_violations.unique << "  C "
      << pred_violations.continuation << "  R " << pred_violations.reference
      << "  (gold U " << gold_violations.unique << "  C "
      << gold_violations.continuation << "  R " << gold_violations.reference << ")\n";
  if (tokens_per_second > 0) out << "tokens/sec  " << tokens_per_second << "\n";
  return out.str();
}

template <typename Real>
BenchResult BenchDecode(const Model<Real>& model,
                        const std::vector<Sentence>& sentences,
                        const DecodeOptions& options, int repetitions,
                        int workers) {
  BenchResult r;
  for (const auto& s : sentences) r.tokens += s.size();
  DecodeCorpus(model, sentences, options, workers);  // warm-up
  const int reps = std::max(3, repetitions);
  for (int k = 0; k < reps; ++k) {
    const auto start = std::chrono::steady_clock::now();
    DecodeCorpus(model, sentences, options, workers);
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start;
    r.seconds.push_back(elapsed.count());
  }
  std::vector<double> sorted = r.seconds;
  std::sort(sorted.begin(), sorted.end());
  r.median_seconds = sorted[sorted.size() / 2];
  r.tokens_per_second =
      r.median_seconds > 0 ? static_cast<double>(r.tokens) / r.median_seconds : 0.0;
  return r;
}

template BenchResult BenchDecode(const Model<float>&, const std::vector<Sentence>&,
                                 const DecodeOptions&, int, int);
template BenchResult BenchDecode(const Model<double>&, const std::vector<Sentence>&,
                                 const DecodeOptions&, int, int);

}  // namespace srl
