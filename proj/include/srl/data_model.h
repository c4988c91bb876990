// Core domain types: sentences, SRL graphs and symbol vocabularies.

#ifndef SRL_DATA_MODEL_H_
#define SRL_DATA_MODEL_H_

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace srl {

// Error hierarchy. InputError and ConfigError map to CLI exit code 1,
// ContractViolation to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

struct Token {
  int index = 0;
  std::string form;
  std::string lemma = "_";
  std::string pos = "_";
  std::optional<int> head;  // absent for the root
  std::string deprel = "_";
};

struct Sentence {
  std::string id;
  std::vector<Token> tokens;
  // Optional precomputed per-token vectors (contextual encoder output).
  std::vector<std::vector<float>> contextual;

  int size() const { return static_cast<int>(tokens.size()); }
  bool HasSyntax() const;
};

// Checks index contiguity and head ranges. With require_tree, additionally
// checks for exactly one root and acyclic head links.
void ValidateSentence(const Sentence& sentence, bool require_tree);

// Returns head-link cycle membership; empty when the links are acyclic.
std::vector<int> FindHeadCycle(const Sentence& sentence);

struct Triplet {
  int predicate = 0;
  int argument = 0;
  std::string role;

  auto operator<=>(const Triplet&) const = default;
};

// Set of (predicate, argument, role) triplets plus the set of identified
// predicates. A predicate may carry no arguments.
class SrlGraph {
 public:
  SrlGraph() = default;

  void AddPredicate(int predicate);
  // Adds the triplet and its predicate. Throws InputError on
  // predicate == argument or a duplicate (predicate, argument) pair.
  void AddTriplet(int predicate, int argument, const std::string& role);
  void SetSense(int predicate, std::string sense);

  const std::set<int>& predicates() const { return predicates_; }
  const std::set<Triplet>& triplets() const { return triplets_; }
  const std::map<int, std::string>& senses() const { return senses_; }
  bool HasArc(int predicate, int argument) const;
  const std::string* RoleOf(int predicate, int argument) const;
  bool empty() const { return predicates_.empty(); }

  // Throws InputError if any index is outside [0, n).
  void CheckBounds(int n) const;

  // Structural equality: predicates and triplets. Senses are not compared.
  bool operator==(const SrlGraph& other) const {
    return predicates_ == other.predicates_ && triplets_ == other.triplets_;
  }

 private:
  std::set<int> predicates_;
  std::set<Triplet> triplets_;
  std::set<std::pair<int, int>> pairs_;
  std::map<int, std::string> senses_;
};

struct Example {
  Sentence sentence;
  SrlGraph graph;
};

using Corpus = std::vector<Example>;

using Frame = std::vector<std::pair<int, std::string>>;

// Predicate index -> (argument, role) list in argument order. Every
// predicate of the graph has an entry, possibly empty.
std::map<int, Frame> GraphToFrames(const SrlGraph& graph);

// Maps symbols to dense ids. Ids 0 and 1 are reserved for padding and
// unknown symbols.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kNumReserved = 2;
  static constexpr const char* kPadSymbol = "<pad>";
  static constexpr const char* kUnkSymbol = "<unk>";

  Vocab();

  int Add(const std::string& symbol);
  int Lookup(const std::string& symbol) const;
  bool Contains(const std::string& symbol) const;
  const std::string& Symbol(int id) const;
  int size() const { return static_cast<int>(symbols_.size()); }
  const std::vector<std::string>& symbols() const { return symbols_; }

  // One symbol per line in id order, reserved symbols included.
  std::string Serialize() const;
  static Vocab Deserialize(const std::string& text);

  bool operator==(const Vocab& other) const {
    return symbols_ == other.symbols_;
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> ids_;
};

// Names of the six transition action kinds, in ActionKind order.
inline constexpr const char* kActionKindNames[] = {
    "NO-PRD", "PRD-GEN", "LEFT-ARC", "RIGHT-ARC", "NO-ARC", "SHIFT"};

struct VocabSet {
  Vocab words;
  Vocab chars;
  Vocab pos;
  Vocab deprels;
  Vocab roles;
  Vocab actions;

  int NumRoles() const { return roles.size() - Vocab::kNumReserved; }
  int RoleClass(const std::string& role) const;
  const std::string& RoleName(int role_class) const;
};

// Splits a UTF-8 string into code points; invalid bytes become single units.
std::vector<std::string> SplitCharacters(const std::string& text);

// Words below min_freq map to UNK; all other symbol classes keep every
// symbol seen. Ids follow first-occurrence order of the corpus.
VocabSet BuildVocabs(const Corpus& corpus, int min_freq);

}  // namespace srl

#endif  // SRL_DATA_MODEL_H_
