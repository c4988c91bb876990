#include "srl/data_model.h"

#include <sstream>

namespace srl {

ParseError::ParseError(const std::string& source, int line,
                       const std::string& what)
    : InputError(source + ":" + std::to_string(line) + ": " + what),
      line_(line) {}

bool Sentence::HasSyntax() const {
  for (const Token& t : tokens) {
    if (t.head.has_value()) return true;
  }
  return false;
}

std::vector<int> FindHeadCycle(const Sentence& sentence) {
  const int n = sentence.size();
  // 0 = unvisited, 1 = on current path, 2 = done
  std::vector<int> mark(n, 0);
  for (int start = 0; start < n; ++start) {
    if (mark[start] != 0) continue;
    std::vector<int> path;
    int node = start;
    while (true) {
      if (mark[node] == 2) break;
      if (mark[node] == 1) {
        std::vector<int> cycle;
        bool in_cycle = false;
        for (int p : path) {
          if (p == node) in_cycle = true;
          if (in_cycle) cycle.push_back(p);
        }
        return cycle;
      }
      mark[node] = 1;
      path.push_back(node);
      const auto& head = sentence.tokens[node].head;
      if (!head.has_value() || *head < 0 || *head >= n) break;
      node = *head;
    }
    for (int p : path) mark[p] = 2;
  }
  return {};
}

void ValidateSentence(const Sentence& sentence, bool require_tree) {
  const int n = sentence.size();
  if (n == 0) throw InputError("sentence '" + sentence.id + "' is empty");
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const Token& t = sentence.tokens[i];
    if (t.index != i) {
      throw InputError("sentence '" + sentence.id + "': token " +
                       std::to_string(i) + " has index " +
                       std::to_string(t.index));
    }
    if (t.head.has_value()) {
      if (*t.head == i) {
        throw InputError("sentence '" + sentence.id + "': token " +
                         std::to_string(i) + " is its own head");
      }
      if (*t.head < 0 || *t.head >= n) {
        throw InputError("sentence '" + sentence.id + "': token " +
                         std::to_string(i) + " head out of range");
      }
    } else {
      ++roots;
    }
  }
  if (!sentence.contextual.empty() &&
      static_cast<int>(sentence.contextual.size()) != n) {
    throw InputError("sentence '" + sentence.id +
                     "': contextual vector count does not match token count");
  }
  if (!require_tree) return;
  if (roots != 1) {
    throw InputError("sentence '" + sentence.id + "' has " +
                     std::to_string(roots) + " roots, expected 1");
  }
  if (!FindHeadCycle(sentence).empty()) {
    throw InputError("sentence '" + sentence.id + "' has cyclic head links");
  }
}

void SrlGraph::AddPredicate(int predicate) { predicates_.insert(predicate); }

void SrlGraph::AddTriplet(int predicate, int argument,
                          const std::string& role) {
  if (predicate == argument) {
    throw InputError("triplet with predicate == argument (" +
                     std::to_string(predicate) + ")");
  }
  if (!pairs_.emplace(predicate, argument).second) {
    throw InputError("duplicate arc (" + std::to_string(predicate) + ", " +
                     std::to_string(argument) + ")");
  }
  predicates_.insert(predicate);
  triplets_.insert(Triplet{predicate, argument, role});
}

void SrlGraph::SetSense(int predicate, std::string sense) {
  senses_[predicate] = std::move(sense);
}

bool SrlGraph::HasArc(int predicate, int argument) const {
  return pairs_.count({predicate, argument}) > 0;
}

const std::string* SrlGraph::RoleOf(int predicate, int argument) const {
  if (!HasArc(predicate, argument)) return nullptr;
  auto it = triplets_.lower_bound(Triplet{predicate, argument, ""});
  return &it->role;
}

void SrlGraph::CheckBounds(int n) const {
  auto check = [n](int i) {
    if (i < 0 || i >= n) {
      throw InputError("graph index " + std::to_string(i) +
                       " out of range for sentence of length " +
                       std::to_string(n));
    }
  };
  for (int p : predicates_) check(p);
  for (const Triplet& t : triplets_) {
    check(t.predicate);
    check(t.argument);
  }
}

std::map<int, Frame> GraphToFrames(const SrlGraph& graph) {
  std::map<int, Frame> frames;
  for (int p : graph.predicates()) frames[p];
  for (const Triplet& t : graph.triplets()) {
    frames[t.predicate].emplace_back(t.argument, t.role);
  }
  return frames;
}

Vocab::Vocab() {
  Add(kPadSymbol);
  Add(kUnkSymbol);
}

int Vocab::Add(const std::string& symbol) {
  auto [it, inserted] = ids_.emplace(symbol, size());
  if (inserted) symbols_.push_back(symbol);
  return it->second;
}

int Vocab::Lookup(const std::string& symbol) const {
  auto it = ids_.find(symbol);
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocab::Contains(const std::string& symbol) const {
  return ids_.count(symbol) > 0;
}

const std::string& Vocab::Symbol(int id) const {
  if (id < 0 || id >= size()) {
    throw ContractViolation("vocab id " + std::to_string(id) +
                            " out of range");
  }
  return symbols_[id];
}

std::string Vocab::Serialize() const {
  std::string out;
  for (const std::string& s : symbols_) {
    out += s;
    out += '\n';
  }
  return out;
}

Vocab Vocab::Deserialize(const std::string& text) {
  Vocab v;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no <= kNumReserved) {
      if (line != v.symbols_[line_no - 1]) {
        throw ParseError("vocab", line_no, "reserved symbol mismatch");
      }
      continue;
    }
    if (v.Add(line) != line_no - 1) {
      throw ParseError("vocab", line_no, "duplicate symbol '" + line + "'");
    }
  }
  return v;
}

int VocabSet::RoleClass(const std::string& role) const {
  if (!roles.Contains(role)) return -1;
  return roles.Lookup(role) - Vocab::kNumReserved;
}

const std::string& VocabSet::RoleName(int role_class) const {
  return roles.Symbol(role_class + Vocab::kNumReserved);
}

std::vector<std::string> SplitCharacters(const std::string& text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    size_t len = 1;
    if (lead >= 0xF0 && lead < 0xF8) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = lead < 0xF0 ? 3 : 1;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    if (i + len > text.size()) len = 1;
    for (size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.push_back(text.substr(i, len));
    i += len;
  }
  return out;
}

VocabSet BuildVocabs(const Corpus& corpus, int min_freq) {
  if (corpus.empty()) throw ConfigError("cannot build vocabularies from an empty corpus");
  VocabSet v;
  std::unordered_map<std::string, int> freq;
  std::vector<std::string> order;
  for (const Example& ex : corpus) {
    for (const Token& t : ex.sentence.tokens) {
      if (freq[t.form]++ == 0) order.push_back(t.form);
      for (const std::string& c : SplitCharacters(t.form)) v.chars.Add(c);
      v.pos.Add(t.pos);
      v.deprels.Add(t.deprel);
    }
    for (const Triplet& tr : ex.graph.triplets()) v.roles.Add(tr.role);
  }
  for (const std::string& w : order) {
    if (freq[w] >= min_freq) v.words.Add(w);
  }
  for (const char* name : kActionKindNames) v.actions.Add(name);
  return v;
}

}  // namespace srl
