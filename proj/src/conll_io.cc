#include "srl/conll_io.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace srl {
namespace {

constexpr int kFixedColumns = 14;

enum Column {
  kId = 0, kForm, kLemma, kPLemma, kPos, kPPos, kFeat, kPFeat,
  kHead, kPHead, kDeprel, kPDeprel, kFillPred, kPred
};

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return out;
}

bool ParseInt(const std::string& s, int* value) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

struct Row {
  int line;
  std::vector<std::string> cells;
};

Example BuildBlock(const std::vector<Row>& rows, const std::string& source,
                   int ordinal, bool use_predicted) {
  Example ex;
  ex.sentence.id = std::to_string(ordinal);
  const size_t width = rows.front().cells.size();
  std::vector<int> predicates;
  for (size_t i = 0; i < rows.size(); ++i) {
    const Row& row = rows[i];
    if (row.cells.size() != width) {
      throw ParseError(source, row.line,
                       "ragged row: " + std::to_string(row.cells.size()) +
                           " columns, expected " + std::to_string(width));
    }
    int id = 0;
    if (!ParseInt(row.cells[kId], &id) || id != static_cast<int>(i) + 1) {
      throw ParseError(source, row.line,
                       "ID must be consecutive from 1, got '" +
                           row.cells[kId] + "'");
    }
    const std::string& head_cell =
        row.cells[use_predicted ? kPHead : kHead];
    int head = 0;
    if (!ParseInt(head_cell, &head)) {
      throw ParseError(source, row.line,
                       "non-numeric HEAD '" + head_cell + "'");
    }
    if (head < 0 || head > static_cast<int>(rows.size())) {
      throw ParseError(source, row.line, "HEAD out of range");
    }
    Token t;
    t.index = static_cast<int>(i);
    t.form = row.cells[kForm];
    t.lemma = row.cells[use_predicted ? kPLemma : kLemma];
    t.pos = row.cells[use_predicted ? kPPos : kPos];
    t.deprel = row.cells[use_predicted ? kPDeprel : kDeprel];
    if (head > 0) t.head = head - 1;
    ex.sentence.tokens.push_back(std::move(t));
    const std::string& fill = row.cells[kFillPred];
    if (fill == "Y") {
      predicates.push_back(static_cast<int>(i));
    } else if (fill != "_" && !fill.empty()) {
      throw ParseError(source, row.line, "FILLPRED must be 'Y' or '_'");
    }
  }
  const size_t num_apred = width - kFixedColumns;
  if (num_apred != predicates.size()) {
    throw ParseError(source, rows.front().line,
                     std::to_string(num_apred) + " APRED columns but " +
                         std::to_string(predicates.size()) +
                         " FILLPRED=Y rows");
  }
  for (size_t j = 0; j < predicates.size(); ++j) {
    const int p = predicates[j];
    ex.graph.AddPredicate(p);
    const std::string& sense = rows[p].cells[kPred];
    if (sense != "_") ex.graph.SetSense(p, sense);
  }
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < predicates.size(); ++j) {
      const std::string& cell = rows[i].cells[kFixedColumns + j];
      if (cell == "_") continue;
      try {
        ex.graph.AddTriplet(predicates[j], static_cast<int>(i), cell);
      } catch (const InputError& e) {
        throw ParseError(source, rows[i].line, e.what());
      }
    }
  }
  return ex;
}

std::string Cell(const std::string& s) { return s.empty() ? "_" : s; }

std::ifstream OpenInput(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

}  // namespace

Corpus ParseConll09(std::istream& in, const std::string& source,
                    bool use_predicted_syntax) {
  Corpus corpus;
  std::vector<Row> block;
  std::string line;
  int line_no = 0;
  auto flush = [&] {
    if (block.empty()) return;
    if (block.front().cells.size() < kFixedColumns) {
      throw ParseError(source, block.front().line,
                       "expected at least 14 columns, got " +
                           std::to_string(block.front().cells.size()));
    }
    corpus.push_back(BuildBlock(block, source,
                                static_cast<int>(corpus.size()) + 1,
                                use_predicted_syntax));
    block.clear();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    block.push_back(Row{line_no, SplitTabs(line)});
  }
  flush();
  return corpus;
}

Corpus ReadConll09(const std::string& path, bool use_predicted_syntax) {
  std::ifstream in = OpenInput(path);
  return ParseConll09(in, path, use_predicted_syntax);
}

void WriteConll09(const Corpus& items, std::ostream& out) {
  for (const Example& ex : items) {
    const Sentence& s = ex.sentence;
    std::vector<int> preds(ex.graph.predicates().begin(),
                           ex.graph.predicates().end());
    for (int i = 0; i < s.size(); ++i) {
      const Token& t = s.tokens[i];
      const std::string head = std::to_string(t.head ? *t.head + 1 : 0);
      const bool is_pred = ex.graph.predicates().count(i) > 0;
      std::string sense = "_";
      if (is_pred) {
        auto it = ex.graph.senses().find(i);
        if (it != ex.graph.senses().end()) sense = Cell(it->second);
      }
      out << (i + 1) << '\t' << t.form << '\t' << Cell(t.lemma) << '\t'
          << Cell(t.lemma) << '\t' << Cell(t.pos) << '\t' << Cell(t.pos)
          << "\t_\t_\t" << head << '\t' << head << '\t' << Cell(t.deprel)
          << '\t' << Cell(t.deprel) << '\t' << (is_pred ? "Y" : "_") << '\t'
          << sense;
      for (int p : preds) {
        const std::string* role = ex.graph.RoleOf(p, i);
        out << '\t' << (role ? *role : "_");
      }
      out << '\n';
    }
    out << '\n';
  }
}

void WriteConll09(const Corpus& items, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  WriteConll09(items, out);
  if (!out) throw InputError("write failed for '" + path + "'");
}

Corpus ParseJsonCorpus(const std::string& text, const std::string& source) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(source + ": " + e.what());
  }
  if (!doc.is_array()) throw InputError(source + ": expected a JSON array");
  Corpus corpus;
  int ordinal = 0;
  for (const json& obj : doc) {
    ++ordinal;
    const std::string where = source + ": sentence " + std::to_string(ordinal);
    try {
      Example ex;
      ex.sentence.id = obj.value("id", std::to_string(ordinal));
      const auto& tokens = obj.at("tokens");
      const int n = static_cast<int>(tokens.size());
      auto column = [&](const char* key) -> std::vector<json> {
        if (!obj.contains(key)) return {};
        const auto& col = obj.at(key);
        if (!col.is_array() || static_cast<int>(col.size()) != n) {
          throw InputError(where + ": '" + key + "' length differs from tokens");
        }
        return col.get<std::vector<json>>();
      };
      auto lemmas = column("lemmas");
      auto pos = column("pos");
      auto heads = column("heads");
      auto deprels = column("deprels");
      for (int i = 0; i < n; ++i) {
        Token t;
        t.index = i;
        t.form = tokens[i].get<std::string>();
        if (!lemmas.empty()) t.lemma = lemmas[i].get<std::string>();
        if (!pos.empty()) t.pos = pos[i].get<std::string>();
        if (!deprels.empty()) t.deprel = deprels[i].get<std::string>();
        if (!heads.empty()) {
          const int h = heads[i].get<int>();
          if (h >= 0) t.head = h;
        }
        ex.sentence.tokens.push_back(std::move(t));
      }
      ValidateSentence(ex.sentence, !heads.empty());
      if (obj.contains("predicates")) {
        for (const json& p : obj.at("predicates")) {
          ex.graph.AddPredicate(p.get<int>());
        }
      }
      if (obj.contains("triplets")) {
        for (const json& tr : obj.at("triplets")) {
          if (!tr.is_array() || tr.size() != 3) {
            throw InputError(where + ": triplet must be [pred, arg, role]");
          }
          ex.graph.AddTriplet(tr[0].get<int>(), tr[1].get<int>(),
                              tr[2].get<std::string>());
        }
      }
      if (obj.contains("senses")) {
        for (const auto& [k, v] : obj.at("senses").items()) {
          ex.graph.SetSense(std::stoi(k), v.get<std::string>());
        }
      }
      ex.graph.CheckBounds(n);
      corpus.push_back(std::move(ex));
    } catch (const json::exception& e) {
      throw InputError(where + ": " + e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      if (std::string(e.what()).rfind(source, 0) == 0) throw;
      throw InputError(where + ": " + e.what());
    }
  }
  return corpus;
}

Corpus ReadJsonCorpus(const std::string& path) {
  std::ifstream in = OpenInput(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseJsonCorpus(buffer.str(), path);
}

std::string SerializeJsonCorpus(const Corpus& items) {
  using nlohmann::json;
  json doc = json::array();
  for (const Example& ex : items) {
    json obj;
    obj["id"] = ex.sentence.id;
    json tokens = json::array(), lemmas = json::array(), pos = json::array(),
         heads = json::array(), deprels = json::array();
    for (const Token& t : ex.sentence.tokens) {
      tokens.push_back(t.form);
      lemmas.push_back(t.lemma);
      pos.push_back(t.pos);
      heads.push_back(t.head ? *t.head : -1);
      deprels.push_back(t.deprel);
    }
    obj["tokens"] = tokens;
    obj["lemmas"] = lemmas;
    obj["pos"] = pos;
    obj["heads"] = heads;
    obj["deprels"] = deprels;
    obj["predicates"] = std::vector<int>(ex.graph.predicates().begin(),
                                         ex.graph.predicates().end());
    json triplets = json::array();
    for (const Triplet& t : ex.graph.triplets()) {
      triplets.push_back(json::array({t.predicate, t.argument, t.role}));
    }
    obj["triplets"] = triplets;
    if (!ex.graph.senses().empty()) {
      json senses = json::object();
      for (const auto& [p, s] : ex.graph.senses()) senses[std::to_string(p)] = s;
      obj["senses"] = senses;
    }
    doc.push_back(std::move(obj));
  }
  return doc.dump(1) + "\n";
}

void WriteJsonCorpus(const Corpus& items, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << SerializeJsonCorpus(items);
  if (!out) throw InputError("write failed for '" + path + "'");
}

bool IsJsonPath(const std::string& path) {
  return path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
}

Corpus ReadCorpus(const std::string& path, bool use_predicted_syntax) {
  return IsJsonPath(path) ? ReadJsonCorpus(path)
                          : ReadConll09(path, use_predicted_syntax);
}

void WriteCorpus(const Corpus& items, const std::string& path) {
  if (IsJsonPath(path)) {
    WriteJsonCorpus(items, path);
  } else {
    WriteConll09(items, path);
  }
}

void AttachContextualVectors(const std::string& path, Corpus* corpus) {
  std::ifstream in = OpenInput(path);
  std::string line;
  int line_no = 0;
  size_t sentence = 0;
  size_t dim = 0;
  std::vector<std::vector<float>> current;
  auto flush = [&] {
    if (current.empty()) return;
    if (sentence >= corpus->size()) {
      throw ParseError(path, line_no, "more vector blocks than sentences");
    }
    Sentence& s = (*corpus)[sentence].sentence;
    if (static_cast<int>(current.size()) != s.size()) {
      throw ParseError(path, line_no,
                       "vector block has " + std::to_string(current.size()) +
                           " rows for a sentence of " +
                           std::to_string(s.size()) + " tokens");
    }
    s.contextual = std::move(current);
    current.clear();
    ++sentence;
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<float> values;
    float v;
    while (fields >> v) values.push_back(v);
    if (!fields.eof()) throw ParseError(path, line_no, "non-numeric value");
    if (values.empty()) {
      flush();
      continue;
    }
    if (dim == 0) dim = values.size();
    if (values.size() != dim) {
      throw ParseError(path, line_no,
                       "dimension " + std::to_string(values.size()) +
                           ", expected " + std::to_string(dim));
    }
    current.push_back(std::move(values));
  }
  flush();
  if (sentence != corpus->size()) {
    throw ParseError(path, line_no, "fewer vector blocks than sentences");
  }
}

}  // namespace srl
