#include "srl/embeddings.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "srl/data_model.h"

namespace srl {
namespace {

std::vector<std::string> SplitWhitespace(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string field; in >> field;) out.push_back(field);
  return out;
}

bool IsInteger(const std::string& s) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

const std::vector<float>* PretrainedEmbeddings::Find(
    const std::string& word) const {
  auto it = index.find(word);
  return it == index.end() ? nullptr : &vectors[it->second];
}

std::vector<float> PretrainedEmbeddings::Lookup(const std::string& word) const {
  const auto* v = Find(word);
  return v ? *v : std::vector<float>(dim, 0.0f);
}

PretrainedEmbeddings ParsePretrainedEmbeddings(std::istream& in,
                                               const std::string& source) {
  std::vector<std::pair<int, std::vector<std::string>>> lines;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    auto fields = SplitWhitespace(line);
    if (!fields.empty()) lines.emplace_back(number, std::move(fields));
  }
  if (lines.empty()) throw InputError("no vectors in '" + source + "'");

  size_t first = 0;
  const auto& head = lines[0].second;
  if (head.size() == 2 && IsInteger(head[0]) && IsInteger(head[1])) {
    const size_t d = std::stoul(head[1]);
    if (lines.size() == 1 || lines[1].second.size() == d + 1) first = 1;
  }

  PretrainedEmbeddings table;
  for (size_t k = first; k < lines.size(); ++k) {
    const auto& [number, fields] = lines[k];
    if (fields.size() < 2) {
      throw ParseError(source, number, "expected a word and its components");
    }
    const int d = static_cast<int>(fields.size()) - 1;
    if (table.dim == 0) table.dim = d;
    if (d != table.dim) {
      throw ParseError(source, number,
                       "vector has " + std::to_string(d) +
                           " components, expected " + std::to_string(table.dim));
    }
    std::vector<float> vec(d);
    for (int i = 0; i < d; ++i) {
      const std::string& f = fields[i + 1];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), vec[i]);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw ParseError(source, number, "bad number '" + f + "'");
      }
    }
    if (table.index.count(fields[0])) continue;  // first occurrence wins
    table.index.emplace(fields[0], table.size());
    table.words.push_back(fields[0]);
    table.vectors.push_back(std::move(vec));
  }
  if (table.words.empty()) throw InputError("no vectors in '" + source + "'");
  return table;
}

PretrainedEmbeddings LoadPretrainedEmbeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open embeddings file '" + path + "'");
  return ParsePretrainedEmbeddings(in, path);
}

}  // namespace srl
