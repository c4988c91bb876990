// Pretrained word vectors in the plain text format: one word per line
// followed by its whitespace-separated components, with an optional
// "count dim" header line.

#ifndef SRL_EMBEDDINGS_H_
#define SRL_EMBEDDINGS_H_

#include <istream>
#include <string>
#include <unordered_map>
#include <vector>

namespace srl {

struct PretrainedEmbeddings {
  int dim = 0;
  std::vector<std::string> words;
  std::vector<std::vector<float>> vectors;
  std::unordered_map<std::string, int> index;

  int size() const { return static_cast<int>(words.size()); }
  // nullptr for words absent from the table.
  const std::vector<float>* Find(const std::string& word) const;
  // The stored vector, or zeros of length dim for absent words.
  std::vector<float> Lookup(const std::string& word) const;
};

// Throws ParseError (with the line number) on inconsistent dimensions or
// malformed numbers, InputError if the file cannot be opened or is empty.
PretrainedEmbeddings LoadPretrainedEmbeddings(const std::string& path);
PretrainedEmbeddings ParsePretrainedEmbeddings(std::istream& in,
                                               const std::string& source);

}  // namespace srl

#endif  // SRL_EMBEDDINGS_H_
