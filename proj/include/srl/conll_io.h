// Corpus readers and writers: CoNLL-2009 column format and a JSON corpus
// format used for synthetic data.
//
// CoNLL-2009 columns, tab separated, one token per line, blank line between
// sentences:
//   ID FORM LEMMA PLEMMA POS PPOS FEAT PFEAT HEAD PHEAD DEPREL PDEPREL
//   FILLPRED PRED APRED_1 ... APRED_k
// APRED_j holds the roles of the j-th FILLPRED=Y token (left to right).
//
// JSON corpus: an array of objects
//   {"id": "...", "tokens": [...], "lemmas": [...], "pos": [...],
//    "heads": [...], "deprels": [...], "predicates": [...],
//    "senses": {"<index>": "..."}, "triplets": [[pred, arg, role], ...]}
// with 0-based indices and -1 for the root head. Only "tokens" is required.

#ifndef SRL_CONLL_IO_H_
#define SRL_CONLL_IO_H_

#include <iosfwd>
#include <string>

#include "srl/data_model.h"

namespace srl {

Corpus ReadConll09(const std::string& path, bool use_predicted_syntax = false);
Corpus ParseConll09(std::istream& in, const std::string& source,
                    bool use_predicted_syntax = false);

// Gold and predicted columns receive the same values.
void WriteConll09(const Corpus& items, const std::string& path);
void WriteConll09(const Corpus& items, std::ostream& out);

Corpus ReadJsonCorpus(const std::string& path);
Corpus ParseJsonCorpus(const std::string& text, const std::string& source);
void WriteJsonCorpus(const Corpus& items, const std::string& path);
std::string SerializeJsonCorpus(const Corpus& items);

// Dispatches on extension: ".json" selects the JSON format, anything else
// CoNLL-2009.
bool IsJsonPath(const std::string& path);
Corpus ReadCorpus(const std::string& path, bool use_predicted_syntax = false);
void WriteCorpus(const Corpus& items, const std::string& path);

// Per-token vectors: one line of whitespace-separated reals per token,
// blank line between sentences, same order as the corpus.
void AttachContextualVectors(const std::string& path, Corpus* corpus);

}  // namespace srl

#endif  // SRL_CONLL_IO_H_
