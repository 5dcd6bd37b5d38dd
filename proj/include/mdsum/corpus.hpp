#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "mdsum/errors.hpp"

namespace mdsum {

struct Token {
    std::string surface;
    bool is_digit_mask = false;  // true iff surface is all '#' produced by masking
};

struct Sentence {
    std::vector<Token> tokens;
    std::string original_text;  // pre-masking text, kept for digit restoration
};

struct Document {
    std::string name;  // stable identifier, unique within its set
    std::vector<Sentence> sentences;
};

struct DocumentSet {
    std::string id;
    std::vector<Document> documents;               // sorted ascending by name
    std::vector<std::vector<Sentence>> references;  // zero or more reference summaries
};

/// One raw text file as read from disk, before any preprocessing.
struct RawDocumentSet {
    std::string id;
    std::vector<std::pair<std::string, std::string>> documents;  // (name, raw text), sorted by name
    std::vector<std::string> references;                         // raw reference texts
};

struct RawCorpus {
    std::map<std::string, std::vector<RawDocumentSet>> splits;  // train/dev/test
};

struct Corpus {
    std::map<std::string, std::vector<DocumentSet>> splits;

    const std::vector<DocumentSet>& split(const std::string& name) const;
};

// ---- preprocessing --------------------------------------------------------

/// Splits raw text on terminal punctuation (., !, ?) followed by whitespace.
std::vector<std::string> split_sentences(const std::string& raw);

/// Whitespace tokenization with punctuation detached as single-character
/// tokens; letters lowercased, digits left intact. '#' counts as a word
/// character so masked runs survive re-tokenization.
std::vector<std::string> tokenize(const std::string& sentence_text);

/// Replaces every digit character with '#', flagging all-'#' tokens.
std::vector<Token> mask_digits(const std::vector<std::string>& words);

/// Full pipeline: sentence split, tokenize, lowercase, digit masking.
/// Empty input yields an empty list.
std::vector<Sentence> preprocess_text(const std::string& raw);

/// Maps '#'-runs in generated sentences back to digits taken from the source
/// sentence with minimal word edit distance. Token counts never change.
std::vector<Sentence> restore_digits(const std::vector<Sentence>& generated,
                                     const std::vector<Sentence>& sources);

// ---- corpus I/O -----------------------------------------------------------

/// Reads a corpus laid out as <root>/<split>/<set_id>/ with *.doc.txt and
/// *.ref.txt files. Text is stored raw; preprocessing is a separate step.
RawCorpus ingest_corpus(const std::filesystem::path& root);

/// Applies preprocess_text to every document and reference.
Corpus preprocess_corpus(const RawCorpus& raw);

// ---- vocabulary -----------------------------------------------------------

class Vocabulary {
  public:
    static constexpr const char* kUnk = "<unk>";
    static constexpr const char* kEos = "<eos>";
    static constexpr const char* kEod = "<eod>";
    static constexpr const char* kPad = "<pad>";

    /// Builds a vocabulary holding only the four specials.
    Vocabulary();

    int unk_id() const { return 0; }
    int eos_id() const { return 1; }
    int eod_id() const { return 2; }
    int pad_id() const { return 3; }

    std::size_t size() const { return id_to_token_.size(); }

    /// Adds a token if absent; returns its id either way.
    int add(const std::string& token);

    /// Token id, or the <unk> id for out-of-vocabulary tokens.
    int encode(const std::string& token) const;

    /// Surface form for an id; throws ContractViolation when out of range.
    const std::string& decode(int id) const;

    bool contains(const std::string& token) const { return token_to_id_.count(token) > 0; }
    const std::vector<std::string>& tokens() const { return id_to_token_; }

  private:
    std::unordered_map<std::string, int> token_to_id_;
    std::vector<std::string> id_to_token_;
};

/// Four specials plus up to max_size-4 most frequent train-split tokens with
/// frequency >= min_freq; ties broken lexicographically.
Vocabulary build_vocabulary(const Corpus& corpus, std::size_t max_size, std::size_t min_freq);

/// Same, from an explicit frequency table (used by build_vocabulary).
Vocabulary build_vocabulary(const std::map<std::string, std::size_t>& freq, std::size_t max_size,
                            std::size_t min_freq);

// ---- small helpers --------------------------------------------------------

std::vector<std::string> surfaces(const Sentence& s);
std::vector<int> encode_sentence_ids(const Vocabulary& v, const Sentence& s);

}  // namespace mdsum
