#include "mdsum/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "mdsum/metrics.hpp"

namespace mdsum {

namespace fs = std::filesystem;

namespace {

bool is_space_byte(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_terminal_punct(char c) {
    return c == '.' || c == '!' || c == '?';
}

// Word characters stick together inside a token; everything else is detached
// as its own single-character token. '#' must be a word character so masked
// digit runs round-trip through re-tokenization. Bytes >= 0x80 are kept as
// word characters to avoid splitting UTF-8 sequences.
bool is_word_byte(unsigned char c) {
    return std::isalnum(c) != 0 || c == '#' || c >= 0x80;
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space_byte(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && is_space_byte(static_cast<unsigned char>(s[e - 1])))
        --e;
    return s.substr(b, e - b);
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw DataError("cannot read file: " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

const std::vector<DocumentSet>& Corpus::split(const std::string& name) const {
    auto it = splits.find(name);
    if (it == splits.end())
        throw ConfigError("corpus has no split named '" + name + "'");
    return it->second;
}

std::vector<std::string> split_sentences(const std::string& raw) {
    std::vector<std::string> out;
    std::string current;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const char c = raw[i];
        current.push_back(c);
        const bool boundary = is_terminal_punct(c) &&
                              (i + 1 == raw.size() ||
                               is_space_byte(static_cast<unsigned char>(raw[i + 1])));
        if (boundary) {
            const std::string t = trim(current);
            if (!t.empty())
                out.push_back(t);
            current.clear();
        }
    }
    const std::string t = trim(current);
    if (!t.empty())
        out.push_back(t);
    return out;
}

std::vector<std::string> tokenize(const std::string& sentence_text) {
    std::vector<std::string> out;
    std::string word;
    auto flush = [&] {
        if (!word.empty()) {
            out.push_back(word);
            word.clear();
        }
    };
    for (unsigned char c : sentence_text) {
        if (is_space_byte(c)) {
            flush();
        } else if (is_word_byte(c)) {
            word.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
            out.push_back(std::string(1, static_cast<char>(c)));
        }
    }
    flush();
    return out;
}

std::vector<Token> mask_digits(const std::vector<std::string>& words) {
    std::vector<Token> out;
    out.reserve(words.size());
    for (const std::string& w : words) {
        Token t;
        t.surface = w;
        bool masked_any = false;
        for (char& c : t.surface) {
            if (std::isdigit(static_cast<unsigned char>(c))) {
                c = '#';
                masked_any = true;
            }
        }
        t.is_digit_mask =
            masked_any && std::all_of(t.surface.begin(), t.surface.end(),
                                      [](char c) { return c == '#'; });
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<Sentence> preprocess_text(const std::string& raw) {
    std::vector<Sentence> out;
    for (const std::string& text : split_sentences(raw)) {
        Sentence s;
        s.original_text = text;
        s.tokens = mask_digits(tokenize(text));
        if (!s.tokens.empty())
            out.push_back(std::move(s));
    }
    return out;
}

namespace {

struct CharRun {
    std::size_t token;  // index into sentence tokens
    std::size_t begin;  // char offset inside the token surface
    std::size_t length;
};

std::vector<CharRun> hash_runs(const Sentence& s) {
    std::vector<CharRun> runs;
    for (std::size_t t = 0; t < s.tokens.size(); ++t) {
        const std::string& surf = s.tokens[t].surface;
        std::size_t i = 0;
        while (i < surf.size()) {
            if (surf[i] == '#') {
                std::size_t j = i;
                while (j < surf.size() && surf[j] == '#')
                    ++j;
                runs.push_back({t, i, j - i});
                i = j;
            } else {
                ++i;
            }
        }
    }
    return runs;
}

std::vector<std::string> digit_runs(const std::string& text) {
    std::vector<std::string> runs;
    std::size_t i = 0;
    while (i < text.size()) {
        if (std::isdigit(static_cast<unsigned char>(text[i]))) {
            std::size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])))
                ++j;
            runs.push_back(text.substr(i, j - i));
            i = j;
        } else {
            ++i;
        }
    }
    return runs;
}

}  // namespace

std::vector<Sentence> restore_digits(const std::vector<Sentence>& generated,
                                     const std::vector<Sentence>& sources) {
    std::vector<Sentence> out = generated;
    if (sources.empty())
        return out;
    for (Sentence& g : out) {
        std::vector<CharRun> runs = hash_runs(g);
        if (runs.empty())
            continue;
        const std::vector<std::string> gw = surfaces(g);
        std::size_t best = 0;
        int best_dist = -1;
        for (std::size_t s = 0; s < sources.size(); ++s) {
            const int d = word_edit_distance(gw, surfaces(sources[s]));
            if (best_dist < 0 || d < best_dist) {
                best_dist = d;
                best = s;
            }
        }
        const std::vector<std::string> digits = digit_runs(sources[best].original_text);
        // Substitute runs right-to-left so earlier offsets stay valid.
        const std::size_t paired = std::min(runs.size(), digits.size());
        for (std::size_t k = paired; k-- > 0;) {
            const CharRun& r = runs[k];
            Token& tok = g.tokens[r.token];
            tok.surface.replace(r.begin, r.length, digits[k]);
        }
        for (Token& tok : g.tokens) {
            tok.is_digit_mask = !tok.surface.empty() &&
                                std::all_of(tok.surface.begin(), tok.surface.end(),
                                            [](char c) { return c == '#'; }) &&
                                tok.is_digit_mask;
        }
    }
    return out;
}

RawCorpus ingest_corpus(const fs::path& root) {
    RawCorpus corpus;
    for (const char* split : {"train", "dev", "test"}) {
        const fs::path split_dir = root / split;
        if (!fs::is_directory(split_dir))
            throw ConfigError("missing split directory: " + split_dir.string());
        std::vector<RawDocumentSet> sets;
        std::vector<fs::path> set_dirs;
        for (const auto& entry : fs::directory_iterator(split_dir))
            if (entry.is_directory())
                set_dirs.push_back(entry.path());
        std::sort(set_dirs.begin(), set_dirs.end());
        for (const fs::path& dir : set_dirs) {
            RawDocumentSet set;
            set.id = dir.filename().string();
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(dir))
                if (entry.is_regular_file())
                    files.push_back(entry.path());
            std::sort(files.begin(), files.end());
            for (const fs::path& f : files) {
                const std::string name = f.filename().string();
                if (ends_with(name, ".doc.txt")) {
                    set.documents.emplace_back(name.substr(0, name.size() - 8), read_file(f));
                } else if (ends_with(name, ".ref.txt")) {
                    set.references.push_back(read_file(f));
                }
            }
            if (set.documents.empty())
                throw DataError("document set '" + set.id + "' in split '" + split +
                                "' contains no documents");
            std::sort(set.documents.begin(), set.documents.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            sets.push_back(std::move(set));
        }
        corpus.splits[split] = std::move(sets);
    }
    return corpus;
}

Corpus preprocess_corpus(const RawCorpus& raw) {
    Corpus corpus;
    for (const auto& [split, sets] : raw.splits) {
        std::vector<DocumentSet> out_sets;
        out_sets.reserve(sets.size());
        for (const RawDocumentSet& rs : sets) {
            DocumentSet ds;
            ds.id = rs.id;
            for (const auto& [name, text] : rs.documents) {
                Document doc;
                doc.name = name;
                doc.sentences = preprocess_text(text);
                if (doc.sentences.empty())
                    throw DataError("document '" + name + "' in set '" + rs.id +
                                    "' has no sentences after preprocessing");
                ds.documents.push_back(std::move(doc));
            }
            for (const std::string& ref : rs.references) {
                std::vector<Sentence> sents = preprocess_text(ref);
                if (!sents.empty())
                    ds.references.push_back(std::move(sents));
            }
            out_sets.push_back(std::move(ds));
        }
        corpus.splits[split] = std::move(out_sets);
    }
    return corpus;
}

Vocabulary::Vocabulary() {
    for (const char* s : {kUnk, kEos, kEod, kPad})
        add(s);
}

int Vocabulary::add(const std::string& token) {
    auto it = token_to_id_.find(token);
    if (it != token_to_id_.end())
        return it->second;
    const int id = static_cast<int>(id_to_token_.size());
    token_to_id_.emplace(token, id);
    id_to_token_.push_back(token);
    return id;
}

int Vocabulary::encode(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? unk_id() : it->second;
}

const std::string& Vocabulary::decode(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
        throw ContractViolation("Vocabulary::decode: id " + std::to_string(id) + " out of range");
    return id_to_token_[static_cast<std::size_t>(id)];
}

Vocabulary build_vocabulary(const std::map<std::string, std::size_t>& freq, std::size_t max_size,
                            std::size_t min_freq) {
    if (max_size < 4)
        throw ContractViolation("build_vocabulary: max_size must be >= 4");
    if (min_freq < 1)
        throw ContractViolation("build_vocabulary: min_freq must be >= 1");
    std::vector<std::pair<std::string, std::size_t>> items;
    for (const auto& [tok, count] : freq)
        if (count >= min_freq)
            items.emplace_back(tok, count);
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second)
            return a.second > b.second;
        return a.first < b.first;
    });
    Vocabulary vocab;
    for (const auto& [tok, count] : items) {
        (void)count;
        if (vocab.size() >= max_size)
            break;
        if (!vocab.contains(tok))
            vocab.add(tok);
    }
    return vocab;
}

Vocabulary build_vocabulary(const Corpus& corpus, std::size_t max_size, std::size_t min_freq) {
    std::map<std::string, std::size_t> freq;
    auto count_sentences = [&freq](const std::vector<Sentence>& sents) {
        for (const Sentence& s : sents)
            for (const Token& t : s.tokens)
                ++freq[t.surface];
    };
    auto it = corpus.splits.find("train");
    if (it != corpus.splits.end()) {
        for (const DocumentSet& set : it->second) {
            for (const Document& doc : set.documents)
                count_sentences(doc.sentences);
            for (const auto& ref : set.references)
                count_sentences(ref);
        }
    }
    return build_vocabulary(freq, max_size, min_freq);
}

std::vector<std::string> surfaces(const Sentence& s) {
    std::vector<std::string> out;
    out.reserve(s.tokens.size());
    for (const Token& t : s.tokens)
        out.push_back(t.surface);
    return out;
}

std::vector<int> encode_sentence_ids(const Vocabulary& v, const Sentence& s) {
    std::vector<int> ids;
    ids.reserve(s.tokens.size());
    for (const Token& t : s.tokens)
        ids.push_back(v.encode(t.surface));
    return ids;
}

}  // namespace mdsum
