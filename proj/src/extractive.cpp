#include "mdsum/extractive.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace mdsum {

namespace {

constexpr double kPageRankDamping = 0.85;
constexpr double kPageRankTol = 1e-6;
constexpr double kRedundancyCosine = 0.95;
constexpr double kDiversityPenalty = 0.5;

/// Uniform-teleport PageRank on a column-normalized weight matrix; zero
/// columns are treated as dangling (uniform). Scores sum to 1.
Vector weighted_pagerank(const Matrix& weights, double damping, double tol) {
    const std::size_t n = weights.rows();
    Matrix m(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        double colsum = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            colsum += weights(r, c);
        if (colsum <= 0.0) {
            for (std::size_t r = 0; r < n; ++r)
                m(r, c) = 1.0 / static_cast<double>(n);
        } else {
            for (std::size_t r = 0; r < n; ++r)
                m(r, c) = weights(r, c) / colsum;
        }
    }
    Vector y(n, 1.0 / static_cast<double>(n));
    return pagerank_power_iteration(m, y, damping, tol);
}

std::vector<Sentence> assemble(const std::vector<const Sentence*>& picks, int budget) {
    std::vector<Sentence> out;
    int remaining = budget;
    for (const Sentence* s : picks) {
        if (remaining <= 0)
            break;
        Sentence copy = *s;
        if (static_cast<int>(copy.tokens.size()) > remaining)
            copy.tokens.resize(static_cast<std::size_t>(remaining));
        remaining -= static_cast<int>(copy.tokens.size());
        out.push_back(std::move(copy));
    }
    return out;
}

/// Descending-score selection with deterministic (doc, position) tie-breaks.
std::vector<std::size_t> rank_order(const Vector& scores, const SentenceBag& bag) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b])
            return scores[a] > scores[b];
        if (bag.sentences[a].doc_index != bag.sentences[b].doc_index)
            return bag.sentences[a].doc_index < bag.sentences[b].doc_index;
        return bag.sentences[a].position < bag.sentences[b].position;
    });
    return order;
}

int token_count(const std::vector<const Sentence*>& picks) {
    int n = 0;
    for (const Sentence* s : picks)
        n += static_cast<int>(s->tokens.size());
    return n;
}

}  // namespace

SentenceBag build_sentence_bag(const DocumentSet& set) {
    SentenceBag bag;
    std::map<std::string, std::size_t> term_index;
    std::vector<std::map<std::size_t, int>> tf;
    for (std::size_t d = 0; d < set.documents.size(); ++d) {
        const Document& doc = set.documents[d];
        for (std::size_t p = 0; p < doc.sentences.size(); ++p) {
            SentenceBag::Entry entry;
            entry.sentence = &doc.sentences[p];
            entry.doc_index = static_cast<int>(d);
            entry.position = static_cast<int>(p);
            entry.doc_name = doc.name;
            std::map<std::size_t, int> counts;
            for (const Token& t : doc.sentences[p].tokens) {
                auto [it, inserted] = term_index.emplace(t.surface, term_index.size());
                ++counts[it->second];
            }
            tf.push_back(std::move(counts));
            bag.sentences.push_back(std::move(entry));
        }
    }
    bag.terms.resize(term_index.size());
    for (const auto& [term, idx] : term_index)
        bag.terms[idx] = term;

    const std::size_t n = bag.sentences.size();
    std::vector<int> df(term_index.size(), 0);
    for (const auto& counts : tf)
        for (const auto& [term, c] : counts)
            ++df[term];
    for (std::size_t i = 0; i < n; ++i) {
        Vector v(term_index.size());
        for (const auto& [term, c] : tf[i])
            v[term] = static_cast<double>(c) *
                      std::log(static_cast<double>(n) / static_cast<double>(df[term]));
        bag.sentences[i].tfidf = std::move(v);
    }
    return bag;
}

double cosine(const Vector& a, const Vector& b) {
    const double na = std::sqrt(dot(a, a));
    const double nb = std::sqrt(dot(b, b));
    if (na <= 0.0 || nb <= 0.0)
        return 0.0;
    return dot(a, b) / (na * nb);
}

std::vector<Sentence> lead(const Document& doc, int budget) {
    if (budget < 1)
        throw ContractViolation("lead: budget must be >= 1");
    std::vector<const Sentence*> picks;
    for (const Sentence& s : doc.sentences) {
        picks.push_back(&s);
        if (token_count(picks) >= budget)
            break;
    }
    return assemble(picks, budget);
}

std::vector<Sentence> lead(const DocumentSet& set, int budget) {
    if (set.documents.empty())
        throw ContractViolation("lead: empty document set");
    return lead(set.documents.front(), budget);  // documents are sorted by name
}

std::vector<Sentence> coverage(const DocumentSet& set, int budget) {
    if (budget < 1)
        throw ContractViolation("coverage: budget must be >= 1");
    std::vector<const Sentence*> picks;
    bool any = true;
    for (std::size_t round = 0; any && token_count(picks) < budget; ++round) {
        any = false;
        for (const Document& doc : set.documents) {
            if (round < doc.sentences.size()) {
                any = true;
                picks.push_back(&doc.sentences[round]);
                if (token_count(picks) >= budget)
                    break;
            }
        }
    }
    return assemble(picks, budget);
}

Vector lexrank_centrality(const SentenceBag& bag, double threshold) {
    const std::size_t n = bag.sentences.size();
    Matrix adj(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            adj(i, j) = cosine(bag.sentences[i].tfidf, bag.sentences[j].tfidf) >= threshold
                            ? 1.0
                            : 0.0;
    return weighted_pagerank(adj, kPageRankDamping, kPageRankTol);
}

std::vector<Sentence> lexrank(const DocumentSet& set, int budget, double threshold) {
    if (budget < 1)
        throw ContractViolation("lexrank: budget must be >= 1");
    const SentenceBag bag = build_sentence_bag(set);
    const Vector centrality = lexrank_centrality(bag, threshold);
    std::vector<const Sentence*> picks;
    std::vector<std::size_t> chosen;
    for (std::size_t idx : rank_order(centrality, bag)) {
        bool redundant = false;
        for (std::size_t c : chosen)
            if (cosine(bag.sentences[idx].tfidf, bag.sentences[c].tfidf) > kRedundancyCosine) {
                redundant = true;
                break;
            }
        if (redundant)
            continue;
        chosen.push_back(idx);
        picks.push_back(bag.sentences[idx].sentence);
        if (token_count(picks) >= budget)
            break;
    }
    return assemble(picks, budget);
}

namespace {

// shared word types over the sum of log sentence lengths; a vanishing
// denominator (two one-word sentences) means no edge
double textrank_similarity(const SentenceBag::Entry& a, const SentenceBag::Entry& b) {
    std::set<std::string> va;
    for (const Token& t : a.sentence->tokens)
        va.insert(t.surface);
    int shared = 0;
    std::set<std::string> seen;
    for (const Token& t : b.sentence->tokens)
        if (va.count(t.surface) && seen.insert(t.surface).second)
            ++shared;
    const double denom = std::log(static_cast<double>(a.sentence->tokens.size())) +
                         std::log(static_cast<double>(b.sentence->tokens.size()));
    if (denom <= 1e-12)
        return 0.0;
    return static_cast<double>(shared) / denom;
}

Matrix textrank_edges(const SentenceBag& bag) {
    const std::size_t n = bag.sentences.size();
    Matrix w(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = textrank_similarity(bag.sentences[i], bag.sentences[j]);
            w(i, j) = s;
            w(j, i) = s;
        }
    return w;
}

}  // namespace

Vector textrank_centrality(const SentenceBag& bag) {
    return weighted_pagerank(textrank_edges(bag), kPageRankDamping, kPageRankTol);
}

std::vector<Sentence> textrank(const DocumentSet& set, int budget) {
    if (budget < 1)
        throw ContractViolation("textrank: budget must be >= 1");
    const SentenceBag bag = build_sentence_bag(set);
    const std::size_t n = bag.sentences.size();
    const Matrix sim = textrank_edges(bag);
    Vector scores = textrank_centrality(bag);

    std::vector<const Sentence*> picks;
    std::vector<char> used(n, 0);
    while (token_count(picks) < budget) {
        // argmax over remaining, ties by (doc, position)
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i])
                continue;
            if (best == n || scores[i] > scores[best])
                best = i;
        }
        if (best == n)
            break;
        used[best] = 1;
        picks.push_back(bag.sentences[best].sentence);
        for (std::size_t i = 0; i < n; ++i)
            if (!used[i])
                scores[i] -= kDiversityPenalty * sim(i, best) * scores[best];
    }
    return assemble(picks, budget);
}

std::vector<Sentence> centroid_summarize(const DocumentSet& set, int budget,
                                         std::optional<double> tfidf_threshold) {
    if (budget < 1)
        throw ContractViolation("centroid_summarize: budget must be >= 1");
    const SentenceBag bag = build_sentence_bag(set);
    const std::size_t n = bag.sentences.size();
    const std::size_t t = bag.terms.size();

    Vector centroid(t);
    for (const auto& entry : bag.sentences)
        axpy(1.0 / static_cast<double>(n), entry.tfidf, centroid);
    const double threshold =
        tfidf_threshold.value_or(t > 0 ? sum(centroid) / static_cast<double>(t) : 0.0);
    for (std::size_t i = 0; i < t; ++i)
        if (centroid[i] <= threshold)
            centroid[i] = 0.0;

    // first sentence of each document, for the first-sentence feature
    std::vector<const Vector*> first_tfidf(set.documents.size(), nullptr);
    for (const auto& entry : bag.sentences)
        if (entry.position == 0)
            first_tfidf[static_cast<std::size_t>(entry.doc_index)] = &entry.tfidf;

    Vector scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& entry = bag.sentences[i];
        const double centroid_score = cosine(entry.tfidf, centroid);
        const double position_score = 1.0 / static_cast<double>(entry.position + 1);
        const double first_score =
            cosine(entry.tfidf, *first_tfidf[static_cast<std::size_t>(entry.doc_index)]);
        scores[i] = centroid_score + position_score + first_score;
    }

    std::vector<const Sentence*> picks;
    for (std::size_t idx : rank_order(scores, bag)) {
        picks.push_back(bag.sentences[idx].sentence);
        if (token_count(picks) >= budget)
            break;
    }
    return assemble(picks, budget);
}

Vector document_centrality(const DocumentSet& set) {
    const std::size_t m = set.documents.size();
    // document-level tf-idf: raw counts, idf over documents
    std::map<std::string, std::size_t> term_index;
    std::vector<std::map<std::size_t, int>> tf(m);
    for (std::size_t d = 0; d < m; ++d)
        for (const Sentence& s : set.documents[d].sentences)
            for (const Token& t : s.tokens) {
                auto [it, inserted] = term_index.emplace(t.surface, term_index.size());
                ++tf[d][it->second];
            }
    std::vector<int> df(term_index.size(), 0);
    for (const auto& counts : tf)
        for (const auto& [term, c] : counts)
            ++df[term];
    std::vector<Vector> vecs(m, Vector(term_index.size()));
    for (std::size_t d = 0; d < m; ++d)
        for (const auto& [term, c] : tf[d])
            vecs[d][term] = static_cast<double>(c) *
                            std::log(static_cast<double>(m) / static_cast<double>(df[term]));

    Matrix w(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const double c = cosine(vecs[i], vecs[j]);
            w(i, j) = c;
            w(j, i) = c;
        }
    return weighted_pagerank(w, kPageRankDamping, kPageRankTol);
}

const Document& select_representative_document(const DocumentSet& set) {
    if (set.documents.empty())
        throw ContractViolation("select_representative_document: empty document set");
    if (set.documents.size() == 1)
        return set.documents.front();
    const Vector scores = document_centrality(set);
    std::size_t best = 0;
    for (std::size_t i = 1; i < set.documents.size(); ++i)
        if (scores[i] > scores[best])  // ties keep the lower (name-sorted) index
            best = i;
    return set.documents[best];
}

PipelineSpec parse_pipeline_name(const std::string& name) {
    PipelineSpec spec;
    using Kind = PipelineSpec::Kind;
    using Method = PipelineSpec::Method;
    if (name == "ours") {
        spec.kind = Kind::full_ab;
    } else if (name == "single-ab") {
        spec.kind = Kind::single_ab;
    } else if (name == "ab+ab") {
        spec.kind = Kind::ab_merge_ab;
    } else if (name == "lead+ab" || name == "lex+ab" || name == "text+ab" ||
               name == "cent+ab") {
        spec.kind = Kind::ex_merge_ab;
        spec.method = name == "lead+ab"  ? Method::lead
                      : name == "lex+ab" ? Method::lexrank
                      : name == "text+ab" ? Method::textrank
                                          : Method::centroid;
    } else if (name == "ab+lead" || name == "ab+cov" || name == "ab+lex" ||
               name == "ab+text" || name == "ab+cent") {
        spec.kind = Kind::ab_multi_ex;
        spec.method = name == "ab+lead"  ? Method::lead
                      : name == "ab+cov" ? Method::coverage
                      : name == "ab+lex" ? Method::lexrank
                      : name == "ab+text" ? Method::textrank
                                          : Method::centroid;
    } else if (name == "lead" || name == "coverage" || name == "lexrank" ||
               name == "textrank" || name == "centroid") {
        spec.kind = Kind::extract_only;
        spec.method = name == "lead"       ? Method::lead
                      : name == "coverage" ? Method::coverage
                      : name == "lexrank"  ? Method::lexrank
                      : name == "textrank" ? Method::textrank
                                           : Method::centroid;
    } else {
        throw ConfigError("unknown pipeline name: " + name);
    }
    return spec;
}

namespace {

std::vector<Sentence> run_extractive(PipelineSpec::Method method, const DocumentSet& set,
                                     int budget) {
    switch (method) {
        case PipelineSpec::Method::lead: return lead(set, budget);
        case PipelineSpec::Method::coverage: return coverage(set, budget);
        case PipelineSpec::Method::lexrank: return lexrank(set, budget);
        case PipelineSpec::Method::textrank: return textrank(set, budget);
        case PipelineSpec::Method::centroid: return centroid_summarize(set, budget);
    }
    throw ContractViolation("run_extractive: unknown method");
}

std::vector<Sentence> run_extractive_single(PipelineSpec::Method method, const Document& doc,
                                            int budget) {
    if (method == PipelineSpec::Method::coverage)
        throw ConfigError("coverage is a multi-document method and cannot summarize a single "
                          "document stage");
    DocumentSet wrapper;
    wrapper.id = doc.name;
    wrapper.documents.push_back(doc);
    return run_extractive(method, wrapper, budget);
}

DocumentSet single_doc_set(const std::string& id, Document doc) {
    DocumentSet set;
    set.id = id;
    set.documents.push_back(std::move(doc));
    return set;
}

SummaryResult abstractive_on(const DocumentSet& set, const Model& m, const Vocabulary& vocab,
                             const AttentionConfig& attn_cfg, GenerationConfig gen_cfg,
                             int budget, DocsetWeightMode docset_mode) {
    gen_cfg.word_budget = budget;
    return summarize_docset(m, vocab, set, attn_cfg, gen_cfg, docset_mode);
}

SummaryResult extractive_result(std::vector<Sentence> sentences) {
    SummaryResult res;
    for (Sentence& s : sentences) {
        res.token_count += static_cast<int>(s.tokens.size());
        res.sentences.push_back(std::move(s));
    }
    res.stop = SummaryResult::StopReason::budget;
    return res;
}

}  // namespace

SummaryResult run_pipeline(const PipelineSpec& spec, const DocumentSet& set, const Model* m_ptr,
                           const Vocabulary& vocab, const AttentionConfig& attn_cfg,
                           const GenerationConfig& gen_cfg, DocsetWeightMode docset_mode) {
    using Kind = PipelineSpec::Kind;
    if (spec.kind == Kind::extract_only)
        return extractive_result(run_extractive(spec.method, set, spec.final_budget));
    if (m_ptr == nullptr)
        throw ConfigError("pipeline has an abstractive stage but no model was loaded");
    const Model& m = *m_ptr;
    switch (spec.kind) {
        case Kind::full_ab:
            return abstractive_on(set, m, vocab, attn_cfg, gen_cfg, spec.final_budget,
                                  docset_mode);
        case Kind::single_ab: {
            const Document& rep = select_representative_document(set);
            return abstractive_on(single_doc_set(set.id, rep), m, vocab, attn_cfg, gen_cfg,
                                  spec.final_budget, docset_mode);
        }
        case Kind::ex_merge_ab: {
            Document pseudo;
            pseudo.name = set.id + ".merged";
            for (const Document& doc : set.documents)
                for (Sentence& s :
                     run_extractive_single(spec.method, doc, spec.intermediate_budget))
                    pseudo.sentences.push_back(std::move(s));
            return abstractive_on(single_doc_set(set.id, std::move(pseudo)), m, vocab,
                                  attn_cfg, gen_cfg, spec.final_budget, docset_mode);
        }
        case Kind::ab_merge_ab: {
            Document pseudo;
            pseudo.name = set.id + ".merged";
            for (const Document& doc : set.documents) {
                const SummaryResult per_doc =
                    abstractive_on(single_doc_set(doc.name, doc), m, vocab, attn_cfg, gen_cfg,
                                   spec.intermediate_budget, docset_mode);
                for (const Sentence& s : per_doc.sentences)
                    pseudo.sentences.push_back(s);
            }
            if (pseudo.sentences.empty())
                return extractive_result({});
            return abstractive_on(single_doc_set(set.id, std::move(pseudo)), m, vocab,
                                  attn_cfg, gen_cfg, spec.final_budget, docset_mode);
        }
        case Kind::ab_multi_ex: {
            DocumentSet pseudo_set;
            pseudo_set.id = set.id;
            for (const Document& doc : set.documents) {
                const SummaryResult per_doc =
                    abstractive_on(single_doc_set(doc.name, doc), m, vocab, attn_cfg, gen_cfg,
                                   spec.intermediate_budget, docset_mode);
                if (per_doc.sentences.empty())
                    continue;  // an empty pseudo document would be invalid
                Document pseudo;
                pseudo.name = doc.name;
                pseudo.sentences = per_doc.sentences;
                pseudo_set.documents.push_back(std::move(pseudo));
            }
            if (pseudo_set.documents.empty())
                return extractive_result({});
            return extractive_result(
                run_extractive(spec.method, pseudo_set, spec.final_budget));
        }
        case Kind::extract_only:
            break;  // handled above
    }
    throw ContractViolation("run_pipeline: unknown kind");
}

}  // namespace mdsum
