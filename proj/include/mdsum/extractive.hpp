#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdsum/corpus.hpp"
#include "mdsum/decoder.hpp"
#include "mdsum/numerics.hpp"

namespace mdsum {

/// Flat view over all sentences of a document set with tf-idf vectors
/// (raw term frequency, idf = ln(N/df) over the sentences of the set).
struct SentenceBag {
    struct Entry {
        const Sentence* sentence = nullptr;
        Vector tfidf;
        int doc_index = 0;
        int position = 0;  // 0-based within its document
        std::string doc_name;
    };
    std::vector<Entry> sentences;
    std::vector<std::string> terms;
};

SentenceBag build_sentence_bag(const DocumentSet& set);

double cosine(const Vector& a, const Vector& b);  // 0 for zero vectors

// ---- the five extractive methods -------------------------------------------

/// First sentences in order until the budget; the crossing sentence is
/// truncated to the remaining token budget.
std::vector<Sentence> lead(const Document& doc, int budget);

/// Docset variant: first sentences of the first document by name.
std::vector<Sentence> lead(const DocumentSet& set, int budget);

/// Round-robin over documents: sentence 1 of each document, then sentence 2,
/// and so on, skipping exhausted documents.
std::vector<Sentence> coverage(const DocumentSet& set, int budget);

/// Eigenvector centrality over the binary cosine >= threshold graph, with a
/// cosine > 0.95 redundancy filter during selection.
std::vector<Sentence> lexrank(const DocumentSet& set, int budget, double threshold = 0.1);
Vector lexrank_centrality(const SentenceBag& bag, double threshold = 0.1);

/// Weighted PageRank over shared-word-type edges normalized by log lengths,
/// then greedy selection with a diversity penalty.
std::vector<Sentence> textrank(const DocumentSet& set, int budget);
Vector textrank_centrality(const SentenceBag& bag);

/// Centroid scoring: cosine to the thresholded mean tf-idf vector, plus a
/// 1/position weight, plus cosine to the first sentence of the document.
/// Default threshold is the mean coordinate of the raw centroid.
std::vector<Sentence> centroid_summarize(const DocumentSet& set, int budget,
                                         std::optional<double> tfidf_threshold = {});

/// PageRank over document-level tf-idf cosine edges; ties broken by name.
const Document& select_representative_document(const DocumentSet& set);
Vector document_centrality(const DocumentSet& set);

// ---- pipeline compositions --------------------------------------------------

struct PipelineSpec {
    enum class Kind {
        full_ab,      // the complete model on the whole document set ("ours")
        single_ab,    // representative document, then abstractive
        ex_merge_ab,  // per-document extractive summaries merged, then abstractive
        ab_merge_ab,  // per-document abstractive summaries merged, then abstractive
        ab_multi_ex,  // per-document abstractive summaries, then extractive MDS
        extract_only, // plain extractive baseline on the document set
    };
    enum class Method { lead, coverage, lexrank, textrank, centroid };

    Kind kind = Kind::full_ab;
    Method method = Method::lead;  // meaningful for ex_merge_ab / ab_multi_ex / extract_only
    int intermediate_budget = 100;
    int final_budget = 100;
};

/// Maps the report row labels (ours, single-ab, lead+ab, ..., ab+cov, ab+ab)
/// plus the plain extractive names to a spec. Throws ConfigError on unknown
/// names and on coverage used as a single-document method.
PipelineSpec parse_pipeline_name(const std::string& name);

/// Runs one composition end to end. The model may be null for extract_only
/// specs; any abstractive stage without a model throws ConfigError.
SummaryResult run_pipeline(const PipelineSpec& spec, const DocumentSet& set, const Model* m,
                           const Vocabulary& vocab, const AttentionConfig& attn_cfg,
                           const GenerationConfig& gen_cfg, DocsetWeightMode docset_mode);

}  // namespace mdsum
