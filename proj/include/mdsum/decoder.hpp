#pragma once

#include <vector>

#include "mdsum/attention.hpp"
#include "mdsum/corpus.hpp"
#include "mdsum/encoder.hpp"
#include "mdsum/model.hpp"

namespace mdsum {

struct GenerationConfig {
    int max_sentences = 10;
    int max_words_per_sentence = 40;
    int word_budget = 100;  // DUC-style token budget for the whole summary
    int beam_width = 1;     // 1 = greedy

    void validate() const {
        if (max_sentences < 1 || max_words_per_sentence < 1 || word_budget < 1 ||
            beam_width < 1)
            throw ContractViolation("GenerationConfig: all limits must be >= 1");
    }
};

struct SummaryResult {
    enum class StopReason { eod, max_sentences, budget };

    std::vector<Sentence> sentences;
    std::vector<std::vector<int>> token_ids;  // per emitted sentence
    std::vector<Vector> attention_traces;     // final alpha per sentence step
    int token_count = 0;
    double log_prob = 0.0;  // sum of generated token log-probabilities
    StopReason stop = StopReason::eod;
};

/// softmax(proj_w [word_state; context] + proj_b); a probability vector over
/// the vocabulary.
Vector project_word_distribution(const Vector& word_state, const Vector& context,
                                 const Matrix& proj_w, const Matrix& proj_b);

/// Generates a summary for a tokenized document set: hierarchical decode with
/// graph attention, greedy or beam word search, stop on <eod> or the
/// configured limits, final truncation to the word budget at a sentence
/// boundary where possible.
SummaryResult generate_summary(const Model& m, const Vocabulary& vocab,
                               const std::vector<std::vector<std::vector<int>>>& docs_tokens,
                               const AttentionConfig& attn_cfg, const GenerationConfig& gen_cfg,
                               DocsetWeightMode docset_mode);

/// Convenience wrapper encoding a preprocessed DocumentSet through the
/// vocabulary first.
SummaryResult summarize_docset(const Model& m, const Vocabulary& vocab, const DocumentSet& set,
                               const AttentionConfig& attn_cfg, const GenerationConfig& gen_cfg,
                               DocsetWeightMode docset_mode);

/// Tokenizes a document set through the vocabulary (documents only).
std::vector<std::vector<std::vector<int>>> docset_token_ids(const Vocabulary& vocab,
                                                            const DocumentSet& set);

}  // namespace mdsum
