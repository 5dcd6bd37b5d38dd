#pragma once

#include <string>
#include <vector>

#include "mdsum/errors.hpp"

namespace mdsum {

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

enum class MultiRefAggregate { mean, max };

using TokenList = std::vector<std::string>;

/// Clipped n-gram overlap F1 between a candidate and one or more references.
/// With several references the per-reference scores are aggregated component
/// by component (mean by default). No stemming, no stopword removal.
RougeScore rouge_n(const TokenList& candidate, const std::vector<TokenList>& references, int n,
                   MultiRefAggregate agg = MultiRefAggregate::mean);

/// Unigrams plus skip-bigrams with gap <= 4: ordered pairs (i, j) with
/// i < j <= i + 5 in token positions, counted together as one unit space.
RougeScore rouge_su4(const TokenList& candidate, const std::vector<TokenList>& references,
                     MultiRefAggregate agg = MultiRefAggregate::mean);

/// Levenshtein distance over tokens, unit costs.
int word_edit_distance(const TokenList& a, const TokenList& b);

struct EditDistanceReport {
    double ed = 0.0;        // mean over generated sentences of the min distance to any source
    double ed_per_word = 0.0;  // mean of per-sentence distance divided by sentence length
    std::vector<int> per_sentence;
};

/// Distance of each generated sentence to its closest source sentence.
/// Throws MetricError on an empty summary.
EditDistanceReport edit_distance_report(const std::vector<TokenList>& summary_sentences,
                                        const std::vector<TokenList>& source_sentences);

struct MethodScores {
    RougeScore r1;
    RougeScore r2;
    RougeScore su4;
    double ed = 0.0;
    double ed_w = 0.0;
};

struct SetScore {
    std::string set_id;
    MethodScores scores;
};

/// Per-set and macro-averaged scores for one summarization method.
struct EvalReport {
    std::string method;
    std::vector<SetScore> per_set;
    MethodScores aggregate;  // unweighted mean over document sets

    void finalize();  // fills aggregate from per_set
};

/// Text table in the column order Method, R-1, R-2, R-SU4, ED, ED/w.
/// Rouge values are scaled by 100.
std::string render_report_table(const std::vector<EvalReport>& reports);

}  // namespace mdsum
