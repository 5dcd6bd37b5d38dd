#include "mdsum/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

namespace mdsum {

namespace {

double f1_of(double p, double r) {
    return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

using UnitCounts = std::map<std::string, int>;

UnitCounts ngram_counts(const TokenList& tokens, int n) {
    UnitCounts counts;
    if (static_cast<int>(tokens.size()) < n)
        return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int k = 1; k < n; ++k) {
            key.push_back('\x1f');
            key += tokens[i + k];
        }
        ++counts[key];
    }
    return counts;
}

// Unigrams and skip-bigrams share one unit space; the leading tag keeps the
// two kinds of unit distinct inside the map.
UnitCounts su4_counts(const TokenList& tokens) {
    UnitCounts counts;
    for (const std::string& t : tokens)
        ++counts["1\x1f" + t];
    for (std::size_t i = 0; i < tokens.size(); ++i)
        for (std::size_t j = i + 1; j <= i + 5 && j < tokens.size(); ++j)
            ++counts["2\x1f" + tokens[i] + '\x1f' + tokens[j]];
    return counts;
}

struct OverlapTotals {
    long overlap = 0;
    long candidate_total = 0;
    long reference_total = 0;
};

OverlapTotals clipped_overlap(const UnitCounts& cand, const UnitCounts& ref) {
    OverlapTotals t;
    for (const auto& [unit, count] : cand)
        t.candidate_total += count;
    for (const auto& [unit, count] : ref)
        t.reference_total += count;
    for (const auto& [unit, count] : cand) {
        auto it = ref.find(unit);
        if (it != ref.end())
            t.overlap += std::min(count, it->second);
    }
    return t;
}

RougeScore score_from(const OverlapTotals& t) {
    RougeScore s;
    s.precision = t.candidate_total > 0 ? static_cast<double>(t.overlap) / t.candidate_total : 0.0;
    s.recall = t.reference_total > 0 ? static_cast<double>(t.overlap) / t.reference_total : 0.0;
    s.f1 = f1_of(s.precision, s.recall);
    return s;
}

RougeScore aggregate_refs(const std::vector<RougeScore>& per_ref, MultiRefAggregate agg) {
    if (per_ref.empty())
        return {};
    if (agg == MultiRefAggregate::max) {
        const RougeScore* best = &per_ref[0];
        for (const RougeScore& s : per_ref)
            if (s.f1 > best->f1)
                best = &s;
        return *best;
    }
    RougeScore mean;
    for (const RougeScore& s : per_ref) {
        mean.precision += s.precision;
        mean.recall += s.recall;
        mean.f1 += s.f1;
    }
    const double n = static_cast<double>(per_ref.size());
    mean.precision /= n;
    mean.recall /= n;
    mean.f1 /= n;
    return mean;
}

template <typename CountFn>
RougeScore rouge_generic(const TokenList& candidate, const std::vector<TokenList>& references,
                         MultiRefAggregate agg, CountFn&& counts_of) {
    if (candidate.empty() || references.empty())
        return {};
    const UnitCounts cand = counts_of(candidate);
    std::vector<RougeScore> per_ref;
    per_ref.reserve(references.size());
    for (const TokenList& ref : references)
        per_ref.push_back(score_from(clipped_overlap(cand, counts_of(ref))));
    return aggregate_refs(per_ref, agg);
}

}  // namespace

RougeScore rouge_n(const TokenList& candidate, const std::vector<TokenList>& references, int n,
                   MultiRefAggregate agg) {
    if (n < 1)
        throw ContractViolation("rouge_n: n must be >= 1");
    return rouge_generic(candidate, references, agg,
                         [n](const TokenList& t) { return ngram_counts(t, n); });
}

RougeScore rouge_su4(const TokenList& candidate, const std::vector<TokenList>& references,
                     MultiRefAggregate agg) {
    return rouge_generic(candidate, references, agg,
                         [](const TokenList& t) { return su4_counts(t); });
}

int word_edit_distance(const TokenList& a, const TokenList& b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<int> prev(m + 1);
    std::vector<int> cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j)
        prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= m; ++j) {
            const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

EditDistanceReport edit_distance_report(const std::vector<TokenList>& summary_sentences,
                                        const std::vector<TokenList>& source_sentences) {
    if (summary_sentences.empty())
        throw MetricError("edit_distance_report: empty summary");
    EditDistanceReport report;
    double ed_sum = 0.0;
    double edw_sum = 0.0;
    for (const TokenList& sent : summary_sentences) {
        if (sent.empty())
            throw MetricError("edit_distance_report: empty summary sentence");
        int best = static_cast<int>(sent.size());  // distance to an empty source list
        for (const TokenList& src : source_sentences)
            best = std::min(best, word_edit_distance(sent, src));
        report.per_sentence.push_back(best);
        ed_sum += best;
        edw_sum += static_cast<double>(best) / static_cast<double>(sent.size());
    }
    const double n = static_cast<double>(summary_sentences.size());
    report.ed = ed_sum / n;
    report.ed_per_word = edw_sum / n;
    return report;
}

void EvalReport::finalize() {
    aggregate = MethodScores{};
    if (per_set.empty())
        return;
    for (const SetScore& s : per_set) {
        aggregate.r1.precision += s.scores.r1.precision;
        aggregate.r1.recall += s.scores.r1.recall;
        aggregate.r1.f1 += s.scores.r1.f1;
        aggregate.r2.precision += s.scores.r2.precision;
        aggregate.r2.recall += s.scores.r2.recall;
        aggregate.r2.f1 += s.scores.r2.f1;
        aggregate.su4.precision += s.scores.su4.precision;
        aggregate.su4.recall += s.scores.su4.recall;
        aggregate.su4.f1 += s.scores.su4.f1;
        aggregate.ed += s.scores.ed;
        aggregate.ed_w += s.scores.ed_w;
    }
    const double n = static_cast<double>(per_set.size());
    for (double* x : {&aggregate.r1.precision, &aggregate.r1.recall, &aggregate.r1.f1,
                      &aggregate.r2.precision, &aggregate.r2.recall, &aggregate.r2.f1,
                      &aggregate.su4.precision, &aggregate.su4.recall, &aggregate.su4.f1,
                      &aggregate.ed, &aggregate.ed_w})
        *x /= n;
}

std::string render_report_table(const std::vector<EvalReport>& reports) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-16s %8s %8s %8s %8s %8s\n", "Method", "R-1", "R-2",
                  "R-SU4", "ED", "ED/w");
    out << line;
    for (const EvalReport& r : reports) {
        std::snprintf(line, sizeof(line), "%-16s %8.2f %8.2f %8.2f %8.2f %8.2f\n",
                      r.method.c_str(), 100.0 * r.aggregate.r1.f1, 100.0 * r.aggregate.r2.f1,
                      100.0 * r.aggregate.su4.f1, r.aggregate.ed, r.aggregate.ed_w);
        out << line;
    }
    return out.str();
}

}  // namespace mdsum
