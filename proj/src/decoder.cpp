#include "mdsum/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mdsum {

Vector project_word_distribution(const Vector& word_state, const Vector& context,
                                 const Matrix& proj_w, const Matrix& proj_b) {
    if (proj_w.cols() != word_state.size() + context.size())
        throw ContractViolation("project_word_distribution: projection width mismatch");
    if (proj_b.rows() != proj_w.rows() || proj_b.cols() != 1)
        throw ContractViolation("project_word_distribution: bias shape mismatch");
    const std::size_t h = word_state.size();
    Vector logits(proj_w.rows());
    for (std::size_t r = 0; r < proj_w.rows(); ++r) {
        const double* row = proj_w.row(r);
        double z = proj_b(r, 0);
        for (std::size_t i = 0; i < h; ++i)
            z += row[i] * word_state[i];
        for (std::size_t i = 0; i < context.size(); ++i)
            z += row[h + i] * context[i];
        logits[r] = z;
    }
    return softmax(logits);
}

namespace {

struct WordHyp {
    std::vector<int> tokens;
    double log_prob = 0.0;
    Vector h;
    Vector c;
    bool doc_end = false;  // ended by <eod> rather than <eos>
};

struct DecodedSentence {
    std::vector<int> tokens;
    double log_prob = 0.0;
    bool doc_end = false;
};

/// Beam search over the words of one sentence (width 1 is plain greedy: the
/// single hypothesis is extended with the argmax token each step).
DecodedSentence decode_sentence_words(const Model& m, const Vocabulary& vocab,
                                      const Vector& sentence_state, const Vector& context,
                                      int max_words, int beam_width) {
    const LstmCell cell = m.word_decoder_cell();
    const Vector start_embed = m.embed(vocab.eos_id());
    const int pad = vocab.pad_id();
    const int eos = vocab.eos_id();
    const int eod = vocab.eod_id();

    std::vector<WordHyp> live(1);
    live[0].h = sentence_state;
    live[0].c = Vector(m.dims().hidden);

    DecodedSentence best_done;
    double best_done_score = -std::numeric_limits<double>::infinity();
    bool have_done = false;

    for (int step = 0; step < max_words && !live.empty(); ++step) {
        struct Candidate {
            double score;
            std::size_t src;
            int token;
        };
        std::vector<Candidate> candidates;
        std::vector<WordHyp> advanced(live.size());
        for (std::size_t s = 0; s < live.size(); ++s) {
            WordHyp& hyp = live[s];
            const Vector x = hyp.tokens.empty() ? start_embed : m.embed(hyp.tokens.back());
            const LstmStepCache st = cell.step(x, hyp.h, hyp.c);
            advanced[s] = hyp;
            advanced[s].h = st.h;
            advanced[s].c = st.c;
            const Vector probs =
                project_word_distribution(st.h, context, m.proj_w.value, m.proj_b.value);
            for (int t = 0; t < static_cast<int>(probs.size()); ++t) {
                if (t == pad)
                    continue;
                candidates.push_back(
                    {hyp.log_prob + std::log(std::max(probs[t], 1e-300)), s, t});
            }
        }
        // highest score first; ties by lower token id then source order
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const Candidate& a, const Candidate& b) {
                             if (a.score != b.score)
                                 return a.score > b.score;
                             return a.token < b.token;
                         });
        std::vector<WordHyp> next;
        std::size_t taken = 0;
        for (const Candidate& cand : candidates) {
            if (taken >= static_cast<std::size_t>(beam_width))
                break;
            ++taken;
            WordHyp hyp = advanced[cand.src];
            hyp.log_prob = cand.score;
            if (cand.token == eos || cand.token == eod) {
                hyp.doc_end = cand.token == eod;
                if (!have_done || hyp.log_prob > best_done_score) {
                    have_done = true;
                    best_done_score = hyp.log_prob;
                    best_done = {hyp.tokens, hyp.log_prob, hyp.doc_end};
                }
            } else {
                hyp.tokens.push_back(cand.token);
                next.push_back(std::move(hyp));
            }
        }
        live = std::move(next);
    }
    // hypotheses cut off at max_words compete without a terminator
    for (const WordHyp& hyp : live) {
        if (!have_done || hyp.log_prob > best_done_score) {
            have_done = true;
            best_done_score = hyp.log_prob;
            best_done = {hyp.tokens, hyp.log_prob, hyp.doc_end};
        }
    }
    return best_done;
}

Sentence sentence_from_ids(const Vocabulary& vocab, const std::vector<int>& ids) {
    Sentence s;
    for (int id : ids) {
        Token t;
        t.surface = vocab.decode(id);
        t.is_digit_mask = !t.surface.empty() &&
                          std::all_of(t.surface.begin(), t.surface.end(),
                                      [](char c) { return c == '#'; });
        s.tokens.push_back(std::move(t));
    }
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        if (i > 0)
            s.original_text.push_back(' ');
        s.original_text += s.tokens[i].surface;
    }
    return s;
}

}  // namespace

SummaryResult generate_summary(const Model& m, const Vocabulary& vocab,
                               const std::vector<std::vector<std::vector<int>>>& docs_tokens,
                               const AttentionConfig& attn_cfg, const GenerationConfig& gen_cfg,
                               DocsetWeightMode docset_mode) {
    gen_cfg.validate();
    if (docs_tokens.empty())
        throw ContractViolation("generate_summary: empty document set");

    std::vector<Vector> states;
    std::vector<Vector> doc_vectors;
    for (const auto& doc : docs_tokens) {
        DocumentEncodeCache cache = encode_document(doc, m, vocab.eos_id(), vocab.eod_id());
        for (Vector& h : cache.out.sentence_states)
            states.push_back(std::move(h));
        doc_vectors.push_back(std::move(cache.out.doc_vector));
    }
    const DocSetEncoding set_enc = encode_docset(doc_vectors, m.docset_q, docset_mode);

    const LstmCell sent_cell = m.sentence_decoder_cell();
    Vector h_sent = set_enc.docset_vector;
    Vector c_sent(m.dims().hidden);
    const std::vector<int> eod_only{vocab.eod_id()};
    Vector x_prev = encode_sentence(eod_only, m, vocab.eos_id()).x;

    GraphAttentionState attn_state(states.size());
    SummaryResult result;
    result.stop = SummaryResult::StopReason::max_sentences;

    for (int j = 0; j < gen_cfg.max_sentences; ++j) {
        const LstmStepCache st = sent_cell.step(x_prev, h_sent, c_sent);
        h_sent = st.h;
        c_sent = st.c;
        GraphAttentionCache attn =
            graph_attention_step(states, h_sent, m.affinity_p.value, attn_cfg, attn_state);
        result.attention_traces.push_back(attn.alpha.alpha);

        const DecodedSentence decoded =
            decode_sentence_words(m, vocab, h_sent, attn.context,
                                  gen_cfg.max_words_per_sentence, gen_cfg.beam_width);
        result.log_prob += decoded.log_prob;
        if (!decoded.tokens.empty()) {
            result.token_ids.push_back(decoded.tokens);
            result.sentences.push_back(sentence_from_ids(vocab, decoded.tokens));
            result.token_count += static_cast<int>(decoded.tokens.size());
        }
        if (decoded.doc_end) {
            result.stop = SummaryResult::StopReason::eod;
            break;
        }
        if (result.token_count >= gen_cfg.word_budget) {
            result.stop = SummaryResult::StopReason::budget;
            break;
        }
        x_prev = encode_sentence(decoded.tokens, m, vocab.eos_id()).x;
    }

    // truncate to the word budget at a sentence boundary where possible
    if (result.token_count > gen_cfg.word_budget) {
        int cum = 0;
        std::size_t keep = 0;
        for (const auto& ids : result.token_ids) {
            if (cum + static_cast<int>(ids.size()) > gen_cfg.word_budget)
                break;
            cum += static_cast<int>(ids.size());
            ++keep;
        }
        if (keep == 0) {
            result.token_ids[0].resize(static_cast<std::size_t>(gen_cfg.word_budget));
            result.sentences[0] = sentence_from_ids(vocab, result.token_ids[0]);
            cum = gen_cfg.word_budget;
            keep = 1;
        }
        result.token_ids.resize(keep);
        result.sentences.resize(keep);
        result.token_count = cum;
    }
    return result;
}

std::vector<std::vector<std::vector<int>>> docset_token_ids(const Vocabulary& vocab,
                                                            const DocumentSet& set) {
    std::vector<std::vector<std::vector<int>>> out;
    out.reserve(set.documents.size());
    for (const Document& doc : set.documents) {
        std::vector<std::vector<int>> sents;
        sents.reserve(doc.sentences.size());
        for (const Sentence& s : doc.sentences)
            sents.push_back(encode_sentence_ids(vocab, s));
        out.push_back(std::move(sents));
    }
    return out;
}

SummaryResult summarize_docset(const Model& m, const Vocabulary& vocab, const DocumentSet& set,
                               const AttentionConfig& attn_cfg, const GenerationConfig& gen_cfg,
                               DocsetWeightMode docset_mode) {
    return generate_summary(m, vocab, docset_token_ids(vocab, set), attn_cfg, gen_cfg,
                            docset_mode);
}

}  // namespace mdsum
