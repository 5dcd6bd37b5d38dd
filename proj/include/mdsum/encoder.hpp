#pragma once

#include <span>
#include <vector>

#include "mdsum/model.hpp"

namespace mdsum {

/// Word-encoder run over one sentence: the <eos>-terminated id sequence, the
/// per-step caches, and the sentence vector x (last hidden state).
struct SentenceEncoding {
    std::vector<int> ids_with_eos;
    std::vector<LstmStepCache> steps;
    Vector x;

    std::vector<Vector> word_states() const;
};

/// Hierarchical encoding of one document: sentence vectors fed through the
/// sentence LSTM, closed by the <eod> pseudo-sentence.
struct EncodedDocument {
    std::vector<Vector> sentence_states;  // h_1..h_n, <eod> step excluded
    Vector doc_vector;                    // state after the <eod> pseudo-sentence
};

struct DocumentEncodeCache {
    std::vector<SentenceEncoding> word_runs;
    SentenceEncoding eod_run;
    std::vector<LstmStepCache> sent_steps;  // length n+1, last consumes x_eod
    EncodedDocument out;
};

enum class DocsetWeightMode {
    learned,   // parameterized dot product with the set sum
    softmax,   // softmax over the same scores
    uniform,   // fixed 1/M (the "fixed encoder" ablation)
};

struct DocSetEncoding {
    std::vector<double> weights;      // w_m, sums to 1
    Vector docset_vector;             // d-tilde
    std::vector<Vector> doc_vectors;  // inputs d_m, retained for gradients
    Vector sum_vector;                // d_sigma
    std::vector<double> scores;       // raw s_m (learned/softmax modes)
    DocsetWeightMode mode = DocsetWeightMode::learned;
    bool uniform_fallback = false;    // learned mode with vanishing score sum
};

/// Appends <eos> and runs the word LSTM from zero state; x is the hidden
/// state after <eos>. Token ids outside the vocabulary range throw.
SentenceEncoding encode_sentence(std::span<const int> token_ids, const Model& m, int eos_id);

/// Gradient of one word-encoder run given dx into the sentence vector plus
/// optional gradients into the per-word hidden states.
void encode_sentence_backward(const SentenceEncoding& enc, const Model& m, const Vector& dx,
                              const std::vector<Vector>* d_word_states, Matrix& d_embedding,
                              Matrix& d_enc_word_w, Matrix& d_enc_word_b);

/// Encodes every sentence, then runs the sentence LSTM over x_1..x_n and the
/// <eod> pseudo-sentence. Throws on an empty document.
DocumentEncodeCache encode_document(const std::vector<std::vector<int>>& sentences,
                                    const Model& m, int eos_id, int eod_id);

/// Backward through the sentence LSTM and every word-encoder run.
void encode_document_backward(const DocumentEncodeCache& cache, const Model& m,
                              const std::vector<Vector>& d_sentence_states,
                              const Vector& d_doc_vector, Matrix& d_embedding,
                              Matrix& d_enc_word_w, Matrix& d_enc_word_b, Matrix& d_enc_sent_w,
                              Matrix& d_enc_sent_b);

/// Merges document vectors into one docset vector with weights from the
/// parameterized dot product against the set sum; weights sum to 1 in every
/// mode. A vanishing score sum in learned mode falls back to uniform.
DocSetEncoding encode_docset(const std::vector<Vector>& doc_vectors, const Parameter& q,
                             DocsetWeightMode mode = DocsetWeightMode::learned);

/// Gradients of the docset vector with respect to q and each document vector.
void encode_docset_backward(const DocSetEncoding& enc, const Parameter& q,
                            const Vector& d_docset_vector, Matrix& d_q,
                            std::vector<Vector>& d_doc_vectors);

}  // namespace mdsum
