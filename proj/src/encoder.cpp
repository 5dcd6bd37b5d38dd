#include "mdsum/encoder.hpp"

#include <cmath>

namespace mdsum {

std::vector<Vector> SentenceEncoding::word_states() const {
    std::vector<Vector> out;
    out.reserve(steps.size());
    for (const LstmStepCache& s : steps)
        out.push_back(s.h);
    return out;
}

SentenceEncoding encode_sentence(std::span<const int> token_ids, const Model& m, int eos_id) {
    const LstmCell cell = m.word_encoder_cell();
    SentenceEncoding enc;
    enc.ids_with_eos.assign(token_ids.begin(), token_ids.end());
    enc.ids_with_eos.push_back(eos_id);

    Vector h(m.dims().hidden);
    Vector c(m.dims().hidden);
    enc.steps.reserve(enc.ids_with_eos.size());
    for (int id : enc.ids_with_eos) {
        enc.steps.push_back(cell.step(m.embed(id), h, c));
        h = enc.steps.back().h;
        c = enc.steps.back().c;
    }
    enc.x = h;
    return enc;
}

void encode_sentence_backward(const SentenceEncoding& enc, const Model& m, const Vector& dx,
                              const std::vector<Vector>* d_word_states, Matrix& d_embedding,
                              Matrix& d_enc_word_w, Matrix& d_enc_word_b) {
    const LstmCell cell = m.word_encoder_cell();
    const std::size_t hidden = m.dims().hidden;
    const std::size_t embed = m.dims().embed;
    Vector dh = dx;
    Vector dc(hidden);
    for (std::size_t k = enc.steps.size(); k-- > 0;) {
        if (d_word_states != nullptr)
            axpy(1.0, (*d_word_states)[k], dh);
        Vector dxk(embed);
        Vector dh_prev(hidden);
        Vector dc_prev(hidden);
        cell.backward(enc.steps[k], dh, dc, d_enc_word_w, d_enc_word_b, dxk, dh_prev, dc_prev);
        double* row = d_embedding.row(static_cast<std::size_t>(enc.ids_with_eos[k]));
        for (std::size_t i = 0; i < embed; ++i)
            row[i] += dxk[i];
        dh = std::move(dh_prev);
        dc = std::move(dc_prev);
    }
}

DocumentEncodeCache encode_document(const std::vector<std::vector<int>>& sentences,
                                    const Model& m, int eos_id, int eod_id) {
    if (sentences.empty())
        throw ContractViolation("encode_document: document has no sentences");
    DocumentEncodeCache cache;
    cache.word_runs.reserve(sentences.size());
    for (const std::vector<int>& sent : sentences)
        cache.word_runs.push_back(encode_sentence(sent, m, eos_id));
    const std::vector<int> eod_only{eod_id};
    cache.eod_run = encode_sentence(eod_only, m, eos_id);

    const LstmCell cell = m.sentence_encoder_cell();
    Vector h(m.dims().hidden);
    Vector c(m.dims().hidden);
    for (const SentenceEncoding& run : cache.word_runs) {
        cache.sent_steps.push_back(cell.step(run.x, h, c));
        h = cache.sent_steps.back().h;
        c = cache.sent_steps.back().c;
        cache.out.sentence_states.push_back(h);
    }
    cache.sent_steps.push_back(cell.step(cache.eod_run.x, h, c));
    cache.out.doc_vector = cache.sent_steps.back().h;
    return cache;
}

void encode_document_backward(const DocumentEncodeCache& cache, const Model& m,
                              const std::vector<Vector>& d_sentence_states,
                              const Vector& d_doc_vector, Matrix& d_embedding,
                              Matrix& d_enc_word_w, Matrix& d_enc_word_b, Matrix& d_enc_sent_w,
                              Matrix& d_enc_sent_b) {
    const std::size_t n = cache.word_runs.size();
    if (d_sentence_states.size() != n)
        throw ContractViolation("encode_document_backward: state gradient count mismatch");
    const LstmCell cell = m.sentence_encoder_cell();
    const std::size_t hidden = m.dims().hidden;

    std::vector<Vector> dx(n + 1, Vector(hidden));
    Vector dh = d_doc_vector;
    Vector dc(hidden);
    for (std::size_t k = n + 1; k-- > 0;) {
        if (k < n)
            axpy(1.0, d_sentence_states[k], dh);
        Vector dh_prev(hidden);
        Vector dc_prev(hidden);
        cell.backward(cache.sent_steps[k], dh, dc, d_enc_sent_w, d_enc_sent_b, dx[k], dh_prev,
                      dc_prev);
        dh = std::move(dh_prev);
        dc = std::move(dc_prev);
    }
    for (std::size_t k = 0; k < n; ++k)
        encode_sentence_backward(cache.word_runs[k], m, dx[k], nullptr, d_embedding,
                                 d_enc_word_w, d_enc_word_b);
    encode_sentence_backward(cache.eod_run, m, dx[n], nullptr, d_embedding, d_enc_word_w,
                             d_enc_word_b);
}

DocSetEncoding encode_docset(const std::vector<Vector>& doc_vectors, const Parameter& q,
                             DocsetWeightMode mode) {
    if (doc_vectors.empty())
        throw ContractViolation("encode_docset: at least one document required");
    const std::size_t h = doc_vectors[0].size();
    for (const Vector& d : doc_vectors)
        if (d.size() != h)
            throw ContractViolation("encode_docset: document vector dims differ");
    if (q.value.rows() != 2 * h || q.value.cols() != 1)
        throw ContractViolation("encode_docset: q must have twice the document vector dim");

    const std::size_t m_count = doc_vectors.size();
    DocSetEncoding enc;
    enc.mode = mode;
    enc.doc_vectors = doc_vectors;
    enc.sum_vector = Vector(h);
    for (const Vector& d : doc_vectors)
        axpy(1.0, d, enc.sum_vector);

    if (mode != DocsetWeightMode::uniform) {
        enc.scores.resize(m_count);
        for (std::size_t m_i = 0; m_i < m_count; ++m_i) {
            double s = 0.0;
            for (std::size_t i = 0; i < h; ++i)
                s += q.value(i, 0) * doc_vectors[m_i][i];
            for (std::size_t i = 0; i < h; ++i)
                s += q.value(h + i, 0) * enc.sum_vector[i];
            enc.scores[m_i] = s;
        }
    }

    enc.weights.assign(m_count, 1.0 / static_cast<double>(m_count));
    switch (mode) {
        case DocsetWeightMode::uniform:
            break;
        case DocsetWeightMode::softmax: {
            Vector sv(m_count);
            for (std::size_t i = 0; i < m_count; ++i)
                sv[i] = enc.scores[i];
            const Vector w = softmax(sv);
            for (std::size_t i = 0; i < m_count; ++i)
                enc.weights[i] = w[i];
            break;
        }
        case DocsetWeightMode::learned: {
            double total = 0.0;
            for (double s : enc.scores)
                total += s;
            if (std::fabs(total) < 1e-8) {
                enc.uniform_fallback = true;
            } else {
                for (std::size_t i = 0; i < m_count; ++i)
                    enc.weights[i] = enc.scores[i] / total;
            }
            break;
        }
    }

    enc.docset_vector = Vector(h);
    for (std::size_t m_i = 0; m_i < m_count; ++m_i)
        axpy(enc.weights[m_i], doc_vectors[m_i], enc.docset_vector);
    return enc;
}

void encode_docset_backward(const DocSetEncoding& enc, const Parameter& q,
                            const Vector& d_docset_vector, Matrix& d_q,
                            std::vector<Vector>& d_doc_vectors) {
    const std::size_t m_count = enc.doc_vectors.size();
    const std::size_t h = enc.docset_vector.size();
    if (d_docset_vector.size() != h)
        throw ContractViolation("encode_docset_backward: gradient size mismatch");
    if (d_doc_vectors.size() != m_count)
        throw ContractViolation("encode_docset_backward: doc gradient count mismatch");

    // d-tilde = sum w_m d_m: the direct term
    for (std::size_t m_i = 0; m_i < m_count; ++m_i)
        axpy(enc.weights[m_i], d_docset_vector, d_doc_vectors[m_i]);

    // gradient into the weights
    std::vector<double> dw(m_count);
    for (std::size_t m_i = 0; m_i < m_count; ++m_i)
        dw[m_i] = dot(d_docset_vector, enc.doc_vectors[m_i]);

    std::vector<double> ds(m_count, 0.0);
    switch (enc.mode) {
        case DocsetWeightMode::uniform:
            return;  // fixed weights carry no gradient
        case DocsetWeightMode::learned: {
            if (enc.uniform_fallback)
                return;
            double total = 0.0;
            for (double s : enc.scores)
                total += s;
            double dw_dot_w = 0.0;
            for (std::size_t i = 0; i < m_count; ++i)
                dw_dot_w += dw[i] * enc.weights[i];
            for (std::size_t i = 0; i < m_count; ++i)
                ds[i] = (dw[i] - dw_dot_w) / total;
            break;
        }
        case DocsetWeightMode::softmax: {
            double dw_dot_w = 0.0;
            for (std::size_t i = 0; i < m_count; ++i)
                dw_dot_w += dw[i] * enc.weights[i];
            for (std::size_t i = 0; i < m_count; ++i)
                ds[i] = enc.weights[i] * (dw[i] - dw_dot_w);
            break;
        }
    }

    // s_m = q1 . d_m + q2 . d_sigma with d_sigma = sum_k d_k
    double ds_total = 0.0;
    for (double d : ds)
        ds_total += d;
    for (std::size_t m_i = 0; m_i < m_count; ++m_i) {
        for (std::size_t i = 0; i < h; ++i) {
            d_q(i, 0) += ds[m_i] * enc.doc_vectors[m_i][i];
            d_q(h + i, 0) += ds[m_i] * enc.sum_vector[i];
        }
    }
    for (std::size_t k = 0; k < m_count; ++k)
        for (std::size_t i = 0; i < h; ++i)
            d_doc_vectors[k][i] += ds[k] * q.value(i, 0) + ds_total * q.value(h + i, 0);
}

}  // namespace mdsum
