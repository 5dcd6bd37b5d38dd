#include "mdsum/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mdsum/metrics.hpp"
#include "mdsum/parallel.hpp"

namespace mdsum {

namespace {

struct WordPosCache {
    LstmStepCache lstm;
    Vector probs;  // softmax over the vocabulary at this position
    int input = 0;
    int target = 0;
};

struct SentenceStepCache {
    LstmStepCache sent;
    GraphAttentionCache attn;
    std::vector<WordPosCache> words;
};

Vector concat(const Vector& a, const Vector& b) {
    Vector out(a.size() + b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = a[i];
    for (std::size_t i = 0; i < b.size(); ++i)
        out[a.size() + i] = b[i];
    return out;
}

}  // namespace

TfLossResult teacher_forced_loss(Model& m,
                                 const std::vector<std::vector<std::vector<int>>>& docs_tokens,
                                 const std::vector<std::vector<int>>& reference_sentences,
                                 const AttentionConfig& attn_cfg, DocsetWeightMode docset_mode,
                                 int eos_id, int eod_id, double grad_scale,
                                 bool accumulate_grads) {
    if (reference_sentences.empty())
        throw ContractViolation("teacher_forced_loss: empty reference summary");
    for (const auto& s : reference_sentences)
        if (s.empty())
            throw ContractViolation("teacher_forced_loss: empty reference sentence");
    if (docs_tokens.empty())
        throw ContractViolation("teacher_forced_loss: empty document set");

    const std::size_t hidden = m.dims().hidden;
    const std::size_t embed = m.dims().embed;
    const std::size_t vocab = m.dims().vocab;

    // ---- forward ----------------------------------------------------------
    std::vector<DocumentEncodeCache> doc_caches;
    std::vector<Vector> states;  // h_i across all documents, in document order
    std::vector<Vector> doc_vectors;
    for (const auto& doc : docs_tokens) {
        doc_caches.push_back(encode_document(doc, m, eos_id, eod_id));
        for (const Vector& h : doc_caches.back().out.sentence_states)
            states.push_back(h);
        doc_vectors.push_back(doc_caches.back().out.doc_vector);
    }
    const DocSetEncoding set_enc = encode_docset(doc_vectors, m.docset_q, docset_mode);

    const std::vector<int> eod_only{eod_id};
    const SentenceEncoding x0_run = encode_sentence(eod_only, m, eos_id);
    std::vector<SentenceEncoding> reenc;  // gold sentence j re-encoded, consumed at step j+1
    reenc.reserve(reference_sentences.size());
    for (const auto& sent : reference_sentences)
        reenc.push_back(encode_sentence(sent, m, eos_id));

    const LstmCell sent_cell = m.sentence_decoder_cell();
    const LstmCell word_cell = m.word_decoder_cell();
    const std::size_t t_count = reference_sentences.size();  // steps 0..t_count (terminal <eod>)

    GraphAttentionState attn_state(states.size());
    std::vector<SentenceStepCache> steps(t_count + 1);
    Vector h_sent = set_enc.docset_vector;
    Vector c_sent(hidden);
    double total_nll = 0.0;
    int total_tokens = 0;

    for (std::size_t j = 0; j <= t_count; ++j) {
        const Vector& x_in = j == 0 ? x0_run.x : reenc[j - 1].x;
        steps[j].sent = sent_cell.step(x_in, h_sent, c_sent);
        h_sent = steps[j].sent.h;
        c_sent = steps[j].sent.c;
        steps[j].attn =
            graph_attention_step(states, h_sent, m.affinity_p.value, attn_cfg, attn_state);

        std::vector<int> targets;
        if (j < t_count) {
            targets = reference_sentences[j];
            targets.push_back(eos_id);
        } else {
            targets = {eod_id};
        }
        Vector h_word = h_sent;
        Vector c_word(hidden);
        steps[j].words.reserve(targets.size());
        for (std::size_t k = 0; k < targets.size(); ++k) {
            WordPosCache pos;
            pos.input = k == 0 ? eos_id : targets[k - 1];
            pos.target = targets[k];
            pos.lstm = word_cell.step(m.embed(pos.input), h_word, c_word);
            h_word = pos.lstm.h;
            c_word = pos.lstm.c;

            Vector logits(vocab);
            const Vector proj_in = concat(h_word, steps[j].attn.context);
            for (std::size_t r = 0; r < vocab; ++r) {
                const double* row = m.proj_w.value.row(r);
                double z = m.proj_b.value(r, 0);
                for (std::size_t i = 0; i < proj_in.size(); ++i)
                    z += row[i] * proj_in[i];
                logits[r] = z;
            }
            const double lse = log_sum_exp(logits);
            total_nll += lse - logits[static_cast<std::size_t>(pos.target)];
            ++total_tokens;
            pos.probs = Vector(vocab);
            for (std::size_t r = 0; r < vocab; ++r)
                pos.probs[r] = std::exp(logits[r] - lse);
            steps[j].words.push_back(std::move(pos));
        }
    }

    TfLossResult result;
    result.token_count = total_tokens;
    result.loss = total_nll / static_cast<double>(total_tokens);
    if (!accumulate_grads)
        return result;

    // ---- backward ---------------------------------------------------------
    const double scale = grad_scale / static_cast<double>(total_tokens);
    std::vector<Vector> d_states(states.size(), Vector(hidden));
    std::vector<Vector> d_x_input(t_count + 1, Vector(hidden));
    Vector dh_sent_next(hidden);  // into h'_j from step j+1's recurrence
    Vector dc_sent_next(hidden);
    Vector df_next(states.size());  // into f^j from step j+1's distraction

    for (std::size_t j = t_count + 1; j-- > 0;) {
        SentenceStepCache& step = steps[j];

        // word decoder and projection, walked in reverse
        Vector dh_word(hidden);
        Vector dc_word(hidden);
        Vector d_context(hidden);
        for (std::size_t k = step.words.size(); k-- > 0;) {
            WordPosCache& pos = step.words[k];
            const Vector proj_in = concat(pos.lstm.h, step.attn.context);
            Vector dz(vocab);
            for (std::size_t r = 0; r < vocab; ++r)
                dz[r] = scale * (pos.probs[r] -
                                 (static_cast<int>(r) == pos.target ? 1.0 : 0.0));
            for (std::size_t r = 0; r < vocab; ++r) {
                const double dzr = dz[r];
                if (dzr == 0.0)
                    continue;
                double* grow = m.proj_w.grad.row(r);
                const double* wrow = m.proj_w.value.row(r);
                for (std::size_t i = 0; i < proj_in.size(); ++i)
                    grow[i] += dzr * proj_in[i];
                m.proj_b.grad(r, 0) += dzr;
                for (std::size_t i = 0; i < hidden; ++i)
                    dh_word[i] += dzr * wrow[i];
                for (std::size_t i = 0; i < hidden; ++i)
                    d_context[i] += dzr * wrow[hidden + i];
            }
            Vector dx(embed);
            Vector dh_prev(hidden);
            Vector dc_prev(hidden);
            word_cell.backward(pos.lstm, dh_word, dc_word, m.dec_word_w.grad, m.dec_word_b.grad,
                               dx, dh_prev, dc_prev);
            double* erow = m.embedding.grad.row(static_cast<std::size_t>(pos.input));
            for (std::size_t i = 0; i < embed; ++i)
                erow[i] += dx[i];
            dh_word = std::move(dh_prev);
            dc_word = std::move(dc_prev);
        }

        // h'_j feeds the word decoder's initial hidden state, the attention
        // query, and the next sentence step
        Vector dh_sent = std::move(dh_word);
        axpy(1.0, dh_sent_next, dh_sent);

        Vector d_prev_scores(states.size());
        graph_attention_backward(step.attn, states, step.sent.h, m.affinity_p.value, d_context,
                                 df_next, m.affinity_p.grad, d_states, dh_sent, d_prev_scores);
        df_next = std::move(d_prev_scores);

        Vector dh_prev(hidden);
        Vector dc_prev(hidden);
        sent_cell.backward(step.sent, dh_sent, dc_sent_next, m.dec_sent_w.grad,
                           m.dec_sent_b.grad, d_x_input[j], dh_prev, dc_prev);
        dh_sent_next = std::move(dh_prev);
        dc_sent_next = std::move(dc_prev);
    }

    // initial sentence-decoder hidden state was the docset vector
    const Vector& d_dtilde = dh_sent_next;
    std::vector<Vector> d_doc_vectors(doc_vectors.size(), Vector(hidden));
    encode_docset_backward(set_enc, m.docset_q, d_dtilde, m.docset_q.grad, d_doc_vectors);

    std::size_t state_offset = 0;
    for (std::size_t d = 0; d < doc_caches.size(); ++d) {
        const std::size_t n_d = doc_caches[d].out.sentence_states.size();
        std::vector<Vector> slice(d_states.begin() + state_offset,
                                  d_states.begin() + state_offset + n_d);
        state_offset += n_d;
        encode_document_backward(doc_caches[d], m, slice, d_doc_vectors[d], m.embedding.grad,
                                 m.enc_word_w.grad, m.enc_word_b.grad, m.enc_sent_w.grad,
                                 m.enc_sent_b.grad);
    }

    encode_sentence_backward(x0_run, m, d_x_input[0], nullptr, m.embedding.grad,
                             m.enc_word_w.grad, m.enc_word_b.grad);
    for (std::size_t i = 0; i < reenc.size(); ++i)
        encode_sentence_backward(reenc[i], m, d_x_input[i + 1], nullptr, m.embedding.grad,
                                 m.enc_word_w.grad, m.enc_word_b.grad);
    return result;
}

TfLossResult teacher_forced_loss(Model& m, const Vocabulary& vocab, const DocumentSet& set,
                                 const std::vector<Sentence>& reference,
                                 const AttentionConfig& attn_cfg, DocsetWeightMode docset_mode,
                                 double grad_scale, bool accumulate_grads) {
    std::vector<std::vector<int>> ref_ids;
    ref_ids.reserve(reference.size());
    for (const Sentence& s : reference)
        ref_ids.push_back(encode_sentence_ids(vocab, s));
    return teacher_forced_loss(m, docset_token_ids(vocab, set), ref_ids, attn_cfg, docset_mode,
                               vocab.eos_id(), vocab.eod_id(), grad_scale, accumulate_grads);
}

EarlyStopper::EarlyStopper(int patience, bool higher_better)
    : patience_(patience), higher_better_(higher_better) {
    if (patience < 1)
        throw ContractViolation("EarlyStopper: patience must be >= 1");
}

bool EarlyStopper::record(double value) {
    const int index = best_index_ < 0 ? 0 : best_index_ + since_best_ + 1;
    const bool better = best_index_ < 0 ||
                        (higher_better_ ? value > best_value_ : value < best_value_);
    if (better) {
        best_value_ = value;
        best_index_ = index;
        since_best_ = 0;
    } else {
        ++since_best_;
    }
    return since_best_ >= patience_;
}

namespace {

struct TrainExample {
    std::vector<std::vector<std::vector<int>>> docs;
    std::vector<std::vector<int>> reference;
    const DocumentSet* set = nullptr;
};

std::vector<TrainExample> collect_examples(const Vocabulary& vocab,
                                           const std::vector<DocumentSet>& sets) {
    std::vector<TrainExample> out;
    for (const DocumentSet& set : sets) {
        const auto docs = docset_token_ids(vocab, set);
        for (const auto& ref : set.references) {
            TrainExample ex;
            ex.docs = docs;
            ex.set = &set;
            for (const Sentence& s : ref)
                ex.reference.push_back(encode_sentence_ids(vocab, s));
            out.push_back(std::move(ex));
        }
    }
    return out;
}

std::vector<Matrix> snapshot_values(Model& m) {
    std::vector<Matrix> out;
    for (Parameter* p : m.parameters())
        out.push_back(p->value);
    return out;
}

void restore_values(Model& m, const std::vector<Matrix>& snap) {
    auto params = m.parameters();
    for (std::size_t i = 0; i < params.size(); ++i)
        params[i]->value = snap[i];
}

double dev_rouge1(Model& m, const Vocabulary& vocab, const std::vector<DocumentSet>& dev_sets,
                  const TrainConfig& cfg) {
    std::vector<double> f1(dev_sets.size(), 0.0);
    parallel_for(dev_sets.size(), cfg.workers, [&](std::size_t i) {
        const DocumentSet& set = dev_sets[i];
        const SummaryResult res =
            summarize_docset(m, vocab, set, cfg.attention, cfg.generation, cfg.docset_mode);
        TokenList cand;
        for (const Sentence& s : res.sentences)
            for (const Token& t : s.tokens)
                cand.push_back(t.surface);
        std::vector<TokenList> refs;
        for (const auto& ref : set.references) {
            TokenList r;
            for (const Sentence& s : ref)
                for (const Token& t : s.tokens)
                    r.push_back(t.surface);
            refs.push_back(std::move(r));
        }
        f1[i] = rouge_n(cand, refs, 1).f1;
    });
    return std::accumulate(f1.begin(), f1.end(), 0.0) / static_cast<double>(f1.size());
}

double dev_loss(Model& m, const Vocabulary& vocab, const std::vector<DocumentSet>& dev_sets,
                const TrainConfig& cfg) {
    double total = 0.0;
    long count = 0;
    for (const DocumentSet& set : dev_sets) {
        for (const auto& ref : set.references) {
            const TfLossResult r = teacher_forced_loss(m, vocab, set, ref, cfg.attention,
                                                       cfg.docset_mode, 1.0, false);
            total += r.loss * r.token_count;
            count += r.token_count;
        }
    }
    return count > 0 ? total / static_cast<double>(count) : 0.0;
}

TrainReport train_loop(Model& m, const Vocabulary& vocab, const Corpus& corpus,
                       const TrainConfig& cfg) {
    cfg.generation.validate();
    std::vector<TrainExample> examples = collect_examples(vocab, corpus.split("train"));
    if (examples.empty())
        throw ConfigError("training split is empty");
    std::vector<DocumentSet> dev_sets;
    if (auto it = corpus.splits.find("dev"); it != corpus.splits.end())
        for (const DocumentSet& s : it->second)
            if (!s.references.empty())
                dev_sets.push_back(s);

    AdamConfig adam_cfg;
    adam_cfg.learning_rate = cfg.learning_rate;
    AdamState adam(adam_cfg);
    std::mt19937_64 rng(cfg.seed);
    const bool higher_better = cfg.metric == TrainConfig::DevMetric::rouge1;
    EarlyStopper stopper(cfg.patience, higher_better);

    TrainReport report;
    std::vector<Matrix> best_snapshot = snapshot_values(m);
    report.best_epoch = 0;

    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);
    auto params = m.parameters();

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        m.zero_grads();
        double loss_sum = 0.0;
        long token_sum = 0;
        int in_batch = 0;
        for (std::size_t idx : order) {
            const TrainExample& ex = examples[idx];
            const TfLossResult r =
                teacher_forced_loss(m, ex.docs, ex.reference, cfg.attention, cfg.docset_mode,
                                    vocab.eos_id(), vocab.eod_id(), 1.0, true);
            loss_sum += r.loss * r.token_count;
            token_sum += r.token_count;
            ++in_batch;
            if (in_batch >= cfg.batch_size) {
                if (in_batch > 1)
                    for (Parameter* p : params) {
                        double* g = p->grad.data();
                        for (std::size_t i = 0; i < p->grad.size(); ++i)
                            g[i] /= static_cast<double>(in_batch);
                    }
                adam.step(params);
                in_batch = 0;
            }
        }
        if (in_batch > 0) {
            if (in_batch > 1)
                for (Parameter* p : params) {
                    double* g = p->grad.data();
                    for (std::size_t i = 0; i < p->grad.size(); ++i)
                        g[i] /= static_cast<double>(in_batch);
                }
            adam.step(params);
        }
        report.epoch_loss.push_back(loss_sum / static_cast<double>(token_sum));
        report.stopping_epoch = epoch;

        if (!dev_sets.empty()) {
            const double metric = cfg.metric == TrainConfig::DevMetric::rouge1
                                      ? dev_rouge1(m, vocab, dev_sets, cfg)
                                      : dev_loss(m, vocab, dev_sets, cfg);
            report.dev_metric.push_back(metric);
            const bool stop = stopper.record(metric);
            if (stopper.best_index() == static_cast<int>(report.dev_metric.size()) - 1) {
                best_snapshot = snapshot_values(m);
                report.best_epoch = epoch;
            }
            if (stop)
                break;
        } else {
            best_snapshot = snapshot_values(m);
            report.best_epoch = epoch;
        }
    }
    restore_values(m, best_snapshot);
    return report;
}

}  // namespace

TrainReport pretrain_sds(Model& m, const Vocabulary& vocab, const Corpus& corpus,
                         const TrainConfig& cfg) {
    cfg.validate();
    for (const DocumentSet& set : corpus.split("train"))
        if (set.documents.size() != 1)
            throw ConfigError("pretrain_sds: set '" + set.id + "' has " +
                              std::to_string(set.documents.size()) +
                              " documents; SDS pre-training expects single-document sets");
    m.set_all_trainable(true);
    return train_loop(m, vocab, corpus, cfg);
}

TrainReport finetune_mds(Model& m, const Vocabulary& vocab, const Corpus& corpus,
                         const TrainConfig& cfg) {
    cfg.validate();
    m.set_finetune_trainable(cfg.tune_projection);
    return train_loop(m, vocab, corpus, cfg);
}

}  // namespace mdsum
