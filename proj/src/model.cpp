#include "mdsum/model.hpp"

#include <random>

namespace mdsum {

Model::Model(ModelDims dims)
    : embedding("embedding", dims.vocab, dims.embed),
      enc_word_w("enc_word.w", 4 * dims.hidden, dims.embed + dims.hidden),
      enc_word_b("enc_word.b", 4 * dims.hidden, 1),
      enc_sent_w("enc_sent.w", 4 * dims.hidden, 2 * dims.hidden),
      enc_sent_b("enc_sent.b", 4 * dims.hidden, 1),
      dec_sent_w("dec_sent.w", 4 * dims.hidden, 2 * dims.hidden),
      dec_sent_b("dec_sent.b", 4 * dims.hidden, 1),
      dec_word_w("dec_word.w", 4 * dims.hidden, dims.embed + dims.hidden),
      dec_word_b("dec_word.b", 4 * dims.hidden, 1),
      affinity_p("attention.p", dims.hidden, dims.hidden),
      docset_q("docset.q", 2 * dims.hidden, 1),
      proj_w("proj.w", dims.vocab, 2 * dims.hidden),
      proj_b("proj.b", dims.vocab, 1),
      dims_(dims) {
    if (dims.vocab < 4 || dims.embed == 0 || dims.hidden == 0)
        throw ContractViolation("Model: dims must be positive with vocab >= 4");
}

void Model::init_uniform(std::uint64_t seed, double range) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-range, range);
    for (Parameter* p : parameters()) {
        double* v = p->value.data();
        for (std::size_t i = 0; i < p->value.size(); ++i)
            v[i] = dist(rng);
        p->zero_grad();
    }
}

std::vector<Parameter*> Model::parameters() {
    return {&embedding,  &enc_word_w, &enc_word_b, &enc_sent_w, &enc_sent_b,
            &dec_sent_w, &dec_sent_b, &dec_word_w, &dec_word_b, &affinity_p,
            &docset_q,   &proj_w,     &proj_b};
}

std::vector<const Parameter*> Model::parameters() const {
    auto mutable_list = const_cast<Model*>(this)->parameters();
    return {mutable_list.begin(), mutable_list.end()};
}

void Model::zero_grads() {
    for (Parameter* p : parameters())
        p->zero_grad();
}

void Model::set_all_trainable(bool trainable) {
    for (Parameter* p : parameters())
        p->trainable = trainable;
}

void Model::set_finetune_trainable(bool tune_projection) {
    set_all_trainable(false);
    dec_sent_w.trainable = true;
    dec_sent_b.trainable = true;
    dec_word_w.trainable = true;
    dec_word_b.trainable = true;
    docset_q.trainable = true;
    if (tune_projection) {
        proj_w.trainable = true;
        proj_b.trainable = true;
    }
}

LstmCell Model::word_encoder_cell() const {
    return LstmCell(enc_word_w.value, enc_word_b.value, dims_.embed, dims_.hidden);
}

LstmCell Model::sentence_encoder_cell() const {
    return LstmCell(enc_sent_w.value, enc_sent_b.value, dims_.hidden, dims_.hidden);
}

LstmCell Model::sentence_decoder_cell() const {
    return LstmCell(dec_sent_w.value, dec_sent_b.value, dims_.hidden, dims_.hidden);
}

LstmCell Model::word_decoder_cell() const {
    return LstmCell(dec_word_w.value, dec_word_b.value, dims_.embed, dims_.hidden);
}

Vector Model::embed(int token_id) const {
    if (token_id < 0 || static_cast<std::size_t>(token_id) >= dims_.vocab)
        throw ContractViolation("Model::embed: token id " + std::to_string(token_id) +
                                " out of vocabulary range");
    Vector e(dims_.embed);
    const double* row = embedding.value.row(static_cast<std::size_t>(token_id));
    for (std::size_t i = 0; i < dims_.embed; ++i)
        e[i] = row[i];
    return e;
}

}  // namespace mdsum
