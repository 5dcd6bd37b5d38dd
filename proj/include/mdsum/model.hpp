#pragma once

#include <cstdint>
#include <vector>

#include "mdsum/lstm.hpp"
#include "mdsum/numerics.hpp"

namespace mdsum {

struct ModelDims {
    std::size_t vocab = 0;
    std::size_t embed = 0;
    std::size_t hidden = 0;
};

/// All named parameter tensors of the summarizer: shared embedding table,
/// word/sentence encoder and decoder LSTMs, the bilinear affinity matrix P,
/// the document-set weight vector q, and the output projection.
class Model {
  public:
    explicit Model(ModelDims dims);

    const ModelDims& dims() const { return dims_; }

    /// Seeded uniform initialization in [-range, range] for every parameter.
    void init_uniform(std::uint64_t seed, double range = 0.08);

    /// Parameters in a stable, checkpoint-defining order.
    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;

    void zero_grads();
    void set_all_trainable(bool trainable);

    /// The selective fine-tuning regime: only the two decoder LSTMs and the
    /// docset weight vector q stay trainable (optionally also the output
    /// projection).
    void set_finetune_trainable(bool tune_projection = false);

    LstmCell word_encoder_cell() const;
    LstmCell sentence_encoder_cell() const;
    LstmCell sentence_decoder_cell() const;
    LstmCell word_decoder_cell() const;

    /// Embedding row for a token id; throws ContractViolation out of range.
    Vector embed(int token_id) const;

    Parameter embedding;
    Parameter enc_word_w, enc_word_b;
    Parameter enc_sent_w, enc_sent_b;
    Parameter dec_sent_w, dec_sent_b;
    Parameter dec_word_w, dec_word_b;
    Parameter affinity_p;  // H x H
    Parameter docset_q;    // 2H x 1
    Parameter proj_w;      // V x 2H
    Parameter proj_b;      // V x 1

  private:
    ModelDims dims_;
};

}  // namespace mdsum
