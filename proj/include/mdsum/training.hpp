#pragma once

#include <cstdint>
#include <vector>

#include "mdsum/attention.hpp"
#include "mdsum/corpus.hpp"
#include "mdsum/decoder.hpp"
#include "mdsum/encoder.hpp"
#include "mdsum/model.hpp"

namespace mdsum {

struct TrainConfig {
    enum class Mode { pretrain_sds, finetune_mds };
    enum class DevMetric { rouge1, loss };

    Mode mode = Mode::pretrain_sds;
    int epochs = 10;
    int batch_size = 1;
    double learning_rate = 1e-3;
    DevMetric metric = DevMetric::rouge1;
    int patience = 2;
    std::uint64_t seed = 1;
    bool tune_projection = false;  // override for the selective fine-tuning list
    AttentionConfig attention;
    DocsetWeightMode docset_mode = DocsetWeightMode::learned;
    GenerationConfig generation;  // used for dev-set decoding
    int workers = 1;

    void validate() const {
        if (epochs < 1 || batch_size < 1 || patience < 1)
            throw ContractViolation("TrainConfig: epochs, batch_size, patience must be >= 1");
        if (learning_rate <= 0.0)
            throw ContractViolation("TrainConfig: learning rate must be positive");
    }
};

struct TrainReport {
    std::vector<double> epoch_loss;   // token-weighted mean training loss per epoch
    std::vector<double> dev_metric;   // empty when no dev split exists
    int stopping_epoch = 0;           // number of epochs actually run
    int best_epoch = 0;               // 1-based epoch of the restored checkpoint
};

struct TfLossResult {
    double loss = 0.0;  // mean negative log-likelihood per target token
    int token_count = 0;
};

/// Teacher-forced cross-entropy of one (document set, reference) pair.
/// Encodes the documents, decodes the gold sentences with gold inputs, and
/// supervises every position including the per-sentence <eos> and the
/// terminal <eod>. Gradients scaled by grad_scale are accumulated into every
/// parameter's grad (trainability is applied later, by the optimizer).
TfLossResult teacher_forced_loss(Model& m,
                                 const std::vector<std::vector<std::vector<int>>>& docs_tokens,
                                 const std::vector<std::vector<int>>& reference_sentences,
                                 const AttentionConfig& attn_cfg, DocsetWeightMode docset_mode,
                                 int eos_id, int eod_id, double grad_scale = 1.0,
                                 bool accumulate_grads = true);

/// Same, via a preprocessed DocumentSet and one of its references.
TfLossResult teacher_forced_loss(Model& m, const Vocabulary& vocab, const DocumentSet& set,
                                 const std::vector<Sentence>& reference,
                                 const AttentionConfig& attn_cfg, DocsetWeightMode docset_mode,
                                 double grad_scale = 1.0, bool accumulate_grads = true);

/// Trains every parameter on a corpus of single-document sets, with Adam and
/// early stopping on the dev metric; the best parameters are restored into
/// the model before returning.
TrainReport pretrain_sds(Model& m, const Vocabulary& vocab, const Corpus& corpus,
                         const TrainConfig& cfg);

/// Selective fine-tuning: only the sentence-decoder LSTM, the word-decoder
/// LSTM and the docset weight vector q are updated (plus the projection when
/// the override is set); everything else stays bitwise frozen.
TrainReport finetune_mds(Model& m, const Vocabulary& vocab, const Corpus& corpus,
                         const TrainConfig& cfg);

/// Stop-after-no-improvement-for-patience-evaluations rule.
class EarlyStopper {
  public:
    EarlyStopper(int patience, bool higher_better);

    /// Records one evaluation; returns true when training should stop.
    bool record(double value);
    int best_index() const { return best_index_; }  // 0-based, -1 before any record

  private:
    int patience_;
    bool higher_better_;
    int best_index_ = -1;
    double best_value_ = 0.0;
    int since_best_ = 0;
};

}  // namespace mdsum
