#pragma once

#include <vector>

#include "mdsum/numerics.hpp"

namespace mdsum {

struct AttentionConfig {
    enum class Mode { raw, concentrated };
    Mode mode = Mode::concentrated;
    int top_k = 15;
    double damping = 0.9;
};

/// Rank scores of the previous decoding step, carried across one generation
/// episode; zero before the first step.
struct GraphAttentionState {
    Vector prev_scores;
    int step = 0;

    explicit GraphAttentionState(std::size_t n_sentences) : prev_scores(n_sentences) {}
};

struct AttentionWeights {
    Vector alpha;  // non-negative, sums to 1
};

/// Affinity over n sentence nodes plus the query node (index n). Entries are
/// max(h_i^T P h_j, 0) + epsilon so every column sum is positive.
Matrix build_affinity(const std::vector<Vector>& sentence_states, const Vector& query_state,
                      const Matrix& p);

/// Closed-form topic-sensitive PageRank: solves
/// (I - lambda*W*D^-1) f = (1-lambda) y with y selecting the query node, and
/// returns the n sentence entries of the solution.
Vector rank_scores(const Matrix& w, double lambda);

/// Distraction normalization over positive score increments; falls back to
/// uniform when no score increased. Updates the episode state.
AttentionWeights distraction_weights(const Vector& f, GraphAttentionState& state);

/// Keeps only the K sentences with the largest rank scores (ties broken by
/// lower index) and renormalizes the surviving weights.
AttentionWeights concentrate_topk(const Vector& f, const AttentionWeights& weights, int k);

/// c_j = sum_i alpha_i h_i.
Vector context_vector(const AttentionWeights& weights, const std::vector<Vector>& sentence_states);

// ---- composite step with gradient support ---------------------------------

struct GraphAttentionCache {
    Matrix scores;          // raw bilinear scores, (n+1)x(n+1)
    Matrix w;               // clamped affinity
    Vector colsum;          // column sums of w
    Vector f_full;          // solution over n+1 nodes
    Vector f;               // sentence entries
    Vector prev_in;         // prev_scores at entry (f^{j-1})
    Vector diffs;           // clamped increments max(f - prev, 0)
    double diff_sum = 0.0;
    bool distraction_fallback = false;
    AttentionWeights alpha_pre;   // after distraction, before concentration
    AttentionWeights alpha;       // final weights
    std::vector<char> topk_mask;  // empty when concentration did not apply
    bool topk_fallback = false;
    Vector context;
    double lambda = 0.0;
};

/// One full attention step: affinity, rank, distraction, optional top-K,
/// context vector. Composes exactly the free functions above.
GraphAttentionCache graph_attention_step(const std::vector<Vector>& sentence_states,
                                         const Vector& query_state, const Matrix& p,
                                         const AttentionConfig& cfg, GraphAttentionState& state);

/// Reverse pass. d_context is the gradient into the context vector;
/// df_from_next the gradient into f^j coming from the next step's
/// distraction. Emits gradients for P, the sentence states, the query state,
/// and f^{j-1} (to be handed to the previous step as df_from_next). The
/// linear solve is differentiated with the transposed system.
void graph_attention_backward(const GraphAttentionCache& cache,
                              const std::vector<Vector>& sentence_states,
                              const Vector& query_state, const Matrix& p,
                              const Vector& d_context, const Vector& df_from_next, Matrix& d_p,
                              std::vector<Vector>& d_sentence_states, Vector& d_query_state,
                              Vector& d_prev_scores);

}  // namespace mdsum
