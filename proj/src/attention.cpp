#include "mdsum/attention.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mdsum {

namespace {

constexpr double kAffinityEpsilon = 1e-6;
constexpr double kDiffSumFloor = 1e-12;

Matrix bilinear_scores(const std::vector<Vector>& states, const Vector& query, const Matrix& p) {
    const std::size_t h = p.rows();
    if (p.cols() != h)
        throw ContractViolation("build_affinity: P must be square");
    for (const Vector& s : states)
        if (s.size() != h)
            throw ContractViolation("build_affinity: state dim mismatch with P");
    if (query.size() != h)
        throw ContractViolation("build_affinity: query dim mismatch with P");

    const std::size_t n = states.size();
    auto node = [&](std::size_t i) -> const Vector& { return i < n ? states[i] : query; };
    // scores(a,b) = node_a^T P node_b, via u_b = P node_b per column
    Matrix scores(n + 1, n + 1);
    for (std::size_t b = 0; b <= n; ++b) {
        const Vector u = matvec(p, node(b));
        for (std::size_t a = 0; a <= n; ++a)
            scores(a, b) = dot(node(a), u);
    }
    return scores;
}

Matrix clamp_affinity(const Matrix& scores) {
    Matrix w(scores.rows(), scores.cols());
    for (std::size_t a = 0; a < scores.rows(); ++a)
        for (std::size_t b = 0; b < scores.cols(); ++b)
            w(a, b) = std::max(scores(a, b), 0.0) + kAffinityEpsilon;
    return w;
}

struct RankSolution {
    Vector f_full;
    Vector colsum;
};

RankSolution rank_scores_full(const Matrix& w, double lambda) {
    if (w.rows() != w.cols())
        throw ContractViolation("rank_scores: affinity matrix must be square");
    if (lambda < 0.0 || lambda >= 1.0)
        throw ContractViolation("rank_scores: damping must lie in [0,1)");
    const std::size_t n_total = w.rows();
    RankSolution sol;
    sol.colsum = Vector(n_total);
    for (std::size_t b = 0; b < n_total; ++b) {
        double s = 0.0;
        for (std::size_t a = 0; a < n_total; ++a)
            s += w(a, b);
        if (s <= 0.0)
            throw ContractViolation("rank_scores: non-positive column sum at " + std::to_string(b));
        sol.colsum[b] = s;
    }
    // A = I - lambda * W D^-1, b = (1-lambda) * y with y one-hot at the query
    Matrix a(n_total, n_total);
    for (std::size_t r = 0; r < n_total; ++r)
        for (std::size_t c = 0; c < n_total; ++c)
            a(r, c) = (r == c ? 1.0 : 0.0) - lambda * w(r, c) / sol.colsum[c];
    Vector rhs(n_total);
    rhs[n_total - 1] = 1.0 - lambda;
    sol.f_full = solve_linear_system(a, rhs);
    return sol;
}

std::vector<char> topk_mask_of(const Vector& f, int k) {
    const std::size_t n = f.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });
    std::vector<char> mask(n, 0);
    for (std::size_t i = 0; i < n && i < static_cast<std::size_t>(k); ++i)
        mask[order[i]] = 1;
    return mask;
}

}  // namespace

Matrix build_affinity(const std::vector<Vector>& sentence_states, const Vector& query_state,
                      const Matrix& p) {
    return clamp_affinity(bilinear_scores(sentence_states, query_state, p));
}

Vector rank_scores(const Matrix& w, double lambda) {
    const RankSolution sol = rank_scores_full(w, lambda);
    const std::size_t n = w.rows() - 1;
    Vector f(n);
    for (std::size_t i = 0; i < n; ++i)
        f[i] = sol.f_full[i];
    return f;
}

AttentionWeights distraction_weights(const Vector& f, GraphAttentionState& state) {
    if (f.size() != state.prev_scores.size())
        throw ContractViolation("distraction_weights: score length mismatch");
    const std::size_t n = f.size();
    AttentionWeights out;
    out.alpha = Vector(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::max(f[i] - state.prev_scores[i], 0.0);
        out.alpha[i] = d;
        total += d;
    }
    if (total <= kDiffSumFloor) {
        out.alpha.fill(n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
    } else {
        for (std::size_t i = 0; i < n; ++i)
            out.alpha[i] /= total;
    }
    state.prev_scores = f;
    ++state.step;
    return out;
}

AttentionWeights concentrate_topk(const Vector& f, const AttentionWeights& weights, int k) {
    if (k < 1)
        throw ContractViolation("concentrate_topk: K must be >= 1");
    if (f.size() != weights.alpha.size())
        throw ContractViolation("concentrate_topk: length mismatch");
    const std::size_t n = f.size();
    if (static_cast<std::size_t>(k) >= n)
        return weights;
    const std::vector<char> mask = topk_mask_of(f, k);
    AttentionWeights out;
    out.alpha = Vector(n);
    double kept = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (mask[i])
            kept += weights.alpha[i];
    if (kept <= 0.0) {
        for (std::size_t i = 0; i < n; ++i)
            out.alpha[i] = mask[i] ? 1.0 / static_cast<double>(k) : 0.0;
    } else {
        for (std::size_t i = 0; i < n; ++i)
            out.alpha[i] = mask[i] ? weights.alpha[i] / kept : 0.0;
    }
    return out;
}

Vector context_vector(const AttentionWeights& weights, const std::vector<Vector>& sentence_states) {
    if (weights.alpha.size() != sentence_states.size())
        throw ContractViolation("context_vector: length mismatch");
    if (sentence_states.empty())
        throw ContractViolation("context_vector: no sentence states");
    Vector c(sentence_states[0].size());
    for (std::size_t i = 0; i < sentence_states.size(); ++i)
        axpy(weights.alpha[i], sentence_states[i], c);
    return c;
}

GraphAttentionCache graph_attention_step(const std::vector<Vector>& sentence_states,
                                         const Vector& query_state, const Matrix& p,
                                         const AttentionConfig& cfg, GraphAttentionState& state) {
    GraphAttentionCache cache;
    cache.lambda = cfg.damping;
    cache.prev_in = state.prev_scores;
    cache.scores = bilinear_scores(sentence_states, query_state, p);
    cache.w = clamp_affinity(cache.scores);

    const RankSolution sol = rank_scores_full(cache.w, cfg.damping);
    cache.f_full = sol.f_full;
    cache.colsum = sol.colsum;
    const std::size_t n = sentence_states.size();
    cache.f = Vector(n);
    for (std::size_t i = 0; i < n; ++i)
        cache.f[i] = sol.f_full[i];

    cache.diffs = Vector(n);
    cache.diff_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cache.diffs[i] = std::max(cache.f[i] - cache.prev_in[i], 0.0);
        cache.diff_sum += cache.diffs[i];
    }
    cache.distraction_fallback = cache.diff_sum <= kDiffSumFloor;
    cache.alpha_pre = distraction_weights(cache.f, state);

    if (cfg.mode == AttentionConfig::Mode::concentrated &&
        static_cast<std::size_t>(cfg.top_k) < n) {
        cache.topk_mask = topk_mask_of(cache.f, cfg.top_k);
        double kept = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (cache.topk_mask[i])
                kept += cache.alpha_pre.alpha[i];
        cache.topk_fallback = kept <= 0.0;
        cache.alpha = concentrate_topk(cache.f, cache.alpha_pre, cfg.top_k);
    } else {
        cache.alpha = cache.alpha_pre;
    }
    cache.context = context_vector(cache.alpha, sentence_states);
    return cache;
}

void graph_attention_backward(const GraphAttentionCache& cache,
                              const std::vector<Vector>& sentence_states,
                              const Vector& query_state, const Matrix& p,
                              const Vector& d_context, const Vector& df_from_next, Matrix& d_p,
                              std::vector<Vector>& d_sentence_states, Vector& d_query_state,
                              Vector& d_prev_scores) {
    const std::size_t n = sentence_states.size();
    const std::size_t n_total = n + 1;
    if (d_context.size() != cache.context.size() || df_from_next.size() != n)
        throw ContractViolation("graph_attention_backward: gradient size mismatch");

    // context = sum alpha_i h_i
    Vector d_alpha(n);
    for (std::size_t i = 0; i < n; ++i) {
        d_alpha[i] = dot(d_context, sentence_states[i]);
        axpy(cache.alpha.alpha[i], d_context, d_sentence_states[i]);
    }

    // top-K renormalization (selection itself is locally constant)
    Vector d_alpha_pre(n);
    if (!cache.topk_mask.empty()) {
        if (cache.topk_fallback) {
            // uniform over the top-K set: no gradient into alpha_pre
        } else {
            double kept = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (cache.topk_mask[i])
                    kept += cache.alpha_pre.alpha[i];
            double inner = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                inner += d_alpha[i] * cache.alpha.alpha[i];
            for (std::size_t i = 0; i < n; ++i)
                if (cache.topk_mask[i])
                    d_alpha_pre[i] = (d_alpha[i] - inner) / kept;
        }
    } else {
        d_alpha_pre = d_alpha;
    }

    // distraction: alpha_pre_i = diffs_i / diff_sum, gated by diff > 0
    Vector df = df_from_next;
    if (!cache.distraction_fallback) {
        double inner = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            inner += d_alpha_pre[i] * cache.alpha_pre.alpha[i];
        for (std::size_t i = 0; i < n; ++i) {
            if (cache.diffs[i] > 0.0) {
                const double dd = (d_alpha_pre[i] - inner) / cache.diff_sum;
                df[i] += dd;
                d_prev_scores[i] -= dd;
            }
        }
    }

    // implicit-function rule through the solve: A f = b, A^T z = df_full,
    // dA = -z f^T, with A = I - lambda * W D^-1
    Vector df_full(n_total);
    for (std::size_t i = 0; i < n; ++i)
        df_full[i] = df[i];
    Matrix a_t(n_total, n_total);
    for (std::size_t r = 0; r < n_total; ++r)
        for (std::size_t c = 0; c < n_total; ++c)
            a_t(c, r) = (r == c ? 1.0 : 0.0) - cache.lambda * cache.w(r, c) / cache.colsum[c];
    const Vector z = solve_linear_system(a_t, df_full);

    // dL/dS = lambda * z f^T where S = W D^-1; then through the column
    // normalization: dW(a,b) = (dS(a,b) - sum_r dS(r,b) S(r,b)) / colsum_b
    Matrix dw(n_total, n_total);
    for (std::size_t b = 0; b < n_total; ++b) {
        double dot_col = 0.0;
        for (std::size_t r = 0; r < n_total; ++r) {
            const double ds = cache.lambda * z[r] * cache.f_full[b];
            const double s_rb = cache.w(r, b) / cache.colsum[b];
            dot_col += ds * s_rb;
        }
        for (std::size_t a = 0; a < n_total; ++a) {
            const double ds = cache.lambda * z[a] * cache.f_full[b];
            dw(a, b) = (ds - dot_col) / cache.colsum[b];
        }
    }

    // through the ReLU clamp into the bilinear form
    auto node = [&](std::size_t i) -> const Vector& {
        return i < n ? sentence_states[i] : query_state;
    };
    auto d_node = [&](std::size_t i) -> Vector& {
        return i < n ? d_sentence_states[i] : d_query_state;
    };
    const std::size_t h = p.rows();
    for (std::size_t a = 0; a < n_total; ++a) {
        for (std::size_t b = 0; b < n_total; ++b) {
            if (cache.scores(a, b) <= 0.0)
                continue;
            const double g = dw(a, b);
            if (g == 0.0)
                continue;
            const Vector& na = node(a);
            const Vector& nb = node(b);
            add_outer(d_p, na, nb, g);
            Vector& da = d_node(a);
            Vector& db = d_node(b);
            for (std::size_t r = 0; r < h; ++r) {
                const double* prow = p.row(r);
                double acc = 0.0;
                for (std::size_t c2 = 0; c2 < h; ++c2) {
                    acc += prow[c2] * nb[c2];
                    db[c2] += g * na[r] * prow[c2];
                }
                da[r] += g * acc;
            }
        }
    }
}

}  // namespace mdsum
