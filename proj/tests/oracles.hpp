// Test-only reference implementations, kept independent of the library code
// paths they are used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "mdsum/numerics.hpp"

namespace oracle {

// ---- step-by-step LSTM recurrence ------------------------------------------
// Plain scalar evaluation of the standard LSTM equations, gate order
// [input, forget, output, candidate] over a stacked weight of shape
// 4H x (in + H) and bias 4H.

struct LstmIo {
    std::vector<double> h;
    std::vector<double> c;
};

inline LstmIo lstm_step(const mdsum::Matrix& w, const mdsum::Matrix& b,
                        const std::vector<double>& x, const LstmIo& prev) {
    const std::size_t hidden = prev.h.size();
    const std::size_t input = x.size();
    auto row_dot = [&](std::size_t r) {
        double z = b(r, 0);
        for (std::size_t i = 0; i < input; ++i)
            z += w(r, i) * x[i];
        for (std::size_t i = 0; i < hidden; ++i)
            z += w(r, input + i) * prev.h[i];
        return z;
    };
    auto sigma = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    LstmIo out;
    out.h.resize(hidden);
    out.c.resize(hidden);
    for (std::size_t j = 0; j < hidden; ++j) {
        const double gi = sigma(row_dot(j));
        const double gf = sigma(row_dot(hidden + j));
        const double go = sigma(row_dot(2 * hidden + j));
        const double gg = std::tanh(row_dot(3 * hidden + j));
        out.c[j] = gf * prev.c[j] + gi * gg;
        out.h[j] = go * std::tanh(out.c[j]);
    }
    return out;
}

// ---- brute-force rouge counting ---------------------------------------------

using Tokens = std::vector<std::string>;

inline std::map<std::vector<std::string>, int> enumerate_ngrams(const Tokens& t, int n) {
    std::map<std::vector<std::string>, int> units;
    for (std::size_t i = 0; i + n <= t.size(); ++i)
        ++units[std::vector<std::string>(t.begin() + i, t.begin() + i + n)];
    return units;
}

inline std::map<std::vector<std::string>, int> enumerate_su4(const Tokens& t) {
    std::map<std::vector<std::string>, int> units;
    for (const std::string& w : t)
        ++units[{"<u>", w}];
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = i + 1; j < t.size() && j <= i + 5; ++j)
            ++units[{"<s>", t[i], t[j]}];
    return units;
}

struct BruteRouge {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

template <typename UnitsFn>
BruteRouge brute_rouge(const Tokens& cand, const Tokens& ref, UnitsFn&& units_of) {
    const auto cu = units_of(cand);
    const auto ru = units_of(ref);
    long overlap = 0;
    long ct = 0;
    long rt = 0;
    for (const auto& [u, c] : cu)
        ct += c;
    for (const auto& [u, c] : ru)
        rt += c;
    for (const auto& [u, c] : cu) {
        auto it = ru.find(u);
        if (it != ru.end())
            overlap += std::min(c, it->second);
    }
    BruteRouge s;
    s.precision = ct > 0 ? static_cast<double>(overlap) / ct : 0.0;
    s.recall = rt > 0 ? static_cast<double>(overlap) / rt : 0.0;
    s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall)
                                        : 0.0;
    return s;
}

// ---- naive recursive edit distance ------------------------------------------

inline int recursive_edit_distance(const Tokens& a, const Tokens& b, std::size_t i = 0,
                                   std::size_t j = 0) {
    if (i == a.size())
        return static_cast<int>(b.size() - j);
    if (j == b.size())
        return static_cast<int>(a.size() - i);
    const int sub = recursive_edit_distance(a, b, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    const int del = recursive_edit_distance(a, b, i + 1, j) + 1;
    const int ins = recursive_edit_distance(a, b, i, j + 1) + 1;
    return std::min({sub, del, ins});
}

}  // namespace oracle
