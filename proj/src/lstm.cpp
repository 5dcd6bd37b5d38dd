#include "mdsum/lstm.hpp"

#include <cmath>

namespace mdsum {

namespace {
double sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}
}  // namespace

LstmCell::LstmCell(const Matrix& weight, const Matrix& bias, std::size_t input_dim,
                   std::size_t hidden_dim)
    : weight_(&weight), bias_(&bias), input_dim_(input_dim), hidden_dim_(hidden_dim) {
    if (weight.rows() != 4 * hidden_dim || weight.cols() != input_dim + hidden_dim)
        throw ContractViolation("LstmCell: weight shape inconsistent with dims");
    if (bias.rows() != 4 * hidden_dim || bias.cols() != 1)
        throw ContractViolation("LstmCell: bias shape inconsistent with dims");
}

LstmStepCache LstmCell::step(const Vector& x, const Vector& h_prev, const Vector& c_prev) const {
    if (x.size() != input_dim_ || h_prev.size() != hidden_dim_ || c_prev.size() != hidden_dim_)
        throw ContractViolation("LstmCell::step: input size mismatch");
    const std::size_t h = hidden_dim_;
    LstmStepCache cache;
    cache.x = x;
    cache.h_prev = h_prev;
    cache.c_prev = c_prev;
    cache.gate_i = Vector(h);
    cache.gate_f = Vector(h);
    cache.gate_o = Vector(h);
    cache.gate_g = Vector(h);
    cache.c = Vector(h);
    cache.tanh_c = Vector(h);
    cache.h = Vector(h);

    // z = W [x; h_prev] + b, computed one gate row at a time
    for (std::size_t r = 0; r < 4 * h; ++r) {
        const double* w = weight_->row(r);
        double z = (*bias_)(r, 0);
        for (std::size_t c = 0; c < input_dim_; ++c)
            z += w[c] * x[c];
        for (std::size_t c = 0; c < h; ++c)
            z += w[input_dim_ + c] * h_prev[c];
        const std::size_t j = r % h;
        switch (r / h) {
            case 0: cache.gate_i[j] = sigmoid(z); break;
            case 1: cache.gate_f[j] = sigmoid(z); break;
            case 2: cache.gate_o[j] = sigmoid(z); break;
            default: cache.gate_g[j] = std::tanh(z); break;
        }
    }
    for (std::size_t j = 0; j < h; ++j) {
        cache.c[j] = cache.gate_f[j] * c_prev[j] + cache.gate_i[j] * cache.gate_g[j];
        cache.tanh_c[j] = std::tanh(cache.c[j]);
        cache.h[j] = cache.gate_o[j] * cache.tanh_c[j];
    }
    return cache;
}

void LstmCell::backward(const LstmStepCache& cache, const Vector& dh, const Vector& dc,
                        Matrix& d_weight, Matrix& d_bias, Vector& dx, Vector& dh_prev,
                        Vector& dc_prev) const {
    const std::size_t h = hidden_dim_;
    if (dh.size() != h || dc.size() != h)
        throw ContractViolation("LstmCell::backward: gradient size mismatch");
    if (!d_weight.same_shape(*weight_) || !d_bias.same_shape(*bias_))
        throw ContractViolation("LstmCell::backward: gradient shape mismatch");
    if (dx.size() != input_dim_ || dh_prev.size() != h || dc_prev.size() != h)
        throw ContractViolation("LstmCell::backward: output gradient size mismatch");

    Vector dz(4 * h);
    for (std::size_t j = 0; j < h; ++j) {
        const double i = cache.gate_i[j];
        const double f = cache.gate_f[j];
        const double o = cache.gate_o[j];
        const double g = cache.gate_g[j];
        const double tc = cache.tanh_c[j];
        const double dct = dc[j] + dh[j] * o * (1.0 - tc * tc);
        const double di = dct * g;
        const double df = dct * cache.c_prev[j];
        const double do_ = dh[j] * tc;
        const double dg = dct * i;
        dc_prev[j] += dct * f;
        dz[0 * h + j] = di * i * (1.0 - i);
        dz[1 * h + j] = df * f * (1.0 - f);
        dz[2 * h + j] = do_ * o * (1.0 - o);
        dz[3 * h + j] = dg * (1.0 - g * g);
    }
    for (std::size_t r = 0; r < 4 * h; ++r) {
        const double dzr = dz[r];
        double* dw = d_weight.row(r);
        const double* w = weight_->row(r);
        for (std::size_t c = 0; c < input_dim_; ++c) {
            dw[c] += dzr * cache.x[c];
            dx[c] += dzr * w[c];
        }
        for (std::size_t c = 0; c < h; ++c) {
            dw[input_dim_ + c] += dzr * cache.h_prev[c];
            dh_prev[c] += dzr * w[input_dim_ + c];
        }
        d_bias(r, 0) += dzr;
    }
}

}  // namespace mdsum
