#pragma once

#include <vector>

#include "mdsum/numerics.hpp"

namespace mdsum {

/// Activations of one LSTM step, kept for the backward pass.
struct LstmStepCache {
    Vector x;
    Vector h_prev;
    Vector c_prev;
    Vector gate_i;
    Vector gate_f;
    Vector gate_o;
    Vector gate_g;
    Vector c;
    Vector tanh_c;
    Vector h;
};

/// One LSTM cell over a weight matrix of shape 4H x (input+H) and a bias of
/// shape 4H x 1, gate rows ordered [input, forget, output, candidate].
class LstmCell {
  public:
    LstmCell(const Matrix& weight, const Matrix& bias, std::size_t input_dim,
             std::size_t hidden_dim);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t hidden_dim() const { return hidden_dim_; }

    LstmStepCache step(const Vector& x, const Vector& h_prev, const Vector& c_prev) const;

    /// Accumulates parameter gradients into d_weight/d_bias and input
    /// gradients into dx/dh_prev/dc_prev, given gradients dh and dc flowing
    /// into this step's outputs.
    void backward(const LstmStepCache& cache, const Vector& dh, const Vector& dc,
                  Matrix& d_weight, Matrix& d_bias, Vector& dx, Vector& dh_prev,
                  Vector& dc_prev) const;

  private:
    const Matrix* weight_;
    const Matrix* bias_;
    std::size_t input_dim_;
    std::size_t hidden_dim_;
};

}  // namespace mdsum
