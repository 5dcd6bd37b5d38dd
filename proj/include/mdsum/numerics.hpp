#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mdsum/errors.hpp"

namespace mdsum {

/// Dense vector of 64-bit floats.
class Vector {
  public:
    Vector() = default;
    explicit Vector(std::size_t n, double fill = 0.0) : v_(n, fill) {}
    Vector(std::initializer_list<double> init) : v_(init) {}

    std::size_t size() const { return v_.size(); }
    bool empty() const { return v_.empty(); }
    double& operator[](std::size_t i) { return v_[i]; }
    const double& operator[](std::size_t i) const { return v_[i]; }
    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    auto begin() { return v_.begin(); }
    auto end() { return v_.end(); }
    auto begin() const { return v_.begin(); }
    auto end() const { return v_.end(); }

    void fill(double x) { std::fill(v_.begin(), v_.end(), x); }

  private:
    std::vector<double> v_;
};

/// Dense row-major matrix of 64-bit floats.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return v_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
    const double& operator()(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }
    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    double* row(std::size_t r) { return v_.data() + r * cols_; }
    const double* row(std::size_t r) const { return v_.data() + r * cols_; }

    void fill(double x) { std::fill(v_.begin(), v_.end(), x); }
    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> v_;
};

// ---- elementwise / BLAS-1,2 helpers -------------------------------------

double dot(const Vector& a, const Vector& b);
void axpy(double alpha, const Vector& x, Vector& y);  // y += alpha * x
double max_abs_diff(const Vector& a, const Vector& b);
double sum(const Vector& v);
bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

Vector matvec(const Matrix& m, const Vector& x);    // m * x
Vector matvec_t(const Matrix& m, const Vector& x);  // m^T * x
void add_outer(Matrix& m, const Vector& a, const Vector& b, double scale = 1.0);  // m += scale*a*b^T

/// Solves A*x = b by LU decomposition with partial pivoting.
/// Throws SingularMatrixError when a pivot falls below 1e-12 in magnitude.
Vector solve_linear_system(const Matrix& a, const Vector& b);

/// Fixed-point iteration f <- (1-lambda)*y + lambda*M*f starting from f = y,
/// until the max-norm change drops below tol. M must be column-stochastic
/// and y a distribution; both are checked.
Vector pagerank_power_iteration(const Matrix& m, const Vector& y, double lambda, double tol);

/// Max-subtracted softmax; entries positive, sum 1.
Vector softmax(const Vector& v);

/// log(sum(exp(v))) with max subtraction.
double log_sum_exp(const Vector& v);

// ---- parameters and the optimizer ----------------------------------------

/// A named tensor with its gradient accumulator and a frozen/trainable flag.
/// Vectors are stored as n-by-1 matrices.
struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;
    bool trainable = true;

    Parameter() = default;
    Parameter(std::string n, std::size_t rows, std::size_t cols, bool train = true)
        : name(std::move(n)), value(rows, cols), grad(rows, cols), trainable(train) {}

    void zero_grad() { grad.fill(0.0); }
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Per-parameter moment accumulators plus the shared step counter.
class AdamState {
  public:
    explicit AdamState(AdamConfig cfg = {}) : cfg_(cfg) {}

    const AdamConfig& config() const { return cfg_; }
    long step_count() const { return t_; }

    /// Bias-corrected Adam update on every trainable parameter; frozen
    /// parameters are untouched. All gradients are zeroed afterward.
    void step(const std::vector<Parameter*>& params);

  private:
    struct Moments {
        Matrix m;
        Matrix v;
    };
    AdamConfig cfg_;
    long t_ = 0;
    std::unordered_map<std::string, Moments> moments_;
};

// ---- finite-difference gradient checking ---------------------------------

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::size_t coordinates_checked = 0;
    double tolerance = 0.0;
    bool passed() const { return max_rel_error < tolerance; }
};

/// Central differences per coordinate against the analytic gradients already
/// stored in each parameter's grad. loss_fn must re-evaluate the loss from
/// the parameters' current values and must not touch grads.
GradCheckReport finite_diff_gradcheck(const std::function<double()>& loss_fn,
                                      const std::vector<Parameter*>& params, double h,
                                      double tol);

}  // namespace mdsum
