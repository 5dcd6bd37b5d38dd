#include "mdsum/numerics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdlib>

namespace mdsum {

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size())
        throw ContractViolation("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const Vector& x, Vector& y) {
    if (x.size() != y.size())
        throw ContractViolation("axpy: size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] += alpha * x[i];
}

double max_abs_diff(const Vector& a, const Vector& b) {
    if (a.size() != b.size())
        throw ContractViolation("max_abs_diff: size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

double sum(const Vector& v) {
    double s = 0.0;
    for (double x : v)
        s += x;
    return s;
}

bool all_finite(const Vector& v) {
    for (double x : v)
        if (!std::isfinite(x))
            return false;
    return true;
}

bool all_finite(const Matrix& m) {
    const double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i)
        if (!std::isfinite(p[i]))
            return false;
    return true;
}

Vector matvec(const Matrix& m, const Vector& x) {
    if (m.cols() != x.size())
        throw ContractViolation("matvec: shape mismatch");
    Vector y(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = m.row(r);
        double s = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c)
            s += row[c] * x[c];
        y[r] = s;
    }
    return y;
}

Vector matvec_t(const Matrix& m, const Vector& x) {
    if (m.rows() != x.size())
        throw ContractViolation("matvec_t: shape mismatch");
    Vector y(m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = m.row(r);
        const double xr = x[r];
        for (std::size_t c = 0; c < m.cols(); ++c)
            y[c] += row[c] * xr;
    }
    return y;
}

void add_outer(Matrix& m, const Vector& a, const Vector& b, double scale) {
    if (m.rows() != a.size() || m.cols() != b.size())
        throw ContractViolation("add_outer: shape mismatch");
    for (std::size_t r = 0; r < a.size(); ++r) {
        double* row = m.row(r);
        const double ar = scale * a[r];
        for (std::size_t c = 0; c < b.size(); ++c)
            row[c] += ar * b[c];
    }
}

Vector solve_linear_system(const Matrix& a, const Vector& b) {
    if (a.rows() != a.cols())
        throw ContractViolation("solve_linear_system: matrix not square");
    if (a.rows() != b.size())
        throw ContractViolation("solve_linear_system: rhs size mismatch");
    constexpr double kPivotFloor = 1e-12;
    const std::size_t n = a.rows();

    Matrix lu = a;
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i)
        perm[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        double best = std::fabs(lu(k, k));
        for (std::size_t r = k + 1; r < n; ++r) {
            const double cand = std::fabs(lu(r, k));
            if (cand > best) {
                best = cand;
                pivot = r;
            }
        }
        if (best < kPivotFloor)
            throw SingularMatrixError("solve_linear_system: pivot below 1e-12 at column " +
                                      std::to_string(k));
        if (pivot != k) {
            for (std::size_t c = 0; c < n; ++c)
                std::swap(lu(k, c), lu(pivot, c));
            std::swap(perm[k], perm[pivot]);
        }
        for (std::size_t r = k + 1; r < n; ++r) {
            const double factor = lu(r, k) / lu(k, k);
            lu(r, k) = factor;
            for (std::size_t c = k + 1; c < n; ++c)
                lu(r, c) -= factor * lu(k, c);
        }
    }

    // forward substitution with the permuted rhs, then back substitution
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = b[perm[i]];
    for (std::size_t i = 1; i < n; ++i) {
        double s = x[i];
        for (std::size_t j = 0; j < i; ++j)
            s -= lu(i, j) * x[j];
        x[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t j = ii + 1; j < n; ++j)
            s -= lu(ii, j) * x[j];
        x[ii] = s / lu(ii, ii);
    }
    return x;
}

Vector pagerank_power_iteration(const Matrix& m, const Vector& y, double lambda, double tol) {
    if (m.rows() != m.cols())
        throw ContractViolation("pagerank_power_iteration: matrix not square");
    if (m.rows() != y.size())
        throw ContractViolation("pagerank_power_iteration: vector size mismatch");
    if (lambda < 0.0 || lambda >= 1.0)
        throw ContractViolation("pagerank_power_iteration: lambda outside [0,1)");
    const std::size_t n = m.rows();
    for (std::size_t c = 0; c < n; ++c) {
        double colsum = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            colsum += m(r, c);
        if (std::fabs(colsum - 1.0) > 1e-9)
            throw ContractViolation("pagerank_power_iteration: column " + std::to_string(c) +
                                    " not stochastic");
    }
    double ysum = 0.0;
    for (double e : y) {
        if (e < 0.0)
            throw ContractViolation("pagerank_power_iteration: negative teleport entry");
        ysum += e;
    }
    if (std::fabs(ysum - 1.0) > 1e-9)
        throw ContractViolation("pagerank_power_iteration: teleport vector does not sum to 1");

    Vector f = y;
    constexpr int kMaxIters = 1000000;
    for (int it = 0; it < kMaxIters; ++it) {
        Vector next = matvec(m, f);
        for (std::size_t i = 0; i < n; ++i)
            next[i] = (1.0 - lambda) * y[i] + lambda * next[i];
        const double delta = max_abs_diff(next, f);
        f = next;
        if (delta < tol)
            return f;
    }
    throw NumericalError("pagerank_power_iteration: no convergence");
}

Vector softmax(const Vector& v) {
    if (v.empty())
        return {};
    if (!all_finite(v))
        throw ContractViolation("softmax: non-finite input");
    double mx = v[0];
    for (double x : v)
        mx = std::max(mx, x);
    Vector out(v.size());
    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - mx);
        total += out[i];
    }
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] /= total;
    return out;
}

double log_sum_exp(const Vector& v) {
    double mx = v[0];
    for (double x : v)
        mx = std::max(mx, x);
    double total = 0.0;
    for (double x : v)
        total += std::exp(x - mx);
    return mx + std::log(total);
}

void AdamState::step(const std::vector<Parameter*>& params) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (Parameter* p : params) {
        if (!p->grad.same_shape(p->value))
            throw ContractViolation("adam_step: grad/value shape mismatch on " + p->name);
        if (p->trainable) {
            auto& mo = moments_[p->name];
            if (mo.m.size() == 0) {
                mo.m = Matrix(p->value.rows(), p->value.cols());
                mo.v = Matrix(p->value.rows(), p->value.cols());
            }
            double* val = p->value.data();
            const double* g = p->grad.data();
            double* m1 = mo.m.data();
            double* m2 = mo.v.data();
            for (std::size_t i = 0; i < p->value.size(); ++i) {
                m1[i] = cfg_.beta1 * m1[i] + (1.0 - cfg_.beta1) * g[i];
                m2[i] = cfg_.beta2 * m2[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
                const double mhat = m1[i] / bc1;
                const double vhat = m2[i] / bc2;
                val[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
            }
            assert(all_finite(p->value) && "adam_step produced non-finite parameter");
        }
        p->zero_grad();
    }
}

GradCheckReport finite_diff_gradcheck(const std::function<double()>& loss_fn,
                                      const std::vector<Parameter*>& params, double h,
                                      double tol) {
    if (h <= 0.0)
        throw ContractViolation("finite_diff_gradcheck: step must be positive");
    // Coordinates where both gradients are below this floor are compared
    // absolutely; otherwise finite-difference noise dominates the ratio.
    constexpr double kDenomFloor = 1e-6;
    GradCheckReport report;
    report.tolerance = tol;
    for (Parameter* p : params) {
        double* val = p->value.data();
        const double* g = p->grad.data();
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double saved = val[i];
            val[i] = saved + h;
            const double up = loss_fn();
            val[i] = saved - h;
            const double down = loss_fn();
            val[i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double analytic = g[i];
            const double denom =
                std::max({std::fabs(numeric), std::fabs(analytic), kDenomFloor});
            const double rel = std::fabs(numeric - analytic) / denom;
            ++report.coordinates_checked;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = p->name;
                report.worst_index = i;
                report.worst_analytic = analytic;
                report.worst_numeric = numeric;
            }
        }
    }
    return report;
}

}  // namespace mdsum
