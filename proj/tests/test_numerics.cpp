#include <doctest.h>

#include <cmath>
#include <random>

#include "mdsum/numerics.hpp"

using namespace mdsum;

namespace {

Matrix random_column_stochastic(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(0.05, 1.0);
    Matrix m(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        double colsum = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            m(r, c) = dist(rng);
            colsum += m(r, c);
        }
        for (std::size_t r = 0; r < n; ++r)
            m(r, c) /= colsum;
    }
    return m;
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("solve identity") {
    Matrix a(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        a(i, i) = 1.0;
    const Vector x = solve_linear_system(a, Vector{1.0, 2.0, 3.0});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(2.0));
    CHECK(x[2] == doctest::Approx(3.0));
}

TEST_CASE("solve 2x2 pagerank-style system") {
    // (I - 0.9 * [[0.5,0.5],[0.5,0.5]]) x = [0.1, 0] has solution [0.55, 0.45]
    Matrix a(2, 2);
    a(0, 0) = 0.55;
    a(0, 1) = -0.45;
    a(1, 0) = -0.45;
    a(1, 1) = 0.55;
    const Vector x = solve_linear_system(a, Vector{0.1, 0.0});
    CHECK(x[0] == doctest::Approx(0.55).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(0.45).epsilon(1e-12));
}

TEST_CASE("solve rejects singular matrices") {
    Matrix zeros(3, 3);
    CHECK_THROWS_AS(solve_linear_system(zeros, Vector(3)), SingularMatrixError);
}

TEST_CASE("solve residual on random well-conditioned systems") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng() % 49);
        Matrix a(n, n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                a(r, c) = dist(rng) + (r == c ? static_cast<double>(n) : 0.0);
        Vector b(n);
        for (std::size_t i = 0; i < n; ++i)
            b[i] = dist(rng);
        const Vector x = solve_linear_system(a, b);
        const Vector ax = matvec(a, x);
        CHECK(max_abs_diff(ax, b) < 1e-9);
    }
}

TEST_CASE("power iteration with zero damping returns the teleport vector") {
    Matrix m(2, 2, 0.5);
    const Vector f = pagerank_power_iteration(m, Vector{1.0, 0.0}, 0.0, 1e-12);
    CHECK(f[0] == doctest::Approx(1.0));
    CHECK(f[1] == doctest::Approx(0.0));
}

TEST_CASE("power iteration matches the 2x2 closed form") {
    Matrix m(2, 2, 0.5);
    const Vector f = pagerank_power_iteration(m, Vector{1.0, 0.0}, 0.9, 1e-13);
    CHECK(f[0] == doctest::Approx(0.55).epsilon(1e-9));
    CHECK(f[1] == doctest::Approx(0.45).epsilon(1e-9));
}

TEST_CASE("power iteration uniform fixed point") {
    Matrix m(4, 4, 0.25);
    const Vector f = pagerank_power_iteration(m, Vector(4, 0.25), 0.85, 1e-13);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(f[i] == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("power iteration rejects non-stochastic matrices") {
    Matrix m(2, 2, 0.7);
    CHECK_THROWS_AS(pagerank_power_iteration(m, Vector{0.5, 0.5}, 0.9, 1e-8),
                    ContractViolation);
}

TEST_CASE("closed-form solve agrees with power iteration on random graphs") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng() % 19);
        const Matrix m = random_column_stochastic(n, rng);
        Vector y(n);
        y[rng() % n] = 1.0;
        const double lambda = 0.9;
        Matrix a(n, n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                a(r, c) = (r == c ? 1.0 : 0.0) - lambda * m(r, c);
        Vector b(n);
        for (std::size_t i = 0; i < n; ++i)
            b[i] = (1.0 - lambda) * y[i];
        const Vector direct = solve_linear_system(a, b);
        const Vector iterated = pagerank_power_iteration(m, y, lambda, 1e-12);
        CHECK(max_abs_diff(direct, iterated) < 1e-8);
        CHECK(sum(direct) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("softmax basics") {
    const Vector u = softmax(Vector{0.0, 0.0, 0.0});
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(u[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    const Vector big = softmax(Vector{1000.0, 0.0});
    CHECK(big[0] == doctest::Approx(1.0));
    CHECK(big[1] == doctest::Approx(0.0));
    CHECK(std::isfinite(big[0]));

    const Vector q = softmax(Vector{std::log(1.0), std::log(3.0)});
    CHECK(q[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(q[1] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(sum(q) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("adam leaves values unchanged for zero gradients") {
    Parameter p("p", 2, 2);
    p.value(0, 0) = 1.5;
    p.value(1, 1) = -0.5;
    const Matrix before = p.value;
    AdamState adam;
    adam.step({&p});
    for (std::size_t i = 0; i < before.size(); ++i)
        CHECK(p.value.data()[i] == before.data()[i]);
}

TEST_CASE("first adam step moves by about -lr * sign(gradient)") {
    Parameter p("p", 1, 1);
    p.value(0, 0) = 0.7;
    p.grad(0, 0) = 3.2;
    AdamConfig cfg;
    cfg.learning_rate = 0.01;
    AdamState adam(cfg);
    adam.step({&p});
    CHECK(p.value(0, 0) == doctest::Approx(0.7 - 0.01).epsilon(1e-6));
    CHECK(p.grad(0, 0) == 0.0);  // zeroed afterward

    Parameter neg("n", 1, 1);
    neg.grad(0, 0) = -0.004;
    AdamState adam2(cfg);
    adam2.step({&neg});
    CHECK(neg.value(0, 0) == doctest::Approx(0.01).epsilon(1e-3));
}

TEST_CASE("frozen parameters are never updated") {
    Parameter p("frozen", 2, 1);
    p.trainable = false;
    p.value(0, 0) = 4.0;
    p.grad(0, 0) = 100.0;
    AdamState adam;
    adam.step({&p});
    CHECK(p.value(0, 0) == 4.0);
    CHECK(p.grad(0, 0) == 0.0);
}

TEST_CASE("adam rejects mismatched gradient shapes") {
    Parameter p("bad", 2, 2);
    p.grad = Matrix(3, 2);
    AdamState adam;
    CHECK_THROWS_AS(adam.step({&p}), ContractViolation);
}

TEST_CASE("gradcheck on a quadratic") {
    Parameter p("p", 4, 1);
    for (std::size_t i = 0; i < 4; ++i)
        p.value(i, 0) = 0.3 * static_cast<double>(i + 1);
    const auto loss = [&p] {
        double s = 0.0;
        for (std::size_t i = 0; i < 4; ++i)
            s += 0.5 * p.value(i, 0) * p.value(i, 0);
        return s;
    };
    for (std::size_t i = 0; i < 4; ++i)
        p.grad(i, 0) = p.value(i, 0);
    const GradCheckReport rep = finite_diff_gradcheck(loss, {&p}, 1e-5, 1e-8);
    CHECK(rep.max_rel_error < 1e-8);
    CHECK(rep.coordinates_checked == 4);
    CHECK(rep.passed());
}

TEST_CASE("gradcheck on a constant loss") {
    Parameter p("p", 3, 1);
    const auto loss = [] { return 42.0; };
    const GradCheckReport rep = finite_diff_gradcheck(loss, {&p}, 1e-5, 1e-8);
    CHECK(rep.max_rel_error == 0.0);
}

}  // TEST_SUITE
