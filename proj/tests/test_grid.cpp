#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "susy/expr.hpp"
#include "susy/grid.hpp"

using namespace susy;

TEST_CASE("make_grid reproduces the affine sample rule") {
    Grid g = make_grid(-12.0, 12.0, 2048);
    CHECK(g.spacing == Catch::Approx(24.0 / 2047.0).epsilon(1e-15));
    CHECK(g.point(0) == -12.0);
    CHECK(g.point(2047) == Catch::Approx(12.0).margin(1e-12));

    Grid unit = make_grid(0.0, 1.0, 16);
    CHECK(unit.point(0) == 0.0);
    CHECK(unit.point(15) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("make_grid rejects unusable discretizations") {
    CHECK_THROWS_AS(make_grid(-5.0, 5.0, 15), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(5.0, -5.0, 64), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(0.0, std::numeric_limits<double>::infinity(), 64),
                    std::invalid_argument);
}

TEST_CASE("inner product integrates Gaussians to quadrature accuracy") {
    Grid g = make_grid(-12.0, 12.0, 2048);
    double c = std::pow(std::numbers::pi, -0.25);
    Expr x = var_x();
    GridFunction f = sample(simplify(c * exp_e(-0.5 * pow_i(x, 2))), g);
    CHECK(inner_product(f, f) == Catch::Approx(1.0).margin(1e-10));

    GridFunction xf = sample(simplify(x * exp_e(-0.5 * pow_i(x, 2))), g);
    GridFunction ef = sample(simplify(exp_e(-0.5 * pow_i(x, 2))), g);
    CHECK(std::abs(inner_product(ef, xf)) < 1e-12);
}

TEST_CASE("inner product is symmetric and positive on nonzero inputs") {
    Grid g = make_grid(-6.0, 6.0, 300);
    Expr x = var_x();
    GridFunction f = sample(simplify(x * exp_e(-1.0 * pow_i(x, 2))), g);
    GridFunction h = sample(simplify((constant(1.0) + x) * exp_e(-0.5 * pow_i(x, 2))), g);
    CHECK(inner_product(f, h) == Catch::Approx(inner_product(h, f)).epsilon(1e-14));
    CHECK(inner_product(f, f) > 0.0);
    CHECK(norm(GridFunction(g, std::vector<double>(300, 0.0))) == 0.0);
    Grid g2 = make_grid(-6.0, 6.0, 301);
    CHECK_THROWS_AS(inner_product(f, sample(x, g2)), std::invalid_argument);
}

TEST_CASE("cumulative integral of a Gaussian reaches sqrt(pi)/2") {
    Grid g = make_grid(-12.0, 12.0, 2048);
    Expr t = var_x();
    GridFunction F = cumulative_integral(simplify(exp_e(-1.0 * pow_i(t, 2))), 0.0, g);
    CHECK(F.values.back() == Catch::Approx(std::sqrt(std::numbers::pi) / 2.0).margin(1e-8));
    CHECK(F.values.front() == Catch::Approx(-std::sqrt(std::numbers::pi) / 2.0).margin(1e-8));
}

TEST_CASE("cumulative integral of one is the identity ramp") {
    Grid g = make_grid(-3.0, 5.0, 257);
    GridFunction F = cumulative_integral(constant(1.0), 0.0, g);
    for (int i = 0; i < g.n; ++i)
        CHECK(F.values[static_cast<std::size_t>(i)] == Catch::Approx(g.point(i)).margin(1e-12));
}

TEST_CASE("cumulative integral of the erf-family superpotential matches the antiderivative") {
    // int_0^x [t/a0^2 + 4t/(t^2+a0^2)] dt = x^2/(2 a0^2) + 2 ln(x^2+a0^2) - 2 ln(a0^2)
    double a0 = 1.0;
    Grid g = make_grid(-12.0, 12.0, 2048);
    Expr x = var_x();
    Expr two_beta0 = simplify((1.0 / (a0 * a0)) * x +
                              quotient(4.0 * x, pow_i(x, 2) + constant(a0 * a0)));
    GridFunction F = cumulative_integral(two_beta0, 0.0, g);
    for (int i = 0; i < g.n; i += 97) {
        double xv = g.point(i);
        double expect = xv * xv / (2.0 * a0 * a0) + 2.0 * std::log(xv * xv + a0 * a0) -
                        2.0 * std::log(a0 * a0);
        CHECK(F.values[static_cast<std::size_t>(i)] == Catch::Approx(expect).margin(1e-8));
    }
}

TEST_CASE("quadrature error drops by at least 8x when spacing halves") {
    // integrand without decaying tails so the composite error term dominates
    Expr x = var_x();
    Expr f = exp_e(x);
    double exact = std::exp(1.0) - std::exp(-1.0);
    auto err = [&](int n) {
        Grid g = make_grid(-1.0, 1.0, n);
        auto w = g.quadrature_weights();
        auto v = eval_many(f, g.points());
        double s = 0.0;
        for (int i = 0; i < g.n; ++i) s += w[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
        return std::abs(s - exact);
    };
    double e1 = err(65), e2 = err(129);
    CHECK(e1 / e2 >= 8.0);
}
