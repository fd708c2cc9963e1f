#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "susy/catalog.hpp"
#include "susy/factorization.hpp"
#include "susy/spectrum.hpp"

using namespace susy;

namespace {
const Grid box = make_grid(-12.0, 12.0, 2048);
}

TEST_CASE("oscillator levels and orthonormal states") {
    Expr x = var_x();
    DiffOperator H = hamiltonian(simplify(0.5 * pow_i(x, 2)));
    SpectrumResult S = eigensolve(H, box, 3);
    CHECK(S.energies[0] == Catch::Approx(0.5).epsilon(1e-6));
    CHECK(S.energies[1] == Catch::Approx(1.5).epsilon(1e-6));
    CHECK(S.energies[2] == Catch::Approx(2.5).epsilon(1e-6));
    for (double r : S.residuals) CHECK(r < 1e-9);

    // eigensolver-orthogonality oracle for the quadrature inner product
    CHECK(std::abs(inner_product(S.states[0], S.states[1])) < 1e-8);
    CHECK(inner_product(S.states[0], S.states[0]) == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("lower partner of W=x has levels 0, 1, 2") {
    Expr x = var_x();
    FactorizationPair fp = factorize(x, box);
    SpectrumResult S = eigensolve(fp.H1, box, 3);
    CHECK(std::abs(S.energies[0]) < 1e-6);
    CHECK(S.energies[1] == Catch::Approx(1.0).epsilon(1e-6));
    CHECK(S.energies[2] == Catch::Approx(2.0).epsilon(1e-6));
    CHECK(is_zero_mode(S.energies[0], fp.A, S.states[0]));
    CHECK_FALSE(is_zero_mode(S.energies[1], fp.A, S.states[1]));
}

TEST_CASE("error-function-family shifted oscillator levels") {
    SpectrumResult S = eigensolve(hamiltonian(erf_V_s2(1.0)), box, 2);
    CHECK(S.energies[0] == Catch::Approx(1.5).margin(1e-5));
    CHECK(S.energies[1] == Catch::Approx(2.0).margin(1e-5));
}

TEST_CASE("free particle in the Dirichlet box") {
    // the discrete wall sits one spacing beyond the boundary nodes
    Grid small = make_grid(-12.0, 12.0, 1024);
    SpectrumResult S = eigensolve(hamiltonian(constant(0.0)), small, 1);
    double expect = std::numbers::pi * std::numbers::pi / (2.0 * 24.0 * 24.0);
    CHECK(S.energies[0] == Catch::Approx(expect).epsilon(1e-2));
}

TEST_CASE("potential poles on grid nodes are rejected") {
    Grid odd = make_grid(-12.0, 12.0, 2049);  // x = 0 is a node
    Expr V = quotient(constant(1.0), var_x());
    CHECK_THROWS_AS(eigensolve(hamiltonian(V), odd, 2), std::domain_error);
}

TEST_CASE("non-self-adjoint operators are rejected") {
    DiffOperator P = hamiltonian(simplify(0.5 * pow_i(var_x(), 2)));
    P.terms[1] = var_x();  // x d/dx spoils formal self-adjointness
    CHECK_THROWS_AS(eigensolve(P, box, 2), std::invalid_argument);
}

TEST_CASE("eigensolve pair-count guard") {
    DiffOperator H = hamiltonian(simplify(0.5 * pow_i(var_x(), 2)));
    CHECK_THROWS_AS(eigensolve(H, box, 41), std::invalid_argument);
    CHECK_THROWS_AS(eigensolve(H, box, 0), std::invalid_argument);
}

TEST_CASE("SUSY pairing for W=x: shifted spectra and mapped states") {
    Expr x = var_x();
    FactorizationPair fp = factorize(x, box);
    SpectrumResult S1 = eigensolve(fp.H1, box, 6);
    SpectrumResult S2 = eigensolve(fp.H2, box, 5);
    for (int n = 0; n < 5; ++n) {
        CHECK(std::abs(S2.energies[static_cast<std::size_t>(n)] -
                       S1.energies[static_cast<std::size_t>(n + 1)]) < 2e-5);
        GridFunction mapped = apply(fp.A, S1.states[static_cast<std::size_t>(n + 1)]);
        double ov = std::abs(inner_product(mapped, S2.states[static_cast<std::size_t>(n)])) /
                    norm(mapped);
        CHECK(ov > 1.0 - 1e-6);
    }
}

TEST_CASE("supercharge algebra: anticommutator and intertwining") {
    Expr x = var_x();
    FactorizationPair fp = factorize(x, box);
    GridFunction up = sample(simplify((constant(1.0) + 0.2 * x) * exp_e(-0.5 * pow_i(x, 2))), box);
    GridFunction down = sample(simplify(x * exp_e(-0.4 * pow_i(x, 2))), box);

    // {Q, Q+} block-diagonal action: (A+A up, A A+ down)
    GridFunction r1 = apply(fp.A_dag, apply(fp.A, up)) - apply(fp.H1, up);
    GridFunction r2 = apply(fp.A, apply(fp.A_dag, down)) - apply(fp.H2, down);
    CHECK(interior_norm(r1, 0.1) < 1e-6);
    CHECK(interior_norm(r2, 0.1) < 1e-6);

    // [H, Q] = 0 in block form reduces to the intertwining A H1 = H2 A
    GridFunction r3 = apply(compose(fp.A, fp.H1), up) - apply(compose(fp.H2, fp.A), up);
    CHECK(interior_norm(r3, 0.1) < 1e-6);
}

TEST_CASE("separable 2-D assembly groups degeneracies") {
    Expr x = var_x();
    DiffOperator H = hamiltonian(simplify(0.5 * pow_i(x, 2)));
    SpectrumResult S = eigensolve(H, box, 5);
    auto groups = separable_2d(S, S, 1e-6);
    REQUIRE(groups.size() >= 4);
    CHECK(groups[0].members.size() == 1);
    CHECK(groups[1].members.size() == 2);
    CHECK(groups[2].members.size() == 3);
    CHECK(groups[3].members.size() == 4);
    CHECK(groups[0].energy == Catch::Approx(1.0).epsilon(1e-6));

    auto singletons = separable_2d(S, S, 0.0);
    CHECK(singletons.size() == 25);
    CHECK_THROWS_AS(separable_2d(S, S, 1e-14), std::invalid_argument);
}

TEST_CASE("grid refinement leaves the oscillator levels in place") {
    Expr x = var_x();
    DiffOperator H = hamiltonian(simplify(0.5 * pow_i(x, 2)));
    SpectrumResult a = eigensolve(H, make_grid(-12.0, 12.0, 1024), 10);
    SpectrumResult b = eigensolve(H, make_grid(-12.0, 12.0, 2048), 10);
    for (int i = 0; i < 10; ++i)
        CHECK(std::abs(a.energies[static_cast<std::size_t>(i)] -
                       b.energies[static_cast<std::size_t>(i)]) < 1e-7);
}
