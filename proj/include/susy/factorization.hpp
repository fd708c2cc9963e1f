#pragma once

// Factorization pairs, the Riccati-with-particular-solution isospectral
// family, zero modes and dressed ladder operators.
//
// Conventions (hbar = 1): A = (d/dx + W)/sqrt(2), A+ = (-d/dx + W)/sqrt(2),
// H1 = A+A = -d^2/2 + (W^2 - W')/2, H2 = AA+ = -d^2/2 + (W^2 + W')/2.
// The isospectral family refactors the upper partner: beta' + beta^2 = 2 V2
// with particular solution beta0 = W, beta = beta0 + 1/z,
// z = e^{int 2 beta0} (gamma + int e^{-int 2 beta0}), all integrals anchored
// at x = 0. The new Hamiltonian is H' = b+b = H2 - beta' = H1 - phi'.

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "susy/expr.hpp"
#include "susy/grid.hpp"
#include "susy/operator.hpp"
#include "susy/spectrum.hpp"

namespace susy {

inline Grid default_box() { return make_grid(-12.0, 12.0, 2048); }

namespace detail {

// decaying-tail normalizability scan for exp(-int_0^x w)
inline bool normalizable_kernel(const Expr& w, const Grid& box) {
    Expr iw = cumulative_integral_expr(w, 0.0, box.x_min, box.x_max, 4 * box.n);
    Expr psi = exp_e(-1.0 * iw);
    auto vals = eval_many(psi, box.points());
    double sup = 0.0;
    for (double v : vals) {
        if (!std::isfinite(v)) return false;
        sup = std::max(sup, std::abs(v));
    }
    if (sup == 0.0) return false;
    int edge = std::max(2, box.n / 20);
    double tail = 0.0;
    for (int i = 0; i < edge; ++i) {
        tail = std::max(tail, std::abs(vals[static_cast<std::size_t>(i)]));
        tail = std::max(tail, std::abs(vals[static_cast<std::size_t>(box.n - 1 - i)]));
    }
    return tail < 1e-6 * sup;
}

}  // namespace detail

struct FactorizationPair {
    Expr W;
    DiffOperator A;      // (d/dx + W)/sqrt(2)
    DiffOperator A_dag;  // (-d/dx + W)/sqrt(2)
    DiffOperator H1;     // A+ A
    DiffOperator H2;     // A A+
    bool broken = false;
};

inline FactorizationPair factorize(const Expr& W, const Grid& box = default_box()) {
    FactorizationPair fp;
    fp.W = simplify(W);
    fp.A = first_order(+1, fp.W, 1.0 / std::sqrt(2.0));
    fp.A_dag = first_order(-1, fp.W, 1.0 / std::sqrt(2.0));
    fp.H1 = compose(fp.A_dag, fp.A);
    fp.H2 = compose(fp.A, fp.A_dag);
    bool kernel_A = detail::normalizable_kernel(fp.W, box);
    bool kernel_Adag = detail::normalizable_kernel(-1.0 * fp.W, box);
    fp.broken = !kernel_A && !kernel_Adag;
    return fp;
}

// psi0 ~ exp(-int_0^x W), returned iff normalizable with decaying tails
inline std::optional<GridFunction> zero_mode(const FactorizationPair& fp,
                                             const Grid& box = default_box()) {
    if (!detail::normalizable_kernel(fp.W, box)) return std::nullopt;
    Expr iw = cumulative_integral_expr(fp.W, 0.0, box.x_min, box.x_max, 4 * box.n);
    GridFunction psi = normalized(sample(exp_e(-1.0 * iw), box));
    return psi;
}

struct RiccatiSolution {
    Expr U;      // Riccati right side, beta' + beta^2 = U
    Expr beta0;  // particular solution
    double gamma = 0.0;
    Expr z;      // 1/phi, solves -z' + 2 beta0 z + 1 = 0
    Expr phi;
    Expr beta;   // beta0 + phi
};

// sup over interior probes of |beta' + beta^2 - U| / (1 + term scale)
inline double riccati_residual(const Expr& beta, const Expr& U, const Grid& box,
                               double interior_frac = 0.05) {
    Expr resid = simplify(diff(beta) + pow_i(beta, 2) - U);
    Expr scale_terms = pow_i(beta, 2);
    int m = box.interior_margin(interior_frac);
    double worst = 0.0;
    auto xs = box.points();
    std::vector<double> interior(xs.begin() + m, xs.end() - m);
    auto rv = eval_many(resid, interior);
    auto sv = eval_many(scale_terms, interior);
    auto uv = eval_many(U, interior);
    for (std::size_t i = 0; i < interior.size(); ++i) {
        double scale = 1.0 + std::max(std::abs(sv[i]), std::abs(uv[i]));
        worst = std::max(worst, std::abs(rv[i]) / scale);
    }
    return worst;
}

inline RiccatiSolution riccati_family(const Expr& U, const Expr& beta0, double gamma,
                                      const Grid& box = default_box()) {
    RiccatiSolution rs;
    rs.U = simplify(U);
    rs.beta0 = simplify(beta0);
    rs.gamma = gamma;

    double part = riccati_residual(rs.beta0, rs.U, box);
    if (part > 1e-8)
        throw std::invalid_argument(
            "riccati_family: beta0 is not a particular solution (residual " +
            std::to_string(part) + ")");

    Expr I = cumulative_integral_expr(2.0 * rs.beta0, 0.0, box.x_min, box.x_max, 4 * box.n);
    Expr J = cumulative_integral_expr(exp_e(-1.0 * I), 0.0, box.x_min, box.x_max, 4 * box.n);
    rs.z = simplify(exp_e(I) * (constant(gamma) + J));
    rs.phi = riccati_phi(rs.beta0, rs.z);
    rs.beta = simplify(rs.beta0 + rs.phi);

    // admissibility: sign scan of z on a refined sampling of the box
    Grid fine = make_grid(box.x_min, box.x_max, 4 * box.n);
    auto zv = eval_many(rs.z, fine.points());
    for (int i = 0; i + 1 < fine.n; ++i) {
        double a = zv[static_cast<std::size_t>(i)], b = zv[static_cast<std::size_t>(i + 1)];
        if (a == 0.0 || (a < 0.0) != (b < 0.0)) {
            double xz = fine.point(i) - a * fine.spacing / (b - a);
            throw std::domain_error("riccati_family: singular member, z vanishes near x=" +
                                    std::to_string(xz));
        }
    }
    return rs;
}

// H' = b+b with b = (d/dx + beta)/sqrt(2); equals H2 - beta' = H1 - phi'.
inline DiffOperator mielnik_partner(const FactorizationPair& fp, const RiccatiSolution& rs,
                                    const Grid& box = default_box()) {
    Expr V2 = fp.H2.coefficient(0);
    auto probes = probe_points(box.x_min * 0.8, box.x_max * 0.8, 17);
    double mismatch = max_rel_deviation(simplify(2.0 * V2), rs.U, probes);
    if (mismatch > 1e-8)
        throw std::invalid_argument(
            "mielnik_partner: Riccati right side does not match 2 V2 of the pair (deviation " +
            std::to_string(mismatch) + ")");
    DiffOperator b = first_order(+1, rs.beta, 1.0 / std::sqrt(2.0));
    DiffOperator b_dag = first_order(-1, rs.beta, 1.0 / std::sqrt(2.0));
    DiffOperator Hp = compose(b_dag, b);
    // cross-check the product form against H2 - beta'
    DiffOperator alt = op_sub(fp.H2, DiffOperator::multiplication(diff(rs.beta)));
    for (int k = 0; k <= 2; ++k) {
        double dev = max_rel_deviation(Hp.coefficient(k), alt.coefficient(k), probes);
        if (dev > 1e-8)
            throw std::runtime_error("mielnik_partner: product and shifted forms disagree");
    }
    return Hp;
}

struct LadderPair {
    DiffOperator raise;
    DiffOperator lower;
    double lambda = 0.0;  // level spacing
    DiffOperator H;       // the Hamiltonian it ladders
};

// ladder defect residuals ||([H,R] - lambda R) psi_n|| / ||R psi_n|| on the
// lowest eigenstates; the commutator is formed at the expression level.
inline std::vector<double> ladder_residuals(const LadderPair& L, const SpectrumResult& S,
                                            int states = 6) {
    DiffOperator defect = op_sub(commutator(L.H, L.raise), op_scale(L.raise, L.lambda));
    std::vector<double> out;
    int count = std::min<int>(states, static_cast<int>(S.states.size()));
    for (int i = 0; i < count; ++i) {
        GridFunction num = apply(defect, S.states[static_cast<std::size_t>(i)]);
        GridFunction den = apply(L.raise, S.states[static_cast<std::size_t>(i)]);
        double dn = interior_norm(den);
        double nn = interior_norm(num);
        if (dn < 1e-6 * interior_norm(S.states[static_cast<std::size_t>(i)])) {
            out.push_back(0.0);  // state annihilated by the ladder
            continue;
        }
        out.push_back(nn / dn);
    }
    return out;
}

// spacing measured from the eigen-action of a candidate raise operator
inline double measure_ladder_spacing(const DiffOperator& raise, const SpectrumResult& S,
                                     int source_state = 1) {
    if (static_cast<std::size_t>(source_state) >= S.states.size())
        throw std::invalid_argument("measure_ladder_spacing: no such state");
    GridFunction u = apply(raise, S.states[static_cast<std::size_t>(source_state)]);
    double best = 0.0;
    int arg = -1;
    for (std::size_t m = 0; m < S.states.size(); ++m) {
        double ov = std::abs(inner_product(S.states[m], u));
        if (ov > best) {
            best = ov;
            arg = static_cast<int>(m);
        }
    }
    if (arg < 0) throw std::runtime_error("measure_ladder_spacing: no overlap found");
    return S.energies[static_cast<std::size_t>(arg)] -
           S.energies[static_cast<std::size_t>(source_state)];
}

// X+ = O+ (inner raise) O ladders O+O when the inner pair ladders O O+.
inline LadderPair dressed_ladder(const DiffOperator& outer_lower, const DiffOperator& inner_raise,
                                 const DiffOperator& inner_lower, double lambda,
                                 const Grid& box = default_box()) {
    DiffOperator outer_dag = adjoint(outer_lower);
    DiffOperator H_inner = simplify_op(compose(outer_lower, outer_dag));
    SpectrumResult S = eigensolve(H_inner, box, 6);
    LadderPair inner{inner_raise, inner_lower, lambda, H_inner};
    auto resid = ladder_residuals(inner, S, 6);
    for (double r : resid)
        if (r > 1e-6)
            throw std::invalid_argument(
                "dressed_ladder: inner pair does not ladder the refactorized Hamiltonian "
                "(defect " + std::to_string(r) + ")");
    LadderPair out;
    out.raise = simplify_op(compose(outer_dag, compose(inner_raise, outer_lower)));
    out.lower = adjoint(out.raise);
    out.lambda = lambda;
    out.H = simplify_op(compose(outer_dag, outer_lower));
    return out;
}

}  // namespace susy
