#pragma once

// Two-axis integrals of motion K, I1, I2 built from 1-D ladder pairs, and the
// commutation / bracket verification machinery.
//
// 2-D objects are never assembled as dense matrices: operators act on product
// states axis-wise, and commutation residuals are evaluated through the exact
// ladder-defect decomposition. For a term P(x)Q(y) of an integral,
//   (H - E) (P psi_i)(Q psi_j) = (D_P psi_i)(Q psi_j) + (P psi_i)(D_Q psi_j)
//                                + (sigma_P + sigma_Q)(P psi_i)(Q psi_j) + coupling,
// where D_P = [H_x, P] - sigma_P P is formed at the expression level and the
// coupling collects I(H-E)psi eigenresidual terms (reported separately, since
// re-differentiating rounding noise at high stencil order is meaningless).

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "susy/expr.hpp"
#include "susy/factorization.hpp"
#include "susy/grid.hpp"
#include "susy/operator.hpp"
#include "susy/spectrum.hpp"

namespace susy {

inline bool resonance(int m, int n, double lambda_x, double lambda_y) {
    if (m < 1 || n < 1) throw std::invalid_argument("resonance: m, n must be positive integers");
    if (!(lambda_x > 0.0) || !(lambda_y > 0.0))
        throw std::invalid_argument("resonance: ladder spacings must be positive");
    return std::abs(m * lambda_x - n * lambda_y) <
           1e-10 * std::max(lambda_x, lambda_y);
}

struct TwoAxisTerm {
    DiffOperator x_op;
    DiffOperator y_op;
    double sigma_x = 0.0;  // energy shift of x_op on H_x eigenstates
    double sigma_y = 0.0;
    DiffOperator defect_x;  // [H_x, x_op] - sigma_x x_op
    DiffOperator defect_y;
};

struct TwoAxisOp {
    std::vector<TwoAxisTerm> terms;
};

struct IntegralTriple {
    TwoAxisOp K, I1, I2;
    double lambda = 0.0;
    int m = 1, n = 1;
    int order_K = 2, order_I1 = 0, order_I2 = 0;
};

namespace detail {

inline bool trivially_commutes(const DiffOperator& H, const DiffOperator& p) {
    if (same_structure(H, p) || same_structure(H, op_scale(p, -1.0))) return true;  // [H, +-H] = 0
    return p.order() <= 0 && p.coefficient(0).is_constant();  // constants commute
}

inline TwoAxisTerm make_term(const DiffOperator& Hx, const DiffOperator& Hy,
                             const DiffOperator& px, const DiffOperator& py, double sx, double sy) {
    TwoAxisTerm t;
    t.x_op = px;
    t.y_op = py;
    t.sigma_x = sx;
    t.sigma_y = sy;
    t.defect_x = (sx == 0.0 && trivially_commutes(Hx, px))
                     ? DiffOperator::zero()
                     : op_sub(commutator(Hx, px), op_scale(px, sx));
    t.defect_y = (sy == 0.0 && trivially_commutes(Hy, py))
                     ? DiffOperator::zero()
                     : op_sub(commutator(Hy, py), op_scale(py, sy));
    return t;
}

inline int term_order(const TwoAxisTerm& t, const std::vector<double>& probes) {
    int ox = measured_order(t.x_op, probes);
    int oy = measured_order(t.y_op, probes);
    return (ox < 0 || oy < 0) ? -1 : ox + oy;
}

}  // namespace detail

inline IntegralTriple build_triple(const LadderPair& Lx, const LadderPair& Ly, int m, int n,
                                   const Grid& box = default_box()) {
    if (!resonance(m, n, Lx.lambda, Ly.lambda))
        throw std::invalid_argument("build_triple: resonance m*lambda_x = n*lambda_y violated");
    IntegralTriple T;
    T.lambda = Lx.lambda;
    T.m = m;
    T.n = n;

    DiffOperator xr = op_pow(Lx.raise, m);
    DiffOperator xl = op_pow(Lx.lower, m);
    DiffOperator yr = op_pow(Ly.raise, n);
    DiffOperator yl = op_pow(Ly.lower, n);
    DiffOperator id = DiffOperator::identity();
    DiffOperator zero = DiffOperator::zero();

    // K = H_x - H_y
    TwoAxisTerm kx = detail::make_term(Lx.H, Ly.H, Lx.H, id, 0.0, 0.0);
    TwoAxisTerm ky = detail::make_term(Lx.H, Ly.H, id, op_scale(Ly.H, -1.0), 0.0, 0.0);
    T.K.terms = {kx, ky};

    double lm = m * Lx.lambda, ln = n * Ly.lambda;
    TwoAxisTerm plus = detail::make_term(Lx.H, Ly.H, xr, yl, lm, -ln);
    TwoAxisTerm minus = detail::make_term(Lx.H, Ly.H, xl, op_scale(yr, -1.0), -lm, ln);
    T.I1.terms = {plus, minus};
    TwoAxisTerm minus2 = detail::make_term(Lx.H, Ly.H, xl, yr, -lm, ln);
    T.I2.terms = {plus, minus2};

    auto probes = probe_points(box.x_min * 0.8, box.x_max * 0.8, 13);
    T.order_K = std::max(detail::term_order(kx, probes), detail::term_order(ky, probes));
    T.order_I1 = std::max(detail::term_order(plus, probes), detail::term_order(minus, probes));
    T.order_I2 = std::max(detail::term_order(plus, probes), detail::term_order(minus2, probes));
    return T;
}

// ---------------------------------------------------------------------------
// separable states: sums of products u(x) v(y)

struct SepState {
    std::vector<std::pair<GridFunction, GridFunction>> terms;
};

inline double sep_inner(const SepState& a, const SepState& b) {
    double s = 0.0;
    for (const auto& ta : a.terms)
        for (const auto& tb : b.terms)
            s += inner_product(ta.first, tb.first) * inner_product(ta.second, tb.second);
    return s;
}

inline double sep_norm(const SepState& a) {
    double s = sep_inner(a, a);
    return s <= 0.0 ? 0.0 : std::sqrt(s);
}

inline SepState apply_two_axis(const TwoAxisOp& T, const GridFunction& psi_x,
                               const GridFunction& psi_y) {
    SepState out;
    for (const auto& t : T.terms)
        out.terms.emplace_back(apply(t.x_op, psi_x), apply(t.y_op, psi_y));
    return out;
}

// ---------------------------------------------------------------------------
// verification

struct ProbeResidual {
    int i = 0, j = 0;
    double energy = 0.0;
    double residual_K = 0.0, residual_I1 = 0.0, residual_I2 = 0.0;
    double norm_I1 = 0.0, norm_I2 = 0.0;
    bool annihilated_I1 = false, annihilated_I2 = false;
};

struct MappingEntry {
    int i = 0, j = 0;        // source product state
    int a = -1, b = -1;      // dominant image product state
    double share = 0.0;      // |coefficient|^2 fraction of ||I1 psi||^2
    bool within_multiplet = false;
};

struct CommutationReport {
    std::vector<ProbeResidual> probes;
    std::vector<MappingEntry> mapping;
    double max_residual = 0.0;      // worst commutation defect over probes/integrals
    double eigen_coupling = 0.0;    // worst I(H-E)psi coupling bound, reported apart
    double independence_smin = 0.0; // smallest eigenvalue of the normalized 3x3 Gram
    bool pass = false;
};

namespace detail {

// bound on ||I (H-E) psi|| from 1-D eigenresiduals and probe-set operator scales
inline double coupling_bound(double rx, double ry, double opscale) {
    return opscale * (rx + ry);
}

inline double smallest_eig3(double g[3][3]) {
    double a[9] = {g[0][0], g[1][0], g[2][0], g[0][1], g[1][1], g[2][1], g[0][2], g[1][2], g[2][2]};
    double w[3];
    lapack_int info = LAPACKE_dsyev(LAPACK_COL_MAJOR, 'N', 'L', 3, a, 3, w);
    if (info != 0) throw std::runtime_error("3x3 eigensolve failed");
    return w[0];
}

}  // namespace detail

struct ProductProbe {
    int i = 0, j = 0;
    double energy = 0.0;
};

inline std::vector<ProductProbe> lowest_product_states(const SpectrumResult& Sx,
                                                       const SpectrumResult& Sy, int count) {
    std::vector<ProductProbe> all;
    for (std::size_t i = 0; i < Sx.energies.size(); ++i)
        for (std::size_t j = 0; j < Sy.energies.size(); ++j)
            all.push_back({static_cast<int>(i), static_cast<int>(j), Sx.energies[i] + Sy.energies[j]});
    std::sort(all.begin(), all.end(), [](const ProductProbe& a, const ProductProbe& b) {
        if (a.energy != b.energy) return a.energy < b.energy;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    if (static_cast<int>(all.size()) > count) all.resize(static_cast<std::size_t>(count));
    return all;
}

namespace detail {

// caches P psi_i / D_P psi_i vectors shared across probe pairs
class AxisCache {
  public:
    const GridFunction& get(const DiffOperator& op, const SpectrumResult& S, int idx) {
        auto key = std::make_pair(&op, idx);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        GridFunction g = op.order() < 0
                             ? GridFunction(S.grid, std::vector<double>(
                                                        static_cast<std::size_t>(S.grid.n), 0.0))
                             : apply(op, S.states[static_cast<std::size_t>(idx)]);
        return cache_.emplace(key, std::move(g)).first->second;
    }

  private:
    std::map<std::pair<const DiffOperator*, int>, GridFunction> cache_;
};

}  // namespace detail

inline CommutationReport verify_commutation(const LadderPair& Lx, const LadderPair& Ly,
                                            const IntegralTriple& T, const SpectrumResult& Sx,
                                            const SpectrumResult& Sy, int probes,
                                            double degeneracy_tol = 1e-6) {
    CommutationReport rep;
    auto probe_list = lowest_product_states(Sx, Sy, probes);
    auto multiplets = separable_2d(Sx, Sy, degeneracy_tol);
    detail::AxisCache cx, cy;

    double rx = 0.0, ry = 0.0;
    for (double r : Sx.residuals) rx = std::max(rx, r);
    for (double r : Sy.residuals) ry = std::max(ry, r);

    auto applied_state = [&](const TwoAxisOp& I, int i, int j) {
        SepState out;
        for (const auto& t : I.terms)
            out.terms.emplace_back(cx.get(t.x_op, Sx, i), cy.get(t.y_op, Sy, j));
        return out;
    };
    auto commutator_state_cached = [&](const TwoAxisOp& I, int i, int j) {
        SepState out;
        for (const auto& t : I.terms) {
            const GridFunction& ux = cx.get(t.x_op, Sx, i);
            const GridFunction& uy = cy.get(t.y_op, Sy, j);
            out.terms.emplace_back(cx.get(t.defect_x, Sx, i), uy);
            out.terms.emplace_back(ux, cy.get(t.defect_y, Sy, j));
            double sigma_sum = t.sigma_x + t.sigma_y;
            if (sigma_sum != 0.0) out.terms.emplace_back(sigma_sum * ux, uy);
        }
        return out;
    };

    // probe-set operator scale for the coupling bound
    double opscale = 0.0;
    for (const auto& t : T.I1.terms) {
        for (std::size_t i = 0; i < Sx.states.size(); ++i)
            opscale = std::max(opscale, interior_norm(cx.get(t.x_op, Sx, static_cast<int>(i))));
        for (std::size_t j = 0; j < Sy.states.size(); ++j)
            opscale = std::max(opscale, interior_norm(cy.get(t.y_op, Sy, static_cast<int>(j))));
    }
    rep.eigen_coupling = detail::coupling_bound(rx, ry, opscale);

    for (const auto& pr : probe_list) {
        ProbeResidual out;
        out.i = pr.i;
        out.j = pr.j;
        out.energy = pr.energy;

        auto run = [&](const TwoAxisOp& I, double& resid, double& nrm, bool* annihilated) {
            SepState applied = applied_state(I, pr.i, pr.j);
            double n_applied = sep_norm(applied);
            double n_comm = sep_norm(commutator_state_cached(I, pr.i, pr.j));
            nrm = n_applied;
            if (n_applied < 1e-6) {  // probe states are unit-normalized
                if (annihilated) *annihilated = true;
                resid = 0.0;
                return;
            }
            resid = n_comm / n_applied;
        };
        double nk = 0.0;
        run(T.K, out.residual_K, nk, nullptr);
        run(T.I1, out.residual_I1, out.norm_I1, &out.annihilated_I1);
        run(T.I2, out.residual_I2, out.norm_I2, &out.annihilated_I2);
        rep.max_residual = std::max({rep.max_residual, out.residual_K, out.residual_I1, out.residual_I2});
        rep.probes.push_back(out);

        // degeneracy mapping: dominant eigenproduct component of I1 psi
        if (!out.annihilated_I1) {
            SepState applied = applied_state(T.I1, pr.i, pr.j);
            double total = sep_inner(applied, applied);
            MappingEntry me;
            me.i = pr.i;
            me.j = pr.j;
            for (std::size_t a = 0; a < Sx.states.size(); ++a)
                for (std::size_t b = 0; b < Sy.states.size(); ++b) {
                    double c = 0.0;
                    for (const auto& t : applied.terms)
                        c += inner_product(Sx.states[a], t.first) *
                             inner_product(Sy.states[b], t.second);
                    double share = c * c / total;
                    if (share > me.share) {
                        me.share = share;
                        me.a = static_cast<int>(a);
                        me.b = static_cast<int>(b);
                    }
                }
            if (me.a >= 0) {
                for (const auto& mult : multiplets) {
                    bool has_src = false, has_img = false;
                    for (const auto& mm : mult.members) {
                        if (mm.first == pr.i && mm.second == pr.j) has_src = true;
                        if (mm.first == me.a && mm.second == me.b) has_img = true;
                    }
                    if (has_src && has_img) me.within_multiplet = true;
                }
                rep.mapping.push_back(me);
            }
        }
    }

    // functional-independence proxy: normalized Gram of {H_t, K, I1} applications
    TwoAxisOp Ht;
    Ht.terms.push_back(detail::make_term(Lx.H, Ly.H, Lx.H, DiffOperator::identity(), 0.0, 0.0));
    Ht.terms.push_back(detail::make_term(Lx.H, Ly.H, DiffOperator::identity(), Ly.H, 0.0, 0.0));
    const TwoAxisOp* ops[3] = {&Ht, &T.K, &T.I1};
    double gram[3][3] = {};
    for (const auto& pr : probe_list) {
        SepState applied[3];
        for (int o = 0; o < 3; ++o) applied[o] = applied_state(*ops[o], pr.i, pr.j);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) gram[a][b] += sep_inner(applied[a], applied[b]);
    }
    double norm_diag[3];
    for (int a = 0; a < 3; ++a) norm_diag[a] = std::sqrt(std::max(gram[a][a], 1e-300));
    double gn[3][3];
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) gn[a][b] = gram[a][b] / (norm_diag[a] * norm_diag[b]);
    rep.independence_smin = detail::smallest_eig3(gn);

    rep.pass = rep.max_residual < 1e-5 && rep.independence_smin > 1e-8;
    return rep;
}

struct BracketReport {
    double measured_constant = 0.0;  // <I2 psi, [K, I1] psi> / ||I2 psi||^2
    double expected_constant = 0.0;  // 2 lambda
    double worst_relative = 0.0;
    bool pass = false;
};

inline BracketReport verify_I2_bracket(const IntegralTriple& T, const SpectrumResult& Sx,
                                       const SpectrumResult& Sy, int probes) {
    if (T.m != 1 || T.n != 1)
        throw std::invalid_argument("verify_I2_bracket: defined for m = n = 1");
    BracketReport rep;
    rep.expected_constant = 2.0 * T.lambda;
    auto probe_list = lowest_product_states(Sx, Sy, probes);
    detail::AxisCache cx, cy;
    double acc = 0.0;
    int used = 0;
    for (const auto& pr : probe_list) {
        // [K, P Q] = ([H_x,P]) Q - P ([H_y,Q]) expanded through the defects
        SepState bracket;
        for (const auto& t : T.I1.terms) {
            const GridFunction& ux = cx.get(t.x_op, Sx, pr.i);
            const GridFunction& uy = cy.get(t.y_op, Sy, pr.j);
            double coeff = t.sigma_x - t.sigma_y;
            if (coeff != 0.0) bracket.terms.emplace_back(coeff * ux, uy);
            bracket.terms.emplace_back(cx.get(t.defect_x, Sx, pr.i), uy);
            bracket.terms.emplace_back(-1.0 * ux, cy.get(t.defect_y, Sy, pr.j));
        }
        SepState i2psi;
        for (const auto& t : T.I2.terms)
            i2psi.terms.emplace_back(cx.get(t.x_op, Sx, pr.i), cy.get(t.y_op, Sy, pr.j));
        double n2 = sep_inner(i2psi, i2psi);
        if (n2 < 1e-12) continue;
        double c = sep_inner(i2psi, bracket) / n2;
        acc += c;
        ++used;
        rep.worst_relative = std::max(rep.worst_relative,
                                      std::abs(c - rep.expected_constant) /
                                          std::max(1e-300, std::abs(rep.expected_constant)));
    }
    if (used == 0) throw std::runtime_error("verify_I2_bracket: all probes annihilated");
    rep.measured_constant = acc / used;
    rep.pass = rep.worst_relative < 1e-6;
    return rep;
}

}  // namespace susy
