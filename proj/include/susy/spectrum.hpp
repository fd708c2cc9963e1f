#pragma once

// Discretized 1-D eigenproblems and separable 2-D spectrum assembly.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "susy/banded.hpp"
#include "susy/expr.hpp"
#include "susy/grid.hpp"
#include "susy/operator.hpp"

namespace susy {

inline DiffOperator hamiltonian(const Expr& V) {
    DiffOperator H;
    H.terms[2] = constant(-0.5);
    H.terms[0] = simplify(V);
    return H;
}

struct SpectrumResult {
    Grid grid;
    std::vector<double> energies;          // ascending
    std::vector<GridFunction> states;      // quadrature-normalized
    std::vector<double> residuals;         // ||(H-E)psi|| / ||psi||, vector 2-norm
};

inline SpectrumResult eigensolve(const DiffOperator& H, const Grid& grid, int k) {
    if (k < 1 || k > 40) throw std::invalid_argument("eigensolve: 1 <= k <= 40");
    // formal self-adjointness gate
    DiffOperator defect = op_sub(adjoint(H), H);
    auto probes = probe_points(grid.x_min * 0.75, grid.x_max * 0.75, 13);
    double worst = 0.0, scale = 0.0;
    for (const auto& [ord, c] : defect.terms) {
        (void)ord;
        worst = std::max(worst, max_abs_on(c, probes));
    }
    for (const auto& [ord, c] : H.terms) {
        (void)ord;
        scale = std::max(scale, max_abs_on(c, probes));
    }
    if (worst > 1e-8 * (scale > 1.0 ? scale : 1.0))
        throw std::invalid_argument("eigensolve: operator is not formally self-adjoint");

    BandMatrix M = to_matrix(H, grid);
    auto eig = lowest_eigenpairs(M, k, 1e-8);

    SpectrumResult r;
    r.grid = grid;
    r.energies = eig.eigenvalues;
    auto w = grid.quadrature_weights();
    for (int c = 0; c < k; ++c) {
        auto& v = eig.eigenvectors[static_cast<std::size_t>(c)];
        // residual in the plain vector 2-norm before any rescaling
        auto hv = M.matvec(v);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < grid.n; ++i) {
            double d = hv[static_cast<std::size_t>(i)] -
                       r.energies[static_cast<std::size_t>(c)] * v[static_cast<std::size_t>(i)];
            num += d * d;
            den += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
        }
        r.residuals.push_back(std::sqrt(num / den));
        // quadrature normalization and a deterministic sign
        double q = 0.0;
        for (int i = 0; i < grid.n; ++i)
            q += w[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)] *
                 v[static_cast<std::size_t>(i)];
        double scale = 1.0 / std::sqrt(q);
        int imax = 0;
        for (int i = 0; i < grid.n; ++i)
            if (std::abs(v[static_cast<std::size_t>(i)]) >
                std::abs(v[static_cast<std::size_t>(imax)]))
                imax = i;
        if (v[static_cast<std::size_t>(imax)] < 0) scale = -scale;
        std::vector<double> vals(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) vals[i] = v[i] * scale;
        r.states.emplace_back(grid, std::move(vals));
    }
    return r;
}

// zero-mode rule: near-zero energy together with an algebraic kernel check
inline bool is_zero_mode(double energy, const DiffOperator& lowering, const GridFunction& psi) {
    if (std::abs(energy) >= 1e-6) return false;
    GridFunction ap = apply(lowering, psi);
    return interior_norm(ap) / interior_norm(psi) < 1e-5;
}

struct Multiplet {
    double energy = 0.0;                       // class representative
    std::vector<std::pair<int, int>> members;  // (index_x, index_y)
};

inline std::vector<Multiplet> separable_2d(const SpectrumResult& Sx, const SpectrumResult& Sy,
                                           double tol) {
    if (tol < 0.0) throw std::invalid_argument("separable_2d: negative tolerance");
    double resid = 0.0;
    for (double r : Sx.residuals) resid = std::max(resid, r);
    for (double r : Sy.residuals) resid = std::max(resid, r);
    if (tol > 0.0 && tol < resid)
        throw std::invalid_argument("separable_2d: tolerance below eigenvalue accuracy");

    struct Entry {
        double e;
        int i, j;
    };
    std::vector<Entry> all;
    for (std::size_t i = 0; i < Sx.energies.size(); ++i)
        for (std::size_t j = 0; j < Sy.energies.size(); ++j)
            all.push_back({Sx.energies[i] + Sy.energies[j], static_cast<int>(i), static_cast<int>(j)});
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) {
        if (a.e != b.e) return a.e < b.e;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });

    std::vector<Multiplet> out;
    for (const auto& en : all) {
        bool fresh = out.empty() || tol == 0.0;
        if (!fresh) {
            double ref = out.back().energy;
            double width = tol * std::max(1.0, std::abs(ref));
            fresh = std::abs(en.e - ref) > width;
        }
        if (fresh) out.push_back({en.e, {}});
        out.back().members.emplace_back(en.i, en.j);
    }
    return out;
}

}  // namespace susy
