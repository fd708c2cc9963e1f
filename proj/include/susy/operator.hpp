#pragma once

// Variable-coefficient linear differential operators: sum_k c_k(x) d^k/dx^k
// with ScalarExpr coefficients. Composition, adjoint and commutators happen
// exactly at the coefficient level (Leibniz rule); grids enter only through
// apply/to_matrix.

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "susy/banded.hpp"
#include "susy/expr.hpp"
#include "susy/grid.hpp"
#include "susy/stencil.hpp"

namespace susy {

namespace detail {
inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}
}  // namespace detail

struct DiffOperator {
    std::map<int, Expr> terms;  // derivative order -> coefficient

    Expr coefficient(int k) const {
        auto it = terms.find(k);
        return it == terms.end() ? constant(0.0) : it->second;
    }

    // structural order: highest derivative carrying a non-literal-zero coefficient
    int order() const {
        int ord = -1;
        for (const auto& [k, c] : terms)
            if (!c.is_zero()) ord = ord > k ? ord : k;
        return ord;
    }

    static DiffOperator zero() { return {}; }

    static DiffOperator identity() {
        DiffOperator p;
        p.terms[0] = constant(1.0);
        return p;
    }

    static DiffOperator multiplication(const Expr& f) {
        DiffOperator p;
        p.terms[0] = f;
        return p;
    }

    static DiffOperator derivative(int k = 1) {
        DiffOperator p;
        p.terms[k] = constant(1.0);
        return p;
    }
};

// scale * (sign * d/dx + w); sign=+1 gives the lowering-type factor.
inline DiffOperator first_order(int sign, const Expr& w, double scale) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("first_order: sign must be +-1");
    DiffOperator p;
    p.terms[1] = constant(scale * sign);
    p.terms[0] = simplify(scale * w);
    return p;
}

inline DiffOperator op_add(const DiffOperator& a, const DiffOperator& b) {
    DiffOperator r = a;
    for (const auto& [k, c] : b.terms) {
        auto it = r.terms.find(k);
        if (it == r.terms.end()) r.terms[k] = c;
        else it->second = it->second + c;
    }
    for (auto& [k, c] : r.terms) c = simplify(c);
    std::erase_if(r.terms, [](const auto& kv) { return kv.second.is_zero(); });
    return r;
}

inline DiffOperator op_scale(const DiffOperator& a, double c) {
    DiffOperator r;
    for (const auto& [k, ck] : a.terms) {
        Expr s = simplify(c * ck);
        if (!s.is_zero()) r.terms[k] = s;
    }
    return r;
}

inline DiffOperator op_scale(const DiffOperator& a, const Expr& f) {
    DiffOperator r;
    for (const auto& [k, ck] : a.terms) {
        Expr s = simplify(f * ck);
        if (!s.is_zero()) r.terms[k] = s;
    }
    return r;
}

inline DiffOperator op_sub(const DiffOperator& a, const DiffOperator& b) {
    return op_add(a, op_scale(b, -1.0));
}

inline DiffOperator simplify_op(const DiffOperator& p) {
    DiffOperator r;
    for (const auto& [k, c] : p.terms) {
        Expr s = simplify(c);
        if (!s.is_zero()) r.terms[k] = s;
    }
    return r;
}

// Leibniz composition: (c d^k) (d d^m) = sum_j C(k,j) c d^(j)(d) d^(k+m-j)
inline DiffOperator compose(const DiffOperator& P, const DiffOperator& Q) {
    DiffOperator r;
    for (const auto& [k, c] : P.terms) {
        if (c.is_zero()) continue;
        for (const auto& [m, d] : Q.terms) {
            if (d.is_zero()) continue;
            Expr dj = d;
            for (int j = 0; j <= k; ++j) {
                Expr contrib = make_product({constant(detail::binomial(k, j)), c, dj});
                int ord = k + m - j;
                auto it = r.terms.find(ord);
                if (it == r.terms.end()) r.terms[ord] = contrib;
                else it->second = it->second + contrib;
                if (j < k) dj = diff(dj);
            }
        }
    }
    return simplify_op(r);
}

// formal L2 adjoint: sum_k (-1)^k d^k (c_k .) expanded to standard form
inline DiffOperator adjoint(const DiffOperator& P) {
    DiffOperator r;
    for (const auto& [k, c] : P.terms) {
        if (c.is_zero()) continue;
        double sgn = (k % 2 == 0) ? 1.0 : -1.0;
        Expr cj = c;
        for (int j = 0; j <= k; ++j) {
            Expr contrib = make_product({constant(sgn * detail::binomial(k, j)), cj});
            int ord = k - j;
            auto it = r.terms.find(ord);
            if (it == r.terms.end()) r.terms[ord] = contrib;
            else it->second = it->second + contrib;
            if (j < k) cj = diff(cj);
        }
    }
    return simplify_op(r);
}

inline DiffOperator commutator(const DiffOperator& P, const DiffOperator& Q) {
    return op_sub(compose(P, Q), compose(Q, P));
}

inline DiffOperator op_pow(const DiffOperator& P, int m) {
    if (m < 0) throw std::invalid_argument("op_pow: negative power");
    DiffOperator r = DiffOperator::identity();
    for (int i = 0; i < m; ++i) r = compose(r, P);
    return r;
}

// order measured after numeric-zero coefficient detection on probe points
inline int measured_order(const DiffOperator& P, const std::vector<double>& probes,
                          double rel_tol = 1e-8) {
    double scale = 0.0;
    std::map<int, double> sup;
    for (const auto& [k, c] : P.terms) {
        double s = max_abs_on(c, probes);
        sup[k] = s;
        scale = std::max(scale, s);
    }
    int ord = -1;
    for (const auto& [k, s] : sup)
        if (s > rel_tol * (scale > 1.0 ? scale : 1.0)) ord = std::max(ord, k);
    return ord;
}

namespace detail {

inline void check_apply_guard(const DiffOperator& P, const Grid& g) {
    if (P.order() > 8 && g.n < 1024)
        throw std::invalid_argument(
            "operator order above 8 needs at least 1024 grid points for the stencils");
}

// coefficient samples on a grid, memoized by (structure, grid); the same
// operators get applied to many states
inline const std::vector<double>& coefficient_samples(const Expr& c, const Grid& g) {
    struct Entry {
        Expr keepalive;
        std::vector<double> vals;
    };
    static std::unordered_map<Key128, Entry, Key128Hash> cache;
    KeyBuilder kb;
    kb.u64(c.key().a);
    kb.u64(c.key().b);
    kb.f64(g.x_min);
    kb.f64(g.x_max);
    kb.u64(static_cast<std::uint64_t>(g.n));
    Key128 key = kb.key();
    auto it = cache.find(key);
    if (it != cache.end()) return it->second.vals;
    auto vals = eval_many(c, g.points());
    for (double v : vals)
        if (!std::isfinite(v))
            throw std::runtime_error("operator coefficient not finite on the grid");
    return cache.emplace(key, Entry{c, std::move(vals)}).first->second.vals;
}

}  // namespace detail

// structural equality of operators (orders and coefficient keys)
inline bool same_structure(const DiffOperator& a, const DiffOperator& b) {
    if (a.terms.size() != b.terms.size()) return false;
    auto it2 = b.terms.begin();
    for (auto it1 = a.terms.begin(); it1 != a.terms.end(); ++it1, ++it2)
        if (it1->first != it2->first || !(it1->second.key() == it2->second.key())) return false;
    return true;
}

// P f on the grid with order>=8 centered stencils; zero (Dirichlet) extension
// outside the box. Boundary bands are inaccurate by construction; callers
// measure with interior norms.
inline GridFunction apply(const DiffOperator& P, const GridFunction& f) {
    const Grid& g = f.grid;
    detail::check_apply_guard(P, g);
    std::vector<double> out(static_cast<std::size_t>(g.n), 0.0);
    for (const auto& [k, c] : P.terms) {
        if (c.is_zero()) continue;
        const auto& cv = detail::coefficient_samples(c, g);
        if (k == 0) {
            for (int i = 0; i < g.n; ++i)
                out[static_cast<std::size_t>(i)] +=
                    cv[static_cast<std::size_t>(i)] * f.values[static_cast<std::size_t>(i)];
            continue;
        }
        auto w = centered_weights(k);
        int m = stencil_half_width(k);
        double hk = detail::ipow(g.spacing, k);
        for (int i = 0; i < g.n; ++i) {
            double s = 0.0;
            for (int off = -m; off <= m; ++off) {
                int j = i + off;
                if (j < 0 || j >= g.n) continue;
                s += w[static_cast<std::size_t>(off + m)] * f.values[static_cast<std::size_t>(j)];
            }
            out[static_cast<std::size_t>(i)] += cv[static_cast<std::size_t>(i)] * s / hk;
        }
    }
    return GridFunction(g, std::move(out));
}

// banded matrix of P with zero-Dirichlet truncation at the box edges
inline BandMatrix to_matrix(const DiffOperator& P, const Grid& g) {
    detail::check_apply_guard(P, g);
    int bw = 0;
    for (const auto& [k, c] : P.terms)
        if (!c.is_zero()) bw = std::max(bw, stencil_half_width(k));
    BandMatrix M(g.n, bw);
    for (const auto& [k, c] : P.terms) {
        if (c.is_zero()) continue;
        const auto& cv = detail::coefficient_samples(c, g);
        if (k == 0) {
            for (int i = 0; i < g.n; ++i) M.at(i, i) += cv[static_cast<std::size_t>(i)];
            continue;
        }
        auto w = centered_weights(k);
        int m = stencil_half_width(k);
        double hk = detail::ipow(g.spacing, k);
        for (int i = 0; i < g.n; ++i)
            for (int off = -m; off <= m; ++off) {
                int j = i + off;
                if (j < 0 || j >= g.n) continue;
                M.at(i, j) += cv[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(off + m)] / hk;
            }
    }
    return M;
}

}  // namespace susy
