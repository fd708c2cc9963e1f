#pragma once

// Expression trees for coefficient functions of one real variable, closed
// under differentiation. Node kinds: constants, the variable, sums, products,
// quotients, integer powers, exp, erf, quadrature-backed cumulative
// integrals, Painleve-IV transcendent nodes and explicit-derivative wrappers.
//
// Trees are immutable DAGs behind shared_ptr; everything here is pure.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "susy/grid.hpp"

namespace susy {

// ---------------------------------------------------------------------------
// structural keys (two independent FNV-1a streams; used for term collection)

struct Key128 {
    std::uint64_t a = 0, b = 0;
    friend bool operator==(const Key128&, const Key128&) = default;
    friend auto operator<=>(const Key128&, const Key128&) = default;
};

struct Key128Hash {
    std::size_t operator()(const Key128& k) const {
        return static_cast<std::size_t>(k.a ^ (k.b * 0x9e3779b97f4a7c15ull));
    }
};

namespace detail {

class KeyBuilder {
  public:
    void bytes(const void* p, std::size_t n) {
        const auto* c = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            a_ = (a_ ^ c[i]) * 0x100000001b3ull;
            b_ = (b_ ^ c[i]) * 0x00000100000001b3ull ^ (b_ >> 29);
        }
    }
    void u64(std::uint64_t v) { bytes(&v, 8); }
    void f64(double v) {
        if (v == 0.0) v = 0.0;  // collapse -0.0
        std::uint64_t u;
        std::memcpy(&u, &v, 8);
        u64(u);
    }
    Key128 key() const { return {a_, b_}; }

  private:
    std::uint64_t a_ = 0xcbf29ce484222325ull;
    std::uint64_t b_ = 0x84222325cbf29ce4ull;
};

// content-derived ids keep structural keys (and therefore every collection
// order and rounding pattern) reproducible across runs
inline std::uint64_t content_id(const void* data, std::size_t bytes, std::uint64_t seed) {
    const auto* c = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull ^ seed;
    for (std::size_t i = 0; i < bytes; ++i) h = (h ^ c[i]) * 0x100000001b3ull;
    return h;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// cumulative-integral table: F(x) = int_{x0}^{x} g, nodes on x0 + k*h

struct CumTable {
    double x0 = 0.0;
    double h = 0.0;
    long k_lo = 0, k_hi = 0;
    std::vector<double> F, g;  // index i corresponds to k = k_lo + i
    std::uint64_t id = 0;

    double lo() const { return x0 + static_cast<double>(k_lo) * h; }
    double hi() const { return x0 + static_cast<double>(k_hi) * h; }

    double node(long k) const { return x0 + static_cast<double>(k) * h; }

    // Hermite-cubic interpolation; exact derivative data g makes it O(h^4).
    double eval(double x) const {
        double s = (x - x0) / h;
        double kf = std::floor(s);
        long k = static_cast<long>(kf);
        if (k < k_lo || k >= k_hi) {
            if (x == hi()) { k = k_hi - 1; kf = static_cast<double>(k); }
            else
                throw std::domain_error("cumulative integral evaluated outside its table at x=" +
                                        std::to_string(x));
        }
        std::size_t i = static_cast<std::size_t>(k - k_lo);
        double t = s - kf;
        double t2 = t * t, t3 = t2 * t;
        return F[i] * (2 * t3 - 3 * t2 + 1) + h * g[i] * (t3 - 2 * t2 + t) +
               F[i + 1] * (-2 * t3 + 3 * t2) + h * g[i + 1] * (t3 - t2);
    }
};

namespace detail {

// weights integrating the quartic through nodes {s0..s0+4} over cell [0,1]
inline std::array<double, 5> quartic_cell_weights(int s0) {
    double m[5][6];
    for (int p = 0; p < 5; ++p) {
        for (int j = 0; j < 5; ++j) {
            double s = static_cast<double>(s0 + j);
            m[p][j] = std::pow(s, p);
        }
        m[p][5] = 1.0 / (p + 1);
    }
    for (int c = 0; c < 5; ++c) {  // Gaussian elimination with partial pivoting
        int piv = c;
        for (int r = c + 1; r < 5; ++r)
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
        for (int j = 0; j < 6; ++j) std::swap(m[c][j], m[piv][j]);
        for (int r = 0; r < 5; ++r) {
            if (r == c) continue;
            double f = m[r][c] / m[c][c];
            for (int j = c; j < 6; ++j) m[r][j] -= f * m[c][j];
        }
    }
    std::array<double, 5> w{};
    for (int j = 0; j < 5; ++j) w[static_cast<std::size_t>(j)] = m[j][5] / m[j][j];
    return w;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Painleve-IV transcendent source (implemented in painleve.hpp)

class P4Function {
  public:
    virtual ~P4Function() = default;
    virtual double value(double z) const = 0;
    virtual double slope(double z) const = 0;
    virtual double alpha() const = 0;
    virtual double beta_param() const = 0;
    virtual double z_lo() const = 0;
    virtual double z_hi() const = 0;
    // linear special solutions short-circuit the second-derivative rewrite,
    // whose beta/f term would otherwise hit the zero of f
    virtual bool linear_in_z() const { return false; }
    std::uint64_t id = 0;  // content hash, set by the implementation
};

// ---------------------------------------------------------------------------
// nodes

enum class Kind : unsigned char {
    Constant,
    Var,
    Sum,
    Product,
    Quotient,
    Power,
    Exp,
    Erf,
    CumInt,
    P4,
    RiccatiPhi,
    DerivWrap
};

class Expr;

struct Node {
    Kind kind;
    double value = 0.0;  // Constant
    int exponent = 0;    // Power
    int p4_deriv = 0;    // P4: 0 -> f(arg), 1 -> f'(arg)
    std::vector<Expr> kids;
    std::shared_ptr<const CumTable> table;
    std::shared_ptr<const P4Function> p4;
    Key128 key;
};

class Expr {
  public:
    Expr() : p_(zero_node()) {}
    explicit Expr(std::shared_ptr<const Node> p) : p_(std::move(p)) {}

    const Node& node() const { return *p_; }
    const Node* raw() const { return p_.get(); }
    Kind kind() const { return p_->kind; }
    const Key128& key() const { return p_->key; }

    bool is_constant() const { return p_->kind == Kind::Constant; }
    bool is_zero() const { return is_constant() && p_->value == 0.0; }
    bool is_one() const { return is_constant() && p_->value == 1.0; }
    double constant_value() const { return p_->value; }

  private:
    static const std::shared_ptr<const Node>& zero_node();
    std::shared_ptr<const Node> p_;
};

namespace detail {

inline Key128 node_key(const Node& n) {
    KeyBuilder kb;
    auto tag = static_cast<unsigned char>(n.kind);
    kb.bytes(&tag, 1);
    switch (n.kind) {
        case Kind::Constant: kb.f64(n.value); break;
        case Kind::Power: kb.u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(n.exponent))); break;
        case Kind::CumInt: kb.u64(n.table->id); kb.f64(n.table->x0); break;
        case Kind::P4:
            kb.u64(n.p4->id);
            kb.u64(static_cast<std::uint64_t>(n.p4_deriv));
            break;
        default: break;
    }
    for (const auto& k : n.kids) {
        kb.u64(k.key().a);
        kb.u64(k.key().b);
    }
    return kb.key();
}

inline Expr make_node(Node n) {
    n.key = node_key(n);
    return Expr(std::make_shared<const Node>(std::move(n)));
}

}  // namespace detail

inline Expr constant(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("constant expression must be finite");
    Node n;
    n.kind = Kind::Constant;
    n.value = v;
    return detail::make_node(std::move(n));
}

inline const std::shared_ptr<const Node>& Expr::zero_node() {
    static const std::shared_ptr<const Node> z = [] {
        Node n;
        n.kind = Kind::Constant;
        n.value = 0.0;
        n.key = detail::node_key(n);
        return std::make_shared<const Node>(std::move(n));
    }();
    return z;
}

inline Expr var_x() {
    Node n;
    n.kind = Kind::Var;
    return detail::make_node(std::move(n));
}

inline Expr make_sum(std::vector<Expr> terms) {
    if (terms.empty()) return constant(0.0);
    if (terms.size() == 1) return terms.front();
    Node n;
    n.kind = Kind::Sum;
    n.kids = std::move(terms);
    return detail::make_node(std::move(n));
}

inline Expr make_product(std::vector<Expr> factors) {
    if (factors.empty()) return constant(1.0);
    if (factors.size() == 1) return factors.front();
    Node n;
    n.kind = Kind::Product;
    n.kids = std::move(factors);
    return detail::make_node(std::move(n));
}

inline Expr operator+(const Expr& a, const Expr& b) { return make_sum({a, b}); }
inline Expr operator-(const Expr& a, const Expr& b) {
    return make_sum({a, make_product({constant(-1.0), b})});
}
inline Expr operator*(const Expr& a, const Expr& b) { return make_product({a, b}); }
inline Expr operator*(double c, const Expr& a) { return make_product({constant(c), a}); }
inline Expr operator-(const Expr& a) { return make_product({constant(-1.0), a}); }

inline Expr quotient(const Expr& num, const Expr& den) {
    Node n;
    n.kind = Kind::Quotient;
    n.kids = {num, den};
    return detail::make_node(std::move(n));
}
inline Expr operator/(const Expr& a, const Expr& b) { return quotient(a, b); }

inline Expr pow_i(const Expr& base, int k) {
    if (k == 0) return constant(1.0);
    if (k == 1) return base;
    Node n;
    n.kind = Kind::Power;
    n.exponent = k;
    n.kids = {base};
    return detail::make_node(std::move(n));
}

inline Expr exp_e(const Expr& arg) {
    Node n;
    n.kind = Kind::Exp;
    n.kids = {arg};
    return detail::make_node(std::move(n));
}

inline Expr erf_e(const Expr& arg) {
    Node n;
    n.kind = Kind::Erf;
    n.kids = {arg};
    return detail::make_node(std::move(n));
}

inline Expr deriv_wrap(const Expr& value, const Expr& derivative) {
    Node n;
    n.kind = Kind::DerivWrap;
    n.kids = {value, derivative};
    return detail::make_node(std::move(n));
}

inline Expr p4_value(std::shared_ptr<const P4Function> f, const Expr& arg) {
    Node n;
    n.kind = Kind::P4;
    n.p4 = std::move(f);
    n.p4_deriv = 0;
    n.kids = {arg};
    return detail::make_node(std::move(n));
}

inline Expr p4_slope(std::shared_ptr<const P4Function> f, const Expr& arg) {
    Node n;
    n.kind = Kind::P4;
    n.p4 = std::move(f);
    n.p4_deriv = 1;
    n.kids = {arg};
    return detail::make_node(std::move(n));
}

// phi = 1/z for the isospectral family. Evaluation divides by the z tree once;
// differentiation closes through phi' = -phi^2 - 2 beta0 phi, keeping every
// derivative polynomial in the decaying phi (powers of the growing z would
// overflow at the box edges).
inline Expr riccati_phi(const Expr& beta0, const Expr& z) {
    Node n;
    n.kind = Kind::RiccatiPhi;
    n.kids = {beta0, z};
    return detail::make_node(std::move(n));
}

// ---------------------------------------------------------------------------
// evaluation

namespace detail {

inline double ipow(double v, int k) {
    if (k < 0) return 1.0 / ipow(v, -k);
    double r = 1.0;
    while (k > 0) {
        if (k & 1) r *= v;
        v *= v;
        k >>= 1;
    }
    return r;
}

inline double eval_node(const Node& n, double x);

inline double eval_expr(const Expr& e, double x) { return eval_node(e.node(), x); }

inline double eval_node(const Node& n, double x) {
    switch (n.kind) {
        case Kind::Constant: return n.value;
        case Kind::Var: return x;
        case Kind::Sum: {
            double s = 0.0;
            for (const auto& k : n.kids) s += eval_expr(k, x);
            return s;
        }
        case Kind::Product: {
            double p = 1.0;
            for (const auto& k : n.kids) p *= eval_expr(k, x);
            return p;
        }
        case Kind::Quotient: {
            double den = eval_expr(n.kids[1], x);
            if (den == 0.0)
                throw std::domain_error("quotient pole at x=" + std::to_string(x));
            return eval_expr(n.kids[0], x) / den;
        }
        case Kind::Power: return ipow(eval_expr(n.kids[0], x), n.exponent);
        case Kind::Exp: return std::exp(eval_expr(n.kids[0], x));
        case Kind::Erf: return std::erf(eval_expr(n.kids[0], x));
        case Kind::CumInt: return n.table->eval(x);
        case Kind::P4: {
            double z = eval_expr(n.kids[0], x);
            if (z < n.p4->z_lo() || z > n.p4->z_hi())
                throw std::domain_error("Painleve-IV argument outside solution domain: z=" +
                                        std::to_string(z));
            return n.p4_deriv == 0 ? n.p4->value(z) : n.p4->slope(z);
        }
        case Kind::RiccatiPhi: {
            double zv = eval_expr(n.kids[1], x);
            if (zv == 0.0)
                throw std::domain_error("singular family member: z vanishes at x=" +
                                        std::to_string(x));
            return 1.0 / zv;
        }
        case Kind::DerivWrap: return eval_expr(n.kids[0], x);
    }
    throw std::logic_error("unreachable expression kind");
}

}  // namespace detail

inline double eval(const Expr& e, double x) { return detail::eval_node(e.node(), x); }

// vectorized evaluation with sub-DAG memoization
inline std::vector<double> eval_many(const Expr& e, const std::vector<double>& xs) {
    std::unordered_map<const Node*, std::vector<double>> memo;
    auto rec = [&](auto&& self, const Expr& ex) -> const std::vector<double>& {
        auto it = memo.find(ex.raw());
        if (it != memo.end()) return it->second;
        const Node& n = ex.node();
        std::vector<double> out(xs.size());
        switch (n.kind) {
            case Kind::Constant:
                std::fill(out.begin(), out.end(), n.value);
                break;
            case Kind::Var: out = xs; break;
            case Kind::Sum: {
                std::fill(out.begin(), out.end(), 0.0);
                for (const auto& k : n.kids) {
                    const auto& kv = self(self, k);
                    for (std::size_t i = 0; i < xs.size(); ++i) out[i] += kv[i];
                }
                break;
            }
            case Kind::Product: {
                std::fill(out.begin(), out.end(), 1.0);
                for (const auto& k : n.kids) {
                    const auto& kv = self(self, k);
                    for (std::size_t i = 0; i < xs.size(); ++i) out[i] *= kv[i];
                }
                break;
            }
            case Kind::Quotient: {
                const auto& num = self(self, n.kids[0]);
                const auto& den = self(self, n.kids[1]);
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    if (den[i] == 0.0)
                        throw std::domain_error("quotient pole at x=" + std::to_string(xs[i]));
                    out[i] = num[i] / den[i];
                }
                break;
            }
            case Kind::Power: {
                const auto& b = self(self, n.kids[0]);
                for (std::size_t i = 0; i < xs.size(); ++i) out[i] = detail::ipow(b[i], n.exponent);
                break;
            }
            case Kind::Exp: {
                const auto& a = self(self, n.kids[0]);
                for (std::size_t i = 0; i < xs.size(); ++i) out[i] = std::exp(a[i]);
                break;
            }
            case Kind::Erf: {
                const auto& a = self(self, n.kids[0]);
                for (std::size_t i = 0; i < xs.size(); ++i) out[i] = std::erf(a[i]);
                break;
            }
            case Kind::CumInt:
                for (std::size_t i = 0; i < xs.size(); ++i) out[i] = n.table->eval(xs[i]);
                break;
            case Kind::P4: {
                const auto& z = self(self, n.kids[0]);
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    if (z[i] < n.p4->z_lo() || z[i] > n.p4->z_hi())
                        throw std::domain_error("Painleve-IV argument outside solution domain");
                    out[i] = n.p4_deriv == 0 ? n.p4->value(z[i]) : n.p4->slope(z[i]);
                }
                break;
            }
            case Kind::RiccatiPhi: {
                const auto& z = self(self, n.kids[1]);
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    if (z[i] == 0.0)
                        throw std::domain_error("singular family member: z vanishes at x=" +
                                                std::to_string(xs[i]));
                    out[i] = 1.0 / z[i];
                }
                break;
            }
            case Kind::DerivWrap: out = self(self, n.kids[0]); break;
        }
        return memo.emplace(ex.raw(), std::move(out)).first->second;
    };
    return rec(rec, e);
}

// ---------------------------------------------------------------------------
// cumulative-integral node construction

// Table nodes sit on the lattice x0 + k*h so F(x0) = 0 holds exactly.
inline std::shared_ptr<const CumTable> build_cum_table(const Expr& integrand, double x0,
                                                       double lo, double hi, int points) {
    if (!(lo < hi)) throw std::invalid_argument("cumulative integral: bad domain");
    if (points < 64) points = 64;
    auto tbl = std::make_shared<CumTable>();
    tbl->x0 = x0;
    tbl->h = (hi - lo) / points;
    tbl->k_lo = static_cast<long>(std::floor((lo - x0) / tbl->h)) - 2;
    tbl->k_hi = static_cast<long>(std::ceil((hi - x0) / tbl->h)) + 2;
    std::size_t m = static_cast<std::size_t>(tbl->k_hi - tbl->k_lo) + 1;
    std::vector<double> nodes(m);
    for (std::size_t i = 0; i < m; ++i)
        nodes[i] = tbl->node(tbl->k_lo + static_cast<long>(i));
    tbl->g = eval_many(integrand, nodes);
    for (double v : tbl->g)
        if (!std::isfinite(v))
            throw std::runtime_error("cumulative integral: integrand not finite on the domain");

    static const auto w_c = detail::quartic_cell_weights(-2);
    static const auto w_l0 = detail::quartic_cell_weights(0);
    static const auto w_l1 = detail::quartic_cell_weights(-1);
    static const auto w_r0 = detail::quartic_cell_weights(-4);
    static const auto w_r1 = detail::quartic_cell_weights(-3);
    auto cell = [&](std::size_t i) {  // integral over [node_i, node_{i+1}]
        const std::array<double, 5>* w = &w_c;
        std::size_t base = i - 2;
        if (i == 0) { w = &w_l0; base = 0; }
        else if (i == 1) { w = &w_l1; base = 0; }
        else if (i == m - 2) { w = &w_r0; base = m - 5; }
        else if (i == m - 3) { w = &w_r1; base = m - 5; }
        double s = 0.0;
        for (std::size_t j = 0; j < 5; ++j) s += (*w)[j] * tbl->g[base + j];
        return s * tbl->h;
    };

    tbl->F.assign(m, 0.0);
    std::size_t anchor = static_cast<std::size_t>(-tbl->k_lo);
    for (std::size_t i = anchor; i + 1 < m; ++i) tbl->F[i + 1] = tbl->F[i] + cell(i);
    for (std::size_t i = anchor; i > 0; --i) tbl->F[i - 1] = tbl->F[i] - cell(i - 1);
    tbl->id = detail::content_id(tbl->g.data(), tbl->g.size() * sizeof(double),
                                 detail::content_id(&tbl->x0, sizeof(double),
                                                    static_cast<std::uint64_t>(tbl->k_lo)));
    return tbl;
}

inline Expr cumulative_integral_expr(const Expr& integrand, double x0, double lo, double hi,
                                     int points = 8192) {
    Node n;
    n.kind = Kind::CumInt;
    n.kids = {integrand};
    n.table = build_cum_table(integrand, x0, lo, hi, points);
    return detail::make_node(std::move(n));
}

// grid-core operation: F(x_i) = int_{x0}^{x_i} f
inline GridFunction cumulative_integral(const Expr& f, double x0, const Grid& grid) {
    double lo = std::min(grid.x_min, x0), hi = std::max(grid.x_max, x0);
    Expr F = cumulative_integral_expr(f, x0, lo, hi, std::max(4 * grid.n, 4096));
    return GridFunction(grid, eval_many(F, grid.points()));
}

// ---------------------------------------------------------------------------
// differentiation

namespace detail {

struct DiffCache {
    std::unordered_map<Key128, Expr, Key128Hash>& memo;
};

inline Expr diff_rec(const Expr& e, DiffCache& cache);

inline Expr diff_kids_product(const std::vector<Expr>& kids, DiffCache& cache) {
    std::vector<Expr> terms;
    for (std::size_t i = 0; i < kids.size(); ++i) {
        std::vector<Expr> fs;
        fs.reserve(kids.size());
        for (std::size_t j = 0; j < kids.size(); ++j)
            fs.push_back(j == i ? diff_rec(kids[j], cache) : kids[j]);
        terms.push_back(make_product(std::move(fs)));
    }
    return make_sum(std::move(terms));
}

inline Expr diff_rec(const Expr& e, DiffCache& cache) {
    auto it = cache.memo.find(e.key());
    if (it != cache.memo.end()) return it->second;
    const Node& n = e.node();
    Expr out;
    switch (n.kind) {
        case Kind::Constant: out = constant(0.0); break;
        case Kind::Var: out = constant(1.0); break;
        case Kind::Sum: {
            std::vector<Expr> ts;
            ts.reserve(n.kids.size());
            for (const auto& k : n.kids) ts.push_back(diff_rec(k, cache));
            out = make_sum(std::move(ts));
            break;
        }
        case Kind::Product: out = diff_kids_product(n.kids, cache); break;
        case Kind::Quotient: {
            const Expr& u = n.kids[0];
            const Expr& v = n.kids[1];
            Expr up = diff_rec(u, cache), vp = diff_rec(v, cache);
            out = quotient(up * v - u * vp, pow_i(v, 2));
            break;
        }
        case Kind::Power: {
            const Expr& u = n.kids[0];
            out = make_product({constant(static_cast<double>(n.exponent)),
                                pow_i(u, n.exponent - 1), diff_rec(u, cache)});
            break;
        }
        case Kind::Exp: out = e * diff_rec(n.kids[0], cache); break;
        case Kind::Erf: {
            const Expr& u = n.kids[0];
            out = make_product({constant(2.0 / std::sqrt(std::numbers::pi)),
                                exp_e(-pow_i(u, 2)), diff_rec(u, cache)});
            break;
        }
        case Kind::CumInt: out = n.kids[0]; break;
        case Kind::P4: {
            const Expr& z = n.kids[0];
            Expr zp = diff_rec(z, cache);
            if (n.p4_deriv == 0) {
                out = p4_slope(n.p4, z) * zp;
            } else if (n.p4->linear_in_z()) {
                out = constant(0.0);
            } else {
                // second derivative rewritten through the Painleve-IV equation:
                // f'' = f'^2/(2f) + (3/2)f^3 + 4zf^2 + 2(z^2 - alpha)f + beta/f
                Expr f = p4_value(n.p4, z);
                Expr fp = p4_slope(n.p4, z);
                Expr rhs = quotient(pow_i(fp, 2), 2.0 * f) + 1.5 * pow_i(f, 3) +
                           make_product({constant(4.0), z, pow_i(f, 2)}) +
                           2.0 * ((pow_i(z, 2) - constant(n.p4->alpha())) * f) +
                           quotient(constant(n.p4->beta_param()), f);
                out = rhs * zp;
            }
            break;
        }
        case Kind::RiccatiPhi: {
            const Expr& beta0 = n.kids[0];
            out = make_sum({make_product({constant(-1.0), pow_i(e, 2)}),
                            make_product({constant(-2.0), beta0, e})});
            break;
        }
        case Kind::DerivWrap: out = n.kids[1]; break;
    }
    cache.memo.emplace(e.key(), out);
    return out;
}

}  // namespace detail

// Differentiation results are memoized by structural key: operator
// composition differentiates the same coefficient trees over and over.
inline Expr diff(const Expr& e) {
    static std::unordered_map<Key128, Expr, Key128Hash> global;
    detail::DiffCache cache{global};
    return detail::diff_rec(e, cache);
}

// ---------------------------------------------------------------------------
// simplification: flatten, fold constants, collect like terms and factors

namespace detail {

inline Expr simplify_rec(const Expr& e, std::unordered_map<Key128, Expr, Key128Hash>& memo);

// decompose a simplified term into (numeric coefficient, residual factors)
inline std::pair<double, std::vector<Expr>> split_coeff(const Expr& t) {
    if (t.kind() == Kind::Product) {
        double c = 1.0;
        std::vector<Expr> rest;
        for (const auto& k : t.node().kids) {
            if (k.is_constant()) c *= k.constant_value();
            else rest.push_back(k);
        }
        return {c, std::move(rest)};
    }
    if (t.is_constant()) return {t.constant_value(), {}};
    return {1.0, {t}};
}

inline Key128 factors_key(const std::vector<Expr>& fs) {
    KeyBuilder kb;
    for (const auto& f : fs) {
        kb.u64(f.key().a);
        kb.u64(f.key().b);
    }
    return kb.key();
}

inline Expr rebuild_term(double c, const std::vector<Expr>& fs) {
    if (fs.empty()) return constant(c);
    if (c == 1.0 && fs.size() == 1) return fs.front();
    std::vector<Expr> out;
    if (c != 1.0) out.push_back(constant(c));
    out.insert(out.end(), fs.begin(), fs.end());
    return make_product(std::move(out));
}

inline Expr simplify_sum(const std::vector<Expr>& kids) {
    double const_acc = 0.0;
    std::map<Key128, std::pair<double, std::vector<Expr>>> collected;
    auto add_term = [&](const Expr& t) {
        auto [c, rest] = split_coeff(t);
        if (rest.empty()) {
            const_acc += c;
            return;
        }
        Key128 k = factors_key(rest);
        auto it = collected.find(k);
        if (it == collected.end()) collected.emplace(k, std::make_pair(c, std::move(rest)));
        else it->second.first += c;
    };
    for (const auto& k : kids) {
        if (k.kind() == Kind::Sum)
            for (const auto& kk : k.node().kids) add_term(kk);
        else add_term(k);
    }
    std::vector<Expr> terms;
    if (const_acc != 0.0) terms.push_back(constant(const_acc));
    for (const auto& [key, cf] : collected) {
        (void)key;
        if (cf.first == 0.0) continue;
        terms.push_back(rebuild_term(cf.first, cf.second));
    }
    return make_sum(std::move(terms));
}

inline Expr simplify_power(const Expr& base, int k, std::unordered_map<Key128, Expr, Key128Hash>& memo);

// Products merge nested products, powers and quotients into one canonical
// numerator/denominator pair with signed exponents, so structurally equal
// rational factors collect and cancel.
inline Expr simplify_product(const std::vector<Expr>& kids,
                             std::unordered_map<Key128, Expr, Key128Hash>& memo) {
    double cnum = 1.0, cden = 1.0;
    std::map<Key128, std::pair<Expr, int>> powers;  // base key -> (base, signed exponent)
    auto add_base = [&](const Expr& base, int e) {
        auto it = powers.find(base.key());
        if (it == powers.end()) powers.emplace(base.key(), std::make_pair(base, e));
        else it->second.second += e;
    };
    auto add = [&](auto&& self, const Expr& f, int dir) -> void {
        if (f.is_constant()) {
            (dir > 0 ? cnum : cden) *= f.constant_value();
            return;
        }
        switch (f.kind()) {
            case Kind::Product:
                for (const auto& kk : f.node().kids) self(self, kk, dir);
                return;
            case Kind::Quotient:
                self(self, f.node().kids[0], dir);
                self(self, f.node().kids[1], -dir);
                return;
            case Kind::Power:
                add_base(f.node().kids[0], dir * f.node().exponent);
                return;
            default: add_base(f, dir); return;
        }
    };
    for (const auto& k : kids) add(add, k, +1);
    if (cden == 0.0) throw std::domain_error("division by the zero expression");
    if (cnum == 0.0) return constant(0.0);
    double c = cnum / cden;
    std::vector<Expr> num, den;
    for (const auto& [key, be] : powers) {
        (void)key;
        if (be.second == 0) continue;
        Expr p = simplify_power(be.first, std::abs(be.second), memo);
        (be.second > 0 ? num : den).push_back(p);
    }
    std::sort(num.begin(), num.end(), [](const Expr& a, const Expr& b) { return a.key() < b.key(); });
    std::sort(den.begin(), den.end(), [](const Expr& a, const Expr& b) { return a.key() < b.key(); });
    Expr numerator = rebuild_term(c, num);
    if (den.empty()) return numerator;
    return quotient(numerator, den.size() == 1 ? den.front() : make_product(std::move(den)));
}

inline Expr simplify_power(const Expr& base, int k, std::unordered_map<Key128, Expr, Key128Hash>& memo) {
    if (k == 0) return constant(1.0);
    if (k == 1) return base;
    if (base.is_constant()) {
        if (base.constant_value() == 0.0 && k < 0)
            throw std::domain_error("0 raised to a negative power");
        double v = ipow(base.constant_value(), k);
        if (std::isfinite(v)) return constant(v);
        return pow_i(base, k);
    }
    if (base.kind() == Kind::Power)
        return simplify_power(base.node().kids[0], base.node().exponent * k, memo);
    if (base.kind() == Kind::Product) {
        std::vector<Expr> fs;
        for (const auto& f : base.node().kids) fs.push_back(simplify_power(f, k, memo));
        return simplify_product(fs, memo);
    }
    if (base.kind() == Kind::Quotient) {
        const Expr& u = base.node().kids[0];
        const Expr& v = base.node().kids[1];
        if (k > 0) return quotient(simplify_power(u, k, memo), simplify_power(v, k, memo));
        return quotient(simplify_power(v, -k, memo), simplify_power(u, -k, memo));
    }
    return pow_i(base, k);
}

inline Expr simplify_rec(const Expr& e, std::unordered_map<Key128, Expr, Key128Hash>& memo) {
    auto it = memo.find(e.key());
    if (it != memo.end()) return it->second;
    const Node& n = e.node();
    Expr out = e;
    switch (n.kind) {
        case Kind::Constant:
        case Kind::Var: break;
        case Kind::Sum: {
            std::vector<Expr> ks;
            ks.reserve(n.kids.size());
            for (const auto& k : n.kids) ks.push_back(simplify_rec(k, memo));
            out = simplify_sum(ks);
            break;
        }
        case Kind::Product: {
            std::vector<Expr> ks;
            ks.reserve(n.kids.size());
            for (const auto& k : n.kids) ks.push_back(simplify_rec(k, memo));
            out = simplify_product(ks, memo);
            break;
        }
        case Kind::Quotient: {
            Expr u = simplify_rec(n.kids[0], memo);
            Expr v = simplify_rec(n.kids[1], memo);
            out = simplify_product({quotient(u, v)}, memo);
            break;
        }
        case Kind::Power:
            out = simplify_power(simplify_rec(n.kids[0], memo), n.exponent, memo);
            break;
        case Kind::Exp: {
            Expr a = simplify_rec(n.kids[0], memo);
            if (a.is_constant()) {
                double v = std::exp(a.constant_value());
                if (std::isfinite(v)) { out = constant(v); break; }
            }
            out = exp_e(a);
            break;
        }
        case Kind::Erf: {
            Expr a = simplify_rec(n.kids[0], memo);
            if (a.is_constant()) { out = constant(std::erf(a.constant_value())); break; }
            out = erf_e(a);
            break;
        }
        case Kind::CumInt: break;  // table identity defines the node
        case Kind::P4: {
            Expr a = simplify_rec(n.kids[0], memo);
            Node m;
            m.kind = Kind::P4;
            m.p4 = n.p4;
            m.p4_deriv = n.p4_deriv;
            m.kids = {a};
            out = make_node(std::move(m));
            break;
        }
        case Kind::RiccatiPhi: break;  // its kids define the closure; keep them intact
        case Kind::DerivWrap: {
            Node m;
            m.kind = Kind::DerivWrap;
            m.kids = {simplify_rec(n.kids[0], memo), simplify_rec(n.kids[1], memo)};
            out = make_node(std::move(m));
            break;
        }
    }
    memo.emplace(e.key(), out);
    return out;
}

}  // namespace detail

inline Expr simplify(const Expr& e) {
    static std::unordered_map<Key128, Expr, Key128Hash> global;
    return detail::simplify_rec(e, global);
}

// ---------------------------------------------------------------------------
// small helpers used across modules and tests

inline std::vector<double> probe_points(double lo = -9.5, double hi = 9.5, int count = 17) {
    std::vector<double> xs(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
    return xs;
}

// sup |a-b| / (1 + max(|a|,|b|)) over probes
inline double max_rel_deviation(const Expr& a, const Expr& b, const std::vector<double>& xs) {
    auto va = eval_many(a, xs);
    auto vb = eval_many(b, xs);
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        worst = std::max(worst, std::abs(va[i] - vb[i]) /
                                    (1.0 + std::max(std::abs(va[i]), std::abs(vb[i]))));
    return worst;
}

// sup |e| over probes through the memoized vector path
inline double max_abs_on(const Expr& e, const std::vector<double>& xs) {
    auto v = eval_many(e, xs);
    double worst = 0.0;
    for (double x : v) worst = std::max(worst, std::abs(x));
    return worst;
}

inline GridFunction sample(const Expr& e, const Grid& g) {
    return GridFunction(g, eval_many(e, g.points()));
}

}  // namespace susy
