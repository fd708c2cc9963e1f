#pragma once

// Uniform 1-D sample lattices, sampled functions and composite quadrature.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace susy {

struct Grid {
    double x_min = 0.0;
    double x_max = 0.0;
    int n = 0;
    double spacing = 0.0;

    double point(int i) const { return x_min + i * spacing; }

    std::vector<double> points() const {
        std::vector<double> xs(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = point(i);
        return xs;
    }

    bool same_as(const Grid& other) const {
        return x_min == other.x_min && x_max == other.x_max && n == other.n;
    }

    // index margin excluded from interior norms (5% of the box on each side)
    int interior_margin(double frac = 0.05) const {
        int m = static_cast<int>(std::ceil(frac * n));
        return m < 1 ? 1 : m;
    }

    // Composite Simpson weights; odd cell count gets a trapezoid tail cell.
    std::vector<double> quadrature_weights() const {
        std::vector<double> w(static_cast<std::size_t>(n), 0.0);
        const double h = spacing;
        int cells = n - 1;
        int simpson_cells = (cells % 2 == 0) ? cells : cells - 1;
        for (int c = 0; c + 1 < simpson_cells + 1; c += 2) {
            w[static_cast<std::size_t>(c)] += h / 3.0;
            w[static_cast<std::size_t>(c + 1)] += 4.0 * h / 3.0;
            w[static_cast<std::size_t>(c + 2)] += h / 3.0;
        }
        if (simpson_cells != cells) {
            w[static_cast<std::size_t>(n - 2)] += h / 2.0;
            w[static_cast<std::size_t>(n - 1)] += h / 2.0;
        }
        return w;
    }
};

inline Grid make_grid(double x_min, double x_max, int n) {
    if (!std::isfinite(x_min) || !std::isfinite(x_max))
        throw std::invalid_argument("make_grid: bounds must be finite");
    if (!(x_min < x_max))
        throw std::invalid_argument("make_grid: x_min must be below x_max");
    if (n < 16)
        throw std::invalid_argument("make_grid: need at least 16 samples, got " + std::to_string(n));
    Grid g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.n = n;
    g.spacing = (x_max - x_min) / (n - 1);
    return g;
}

struct GridFunction {
    Grid grid;
    std::vector<double> values;

    GridFunction() = default;
    GridFunction(Grid g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != static_cast<std::size_t>(grid.n))
            throw std::invalid_argument("GridFunction: sample count does not match grid");
    }
};

inline void require_same_grid(const GridFunction& f, const GridFunction& g) {
    if (!f.grid.same_as(g.grid))
        throw std::invalid_argument("grid mismatch between grid functions");
}

inline double inner_product(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f, g);
    auto w = f.grid.quadrature_weights();
    double s = 0.0;
    for (int i = 0; i < f.grid.n; ++i)
        s += w[static_cast<std::size_t>(i)] * f.values[static_cast<std::size_t>(i)] *
             g.values[static_cast<std::size_t>(i)];
    return s;
}

inline double norm(const GridFunction& f) {
    double s = inner_product(f, f);
    return s <= 0.0 ? 0.0 : std::sqrt(s);
}

// L2 norm over the interior of the box; boundary bands carry stencil clipping.
inline double interior_norm(const GridFunction& f, double frac = 0.05) {
    auto w = f.grid.quadrature_weights();
    int m = f.grid.interior_margin(frac);
    double s = 0.0;
    for (int i = m; i < f.grid.n - m; ++i)
        s += w[static_cast<std::size_t>(i)] * f.values[static_cast<std::size_t>(i)] *
             f.values[static_cast<std::size_t>(i)];
    return s <= 0.0 ? 0.0 : std::sqrt(s);
}

inline double interior_sup(const GridFunction& f, double frac = 0.05) {
    int m = f.grid.interior_margin(frac);
    double s = 0.0;
    for (int i = m; i < f.grid.n - m; ++i)
        s = std::max(s, std::abs(f.values[static_cast<std::size_t>(i)]));
    return s;
}

inline GridFunction normalized(GridFunction f) {
    double nf = norm(f);
    if (nf == 0.0) throw std::invalid_argument("cannot normalize the zero function");
    for (auto& v : f.values) v /= nf;
    return f;
}

inline GridFunction operator+(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f, g);
    GridFunction h = f;
    for (std::size_t i = 0; i < h.values.size(); ++i) h.values[i] += g.values[i];
    return h;
}

inline GridFunction operator-(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f, g);
    GridFunction h = f;
    for (std::size_t i = 0; i < h.values.size(); ++i) h.values[i] -= g.values[i];
    return h;
}

inline GridFunction operator*(double c, GridFunction f) {
    for (auto& v : f.values) v *= c;
    return f;
}

}  // namespace susy
