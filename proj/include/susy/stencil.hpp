#pragma once

// Finite-difference stencil weights (Fornberg recursion).

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace susy {

// Weights for the m-th derivative at x0 over arbitrary nodes.
inline std::vector<double> fornberg_weights(double x0, const std::vector<double>& nodes, int m) {
    const int n = static_cast<int>(nodes.size()) - 1;
    if (m > n) throw std::invalid_argument("fornberg_weights: not enough nodes");
    std::vector<std::vector<double>> C(static_cast<std::size_t>(n + 1),
                                       std::vector<double>(static_cast<std::size_t>(m + 1), 0.0));
    C[0][0] = 1.0;
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    for (int i = 1; i <= n; ++i) {
        int mn = i < m ? i : m;
        double c2 = 1.0;
        double c5 = c4;
        c4 = nodes[static_cast<std::size_t>(i)] - x0;
        for (int j = 0; j < i; ++j) {
            double c3 = nodes[static_cast<std::size_t>(i)] - nodes[static_cast<std::size_t>(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    C[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
                        c1 * (k * C[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k - 1)] -
                              c5 * C[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k)]) /
                        c2;
                C[static_cast<std::size_t>(i)][0] = -c1 * c5 * C[static_cast<std::size_t>(i - 1)][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                C[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
                    (c4 * C[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] -
                     k * C[static_cast<std::size_t>(j)][static_cast<std::size_t>(k - 1)]) /
                    c3;
            C[static_cast<std::size_t>(j)][0] = c4 * C[static_cast<std::size_t>(j)][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(static_cast<std::size_t>(n + 1));
    for (int j = 0; j <= n; ++j)
        w[static_cast<std::size_t>(j)] = C[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)];
    return w;
}

// half-width giving at least 8th-order accuracy for a centered k-derivative
inline int stencil_half_width(int k) {
    if (k == 0) return 0;
    return (k + 1) / 2 + 3;
}

// centered stencil for d^k/dx^k on unit spacing, offsets -m..m
inline std::vector<double> centered_weights(int k) {
    int m = stencil_half_width(k);
    std::vector<double> nodes(static_cast<std::size_t>(2 * m + 1));
    for (int i = -m; i <= m; ++i) nodes[static_cast<std::size_t>(i + m)] = i;
    return fornberg_weights(0.0, nodes, k);
}

}  // namespace susy
