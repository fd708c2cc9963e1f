#pragma once

// General banded matrices plus a symmetric-banded eigensolver (LAPACK dsbevx).

#include <lapacke.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace susy {

struct BandMatrix {
    int n = 0;
    int bw = 0;  // half bandwidth
    std::vector<double> a;  // row-major: a[i*(2bw+1) + (j - i + bw)]

    BandMatrix() = default;
    BandMatrix(int n_, int bw_) : n(n_), bw(bw_), a(static_cast<std::size_t>(n_) * (2 * bw_ + 1), 0.0) {}

    double& at(int i, int j) {
        return a[static_cast<std::size_t>(i) * (2 * bw + 1) + static_cast<std::size_t>(j - i + bw)];
    }
    double get(int i, int j) const {
        if (j < i - bw || j > i + bw) return 0.0;
        return a[static_cast<std::size_t>(i) * (2 * bw + 1) + static_cast<std::size_t>(j - i + bw)];
    }

    std::vector<double> matvec(const std::vector<double>& x) const {
        std::vector<double> y(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            int jlo = i - bw < 0 ? 0 : i - bw;
            int jhi = i + bw >= n ? n - 1 : i + bw;
            const double* row = &a[static_cast<std::size_t>(i) * (2 * bw + 1)];
            for (int j = jlo; j <= jhi; ++j) s += row[j - i + bw] * x[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] = s;
        }
        return y;
    }

    double max_asymmetry() const {
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j <= i + bw && j < n; ++j)
                worst = std::max(worst, std::abs(get(i, j) - get(j, i)));
        return worst;
    }

    double max_abs() const {
        double worst = 0.0;
        for (double v : a) worst = std::max(worst, std::abs(v));
        return worst;
    }
};

struct BandedEigenResult {
    std::vector<double> eigenvalues;
    std::vector<std::vector<double>> eigenvectors;  // unit 2-norm columns
};

namespace banded_detail {

// eigenvector by inverse iteration with a banded LU of (A - shift I);
// adequate for the well-separated 1-D spectra handled here
inline std::vector<double> inverse_iteration(const std::vector<double>& ab_sym, int n, int kd,
                                             double shift, double matrix_scale) {
    const int kl = kd, ku = kd, ldab = 2 * kl + ku + 1;
    std::vector<double> lu(static_cast<std::size_t>(ldab) * n, 0.0);
    auto sym_entry = [&](int i, int j) -> double {
        if (i < j) std::swap(i, j);
        if (i - j > kd) return 0.0;
        return ab_sym[static_cast<std::size_t>(j) * (kd + 1) + (i - j)];
    };
    double eps_shift = 0.0;
    for (int attempt = 0; attempt < 3; ++attempt) {
        double s = shift + eps_shift;
        for (int j = 0; j < n; ++j)
            for (int i = std::max(0, j - ku); i <= std::min(n - 1, j + kl); ++i)
                lu[static_cast<std::size_t>(j) * ldab + (kl + ku + i - j)] =
                    sym_entry(i, j) - (i == j ? s : 0.0);
        std::vector<lapack_int> ipiv(static_cast<std::size_t>(n));
        lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku, lu.data(), ldab,
                                         ipiv.data());
        if (info > 0) {  // exactly singular: nudge the shift
            eps_shift = (eps_shift == 0.0 ? 1.0 : 10.0 * std::abs(eps_shift)) * 1e-12 *
                        (matrix_scale > 1.0 ? matrix_scale : 1.0);
            continue;
        }
        if (info < 0) throw std::runtime_error("banded LU failed");

        // deterministic start vector
        std::vector<double> v(static_cast<std::size_t>(n));
        std::uint64_t state = 0x243f6a8885a308d3ull;
        for (int i = 0; i < n; ++i) {
            state = state * 6364136223846793005ull + 1442695040888963407ull;
            v[static_cast<std::size_t>(i)] =
                static_cast<double>(static_cast<std::int64_t>(state >> 11)) / 9.0e18;
        }
        double last_growth = 0.0;
        for (int it = 0; it < 6; ++it) {
            lapack_int sinfo = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n, kl, ku, 1, lu.data(),
                                              ldab, ipiv.data(), v.data(), n);
            if (sinfo != 0) throw std::runtime_error("banded solve failed");
            double nrm = 0.0;
            for (double x : v) nrm += x * x;
            nrm = std::sqrt(nrm);
            for (double& x : v) x /= nrm;
            bool converged = it > 0 && nrm > 0.5 * last_growth && nrm > 1e4;
            last_growth = nrm;
            if (converged) break;
        }
        return v;
    }
    throw std::runtime_error("inverse iteration failed to factor the shifted matrix");
}

}  // namespace banded_detail

// k lowest eigenpairs of a (nearly) symmetric banded matrix: eigenvalues by
// bisection on the tridiagonal reduction, eigenvectors by inverse iteration.
inline BandedEigenResult lowest_eigenpairs(const BandMatrix& M, int k, double symmetry_tol) {
    if (k < 1 || k > M.n) throw std::invalid_argument("lowest_eigenpairs: bad pair count");
    double asym = M.max_asymmetry();
    double scale = M.max_abs();
    if (asym > symmetry_tol * (scale > 1.0 ? scale : 1.0))
        throw std::runtime_error("matrix is not symmetric within tolerance (asymmetry " +
                                 std::to_string(asym) + ")");
    const int n = M.n, kd = M.bw, ldab = kd + 1;
    std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
    for (int j = 0; j < n; ++j)
        for (int i = j; i <= j + kd && i < n; ++i)
            ab[static_cast<std::size_t>(j) * ldab + (i - j)] = 0.5 * (M.get(i, j) + M.get(j, i));

    std::vector<double> w(static_cast<std::size_t>(n));
    std::vector<double> z(static_cast<std::size_t>(1));
    std::vector<lapack_int> ifail(static_cast<std::size_t>(n));
    lapack_int found = 0;
    double abstol = 2.0 * LAPACKE_dlamch('S');
    std::vector<double> ab_copy = ab;  // dsbevx overwrites the band storage
    lapack_int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'N', 'I', 'L', n, kd, ab_copy.data(),
                                     ldab, nullptr, n, 0.0, 0.0, 1, k, abstol, &found, w.data(),
                                     z.data(), n, ifail.data());
    if (info != 0)
        throw std::runtime_error("banded eigensolver failed to converge (info=" +
                                 std::to_string(info) + ")");
    if (found < k)
        throw std::runtime_error("banded eigensolver returned fewer pairs than requested");

    BandedEigenResult r;
    r.eigenvalues.assign(w.begin(), w.begin() + k);
    r.eigenvectors.reserve(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c)
        r.eigenvectors.push_back(
            banded_detail::inverse_iteration(ab, n, kd, r.eigenvalues[static_cast<std::size_t>(c)],
                                             scale));
    return r;
}

}  // namespace susy
