#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace toric {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

using IntVec = std::vector<std::int64_t>;
using RationalVec = std::vector<Rational>;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::vector<double> to_doubles(const RationalVec& v) {
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = to_double(v[i]);
    return out;
}

inline bool is_primitive(const IntVec& v) {
    std::int64_t g = 0;
    for (auto x : v) g = std::gcd(g, x < 0 ? -x : x);
    return g == 1;
}

/// Exact determinant of a square matrix by fraction-free Gaussian elimination.
inline Rational rational_det(std::vector<RationalVec> m) {
    const size_t n = m.size();
    Rational det = 1;
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        while (piv < n && m[piv][col] == 0) ++piv;
        if (piv == n) return 0;
        if (piv != col) {
            std::swap(m[piv], m[col]);
            det = -det;
        }
        det *= m[col][col];
        for (size_t r = col + 1; r < n; ++r) {
            if (m[r][col] == 0) continue;
            Rational f = m[r][col] / m[col][col];
            for (size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
        }
    }
    return det;
}

/// Solves A x = b exactly; throws if A is singular.
inline RationalVec rational_solve(std::vector<RationalVec> a, RationalVec b) {
    const size_t n = a.size();
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        while (piv < n && a[piv][col] == 0) ++piv;
        if (piv == n) throw std::runtime_error("rational_solve: singular matrix");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (size_t r = 0; r < n; ++r) {
            if (r == col || a[r][col] == 0) continue;
            Rational f = a[r][col] / a[col][col];
            for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    RationalVec x(n);
    for (size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

/// Rank of a rational matrix (any shape).
inline size_t rational_rank(std::vector<RationalVec> m) {
    if (m.empty()) return 0;
    const size_t rows = m.size(), cols = m[0].size();
    size_t rank = 0;
    for (size_t col = 0; col < cols && rank < rows; ++col) {
        size_t piv = rank;
        while (piv < rows && m[piv][col] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(m[piv], m[rank]);
        for (size_t r = rank + 1; r < rows; ++r) {
            if (m[r][col] == 0) continue;
            Rational f = m[r][col] / m[rank][col];
            for (size_t c = col; c < cols; ++c) m[r][c] -= f * m[rank][c];
        }
        ++rank;
    }
    return rank;
}

/// Basis of the saturated integer kernel lattice {x in Z^n : U x = 0}.
///
/// Column-reduces U by unimodular column operations, tracking them in V, so
/// that U V = [H | 0]; the trailing columns of V span the kernel lattice
/// exactly (V is unimodular, so the basis is saturated).
inline std::vector<std::vector<Int>> integer_kernel_basis(const std::vector<IntVec>& u_rows,
                                                          size_t n) {
    const size_t k = u_rows.size();
    std::vector<std::vector<Int>> u(k, std::vector<Int>(n));
    for (size_t i = 0; i < k; ++i)
        for (size_t j = 0; j < n; ++j) u[i][j] = u_rows[i][j];
    std::vector<std::vector<Int>> v(n, std::vector<Int>(n, 0));
    for (size_t j = 0; j < n; ++j) v[j][j] = 1;

    auto col_swap = [&](size_t a, size_t b) {
        for (size_t i = 0; i < k; ++i) std::swap(u[i][a], u[i][b]);
        for (size_t i = 0; i < n; ++i) std::swap(v[i][a], v[i][b]);
    };
    auto col_axpy = [&](size_t dst, size_t src, const Int& f) {
        for (size_t i = 0; i < k; ++i) u[i][dst] -= f * u[i][src];
        for (size_t i = 0; i < n; ++i) v[i][dst] -= f * v[i][src];
    };
    auto col_neg = [&](size_t a) {
        for (size_t i = 0; i < k; ++i) u[i][a] = -u[i][a];
        for (size_t i = 0; i < n; ++i) v[i][a] = -v[i][a];
    };

    size_t rank = 0;
    for (size_t row = 0; row < k && rank < n; ++row) {
        // Euclidean reduction across columns rank..n-1 on this row.
        while (true) {
            size_t nonzero = n;
            for (size_t c = rank; c < n; ++c)
                if (u[row][c] != 0 && (nonzero == n || abs(u[row][c]) < abs(u[row][nonzero])))
                    nonzero = c;
            if (nonzero == n) break;  // row is zero beyond rank
            col_swap(rank, nonzero);
            if (u[row][rank] < 0) col_neg(rank);
            bool cleared = true;
            for (size_t c = rank + 1; c < n; ++c) {
                if (u[row][c] == 0) continue;
                Int q = u[row][c] / u[row][rank];
                col_axpy(c, rank, q);
                if (u[row][c] != 0) cleared = false;
            }
            if (cleared) {
                ++rank;
                break;
            }
        }
    }
    std::vector<std::vector<Int>> basis;
    for (size_t c = rank; c < n; ++c) {
        std::vector<Int> col(n);
        for (size_t i = 0; i < n; ++i) col[i] = v[i][c];
        basis.push_back(std::move(col));
    }
    return basis;
}

}  // namespace toric
