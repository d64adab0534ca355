#pragma once

#include <cassert>
#include <optional>
#include <vector>

#include "inertia/numeric.hpp"

namespace inertia {

// Dense integer matrix, row-major. Sizes here are tiny (generators and
// relation matrices), so the algorithms favour clarity over asymptotics.
struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<Int> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}
    Mat(std::size_t r, std::size_t c, std::vector<Int> entries)
        : rows(r), cols(c), a(std::move(entries)) {
        if (a.size() != rows * cols) throw std::invalid_argument("Mat: size mismatch");
    }

    Int& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    const Int& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    Mat transposed() const {
        Mat t(cols, rows);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    bool operator==(const Mat&) const = default;
};

inline Mat mat_mul(const Mat& x, const Mat& y) {
    assert(x.cols == y.rows);
    Mat z(x.rows, y.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t k = 0; k < x.cols; ++k) {
            const Int& v = x(i, k);
            if (v == 0) continue;
            for (std::size_t j = 0; j < y.cols; ++j) z(i, j) += v * y(k, j);
        }
    return z;
}

struct HnfResult {
    Mat h;        // row Hermite form: pivot rows first, zero rows dropped
    Mat u;        // unimodular transform over the original rows: u * input = padded h
    std::vector<std::size_t> pivot_cols;
};

// Row-style Hermite normal form: pivots positive, entries above a pivot
// reduced into [0, pivot). Zero rows are dropped from `h` but `u` keeps the
// full square transform (its trailing rows span the left kernel).
inline HnfResult hnf(const Mat& input) {
    Mat m = input;
    Mat u = Mat::identity(m.rows);
    std::size_t row = 0;
    std::vector<std::size_t> pivots;
    for (std::size_t col = 0; col < m.cols && row < m.rows; ++col) {
        // Euclidean elimination in this column below `row`.
        while (true) {
            std::size_t best = m.rows;
            for (std::size_t i = row; i < m.rows; ++i)
                if (m(i, col) != 0 &&
                    (best == m.rows || boost::multiprecision::abs(m(i, col)) <
                                           boost::multiprecision::abs(m(best, col))))
                    best = i;
            if (best == m.rows) break;
            if (best != row) {
                for (std::size_t j = 0; j < m.cols; ++j) std::swap(m(row, j), m(best, j));
                for (std::size_t j = 0; j < u.cols; ++j) std::swap(u(row, j), u(best, j));
            }
            bool cleared = true;
            for (std::size_t i = row + 1; i < m.rows; ++i) {
                if (m(i, col) == 0) continue;
                Int q = m(i, col) / m(row, col);
                for (std::size_t j = 0; j < m.cols; ++j) m(i, j) -= q * m(row, j);
                for (std::size_t j = 0; j < u.cols; ++j) u(i, j) -= q * u(row, j);
                if (m(i, col) != 0) cleared = false;
            }
            if (cleared) break;
        }
        if (m(row, col) == 0) continue;
        if (m(row, col) < 0) {
            for (std::size_t j = 0; j < m.cols; ++j) m(row, j) = -m(row, j);
            for (std::size_t j = 0; j < u.cols; ++j) u(row, j) = -u(row, j);
        }
        // Reduce entries above the pivot.
        for (std::size_t i = 0; i < row; ++i) {
            Int q = m(i, col) / m(row, col);
            if (m(i, col) < 0 && m(i, col) % m(row, col) != 0) q -= 1;
            if (q == 0) continue;
            for (std::size_t j = 0; j < m.cols; ++j) m(i, j) -= q * m(row, j);
            for (std::size_t j = 0; j < u.cols; ++j) u(i, j) -= q * u(row, j);
        }
        pivots.push_back(col);
        ++row;
    }
    HnfResult r;
    r.h = Mat(row, m.cols);
    for (std::size_t i = 0; i < row; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) r.h(i, j) = m(i, j);
    r.u = std::move(u);
    r.pivot_cols = std::move(pivots);
    return r;
}

inline std::size_t rank(const Mat& m) { return hnf(m).h.rows; }

// Basis of { x : x * m = 0 }, as rows.
inline Mat left_kernel(const Mat& m) {
    HnfResult r = hnf(m);
    Mat k(m.rows - r.h.rows, m.rows);
    for (std::size_t i = 0; i < k.rows; ++i)
        for (std::size_t j = 0; j < m.rows; ++j) k(i, j) = r.u(r.h.rows + i, j);
    return k;
}

// Membership of v in the row lattice of a Hermite form.
inline bool hnf_contains(const HnfResult& h, std::vector<Int> v) {
    for (std::size_t i = 0; i < h.h.rows; ++i) {
        std::size_t c = h.pivot_cols[i];
        if (v[c] % h.h(i, c) != 0) return false;
        Int q = v[c] / h.h(i, c);
        if (q != 0)
            for (std::size_t j = 0; j < h.h.cols; ++j) v[j] -= q * h.h(i, j);
    }
    for (const auto& x : v)
        if (x != 0) return false;
    return true;
}

// Index [A : B] of the row lattice of `sub` inside the row lattice of `sup`.
// Requires containment and equal rank; returns nullopt otherwise.
inline std::optional<Int> lattice_index(const Mat& sup, const Mat& sub) {
    HnfResult ha = hnf(sup), hb = hnf(sub);
    if (ha.h.rows != hb.h.rows) return std::nullopt;
    for (std::size_t i = 0; i < hb.h.rows; ++i) {
        std::vector<Int> row(hb.h.cols);
        for (std::size_t j = 0; j < hb.h.cols; ++j) row[j] = hb.h(i, j);
        if (!hnf_contains(ha, std::move(row))) return std::nullopt;
    }
    Int na = 1, nb = 1;
    for (std::size_t i = 0; i < ha.h.rows; ++i) na *= ha.h(i, ha.pivot_cols[i]);
    for (std::size_t i = 0; i < hb.h.rows; ++i) nb *= hb.h(i, hb.pivot_cols[i]);
    assert(nb % na == 0);
    return nb / na;
}

struct SnfResult {
    Mat d;  // diagonal, d(i,i) | d(i+1,i+1)
    Mat u;  // u * input * v = d
    Mat v;
};

inline SnfResult snf(const Mat& input) {
    SnfResult r{input, Mat::identity(input.rows), Mat::identity(input.cols)};
    Mat& m = r.d;
    auto swap_rows = [&](std::size_t i, std::size_t k) {
        for (std::size_t j = 0; j < m.cols; ++j) std::swap(m(i, j), m(k, j));
        for (std::size_t j = 0; j < r.u.cols; ++j) std::swap(r.u(i, j), r.u(k, j));
    };
    auto swap_cols = [&](std::size_t j, std::size_t k) {
        for (std::size_t i = 0; i < m.rows; ++i) std::swap(m(i, j), m(i, k));
        for (std::size_t i = 0; i < r.v.rows; ++i) std::swap(r.v(i, j), r.v(i, k));
    };
    auto row_sub = [&](std::size_t i, std::size_t k, const Int& q) {  // row i -= q * row k
        for (std::size_t j = 0; j < m.cols; ++j) m(i, j) -= q * m(k, j);
        for (std::size_t j = 0; j < r.u.cols; ++j) r.u(i, j) -= q * r.u(k, j);
    };
    auto col_sub = [&](std::size_t j, std::size_t k, const Int& q) {  // col j -= q * col k
        for (std::size_t i = 0; i < m.rows; ++i) m(i, j) -= q * m(i, k);
        for (std::size_t i = 0; i < r.v.rows; ++i) r.v(i, j) -= q * r.v(i, k);
    };

    // Round-to-nearest quotient, so remainders satisfy |rem| <= |b| / 2.
    auto div_round = [](const Int& a, const Int& b) {
        Int q = a / b;
        Int rem = a - q * b;
        if (2 * boost::multiprecision::abs(rem) > boost::multiprecision::abs(b))
            q += (rem < 0) == (b < 0) ? 1 : -1;
        return q;
    };

    std::size_t n = std::min(m.rows, m.cols);
    bool exhausted = false;
    for (std::size_t t = 0; t < n && !exhausted; ++t) {
        // Eliminate with re-pivoting: every pass moves the smallest nonzero
        // entry of the trailing block to (t, t) and reduces its row and
        // column with nearest-integer quotients, so the minimum absolute
        // value strictly decreases between passes and entries stay small
        // (the swap-based variant without re-pivoting blows up on inputs
        // like truncated-stabilizer presentations).
        while (true) {
            std::size_t pi = m.rows, pj = 0;
            for (std::size_t i = t; i < m.rows; ++i)
                for (std::size_t j = t; j < m.cols; ++j)
                    if (m(i, j) != 0 &&
                        (pi == m.rows || boost::multiprecision::abs(m(i, j)) <
                                             boost::multiprecision::abs(m(pi, pj)))) {
                        pi = i; pj = j;
                    }
            if (pi == m.rows) {
                exhausted = true;  // trailing block is zero
                break;
            }
            if (pi != t) swap_rows(t, pi);
            if (pj != t) swap_cols(t, pj);
            bool dirty = false;
            for (std::size_t i = t + 1; i < m.rows; ++i)
                if (m(i, t) != 0) {
                    row_sub(i, t, div_round(m(i, t), m(t, t)));
                    if (m(i, t) != 0) dirty = true;
                }
            for (std::size_t j = t + 1; j < m.cols; ++j)
                if (m(t, j) != 0) {
                    col_sub(j, t, div_round(m(t, j), m(t, t)));
                    if (m(t, j) != 0) dirty = true;
                }
            if (!dirty) break;
        }
        if (exhausted) break;
        if (m(t, t) < 0) {
            for (std::size_t j = 0; j < m.cols; ++j) m(t, j) = -m(t, j);
            for (std::size_t j = 0; j < r.u.cols; ++j) r.u(t, j) = -r.u(t, j);
        }
    }

    // Enforce the divisibility chain by exact pair transforms:
    // diag(a,b) -> diag(gcd, lcm) via unimodular P, Q built from a Bezout
    // identity g = ua + vb: P = [[u,v],[-b/g,a/g]], Q = [[1,-vb/g],[1,ua/g]].
    auto ext_gcd = [](Int a, Int b, Int& u, Int& v) {
        Int old_r = a, rr = b, old_u = 1, uu = 0, old_v = 0, vv = 1;
        while (rr != 0) {
            Int q = old_r / rr;
            Int t1 = old_r - q * rr; old_r = rr; rr = t1;
            t1 = old_u - q * uu; old_u = uu; uu = t1;
            t1 = old_v - q * vv; old_v = vv; vv = t1;
        }
        u = old_u; v = old_v;
        return old_r;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t t = 0; t + 1 < n; ++t) {
            Int a = m(t, t), b = m(t + 1, t + 1);
            if (b == 0 || a == 0 || b % a == 0) continue;
            Int u2, v2;
            Int g = ext_gcd(a, b, u2, v2);
            Int p00 = u2, p01 = v2, p10 = -b / g, p11 = a / g;
            Int q00 = 1, q01 = -v2 * b / g, q10 = 1, q11 = u2 * a / g;
            auto mix_rows = [&](Mat& mm) {
                for (std::size_t j = 0; j < mm.cols; ++j) {
                    Int x = mm(t, j), y = mm(t + 1, j);
                    mm(t, j) = p00 * x + p01 * y;
                    mm(t + 1, j) = p10 * x + p11 * y;
                }
            };
            auto mix_cols = [&](Mat& mm) {
                for (std::size_t i = 0; i < mm.rows; ++i) {
                    Int x = mm(i, t), y = mm(i, t + 1);
                    mm(i, t) = x * q00 + y * q10;
                    mm(i, t + 1) = x * q01 + y * q11;
                }
            };
            mix_rows(m);
            mix_rows(r.u);
            mix_cols(m);
            mix_cols(r.v);
            if (m(t, t) < 0) {
                for (std::size_t j = 0; j < m.cols; ++j) m(t, j) = -m(t, j);
                for (std::size_t j = 0; j < r.u.cols; ++j) r.u(t, j) = -r.u(t, j);
            }
            if (m(t + 1, t + 1) < 0) {
                for (std::size_t j = 0; j < m.cols; ++j) m(t + 1, j) = -m(t + 1, j);
                for (std::size_t j = 0; j < r.u.cols; ++j) r.u(t + 1, j) = -r.u(t + 1, j);
            }
            changed = true;
        }
    }
    return r;
}

}  // namespace inertia
