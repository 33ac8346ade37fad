#pragma once

#include <cstddef>
#include <optional>

#include "int_matrix.hpp"

namespace ncspec {

/// U * M * V = D with U, V unimodular and D diagonal, d_1 | d_2 | ... (all
/// nonnegative). `V_inv` is kept alongside V so callers can change
/// coordinates in both directions without inverting.
struct SmithForm {
    IntMatrix U;
    IntMatrix D;
    IntMatrix V;
    IntMatrix V_inv;
    std::size_t rank = 0;

    IntVector diagonal() const {
        IntVector d;
        for (std::size_t i = 0; i < std::min(D.rows(), D.cols()); ++i)
            d.push_back(D(i, i));
        return d;
    }
};

namespace detail {

// Position of the nonzero entry of least absolute value in the lower-right
// submatrix starting at (t, t); nullopt when that submatrix is zero.
inline std::optional<std::pair<std::size_t, std::size_t>>
min_abs_entry(const IntMatrix &a, std::size_t t) {
    std::optional<std::pair<std::size_t, std::size_t>> best;
    BigInt best_abs;
    for (std::size_t i = t; i < a.rows(); ++i)
        for (std::size_t j = t; j < a.cols(); ++j) {
            const BigInt &x = a(i, j);
            if (x == 0)
                continue;
            BigInt ax = abs(x);
            if (!best || ax < best_abs) {
                best = {i, j};
                best_abs = ax;
                if (best_abs == 1)
                    return best;
            }
        }
    return best;
}

} // namespace detail

inline SmithForm smith_normal_form(const IntMatrix &m) {
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    SmithForm out{IntMatrix::identity(rows), m, IntMatrix::identity(cols),
                  IntMatrix::identity(cols), 0};
    IntMatrix &a = out.D;

    // Column operations are mirrored on V (right action) and V_inv (left
    // action with the inverse elementary matrix).
    auto col_swap = [&](std::size_t x, std::size_t y) {
        a.swap_cols(x, y);
        out.V.swap_cols(x, y);
        out.V_inv.swap_rows(x, y);
    };
    auto col_add = [&](std::size_t dst, std::size_t src, const BigInt &k) {
        a.add_col(dst, src, k);
        out.V.add_col(dst, src, k);
        out.V_inv.add_row(src, dst, -k);
    };
    auto row_swap = [&](std::size_t x, std::size_t y) {
        a.swap_rows(x, y);
        out.U.swap_rows(x, y);
    };
    auto row_add = [&](std::size_t dst, std::size_t src, const BigInt &k) {
        a.add_row(dst, src, k);
        out.U.add_row(dst, src, k);
    };

    const std::size_t n = std::min(rows, cols);
    for (std::size_t t = 0; t < n; ++t) {
        for (;;) {
            auto pos = detail::min_abs_entry(a, t);
            if (!pos)
                return out;
            row_swap(t, pos->first);
            col_swap(t, pos->second);

            bool clean = true;
            for (std::size_t i = t + 1; i < rows; ++i) {
                if (a(i, t) == 0)
                    continue;
                BigInt q = a(i, t) / a(t, t);
                row_add(i, t, -q);
                if (a(i, t) != 0)
                    clean = false;
            }
            for (std::size_t j = t + 1; j < cols; ++j) {
                if (a(t, j) == 0)
                    continue;
                BigInt q = a(t, j) / a(t, t);
                col_add(j, t, -q);
                if (a(t, j) != 0)
                    clean = false;
            }
            if (!clean)
                continue;

            // Pivot must divide the rest of the submatrix.
            bool divides = true;
            for (std::size_t i = t + 1; i < rows && divides; ++i)
                for (std::size_t j = t + 1; j < cols; ++j)
                    if (a(i, j) % a(t, t) != 0) {
                        row_add(t, i, 1);
                        divides = false;
                        break;
                    }
            if (divides)
                break;
        }
        if (a(t, t) < 0) {
            a.negate_row(t);
            out.U.negate_row(t);
        }
        ++out.rank;
    }
    return out;
}

/// Row-style Hermite normal form: T * M = H with T unimodular, H in row
/// echelon form, positive pivots, and entries above each pivot reduced into
/// [0, pivot).
struct HermiteForm {
    IntMatrix T;
    IntMatrix H;
    std::vector<std::size_t> pivot_cols;
};

inline HermiteForm hermite_normal_form(const IntMatrix &m) {
    HermiteForm out{IntMatrix::identity(m.rows()), m, {}};
    IntMatrix &h = out.H;
    std::size_t k = 0;
    for (std::size_t j = 0; j < h.cols() && k < h.rows(); ++j) {
        for (;;) {
            // smallest nonzero |h(i, j)| for i >= k
            std::optional<std::size_t> best;
            for (std::size_t i = k; i < h.rows(); ++i)
                if (h(i, j) != 0 && (!best || abs(h(i, j)) < abs(h(*best, j))))
                    best = i;
            if (!best)
                break;
            h.swap_rows(k, *best);
            out.T.swap_rows(k, *best);
            bool clean = true;
            for (std::size_t i = k + 1; i < h.rows(); ++i) {
                if (h(i, j) == 0)
                    continue;
                BigInt q = h(i, j) / h(k, j);
                h.add_row(i, k, -q);
                out.T.add_row(i, k, -q);
                if (h(i, j) != 0)
                    clean = false;
            }
            if (clean)
                break;
        }
        if (h(k, j) == 0)
            continue;
        if (h(k, j) < 0) {
            h.negate_row(k);
            out.T.negate_row(k);
        }
        for (std::size_t i = 0; i < k; ++i) {
            BigInt q = floor_div(h(i, j), h(k, j));
            h.add_row(i, k, -q);
            out.T.add_row(i, k, -q);
        }
        out.pivot_cols.push_back(j);
        ++k;
    }
    return out;
}

/// Basis of the integer kernel {x : M x = 0}, one basis vector per column.
inline IntMatrix integer_kernel(const IntMatrix &m) {
    SmithForm s = smith_normal_form(m);
    return s.V.block(0, s.V.rows(), s.rank, s.V.cols());
}

/// An integer solution of M x = b, if one exists.
inline std::optional<IntVector> solve_integer(const IntMatrix &m, const IntVector &b) {
    if (b.size() != m.rows())
        throw ShapeMismatch("solve_integer right-hand side");
    SmithForm s = smith_normal_form(m);
    IntVector ub = s.U * b;
    IntVector y(m.cols());
    for (std::size_t i = 0; i < ub.size(); ++i) {
        if (i < s.rank) {
            if (ub[i] % s.D(i, i) != 0)
                return std::nullopt;
            y[i] = ub[i] / s.D(i, i);
        } else if (ub[i] != 0) {
            return std::nullopt;
        }
    }
    return s.V * y;
}

} // namespace ncspec
