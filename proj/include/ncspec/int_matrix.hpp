#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"

namespace ncspec {

using BigInt = boost::multiprecision::cpp_int;
using IntVector = std::vector<BigInt>;

/// Dense row-major matrix of arbitrary-precision integers.
class IntMatrix {
  public:
    IntMatrix() = default;
    IntMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    IntMatrix(std::initializer_list<std::initializer_list<long long>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto &row : init) {
            if (row.size() != cols_)
                throw ShapeMismatch("ragged IntMatrix initializer");
            for (long long v : row)
                data_.emplace_back(v);
        }
    }

    static IntMatrix identity(std::size_t n) {
        IntMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1;
        return m;
    }

    static IntMatrix column(const IntVector &v) {
        IntMatrix m(v.size(), 1);
        for (std::size_t i = 0; i < v.size(); ++i)
            m(i, 0) = v[i];
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    BigInt &operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const BigInt &operator()(std::size_t i, std::size_t j) const {
        return data_[i * cols_ + j];
    }

    IntVector row(std::size_t i) const {
        return IntVector(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                         data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
    }
    IntVector col(std::size_t j) const {
        IntVector v(rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            v[i] = (*this)(i, j);
        return v;
    }

    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b)
            return;
        for (std::size_t j = 0; j < cols_; ++j)
            std::swap((*this)(a, j), (*this)(b, j));
    }
    void swap_cols(std::size_t a, std::size_t b) {
        if (a == b)
            return;
        for (std::size_t i = 0; i < rows_; ++i)
            std::swap((*this)(i, a), (*this)(i, b));
    }
    /// row[dst] += k * row[src]
    void add_row(std::size_t dst, std::size_t src, const BigInt &k) {
        if (k == 0)
            return;
        for (std::size_t j = 0; j < cols_; ++j)
            (*this)(dst, j) += k * (*this)(src, j);
    }
    /// col[dst] += k * col[src]
    void add_col(std::size_t dst, std::size_t src, const BigInt &k) {
        if (k == 0)
            return;
        for (std::size_t i = 0; i < rows_; ++i)
            (*this)(i, dst) += k * (*this)(i, src);
    }
    void negate_row(std::size_t i) {
        for (std::size_t j = 0; j < cols_; ++j)
            (*this)(i, j) = -(*this)(i, j);
    }
    void negate_col(std::size_t j) {
        for (std::size_t i = 0; i < rows_; ++i)
            (*this)(i, j) = -(*this)(i, j);
    }

    void append_row(const IntVector &r) {
        if (rows_ == 0 && cols_ == 0)
            cols_ = r.size();
        if (r.size() != cols_)
            throw ShapeMismatch("append_row width mismatch");
        data_.insert(data_.end(), r.begin(), r.end());
        ++rows_;
    }

    IntMatrix transpose() const {
        IntMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                t(j, i) = (*this)(i, j);
        return t;
    }

    /// Rows [r0, r1) and columns [c0, c1).
    IntMatrix block(std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) const {
        IntMatrix b(r1 - r0, c1 - c0);
        for (std::size_t i = r0; i < r1; ++i)
            for (std::size_t j = c0; j < c1; ++j)
                b(i - r0, j - c0) = (*this)(i, j);
        return b;
    }

    IntVector operator*(const IntVector &v) const {
        if (v.size() != cols_)
            throw ShapeMismatch("IntMatrix * vector");
        IntVector out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            BigInt acc = 0;
            for (std::size_t j = 0; j < cols_; ++j)
                if (!is_zero((*this)(i, j)) && !is_zero(v[j]))
                    acc += (*this)(i, j) * v[j];
            out[i] = std::move(acc);
        }
        return out;
    }

    friend IntMatrix operator*(const IntMatrix &a, const IntMatrix &b) {
        if (a.cols_ != b.rows_)
            throw ShapeMismatch("IntMatrix product " + a.shape() + " * " + b.shape());
        IntMatrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const BigInt &aik = a(i, k);
                if (is_zero(aik))
                    continue;
                for (std::size_t j = 0; j < b.cols_; ++j)
                    if (!is_zero(b(k, j)))
                        c(i, j) += aik * b(k, j);
            }
        return c;
    }
    friend IntMatrix operator+(IntMatrix a, const IntMatrix &b) {
        a.check_same(b);
        for (std::size_t i = 0; i < a.data_.size(); ++i)
            a.data_[i] += b.data_[i];
        return a;
    }
    friend IntMatrix operator-(IntMatrix a, const IntMatrix &b) {
        a.check_same(b);
        for (std::size_t i = 0; i < a.data_.size(); ++i)
            a.data_[i] -= b.data_[i];
        return a;
    }
    friend bool operator==(const IntMatrix &a, const IntMatrix &b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    bool is_zero_matrix() const {
        return std::all_of(data_.begin(), data_.end(), [](const BigInt &x) { return x == 0; });
    }

    std::string shape() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    friend std::ostream &operator<<(std::ostream &os, const IntMatrix &m) {
        os << '[';
        for (std::size_t i = 0; i < m.rows_; ++i) {
            os << (i ? ", [" : "[");
            for (std::size_t j = 0; j < m.cols_; ++j)
                os << (j ? ", " : "") << m(i, j);
            os << ']';
        }
        return os << ']';
    }

  private:
    static bool is_zero(const BigInt &x) { return x.is_zero(); }
    void check_same(const IntMatrix &b) const {
        if (rows_ != b.rows_ || cols_ != b.cols_)
            throw ShapeMismatch("IntMatrix shapes " + shape() + " vs " + b.shape());
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<BigInt> data_;
};

inline std::string to_string(const IntMatrix &m) {
    std::ostringstream os;
    os << m;
    return os.str();
}

inline std::string to_string(const IntVector &v) {
    std::string out = "(";
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + v[i].str();
    return out + ")";
}

/// Determinant by fraction-free (Bareiss) elimination.
inline BigInt determinant(const IntMatrix &m) {
    if (m.rows() != m.cols())
        throw ShapeMismatch("determinant of non-square matrix");
    const std::size_t n = m.rows();
    if (n == 0)
        return 1;
    IntMatrix a = m;
    BigInt sign = 1;
    BigInt prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a(k, k) == 0) {
            std::size_t p = k + 1;
            while (p < n && a(p, k) == 0)
                ++p;
            if (p == n)
                return 0;
            a.swap_rows(k, p);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j)
                a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
        prev = a(k, k);
    }
    return sign * a(n - 1, n - 1);
}

/// Floor division (rounds toward negative infinity).
inline BigInt floor_div(const BigInt &a, const BigInt &b) {
    BigInt q = a / b;
    BigInt r = a - q * b;
    if (r != 0 && ((r < 0) != (b < 0)))
        --q;
    return q;
}

/// Representative of a modulo |m| in [0, |m|).
inline BigInt mod_floor(const BigInt &a, const BigInt &m) {
    BigInt mm = abs(m);
    BigInt r = a % mm;
    if (r < 0)
        r += mm;
    return r;
}

} // namespace ncspec
