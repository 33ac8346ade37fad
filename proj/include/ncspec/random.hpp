#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/QR>

#include "algebra.hpp"

namespace ncspec {

/// Seeded source for random test objects. Unitaries are Haar-distributed
/// via QR of a complex Gaussian matrix with the phases of R's diagonal
/// divided out.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::mt19937_64 &engine() { return eng_; }

    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    double uniform(double lo = 0.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(eng_);
    }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
    bool coin() { return uniform_int(0, 1) == 1; }

    CMatrix gaussian(Eigen::Index rows, Eigen::Index cols) {
        CMatrix g(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j)
                g(i, j) = Complex(normal(), normal()) / std::sqrt(2.0);
        return g;
    }

    CMatrix haar_unitary(Eigen::Index n) {
        CMatrix g = gaussian(n, n);
        Eigen::HouseholderQR<CMatrix> qr(g);
        CMatrix q = qr.householderQ();
        CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (Eigen::Index j = 0; j < n; ++j) {
            Complex d = r(j, j);
            if (std::abs(d) > 0)
                q.col(j) *= d / std::abs(d);
        }
        return q;
    }

    Unitary unitary(const FdAlgebra &a) {
        Element u = Element::zero(a);
        for (std::size_t i = 0; i < a.num_blocks(); ++i)
            u.block(i) = haar_unitary(a.block_size(i));
        return Unitary(std::move(u));
    }

    RankTuple rank_tuple(const FdAlgebra &a) {
        RankTuple r;
        for (int n : a.block_sizes())
            r.ranks.push_back(uniform_int(0, n));
        return r;
    }

    /// u P u* for P the standard projection with the given ranks.
    Projection projection(const FdAlgebra &a, const RankTuple &ranks) {
        return unitary(a).conjugate(standard_projection(a, ranks));
    }
    Projection projection(const FdAlgebra &a) { return projection(a, rank_tuple(a)); }

    /// A projection with some block strictly between 0 and 1.
    Projection noncentral_projection(const FdAlgebra &a) {
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < a.num_blocks(); ++i)
            if (a.block_size(i) >= 2)
                candidates.push_back(i);
        if (candidates.empty())
            throw ShapeMismatch("commutative algebras have only central projections");
        RankTuple r = rank_tuple(a);
        std::size_t pick = candidates[static_cast<std::size_t>(
            uniform_int(0, static_cast<int>(candidates.size()) - 1))];
        r.ranks[pick] = uniform_int(1, a.block_size(pick) - 1);
        return projection(a, r);
    }

    FdAlgebra algebra(int max_blocks, int max_size) {
        std::vector<int> b;
        int k = uniform_int(1, max_blocks);
        for (int i = 0; i < k; ++i)
            b.push_back(uniform_int(1, max_size));
        return FdAlgebra(b);
    }

    /// Random unital hom from `source` into a target built to fit it: each
    /// target block receives a random nonzero multiplicity row.
    Hom unital_hom(const FdAlgebra &source, int max_target_blocks, int max_mult) {
        const std::size_t k = source.num_blocks();
        int tk = uniform_int(1, max_target_blocks);
        std::vector<std::vector<int>> mult;
        std::vector<int> sizes;
        for (int i = 0; i < tk; ++i) {
            std::vector<int> row(k, 0);
            int size = 0;
            while (size == 0) {
                for (std::size_t j = 0; j < k; ++j) {
                    row[j] = uniform_int(0, max_mult);
                    size += row[j] * source.block_size(j);
                }
            }
            mult.push_back(row);
            sizes.push_back(size);
        }
        FdAlgebra target(sizes, source.tolerance());
        return Hom(source, target, mult, unitary(target));
    }

  private:
    std::mt19937_64 eng_;
};

} // namespace ncspec
