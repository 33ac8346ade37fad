#pragma once

// Finite-dimensional C*-algebras as direct sums of full matrix algebras,
// their block-diagonal elements, projections, unitaries and unital
// *-homomorphisms, plus the finite-dimensional von Neumann structure theory
// (central carriers, comparison, partial orthogonality, orbit covering).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace ncspec {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kDefaultTolerance = 1e-9;

class FdAlgebra {
  public:
    FdAlgebra() : FdAlgebra(std::vector<int>{1}) {}
    explicit FdAlgebra(std::vector<int> block_sizes, double tolerance = kDefaultTolerance)
        : blocks_(std::move(block_sizes)), tol_(tolerance) {
        if (blocks_.empty())
            throw ShapeMismatch("an algebra needs at least one summand");
        for (int n : blocks_)
            if (n < 1)
                throw ShapeMismatch("block sizes must be positive");
        if (!(tol_ > 0))
            throw ShapeMismatch("tolerance must be positive");
    }

    /// Grammar: `M<n>` terms joined by `+`; `C` is an alias for `M1`.
    static FdAlgebra parse(std::string_view spec, double tolerance = kDefaultTolerance) {
        std::vector<int> blocks;
        std::size_t pos = 0;
        auto fail = [&](const std::string &why) {
            throw ParseError("algebra spec '" + std::string(spec) + "': " + why);
        };
        if (spec.empty())
            fail("empty");
        for (;;) {
            if (pos >= spec.size())
                fail("expected a term");
            if (spec[pos] == 'C') {
                blocks.push_back(1);
                ++pos;
            } else if (spec[pos] == 'M') {
                ++pos;
                std::size_t start = pos;
                while (pos < spec.size() && std::isdigit(static_cast<unsigned char>(spec[pos])))
                    ++pos;
                if (start == pos)
                    fail("expected a block size after 'M'");
                if (pos - start > 6)
                    fail("block size too large");
                int n = std::stoi(std::string(spec.substr(start, pos - start)));
                if (n < 1)
                    fail("block size must be at least 1");
                blocks.push_back(n);
            } else {
                fail(std::string("unexpected character '") + spec[pos] + "'");
            }
            if (pos == spec.size())
                break;
            if (spec[pos] != '+')
                fail(std::string("unexpected character '") + spec[pos] + "'");
            ++pos;
        }
        return FdAlgebra(std::move(blocks), tolerance);
    }

    std::string spec() const {
        std::string out;
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            if (i)
                out += '+';
            out += blocks_[i] == 1 ? std::string("C") : "M" + std::to_string(blocks_[i]);
        }
        return out;
    }

    std::size_t num_blocks() const { return blocks_.size(); }
    int block_size(std::size_t i) const { return blocks_.at(i); }
    const std::vector<int> &block_sizes() const { return blocks_; }
    double tolerance() const { return tol_; }
    FdAlgebra with_tolerance(double tol) const { return FdAlgebra(blocks_, tol); }
    /// Dimension of the defining representation, sum of n_i.
    int total_dimension() const {
        int s = 0;
        for (int n : blocks_)
            s += n;
        return s;
    }
    bool is_commutative() const {
        return std::all_of(blocks_.begin(), blocks_.end(), [](int n) { return n == 1; });
    }

    friend bool operator==(const FdAlgebra &a, const FdAlgebra &b) { return a.blocks_ == b.blocks_; }

  private:
    std::vector<int> blocks_;
    double tol_;
};

/// Block-diagonal element of an FdAlgebra.
class Element {
  public:
    Element() = default;
    Element(FdAlgebra alg, std::vector<CMatrix> blocks)
        : alg_(std::move(alg)), blocks_(std::move(blocks)) {
        if (blocks_.size() != alg_.num_blocks())
            throw ShapeMismatch("expected " + std::to_string(alg_.num_blocks()) + " blocks, got " +
                                std::to_string(blocks_.size()));
        for (std::size_t i = 0; i < blocks_.size(); ++i)
            if (blocks_[i].rows() != alg_.block_size(i) || blocks_[i].cols() != alg_.block_size(i))
                throw ShapeMismatch("block " + std::to_string(i) + " has wrong shape");
    }

    static Element zero(const FdAlgebra &a) {
        std::vector<CMatrix> b;
        for (int n : a.block_sizes())
            b.push_back(CMatrix::Zero(n, n));
        return Element(a, std::move(b));
    }
    static Element identity(const FdAlgebra &a) {
        std::vector<CMatrix> b;
        for (int n : a.block_sizes())
            b.push_back(CMatrix::Identity(n, n));
        return Element(a, std::move(b));
    }

    const FdAlgebra &algebra() const { return alg_; }
    std::size_t num_blocks() const { return blocks_.size(); }
    const CMatrix &block(std::size_t i) const { return blocks_.at(i); }
    CMatrix &block(std::size_t i) { return blocks_.at(i); }
    const std::vector<CMatrix> &blocks() const { return blocks_; }
    double tolerance() const { return alg_.tolerance(); }

    Element adjoint() const {
        Element out = *this;
        for (auto &b : out.blocks_)
            b.adjointInPlace();
        return out;
    }

    friend Element operator+(Element a, const Element &b) {
        a.check_same(b);
        for (std::size_t i = 0; i < a.blocks_.size(); ++i)
            a.blocks_[i] += b.blocks_[i];
        return a;
    }
    friend Element operator-(Element a, const Element &b) {
        a.check_same(b);
        for (std::size_t i = 0; i < a.blocks_.size(); ++i)
            a.blocks_[i] -= b.blocks_[i];
        return a;
    }
    friend Element operator*(const Element &a, const Element &b) {
        a.check_same(b);
        Element out = a;
        for (std::size_t i = 0; i < a.blocks_.size(); ++i)
            out.blocks_[i] = a.blocks_[i] * b.blocks_[i];
        return out;
    }
    friend Element operator*(Complex s, Element a) {
        for (auto &b : a.blocks_)
            b *= s;
        return a;
    }

    /// Entrywise max-norm over all blocks.
    double max_norm() const {
        double m = 0;
        for (const auto &b : blocks_)
            if (b.size())
                m = std::max(m, b.cwiseAbs().maxCoeff());
        return m;
    }

    Complex trace() const {
        Complex t = 0;
        for (const auto &b : blocks_)
            t += b.trace();
        return t;
    }

    bool approx_equal(const Element &o, double tol) const { return (*this - o).max_norm() <= tol; }
    bool approx_equal(const Element &o) const { return approx_equal(o, tolerance()); }

    bool is_self_adjoint() const { return (*this - adjoint()).max_norm() <= tolerance(); }
    bool is_projection() const {
        return is_self_adjoint() && ((*this) * (*this) - *this).max_norm() <= tolerance();
    }
    bool is_unitary() const {
        return ((*this) * adjoint() - identity(alg_)).max_norm() <= tolerance() &&
               (adjoint() * (*this) - identity(alg_)).max_norm() <= tolerance();
    }
    /// Central elements are scalar on every block.
    bool is_central() const {
        for (const auto &b : blocks_) {
            Complex c = b(0, 0);
            CMatrix d = b - c * CMatrix::Identity(b.rows(), b.cols());
            if (d.cwiseAbs().maxCoeff() > tolerance())
                return false;
        }
        return true;
    }
    bool commutes_with(const Element &o) const {
        return ((*this) * o - o * (*this)).max_norm() <= tolerance();
    }

  private:
    void check_same(const Element &b) const {
        if (!(alg_ == b.alg_))
            throw ShapeMismatch("elements of different algebras (" + alg_.spec() + " vs " +
                                b.alg_.spec() + ")");
    }

    FdAlgebra alg_;
    std::vector<CMatrix> blocks_;
};

/// Element satisfying p = p* = p^2 within the algebra tolerance.
class Projection {
  public:
    Projection() = default;
    explicit Projection(Element e) : e_(std::move(e)) {
        if (!e_.is_projection())
            throw NotAProjection("element fails p* = p = p^2 within tolerance " +
                                 std::to_string(e_.tolerance()));
        symmetrize();
    }

    static Projection zero(const FdAlgebra &a) { return Projection(Element::zero(a)); }
    static Projection identity(const FdAlgebra &a) { return Projection(Element::identity(a)); }

    const Element &element() const { return e_; }
    operator const Element &() const { return e_; }
    const FdAlgebra &algebra() const { return e_.algebra(); }
    const CMatrix &block(std::size_t i) const { return e_.block(i); }
    std::size_t num_blocks() const { return e_.num_blocks(); }

    Projection complement() const { return Projection(Element::identity(algebra()) - e_); }

  private:
    void symmetrize() {
        for (std::size_t i = 0; i < e_.num_blocks(); ++i) {
            CMatrix h = 0.5 * (e_.block(i) + e_.block(i).adjoint());
            e_.block(i) = h;
        }
    }
    Element e_;
};

class Unitary {
  public:
    Unitary() = default;
    explicit Unitary(Element e) : e_(std::move(e)) {
        if (!e_.is_unitary())
            throw NotAUnitary("element fails u u* = 1 within tolerance " +
                              std::to_string(e_.tolerance()));
    }
    static Unitary identity(const FdAlgebra &a) { return Unitary(Element::identity(a)); }

    const Element &element() const { return e_; }
    operator const Element &() const { return e_; }
    const FdAlgebra &algebra() const { return e_.algebra(); }
    const CMatrix &block(std::size_t i) const { return e_.block(i); }
    Unitary adjoint() const { return Unitary(e_.adjoint()); }

    /// u x u*
    Element conjugate(const Element &x) const { return e_ * x * e_.adjoint(); }
    Projection conjugate(const Projection &p) const {
        return Projection(e_ * p.element() * e_.adjoint());
    }
    friend Unitary operator*(const Unitary &a, const Unitary &b) {
        return Unitary(a.e_ * b.e_);
    }

  private:
    Element e_;
};

/// Murray-von Neumann class of a projection in finite dimension.
struct RankTuple {
    std::vector<int> ranks;

    std::size_t size() const { return ranks.size(); }
    int operator[](std::size_t i) const { return ranks[i]; }
    bool is_zero() const {
        return std::all_of(ranks.begin(), ranks.end(), [](int r) { return r == 0; });
    }
    /// Componentwise <=.
    bool dominated_by(const RankTuple &o) const {
        for (std::size_t i = 0; i < ranks.size(); ++i)
            if (ranks[i] > o.ranks.at(i))
                return false;
        return true;
    }
    auto operator<=>(const RankTuple &) const = default;
    bool operator==(const RankTuple &) const = default;

    std::string to_string() const {
        std::string s = "(";
        for (std::size_t i = 0; i < ranks.size(); ++i)
            s += (i ? "," : "") + std::to_string(ranks[i]);
        return s + ")";
    }
};

// ---------------------------------------------------------------------------
// Constructors for common elements

inline Element matrix_unit(const FdAlgebra &a, std::size_t block, int row, int col) {
    Element e = Element::zero(a);
    e.block(block)(row, col) = 1.0;
    return e;
}

/// Central projection with block i equal to 1 iff pattern[i].
inline Projection central_projection(const FdAlgebra &a, const std::vector<bool> &pattern) {
    if (pattern.size() != a.num_blocks())
        throw ShapeMismatch("central pattern length");
    Element e = Element::zero(a);
    for (std::size_t i = 0; i < pattern.size(); ++i)
        if (pattern[i])
            e.block(i).setIdentity();
    return Projection(std::move(e));
}

inline Projection central_projection_from_mask(const FdAlgebra &a, unsigned long mask) {
    std::vector<bool> pattern(a.num_blocks());
    for (std::size_t i = 0; i < pattern.size(); ++i)
        pattern[i] = (mask >> i) & 1UL;
    return central_projection(a, pattern);
}

/// Diagonal projection with the given 0/1 diagonal per block.
inline Projection diagonal_projection(const FdAlgebra &a, const std::vector<std::vector<int>> &diag) {
    if (diag.size() != a.num_blocks())
        throw ShapeMismatch("diagonal pattern has wrong number of blocks");
    Element e = Element::zero(a);
    for (std::size_t i = 0; i < diag.size(); ++i) {
        if (static_cast<int>(diag[i].size()) != a.block_size(i))
            throw ShapeMismatch("diagonal pattern block " + std::to_string(i));
        for (std::size_t j = 0; j < diag[i].size(); ++j)
            e.block(i)(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = diag[i][j] ? 1.0 : 0.0;
    }
    return Projection(std::move(e));
}

/// Diagonal projection onto the first ranks[i] basis vectors of block i.
inline Projection standard_projection(const FdAlgebra &a, const RankTuple &ranks) {
    std::vector<std::vector<int>> diag;
    for (std::size_t i = 0; i < a.num_blocks(); ++i) {
        if (ranks[i] < 0 || ranks[i] > a.block_size(i))
            throw ShapeMismatch("rank out of range in block " + std::to_string(i));
        std::vector<int> d(static_cast<std::size_t>(a.block_size(i)), 0);
        for (int j = 0; j < ranks[i]; ++j)
            d[static_cast<std::size_t>(j)] = 1;
        diag.push_back(std::move(d));
    }
    return diagonal_projection(a, diag);
}

inline bool is_diagonal(const Element &e) {
    for (const auto &b : e.blocks()) {
        CMatrix off = b;
        off.diagonal().setZero();
        if (off.size() && off.cwiseAbs().maxCoeff() > e.tolerance())
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Order relations between projections

/// p <= q, i.e. q p = p.
inline bool leq(const Projection &p, const Projection &q) {
    return (q.element() * p.element()).approx_equal(p.element());
}
inline bool orthogonal(const Projection &p, const Projection &q) {
    return (p.element() * q.element()).max_norm() <= p.algebra().tolerance();
}

// ---------------------------------------------------------------------------
// Rank and range computations

namespace detail {

inline int block_rank(const CMatrix &b) {
    if (b.rows() == 0)
        return 0;
    CMatrix h = 0.5 * (b + b.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    int r = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > 0.5)
            ++r;
    return r;
}

// Orthonormal basis of the range of a projection block, chosen greedily from
// its columns (largest residual first). Diagonal projections yield exact
// standard basis vectors.
inline CMatrix range_basis(const CMatrix &p, int rank) {
    const Eigen::Index n = p.rows();
    CMatrix basis(n, rank);
    CMatrix residual = p;
    for (int k = 0; k < rank; ++k) {
        Eigen::Index best = 0;
        double best_norm = -1;
        for (Eigen::Index j = 0; j < n; ++j) {
            double nj = residual.col(j).norm();
            if (nj > best_norm + 1e-12) {
                best_norm = nj;
                best = j;
            }
        }
        CVector v = residual.col(best) / best_norm;
        // fix the phase so the pivot component is real positive
        Complex ph = v(best);
        if (std::abs(ph) > 0)
            v *= std::conj(ph) / std::abs(ph);
        basis.col(k) = v;
        residual -= v * (v.adjoint() * residual);
    }
    return basis;
}

// [range(p) | range(1 - p)] as a unitary matrix.
inline CMatrix adapted_basis(const CMatrix &p) {
    const Eigen::Index n = p.rows();
    int r = block_rank(p);
    CMatrix comp = CMatrix::Identity(n, n) - p;
    CMatrix w(n, n);
    if (r > 0)
        w.leftCols(r) = range_basis(p, r);
    if (n - r > 0)
        w.rightCols(n - r) = range_basis(comp, static_cast<int>(n - r));
    return w;
}

inline CMatrix projector_from_columns(const CMatrix &w, Eigen::Index first, Eigen::Index count) {
    const Eigen::Index n = w.rows();
    if (count == 0)
        return CMatrix::Zero(n, n);
    CMatrix v = w.middleCols(first, count);
    return v * v.adjoint();
}

} // namespace detail

/// Number of unit eigenvalues per block.
inline RankTuple rank_profile(const Element &p) {
    if (!p.is_projection())
        throw NotAProjection("rank_profile of a non-projection");
    RankTuple t;
    for (const auto &b : p.blocks())
        t.ranks.push_back(detail::block_rank(b));
    return t;
}
inline RankTuple rank_profile(const Projection &p) { return rank_profile(p.element()); }

inline bool is_zero_projection(const Projection &p) {
    return p.element().max_norm() <= p.algebra().tolerance();
}

/// Partial isometry v with p = v v*, q = v* v, when the rank profiles agree.
inline std::optional<Element> mvn_equivalent(const Projection &p, const Projection &q) {
    if (!(p.algebra() == q.algebra()))
        throw ShapeMismatch("projections in different algebras");
    RankTuple rp = rank_profile(p), rq = rank_profile(q);
    if (rp != rq)
        return std::nullopt;
    Element v = Element::zero(p.algebra());
    for (std::size_t i = 0; i < p.num_blocks(); ++i) {
        if (rp[i] == 0)
            continue;
        CMatrix bp = detail::range_basis(p.block(i), rp[i]);
        CMatrix bq = detail::range_basis(q.block(i), rq[i]);
        v.block(i) = bp * bq.adjoint();
    }
    return v;
}

/// Unitary u with p = u q u*, when the rank profiles agree.
inline std::optional<Unitary> unitary_equiv_certificate(const Projection &p, const Projection &q) {
    if (!(p.algebra() == q.algebra()))
        throw ShapeMismatch("projections in different algebras");
    if (rank_profile(p) != rank_profile(q))
        return std::nullopt;
    Element u = Element::zero(p.algebra());
    for (std::size_t i = 0; i < p.num_blocks(); ++i)
        u.block(i) = detail::adapted_basis(p.block(i)) * detail::adapted_basis(q.block(i)).adjoint();
    return Unitary(std::move(u));
}

/// Smallest central projection above p.
inline Projection central_carrier(const Projection &p) {
    RankTuple r = rank_profile(p);
    std::vector<bool> pattern;
    for (int x : r.ranks)
        pattern.push_back(x > 0);
    return central_projection(p.algebra(), pattern);
}

inline bool is_central(const Projection &p) { return p.element().is_central(); }

/// Central z with z p >= z q and z^perp p <= z^perp q (Murray-von Neumann).
inline Projection comparison(const Projection &p, const Projection &q) {
    if (!(p.algebra() == q.algebra()))
        throw ShapeMismatch("projections in different algebras");
    RankTuple rp = rank_profile(p), rq = rank_profile(q);
    std::vector<bool> pattern;
    for (std::size_t i = 0; i < rp.size(); ++i)
        pattern.push_back(rp[i] >= rq[i]);
    return central_projection(p.algebra(), pattern);
}

/// Central z with z p = z q and z^perp p orthogonal to z^perp q, if any.
/// Blockwise such a z exists iff every block has p_i = q_i or p_i q_i = 0;
/// blocks where p_i = q_i go into z.
inline std::optional<Projection> partially_orthogonal(const Projection &p, const Projection &q) {
    if (!(p.algebra() == q.algebra()))
        throw ShapeMismatch("projections in different algebras");
    const double tol = p.algebra().tolerance();
    std::vector<bool> pattern;
    for (std::size_t i = 0; i < p.num_blocks(); ++i) {
        const CMatrix &a = p.block(i);
        const CMatrix &b = q.block(i);
        if ((a - b).cwiseAbs().maxCoeff() <= tol)
            pattern.push_back(true);
        else if ((a * b).cwiseAbs().maxCoeff() <= tol)
            pattern.push_back(false);
        else
            return std::nullopt;
    }
    return central_projection(p.algebra(), pattern);
}

/// Supremum of pairwise commuting projections.
inline Projection supremum(const FdAlgebra &a, const std::vector<Projection> &ps) {
    // sup of commuting projections: 1 - prod (1 - p)
    Element rest = Element::identity(a);
    for (const auto &p : ps)
        rest = rest * (Element::identity(a) - p.element());
    return Projection(Element::identity(a) - rest);
}

struct CoverOrbit {
    std::vector<Projection> members; // M, with members[0] == q
    Projection sup;                  // s = sup M
    Projection remainder;            // sR = C(q) - s
    Unitary u;                       // sR <= u q u*
};

/// A partially orthogonal subset of the unitary orbit of q, maximal in the
/// blockwise sense: block i packs floor(n_i / r_i) orthogonal copies of q_i
/// and reuses q_i once that room is exhausted.
inline CoverOrbit cover_orbit(const Projection &q) {
    const FdAlgebra &a = q.algebra();
    RankTuple r = rank_profile(q);
    if (r.is_zero())
        throw ZeroProjection("cover_orbit needs a nonzero projection");
    const std::size_t k = a.num_blocks();
    std::vector<CMatrix> basis(k);
    std::vector<int> copies(k, 0);
    int count = 0;
    for (std::size_t i = 0; i < k; ++i) {
        basis[i] = detail::adapted_basis(q.block(i));
        if (r[i] > 0) {
            copies[i] = a.block_size(i) / r[i];
            count = std::max(count, copies[i]);
        }
    }
    CoverOrbit out;
    for (int t = 0; t < count; ++t) {
        Element m = Element::zero(a);
        for (std::size_t i = 0; i < k; ++i) {
            if (r[i] == 0)
                continue;
            int c = t < copies[i] ? t : 0;
            m.block(i) = detail::projector_from_columns(basis[i], c * r[i], r[i]);
        }
        out.members.emplace_back(std::move(m));
    }
    Element s = Element::zero(a);
    Element rem = Element::zero(a);
    Element u = Element::identity(a);
    for (std::size_t i = 0; i < k; ++i) {
        if (r[i] == 0)
            continue;
        const int n = a.block_size(i);
        const int covered = copies[i] * r[i];
        s.block(i) = detail::projector_from_columns(basis[i], 0, covered);
        rem.block(i) = detail::projector_from_columns(basis[i], covered, n - covered);
        // cyclic shift of adapted-basis positions by n - r: moves the range of
        // q_i onto the last r_i positions, which contain the remainder
        CMatrix perm = CMatrix::Zero(n, n);
        for (int j = 0; j < n; ++j)
            perm((j + n - r[i]) % n, j) = 1.0;
        u.block(i) = basis[i] * perm * basis[i].adjoint();
    }
    out.sup = Projection(std::move(s));
    out.remainder = Projection(std::move(rem));
    out.u = Unitary(std::move(u));
    return out;
}

// ---------------------------------------------------------------------------
// Homomorphisms

/// *-homomorphism given by multiplicities and an intertwining unitary:
/// block i of phi(a) = U_i diag(a_j repeated multiplicity[i][j] times, 0) U_i*.
class Hom {
  public:
    Hom() = default;
    Hom(FdAlgebra source, FdAlgebra target, std::vector<std::vector<int>> multiplicity,
        std::optional<Unitary> intertwiner = std::nullopt)
        : source_(std::move(source)), target_(std::move(target)), mult_(std::move(multiplicity)),
          intertwiner_(intertwiner ? *intertwiner : Unitary::identity(target_)) {
        if (mult_.size() != target_.num_blocks())
            throw InvalidHom("multiplicity matrix needs one row per target block");
        unital_ = true;
        for (std::size_t i = 0; i < mult_.size(); ++i) {
            if (mult_[i].size() != source_.num_blocks())
                throw InvalidHom("multiplicity row " + std::to_string(i) + " has wrong length");
            int used = 0;
            for (std::size_t j = 0; j < mult_[i].size(); ++j) {
                if (mult_[i][j] < 0)
                    throw InvalidHom("negative multiplicity");
                used += mult_[i][j] * source_.block_size(j);
            }
            if (used > target_.block_size(i))
                throw InvalidHom("block " + std::to_string(i) + " overfull: " +
                                 std::to_string(used) + " > " +
                                 std::to_string(target_.block_size(i)));
            if (used != target_.block_size(i))
                unital_ = false;
        }
        if (!(intertwiner_.algebra() == target_))
            throw InvalidHom("intertwiner lives in the wrong algebra");
    }

    static Hom identity(const FdAlgebra &a) {
        std::vector<std::vector<int>> m(a.num_blocks(), std::vector<int>(a.num_blocks(), 0));
        for (std::size_t i = 0; i < m.size(); ++i)
            m[i][i] = 1;
        return Hom(a, a, std::move(m));
    }

    const FdAlgebra &source() const { return source_; }
    const FdAlgebra &target() const { return target_; }
    const std::vector<std::vector<int>> &multiplicity() const { return mult_; }
    const Unitary &intertwiner() const { return intertwiner_; }
    bool is_unital() const { return unital_; }

    Element operator()(const Element &a) const {
        if (!(a.algebra() == source_))
            throw ShapeMismatch("element not in the source algebra " + source_.spec());
        Element out = Element::zero(target_);
        for (std::size_t i = 0; i < target_.num_blocks(); ++i) {
            CMatrix d = CMatrix::Zero(target_.block_size(i), target_.block_size(i));
            Eigen::Index off = 0;
            for (std::size_t j = 0; j < source_.num_blocks(); ++j)
                for (int c = 0; c < mult_[i][j]; ++c) {
                    const Eigen::Index n = source_.block_size(j);
                    d.block(off, off, n, n) = a.block(j);
                    off += n;
                }
            const CMatrix &u = intertwiner_.block(i);
            out.block(i) = u * d * u.adjoint();
        }
        return out;
    }
    Projection operator()(const Projection &p) const {
        return Projection((*this)(p.element()));
    }

  private:
    FdAlgebra source_;
    FdAlgebra target_;
    std::vector<std::vector<int>> mult_;
    Unitary intertwiner_;
    bool unital_ = true;
};

inline Element apply_hom(const Hom &phi, const Element &a) { return phi(a); }
inline Projection apply_hom(const Hom &phi, const Projection &p) { return phi(p); }

/// multiplicity * ranks
inline RankTuple transport_ranks(const Hom &phi, const RankTuple &r) {
    RankTuple out;
    for (const auto &row : phi.multiplicity()) {
        int s = 0;
        for (std::size_t j = 0; j < row.size(); ++j)
            s += row[j] * r[j];
        out.ranks.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Unitalisation

/// A+ = A (+) C for unital A, with the inclusion iota (non-unital) and the
/// character pi onto the adjoined summand.
struct Unitalisation {
    FdAlgebra plus;
    Hom iota;
    Hom pi;

    /// (a, z) in the vector-space picture of A+ as an element of A (+) C:
    /// blocks a_i + z 1 and z on the last summand.
    Element split(const Element &a, Complex z) const {
        Element out = Element::zero(plus);
        for (std::size_t i = 0; i < a.num_blocks(); ++i)
            out.block(i) = a.block(i) + z * CMatrix::Identity(a.block(i).rows(), a.block(i).cols());
        out.block(plus.num_blocks() - 1)(0, 0) = z;
        return out;
    }

    /// Inverse of split.
    std::pair<Element, Complex> unsplit(const Element &x) const {
        const FdAlgebra &base = iota.source();
        Complex z = x.block(plus.num_blocks() - 1)(0, 0);
        std::vector<CMatrix> blocks;
        for (std::size_t i = 0; i < base.num_blocks(); ++i)
            blocks.push_back(x.block(i) - z * CMatrix::Identity(base.block_size(i), base.block_size(i)));
        return {Element(base, std::move(blocks)), z};
    }
};

inline Unitalisation unitalisation(const FdAlgebra &a) {
    std::vector<int> blocks = a.block_sizes();
    blocks.push_back(1);
    FdAlgebra plus(blocks, a.tolerance());
    const std::size_t k = a.num_blocks();
    std::vector<std::vector<int>> iota(k + 1, std::vector<int>(k, 0));
    for (std::size_t i = 0; i < k; ++i)
        iota[i][i] = 1;
    std::vector<std::vector<int>> pi(1, std::vector<int>(k + 1, 0));
    pi[0][k] = 1;
    FdAlgebra c(std::vector<int>{1}, a.tolerance());
    return Unitalisation{plus, Hom(a, plus, iota), Hom(plus, c, pi)};
}

} // namespace ncspec
