#pragma once

// Contexts (commutative subalgebras, stored as their atom partitions), their
// finite spectra, morphisms given by inner automorphisms, and finite spatial
// diagrams of contexts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "algebra.hpp"

namespace ncspec {

using AtomMask = std::uint64_t;

namespace detail {

inline std::vector<long long> rounded_entries(const Element &e) {
    std::vector<long long> out;
    for (const auto &b : e.blocks())
        for (Eigen::Index i = 0; i < b.rows(); ++i)
            for (Eigen::Index j = 0; j < b.cols(); ++j) {
                out.push_back(std::llround(b(i, j).real() * 1e6));
                out.push_back(std::llround(b(i, j).imag() * 1e6));
            }
    return out;
}

// FNV-1a over the entries rounded to 6 decimals.
inline std::string atom_hash(const Element &e) {
    std::uint64_t h = 1469598103934665603ull;
    for (long long x : rounded_entries(e)) {
        auto u = static_cast<std::uint64_t>(x);
        for (int k = 0; k < 8; ++k) {
            h ^= (u >> (8 * k)) & 0xffu;
            h *= 1099511628211ull;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline int trace_rank(const Projection &p) {
    return static_cast<int>(std::lround(p.element().trace().real()));
}

} // namespace detail

/// A commutative subalgebra, given by its atoms: nonzero, pairwise orthogonal
/// projections summing to 1, kept in canonical order (rank tuple descending,
/// then rounded entries with larger values first).
class Context {
  public:
    Context() = default;
    Context(FdAlgebra algebra, std::vector<Projection> atoms)
        : alg_(std::move(algebra)), atoms_(std::move(atoms)) {
        if (atoms_.empty())
            throw InvalidContext("a context needs at least one atom");
        if (atoms_.size() > 63)
            throw InvalidContext("more than 63 atoms");
        const double tol = alg_.tolerance();
        Element sum = Element::zero(alg_);
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (!(atoms_[i].algebra() == alg_))
                throw InvalidContext("atom " + std::to_string(i) + " lives in another algebra");
            if (is_zero_projection(atoms_[i]))
                throw InvalidContext("atom " + std::to_string(i) + " is zero");
            for (std::size_t j = i + 1; j < atoms_.size(); ++j)
                if ((atoms_[i].element() * atoms_[j].element()).max_norm() > tol)
                    throw InvalidContext("atoms " + std::to_string(i) + " and " + std::to_string(j) +
                                         " are not orthogonal");
            sum = sum + atoms_[i].element();
        }
        if (!sum.approx_equal(Element::identity(alg_), tol))
            throw InvalidContext("atoms do not sum to the identity");
        canonicalize();
    }

    const FdAlgebra &algebra() const { return alg_; }
    std::size_t size() const { return atoms_.size(); }
    const Projection &atom(std::size_t i) const { return atoms_.at(i); }
    const std::vector<Projection> &atoms() const { return atoms_; }
    const std::vector<std::string> &ids() const { return ids_; }
    AtomMask full_mask() const { return (AtomMask{1} << size()) - 1; }

    /// Atoms whose sum is p, if p lies in this context.
    std::optional<AtomMask> mask_of(const Element &p) const {
        AtomMask m = 0;
        Element sum = Element::zero(alg_);
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            const Element &a = atoms_[i].element();
            double w = (p * a).trace().real() / a.trace().real();
            if (w > 0.5) {
                m |= AtomMask{1} << i;
                sum = sum + a;
            }
        }
        if (!sum.approx_equal(p, alg_.tolerance()))
            return std::nullopt;
        return m;
    }
    std::optional<AtomMask> mask_of(const Projection &p) const { return mask_of(p.element()); }

    /// Atoms lying below p.
    AtomMask atoms_below(const Projection &p) const {
        AtomMask m = 0;
        for (std::size_t i = 0; i < atoms_.size(); ++i)
            if ((p.element() * atoms_[i].element()).approx_equal(atoms_[i].element(), alg_.tolerance()))
                m |= AtomMask{1} << i;
        return m;
    }

    Projection projection(AtomMask mask) const {
        Element e = Element::zero(alg_);
        for (std::size_t i = 0; i < atoms_.size(); ++i)
            if (mask >> i & 1)
                e = e + atoms_[i].element();
        return Projection(std::move(e));
    }

    /// Every atom of this context is a sum of atoms of `o`.
    bool subset_of(const Context &o) const {
        return std::all_of(atoms_.begin(), atoms_.end(),
                           [&](const Projection &a) { return o.mask_of(a).has_value(); });
    }

    bool same_as(const Context &o) const {
        if (!(alg_ == o.alg_) || size() != o.size())
            return false;
        for (std::size_t i = 0; i < size(); ++i)
            if (!atoms_[i].element().approx_equal(o.atoms_[i].element(), alg_.tolerance()))
                return false;
        return true;
    }

    bool is_diagonal() const {
        return std::all_of(atoms_.begin(), atoms_.end(),
                           [](const Projection &a) { return ncspec::is_diagonal(a.element()); });
    }

    Context conjugated(const Unitary &u) const {
        std::vector<Projection> out;
        for (const auto &a : atoms_)
            out.push_back(u.conjugate(a));
        return Context(alg_, std::move(out));
    }

  private:
    void canonicalize() {
        struct Key {
            RankTuple ranks;
            std::vector<long long> entries;
        };
        std::vector<std::pair<Key, Projection>> keyed;
        for (auto &a : atoms_)
            keyed.push_back({Key{rank_profile(a), detail::rounded_entries(a.element())}, a});
        std::stable_sort(keyed.begin(), keyed.end(), [](const auto &x, const auto &y) {
            if (x.first.ranks != y.first.ranks)
                return y.first.ranks < x.first.ranks;
            return std::lexicographical_compare(x.first.entries.begin(), x.first.entries.end(),
                                                y.first.entries.begin(), y.first.entries.end(),
                                                std::greater<>());
        });
        atoms_.clear();
        ids_.clear();
        for (auto &[k, a] : keyed) {
            ids_.push_back(detail::atom_hash(a.element()));
            atoms_.push_back(std::move(a));
        }
    }

    FdAlgebra alg_;
    std::vector<Projection> atoms_;
    std::vector<std::string> ids_;
};

/// Context generated by pairwise commuting projections, optionally together
/// with the centre.
inline Context generate_context(const FdAlgebra &a, const std::vector<Projection> &gens,
                                bool include_center) {
    for (std::size_t i = 0; i < gens.size(); ++i) {
        if (!(gens[i].algebra() == a))
            throw ShapeMismatch("generator " + std::to_string(i) + " not in " + a.spec());
        for (std::size_t j = i + 1; j < gens.size(); ++j)
            if (!gens[i].element().commutes_with(gens[j].element()))
                throw NonCommutingGenerators("generators " + std::to_string(i) + " and " +
                                             std::to_string(j) + " do not commute");
    }
    std::vector<Element> parts{Element::identity(a)};
    auto refine = [&](const Element &p) {
        std::vector<Element> next;
        const Element comp = Element::identity(a) - p;
        for (const auto &x : parts)
            for (const Element *f : {&p, &comp}) {
                Element y = x * *f;
                if (y.trace().real() > 0.5)
                    next.push_back(std::move(y));
            }
        parts = std::move(next);
    };
    if (include_center)
        for (std::size_t i = 0; i < a.num_blocks(); ++i) {
            std::vector<bool> pattern(a.num_blocks(), false);
            pattern[i] = true;
            refine(central_projection(a, pattern).element());
        }
    for (const auto &g : gens)
        refine(g.element());
    std::vector<Projection> atoms;
    for (auto &x : parts)
        atoms.emplace_back(std::move(x));
    return Context(a, std::move(atoms));
}

inline Context center_context(const FdAlgebra &a) { return generate_context(a, {}, true); }

/// All diagonal matrix units.
inline Context diagonal_context(const FdAlgebra &a) {
    std::vector<Projection> atoms;
    for (std::size_t i = 0; i < a.num_blocks(); ++i)
        for (int j = 0; j < a.block_size(i); ++j)
            atoms.emplace_back(matrix_unit(a, i, j, j));
    return Context(a, std::move(atoms));
}

/// Finite discrete space; one point per atom, labelled by atom hash.
struct FinSpace {
    std::vector<std::string> points;
    std::size_t size() const { return points.size(); }
};

inline FinSpace spectrum(const Context &v) { return FinSpace{v.ids()}; }

struct SpaceMap {
    FinSpace source;
    FinSpace target;
    std::vector<std::size_t> assignment; // source point index -> target point index
};

/// Ad_u restricted to src, landing in dst: u src u* is contained in dst.
struct ContextMorphism {
    Context src;
    Context dst;
    Unitary u;

    /// Per src atom, the dst atoms summing to u a u*. Throws InvalidMorphism.
    std::vector<AtomMask> image_masks() const {
        if (!(src.algebra() == dst.algebra()) || !(u.algebra() == src.algebra()))
            throw InvalidMorphism("contexts and unitary live in different algebras");
        std::vector<AtomMask> out;
        for (std::size_t i = 0; i < src.size(); ++i) {
            auto m = dst.mask_of(u.conjugate(src.atom(i).element()));
            if (!m)
                throw InvalidMorphism("u a u* is not a sum of target atoms for source atom " +
                                      std::to_string(i));
            out.push_back(*m);
        }
        return out;
    }
    void validate() const { (void)image_masks(); }
};

/// Sigma(phi): Sigma(dst) -> Sigma(src), q' |-> the src atom p with u p u* >= q'.
inline SpaceMap spectrum_map(const ContextMorphism &phi) {
    const double tol = phi.src.algebra().tolerance();
    SpaceMap f{spectrum(phi.dst), spectrum(phi.src), {}};
    for (std::size_t j = 0; j < phi.dst.size(); ++j) {
        const Element &q = phi.dst.atom(j).element();
        std::optional<std::size_t> found;
        for (std::size_t i = 0; i < phi.src.size() && !found; ++i)
            if ((phi.u.conjugate(phi.src.atom(i).element()) * q).approx_equal(q, tol))
                found = i;
        if (!found)
            throw NoDominatingAtom("target atom " + std::to_string(j) + " (" + phi.dst.ids()[j] +
                                   ") lies under no conjugated source atom");
        f.assignment.push_back(*found);
    }
    return f;
}

/// g o f for composable space maps (f: X -> Y, g: Y -> Z).
inline SpaceMap compose(const SpaceMap &g, const SpaceMap &f) {
    SpaceMap out{f.source, g.target, {}};
    for (std::size_t x : f.assignment)
        out.assignment.push_back(g.assignment.at(x));
    return out;
}

enum class ArrowKind { Identity, Inclusion, Ad };

inline const char *to_string(ArrowKind k) {
    switch (k) {
    case ArrowKind::Identity:
        return "id";
    case ArrowKind::Inclusion:
        return "incl";
    case ArrowKind::Ad:
        return "Ad";
    }
    return "?";
}

struct SpatialArrow {
    std::size_t src;
    std::size_t dst;
    Unitary u;
    ArrowKind kind;
};

/// Finite diagram of contexts of one algebra. Contexts are deduplicated and
/// every context carries its identity arrow.
class SpatialDiagram {
  public:
    SpatialDiagram() = default;
    explicit SpatialDiagram(FdAlgebra a) : alg_(std::move(a)) {}

    const FdAlgebra &algebra() const { return alg_; }
    const std::vector<Context> &contexts() const { return contexts_; }
    const Context &context(std::size_t i) const { return contexts_.at(i); }
    const std::vector<SpatialArrow> &arrows() const { return arrows_; }
    std::size_t num_contexts() const { return contexts_.size(); }

    std::optional<std::size_t> find(const Context &v) const {
        for (std::size_t i = 0; i < contexts_.size(); ++i)
            if (contexts_[i].same_as(v))
                return i;
        return std::nullopt;
    }

    /// Index of v, adding it (with its identity arrow) when new.
    std::size_t add_context(const Context &v) {
        if (!(v.algebra() == alg_))
            throw InvalidContext("context of " + v.algebra().spec() + " added to diagram over " +
                                 alg_.spec());
        if (auto i = find(v))
            return *i;
        contexts_.push_back(v);
        const std::size_t i = contexts_.size() - 1;
        arrows_.push_back({i, i, Unitary::identity(alg_), ArrowKind::Identity});
        return i;
    }

    ContextMorphism morphism(std::size_t k) const {
        const auto &a = arrows_.at(k);
        return ContextMorphism{contexts_.at(a.src), contexts_.at(a.dst), a.u};
    }

    bool has_arrow(std::size_t src, std::size_t dst, ArrowKind kind, const Unitary &u) const {
        for (const auto &a : arrows_)
            if (a.src == src && a.dst == dst && a.kind == kind &&
                a.u.element().approx_equal(u.element(), alg_.tolerance()))
                return true;
        return false;
    }

    /// Adds the arrow after validation; duplicates are ignored. Returns
    /// false when the arrow was already present.
    bool add_arrow(std::size_t src, std::size_t dst, const Unitary &u, ArrowKind kind) {
        if (src >= contexts_.size() || dst >= contexts_.size())
            throw InvalidMorphism("arrow index out of range");
        if (has_arrow(src, dst, kind, u))
            return false;
        ContextMorphism{contexts_[src], contexts_[dst], u}.validate();
        arrows_.push_back({src, dst, u, kind});
        return true;
    }

    bool add_inclusion(std::size_t src, std::size_t dst) {
        return add_arrow(src, dst, Unitary::identity(alg_), ArrowKind::Inclusion);
    }

    /// Inclusions between every ordered pair of distinct contexts where one
    /// is contained in the other, restricted to pairs touching `touching`
    /// when given.
    void add_all_inclusions(std::optional<std::size_t> touching_from = std::nullopt) {
        const std::size_t from = touching_from.value_or(0);
        for (std::size_t i = 0; i < contexts_.size(); ++i)
            for (std::size_t j = 0; j < contexts_.size(); ++j) {
                if (i == j || (i < from && j < from))
                    continue;
                if (contexts_[i].subset_of(contexts_[j]))
                    add_inclusion(i, j);
            }
    }

    /// Ad_u from every context whose conjugate lands in some context of the
    /// diagram, skipping u that fixes every source atom.
    void add_ad_arrows(const Unitary &u) {
        for (std::size_t i = 0; i < contexts_.size(); ++i) {
            const Context &v = contexts_[i];
            bool moves = false;
            for (const auto &a : v.atoms())
                moves = moves || !u.conjugate(a.element()).approx_equal(a.element(), alg_.tolerance());
            if (!moves)
                continue;
            Context w = v.conjugated(u);
            for (std::size_t j = 0; j < contexts_.size(); ++j)
                if (w.subset_of(contexts_[j]))
                    add_arrow(i, j, u, ArrowKind::Ad);
        }
    }

    void validate() const {
        for (std::size_t k = 0; k < arrows_.size(); ++k) {
            const auto &a = arrows_[k];
            if (a.src >= contexts_.size() || a.dst >= contexts_.size())
                throw InvalidMorphism("arrow " + std::to_string(k) + " index out of range");
            morphism(k).validate();
        }
        for (std::size_t i = 0; i < contexts_.size(); ++i) {
            bool has_id = false;
            for (const auto &a : arrows_)
                has_id = has_id || (a.kind == ArrowKind::Identity && a.src == i && a.dst == i);
            if (!has_id)
                throw InvalidMorphism("context " + std::to_string(i) + " lacks its identity arrow");
        }
    }

    /// Same contexts, keeping only identity and inclusion arrows.
    SpatialDiagram inclusions_only() const {
        SpatialDiagram d(alg_);
        d.contexts_ = contexts_;
        for (const auto &a : arrows_)
            if (a.kind != ArrowKind::Ad)
                d.arrows_.push_back(a);
        return d;
    }

    /// First context in which p is a sum of atoms.
    std::optional<std::pair<std::size_t, AtomMask>> locate(const Projection &p) const {
        for (std::size_t i = 0; i < contexts_.size(); ++i)
            if (auto m = contexts_[i].mask_of(p))
                return std::make_pair(i, *m);
        return std::nullopt;
    }

    /// Appends raw contexts and arrows without deduplication (for loading
    /// diagram files); call validate() afterwards.
    void push_raw(Context v) { contexts_.push_back(std::move(v)); }
    void push_raw(SpatialArrow a) { arrows_.push_back(std::move(a)); }

  private:
    FdAlgebra alg_;
    std::vector<Context> contexts_;
    std::vector<SpatialArrow> arrows_;
};

/// Permutation unitary swapping diagonal positions j and j+1 of block i.
inline Unitary adjacent_transposition(const FdAlgebra &a, std::size_t block, int j) {
    Element u = Element::identity(a);
    CMatrix &b = u.block(block);
    b(j, j) = 0;
    b(j + 1, j + 1) = 0;
    b(j, j + 1) = 1;
    b(j + 1, j) = 1;
    return Unitary(std::move(u));
}

/// Unitary w with w a w* diagonal for every atom a of v: per block, the
/// adjoint of the matrix whose columns are range bases of the atoms in order.
inline Unitary diagonalizer(const Context &v) {
    const FdAlgebra &a = v.algebra();
    Element w = Element::zero(a);
    for (std::size_t i = 0; i < a.num_blocks(); ++i) {
        const int n = a.block_size(i);
        CMatrix cols(n, n);
        int filled = 0;
        for (const auto &atom : v.atoms()) {
            int r = detail::block_rank(atom.block(i));
            if (r == 0)
                continue;
            cols.middleCols(filled, r) = detail::range_basis(atom.block(i), r);
            filled += r;
        }
        w.block(i) = cols.adjoint();
    }
    return Unitary(std::move(w));
}

/// Finite stand-in for the category of all contexts: the centre, the
/// diagonal context, the context of each seed and of each commuting pair of
/// seeds, and `extra_contexts`; all inclusions among them; Ad arrows for the
/// extra unitaries, the adjacent transpositions of each block, and a
/// diagonalizing unitary of every non-diagonal context.
inline SpatialDiagram build_core_diagram(const FdAlgebra &a, const std::vector<Projection> &seeds,
                                         const std::vector<Unitary> &extra_unitaries,
                                         const std::vector<Context> &extra_contexts = {}) {
    SpatialDiagram d(a);
    d.add_context(center_context(a));
    const std::size_t diag = d.add_context(diagonal_context(a));
    for (const auto &p : seeds)
        d.add_context(generate_context(a, {p}, false));
    for (std::size_t i = 0; i < seeds.size(); ++i)
        for (std::size_t j = i + 1; j < seeds.size(); ++j)
            if (seeds[i].element().commutes_with(seeds[j].element()))
                d.add_context(generate_context(a, {seeds[i], seeds[j]}, false));
    for (const auto &v : extra_contexts)
        d.add_context(v);
    d.add_all_inclusions();
    for (const auto &u : extra_unitaries)
        d.add_ad_arrows(u);
    for (std::size_t i = 0; i < a.num_blocks(); ++i)
        for (int j = 0; j + 1 < a.block_size(i); ++j)
            d.add_ad_arrows(adjacent_transposition(a, i, j));
    const std::size_t n = d.num_contexts();
    for (std::size_t i = 0; i < n; ++i)
        if (!d.context(i).is_diagonal())
            d.add_arrow(i, diag, diagonalizer(d.context(i)), ArrowKind::Ad);
    return d;
}

/// DOT graph: one node per context labelled with its atoms' rank tuples, one
/// edge per non-identity arrow labelled "incl" or "Ad".
inline std::string to_dot(const SpatialDiagram &d) {
    std::ostringstream out;
    out << "digraph contexts {\n";
    for (std::size_t i = 0; i < d.num_contexts(); ++i) {
        out << "  c" << i << " [label=\"";
        const auto &v = d.context(i);
        for (std::size_t k = 0; k < v.size(); ++k)
            out << (k ? " " : "") << rank_profile(v.atom(k)).to_string();
        out << "\"];\n";
    }
    for (const auto &a : d.arrows())
        if (a.kind != ArrowKind::Identity)
            out << "  c" << a.src << " -> c" << a.dst << " [label=\"" << to_string(a.kind) << "\"];\n";
    out << "}\n";
    return out.str();
}

} // namespace ncspec
