#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "int_matrix.hpp"
#include "smith.hpp"

namespace ncspec {

/// Finitely presented abelian group: `num_generators` generators modulo the
/// row span of `relations`.
struct AbPresentation {
    std::size_t num_generators = 0;
    IntMatrix relations; // one row per relation, width num_generators

    AbPresentation() = default;
    AbPresentation(std::size_t n, IntMatrix rels) : num_generators(n), relations(std::move(rels)) {
        if (relations.rows() == 0)
            relations = IntMatrix(0, n);
        if (relations.cols() != n)
            throw ShapeMismatch("relation width " + std::to_string(relations.cols()) +
                                " != generator count " + std::to_string(n));
    }
    static AbPresentation free(std::size_t n) { return AbPresentation(n, IntMatrix(0, n)); }
};

/// Canonical form of a finitely presented abelian group.
///
/// Coordinates: the first `torsion_rank()` coordinates are cyclic of order
/// invariant_factors[i] (>= 2, divisibility chained), the remaining ones are
/// free (factor 0). Column j of `generator_images` gives generator j in these
/// coordinates; column k of `section` is a generator combination whose class
/// is the k-th canonical basis vector.
class AbGroup {
  public:
    AbGroup() = default;

    static AbGroup from_presentation(const AbPresentation &p) {
        AbGroup g;
        g.presentation_ = p;
        const std::size_t n = p.num_generators;
        SmithForm s = smith_normal_form(p.relations);
        std::vector<std::size_t> kept;
        for (std::size_t i = 0; i < n; ++i) {
            BigInt d = i < s.rank ? s.D(i, i) : BigInt(0);
            if (d == 1)
                continue;
            kept.push_back(i);
            g.factors_.push_back(d);
        }
        const std::size_t c = kept.size();
        g.images_ = IntMatrix(c, n);
        g.section_ = IntMatrix(n, c);
        for (std::size_t k = 0; k < c; ++k) {
            for (std::size_t j = 0; j < n; ++j) {
                g.images_(k, j) = s.V(j, kept[k]);
                g.section_(j, k) = s.V_inv(kept[k], j);
            }
        }
        g.reduce_images();
        if (g.torsion_rank() == 0 && c > 0)
            g.canonicalize_free_basis();
        return g;
    }

    static AbGroup free(std::size_t n) { return from_presentation(AbPresentation::free(n)); }

    const std::vector<BigInt> &invariant_factors() const { return factors_; }
    const IntMatrix &generator_images() const { return images_; }
    const IntMatrix &section() const { return section_; }
    const AbPresentation &presentation() const { return presentation_; }
    std::size_t num_generators() const { return presentation_.num_generators; }

    /// Number of canonical coordinates.
    std::size_t dimension() const { return factors_.size(); }
    std::size_t free_rank() const {
        return static_cast<std::size_t>(
            std::count_if(factors_.begin(), factors_.end(), [](const BigInt &d) { return d == 0; }));
    }
    std::size_t torsion_rank() const { return dimension() - free_rank(); }
    bool is_trivial() const { return factors_.empty(); }
    bool is_free() const { return torsion_rank() == 0; }

    /// Reduce a coordinate vector into canonical representatives.
    IntVector reduce(IntVector coords) const {
        check_dim(coords.size());
        for (std::size_t k = 0; k < coords.size(); ++k)
            if (factors_[k] != 0)
                coords[k] = mod_floor(coords[k], factors_[k]);
        return coords;
    }

    /// Canonical coordinates of an integer combination of generators.
    IntVector coords_of(const IntVector &generator_combo) const {
        return reduce(images_ * generator_combo);
    }
    IntVector generator_coords(std::size_t j) const { return reduce(images_.col(j)); }

    bool is_zero(const IntVector &coords) const {
        IntVector r = reduce(coords);
        return std::all_of(r.begin(), r.end(), [](const BigInt &x) { return x == 0; });
    }

    /// "Z^r (+) Z/d1 (+) ..."; "0" for the trivial group.
    std::string factors_string() const {
        std::vector<std::string> parts;
        std::size_t r = free_rank();
        if (r == 1)
            parts.emplace_back("Z");
        else if (r > 1)
            parts.push_back("Z^" + std::to_string(r));
        for (const auto &d : factors_)
            if (d != 0)
                parts.push_back("Z/" + d.str());
        if (parts.empty())
            return "0";
        std::string out = parts[0];
        for (std::size_t i = 1; i < parts.size(); ++i)
            out += " (+) " + parts[i];
        return out;
    }

    /// Same invariant factors.
    bool isomorphic_to(const AbGroup &o) const { return factors_ == o.factors_; }

    IntMatrix reduce_matrix(IntMatrix m) const {
        check_dim(m.rows());
        for (std::size_t k = 0; k < m.rows(); ++k)
            if (factors_[k] != 0)
                for (std::size_t j = 0; j < m.cols(); ++j)
                    m(k, j) = mod_floor(m(k, j), factors_[k]);
        return m;
    }

  private:
    void check_dim(std::size_t n) const {
        if (n != dimension())
            throw ShapeMismatch("coordinate vector of length " + std::to_string(n) +
                                " for group of dimension " + std::to_string(dimension()));
    }

    void reduce_images() { images_ = reduce_matrix(images_); }

    // The free part has no preferred basis after SNF; the row HNF of the
    // generator-image matrix is unique and makes coordinates reproducible.
    void canonicalize_free_basis() {
        HermiteForm h = hermite_normal_form(images_);
        // T is unimodular: T^{-1} = V * U from its Smith form (U T V = I).
        SmithForm st = smith_normal_form(h.T);
        IntMatrix t_inv = st.V * st.U;
        images_ = h.H;
        section_ = section_ * t_inv;
    }

    AbPresentation presentation_;
    std::vector<BigInt> factors_;
    IntMatrix images_;
    IntMatrix section_;
};

/// Homomorphism between canonical forms induced by a generator-level map
/// (`generator_map` is target generators x source generators). Throws
/// NotWellDefined when a source relation does not vanish in the target.
inline IntMatrix induced_hom(const AbGroup &source, const AbGroup &target,
                             const IntMatrix &generator_map) {
    if (generator_map.rows() != target.num_generators() ||
        generator_map.cols() != source.num_generators())
        throw ShapeMismatch("generator map " + generator_map.shape());
    const IntMatrix &rels = source.presentation().relations;
    IntMatrix through = target.generator_images() * generator_map;
    for (std::size_t r = 0; r < rels.rows(); ++r) {
        IntVector img = through * rels.row(r);
        if (!target.is_zero(img))
            throw NotWellDefined("relation row " + std::to_string(r) +
                                 " does not vanish in the target group");
    }
    return target.reduce_matrix(through * source.section());
}

/// Grothendieck group of the commutative monoid on `generators` generators
/// subject to lhs = rhs for each pair (both nonnegative combinations).
inline AbGroup grothendieck(std::size_t generators,
                            const std::vector<std::pair<IntVector, IntVector>> &monoid_relations) {
    IntMatrix rels(0, generators);
    for (const auto &[lhs, rhs] : monoid_relations) {
        if (lhs.size() != generators || rhs.size() != generators)
            throw ShapeMismatch("monoid relation width");
        IntVector row(generators);
        for (std::size_t j = 0; j < generators; ++j) {
            if (lhs[j] < 0 || rhs[j] < 0)
                throw ShapeMismatch("monoid relations must be nonnegative combinations");
            row[j] = lhs[j] - rhs[j];
        }
        rels.append_row(row);
    }
    return AbGroup::from_presentation(AbPresentation(generators, std::move(rels)));
}

} // namespace ncspec
