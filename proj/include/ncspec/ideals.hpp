#pragma once

#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "algebra.hpp"
#include "contexts.hpp"
#include "diagram.hpp"
#include "errors.hpp"

namespace ncspec {

// ---------------------------------------------------------------------------
// Ideals of the whole algebra

/// Two-sided ideals of a multi-matrix algebra: sums of summands, encoded as
/// bitmasks over summand indices (bit i = summand i).
struct IdealLattice {
    FdAlgebra algebra;
    std::vector<unsigned long> elements;

    std::size_t size() const { return elements.size(); }
    FiniteLattice lattice() const { return FiniteLattice::powerset(algebra.num_blocks()); }
    /// The central projection z with I = zA.
    Projection central_projection(std::size_t idx) const {
        return central_projection_from_mask(algebra, elements.at(idx));
    }
};

inline IdealLattice ideal_lattice(const FdAlgebra &a) {
    IdealLattice l{a, {}};
    for (unsigned long m = 0; m < (1ul << a.num_blocks()); ++m)
        l.elements.push_back(m);
    return l;
}

/// Pullback of ideals along phi, indexed by target ideal mask.
inline std::vector<unsigned long> ideal_preimage(const Hom &phi) {
    const auto &mult = phi.multiplicity();
    const std::size_t kt = phi.target().num_blocks();
    const std::size_t ks = phi.source().num_blocks();
    std::vector<unsigned long> out;
    for (unsigned long s = 0; s < (1ul << kt); ++s) {
        unsigned long pre = 0;
        for (std::size_t j = 0; j < ks; ++j) {
            bool inside = true;
            for (std::size_t i = 0; i < kt; ++i)
                if (mult[i][j] > 0 && !((s >> i) & 1ul))
                    inside = false;
            if (inside)
                pre |= 1ul << j;
        }
        out.push_back(pre);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Families of projections over a spatial diagram

/// One atom subset per context. `source` is set when the family is Pi_p,
/// which lets it be evaluated on contexts outside the diagram.
struct FamilyOfProjections {
    SpatialDiagram diagram;
    std::vector<AtomMask> masks;
    std::optional<Projection> source;

    Projection at(std::size_t i) const { return diagram.context(i).projection(masks.at(i)); }

    /// Index of the first inclusion arrow violating pi(V) = pi(V') cap V.
    std::optional<std::size_t> inconsistent_arrow() const {
        for (std::size_t k = 0; k < diagram.arrows().size(); ++k) {
            const auto &a = diagram.arrows()[k];
            if (a.kind == ArrowKind::Ad)
                continue;
            auto img = diagram.morphism(k).image_masks();
            AtomMask expect = 0;
            for (std::size_t x = 0; x < img.size(); ++x)
                if ((img[x] & ~masks.at(a.dst)) == 0)
                    expect |= AtomMask{1} << x;
            if (expect != masks.at(a.src))
                return k;
        }
        return std::nullopt;
    }
    bool is_consistent() const { return !inconsistent_arrow(); }
};

/// Pi_p: in each context, the atoms lying below p.
inline FamilyOfProjections family_from_projection(const Projection &p, const SpatialDiagram &d) {
    FamilyOfProjections f{d, {}, p};
    for (const auto &v : d.contexts())
        f.masks.push_back(v.atoms_below(p));
    return f;
}

struct Witness {
    enum class Kind { ContextPair, Unitary };
    Kind kind = Kind::Unitary;
    std::size_t context = 0;               // V
    std::optional<std::size_t> target;     // context holding u V u*, when in the diagram
    std::optional<std::size_t> arrow;      // violating Ad arrow (ContextPair)
    Unitary u;
    Projection lhs;                        // u pi(V) u*
    Projection rhs;                        // pi(u V u*)

    std::string describe() const {
        std::string s = kind == Kind::ContextPair ? "arrow " + std::to_string(arrow.value_or(0))
                                                  : std::string("unitary");
        s += " on context " + std::to_string(context);
        if (target)
            s += " -> " + std::to_string(*target);
        std::ostringstream gap;
        gap << (lhs.element() - rhs.element()).max_norm();
        s += ": u pi(V) u* and pi(u V u*) differ by " + gap.str() + " (ranks " +
             rank_profile(lhs).to_string() + " vs " + rank_profile(rhs).to_string() + ")";
        return s;
    }
};

struct InvarianceResult {
    bool invariant = true;
    std::optional<Witness> witness;
};

namespace detail {

// u pi(V) u* against pi(W) for W = u V u*, pi(W) read off the family or
// from its source projection.
inline std::optional<Witness> check_conjugate(const FamilyOfProjections &f, std::size_t i,
                                              const Unitary &u) {
    const FdAlgebra &a = f.diagram.algebra();
    const Context &v = f.diagram.context(i);
    Context w = v.conjugated(u);
    Projection lhs = u.conjugate(f.at(i));
    Projection rhs;
    std::optional<std::size_t> target = f.diagram.find(w);
    if (target)
        rhs = f.at(*target);
    else if (f.source)
        rhs = w.projection(w.atoms_below(*f.source));
    else
        throw UnresolvableContext("u V u* for context " + std::to_string(i) +
                                  " is not in the diagram and the family has no source projection");
    if (lhs.element().approx_equal(rhs.element(), a.tolerance()))
        return std::nullopt;
    return Witness{Witness::Kind::Unitary, i, target, std::nullopt, u, lhs, rhs};
}

} // namespace detail

/// u pi(V) u* = pi(u V u*) along every Ad arrow of the diagram and for every
/// supplied unitary on every context.
inline InvarianceResult is_invariant(const FamilyOfProjections &f,
                                     const std::vector<Unitary> &extra_unitaries = {}) {
    const auto &d = f.diagram;
    const double tol = d.algebra().tolerance();
    for (std::size_t k = 0; k < d.arrows().size(); ++k) {
        const auto &arrow = d.arrows()[k];
        if (arrow.kind != ArrowKind::Ad)
            continue;
        auto img = d.morphism(k).image_masks();
        Projection lhs = arrow.u.conjugate(f.at(arrow.src));
        AtomMask covered = 0;
        for (std::size_t x = 0; x < img.size(); ++x)
            if ((img[x] & ~f.masks[arrow.dst]) == 0)
                covered |= img[x];
        Projection rhs = d.context(arrow.dst).projection(covered);
        if (!lhs.element().approx_equal(rhs.element(), tol))
            return {false, Witness{Witness::Kind::ContextPair, arrow.src, arrow.dst, k, arrow.u,
                                   lhs, rhs}};
    }
    for (const auto &u : extra_unitaries)
        for (std::size_t i = 0; i < d.num_contexts(); ++i)
            if (auto w = detail::check_conjugate(f, i, u))
                return {false, w};
    return {};
}

// ---------------------------------------------------------------------------
// Limit lattice of invariant partial ideals

struct TildeCtLimit {
    SpatialDiagram diagram;
    LimitLattice lattice;

    std::size_t size() const { return lattice.size(); }
    FamilyOfProjections family(std::size_t idx) const {
        FamilyOfProjections f{diagram, {}, std::nullopt};
        for (std::size_t x : lattice[idx])
            f.masks.push_back(static_cast<AtomMask>(x));
        return f;
    }
};

namespace detail {

// Inclusion arrows not factoring through a third context.
inline std::vector<std::size_t> hasse_inclusions(const SpatialDiagram &d) {
    const std::size_t n = d.num_contexts();
    std::vector<std::vector<char>> incl(n, std::vector<char>(n, 0));
    for (const auto &a : d.arrows())
        if (a.kind == ArrowKind::Inclusion && a.src != a.dst)
            incl[a.src][a.dst] = 1;
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < d.arrows().size(); ++k) {
        const auto &a = d.arrows()[k];
        if (a.kind != ArrowKind::Inclusion || a.src == a.dst)
            continue;
        bool covering = true;
        for (std::size_t m = 0; m < n && covering; ++m)
            if (m != a.src && m != a.dst && incl[a.src][m] && incl[m][a.dst])
                covering = false;
        if (covering)
            out.push_back(k);
    }
    return out;
}

// I(Ad_u): pi(V') |-> {a in V : u a u* <= pi(V')}, from dst lattice to src.
inline FunctionalArrow ideal_pullback(const SpatialDiagram &d, std::size_t k) {
    const auto &a = d.arrows()[k];
    auto img = d.morphism(k).image_masks();
    const std::size_t m = d.context(a.dst).size();
    FunctionalArrow f{a.dst, a.src, {}};
    f.map.resize(std::size_t{1} << m);
    for (std::size_t s = 0; s < f.map.size(); ++s) {
        AtomMask out = 0;
        for (std::size_t x = 0; x < img.size(); ++x)
            if ((img[x] & ~static_cast<AtomMask>(s)) == 0)
                out |= AtomMask{1} << x;
        f.map[s] = static_cast<std::size_t>(out);
    }
    return f;
}

} // namespace detail

/// All families consistent on inclusions and invariant along Ad arrows of d.
inline TildeCtLimit tilde_ct_limit(const FdAlgebra &a, const SpatialDiagram &d) {
    if (!(d.algebra() == a))
        throw InvalidContext("diagram is over " + d.algebra().spec() + ", not " + a.spec());
    DiagramLat lat;
    for (const auto &v : d.contexts()) {
        if (v.size() > 20)
            throw ShapeMismatch("context with " + std::to_string(v.size()) +
                                " atoms is too large for the ideal lattice search");
        lat.objects.push_back(FiniteLattice::powerset(v.size()));
    }
    for (std::size_t k : detail::hasse_inclusions(d))
        lat.arrows.push_back(detail::ideal_pullback(d, k));
    for (std::size_t k = 0; k < d.arrows().size(); ++k)
        if (d.arrows()[k].kind == ArrowKind::Ad)
            lat.arrows.push_back(detail::ideal_pullback(d, k));
    return TildeCtLimit{d, limit_meet_semilattice(lat, false)};
}

// ---------------------------------------------------------------------------
// Refutation of non-central candidates

struct Refutation {
    SpatialDiagram diagram; // enriched (emptied once saturate takes it over)
    Witness witness;        // Pi_q fails invariance under the cover unitary
    Projection q;
    CoverOrbit cover;
    std::vector<Unitary> orbit_unitaries; // w with w q w* = members[t]
    std::size_t v_q = 0;
    std::vector<std::size_t> v_m;
    std::size_t v_M = 0;
    std::size_t v_s = 0;
    std::size_t v_uqu = 0;
    std::size_t v_s_uqu = 0;

    std::vector<Unitary> unitaries() const {
        std::vector<Unitary> out = orbit_unitaries;
        out.push_back(cover.u);
        return out;
    }
};

/// Enriches d so that no consistent invariant family assigns q at V<q>:
/// Pi(V<m>) >= m for all m forces Pi(V<s>) >= s, Ad_u forces
/// Pi(V<uqu*>) >= uqu*, so Pi(V<s,uqu*>) >= s + sR = C(q) and the centre,
/// hence V<q>, would have to carry C(q) > q.
inline Refutation refute_noncentral(const Projection &q, const SpatialDiagram &d) {
    if (is_central(q))
        throw AlreadyCentral("projection with ranks " + rank_profile(q).to_string() +
                             " is central");
    const FdAlgebra &a = q.algebra();
    const double tol = a.tolerance();
    Refutation r;
    r.diagram = d;
    r.q = q;
    r.cover = cover_orbit(q);
    auto &g = r.diagram;
    const std::size_t first_new = g.num_contexts();
    const std::size_t center = g.add_context(center_context(a));

    r.v_q = g.add_context(generate_context(a, {q}, true));
    for (const auto &m : r.cover.members) {
        r.v_m.push_back(g.add_context(generate_context(a, {m}, true)));
        auto w = unitary_equiv_certificate(m, q);
        if (!w)
            throw InvalidMorphism("orbit member not unitarily equivalent to q");
        r.orbit_unitaries.push_back(*w);
    }
    r.v_M = g.add_context(generate_context(a, r.cover.members, true));
    r.v_s = g.add_context(generate_context(a, {r.cover.sup}, true));
    Projection uqu = r.cover.u.conjugate(q);
    r.v_uqu = g.add_context(generate_context(a, {uqu}, true));
    r.v_s_uqu = g.add_context(generate_context(a, {r.cover.sup, uqu}, true));

    g.add_all_inclusions(std::min(first_new, center));
    for (std::size_t t = 0; t < r.cover.members.size(); ++t)
        if (!r.cover.members[t].element().approx_equal(q.element(), tol))
            g.add_arrow(r.v_q, r.v_m[t], r.orbit_unitaries[t], ArrowKind::Ad);
    g.add_arrow(r.v_q, r.v_uqu, r.cover.u, ArrowKind::Ad);

    Projection lhs = uqu;
    Projection rhs = g.context(r.v_uqu).projection(g.context(r.v_uqu).atoms_below(q));
    r.witness = Witness{Witness::Kind::Unitary, r.v_q, r.v_uqu, std::nullopt, r.cover.u, lhs, rhs};
    return r;
}

/// Sup lemma on one family: Pi(V<m>) >= m for every member implies
/// Pi(V<s>) >= s.
inline bool sup_lemma_holds(const FamilyOfProjections &f, const Refutation &r) {
    const auto &d = f.diagram;
    auto below = [&](std::size_t ctx, const Projection &p) {
        auto m = d.context(ctx).mask_of(p);
        return m && (*m & ~f.masks.at(ctx)) == 0;
    };
    for (std::size_t t = 0; t < r.cover.members.size(); ++t)
        if (!below(r.v_m[t], r.cover.members[t]))
            return true;
    return below(r.v_s, r.cover.sup);
}

/// Projection-level facts behind a refutation: M is pairwise partially
/// orthogonal with sup s, s + sR = C(q), sR <= u q u*.
inline bool cover_facts_hold(const Refutation &r) {
    const FdAlgebra &a = r.q.algebra();
    const double tol = a.tolerance();
    const auto &ms = r.cover.members;
    for (std::size_t i = 0; i < ms.size(); ++i)
        for (std::size_t j = i + 1; j < ms.size(); ++j)
            if (!partially_orthogonal(ms[i], ms[j]))
                return false;
    if (!supremum(a, ms).element().approx_equal(r.cover.sup.element(), tol))
        return false;
    Element c = r.cover.sup.element() + r.cover.remainder.element();
    if (!c.approx_equal(central_carrier(r.q).element(), tol))
        return false;
    return leq(r.cover.remainder, r.cover.u.conjugate(r.q));
}

// ---------------------------------------------------------------------------
// Saturation

struct SaturationResult {
    SpatialDiagram diagram;
    std::size_t rounds = 0;
    std::size_t num_families = 0;
    std::vector<std::size_t> central_index; // central mask z -> family index of Pi_z
    bool bijection = false;
    bool sup_lemma = true;
    std::vector<Refutation> refutations;
    std::vector<std::size_t> families_per_round;
};

namespace detail {

// Non-central q = z + a excluded by refuting it, where z = pi(centre) and a
// is the first atom of a centre-containing context W with a <= pi(W), a !<= z.
inline std::optional<Projection> refutation_candidate(const FamilyOfProjections &f,
                                                      std::size_t center) {
    const auto &d = f.diagram;
    const Context &zc = d.context(center);
    Projection z = f.at(center);
    for (std::size_t w = 0; w < d.num_contexts(); ++w) {
        const Context &v = d.context(w);
        if (!zc.subset_of(v))
            continue;
        AtomMask extra = f.masks[w] & ~v.atoms_below(z);
        for (std::size_t x = 0; x < v.size(); ++x) {
            if (!((extra >> x) & 1))
                continue;
            Projection q(z.element() + v.atom(x).element());
            if (!is_central(q))
                return q;
        }
    }
    return std::nullopt;
}

} // namespace detail

/// Refutation closure from the inclusion-only core diagram: each round
/// computes the limit lattice and refutes every family other than some
/// Pi_z. Throws SaturationCapExceeded when max_rounds limits pass without
/// a clean round.
inline SaturationResult saturate(const FdAlgebra &a, std::size_t max_rounds = 16) {
    SaturationResult res;
    res.diagram = build_core_diagram(a, {}, {}).inclusions_only();
    const double tol = a.tolerance();
    const std::size_t k = a.num_blocks();
    for (std::size_t round = 1;; ++round) {
        if (round > max_rounds)
            throw SaturationCapExceeded("no fixpoint for " + a.spec() + " within " +
                                        std::to_string(max_rounds) + " rounds");
        res.rounds = round;
        TildeCtLimit lim = tilde_ct_limit(a, res.diagram);
        res.families_per_round.push_back(lim.size());
        const std::size_t center = *res.diagram.find(center_context(a));

        std::vector<std::vector<std::size_t>> central_tuples;
        for (unsigned long z = 0; z < (1ul << k); ++z) {
            auto pz = family_from_projection(central_projection_from_mask(a, z), res.diagram);
            central_tuples.emplace_back(pz.masks.begin(), pz.masks.end());
        }
        std::vector<Projection> candidates;
        for (std::size_t i = 0; i < lim.size(); ++i) {
            bool central = false;
            for (const auto &t : central_tuples)
                central = central || t == lim.lattice[i];
            if (central)
                continue;
            auto q = detail::refutation_candidate(lim.family(i), center);
            if (!q)
                throw NotWellDefined("family " + std::to_string(i) +
                                     " is not central yet yields no refutable projection");
            bool seen = false;
            for (const auto &c : candidates)
                seen = seen || c.element().approx_equal(q->element(), tol);
            if (!seen)
                candidates.push_back(*q);
        }
        if (candidates.empty()) {
            res.num_families = lim.size();
            res.central_index.clear();
            bool ok = lim.size() == (std::size_t{1} << k);
            for (const auto &t : central_tuples) {
                auto idx = lim.lattice.find(t);
                ok = ok && idx.has_value();
                res.central_index.push_back(idx.value_or(0));
            }
            for (unsigned long z = 0; ok && z < (1ul << k); ++z) {
                // evaluating Pi_z at the centre gives back z
                ok = lim.lattice[res.central_index[z]][center] ==
                     res.diagram.context(center).atoms_below(central_projection_from_mask(a, z));
                for (unsigned long y = 0; ok && y < (1ul << k); ++y)
                    ok = ((z & y) == z) ==
                         lim.lattice.leq(res.central_index[z], res.central_index[y]);
            }
            res.bijection = ok;
            for (const auto &r : res.refutations) {
                res.sup_lemma = res.sup_lemma && cover_facts_hold(r);
                for (std::size_t i = 0; i < lim.size(); ++i)
                    res.sup_lemma = res.sup_lemma && sup_lemma_holds(lim.family(i), r);
                for (const Projection &x : {r.q, r.cover.sup, central_carrier(r.q),
                                            Projection::identity(a)})
                    res.sup_lemma =
                        res.sup_lemma && sup_lemma_holds(family_from_projection(x, res.diagram), r);
            }
            return res;
        }
        if (round == max_rounds)
            throw SaturationCapExceeded("no fixpoint for " + a.spec() + " within " +
                                        std::to_string(max_rounds) + " rounds");
        for (const auto &q : candidates) {
            Refutation r = refute_noncentral(q, res.diagram);
            res.diagram = std::move(r.diagram);
            r.diagram = SpatialDiagram(a);
            res.refutations.push_back(std::move(r));
        }
    }
}

} // namespace ncspec
