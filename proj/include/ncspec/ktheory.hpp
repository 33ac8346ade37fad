#pragma once

// K-theory at finite dimension: topological K of finite discrete spaces, the
// standard K0 (rank-tuple monoid fed through the Grothendieck construction),
// the colimit route Ktilde_f over a spatial diagram, and the comparison map
// eta between them.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "abelian.hpp"
#include "algebra.hpp"
#include "contexts.hpp"
#include "diagram.hpp"
#include "smith.hpp"

namespace ncspec {

/// An element of a computed group, in its canonical coordinates.
struct KClass {
    std::shared_ptr<const AbGroup> group;
    IntVector coords;

    bool operator==(const KClass &o) const { return coords == o.coords; }
    friend KClass operator+(const KClass &a, const KClass &b) {
        IntVector c(a.coords.size());
        for (std::size_t i = 0; i < c.size(); ++i)
            c[i] = a.coords[i] + b.coords.at(i);
        return KClass{a.group, a.group->reduce(c)};
    }
};

inline AbGroup k_top(const FinSpace &x) { return AbGroup::free(x.size()); }

/// Pullback of dimension functions along f: X -> Y, a |X| x |Y| matrix with
/// a single 1 in each row.
inline IntMatrix k_top_pullback(const SpaceMap &f) {
    IntMatrix m(f.source.size(), f.target.size());
    for (std::size_t x = 0; x < f.assignment.size(); ++x)
        m(x, f.assignment[x]) = 1;
    return m;
}

// ---------------------------------------------------------------------------
// Standard K0

/// K0 presented by rank tuples r <= (n_1, ..., n_k) (the unit tuples first),
/// with [r] = [r - e_i] + [e_i] for the first nonzero index i of r and
/// [0] + [0] = [0].
class K0Standard {
  public:
    explicit K0Standard(FdAlgebra a) : alg_(std::move(a)) {
        const std::size_t k = alg_.num_blocks();
        for (std::size_t i = 0; i < k; ++i) {
            RankTuple e{std::vector<int>(k, 0)};
            e.ranks[i] = 1;
            add_generator(e);
        }
        RankTuple r{std::vector<int>(k, 0)};
        bool done = false;
        while (!done) {
            add_generator(r);
            done = true;
            for (std::size_t i = k; i-- > 0;) {
                if (++r.ranks[i] <= alg_.block_size(i)) {
                    done = false;
                    break;
                }
                r.ranks[i] = 0;
            }
        }
        const std::size_t n = gens_.size();
        std::vector<std::pair<IntVector, IntVector>> rels;
        RankTuple zero{std::vector<int>(k, 0)};
        {
            IntVector lhs(n), rhs(n);
            lhs[index_.at(zero.ranks)] = 2;
            rhs[index_.at(zero.ranks)] = 1;
            rels.emplace_back(lhs, rhs);
        }
        for (std::size_t g = 0; g < n; ++g) {
            const RankTuple &t = gens_[g];
            int total = 0;
            std::size_t first = k;
            for (std::size_t i = 0; i < k; ++i) {
                total += t[i];
                if (t[i] > 0 && first == k)
                    first = i;
            }
            if (total <= 1)
                continue;
            RankTuple rest = t;
            rest.ranks[first] -= 1;
            RankTuple unit{std::vector<int>(k, 0)};
            unit.ranks[first] = 1;
            IntVector lhs(n), rhs(n);
            lhs[index_.at(rest.ranks)] += 1;
            lhs[index_.at(unit.ranks)] += 1;
            rhs[g] = 1;
            rels.emplace_back(lhs, rhs);
        }
        group_ = std::make_shared<const AbGroup>(grothendieck(n, rels));
    }

    const FdAlgebra &algebra() const { return alg_; }
    const AbGroup &group() const { return *group_; }
    std::shared_ptr<const AbGroup> group_ptr() const { return group_; }
    const std::vector<RankTuple> &generators() const { return gens_; }

    std::size_t generator_index(const RankTuple &r) const {
        auto it = index_.find(r.ranks);
        if (it == index_.end())
            throw ShapeMismatch("rank tuple " + r.to_string() + " exceeds " + alg_.spec());
        return it->second;
    }
    KClass class_of_ranks(const RankTuple &r) const {
        return KClass{group_, group_->generator_coords(generator_index(r))};
    }
    KClass class_of(const Projection &p) const {
        if (!(p.algebra() == alg_))
            throw ShapeMismatch("projection not in " + alg_.spec());
        return class_of_ranks(rank_profile(p));
    }

  private:
    void add_generator(const RankTuple &r) {
        if (index_.count(r.ranks))
            return;
        index_[r.ranks] = gens_.size();
        gens_.push_back(r);
    }

    FdAlgebra alg_;
    std::vector<RankTuple> gens_;
    std::map<std::vector<int>, std::size_t> index_;
    std::shared_ptr<const AbGroup> group_;
};

inline K0Standard k0_standard(const FdAlgebra &a) { return K0Standard(a); }

/// K0(phi) in canonical coordinates, induced by r |-> transport_ranks(phi, r)
/// on generators.
inline IntMatrix k0_hom(const Hom &phi, const K0Standard &src, const K0Standard &dst) {
    if (!phi.is_unital())
        throw InvalidHom("k0_hom needs a unital homomorphism");
    const auto &gens = src.generators();
    IntMatrix h(dst.generators().size(), gens.size());
    for (std::size_t j = 0; j < gens.size(); ++j)
        h(dst.generator_index(transport_ranks(phi, gens[j])), j) = 1;
    return induced_hom(src.group(), dst.group(), h);
}

inline IntMatrix k0_hom(const Hom &phi) {
    return k0_hom(phi, K0Standard(phi.source()), K0Standard(phi.target()));
}

// ---------------------------------------------------------------------------
// Ktilde_f as a colimit over K o Sigma

/// The diagram K o Sigma: object = Z^{atoms}, arrow V -> V' given by the
/// pullback of dimension functions along Sigma(V') -> Sigma(V).
inline DiagramAb k_sigma_diagram(const SpatialDiagram &d) {
    DiagramAb out;
    for (const auto &v : d.contexts())
        out.objects.push_back(AbPresentation::free(v.size()));
    for (std::size_t k = 0; k < d.arrows().size(); ++k) {
        const auto &a = d.arrows()[k];
        out.arrows.push_back({a.src, a.dst, k_top_pullback(spectrum_map(d.morphism(k)))});
    }
    return out;
}

class KTildeF {
  public:
    KTildeF(FdAlgebra a, SpatialDiagram d) : alg_(std::move(a)), diagram_(std::move(d)) {
        if (!(diagram_.algebra() == alg_))
            throw ShapeMismatch("diagram over " + diagram_.algebra().spec() + ", algebra " + alg_.spec());
        ab_ = k_sigma_diagram(diagram_);
        colim_ = colimit_ab(ab_);
        group_ = std::make_shared<const AbGroup>(colim_.group);
    }

    const FdAlgebra &algebra() const { return alg_; }
    const SpatialDiagram &diagram() const { return diagram_; }
    const DiagramAb &ab_diagram() const { return ab_; }
    const Colimit &colimit() const { return colim_; }
    const AbGroup &group() const { return *group_; }
    std::shared_ptr<const AbGroup> group_ptr() const { return group_; }

    /// Class of the atom-sum given by mask in context i.
    KClass class_at(std::size_t i, AtomMask mask) const {
        IntVector c(group_->dimension());
        const IntMatrix &inj = colim_.injections.at(i);
        for (std::size_t a = 0; a < inj.cols(); ++a)
            if (mask >> a & 1)
                for (std::size_t r = 0; r < c.size(); ++r)
                    c[r] += inj(r, a);
        return KClass{group_, group_->reduce(c)};
    }

    /// [p]_u, read off the first context in which p is a sum of atoms.
    KClass class_of_u(const Projection &p) const {
        if (is_zero_projection(p))
            return KClass{group_, IntVector(group_->dimension())};
        auto loc = diagram_.locate(p);
        if (!loc)
            throw ContextMissing("no context of the diagram contains a projection of ranks " +
                                 rank_profile(p).to_string());
        return class_at(loc->first, loc->second);
    }

  private:
    FdAlgebra alg_;
    SpatialDiagram diagram_;
    DiagramAb ab_;
    Colimit colim_;
    std::shared_ptr<const AbGroup> group_;
};

inline KTildeF ktilde_f(const FdAlgebra &a, const SpatialDiagram &d) { return KTildeF(a, d); }

/// Context of B spanned by phi of the atoms of v (zero images dropped).
inline Context image_context(const Hom &phi, const Context &v) {
    std::vector<Projection> atoms;
    for (const auto &a : v.atoms()) {
        Projection img = phi(a);
        if (!is_zero_projection(img))
            atoms.push_back(std::move(img));
    }
    return Context(phi.target(), std::move(atoms));
}

/// Diagram morphism K Sigma(D_A) -> K Sigma(D_B) induced by phi: V |-> phi(V),
/// atom a |-> the atom phi(a) (nothing when phi(a) = 0).
inline DiagMorphism induced_diagram_morphism(const Hom &phi, const SpatialDiagram &da,
                                             const SpatialDiagram &db) {
    DiagMorphism m;
    for (std::size_t i = 0; i < da.num_contexts(); ++i) {
        const Context &v = da.context(i);
        Context img = image_context(phi, v);
        auto j = db.find(img);
        if (!j)
            throw ContextMissing("image of context " + std::to_string(i) + " is not in the target diagram");
        const Context &w = db.context(*j);
        IntMatrix c(w.size(), v.size());
        for (std::size_t a = 0; a < v.size(); ++a) {
            Projection pa = phi(v.atom(a));
            if (is_zero_projection(pa))
                continue;
            auto mask = w.mask_of(pa);
            if (!mask || (*mask & (*mask - 1)) != 0)
                throw ContextMissing("image of an atom is not an atom of the image context");
            for (std::size_t b = 0; b < w.size(); ++b)
                if (*mask >> b & 1)
                    c(b, a) = 1;
        }
        m.object_map.push_back(*j);
        m.components.push_back(std::move(c));
    }
    return m;
}

/// Core diagram of phi's target that also contains phi(V) for every context
/// V of da.
inline SpatialDiagram core_diagram_with_images(const Hom &phi, const SpatialDiagram &da) {
    std::vector<Context> images;
    for (const auto &v : da.contexts())
        images.push_back(image_context(phi, v));
    return build_core_diagram(phi.target(), {}, {}, images);
}

inline IntMatrix ktilde_f_hom(const Hom &phi, const KTildeF &src, const KTildeF &dst) {
    DiagMorphism m = induced_diagram_morphism(phi, src.diagram(), dst.diagram());
    return colimit_induced_map(src.ab_diagram(), src.colimit(), dst.ab_diagram(), dst.colimit(), m);
}

/// Ktilde_f of a possibly non-unital algebra, as the kernel of
/// Ktilde_f(pi): Ktilde_f(A+) -> Ktilde_f(C).
struct KTildeKernel {
    AbGroup group;
    IntMatrix embedding; // kernel basis in coordinates of Ktilde_f(A+)
    IntMatrix pi_map;    // Ktilde_f(A+) -> Ktilde_f(C) = Z
};

inline KTildeKernel ktilde_f_kernel(const FdAlgebra &a) {
    Unitalisation u = unitalisation(a);
    KTildeF plus(u.plus, build_core_diagram(u.plus, {}, {}));
    const FdAlgebra &c = u.pi.target();
    KTildeF base(c, build_core_diagram(c, {}, {}));
    if (!plus.group().is_free() || !base.group().is_free())
        throw NotWellDefined("kernel computation expects free colimit groups");
    DiagMorphism m;
    for (std::size_t i = 0; i < plus.diagram().num_contexts(); ++i) {
        const Context &v = plus.diagram().context(i);
        IntMatrix comp(1, v.size());
        for (std::size_t k = 0; k < v.size(); ++k)
            comp(0, k) = is_zero_projection(u.pi(v.atom(k))) ? 0 : 1;
        m.object_map.push_back(0);
        m.components.push_back(std::move(comp));
    }
    IntMatrix pi_map = colimit_induced_map(plus.ab_diagram(), plus.colimit(), base.ab_diagram(),
                                           base.colimit(), m);
    IntMatrix ker = integer_kernel(pi_map);
    return KTildeKernel{AbGroup::free(ker.cols()), ker, pi_map};
}

// ---------------------------------------------------------------------------
// The comparison eta: K0 -> Ktilde_f

namespace detail {

inline IntMatrix unimodular_inverse(const IntMatrix &m) {
    SmithForm s = smith_normal_form(m);
    if (m.rows() != m.cols() || s.rank != m.rows())
        throw IsoFailure("matrix " + m.shape() + " is not invertible");
    for (std::size_t i = 0; i < s.rank; ++i)
        if (s.D(i, i) != 1)
            throw IsoFailure("matrix is not unimodular");
    return s.V * s.U;
}

} // namespace detail

struct EtaReport {
    IntMatrix eta_a;
    bool iso = false;
    std::optional<IntMatrix> eta_b;
    std::optional<IntMatrix> k0_phi;
    std::optional<IntMatrix> ktilde_phi;
    bool natural = false;
};

/// eta in canonical coordinates: fixed by eta [e^{(i)}_{11}] = [e^{(i)}_{11}]_u
/// and checked on every atom of the diagram. Throws IsoFailure.
inline IntMatrix eta_matrix(const K0Standard &k0, const KTildeF &kt) {
    const FdAlgebra &a = k0.algebra();
    const std::size_t k = a.num_blocks();
    if (k0.group().dimension() != k)
        throw IsoFailure("K0 has " + std::to_string(k0.group().dimension()) + " coordinates, expected " +
                         std::to_string(k));
    IntMatrix c(k, k), e(kt.group().dimension(), k);
    for (std::size_t i = 0; i < k; ++i) {
        Projection unit(matrix_unit(a, i, 0, 0));
        IntVector ci = k0.class_of(unit).coords, ei = kt.class_of_u(unit).coords;
        for (std::size_t r = 0; r < k; ++r)
            c(r, i) = ci[r];
        for (std::size_t r = 0; r < ei.size(); ++r)
            e(r, i) = ei[r];
    }
    IntMatrix eta = kt.group().reduce_matrix(e * detail::unimodular_inverse(c));
    if (!k0.group().isomorphic_to(kt.group()))
        throw IsoFailure("K0 = " + k0.group().factors_string() + " but Ktilde_f = " +
                         kt.group().factors_string());
    if (eta.rows() != eta.cols() || abs(determinant(eta)) != 1)
        throw IsoFailure("eta is not invertible");
    const auto &d = kt.diagram();
    for (std::size_t i = 0; i < d.num_contexts(); ++i)
        for (std::size_t x = 0; x < d.context(i).size(); ++x) {
            const Projection &p = d.context(i).atom(x);
            IntVector lhs = kt.group().reduce(eta * k0.class_of(p).coords);
            if (lhs != kt.class_at(i, AtomMask{1} << x).coords)
                throw IsoFailure("eta disagrees on atom " + std::to_string(x) + " of context " +
                                 std::to_string(i) + " (ranks " + rank_profile(p).to_string() + ")");
        }
    return eta;
}

/// Builds eta_A (and eta_B with the naturality square when phi is given).
/// Throws IsoFailure / NaturalityFailure.
inline EtaReport eta_check(const FdAlgebra &a, const std::optional<Hom> &phi, const SpatialDiagram &da,
                           const std::optional<SpatialDiagram> &db = std::nullopt) {
    EtaReport rep;
    K0Standard k0a(a);
    KTildeF kta(a, da);
    rep.eta_a = eta_matrix(k0a, kta);
    rep.iso = true;
    if (!phi) {
        rep.natural = true;
        return rep;
    }
    if (!(phi->source() == a))
        throw ShapeMismatch("hom source " + phi->source().spec() + " differs from " + a.spec());
    const FdAlgebra &b = phi->target();
    K0Standard k0b(b);
    KTildeF ktb(b, db ? *db : core_diagram_with_images(*phi, da));
    rep.eta_b = eta_matrix(k0b, ktb);
    rep.k0_phi = k0_hom(*phi, k0a, k0b);
    try {
        rep.ktilde_phi = ktilde_f_hom(*phi, kta, ktb);
    } catch (const NotWellDefined &e) {
        throw NaturalityFailure(std::string("Ktilde_f(phi) is not well defined: ") + e.what());
    }
    IntMatrix lhs = ktb.group().reduce_matrix(*rep.ktilde_phi * rep.eta_a);
    IntMatrix rhs = ktb.group().reduce_matrix(*rep.eta_b * *rep.k0_phi);
    for (std::size_t j = 0; j < lhs.cols(); ++j)
        if (lhs.col(j) != rhs.col(j))
            throw NaturalityFailure("square fails on K0 generator " + std::to_string(j) + ": " +
                                    to_string(lhs.col(j)) + " vs " + to_string(rhs.col(j)));
    rep.natural = true;
    return rep;
}

} // namespace ncspec
