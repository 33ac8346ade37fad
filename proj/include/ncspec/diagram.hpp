#pragma once

// Variable-shape diagrams and their (co)limits: colimits of finitely
// presented abelian groups, limits of finite sets and of finite
// meet-semilattices.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "abelian.hpp"
#include "errors.hpp"
#include "int_matrix.hpp"

namespace ncspec {

// ---------------------------------------------------------------------------
// Abelian groups

struct AbArrow {
    std::size_t src = 0;
    std::size_t dst = 0;
    IntMatrix map; // dst generators x src generators
};

struct DiagramAb {
    std::vector<AbPresentation> objects;
    std::vector<AbArrow> arrows;

    void validate() const {
        for (std::size_t h = 0; h < arrows.size(); ++h) {
            const auto &a = arrows[h];
            if (a.src >= objects.size() || a.dst >= objects.size())
                throw ShapeMismatch("arrow " + std::to_string(h) + " endpoint out of range");
            if (a.map.rows() != objects[a.dst].num_generators ||
                a.map.cols() != objects[a.src].num_generators)
                throw ShapeMismatch("arrow " + std::to_string(h) + " has map " + a.map.shape());
        }
    }

    std::vector<std::size_t> offsets() const {
        std::vector<std::size_t> off(objects.size() + 1, 0);
        for (std::size_t a = 0; a < objects.size(); ++a)
            off[a + 1] = off[a] + objects[a].num_generators;
        return off;
    }
};

/// Colimit group with its cocone: injections[a] maps generators of object a
/// to canonical coordinates of the colimit.
struct Colimit {
    AbGroup group;
    std::vector<IntMatrix> injections;
    std::vector<std::size_t> offsets;
};

/// Direct sum of the objects modulo (g)_a - (D(h)(g))_a' for every arrow
/// h: a -> a' and generator g, together with each object's own relations.
inline Colimit colimit_ab(const DiagramAb &d) {
    d.validate();
    auto off = d.offsets();
    const std::size_t total = off.back();
    IntMatrix rels(0, total);
    for (std::size_t a = 0; a < d.objects.size(); ++a) {
        const auto &r = d.objects[a].relations;
        for (std::size_t i = 0; i < r.rows(); ++i) {
            IntVector row(total);
            for (std::size_t j = 0; j < r.cols(); ++j)
                row[off[a] + j] = r(i, j);
            rels.append_row(row);
        }
    }
    for (const auto &arrow : d.arrows) {
        const std::size_t n = d.objects[arrow.src].num_generators;
        for (std::size_t g = 0; g < n; ++g) {
            IntVector row(total);
            row[off[arrow.src] + g] += 1;
            for (std::size_t k = 0; k < arrow.map.rows(); ++k)
                row[off[arrow.dst] + k] -= arrow.map(k, g);
            rels.append_row(row);
        }
    }
    Colimit out;
    out.group = AbGroup::from_presentation(AbPresentation(total, std::move(rels)));
    out.offsets = off;
    const IntMatrix &img = out.group.generator_images();
    for (std::size_t a = 0; a < d.objects.size(); ++a)
        out.injections.push_back(img.block(0, img.rows(), off[a], off[a + 1]));
    return out;
}

/// A morphism of diagrams (f, eta): object_map is f on objects, components[a]
/// is eta_a : D(a) -> E(f(a)) at the generator level.
struct DiagMorphism {
    std::vector<std::size_t> object_map;
    std::vector<IntMatrix> components;

    static DiagMorphism identity(const DiagramAb &d) {
        DiagMorphism m;
        for (std::size_t a = 0; a < d.objects.size(); ++a) {
            m.object_map.push_back(a);
            m.components.push_back(IntMatrix::identity(d.objects[a].num_generators));
        }
        return m;
    }
};

/// (g, mu) . (f, eta) = (g o f, mu_f o eta).
inline DiagMorphism compose(const DiagMorphism &second, const DiagMorphism &first) {
    DiagMorphism out;
    for (std::size_t a = 0; a < first.object_map.size(); ++a) {
        std::size_t fa = first.object_map[a];
        out.object_map.push_back(second.object_map.at(fa));
        out.components.push_back(second.components.at(fa) * first.components[a]);
    }
    return out;
}

/// Generator-level matrix of a diagram morphism (total E gens x total D gens).
inline IntMatrix assemble_generator_map(const DiagramAb &d, const DiagramAb &e,
                                        const DiagMorphism &m) {
    if (m.object_map.size() != d.objects.size() || m.components.size() != d.objects.size())
        throw ShapeMismatch("diagram morphism does not cover every source object");
    auto off_d = d.offsets();
    auto off_e = e.offsets();
    IntMatrix h(off_e.back(), off_d.back());
    for (std::size_t a = 0; a < d.objects.size(); ++a) {
        std::size_t fa = m.object_map[a];
        if (fa >= e.objects.size())
            throw ShapeMismatch("object map out of range");
        const IntMatrix &c = m.components[a];
        if (c.rows() != e.objects[fa].num_generators || c.cols() != d.objects[a].num_generators)
            throw ShapeMismatch("component " + std::to_string(a) + " has shape " + c.shape());
        for (std::size_t i = 0; i < c.rows(); ++i)
            for (std::size_t j = 0; j < c.cols(); ++j)
                h(off_e[fa] + i, off_d[a] + j) = c(i, j);
    }
    return h;
}

/// The map colim D -> colim E sending [(g)_a] to [(eta_a(g))_f(a)], in
/// canonical coordinates. Throws NotWellDefined when some relation of D is
/// not sent into the relation lattice of E (naturality failure).
inline IntMatrix colimit_induced_map(const DiagramAb &d, const Colimit &cd, const DiagramAb &e,
                                     const Colimit &ce, const DiagMorphism &m) {
    IntMatrix h = assemble_generator_map(d, e, m);
    return induced_hom(cd.group, ce.group, h);
}

inline IntMatrix colimit_induced_map(const DiagramAb &d, const DiagramAb &e,
                                     const DiagMorphism &m) {
    return colimit_induced_map(d, colimit_ab(d), e, colimit_ab(e), m);
}

// ---------------------------------------------------------------------------
// Limits by constraint search

/// Functional constraint value[dst] == map[value[src]] between finite domains.
struct FunctionalArrow {
    std::size_t src = 0;
    std::size_t dst = 0;
    std::vector<std::size_t> map; // indexed by src value
};

namespace detail {

// Enumerates every assignment satisfying all arrows. Backtracking with
// forward checking, branching on the unassigned object with the fewest
// remaining values. Results are sorted lexicographically.
class CompatibleTupleSearch {
  public:
    CompatibleTupleSearch(const std::vector<std::size_t> &sizes,
                          const std::vector<FunctionalArrow> &arrows)
        : sizes_(sizes), arrows_(arrows), incident_(sizes.size()) {
        for (std::size_t h = 0; h < arrows_.size(); ++h) {
            const auto &a = arrows_[h];
            if (a.src >= sizes_.size() || a.dst >= sizes_.size())
                throw ShapeMismatch("arrow endpoint out of range");
            if (a.map.size() != sizes_[a.src])
                throw ShapeMismatch("arrow map size " + std::to_string(a.map.size()) +
                                    " != domain size " + std::to_string(sizes_[a.src]));
            for (std::size_t v : a.map)
                if (v >= sizes_[a.dst])
                    throw ShapeMismatch("arrow map value out of range");
            incident_[a.src].push_back(h);
            if (a.dst != a.src)
                incident_[a.dst].push_back(h);
        }
    }

    std::vector<std::vector<std::size_t>> run() {
        const std::size_t n = sizes_.size();
        alive_.assign(n, {});
        count_.assign(n, 0);
        for (std::size_t a = 0; a < n; ++a) {
            alive_[a].assign(sizes_[a], 1);
            count_[a] = sizes_[a];
        }
        // self-loops restrict the domain statically
        for (const auto &arrow : arrows_)
            if (arrow.src == arrow.dst)
                for (std::size_t v = 0; v < sizes_[arrow.src]; ++v)
                    if (alive_[arrow.src][v] && arrow.map[v] != v) {
                        alive_[arrow.src][v] = 0;
                        --count_[arrow.src];
                    }
        value_.assign(n, 0);
        assigned_.assign(n, 0);
        results_.clear();
        if (n == 0) {
            results_.emplace_back();
            return results_;
        }
        recurse(0);
        std::sort(results_.begin(), results_.end());
        return results_;
    }

  private:
    void recurse(std::size_t depth) {
        const std::size_t n = sizes_.size();
        if (depth == n) {
            results_.push_back(value_);
            return;
        }
        std::size_t pick = n;
        for (std::size_t a = 0; a < n; ++a)
            if (!assigned_[a] && (pick == n || count_[a] < count_[pick]))
                pick = a;
        if (count_[pick] == 0)
            return;
        assigned_[pick] = 1;
        for (std::size_t v = 0; v < sizes_[pick]; ++v) {
            if (!alive_[pick][v])
                continue;
            value_[pick] = v;
            std::size_t mark = trail_.size();
            if (propagate(pick, v))
                recurse(depth + 1);
            undo(mark);
        }
        assigned_[pick] = 0;
    }

    bool propagate(std::size_t var, std::size_t v) {
        for (std::size_t h : incident_[var]) {
            const auto &arrow = arrows_[h];
            if (arrow.src == arrow.dst)
                continue;
            if (arrow.src == var) {
                std::size_t other = arrow.dst;
                std::size_t forced = arrow.map[v];
                if (assigned_[other]) {
                    if (value_[other] != forced)
                        return false;
                    continue;
                }
                for (std::size_t w = 0; w < sizes_[other]; ++w)
                    if (w != forced && alive_[other][w])
                        remove(other, w);
            } else {
                std::size_t other = arrow.src;
                if (assigned_[other]) {
                    if (arrow.map[value_[other]] != v)
                        return false;
                    continue;
                }
                for (std::size_t w = 0; w < sizes_[other]; ++w)
                    if (alive_[other][w] && arrow.map[w] != v)
                        remove(other, w);
            }
            if (count_[arrow.src == var ? arrow.dst : arrow.src] == 0)
                return false;
        }
        return true;
    }

    void remove(std::size_t var, std::size_t w) {
        alive_[var][w] = 0;
        --count_[var];
        trail_.emplace_back(var, w);
    }

    void undo(std::size_t mark) {
        while (trail_.size() > mark) {
            auto [var, w] = trail_.back();
            trail_.pop_back();
            alive_[var][w] = 1;
            ++count_[var];
        }
    }

    const std::vector<std::size_t> &sizes_;
    const std::vector<FunctionalArrow> &arrows_;
    std::vector<std::vector<std::size_t>> incident_;
    std::vector<std::vector<char>> alive_;
    std::vector<std::size_t> count_;
    std::vector<std::size_t> value_;
    std::vector<char> assigned_;
    std::vector<std::pair<std::size_t, std::size_t>> trail_;
    std::vector<std::vector<std::size_t>> results_;
};

} // namespace detail

/// Finite sets {0, ..., size-1} with total maps between them.
struct DiagramSet {
    std::vector<std::size_t> sizes;
    std::vector<FunctionalArrow> arrows;
};

/// Tuples (x_a) with D(h)(x_src) = x_dst for every arrow, in lexicographic order.
inline std::vector<std::vector<std::size_t>> limit_set(const DiagramSet &d) {
    detail::CompatibleTupleSearch search(d.sizes, d.arrows);
    return search.run();
}

/// Finite meet-semilattice with a top element; elements are 0..size-1.
struct FiniteLattice {
    std::size_t size = 0;
    std::size_t top = 0;
    std::function<std::size_t(std::size_t, std::size_t)> meet;

    bool leq(std::size_t a, std::size_t b) const { return meet(a, b) == a; }

    /// Subsets of an m-element set encoded as bitmasks, meet = intersection.
    static FiniteLattice powerset(std::size_t m) {
        FiniteLattice l;
        l.size = std::size_t{1} << m;
        l.top = l.size - 1;
        l.meet = [](std::size_t a, std::size_t b) { return a & b; };
        return l;
    }

    static FiniteLattice from_table(std::vector<std::vector<std::size_t>> table, std::size_t top) {
        FiniteLattice l;
        l.size = table.size();
        l.top = top;
        l.meet = [t = std::move(table)](std::size_t a, std::size_t b) { return t[a][b]; };
        return l;
    }
};

struct DiagramLat {
    std::vector<FiniteLattice> objects;
    std::vector<FunctionalArrow> arrows;

    /// Every arrow preserves binary meets and the top (checked exhaustively).
    void validate() const {
        for (std::size_t h = 0; h < arrows.size(); ++h) {
            const auto &arrow = arrows[h];
            const auto &s = objects.at(arrow.src);
            const auto &t = objects.at(arrow.dst);
            if (arrow.map.size() != s.size)
                throw ShapeMismatch("lattice arrow " + std::to_string(h) + " map size");
            if (arrow.map[s.top] != t.top)
                throw NotMeetPreserving("arrow " + std::to_string(h) + " does not preserve top");
            for (std::size_t x = 0; x < s.size; ++x)
                for (std::size_t y = x + 1; y < s.size; ++y)
                    if (arrow.map[s.meet(x, y)] != t.meet(arrow.map[x], arrow.map[y]))
                        throw NotMeetPreserving("arrow " + std::to_string(h) + " on (" +
                                                std::to_string(x) + ", " + std::to_string(y) + ")");
        }
    }
};

/// Limit lattice: compatible tuples ordered and met componentwise.
class LimitLattice {
  public:
    LimitLattice(std::vector<FiniteLattice> objects, std::vector<std::vector<std::size_t>> elements)
        : objects_(std::move(objects)), elements_(std::move(elements)) {
        for (std::size_t i = 0; i < elements_.size(); ++i)
            index_.emplace(elements_[i], i);
    }

    std::size_t size() const { return elements_.size(); }
    const std::vector<std::vector<std::size_t>> &elements() const { return elements_; }
    const std::vector<std::size_t> &operator[](std::size_t i) const { return elements_[i]; }

    std::optional<std::size_t> find(const std::vector<std::size_t> &tuple) const {
        auto it = index_.find(tuple);
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

    std::vector<std::size_t> meet_tuple(std::size_t i, std::size_t j) const {
        std::vector<std::size_t> m(objects_.size());
        for (std::size_t a = 0; a < objects_.size(); ++a)
            m[a] = objects_[a].meet(elements_[i][a], elements_[j][a]);
        return m;
    }

    /// Index of the componentwise meet; nullopt if the tuple is not in the
    /// limit (which would mean the limit is not closed under meets).
    std::optional<std::size_t> meet(std::size_t i, std::size_t j) const {
        return find(meet_tuple(i, j));
    }

    bool leq(std::size_t i, std::size_t j) const {
        for (std::size_t a = 0; a < objects_.size(); ++a)
            if (!objects_[a].leq(elements_[i][a], elements_[j][a]))
                return false;
        return true;
    }

  private:
    std::vector<FiniteLattice> objects_;
    std::vector<std::vector<std::size_t>> elements_;
    std::map<std::vector<std::size_t>, std::size_t> index_;
};

inline LimitLattice limit_meet_semilattice(const DiagramLat &d, bool validate_meets = true) {
    if (validate_meets)
        d.validate();
    std::vector<std::size_t> sizes;
    for (const auto &o : d.objects)
        sizes.push_back(o.size);
    detail::CompatibleTupleSearch search(sizes, d.arrows);
    return LimitLattice(d.objects, search.run());
}

} // namespace ncspec
