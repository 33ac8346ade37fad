#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "algebra.hpp"
#include "contexts.hpp"
#include "diagram.hpp"
#include "errors.hpp"

namespace ncspec {

using CVector = Eigen::VectorXcd;

// ---------------------------------------------------------------------------
// Kochen-Specker diagrams and global sections

/// One context per orthonormal basis of C^dim, and for each pair of bases
/// sharing projectors the context {shared projectors, their complement}
/// with inclusions into both.
inline SpatialDiagram ks_diagram(int dim, const std::vector<std::vector<CVector>> &bases,
                                 double tol = kDefaultTolerance) {
    if (dim < 1)
        throw NotOrthonormal("dimension must be positive");
    FdAlgebra a({dim}, tol);
    std::vector<std::vector<Projection>> projectors;
    for (std::size_t b = 0; b < bases.size(); ++b) {
        const auto &basis = bases[b];
        if (basis.size() != static_cast<std::size_t>(dim))
            throw NotOrthonormal("basis " + std::to_string(b) + " has " +
                                 std::to_string(basis.size()) + " vectors, expected " +
                                 std::to_string(dim));
        std::vector<Projection> ps;
        for (std::size_t i = 0; i < basis.size(); ++i) {
            if (basis[i].size() != dim)
                throw NotOrthonormal("vector " + std::to_string(i) + " of basis " +
                                     std::to_string(b) + " has length " +
                                     std::to_string(basis[i].size()));
            for (std::size_t j = 0; j <= i; ++j) {
                Complex ip = basis[j].dot(basis[i]);
                double expect = i == j ? 1.0 : 0.0;
                if (std::abs(ip - expect) > tol)
                    throw NotOrthonormal("basis " + std::to_string(b) + ": <v" + std::to_string(j) +
                                         ", v" + std::to_string(i) + "> = " +
                                         std::to_string(std::abs(ip)));
            }
            Element e = Element::zero(a);
            e.block(0) = basis[i] * basis[i].adjoint();
            ps.emplace_back(std::move(e));
        }
        projectors.push_back(std::move(ps));
    }

    SpatialDiagram d(a);
    std::vector<std::size_t> index;
    for (const auto &ps : projectors)
        index.push_back(d.add_context(Context(a, ps)));
    for (std::size_t b = 0; b < projectors.size(); ++b)
        for (std::size_t c = b + 1; c < projectors.size(); ++c) {
            std::vector<Projection> shared;
            Element rest = Element::identity(a);
            for (const auto &p : projectors[b])
                for (const auto &q : projectors[c])
                    if (p.element().approx_equal(q.element(), tol)) {
                        shared.push_back(p);
                        rest = rest - p.element();
                    }
            if (shared.empty())
                continue;
            if (rest.max_norm() > tol)
                shared.emplace_back(rest);
            std::size_t s = d.add_context(Context(a, shared));
            if (s != index[b])
                d.add_inclusion(s, index[b]);
            if (s != index[c])
                d.add_inclusion(s, index[c]);
        }
    return d;
}

/// A chosen atom (spectrum point) per context.
struct ValuationSection {
    std::vector<std::size_t> atoms;
    std::vector<std::string> ids;
};

/// The spectra diagram: one point set per context, one restriction map per
/// arrow (Sigma is contravariant, so maps run from dst to src).
inline DiagramSet spectra_diagram(const SpatialDiagram &d) {
    DiagramSet s;
    for (const auto &v : d.contexts())
        s.sizes.push_back(v.size());
    for (std::size_t k = 0; k < d.arrows().size(); ++k) {
        const auto &a = d.arrows()[k];
        if (a.kind == ArrowKind::Identity)
            continue;
        s.arrows.push_back({a.dst, a.src, spectrum_map(d.morphism(k)).assignment});
    }
    return s;
}

inline std::vector<ValuationSection> global_sections(const SpatialDiagram &d) {
    std::vector<ValuationSection> out;
    for (auto &tuple : limit_set(spectra_diagram(d))) {
        ValuationSection s;
        for (std::size_t i = 0; i < tuple.size(); ++i)
            s.ids.push_back(d.context(i).ids()[tuple[i]]);
        s.atoms = std::move(tuple);
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// States and distribution families

class DensityMatrix {
  public:
    DensityMatrix() = default;
    explicit DensityMatrix(Element rho) : rho_(std::move(rho)) {
        const double tol = rho_.tolerance();
        if (!rho_.is_self_adjoint())
            throw InvalidState("density matrix is not Hermitian");
        for (std::size_t i = 0; i < rho_.num_blocks(); ++i) {
            if (rho_.block(i).size() == 0)
                continue;
            Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_.block(i), Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() < -tol)
                throw InvalidState("block " + std::to_string(i) + " has eigenvalue " +
                                   std::to_string(es.eigenvalues().minCoeff()));
        }
        if (std::abs(rho_.trace() - Complex(1.0)) > tol)
            throw InvalidState("trace is " + std::to_string(rho_.trace().real()));
    }

    /// Normalised trace 1/N.
    static DensityMatrix maximally_mixed(const FdAlgebra &a) {
        return DensityMatrix(Complex(1.0 / a.total_dimension()) * Element::identity(a));
    }
    /// p / rank(p).
    static DensityMatrix from_projection(const Projection &p) {
        double r = p.element().trace().real();
        if (r < 0.5)
            throw InvalidState("zero projection has no normalised state");
        return DensityMatrix(Complex(1.0 / r) * p.element());
    }

    const Element &element() const { return rho_; }
    const FdAlgebra &algebra() const { return rho_.algebra(); }
    double expectation(const Element &a) const { return (rho_ * a).trace().real(); }
    DensityMatrix conjugated(const Unitary &u) const { return DensityMatrix(u.conjugate(rho_)); }

  private:
    Element rho_;
};

/// Probability vector over the atoms of every context.
struct DistributionFamily {
    SpatialDiagram diagram;
    std::vector<std::vector<double>> probs;

    void validate() const {
        const double tol = diagram.algebra().tolerance();
        if (probs.size() != diagram.num_contexts())
            throw ShapeMismatch("one probability vector per context expected");
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i].size() != diagram.context(i).size())
                throw ShapeMismatch("context " + std::to_string(i) + " probability vector size");
            double sum = 0;
            for (double p : probs[i]) {
                if (p < -tol)
                    throw InvalidState("negative probability in context " + std::to_string(i));
                sum += p;
            }
            if (std::abs(sum - 1.0) > tol)
                throw InvalidState("context " + std::to_string(i) + " sums to " +
                                   std::to_string(sum));
        }
    }
};

/// Born rule: atom a of context V gets tr(rho a).
inline DistributionFamily born_family(const DensityMatrix &rho, const SpatialDiagram &d) {
    if (!(rho.algebra() == d.algebra()))
        throw AlgebraMismatch("state on " + rho.algebra().spec() + ", diagram over " +
                              d.algebra().spec());
    DistributionFamily f{d, {}};
    for (const auto &v : d.contexts()) {
        std::vector<double> p;
        for (const auto &atom : v.atoms())
            p.push_back(rho.expectation(atom.element()));
        f.probs.push_back(std::move(p));
    }
    return f;
}

struct CompatibilityResult {
    bool ok = true;
    std::optional<std::size_t> arrow;
    double error = 0;
};

namespace detail {

// Pushforward of the dst distribution along Sigma(arrow), on src points.
inline std::vector<double> pushforward(const DistributionFamily &f, std::size_t k) {
    const auto &a = f.diagram.arrows()[k];
    auto map = spectrum_map(f.diagram.morphism(k)).assignment;
    std::vector<double> out(f.diagram.context(a.src).size(), 0.0);
    for (std::size_t j = 0; j < map.size(); ++j)
        out[map[j]] += f.probs.at(a.dst).at(j);
    return out;
}

inline double max_diff(const std::vector<double> &x, const std::vector<double> &y) {
    double m = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

} // namespace detail

/// mu_V = Sigma(i)_* mu_V' along every inclusion and identity arrow i.
inline CompatibilityResult check_compatibility(const DistributionFamily &f) {
    const double tol = f.diagram.algebra().tolerance();
    for (std::size_t k = 0; k < f.diagram.arrows().size(); ++k) {
        const auto &a = f.diagram.arrows()[k];
        if (a.kind == ArrowKind::Ad)
            continue;
        double err = detail::max_diff(detail::pushforward(f, k), f.probs.at(a.src));
        if (err > tol)
            return {false, k, err};
    }
    return {};
}

/// Along Ad_u: V -> V', the pushforward of rho's distribution on V' equals
/// the distribution of u* rho u on V.
inline CompatibilityResult check_covariance(const DensityMatrix &rho, const DistributionFamily &f) {
    const double tol = f.diagram.algebra().tolerance();
    for (std::size_t k = 0; k < f.diagram.arrows().size(); ++k) {
        const auto &a = f.diagram.arrows()[k];
        if (a.kind != ArrowKind::Ad)
            continue;
        DensityMatrix moved = rho.conjugated(a.u.adjoint());
        std::vector<double> expect;
        for (const auto &atom : f.diagram.context(a.src).atoms())
            expect.push_back(moved.expectation(atom.element()));
        double err = detail::max_diff(detail::pushforward(f, k), expect);
        if (err > tol)
            return {false, k, err};
    }
    return {};
}

} // namespace ncspec
