#include <gtest/gtest.h>

#include <set>

#include "ncspec/foundations.hpp"
#include "ncspec/io.hpp"
#include "ncspec/random.hpp"

using namespace ncspec;

namespace {

CVector vec(std::initializer_list<Complex> xs) {
    CVector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (Complex x : xs)
        v(i++) = x;
    return v.normalized();
}

std::vector<CVector> standard_basis(int n) {
    std::vector<CVector> b;
    for (int i = 0; i < n; ++i)
        b.push_back(CVector::Unit(n, i));
    return b;
}

std::size_t count_kind(const SpatialDiagram &d, ArrowKind k) {
    std::size_t n = 0;
    for (const auto &a : d.arrows())
        n += a.kind == k;
    return n;
}

KsInstance ks18() { return load_ks(std::string(NCSPEC_DATA_DIR) + "/ks18.json"); }

// Projector identity of a vector, up to phase: the rounded projector.
std::vector<long long> ray_key(const CVector &v) {
    CMatrix p = v * v.adjoint();
    std::vector<long long> key;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        key.push_back(std::llround(p.data()[i].real() * 1e6));
        key.push_back(std::llround(p.data()[i].imag() * 1e6));
    }
    return key;
}

// Kochen-Specker colourings: one vector per basis, with every ray either
// chosen in all bases containing it or in none.
std::size_t brute_force_colourings(const std::vector<std::vector<CVector>> &bases) {
    std::vector<std::vector<std::size_t>> ray(bases.size());
    std::map<std::vector<long long>, std::size_t> ids;
    for (std::size_t b = 0; b < bases.size(); ++b)
        for (const auto &v : bases[b])
            ray[b].push_back(ids.emplace(ray_key(v), ids.size()).first->second);
    std::size_t count = 0;
    std::vector<std::size_t> pick(bases.size(), 0);
    while (true) {
        std::set<std::size_t> chosen;
        for (std::size_t b = 0; b < bases.size(); ++b)
            chosen.insert(ray[b][pick[b]]);
        bool ok = true;
        for (std::size_t b = 0; b < bases.size() && ok; ++b) {
            std::size_t hits = 0;
            for (std::size_t r : ray[b])
                hits += chosen.count(r);
            ok = hits == 1;
        }
        count += ok;
        std::size_t b = 0;
        while (b < bases.size() && ++pick[b] == bases[b].size())
            pick[b++] = 0;
        if (b == bases.size())
            break;
    }
    return count;
}

DensityMatrix random_state(Rng &rng, const FdAlgebra &a) {
    Element g = Element::zero(a);
    for (std::size_t i = 0; i < a.num_blocks(); ++i)
        g.block(i) = rng.gaussian(a.block_size(i), a.block_size(i));
    Element pos = g * g.adjoint();
    return DensityMatrix(Complex(1.0 / pos.trace().real()) * pos);
}

} // namespace

TEST(KsDiagram, SingleBasis) {
    SpatialDiagram d = ks_diagram(2, {standard_basis(2)});
    EXPECT_EQ(d.num_contexts(), 1u);
    EXPECT_EQ(d.context(0).size(), 2u);
}

TEST(KsDiagram, TwoBasesSharingOneVector) {
    std::vector<CVector> b1 = standard_basis(3);
    std::vector<CVector> b2{CVector::Unit(3, 0), vec({0, 1, 1}), vec({0, 1, -1})};
    SpatialDiagram d = ks_diagram(3, {b1, b2});
    EXPECT_EQ(d.num_contexts(), 3u);
    EXPECT_EQ(count_kind(d, ArrowKind::Inclusion), 2u);
    EXPECT_EQ(d.context(2).size(), 2u);
}

TEST(KsDiagram, RejectsBadBases) {
    EXPECT_THROW(ks_diagram(2, {{vec({1, 0}), vec({1, 1})}}), NotOrthonormal);
    EXPECT_THROW(ks_diagram(3, {standard_basis(2)}), NotOrthonormal);
    EXPECT_THROW(ks_diagram(2, {{CVector::Unit(2, 0), 2.0 * CVector::Unit(2, 1)}}), NotOrthonormal);
}

TEST(KsDiagram, FixtureHasNineMaximalContexts) {
    KsInstance ks = ks18();
    ASSERT_EQ(ks.dim, 4);
    ASSERT_EQ(ks.bases.size(), 9u);
    SpatialDiagram d = ks_diagram(ks);
    std::size_t maximal = 0;
    for (const auto &v : d.contexts())
        maximal += v.size() == 4;
    EXPECT_EQ(maximal, 9u);
    // every one of the 18 rays lies in exactly two bases
    EXPECT_EQ(d.num_contexts(), 9u + 18u);
    EXPECT_EQ(count_kind(d, ArrowKind::Inclusion), 36u);
}

TEST(GlobalSections, SingleContext) {
    auto s = global_sections(ks_diagram(2, {standard_basis(2)}));
    EXPECT_EQ(s.size(), 2u);
}

TEST(GlobalSections, SwapArrowBetweenTwoBases) {
    FdAlgebra m2({2});
    SpatialDiagram d(m2);
    std::size_t diag = d.add_context(diagonal_context(m2));
    Projection plus(Complex(0.5) * (Element::identity(m2) + matrix_unit(m2, 0, 0, 1) +
                                     matrix_unit(m2, 0, 1, 0)));
    std::size_t rot = d.add_context(generate_context(m2, {plus}, false));
    Unitary swap = adjacent_transposition(m2, 0, 0);
    d.add_arrow(diag, diag, swap, ArrowKind::Ad);
    d.add_arrow(rot, rot, swap, ArrowKind::Ad);
    // a section picks one atom per context, fixed by the restriction maps
    std::size_t expect = 0;
    for (std::size_t x = 0; x < 2; ++x)
        for (std::size_t y = 0; y < 2; ++y) {
            bool ok = true;
            for (std::size_t k = 0; k < d.arrows().size(); ++k) {
                const auto &a = d.arrows()[k];
                std::size_t src = a.src == diag ? x : y, dst = a.dst == diag ? x : y;
                ok = ok && spectrum_map(d.morphism(k)).assignment[dst] == src;
            }
            expect += ok;
        }
    auto s = global_sections(d);
    EXPECT_EQ(s.size(), expect);
    // the swap exchanges e11 and e22, so the diagonal context has no fixed point
    EXPECT_EQ(s.size(), 0u);
}

TEST(GlobalSections, KsFixtureIsEmptyAndTight) {
    KsInstance ks = ks18();
    SpatialDiagram d = ks_diagram(ks);
    EXPECT_TRUE(global_sections(d).empty());
    EXPECT_EQ(brute_force_colourings(ks.bases), 0u);
    for (std::size_t drop = 0; drop < ks.bases.size(); ++drop) {
        auto bases = ks.bases;
        bases.erase(bases.begin() + static_cast<long>(drop));
        std::size_t n = global_sections(ks_diagram(4, bases)).size();
        EXPECT_GE(n, 1u) << "without basis " << drop;
        EXPECT_EQ(n, brute_force_colourings(bases)) << "without basis " << drop;
    }
}

TEST(GlobalSections, AgreesWithLimitSet) {
    KsInstance ks = ks18();
    auto bases = ks.bases;
    bases.resize(5);
    SpatialDiagram d = ks_diagram(4, bases);
    auto sections = global_sections(d);
    auto tuples = limit_set(spectra_diagram(d));
    ASSERT_EQ(sections.size(), tuples.size());
    for (std::size_t i = 0; i < tuples.size(); ++i)
        EXPECT_EQ(sections[i].atoms, tuples[i]);
}

TEST(GlobalSections, TerminalContextCountsAtoms) {
    for (int k = 1; k <= 5; ++k) {
        FdAlgebra a(std::vector<int>(static_cast<std::size_t>(k), 1));
        SpatialDiagram d(a);
        d.add_context(center_context(a));
        for (int j = 0; j < k; ++j) {
            std::vector<bool> pattern(static_cast<std::size_t>(k), false);
            pattern[static_cast<std::size_t>(j)] = true;
            d.add_context(generate_context(a, {central_projection(a, pattern)}, false));
        }
        d.add_context(generate_context(a, {}, false));
        d.add_all_inclusions();
        EXPECT_EQ(global_sections(d).size(), static_cast<std::size_t>(k));
    }
}

TEST(BornFamily, MaximallyMixedOnTheDiagonal) {
    FdAlgebra m2({2});
    SpatialDiagram d(m2);
    d.add_context(diagonal_context(m2));
    auto f = born_family(DensityMatrix::maximally_mixed(m2), d);
    EXPECT_NEAR(f.probs[0][0], 0.5, 1e-12);
    EXPECT_NEAR(f.probs[0][1], 0.5, 1e-12);
}

TEST(BornFamily, PureStateOnItsEigencontext) {
    FdAlgebra m2({2});
    SpatialDiagram d(m2);
    d.add_context(diagonal_context(m2));
    auto f = born_family(DensityMatrix::from_projection(diagonal_projection(m2, {{1, 0}})), d);
    EXPECT_NEAR(f.probs[0][0], 1.0, 1e-12);
    EXPECT_NEAR(f.probs[0][1], 0.0, 1e-12);
}

TEST(BornFamily, RejectsForeignAlgebra) {
    SpatialDiagram d = build_core_diagram(FdAlgebra({2}), {}, {});
    EXPECT_THROW(born_family(DensityMatrix::maximally_mixed(FdAlgebra({3})), d), AlgebraMismatch);
}

TEST(BornFamily, InclusionsAddFineProbabilities) {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        FdAlgebra a({rng.uniform_int(1, 3), rng.uniform_int(2, 3)});
        SpatialDiagram d =
            build_core_diagram(a, {rng.projection(a), rng.projection(a)}, {rng.unitary(a)});
        DensityMatrix rho = random_state(rng, a);
        auto f = born_family(rho, d);
        f.validate();
        for (std::size_t k = 0; k < d.arrows().size(); ++k) {
            const auto &arrow = d.arrows()[k];
            if (arrow.kind != ArrowKind::Inclusion)
                continue;
            auto img = d.morphism(k).image_masks();
            for (std::size_t x = 0; x < img.size(); ++x) {
                double fine = 0;
                for (std::size_t y = 0; y < d.context(arrow.dst).size(); ++y)
                    if ((img[x] >> y) & 1)
                        fine += f.probs[arrow.dst][y];
                EXPECT_NEAR(f.probs[arrow.src][x], fine, 1e-12);
            }
        }
        EXPECT_TRUE(check_compatibility(f).ok);
        EXPECT_TRUE(check_covariance(rho, f).ok);
    }
}

TEST(BornFamily, AffineInTheState) {
    Rng rng(13);
    FdAlgebra a({2, 3});
    SpatialDiagram d = build_core_diagram(a, {rng.projection(a)}, {});
    for (int trial = 0; trial < 20; ++trial) {
        DensityMatrix r1 = random_state(rng, a), r2 = random_state(rng, a);
        double lambda = rng.uniform();
        DensityMatrix mix(Complex(lambda) * r1.element() + Complex(1 - lambda) * r2.element());
        auto f = born_family(mix, d), f1 = born_family(r1, d), f2 = born_family(r2, d);
        for (std::size_t i = 0; i < f.probs.size(); ++i)
            for (std::size_t j = 0; j < f.probs[i].size(); ++j)
                EXPECT_NEAR(f.probs[i][j], lambda * f1.probs[i][j] + (1 - lambda) * f2.probs[i][j],
                            1e-12);
    }
}

TEST(CheckCompatibility, DetectsPerturbedEntry) {
    FdAlgebra m3({3});
    SpatialDiagram d = build_core_diagram(m3, {diagonal_projection(m3, {{1, 0, 0}})}, {});
    auto f = born_family(DensityMatrix::maximally_mixed(m3), d);
    ASSERT_TRUE(check_compatibility(f).ok);
    std::size_t diag = *d.find(diagonal_context(m3));
    f.probs[diag][0] += 0.1;
    auto r = check_compatibility(f);
    EXPECT_FALSE(r.ok);
    ASSERT_TRUE(r.arrow.has_value());
    EXPECT_EQ(d.arrows()[*r.arrow].dst, diag);
    EXPECT_NEAR(r.error, 0.1, 1e-12);
}

TEST(CheckCompatibility, EmptyDiagramIsVacuouslyCompatible) {
    DistributionFamily f{SpatialDiagram(FdAlgebra({2})), {}};
    EXPECT_TRUE(check_compatibility(f).ok);
}

TEST(DensityMatrix, RejectsInvalidStates) {
    FdAlgebra m2({2});
    EXPECT_THROW(DensityMatrix(Element::identity(m2)), InvalidState);
    EXPECT_THROW(DensityMatrix(matrix_unit(m2, 0, 0, 1)), InvalidState);
    Element neg = Complex(1.5) * matrix_unit(m2, 0, 0, 0) - Complex(0.5) * matrix_unit(m2, 0, 1, 1);
    EXPECT_THROW(DensityMatrix{neg}, InvalidState);
}
