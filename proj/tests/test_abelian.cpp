#include <gtest/gtest.h>

#include <random>

#include "ncspec/abelian.hpp"

using namespace ncspec;

namespace {

IntVector vec(std::initializer_list<long long> xs) {
    IntVector v;
    for (auto x : xs)
        v.emplace_back(x);
    return v;
}

} // namespace

TEST(AbGroup, FreeGroupsAndFactorStrings) {
    EXPECT_EQ(AbGroup::free(0).factors_string(), "0");
    EXPECT_EQ(AbGroup::free(1).factors_string(), "Z");
    EXPECT_EQ(AbGroup::free(3).factors_string(), "Z^3");
    AbGroup g = AbGroup::from_presentation(AbPresentation(3, IntMatrix{{2, 0, 0}, {0, 6, 0}}));
    EXPECT_EQ(g.factors_string(), "Z (+) Z/2 (+) Z/6");
    EXPECT_EQ(g.free_rank(), 1u);
    EXPECT_EQ(g.torsion_rank(), 2u);
}

TEST(AbGroup, SectionInvertsGeneratorImages) {
    AbGroup g = AbGroup::from_presentation(AbPresentation(3, IntMatrix{{1, -1, 0}, {1, 0, -2}}));
    ASSERT_EQ(g.factors_string(), "Z");
    EXPECT_EQ(g.reduce_matrix(g.generator_images() * g.section()), IntMatrix::identity(1));
    // HNF coordinates: x = 2z, y = 2z
    EXPECT_EQ(g.generator_images(), (IntMatrix{{2, 2, 1}}));
}

TEST(Grothendieck, NaturalNumbersGiveIntegers) {
    AbGroup g = grothendieck(1, {});
    EXPECT_EQ(g.factors_string(), "Z");
    EXPECT_EQ(g.generator_coords(0), vec({1}));
}

TEST(Grothendieck, FreeMonoidOnTwoGenerators) {
    EXPECT_EQ(grothendieck(2, {}).factors_string(), "Z^2");
}

TEST(Grothendieck, IdempotentCollapses) {
    // a + a = a forces a = 0 after cancellation
    AbGroup g = grothendieck(1, {{vec({2}), vec({1})}});
    EXPECT_TRUE(g.is_trivial());
    EXPECT_EQ(g.factors_string(), "0");
}

TEST(Grothendieck, RejectsNegativeCoefficients) {
    EXPECT_THROW(grothendieck(1, {{vec({-1}), vec({0})}}), ShapeMismatch);
}

TEST(Grothendieck, UniversalPropertyOnRandomMonoidCocones) {
    std::mt19937_64 eng(3);
    std::uniform_int_distribution<int> gens(1, 5), nrel(0, 4), coef(0, 3), width(1, 3);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t g = gens(eng);
        std::vector<std::pair<IntVector, IntVector>> rels;
        IntMatrix diff(0, g);
        for (int r = nrel(eng); r > 0; --r) {
            IntVector l(g), rr(g), d(g);
            for (std::size_t j = 0; j < g; ++j) {
                l[j] = coef(eng);
                rr[j] = coef(eng);
                d[j] = l[j] - rr[j];
            }
            rels.emplace_back(l, rr);
            diff.append_row(d);
        }
        AbGroup grp = grothendieck(g, rels);
        // Monoid homs into Z^n: rows in the integer kernel of the relation differences.
        IntMatrix ker = diff.rows() ? integer_kernel(diff) : IntMatrix::identity(g);
        const std::size_t n = width(eng);
        IntMatrix f(n, g);
        std::uniform_int_distribution<int> c(-3, 3);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t b = 0; b < ker.cols(); ++b) {
                BigInt k = c(eng);
                for (std::size_t j = 0; j < g; ++j)
                    f(i, j) += k * ker(j, b);
            }
        for (const auto &[l, rr] : rels)
            ASSERT_EQ(f * l, f * rr);
        IntMatrix mediating = f * grp.section();
        // existence: mediating o class = f on every generator
        for (std::size_t j = 0; j < g; ++j)
            ASSERT_EQ(mediating * grp.generator_coords(j), f.col(j)) << "trial " << trial;
        // torsion coordinates must die in a free target
        for (std::size_t k = 0; k < grp.torsion_rank(); ++k)
            for (std::size_t i = 0; i < n; ++i)
                ASSERT_EQ(mediating(i, k), 0);
        // uniqueness: classes of generators generate the group
        ASSERT_EQ(grp.reduce_matrix(grp.generator_images() * grp.section()),
                  IntMatrix::identity(grp.dimension()));
    }
}

TEST(InducedHom, DetectsIllDefinedMaps) {
    AbGroup z2 = AbGroup::from_presentation(AbPresentation(1, IntMatrix{{2}}));
    AbGroup z = AbGroup::free(1);
    // Z -> Z/2 reduction is fine, Z/2 -> Z by 1 is not.
    EXPECT_EQ(induced_hom(z, z2, IntMatrix{{1}}), (IntMatrix{{1}}));
    EXPECT_THROW(induced_hom(z2, z, IntMatrix{{1}}), NotWellDefined);
    EXPECT_EQ(induced_hom(z2, z, IntMatrix{{0}}), (IntMatrix{{0}}));
}
