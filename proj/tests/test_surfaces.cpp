#include <gtest/gtest.h>

#include "wrt/surfaces.hpp"

using namespace wrt;

namespace
{

Coweight half_omega() { return Coweight(2, {Rational(1, 2)}); }

SurfaceMarking su2_marking(int genus, int points)
{
  return SurfaceMarking(genus, 2, std::vector<MarkedPoint>(points, MarkedPoint{half_omega()}));
}

} // namespace

TEST(SurfaceMarking, RejectsLowGenus)
{
  EXPECT_THROW(SurfaceMarking(1, 2, {}), UnsupportedConfiguration);
  EXPECT_THROW(SurfaceMarking(0, 2, {}), UnsupportedConfiguration);
}

TEST(SurfaceMarking, RejectsBadWeights)
{
  EXPECT_THROW(SurfaceMarking(2, 3, {MarkedPoint{half_omega()}}), DimensionError);
  EXPECT_THROW(SurfaceMarking(2, 2, {MarkedPoint{Coweight(2, {Rational(3, 2)})}}), DomainError);
  EXPECT_THROW(SurfaceMarking(2, 2, {MarkedPoint{Coweight(2, {Rational(-1, 2)})}}), DomainError);
}

TEST(SurfaceMarking, BaseLevel)
{
  EXPECT_EQ(su2_marking(2, 1).base_level(), 2);
  EXPECT_EQ(su2_marking(2, 0).base_level(), 1);
  SurfaceMarking m(2, 3, {MarkedPoint{Coweight(3, {Rational(1, 3), Rational(1, 4)})}});
  EXPECT_EQ(m.base_level(), 12);
}

TEST(SurfaceMarking, LabelsAtLevel)
{
  auto m = su2_marking(2, 1);
  auto labels = m.labels_at(4);
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(labels[0], Weight(2, {2}));
  EXPECT_THROW((void)m.labels_at(3), AdmissibilityError);
}

TEST(ModuliDimension, MatchesFormula)
{
  EXPECT_EQ(moduli_dimension(su2_marking(2, 1)), 8);
  EXPECT_EQ(moduli_dimension(su2_marking(2, 2)), 10);
  EXPECT_EQ(moduli_dimension(su2_marking(2, 0)), 6);
  EXPECT_EQ(moduli_dimension(su2_marking(3, 1)), 14);
  EXPECT_EQ(moduli_dimension(SurfaceMarking(2, 3, {})), 16);
  SurfaceMarking m(2, 3, {MarkedPoint{Coweight(3, {Rational(1, 3), Rational(1, 3)})}});
  EXPECT_EQ(moduli_dimension(m), 22);
}

TEST(ModuliDimension, NonRegularWeightUnsupported)
{
  SurfaceMarking m(2, 2, {MarkedPoint{Coweight::zero(2)}});
  EXPECT_THROW((void)moduli_dimension(m), UnsupportedConfiguration);
}

TEST(Admissibility, HalfFundamentalWeight)
{
  auto m = su2_marking(2, 1);
  auto r2 = admissibility(m, 2);
  EXPECT_TRUE(r2.integral);
  EXPECT_FALSE(r2.root_lattice);
  EXPECT_FALSE(r2.admissible());
  EXPECT_FALSE(r2.reasons.empty());

  auto r3 = admissibility(m, 3);
  EXPECT_FALSE(r3.integral);
  EXPECT_FALSE(r3.admissible());

  for (int k = 4; k <= 40; k += 4)
    EXPECT_TRUE(admissibility(m, k).admissible()) << "k = " << k;
  for (int k = 1; k <= 40; ++k)
    EXPECT_EQ(admissibility(m, k).admissible(), k % 4 == 0) << "k = " << k;
}

TEST(Admissibility, TwoPointsAndClosedSurface)
{
  auto m = su2_marking(2, 2);
  for (int k = 1; k <= 20; ++k)
    EXPECT_EQ(admissibility(m, k).admissible(), k % 2 == 0) << "k = " << k;
  auto closed = su2_marking(2, 0);
  for (int k = 1; k <= 10; ++k)
    EXPECT_TRUE(admissibility(closed, k).admissible());
}

TEST(Admissibility, NonRegularReported)
{
  SurfaceMarking m(2, 2, {MarkedPoint{Coweight::zero(2)}});
  auto r = admissibility(m, 2);
  EXPECT_TRUE(r.integral);
  EXPECT_FALSE(r.regular);
  EXPECT_FALSE(r.admissible());
}
