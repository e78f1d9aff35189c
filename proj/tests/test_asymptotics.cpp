#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "wrt/asymptotics.hpp"

using namespace wrt;

namespace
{

Coweight half_omega() { return Coweight(2, {Rational(1, 2)}); }

SurfaceMarking su2_marking(int genus, int points)
{
  return SurfaceMarking(genus, 2, std::vector<MarkedPoint>(points, MarkedPoint{half_omega()}));
}

std::vector<int> range(int first, int last, int step = 1)
{
  std::vector<int> out;
  for (int k = first; k <= last; k += step)
    out.push_back(k);
  return out;
}

LComplex e(long double turns)
{
  return std::polar(1.0L, 2 * std::numbers::pi_v<long double> * turns);
}

template<typename F>
LevelSequence tabulate(std::vector<int> const &levels, F f)
{
  std::vector<LComplex> v;
  for (int k : levels)
    v.push_back(f(static_cast<long double>(k)));
  return {levels, v};
}

struct SyntheticTerm
{
  double q;
  Rational degree;
  LComplex b;
  std::vector<LComplex> tail;
};

ExpansionModel synthetic(std::vector<SyntheticTerm> const &terms, int order)
{
  ExpansionModel m;
  m.order = order;
  for (auto const &t : terms)
    m.terms.push_back({t.q, t.degree, t.b, t.tail});
  return m;
}

// Adds complex Gaussian noise of size sigma * k^d to each value.
LevelSequence with_noise(LevelSequence const &s, double sigma, Rational d, std::mt19937_64 &rng)
{
  std::normal_distribution<long double> g(0, 1);
  std::vector<LComplex> v;
  for (std::size_t i = 0; i < s.size(); ++i)
    v.push_back(s.value(i) + sigma * std::pow(static_cast<long double>(s.level(i)), to_real<long double>(d)) *
                                 LComplex(g(rng), g(rng)) / std::sqrt(2.0L));
  return {s.levels(), v};
}

double rel(LComplex a, LComplex b) { return static_cast<double>(std::abs(a - b) / std::abs(b)); }

PronyOptions integer_ladder()
{
  PronyOptions o;
  o.amplitude_step = Rational(1);
  return o;
}

} // namespace

TEST(Grid, StepsAndRuns)
{
  EXPECT_EQ(grid_step({4, 8, 12, 20}), 4);
  EXPECT_EQ(grid_step({2, 4, 6}), 2);
  auto run = longest_arithmetic_run({1, 2, 4, 6, 8, 9});
  EXPECT_EQ(run.start, 1u);
  EXPECT_EQ(run.length, 4u);
  EXPECT_EQ(run.step, 2);
  EXPECT_THROW(LevelSequence({1, 1}, {0, 0}), DomainError);
  EXPECT_THROW(LevelSequence({1, 2}, {0}), DimensionError);
}

TEST(Prony, ConstantSequence)
{
  auto s = tabulate(range(1, 16), [](long double) { return LComplex(7); });
  auto r = prony_detect(s, 2);
  ASSERT_EQ(r.phases.size(), 1u);
  EXPECT_LT(phase_distance(r.phases[0], 0.0), 1e-12);
}

TEST(Prony, QuarterPhaseQuadratic)
{
  auto s = tabulate(range(1, 32), [](long double k) { return e(k / 4) * k * k; });
  auto r = prony_detect(s, 2);
  ASSERT_GE(r.phases.size(), 1u);
  EXPECT_LT(phase_distance(r.phases[0], 0.25), 1e-9);
  EXPECT_NEAR(r.degree_estimate, 2.0, 1e-6);
}

TEST(Prony, DehnTwistSweepPhaseModuloGrid)
{
  auto marking = su2_marking(2, 1);
  auto mc = MappingClassSpec::dehn_twists({{0, 1}});
  auto seq = to_level_sequence(invariant_sequence(marking, mc, 2, 16));
  auto r = prony_detect(seq, 1, integer_ladder());
  EXPECT_EQ(r.grid_step, 4);
  ASSERT_EQ(r.phases.size(), 1u);
  EXPECT_LT(phase_distance(r.phases[0], 15.0 / 16, r.period), 1e-9);

  auto marking2 = su2_marking(2, 2);
  auto seq2 = to_level_sequence(invariant_sequence(marking2, MappingClassSpec::dehn_twists({{0, 1}, {1, 2}}), 2, 16));
  auto r2 = prony_detect(seq2, 1, integer_ladder());
  EXPECT_EQ(r2.grid_step, 2);
  EXPECT_LT(phase_distance(r2.phases[0], 13.0 / 16, r2.period), 1e-9);
}

TEST(Prony, ReindexingInvariance)
{
  auto f = [](long double k) { return e(0.3L * k) * k * k * k + 2.0L * e(0.71L * k) * k * k; };
  auto a = prony_detect(tabulate(range(1, 40), f), 2);
  auto b = prony_detect(tabulate(range(9, 48), f), 2);
  ASSERT_EQ(a.phases.size(), 2u);
  ASSERT_EQ(b.phases.size(), 2u);
  for (std::size_t j = 0; j < 2; ++j)
    EXPECT_LT(phase_distance(a.phases[j], b.phases[j]), 1e-9);
}

TEST(Prony, GlobalUnitScalingLeavesPhases)
{
  auto f = [](long double k) { return e(0.3L * k) * k * k * k + 2.0L * e(0.71L * k) * k * k; };
  auto base = tabulate(range(1, 40), f);
  auto rotated = tabulate(range(1, 40), [&](long double k) { return e(0.123L) * f(k); });
  auto a = prony_detect(base, 2);
  auto b = prony_detect(rotated, 2);
  for (std::size_t j = 0; j < 2; ++j)
    EXPECT_LT(phase_distance(a.phases[j], b.phases[j]), 1e-9);
  auto ma = fit_model(base, a.phases, Rational(4), 1);
  auto mb = fit_model(rotated, b.phases, Rational(4), 1);
  ASSERT_EQ(ma.terms.size(), mb.terms.size());
  for (std::size_t j = 0; j < ma.terms.size(); ++j)
  {
    EXPECT_EQ(ma.terms[j].degree, mb.terms[j].degree);
    EXPECT_LT(rel(mb.terms[j].leading, e(0.123L) * ma.terms[j].leading), 1e-9);
  }
}

TEST(Prony, TooFewSamples)
{
  auto s = tabulate(range(1, 5), [](long double k) { return LComplex(k); });
  EXPECT_THROW((void)prony_detect(s, 2), DetectionFailure);
  try
  {
    (void)prony_detect(s, 2);
  }
  catch (DetectionFailure const &err)
  {
    EXPECT_TRUE(std::isinf(err.condition_number()));
  }
}

TEST(FitModel, GenusTwoVerlindePolynomial)
{
  // (K^3 - K) / 6 with K = k + 2
  auto seq = to_level_sequence(invariant_sequence(su2_marking(2, 0), MappingClassSpec::identity(), 2, 16));
  FitOptions o;
  o.step = Rational(1);
  auto m = fit_model(seq, {0.0}, Rational(5), 3, o);
  ASSERT_EQ(m.terms.size(), 1u);
  EXPECT_EQ(m.terms[0].degree, Rational(3));
  EXPECT_LT(rel(m.terms[0].leading, 1.0L / 6), 1e-10);
  ASSERT_EQ(m.terms[0].tail.size(), 3u);
  EXPECT_LT(rel(m.terms[0].tail[0], 1.0L), 1e-10);
  EXPECT_LT(rel(m.terms[0].tail[1], 11.0L / 6), 1e-10);
  EXPECT_LT(rel(m.terms[0].tail[2], 1.0L), 1e-9);
  EXPECT_LT(m.relative_residual, 1e-15);
}

TEST(FitModel, PuncturedVerlindeDegrees)
{
  FitOptions o;
  o.step = Rational(1);
  for (int points = 1; points <= 2; ++points)
  {
    auto marking = su2_marking(2, points);
    auto seq = to_level_sequence(invariant_sequence(marking, MappingClassSpec::identity(), 2, 16));
    int const d = moduli_dimension(marking) / 2;
    auto m = fit_model(seq, {0.0}, Rational(d + 1), d, o);
    ASSERT_EQ(m.terms.size(), 1u);
    EXPECT_EQ(m.leading_degree(), Rational(d));
    EXPECT_LT(m.relative_residual, 1e-14);
  }
}

TEST(FitModel, TwoPhaseSyntheticCoefficients)
{
  auto truth = synthetic({{0.2, Rational(3), {1.5L, -0.5L}, {0.7L, LComplex(0, 2)}},
                          {0.65, Rational(5, 2), {-2.0L, 1.0L}, {1.0L, -3.0L}}},
                         2);
  auto s = generate(truth, range(1, 48));
  FitOptions o;
  auto m = fit_model(s, {0.2, 0.65}, Rational(4), 2, o);
  ASSERT_EQ(m.terms.size(), 2u);
  EXPECT_EQ(m.terms[0].degree, Rational(3));
  EXPECT_EQ(m.terms[1].degree, Rational(5, 2));
  EXPECT_LT(rel(m.terms[0].leading, truth.terms[0].leading), 1e-6);
  EXPECT_LT(rel(m.terms[1].leading, truth.terms[1].leading), 1e-6);
  for (int p = 0; p < 2; ++p)
  {
    EXPECT_LT(rel(m.terms[0].tail[p], truth.terms[0].tail[p]), 1e-6);
    EXPECT_LT(rel(m.terms[1].tail[p], truth.terms[1].tail[p]), 1e-6);
  }
}

TEST(FitModel, ZeroSequenceGivesEmptyModel)
{
  auto s = tabulate(range(1, 20), [](long double) { return LComplex(0); });
  auto m = fit_model(s, {0.0, 0.5}, Rational(3), 2);
  EXPECT_TRUE(m.terms.empty());
  for (double r : m.residuals)
    EXPECT_EQ(r, 0.0);
}

TEST(FitModel, CoincidentPhasesNamed)
{
  auto s = tabulate(range(1, 20), [](long double k) { return LComplex(k); });
  try
  {
    (void)fit_model(s, {0.25, 0.2502}, Rational(2), 1);
    FAIL() << "expected CollinearityError";
  }
  catch (CollinearityError const &err)
  {
    std::string what = err.what();
    EXPECT_NE(what.find("0.25"), std::string::npos);
    EXPECT_NE(what.find("0.2502"), std::string::npos);
  }
  // equal modulo the grid period 1/2
  auto even = tabulate(range(2, 40, 2), [](long double k) { return LComplex(k); });
  EXPECT_THROW((void)fit_model(even, {0.1, 0.6}, Rational(2), 1), CollinearityError);
}

TEST(FitModel, RankDeficientLadderNamesPair)
{
  // a ladder reaching k^0 and k^{-...} on two levels only is rank-deficient
  auto s = tabulate({1, 2, 3, 4, 5, 6}, [](long double k) { return LComplex(k); });
  FitOptions o;
  o.step = Rational(1);
  o.degree_span = Rational(0);
  o.collinearity_tolerance = 1e-2;
  EXPECT_THROW((void)fit_model(s, {0.0}, Rational(5), 5, o), CollinearityError);
}

TEST(Poincare, ExactPolynomialFullModel)
{
  auto seq = to_level_sequence(invariant_sequence(su2_marking(2, 0), MappingClassSpec::identity(), 2, 24));
  FitOptions o;
  o.step = Rational(1);
  auto m = fit_model(seq.prefix(12), {0.0}, Rational(4), 3, o);
  auto rep = poincare_check(seq, m, 3);
  EXPECT_TRUE(rep.assessable);
  EXPECT_TRUE(rep.passed);
  EXPECT_TRUE(rep.orders.back().numerically_zero);
  EXPECT_LT(rep.orders.back().constant, 1e-6);
}

TEST(Poincare, TruncatedOneOrderEarlyIsStable)
{
  auto truth = synthetic({{0.3, Rational(2), {1.0L, 0.5L}, {2.0L, -1.0L, 0.25L}}}, 3);
  auto s = generate(truth, range(1, 64));
  auto m = fit_model(s.prefix(40), {0.3}, Rational(3), 3);
  ASSERT_EQ(m.order, 3);
  auto rep = poincare_check(s, m, 2);
  ASSERT_TRUE(rep.assessable);
  EXPECT_TRUE(rep.passed);
  EXPECT_NEAR(rep.orders.back().constant, 0.25, 1e-6);
  auto const &last = rep.orders.back();
  EXPECT_FALSE(last.numerically_zero);
  EXPECT_GT(last.constant, 0.0);
  EXPECT_LT(last.constant, 10.0);
}

TEST(Poincare, WrongPhaseFails)
{
  auto truth = synthetic({{0.3, Rational(2), {1.0L, 0.5L}, {2.0L, -1.0L}}}, 2);
  auto s = generate(truth, range(1, 64));
  auto m = fit_model(s.prefix(40), {0.3}, Rational(3), 2);
  std::vector<LComplex> v;
  for (std::size_t i = 0; i < s.size(); ++i)
    v.push_back(s.value(i) * e(0.01L * s.level(i)));
  auto rep = poincare_check(LevelSequence(s.levels(), v), m, 2);
  ASSERT_TRUE(rep.assessable);
  EXPECT_FALSE(rep.passed);
}

TEST(GrowthDegree, VerlindeSweeps)
{
  for (int points = 0; points <= 2; ++points)
  {
    auto marking = su2_marking(2, points);
    auto seq = to_level_sequence(invariant_sequence(marking, MappingClassSpec::identity(), 2, 16));
    auto g = growth_degree(seq);
    EXPECT_EQ(g.degree, Rational(moduli_dimension(marking) / 2));
    EXPECT_EQ(g.method, "finite-differences");
  }
}

TEST(GrowthDegree, ConstantAndFractional)
{
  EXPECT_EQ(growth_degree(tabulate(range(1, 10), [](long double) { return LComplex(5); })).degree, Rational(0));
  auto g = growth_degree(tabulate(range(1, 200), [](long double k) { return LComplex(std::pow(k, 2.5L)); }));
  EXPECT_EQ(g.degree, Rational(5, 2));
  EXPECT_EQ(g.method, "log-log");
}

TEST(GrowthDegree, Undetermined)
{
  EXPECT_THROW((void)growth_degree(tabulate(range(1, 40), [](long double k) { return LComplex(std::pow(k, 1.27L)); })),
               DegreeUndetermined);
  EXPECT_THROW((void)growth_degree(tabulate(range(1, 10), [](long double) { return LComplex(0); })),
               DegreeUndetermined);
  EXPECT_THROW((void)growth_degree(tabulate({1, 2}, [](long double k) { return LComplex(k); })), DegreeUndetermined);
}

TEST(RoundTrip, ThreePhasesWithNoise)
{
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int trial = 0; trial < 5; ++trial)
  {
    std::vector<SyntheticTerm> terms;
    std::vector<double> qs;
    while (qs.size() < 3)
    {
      double q = unit(rng);
      bool separated = true;
      for (double p : qs)
        separated = separated && phase_distance(p, q) > 0.08;
      if (separated)
        qs.push_back(q);
    }
    Rational degrees[3] = {Rational(5), Rational(9, 2), Rational(4)};
    for (int j = 0; j < 3; ++j)
      terms.push_back({qs[j], degrees[(j + trial) % 3], std::polar(1.0L + unit(rng), 6.28L * unit(rng)),
                       {std::polar(1.0L, 6.28L * unit(rng)), std::polar(0.5L, 6.28L * unit(rng))}});
    auto truth = synthetic(terms, 2);
    auto s = with_noise(generate(truth, range(1, 64)), 1e-8, Rational(5), rng);

    auto det = prony_detect(s, 3);
    ASSERT_EQ(det.phases.size(), 3u) << "trial " << trial;
    auto m = fit_model(s, det.phases, Rational(5), 2);
    ASSERT_EQ(m.terms.size(), 3u) << "trial " << trial;
    for (auto const &t : truth.terms)
    {
      auto it = std::min_element(m.terms.begin(), m.terms.end(), [&](auto const &a, auto const &b) {
        return phase_distance(a.q, t.q) < phase_distance(b.q, t.q);
      });
      EXPECT_LT(phase_distance(it->q, t.q), 1e-6) << "trial " << trial;
      EXPECT_EQ(it->degree, t.degree) << "trial " << trial;
      EXPECT_LT(rel(it->leading, t.leading), 1e-6) << "trial " << trial;
    }
  }
}
