#pragma once

// Extraction of expansions  Z(k) ~ sum_j exp(2 pi i k q_j) k^{d_j} (b_j + sum_p a^p_j k^{-p step})
// from level sweeps: phase detection by a matrix pencil with variable-projection
// polish, linear fitting of the amplitude ladder, Poincare-type remainder
// checks, and growth-degree estimation.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "errors.hpp"
#include "invariants.hpp"
#include "rational.hpp"

namespace wrt
{

using LReal = long double;
using LComplex = std::complex<long double>;
using LCMatrix = Eigen::Matrix<LComplex, Eigen::Dynamic, Eigen::Dynamic>;
using LCVector = Eigen::Matrix<LComplex, Eigen::Dynamic, 1>;

// Values on a strictly increasing set of positive levels.
class LevelSequence
{
public:
  LevelSequence() = default;
  LevelSequence(std::vector<int> levels, std::vector<LComplex> values)
      : levels_(std::move(levels)), values_(std::move(values))
  {
    if (levels_.size() != values_.size())
      throw DimensionError("levels and values differ in length");
    for (std::size_t i = 0; i < levels_.size(); ++i)
    {
      if (levels_[i] <= 0)
        throw DomainError("levels must be positive");
      if (i && levels_[i] <= levels_[i - 1])
        throw DomainError("levels must be strictly increasing");
    }
  }

  std::size_t size() const noexcept { return levels_.size(); }
  std::vector<int> const &levels() const noexcept { return levels_; }
  std::vector<LComplex> const &values() const noexcept { return values_; }
  int level(std::size_t i) const { return levels_.at(i); }
  LComplex value(std::size_t i) const { return values_.at(i); }

  LevelSequence prefix(std::size_t count) const
  {
    count = std::min(count, size());
    return {std::vector<int>(levels_.begin(), levels_.begin() + static_cast<std::ptrdiff_t>(count)),
            std::vector<LComplex>(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(count))};
  }

private:
  std::vector<int> levels_;
  std::vector<LComplex> values_;
};

inline LevelSequence to_level_sequence(InvariantSequence const &seq) { return {seq.levels(), seq.values()}; }

// gcd of all level differences; phases are identifiable only modulo its inverse.
inline int grid_step(std::vector<int> const &levels)
{
  int g = 0;
  for (std::size_t i = 1; i < levels.size(); ++i)
    g = std::gcd(g, levels[i] - levels[i - 1]);
  return g;
}

struct ArithmeticRun
{
  std::size_t start = 0;
  std::size_t length = 0;
  int step = 0;
};

inline ArithmeticRun longest_arithmetic_run(std::vector<int> const &levels)
{
  ArithmeticRun best{0, std::min<std::size_t>(levels.size(), 1), 0};
  std::size_t i = 0;
  while (i + 1 < levels.size())
  {
    int const step = levels[i + 1] - levels[i];
    std::size_t j = i + 1;
    while (j + 1 < levels.size() && levels[j + 1] - levels[j] == step)
      ++j;
    if (j - i + 1 > best.length)
      best = {i, j - i + 1, step};
    i = j;
  }
  return best;
}

// Distance between phases on the circle R / (period Z).
inline double phase_distance(double a, double b, double period = 1.0)
{
  double d = std::fmod(std::abs(a - b), period);
  return std::min(d, period - d);
}

inline double reduce_phase(double q, double period = 1.0)
{
  double r = std::fmod(q, period);
  if (r < 0)
    r += period;
  if (r >= period)
    r = 0;
  return r;
}

namespace detail
{

inline LComplex unit_phase(LReal turns)
{
  LReal const a = 2 * std::numbers::pi_v<LReal> * turns;
  return {std::cos(a), std::sin(a)};
}

// Exponential of k * q with k integral, reducing k q first so large levels
// keep full precision.
inline LComplex level_phase(int k, LReal q)
{
  LReal t = static_cast<LReal>(k) * q;
  return unit_phase(t - std::floor(t));
}

inline LReal median(std::vector<LReal> v)
{
  if (v.empty())
    throw DomainError("median of an empty set");
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2)
    return *mid;
  LReal hi = *mid;
  LReal lo = *std::max_element(v.begin(), mid);
  return (lo + hi) / 2;
}

// Robust growth exponent: median of log-ratios over long baselines.
inline LReal median_growth(LevelSequence const &seq)
{
  std::vector<LReal> slopes, any;
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t j = i + 1; j < seq.size(); ++j)
    {
      LReal const zi = std::abs(seq.value(i)), zj = std::abs(seq.value(j));
      if (zi == 0 || zj == 0)
        continue;
      LReal const s = std::log(zj / zi) / std::log(static_cast<LReal>(seq.level(j)) / seq.level(i));
      any.push_back(s);
      if (seq.level(j) >= 2 * seq.level(i))
        slopes.push_back(s);
    }
  if (slopes.size() >= 3)
    return median(slopes);
  return any.empty() ? 0 : median(any);
}

struct ProjectionFit
{
  LCVector coefficients; // unscaled, in column order
  LCVector residual;
  LReal singular_ratio = 1;
};

// Least squares with unit-norm column scaling; rows already weighted.
inline ProjectionFit project(LCMatrix a, LCVector const &w)
{
  ProjectionFit out;
  Eigen::Matrix<LReal, Eigen::Dynamic, 1> scale(a.cols());
  for (Eigen::Index c = 0; c < a.cols(); ++c)
  {
    scale(c) = a.col(c).norm();
    if (scale(c) == 0)
      scale(c) = 1;
    a.col(c) /= scale(c);
  }
  Eigen::JacobiSVD<LCMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  auto const &sv = svd.singularValues();
  out.singular_ratio = sv.size() && sv(0) > 0 ? sv(sv.size() - 1) / sv(0) : 0;
  svd.setThreshold(std::numeric_limits<LReal>::epsilon() * 16);
  LCVector c = svd.solve(w);
  out.residual = w - a * c;
  for (Eigen::Index i = 0; i < c.size(); ++i)
    c(i) /= scale(i);
  out.coefficients = c;
  return out;
}

// Residual of the same least-squares problem by column-pivoted QR; cheaper
// than project() when only the residual is needed.
inline LCVector project_residual(LCMatrix a, LCVector const &w)
{
  for (Eigen::Index c = 0; c < a.cols(); ++c)
  {
    LReal const n = a.col(c).norm();
    if (n > 0)
      a.col(c) /= n;
  }
  Eigen::ColPivHouseholderQR<LCMatrix> qr(a);
  qr.setThreshold(std::numeric_limits<LReal>::epsilon() * 16);
  return w - a * qr.solve(w);
}

struct LadderBasis
{
  std::vector<LReal> phases;
  std::vector<std::vector<Rational>> exponents; // per phase
  LReal weight_exponent = 0;                    // rows divided by k^weight_exponent
};

inline LCMatrix design_matrix(std::vector<int> const &levels, LadderBasis const &b)
{
  Eigen::Index cols = 0;
  for (auto const &e : b.exponents)
    cols += static_cast<Eigen::Index>(e.size());
  LCMatrix a(static_cast<Eigen::Index>(levels.size()), cols);
  for (std::size_t i = 0; i < levels.size(); ++i)
  {
    LReal const k = levels[i];
    Eigen::Index c = 0;
    for (std::size_t j = 0; j < b.phases.size(); ++j)
    {
      LComplex const z = level_phase(levels[i], b.phases[j]);
      for (auto const &e : b.exponents[j])
        a(static_cast<Eigen::Index>(i), c++) = z * std::pow(k, to_real<LReal>(e) - b.weight_exponent);
    }
  }
  return a;
}

inline LCVector weighted_values(LevelSequence const &seq, LReal weight_exponent)
{
  LCVector w(static_cast<Eigen::Index>(seq.size()));
  for (std::size_t i = 0; i < seq.size(); ++i)
    w(static_cast<Eigen::Index>(i)) = seq.value(i) / std::pow(static_cast<LReal>(seq.level(i)), weight_exponent);
  return w;
}

inline Eigen::Matrix<LReal, Eigen::Dynamic, 1> stack_real(LCVector const &v)
{
  Eigen::Matrix<LReal, Eigen::Dynamic, 1> r(2 * v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
  {
    r(2 * i) = v(i).real();
    r(2 * i + 1) = v(i).imag();
  }
  return r;
}

// Variable-projection refinement of the phases with the amplitude ladder
// eliminated linearly.
inline LReal polish_phases(LevelSequence const &seq, LadderBasis &basis, int iterations)
{
  LCVector const w = weighted_values(seq, basis.weight_exponent);
  LReal const wn = w.norm();
  auto residual = [&](std::vector<LReal> const &q) {
    LadderBasis b = basis;
    b.phases = q;
    return stack_real(project_residual(design_matrix(seq.levels(), b), w));
  };
  auto q = basis.phases;
  auto r = residual(q);
  LReal lambda = 1e-3L;
  LReal const h = 1e-7L;
  int const m = static_cast<int>(q.size());
  using RM = Eigen::Matrix<LReal, Eigen::Dynamic, Eigen::Dynamic>;
  for (int it = 0; it < iterations && r.norm() > 1e-17L * wn; ++it)
  {
    RM jac(r.size(), m);
    for (int j = 0; j < m; ++j)
    {
      auto qp = q, qm = q;
      qp[j] += h;
      qm[j] -= h;
      jac.col(j) = (residual(qp) - residual(qm)) / (2 * h);
    }
    RM jtj = jac.transpose() * jac;
    Eigen::Matrix<LReal, Eigen::Dynamic, 1> g = jac.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 10 && !improved; ++tries)
    {
      RM damped = jtj;
      for (int j = 0; j < m; ++j)
        damped(j, j) += lambda * std::max(jtj(j, j), 1e-30L);
      Eigen::Matrix<LReal, Eigen::Dynamic, 1> delta = -damped.ldlt().solve(g);
      auto trial = q;
      for (int j = 0; j < m; ++j)
        trial[j] += delta(j);
      auto rt = residual(trial);
      if (rt.norm() < r.norm())
      {
        q = trial;
        bool const small = delta.cwiseAbs().maxCoeff() < 1e-15L;
        r = rt;
        lambda = std::max(lambda / 4, 1e-12L);
        improved = true;
        if (small)
          it = iterations;
      }
      else
        lambda *= 8;
    }
    if (!improved)
      break;
  }
  basis.phases = q;
  return wn > 0 ? r.norm() / wn : 0;
}

inline std::vector<Rational> ladder(Rational top, Rational step, int count)
{
  std::vector<Rational> e;
  for (int c = 0; c < count; ++c)
    e.push_back(top - Rational(c) * step);
  return e;
}

// Smallest multiple of step that is >= x - 1e-6.
inline Rational ceil_to_step(LReal x, Rational step)
{
  LReal const s = to_real<LReal>(step);
  auto n = static_cast<std::int64_t>(std::ceil(x / s - 1e-6L));
  return Rational(n) * step;
}

// Gaussian log-likelihood of the stacked real residual with a log(n) penalty
// per real parameter; residuals below floor * scale count as the floor.
inline LReal information_criterion(LReal residual, LReal scale, std::size_t rows, std::size_t params, LReal floor)
{
  LReal const n2 = 2 * static_cast<LReal>(rows);
  LReal const r = std::max(residual, floor * scale);
  if (r == 0)
    return static_cast<LReal>(params) * std::log(n2);
  return n2 * std::log(r * r / n2) + std::log(n2) * static_cast<LReal>(params);
}

inline std::size_t column_count(LadderBasis const &b)
{
  std::size_t c = 0;
  for (auto const &e : b.exponents)
    c += e.size();
  return c;
}

struct LadderSearch
{
  Rational highest;   // largest admissible top exponent
  Rational lowest;    // smallest admissible bottom exponent
  Rational step;
  int min_length = 1;
  int max_length = 1;
  bool count_phases = false; // phases are free parameters of the criterion
  LReal floor = 1e-14L;
  LReal tie = 2;             // criterion difference treated as a tie; ties prefer short, then low ladders
};

inline LReal ladder_criterion(LevelSequence const &seq, LadderBasis const &b, LadderSearch const &s)
{
  LCVector const w = weighted_values(seq, b.weight_exponent);
  LReal const r = project_residual(design_matrix(seq.levels(), b), w).norm();
  std::size_t params = 2 * column_count(b) + (s.count_phases ? b.phases.size() : 0);
  return information_criterion(r, w.norm(), seq.size(), params, s.floor);
}

// Coordinate search over contiguous ladders: each phase in turn takes the
// (top, length) pair of smallest criterion; returns the final criterion. An
// exact fit with a higher top only adds a vanishing leading column.
inline LReal select_ladders(LevelSequence const &seq, LadderBasis &basis, LadderSearch const &s)
{
  std::size_t const rows = seq.size();
  LReal current = ladder_criterion(seq, basis, s);
  for (int sweep = 0; sweep < 8; ++sweep)
  {
    bool changed = false;
    for (std::size_t j = 0; j < basis.phases.size(); ++j)
    {
      struct Option
      {
        Rational top;
        int length;
        LReal value;
      };
      std::vector<Option> options;
      for (Rational top = s.highest; top >= s.lowest; top -= s.step)
        for (int len = s.min_length; len <= s.max_length; ++len)
        {
          if (top - Rational(len - 1) * s.step < s.lowest)
            break;
          LadderBasis b = basis;
          b.exponents[j] = ladder(top, s.step, len);
          if (2 * column_count(b) + b.phases.size() >= 2 * rows)
            break;
          options.push_back({top, len, ladder_criterion(seq, b, s)});
        }
      if (options.empty())
        continue;
      LReal best = options.front().value;
      for (auto const &o : options)
        best = std::min(best, o.value);
      Option const *pick = nullptr;
      for (auto const &o : options)
        if (o.value <= best + s.tie &&
            (!pick || o.length < pick->length || (o.length == pick->length && o.top < pick->top)))
          pick = &o;
      auto next = ladder(pick->top, s.step, pick->length);
      if (next != basis.exponents[j])
      {
        basis.exponents[j] = next;
        current = pick->value;
        changed = true;
      }
    }
    if (!changed)
      break;
  }
  return current;
}

} // namespace detail

// ---- phase detection ----------------------------------------------------------

struct PronyOptions
{
  double pencil_tolerance = 1e-9; // relative singular-value cutoff for the signal subspace
  double max_condition = 1e12;
  double cluster_width = 0.05;    // radians, on the circle of exp(2 pi i step q)
  double energy_floor = 1e-6;     // clusters weaker than this relative to the strongest are noise
  Rational amplitude_step{1, 2};  // exponent spacing of the amplitude ladder used in the polish
  int max_amplitude_terms = 8;
  int polish_iterations = 80;
  double noise_floor = 1e-14;     // relative residual treated as exact
};

struct PronyResult
{
  std::vector<double> phases;  // q_j in [0, period), ordered by decreasing weight
  std::vector<double> weights; // relative contribution of each phase
  int grid_step = 1;
  double period = 1;           // phases are determined modulo 1 / grid_step
  double degree_estimate = 0;
  double condition_number = 0;
  double residual = 0;         // relative residual of the polished fit
};

inline PronyResult prony_detect(LevelSequence const &seq, int max_terms, PronyOptions const &opts = {})
{
  if (max_terms < 1)
    throw DomainError("max_terms must be positive");
  PronyResult out;
  auto run = longest_arithmetic_run(seq.levels());
  if (run.length < static_cast<std::size_t>(2 * max_terms + 2))
    throw DetectionFailure("need at least " + std::to_string(2 * max_terms + 2) +
                               " samples on an arithmetic level grid, found " + std::to_string(run.length),
                           std::numeric_limits<double>::infinity());
  out.grid_step = grid_step(seq.levels());
  out.period = 1.0 / out.grid_step;

  bool all_zero = std::all_of(seq.values().begin(), seq.values().end(), [](LComplex z) { return z == LComplex(0); });
  if (all_zero)
    return out;

  LReal const dhat = detail::median_growth(seq);
  out.degree_estimate = static_cast<double>(dhat);

  // Hankel pencil on the degree-normalized run.
  int const m = static_cast<int>(run.length);
  int const l = m / 2;
  LCVector u(m);
  for (int i = 0; i < m; ++i)
  {
    auto idx = run.start + static_cast<std::size_t>(i);
    u(i) = seq.value(idx) / std::pow(static_cast<LReal>(seq.level(idx)), dhat);
  }
  LCMatrix h(m - l, l + 1);
  for (int r = 0; r < m - l; ++r)
    for (int c = 0; c <= l; ++c)
      h(r, c) = u(r + c);
  Eigen::JacobiSVD<LCMatrix> svd(h, Eigen::ComputeFullV);
  auto const &sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > opts.pencil_tolerance * sv(0))
      ++rank;
  rank = std::clamp(rank, 1, l);
  LCMatrix v = svd.matrixV().leftCols(rank).conjugate();
  LCMatrix top = v.topRows(l), bottom = v.bottomRows(l);
  Eigen::JacobiSVD<LCMatrix> tsvd(top, Eigen::ComputeThinU | Eigen::ComputeThinV);
  auto const &tsv = tsvd.singularValues();
  out.condition_number = tsv(tsv.size() - 1) > 0 ? static_cast<double>(tsv(0) / tsv(tsv.size() - 1))
                                                 : std::numeric_limits<double>::infinity();
  if (!(out.condition_number < opts.max_condition))
    throw DetectionFailure("ill-conditioned matrix pencil", out.condition_number);
  LCMatrix pencil = tsvd.solve(bottom);
  Eigen::ComplexEigenSolver<LCMatrix> es(pencil);
  LCVector roots = es.eigenvalues();

  // Amplitudes of the individual roots on the run.
  LCMatrix vand(m, rank);
  for (int i = 0; i < m; ++i)
    for (int r = 0; r < rank; ++r)
      vand(i, r) = std::pow(roots(r), i);
  LCVector amp = detail::project(vand, u).coefficients;

  // Cluster roots near the unit circle by angle.
  struct Root
  {
    LReal angle;
    int index;
  };
  std::vector<Root> near;
  for (int r = 0; r < rank; ++r)
    if (std::abs(std::log(std::abs(roots(r)))) < 0.5L)
      near.push_back({std::arg(roots(r)), r});
  if (near.empty())
    throw DetectionFailure("no pencil root near the unit circle", out.condition_number);
  std::sort(near.begin(), near.end(), [](Root const &a, Root const &b) { return a.angle < b.angle; });
  std::vector<std::vector<int>> clusters{{near[0].index}};
  for (std::size_t i = 1; i < near.size(); ++i)
  {
    if (near[i].angle - near[i - 1].angle < opts.cluster_width)
      clusters.back().push_back(near[i].index);
    else
      clusters.push_back({near[i].index});
  }
  if (clusters.size() > 1 &&
      near.front().angle + 2 * std::numbers::pi_v<LReal> - near.back().angle < opts.cluster_width)
  {
    clusters.front().insert(clusters.front().end(), clusters.back().begin(), clusters.back().end());
    clusters.pop_back();
  }

  struct Candidate
  {
    LReal q;
    LReal energy;
  };
  std::vector<Candidate> candidates;
  for (auto const &cl : clusters)
  {
    LReal energy = 0;
    LComplex centroid = 0;
    for (int i = 0; i < m; ++i)
    {
      LComplex s = 0;
      for (int r : cl)
        s += amp(r) * std::pow(roots(r), i);
      energy = std::max(energy, std::abs(s));
    }
    for (int r : cl)
      centroid += roots(r) / std::abs(roots(r));
    LReal const turns = std::arg(centroid) / (2 * std::numbers::pi_v<LReal>) / run.step;
    candidates.push_back({turns, energy});
  }
  std::sort(candidates.begin(), candidates.end(), [](auto const &a, auto const &b) { return a.energy > b.energy; });
  LReal const strongest = candidates.front().energy;
  int const n = static_cast<int>(seq.size());
  // Phases closer than the resolution of the run are one phase.
  LReal const merge = 1.0L / (static_cast<LReal>(m) * run.step);
  detail::LadderBasis basis;
  basis.weight_exponent = dhat;
  auto close_to_basis = [&](LReal q) {
    return std::any_of(basis.phases.begin(), basis.phases.end(),
                       [&](LReal p) { return phase_distance(p, q, out.period) < merge; });
  };
  for (auto const &c : candidates)
    if (static_cast<int>(basis.phases.size()) < max_terms && c.energy > opts.energy_floor * strongest &&
        !close_to_basis(c.q))
      basis.phases.push_back(c.q);

  int const per = std::min(opts.max_amplitude_terms, (n - 1 - max_terms) / max_terms);
  if (per < 1)
    throw DetectionFailure("too few samples for the amplitude ladder", out.condition_number);
  Rational const top_exponent = detail::ceil_to_step(dhat, opts.amplitude_step);
  detail::LadderSearch search;
  search.step = opts.amplitude_step;
  search.highest = top_exponent + opts.amplitude_step;
  search.lowest = top_exponent - Rational(per) * opts.amplitude_step;
  search.max_length = per;
  search.count_phases = true;
  search.floor = opts.noise_floor;
  auto const start_ladder = detail::ladder(top_exponent, opts.amplitude_step, std::min(3, per));
  basis.exponents.assign(basis.phases.size(), start_ladder);

  // Alternates phase polishing and ladder selection, admitting longer ladders
  // one step at a time so that early ladders cannot absorb phase errors.
  auto refine = [&](detail::LadderBasis &b, bool continuation) {
    detail::LadderSearch stage = search;
    for (int len = continuation ? 1 : per; len <= per; ++len)
    {
      stage.max_length = len;
      for (auto &e : b.exponents)
        if (static_cast<int>(e.size()) > len)
          e.resize(static_cast<std::size_t>(len));
      for (int round = 0; round < 4; ++round)
      {
        detail::polish_phases(seq, b, opts.polish_iterations);
        auto before = b.exponents;
        detail::select_ladders(seq, b, stage);
        if (b.exponents == before)
          break;
      }
    }
    detail::polish_phases(seq, b, opts.polish_iterations);
    return detail::ladder_criterion(seq, b, search);
  };
  auto without = [](detail::LadderBasis b, std::size_t t) {
    b.phases.erase(b.phases.begin() + static_cast<std::ptrdiff_t>(t));
    b.exponents.erase(b.exponents.begin() + static_cast<std::ptrdiff_t>(t));
    return b;
  };
  // Strongest residual phase on a grid of the period, with the starting ladder.
  auto residual_peak = [&](detail::LadderBasis const &b) {
    LCVector const w = detail::weighted_values(seq, b.weight_exponent);
    LCVector r = b.phases.empty() ? w : detail::project(detail::design_matrix(seq.levels(), b), w).residual;
    int const grid = 16 * n;
    LReal best_q = 0, best_gain = -1;
    for (int g = 0; g < grid; ++g)
    {
      LReal const q = out.period * g / grid;
      detail::LadderBasis one;
      one.weight_exponent = b.weight_exponent;
      one.phases = {q};
      one.exponents = {start_ladder};
      LCMatrix a = detail::design_matrix(seq.levels(), one);
      LReal gain = (a * a.householderQr().solve(r)).norm();
      if (gain > best_gain)
      {
        best_gain = gain;
        best_q = q;
      }
    }
    return best_q;
  };

  LReal current = refine(basis, true);
  for (int pass = 0; pass < 4 * max_terms; ++pass)
  {
    bool merged = false;
    for (std::size_t x = 0; x < basis.phases.size() && !merged; ++x)
      for (std::size_t y = x + 1; y < basis.phases.size() && !merged; ++y)
        if (phase_distance(basis.phases[x], basis.phases[y], out.period) < merge)
        {
          auto bx = without(basis, y), by = without(basis, x);
          LReal cx = refine(bx, false), cy = refine(by, false);
          basis = cx <= cy ? bx : by;
          current = std::min(cx, cy);
          merged = true;
        }
    if (merged)
      continue;

    std::optional<detail::LadderBasis> best;
    LReal best_c = current;
    if (basis.phases.size() > 1)
      for (std::size_t t = 0; t < basis.phases.size(); ++t)
      {
        auto b = without(basis, t);
        LReal c = refine(b, false);
        if (c < best_c)
        {
          best_c = c;
          best = std::move(b);
        }
      }
    if (!best && static_cast<int>(basis.phases.size()) < max_terms)
    {
      auto b = basis;
      LReal q = residual_peak(b);
      if (!close_to_basis(q))
      {
        b.phases.push_back(q);
        b.exponents.push_back(start_ladder);
        LReal c = refine(b, true);
        if (c < best_c)
        {
          best_c = c;
          best = std::move(b);
        }
      }
    }
    if (!best)
      break;
    basis = std::move(*best);
    current = best_c;
  }
  // Column removals with a fresh polish escape ladders that absorbed phase error.
  for (bool moved = true; moved;)
  {
    moved = false;
    for (std::size_t t = 0; t < basis.phases.size() && !moved; ++t)
      for (int end = 0; end < 2 && !moved && basis.exponents[t].size() > 1; ++end)
      {
        auto b = basis;
        auto &e = b.exponents[t];
        if (end == 0)
          e.erase(e.begin());
        else
          e.pop_back();
        detail::polish_phases(seq, b, opts.polish_iterations);
        LReal c = detail::ladder_criterion(seq, b, search);
        if (c < current)
        {
          basis = std::move(b);
          current = c;
          moved = true;
        }
      }
  }
  int const j = static_cast<int>(basis.phases.size());
  {
    LCVector const w = detail::weighted_values(seq, basis.weight_exponent);
    LReal const wn = w.norm();
    out.residual = wn > 0 ? static_cast<double>(
                                detail::project(detail::design_matrix(seq.levels(), basis), w).residual.norm() / wn)
                          : 0.0;
  }

  // Relative weights from the polished linear fit.
  auto a = detail::design_matrix(seq.levels(), basis);
  auto fit = detail::project(a, detail::weighted_values(seq, dhat));
  std::vector<std::pair<double, double>> ranked;
  LReal total = 0;
  std::vector<LReal> contrib(j, 0);
  Eigen::Index offset = 0;
  for (int t = 0; t < j; ++t)
  {
    auto const len = static_cast<Eigen::Index>(basis.exponents[t].size());
    LCVector part = a.middleCols(offset, len) * fit.coefficients.segment(offset, len);
    offset += len;
    contrib[t] = part.norm();
    total += contrib[t];
  }
  for (int t = 0; t < j; ++t)
    ranked.push_back({reduce_phase(static_cast<double>(basis.phases[t]), out.period),
                      total > 0 ? static_cast<double>(contrib[t] / total) : 0.0});
  std::sort(ranked.begin(), ranked.end(), [](auto const &x, auto const &y) { return x.second > y.second; });
  for (auto const &[q, wgt] : ranked)
  {
    out.phases.push_back(q);
    out.weights.push_back(wgt);
  }
  return out;
}

// ---- model fitting ------------------------------------------------------------

struct ExpansionTerm
{
  double q = 0;
  Rational degree;
  LComplex leading;
  std::vector<LComplex> tail; // coefficients of k^{degree - p step}, p = 1..order
};

struct ExpansionModel
{
  std::vector<ExpansionTerm> terms;
  Rational step{1, 2};
  int order = 0;     // P
  double period = 1; // phases are determined modulo this
  std::vector<int> levels;
  std::vector<double> residuals; // |Z(k) - model(k)| per fitted level
  double relative_residual = 0;
  bool order_reduced = false;    // requested P did not fit the sample count

  // Truncated sum through tail order p (p = 0 keeps the leading terms only).
  LComplex evaluate(int k, int p) const
  {
    LComplex s = 0;
    LReal const kk = k;
    for (auto const &t : terms)
    {
      LComplex a = t.leading * std::pow(kk, to_real<LReal>(t.degree));
      for (int i = 1; i <= std::min<int>(p, static_cast<int>(t.tail.size())); ++i)
        a += t.tail[i - 1] * std::pow(kk, to_real<LReal>(t.degree - Rational(i) * step));
      s += detail::level_phase(k, t.q) * a;
    }
    return s;
  }
  LComplex evaluate(int k) const { return evaluate(k, order); }

  Rational leading_degree() const
  {
    if (terms.empty())
      throw DomainError("empty model has no leading degree");
    Rational d = terms.front().degree;
    for (auto const &t : terms)
      d = std::max(d, t.degree);
    return d;
  }
};

struct FitOptions
{
  Rational step{1, 2};
  double coefficient_floor = 1e-6; // relative to the largest column contribution at the top level
  double separation = 1e-3;
  Rational degree_span{3};         // how far below degree_bound the leading degree is searched
  double period = 0;               // 0: 1 / grid_step(levels)
  double collinearity_tolerance = 1e-15;
  double noise_floor = 1e-14;      // relative residual treated as exact
};

namespace detail
{

inline std::string column_name(double q, Rational e)
{
  return "exp(2 pi i k " + std::to_string(q) + ") k^" + to_string(e);
}

inline void check_collinearity(LCMatrix const &a, std::vector<std::string> const &names, double tolerance)
{
  auto fit = project(a, LCVector::Zero(a.rows()));
  if (fit.singular_ratio > tolerance || a.cols() < 2)
    return;
  LCMatrix n = a;
  for (Eigen::Index c = 0; c < n.cols(); ++c)
    if (n.col(c).norm() > 0)
      n.col(c) /= n.col(c).norm();
  LReal worst = -1;
  Eigen::Index wi = 0, wj = 1;
  for (Eigen::Index i = 0; i < n.cols(); ++i)
    for (Eigen::Index j = i + 1; j < n.cols(); ++j)
    {
      LReal c = std::abs(n.col(i).dot(n.col(j)));
      if (c > worst)
      {
        worst = c;
        wi = i;
        wj = j;
      }
    }
  throw CollinearityError("design matrix is rank-deficient (singular-value ratio " +
                          std::to_string(static_cast<double>(fit.singular_ratio)) + "); most collinear pair: " +
                          names[wi] + " and " + names[wj]);
}

} // namespace detail

inline ExpansionModel fit_model(LevelSequence const &seq, std::vector<double> const &phases, Rational degree_bound,
                                int order, FitOptions const &opts = {})
{
  if (order < 0)
    throw DomainError("order must be non-negative");
  ExpansionModel model;
  model.step = opts.step;
  model.levels = seq.levels();
  int const gs = grid_step(seq.levels());
  model.period = opts.period > 0 ? opts.period : (gs > 0 ? 1.0 / gs : 1.0);
  int const n = static_cast<int>(seq.size());
  int const j = static_cast<int>(phases.size());

  for (int a = 0; a < j; ++a)
    for (int b = a + 1; b < j; ++b)
      if (phase_distance(phases[a], phases[b], model.period) < opts.separation)
        throw CollinearityError("phases " + std::to_string(phases[a]) + " and " + std::to_string(phases[b]) +
                                " coincide modulo " + std::to_string(model.period) + " within the separation " +
                                std::to_string(opts.separation));

  bool const all_zero =
      std::all_of(seq.values().begin(), seq.values().end(), [](LComplex z) { return z == LComplex(0); });
  if (j == 0 || all_zero)
  {
    model.order = order;
    for (auto const &z : seq.values())
      model.residuals.push_back(static_cast<double>(std::abs(z)));
    return model;
  }

  int slack = static_cast<int>(floor(opts.degree_span / opts.step));
  int p = order;
  while (j * (p + 1 + slack) > n)
  {
    if (slack > 0)
      --slack;
    else if (p > 0)
      --p;
    else
      throw DomainError("too few samples (" + std::to_string(n) + ") for " + std::to_string(j) + " phase(s)");
  }
  model.order = p;
  model.order_reduced = p < order;

  // The full search range is checked for collinear columns first.
  detail::LadderBasis basis;
  basis.weight_exponent = to_real<LReal>(degree_bound);
  std::vector<std::string> names;
  for (auto q : phases)
  {
    basis.phases.push_back(q);
    basis.exponents.push_back(detail::ladder(degree_bound, opts.step, p + 1 + slack));
    for (auto const &e : basis.exponents.back())
      names.push_back(detail::column_name(q, e));
  }
  detail::check_collinearity(detail::design_matrix(seq.levels(), basis), names, opts.collinearity_tolerance);
  LCVector const w = detail::weighted_values(seq, basis.weight_exponent);
  // Each phase keeps a ladder of p + 1 columns; its top is the leading degree.
  detail::LadderSearch search;
  search.step = opts.step;
  search.highest = degree_bound;
  search.lowest = degree_bound - Rational(slack + p) * opts.step;
  search.min_length = search.max_length = p + 1;
  search.floor = opts.noise_floor;
  detail::LadderBasis tight = basis;
  for (auto &e : tight.exponents)
    e = detail::ladder(degree_bound, opts.step, p + 1);
  detail::select_ladders(seq, tight, search);

  // Phases whose ladder carries no weight are dropped.
  LReal const wn = w.norm();
  for (std::size_t t = tight.phases.size(); t-- > 0;)
  {
    detail::LadderBasis rest = tight;
    rest.phases.erase(rest.phases.begin() + static_cast<std::ptrdiff_t>(t));
    rest.exponents.erase(rest.exponents.begin() + static_cast<std::ptrdiff_t>(t));
    LReal r = rest.phases.empty() ? wn : detail::project(detail::design_matrix(seq.levels(), rest), w).residual.norm();
    if (r <= opts.coefficient_floor * wn)
      tight = std::move(rest);
  }
  std::vector<Rational> degrees;
  for (auto const &e : tight.exponents)
    degrees.push_back(e.front());
  if (tight.phases.empty())
  {
    for (auto const &z : seq.values())
      model.residuals.push_back(static_cast<double>(std::abs(z)));
    return model;
  }
  auto fit = detail::project(detail::design_matrix(seq.levels(), tight), w);
  for (std::size_t t = 0; t < tight.phases.size(); ++t)
  {
    ExpansionTerm term;
    term.q = reduce_phase(static_cast<double>(tight.phases[t]), model.period);
    term.degree = degrees[t];
    auto base = static_cast<Eigen::Index>(t) * (p + 1);
    term.leading = fit.coefficients(base);
    for (int i = 1; i <= p; ++i)
      term.tail.push_back(fit.coefficients(base + i));
    model.terms.push_back(std::move(term));
  }
  std::sort(model.terms.begin(), model.terms.end(), [](auto const &x, auto const &y) {
    return x.degree > y.degree || (x.degree == y.degree && std::abs(x.leading) > std::abs(y.leading));
  });

  LReal num = 0, den = 0;
  for (std::size_t i = 0; i < seq.size(); ++i)
  {
    LReal r = std::abs(seq.value(i) - model.evaluate(seq.level(i)));
    model.residuals.push_back(static_cast<double>(r));
    num += r * r;
    den += std::norm(seq.value(i));
  }
  model.relative_residual = den > 0 ? static_cast<double>(std::sqrt(num / den)) : 0.0;
  return model;
}

// Values of a model on the given levels.
inline LevelSequence generate(ExpansionModel const &model, std::vector<int> const &levels)
{
  std::vector<LComplex> v;
  for (int k : levels)
    v.push_back(model.evaluate(k));
  return {levels, v};
}

// ---- remainder check ------------------------------------------------------------

struct PoincareOptions
{
  double zero_tolerance = 1e-9; // errors below this times |Z(k)| count as exact
  double growth_fraction = 0.5; // unstable if C_p grows faster than this fraction of k^{(p+1) step}
};

struct PoincareOrder
{
  int p = 0;
  double constant = 0;             // max over held-out levels of the scaled error
  std::vector<double> scaled;      // |Z(k) - S_p(k)| k^{(p+1) step - d} per held-out level
  double growth = 0;               // log-slope of the running maximum
  bool numerically_zero = false;
  bool stable = false;
};

struct PoincareReport
{
  std::vector<int> held_out;
  std::vector<PoincareOrder> orders;
  bool assessable = false;
  bool passed = false;
};

inline PoincareReport poincare_check(LevelSequence const &seq, ExpansionModel const &model, int order,
                                     PoincareOptions const &opts = {})
{
  PoincareReport rep;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < seq.size(); ++i)
    if (std::find(model.levels.begin(), model.levels.end(), seq.level(i)) == model.levels.end())
      idx.push_back(i);
  for (auto i : idx)
    rep.held_out.push_back(seq.level(i));
  rep.assessable = idx.size() >= 2;
  if (!rep.assessable)
    return rep;

  LReal const d = model.terms.empty() ? 0 : to_real<LReal>(model.leading_degree());
  LReal const step = to_real<LReal>(model.step);
  rep.passed = true;
  for (int p = 0; p <= std::min(order, model.order); ++p)
  {
    PoincareOrder po;
    po.p = p;
    bool zero = true;
    for (auto i : idx)
    {
      LReal const k = seq.level(i);
      LReal const err = std::abs(seq.value(i) - model.evaluate(seq.level(i), p));
      zero = zero && err <= opts.zero_tolerance * std::max<LReal>(std::abs(seq.value(i)), 1);
      po.scaled.push_back(static_cast<double>(err * std::pow(k, (p + 1) * step - d)));
    }
    po.numerically_zero = zero;
    double running = po.scaled.front();
    double first = running;
    for (double c : po.scaled)
      running = std::max(running, c);
    po.constant = running;
    double const span = std::log(static_cast<double>(seq.level(idx.back())) / seq.level(idx.front()));
    po.growth = first > 0 ? std::log(running / first) / span : (running > 0 ? INFINITY : 0.0);
    po.stable = zero || po.growth < opts.growth_fraction * static_cast<double>((p + 1) * step);
    rep.passed = rep.passed && po.stable;
    rep.orders.push_back(std::move(po));
  }
  return rep;
}

// ---- growth degree ------------------------------------------------------------

struct GrowthEstimate
{
  Rational degree;
  std::string method; // "finite-differences" or "log-log"
  double slope = 0;   // fitted slope for the log-log method
};

struct GrowthOptions
{
  double integrality_tolerance = 1e-6;
  double half_integer_tolerance = 0.15;
};

inline GrowthEstimate growth_degree(LevelSequence const &seq, GrowthOptions const &opts = {})
{
  if (seq.size() < 3)
    throw DegreeUndetermined("need at least three levels");
  auto run = longest_arithmetic_run(seq.levels());
  bool integral = run.length == seq.size();
  std::vector<__int128> v;
  for (auto const &z : seq.values())
  {
    LReal const r = std::round(z.real());
    if (std::abs(z.real() - r) > opts.integrality_tolerance || std::abs(z.imag()) > opts.integrality_tolerance ||
        std::abs(r) > 1e18L)
    {
      integral = false;
      break;
    }
    v.push_back(static_cast<__int128>(static_cast<long long>(r)));
  }
  if (integral)
  {
    bool nonzero = std::any_of(v.begin(), v.end(), [](__int128 x) { return x != 0; });
    if (nonzero)
      for (int m = 0; v.size() >= 3; ++m)
      {
        std::vector<__int128> next;
        for (std::size_t i = 0; i + 1 < v.size(); ++i)
          next.push_back(v[i + 1] - v[i]);
        bool vanish = std::all_of(next.begin(), next.end(), [](__int128 x) { return x == 0; });
        if (vanish && next.size() >= 2)
          return {Rational(m), "finite-differences", 0.0};
        if (vanish)
          break;
        v = std::move(next);
      }
  }

  // log-log regression on the upper half of the levels
  std::vector<LReal> x, y;
  for (std::size_t i = seq.size() / 2; i < seq.size(); ++i)
  {
    LReal const a = std::abs(seq.value(i));
    if (a == 0)
      continue;
    x.push_back(std::log(static_cast<LReal>(seq.level(i))));
    y.push_back(std::log(a));
  }
  if (x.size() < 3)
    throw DegreeUndetermined("too few nonzero values for a log-log estimate");
  LReal const mx = std::accumulate(x.begin(), x.end(), 0.0L) / x.size();
  LReal const my = std::accumulate(y.begin(), y.end(), 0.0L) / y.size();
  LReal sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  double const slope = static_cast<double>(sxy / sxx);
  double const half = std::round(2 * slope) / 2;
  if (std::abs(slope - half) > opts.half_integer_tolerance)
    throw DegreeUndetermined("log-log slope " + std::to_string(slope) + " is not near a half-integer");
  return {Rational(static_cast<std::int64_t>(std::llround(2 * half)), 2), "log-log", slope};
}

} // namespace wrt
