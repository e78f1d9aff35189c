#pragma once

// Modular data of the su(N) WZW model at level k: Kac-Peterson S-matrix,
// diagonal T-phases, fusion coefficients and Verlinde dimensions.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "lie_data.hpp"
#include "rational.hpp"

namespace wrt
{

inline constexpr std::size_t max_label_count = 10000;

// h_lambda = <lambda, lambda + 2 rho> / (2 (k + N)).
inline Rational conformal_weight(int n, int k, Weight const &lambda)
{
  auto shifted = lambda + 2 * weyl_vector(n);
  return inner_product(lambda, shifted) / Rational(2 * (k + dual_coxeter_number(n)));
}

inline void require_in_alcove(int k, Weight const &lambda)
{
  if (!lambda.is_dominant() || lambda.level() > Rational(k))
    throw DomainError("label " + to_string(lambda) + " is outside the level-" + std::to_string(k) +
                      " alcove");
}

// Exponent of the T-phase: h_lambda - c/24, reduced to [0, 1).
inline Rational t_exponent(int n, int k, Weight const &lambda)
{
  require_in_alcove(k, lambda);
  return frac(conformal_weight(n, k, lambda) - central_charge(n, k) / Rational(24));
}

template<typename Real = double>
std::complex<Real> t_phase(int n, int k, Weight const &lambda)
{
  return root_of_unity<Real>(t_exponent(n, k, lambda));
}

template<typename Real = double>
struct BasicModularData
{
  using real_type = Real;
  using complex_type = std::complex<Real>;
  using matrix_type = Eigen::Matrix<complex_type, Eigen::Dynamic, Eigen::Dynamic>;
  using vector_type = Eigen::Matrix<complex_type, Eigen::Dynamic, 1>;

  LabelSet labels;
  matrix_type S;
  vector_type T;
  Real precision = Real(1e-10);

  int rank_parameter() const { return labels.rank_parameter(); }
  int level() const { return labels.level(); }
  std::size_t size() const { return labels.size(); }
  std::size_t index_of(Weight const &w) const { return labels.index_of(w); }
};

using ModularData = BasicModularData<double>;

// S_{lambda mu} is proportional to det[exp(-2 pi i l_a m_b / (k + N))] with
// l = lambda + rho, m = mu + rho in orthogonal coordinates.  The determinant
// equals the alternating Weyl sum.  Normalization: unitary, vacuum row
// positive.
template<typename Real = double>
BasicModularData<Real> s_matrix(int n, int k)
{
  using complex_type = std::complex<Real>;
  using Small = Eigen::Matrix<complex_type, Eigen::Dynamic, Eigen::Dynamic>;

  if (n < 2 || k < 1)
    throw DomainError("modular data requires N >= 2 and k >= 1");
  auto labels = label_set(n, k);
  if (labels.size() > max_label_count)
    throw CapacityError("label set of size " + std::to_string(labels.size()) +
                        " exceeds the capacity of " + std::to_string(max_label_count));

  auto const rho = weyl_vector(n);
  std::size_t const m = labels.size();
  std::vector<std::vector<Rational>> shifted;
  shifted.reserve(m);
  for (auto const &w : labels)
    shifted.push_back((w + rho).orthogonal_coords());

  Rational const kt(k + dual_coxeter_number(n));
  typename BasicModularData<Real>::matrix_type s(m, m);
  Small block(n, n);
  for (std::size_t i = 0; i < m; ++i)
  {
    for (std::size_t j = 0; j < m; ++j)
    {
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          block(a, b) = root_of_unity<Real>(-shifted[i][a] * shifted[j][b] / kt);
      s(i, j) = block.partialPivLu().determinant();
    }
  }

  Real const scale = 1 / std::sqrt(static_cast<Real>(n) * std::pow(to_real<Real>(kt), Real(n - 1)));
  complex_type gauge = std::conj(s(0, 0)) / std::abs(s(0, 0));
  s *= gauge * scale;

  typename BasicModularData<Real>::vector_type t(m);
  for (std::size_t i = 0; i < m; ++i)
    t(i) = t_phase<Real>(n, k, labels[i]);

  return BasicModularData<Real>{std::move(labels), std::move(s), std::move(t)};
}

// ---- verification residuals (max-norm) -------------------------------------

template<typename Real>
Real unitarity_residual(BasicModularData<Real> const &md)
{
  auto const m = md.S.rows();
  return (md.S * md.S.adjoint() - BasicModularData<Real>::matrix_type::Identity(m, m)).cwiseAbs().maxCoeff();
}

template<typename Real>
Real symmetry_residual(BasicModularData<Real> const &md)
{
  return (md.S - md.S.transpose()).cwiseAbs().maxCoeff();
}

// max |(ST)^3 - S^2|
template<typename Real>
Real modular_relation_residual(BasicModularData<Real> const &md)
{
  auto st = (md.S * md.T.asDiagonal()).eval();
  auto lhs = (st * st * st).eval();
  auto rhs = (md.S * md.S).eval();
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

// Distance of S^2 from the nearest permutation matrix (entrywise).
template<typename Real>
Real charge_conjugation_residual(BasicModularData<Real> const &md)
{
  auto s2 = (md.S * md.S).eval();
  Real worst = 0;
  for (Eigen::Index i = 0; i < s2.rows(); ++i)
  {
    Eigen::Index best = 0;
    s2.row(i).cwiseAbs().maxCoeff(&best);
    for (Eigen::Index j = 0; j < s2.cols(); ++j)
    {
      auto target = (j == best) ? Real(1) : Real(0);
      worst = std::max(worst, std::abs(s2(i, j) - std::complex<Real>(target)));
    }
  }
  return worst;
}

inline constexpr double integrality_budget = 1e-6;

template<typename Real>
long long round_checked(std::complex<Real> value, std::string const &what)
{
  Real re = std::round(value.real());
  double residue = static_cast<double>(std::max(std::abs(value.real() - re), std::abs(value.imag())));
  if (residue >= integrality_budget)
    throw IntegralityError(what + ": value " + std::to_string(static_cast<double>(value.real())) + "+" +
                               std::to_string(static_cast<double>(value.imag())) +
                               "i is not within the integrality budget (residue " + std::to_string(residue) +
                               ")",
                           residue);
  if (re < 0)
    throw IntegralityError(what + ": rounded to a negative integer", residue);
  return static_cast<long long>(re);
}

// N_{lambda mu}^nu by the Verlinde formula.
template<typename Real>
long long fusion_coefficient(BasicModularData<Real> const &md, Weight const &lambda, Weight const &mu,
                             Weight const &nu)
{
  for (auto const *w : {&lambda, &mu, &nu})
    require_in_alcove(md.level(), *w);
  auto const l = md.index_of(lambda);
  auto const m = md.index_of(mu);
  auto const v = md.index_of(nu);
  std::complex<Real> sum = 0;
  for (Eigen::Index s = 0; s < md.S.cols(); ++s)
    sum += md.S(l, s) * md.S(m, s) * std::conj(md.S(v, s)) / md.S(0, s);
  return round_checked(sum, "fusion coefficient");
}

// dim of the space of conformal blocks on a genus-g surface with the given
// labels: sum_mu S_{0 mu}^{2 - 2g - n} prod_i S_{lambda_i mu}.
template<typename Real>
long long verlinde_dimension(int genus, std::span<Weight const> labels, BasicModularData<Real> const &md)
{
  if (genus < 0)
    throw DomainError("genus must be non-negative");
  std::vector<std::size_t> idx;
  idx.reserve(labels.size());
  for (auto const &w : labels)
  {
    require_in_alcove(md.level(), w);
    idx.push_back(md.index_of(w));
  }
  int const power = 2 - 2 * genus - static_cast<int>(labels.size());
  std::complex<Real> sum = 0;
  for (Eigen::Index mu = 0; mu < md.S.cols(); ++mu)
  {
    std::complex<Real> term = std::pow(md.S(0, mu).real(), Real(power));
    for (auto i : idx)
      term *= md.S(i, mu);
    sum += term;
  }
  return round_checked(sum, "Verlinde dimension");
}

template<typename Real = double>
long long verlinde_dimension(int genus, std::span<Weight const> labels, int n, int k)
{
  return verlinde_dimension(genus, labels, s_matrix<Real>(n, k));
}

} // namespace wrt
