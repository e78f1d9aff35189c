#pragma once

// su(N) as a real vector space of dimension N^2 - 1, the adjoint action of
// SU(N) on it, and a few group-level helpers (exponential, Haar sampling).

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "lie_data.hpp"

namespace wrt
{

using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// Orthonormal basis of su(N) for <X, Y> = Re tr(X^* Y): off-diagonal
// (E_jl - E_lj)/sqrt2 and i(E_jl + E_lj)/sqrt2, then i * diagonal
// generalized Gell-Mann elements.
class SuBasis
{
public:
  explicit SuBasis(int n) : n_(n)
  {
    if (n < 2)
      throw DomainError("su(N) requires N >= 2");
    using namespace std::complex_literals;
    double const r = 1 / std::sqrt(2.0);
    for (int j = 0; j < n; ++j)
      for (int l = j + 1; l < n; ++l)
      {
        CMatrix x = CMatrix::Zero(n, n);
        x(j, l) = r;
        x(l, j) = -r;
        elements_.push_back(x);
        CMatrix y = CMatrix::Zero(n, n);
        y(j, l) = 1i * r;
        y(l, j) = 1i * r;
        elements_.push_back(y);
      }
    for (int m = 1; m < n; ++m)
    {
      CMatrix h = CMatrix::Zero(n, n);
      double const s = 1 / std::sqrt(static_cast<double>(m * (m + 1)));
      for (int j = 0; j < m; ++j)
        h(j, j) = 1i * s;
      h(m, m) = -1i * (m * s);
      elements_.push_back(h);
    }
  }

  int rank_parameter() const noexcept { return n_; }
  int dimension() const noexcept { return static_cast<int>(elements_.size()); }
  CMatrix const &operator[](int a) const { return elements_[a]; }

  RVector coordinates(CMatrix const &x) const
  {
    RVector c(dimension());
    for (int a = 0; a < dimension(); ++a)
      c(a) = (elements_[a].adjoint() * x).trace().real();
    return c;
  }

  CMatrix element(Eigen::Ref<RVector const> const &c) const
  {
    CMatrix x = CMatrix::Zero(n_, n_);
    for (int a = 0; a < dimension(); ++a)
      x += c(a) * elements_[a];
    return x;
  }

  // Matrix of Ad(u) = u (.) u^* in this basis; orthogonal for unitary u.
  RMatrix adjoint(CMatrix const &u) const
  {
    RMatrix ad(dimension(), dimension());
    for (int a = 0; a < dimension(); ++a)
      ad.col(a) = coordinates(u * elements_[a] * u.adjoint());
    return ad;
  }

private:
  int n_;
  std::vector<CMatrix> elements_;
};

// exp of an anti-Hermitian matrix, through the spectral decomposition of the
// Hermitian matrix -i x.
inline CMatrix unitary_exp(CMatrix const &x)
{
  using namespace std::complex_literals;
  CMatrix h = -1i * x;
  h = (h + h.adjoint()).eval() / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  Eigen::VectorXcd phases = (1i * es.eigenvalues().cast<std::complex<double>>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// Diagonal representative exp(2 pi i diag(l)) of the conjugacy class fixed by
// a coweight in orthogonal coordinates.
inline CMatrix holonomy_representative(Coweight const &alpha)
{
  auto coords = alpha.orthogonal_coords();
  int n = static_cast<int>(coords.size());
  CMatrix d = CMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j)
    d(j, j) = root_of_unity<double>(coords[j]);
  return d;
}

// Haar-distributed element of SU(N).
template<typename Rng>
CMatrix random_special_unitary(int n, Rng &rng)
{
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      z(i, j) = {gauss(rng), gauss(rng)};
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
  {
    auto d = r(j, j);
    q.col(j) *= d / std::abs(d);
  }
  auto det = q.determinant();
  q *= std::polar(1.0, -std::arg(det) / n);
  return q;
}

// Uniformly random element of the diagonal maximal torus of SU(N).
template<typename Rng>
CMatrix random_torus_element(int n, Rng &rng)
{
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  CMatrix d = CMatrix::Zero(n, n);
  double total = 0;
  for (int j = 0; j + 1 < n; ++j)
  {
    double t = angle(rng);
    total += t;
    d(j, j) = std::polar(1.0, t);
  }
  d(n - 1, n - 1) = std::polar(1.0, -total);
  return d;
}

inline double unitarity_defect(CMatrix const &u)
{
  return (u * u.adjoint() - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

} // namespace wrt
