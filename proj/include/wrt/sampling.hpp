#pragma once

// Seeded construction of flat representations: a damped Gauss-Newton solver
// for equations in products of SU(N) elements, and samplers built on it.

#include <algorithm>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "repvar.hpp"
#include "su_algebra.hpp"
#include "surfaces.hpp"
#include "words.hpp"

namespace wrt
{

struct SolverOptions
{
  int max_iterations = 200;
  int restarts = 20;
  double target = 1e-13;   // max-norm residual accepted as a solution
  double fd_step = 1e-6;   // central-difference step in the Lie algebra
};

using GroupResidual = std::function<CMatrix(std::vector<CMatrix> const &)>;

namespace detail
{

inline RVector flatten(CMatrix const &m)
{
  RVector v(2 * m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i)
  {
    v(2 * i) = m(i).real();
    v(2 * i + 1) = m(i).imag();
  }
  return v;
}

} // namespace detail

// Finds x_1..x_m in SU(n) with residual(x) = 0, starting from Haar-random
// points and updating by right multiplication with exponentials.
template<typename Rng>
std::vector<CMatrix> solve_group_equation(int n, int unknowns, GroupResidual const &residual, Rng &rng,
                                          SolverOptions const &opts = {})
{
  SuBasis basis(n);
  int const d = basis.dimension();
  int const params = unknowns * d;

  auto step = [&](std::vector<CMatrix> x, RVector const &delta) {
    for (int u = 0; u < unknowns; ++u)
      x[u] = x[u] * unitary_exp(basis.element(delta.segment(u * d, d)));
    return x;
  };

  for (int attempt = 0; attempt < opts.restarts; ++attempt)
  {
    std::vector<CMatrix> x;
    for (int u = 0; u < unknowns; ++u)
      x.push_back(random_special_unitary(n, rng));
    RVector r = detail::flatten(residual(x));
    double lambda = 1e-6;
    for (int it = 0; it < opts.max_iterations; ++it)
    {
      if (r.cwiseAbs().maxCoeff() < opts.target)
        return x;
      RMatrix jac(r.size(), params);
      for (int p = 0; p < params; ++p)
      {
        RVector e = RVector::Zero(params);
        e(p) = opts.fd_step;
        jac.col(p) = (detail::flatten(residual(step(x, e))) - detail::flatten(residual(step(x, -e)))) /
                     (2 * opts.fd_step);
      }
      RMatrix jjt = jac * jac.transpose();
      bool improved = false;
      for (int tries = 0; tries < 12 && !improved; ++tries)
      {
        RMatrix damped = jjt + lambda * RMatrix::Identity(jjt.rows(), jjt.cols());
        RVector delta = -jac.transpose() * damped.ldlt().solve(r);
        auto trial = step(x, delta);
        RVector rt = detail::flatten(residual(trial));
        if (rt.norm() < r.norm())
        {
          x = std::move(trial);
          r = std::move(rt);
          lambda = std::max(lambda / 3, 1e-12);
          improved = true;
        }
        else
          lambda *= 4;
      }
      if (!improved)
        break;
    }
  }
  throw SamplingFailure("no solution found after " + std::to_string(opts.restarts) + " restarts");
}

// Generic representation with rho(a_j) = h_j exp(2 pi i alpha_j) h_j^-1;
// resampled until h0 = 0.
template<typename Rng>
FlatRepresentation sample_irreducible(SurfaceMarking const &marking, Rng &rng, SolverOptions const &opts = {})
{
  int const n = marking.rank_parameter();
  int const g = marking.genus();
  int const p = static_cast<int>(marking.point_count());
  std::vector<CMatrix> classes;
  for (auto const &pt : marking.points())
    classes.push_back(holonomy_representative(pt.alpha));

  auto assemble = [&](std::vector<CMatrix> const &x) {
    std::vector<CMatrix> images(x.begin(), x.begin() + 2 * g);
    for (int j = 0; j < p; ++j)
      images.push_back(x[2 * g + j] * classes[j] * x[2 * g + j].adjoint());
    return images;
  };
  GeneratorSet gens(g, p);
  Word const relator = gens.surface_relator();
  GroupResidual residual = [&](std::vector<CMatrix> const &x) {
    return CMatrix(evaluate_word(relator, assemble(x)) - CMatrix::Identity(n, n));
  };

  for (int attempt = 0; attempt < 5; ++attempt)
  {
    FlatRepresentation rho(marking, assemble(solve_group_equation(n, 2 * g + p, residual, rng, opts)));
    if (h0(rho).dim == 0)
      return rho;
  }
  throw SamplingFailure("sampler produced only reducible representations");
}

// Representation into the diagonal torus: random A_i, B_i and a Weyl
// permutation of each puncture class so that the product of the a_j is I.
template<typename Rng>
FlatRepresentation sample_torus(SurfaceMarking const &marking, Rng &rng)
{
  int const n = marking.rank_parameter();
  int const g = marking.genus();
  int const p = static_cast<int>(marking.point_count());
  std::vector<std::vector<Rational>> coords;
  for (auto const &pt : marking.points())
    coords.push_back(pt.alpha.orthogonal_coords());

  std::vector<std::vector<int>> perms;
  std::vector<int> id(n);
  std::iota(id.begin(), id.end(), 0);
  do
    perms.push_back(id);
  while (std::next_permutation(id.begin(), id.end()));

  std::vector<std::size_t> choice(p, 0);
  bool found = p == 0;
  while (!found)
  {
    bool integral = true;
    for (int i = 0; i < n && integral; ++i)
    {
      Rational s(0);
      for (int j = 0; j < p; ++j)
        s += coords[j][perms[j == 0 ? 0 : choice[j]][i]];
      integral = is_integer(s);
    }
    if (integral)
    {
      found = true;
      break;
    }
    int j = 1;
    while (j < p && ++choice[j] == perms.size())
      choice[j++] = 0;
    if (j >= p)
      break;
  }
  if (!found)
    throw SamplingFailure("no Weyl arrangement of the puncture classes has trivial product");

  std::vector<CMatrix> images;
  for (int i = 0; i < 2 * g; ++i)
    images.push_back(random_torus_element(n, rng));
  for (int j = 0; j < p; ++j)
  {
    CMatrix a = CMatrix::Zero(n, n);
    auto const &perm = perms[j == 0 ? 0 : choice[j]];
    for (int i = 0; i < n; ++i)
      a(i, i) = root_of_unity<double>(coords[j][perm[i]]);
    images.push_back(a);
  }
  return FlatRepresentation(marking, std::move(images));
}

// The trivial representation; every marked point must carry alpha = 0.
inline FlatRepresentation trivial_representation(SurfaceMarking const &marking)
{
  int const n = marking.rank_parameter();
  for (std::size_t j = 0; j < marking.point_count(); ++j)
    if (marking.point(j).alpha != Coweight::zero(n))
      throw DomainError("the trivial representation needs alpha = 0 at every marked point");
  GeneratorSet gens(marking.genus(), static_cast<int>(marking.point_count()));
  return FlatRepresentation(marking, std::vector<CMatrix>(gens.size(), CMatrix::Identity(n, n)));
}

} // namespace wrt
