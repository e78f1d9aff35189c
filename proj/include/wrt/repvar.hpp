#pragma once

// (Parabolic) group cohomology of punctured-surface groups with coefficients
// in Ad rho, and of their mapping-torus extensions.
//
// A 1-cochain is stored as its values on the generators, stacked into a real
// vector of length (#generators) * dim su(N).  The cocycle condition
// u(gh) = u(g) + Ad rho(g) u(h) turns every relator into a linear constraint,
// so Z^1, B^1 and H^1 reduce to numerical ranks and null spaces.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "errors.hpp"
#include "su_algebra.hpp"
#include "surfaces.hpp"
#include "words.hpp"

namespace wrt
{

// ---- numerical rank --------------------------------------------------------

struct RankOptions
{
  // Singular values below relative_tolerance * max(1, sigma_max) count as zero.
  double relative_tolerance = 1e-8;
  // A precision warning is raised when the spectrum has no gap of at least
  // this factor on both sides of the threshold.
  double gap_factor = 10.0;
};

struct RankInfo
{
  int rank = 0;
  double threshold = 0;
  double smallest_kept = std::numeric_limits<double>::infinity();
  double largest_dropped = 0;
  bool precision_warning = false;
};

namespace detail
{

inline RankInfo classify(RVector const &sv, RankOptions const &opts)
{
  RankInfo info;
  double const smax = sv.size() ? sv(0) : 0.0;
  info.threshold = opts.relative_tolerance * std::max(1.0, smax);
  for (Eigen::Index i = 0; i < sv.size(); ++i)
  {
    if (sv(i) > info.threshold)
    {
      ++info.rank;
      info.smallest_kept = std::min(info.smallest_kept, sv(i));
    }
    else
      info.largest_dropped = std::max(info.largest_dropped, sv(i));
  }
  bool const low_side = info.rank > 0 && info.smallest_kept < opts.gap_factor * info.threshold;
  bool const high_side = info.largest_dropped > 0 && info.largest_dropped * opts.gap_factor > info.threshold;
  info.precision_warning = low_side || high_side;
  return info;
}

} // namespace detail

inline RankInfo numerical_rank(RMatrix const &m, RankOptions const &opts = {})
{
  if (m.rows() == 0 || m.cols() == 0)
    return {};
  Eigen::JacobiSVD<RMatrix> svd(m);
  return detail::classify(svd.singularValues(), opts);
}

// Orthonormal basis (columns) of ker m.
inline RMatrix null_space(RMatrix const &m, RankOptions const &opts = {}, RankInfo *info = nullptr)
{
  if (m.cols() == 0)
    return RMatrix(0, 0);
  if (m.rows() == 0)
  {
    if (info)
      *info = {};
    return RMatrix::Identity(m.cols(), m.cols());
  }
  Eigen::JacobiSVD<RMatrix> svd(m, Eigen::ComputeFullV);
  auto r = detail::classify(svd.singularValues(), opts);
  if (info)
    *info = r;
  return svd.matrixV().rightCols(m.cols() - r.rank);
}

// Orthonormal basis (columns) of the column space of m.
inline RMatrix range_basis(RMatrix const &m, RankOptions const &opts = {}, RankInfo *info = nullptr)
{
  if (m.rows() == 0 || m.cols() == 0)
    return RMatrix(m.rows(), 0);
  Eigen::JacobiSVD<RMatrix> svd(m, Eigen::ComputeFullU);
  auto r = detail::classify(svd.singularValues(), opts);
  if (info)
    *info = r;
  return svd.matrixU().leftCols(r.rank);
}

// ---- representations ---------------------------------------------------------

inline CMatrix evaluate_word(Word const &w, std::vector<CMatrix> const &images)
{
  if (images.empty())
    throw DimensionError("no generator images");
  auto const n = images.front().rows();
  CMatrix out = CMatrix::Identity(n, n);
  for (auto const &l : w)
  {
    if (l.generator < 0 || l.generator >= static_cast<int>(images.size()))
      throw WordError("word refers to generator " + std::to_string(l.generator) + " with no image");
    out = l.inverse ? (out * images[l.generator].adjoint()).eval() : (out * images[l.generator]).eval();
  }
  return out;
}

// Max-norm distance between the eigenvalue multiset of u and that of the
// diagonal representative of alpha, under greedy nearest matching.
inline double conjugacy_defect(CMatrix const &u, Coweight const &alpha)
{
  Eigen::ComplexEigenSolver<CMatrix> es(u);
  Eigen::VectorXcd const target = holonomy_representative(alpha).diagonal();
  std::vector<bool> used(target.size(), false);
  double worst = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
  {
    Eigen::Index best = -1;
    double dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < target.size(); ++j)
      if (!used[j] && std::abs(es.eigenvalues()(i) - target(j)) < dist)
      {
        dist = std::abs(es.eigenvalues()(i) - target(j));
        best = j;
      }
    used[best] = true;
    worst = std::max(worst, dist);
  }
  return worst;
}

// Images in SU(N) of A_1..A_g, B_1..B_g, a_1..a_n satisfying the surface
// relation, with rho(a_i) conjugate to exp(2 pi i alpha_i).
class FlatRepresentation
{
public:
  FlatRepresentation(SurfaceMarking marking, std::vector<CMatrix> images, double tolerance = 1e-9)
      : marking_(std::move(marking)), images_(std::move(images)), tolerance_(tolerance)
  {
    auto gens = generators();
    int const n = marking_.rank_parameter();
    if (static_cast<int>(images_.size()) != gens.size())
      throw DimensionError("expected " + std::to_string(gens.size()) + " generator images, got " +
                           std::to_string(images_.size()));
    for (int i = 0; i < gens.size(); ++i)
    {
      auto const &u = images_[i];
      if (u.rows() != n || u.cols() != n)
        throw DimensionError("image of " + gens.name(i) + " is not " + std::to_string(n) + "x" +
                             std::to_string(n));
      if (unitarity_defect(u) > tolerance_ || std::abs(u.determinant() - 1.0) > tolerance_)
        throw ConsistencyError("image of " + gens.name(i) + " is not in SU(" + std::to_string(n) + ")");
    }
    relation_residue_ =
        (evaluate_word(gens.surface_relator(), images_) - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (relation_residue_ > tolerance_)
      throw ConsistencyError("surface relation residue " + std::to_string(relation_residue_) +
                             " exceeds tolerance");
    for (std::size_t j = 0; j < marking_.point_count(); ++j)
    {
      double d = conjugacy_defect(images_[gens.puncture_index(static_cast<int>(j))], marking_.point(j).alpha);
      if (d > std::sqrt(tolerance_))
        throw ConsistencyError("image of a" + std::to_string(j + 1) +
                               " is not in the prescribed conjugacy class (defect " + std::to_string(d) + ")");
    }
  }

  SurfaceMarking const &marking() const noexcept { return marking_; }
  std::vector<CMatrix> const &images() const noexcept { return images_; }
  CMatrix const &image(int generator) const { return images_.at(generator); }
  double tolerance() const noexcept { return tolerance_; }
  double relation_residue() const noexcept { return relation_residue_; }
  GeneratorSet generators() const
  {
    return {marking_.genus(), static_cast<int>(marking_.point_count())};
  }
  CMatrix evaluate(Word const &w) const { return evaluate_word(w, images_); }

private:
  SurfaceMarking marking_;
  std::vector<CMatrix> images_;
  double tolerance_;
  double relation_residue_ = 0;
};

// f_* on the surface generators (one word per generator) together with the
// holonomy g of the extra generator eta of the mapping torus.
class MappingData
{
public:
  MappingData(std::vector<Word> f_star, CMatrix holonomy, double tolerance = 1e-9)
      : f_star_(std::move(f_star)), holonomy_(std::move(holonomy)), tolerance_(tolerance)
  {}

  static MappingData identity(GeneratorSet const &gens, CMatrix holonomy, double tolerance = 1e-9)
  {
    std::vector<Word> images;
    for (int i = 0; i < gens.surface_count(); ++i)
      images.push_back({{i, false}});
    return MappingData(std::move(images), std::move(holonomy), tolerance);
  }

  std::vector<Word> const &f_star() const noexcept { return f_star_; }
  Word const &image_of(int generator) const { return f_star_.at(generator); }
  CMatrix const &holonomy() const noexcept { return holonomy_; }
  double tolerance() const noexcept { return tolerance_; }

  // f_* applied to a word in the surface generators.
  Word apply(Word const &w) const
  {
    Word out;
    for (auto const &l : w)
    {
      if (l.generator < 0 || l.generator >= static_cast<int>(f_star_.size()))
        throw WordError("f_* is not defined on generator " + std::to_string(l.generator));
      out = concat(std::move(out), l.inverse ? inverse(f_star_[l.generator]) : f_star_[l.generator]);
    }
    return out;
  }

private:
  std::vector<Word> f_star_;
  CMatrix holonomy_;
  double tolerance_;
};

// Throws ConsistencyError unless rho(f_* gamma) = g^-1 rho(gamma) g for every
// generator and f_* maps the surface relator to the identity through rho.
inline void check_consistency(FlatRepresentation const &rho, MappingData const &mapping)
{
  auto gens = rho.generators();
  int const n = rho.marking().rank_parameter();
  if (static_cast<int>(mapping.f_star().size()) != gens.surface_count())
    throw ConsistencyError("f_* must give one word per surface generator");
  auto const &g = mapping.holonomy();
  if (g.rows() != n || g.cols() != n || unitarity_defect(g) > mapping.tolerance() ||
      std::abs(g.determinant() - 1.0) > mapping.tolerance())
    throw ConsistencyError("holonomy of eta is not in SU(" + std::to_string(n) + ")");
  for (int i = 0; i < gens.surface_count(); ++i)
  {
    for (auto const &l : mapping.image_of(i))
      if (l.generator >= gens.surface_count())
        throw ConsistencyError("f_*(" + gens.name(i) + ") uses a generator outside the surface group");
    CMatrix lhs = rho.evaluate(mapping.image_of(i));
    CMatrix rhs = g.adjoint() * rho.image(i) * g;
    double d = (lhs - rhs).cwiseAbs().maxCoeff();
    if (d > mapping.tolerance())
      throw ConsistencyError("rho(f_* " + gens.name(i) + ") differs from g^-1 rho(" + gens.name(i) +
                             ") g by " + std::to_string(d));
  }
  CMatrix rel = rho.evaluate(mapping.apply(gens.surface_relator()));
  double d = (rel - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (d > mapping.tolerance())
    throw ConsistencyError("f_* does not preserve the surface relation (residue " + std::to_string(d) + ")");
}

// ---- cocycles ----------------------------------------------------------------

// Linear map (stacked generator values) -> u(w), of size lie_dim x (slots *
// lie_dim), built by the twisted Leibniz rule.
inline RMatrix word_cocycle_map(Word const &w, std::vector<RMatrix> const &ad, int lie_dim)
{
  int const slots = static_cast<int>(ad.size());
  RMatrix map = RMatrix::Zero(lie_dim, slots * lie_dim);
  RMatrix prefix = RMatrix::Identity(lie_dim, lie_dim);
  for (auto const &l : w)
  {
    if (l.generator < 0 || l.generator >= slots)
      throw WordError("word refers to generator " + std::to_string(l.generator) + " outside the cochain");
    auto block = map.middleCols(l.generator * lie_dim, lie_dim);
    RMatrix const &a = ad[l.generator];
    if (!l.inverse)
    {
      block += prefix;
      prefix = (prefix * a).eval();
    }
    else
    {
      // u(x^-1) = -Ad(x)^-1 u(x); Ad is orthogonal
      block -= prefix * a.transpose();
      prefix = (prefix * a.transpose()).eval();
    }
  }
  return map;
}

// Direct evaluation of u(w) from generator values given as su(N) matrices.
inline CMatrix evaluate_cocycle_word(std::vector<CMatrix> const &assignment, Word const &w,
                                     std::vector<CMatrix> const &images)
{
  if (assignment.size() != images.size())
    throw DimensionError("assignment and images have different lengths");
  if (images.empty())
    throw DimensionError("no generator images");
  auto const n = images.front().rows();
  CMatrix value = CMatrix::Zero(n, n);
  CMatrix prefix = CMatrix::Identity(n, n);
  for (auto const &l : w)
  {
    if (l.generator < 0 || l.generator >= static_cast<int>(images.size()))
      throw WordError("word refers to generator " + std::to_string(l.generator) + " with no image");
    CMatrix const &x = images[l.generator];
    CMatrix const &u = assignment[l.generator];
    if (!l.inverse)
    {
      value += prefix * u * prefix.adjoint();
      prefix = (prefix * x).eval();
    }
    else
    {
      CMatrix ux = -(x.adjoint() * u * x);
      value += prefix * ux * prefix.adjoint();
      prefix = (prefix * x.adjoint()).eval();
    }
  }
  return value;
}

inline CMatrix evaluate_cocycle_word(std::vector<CMatrix> const &assignment, Word const &w,
                                     FlatRepresentation const &rho)
{
  return evaluate_cocycle_word(assignment, w, rho.images());
}

// Basis of H^1_par realized as the orthogonal complement of B^1 inside
// Z^1_par, in stacked-generator coordinates.
struct CocycleBasis
{
  int lie_dim = 0;
  int slots = 0;
  RMatrix vectors;      // (slots * lie_dim) x h1, orthonormal, orthogonal to B^1
  RMatrix cocycles;     // orthonormal basis of Z^1_par
  RMatrix coboundaries; // orthonormal basis of B^1
  RankInfo cocycle_rank;
  RankInfo coboundary_rank;

  int dimension() const { return static_cast<int>(vectors.cols()); }
  RVector assignment(int j) const { return vectors.col(j); }

  // Value on generator slot as coordinates in the su(N) basis.
  static RVector slot_value(RVector const &assignment, int slot, int lie_dim)
  {
    return assignment.segment(slot * lie_dim, lie_dim);
  }
};

namespace detail
{

struct CohomologyProblem
{
  int lie_dim = 0;
  std::vector<RMatrix> ad;        // one per generator slot
  std::vector<Word> relators;
  std::vector<int> parabolic_slots;
};

struct CohomologyResult
{
  RMatrix h0_basis;
  RankInfo h0_rank;
  RMatrix constraints;
  CocycleBasis h1;
  bool precision_warning = false;
};

inline CohomologyResult solve(CohomologyProblem const &p, RankOptions const &opts)
{
  int const d = p.lie_dim;
  int const slots = static_cast<int>(p.ad.size());
  int const total = slots * d;
  CohomologyResult out;
  RMatrix const id = RMatrix::Identity(d, d);

  // H^0: common fixed vectors of all Ad rho(gamma).
  RMatrix stacked(slots * d, d);
  for (int s = 0; s < slots; ++s)
    stacked.middleRows(s * d, d) = p.ad[s] - id;
  out.h0_basis = null_space(stacked, opts, &out.h0_rank);

  // Z^1_par: relator constraints plus u(a_i) orthogonal to the fixed space of
  // Ad rho(a_i), i.e. u(a_i) in the image of (I - Ad rho(a_i)).
  std::vector<RMatrix> blocks;
  int rows = 0;
  for (auto const &r : p.relators)
  {
    blocks.push_back(word_cocycle_map(r, p.ad, d));
    rows += d;
  }
  for (int s : p.parabolic_slots)
  {
    RMatrix fixed = null_space(p.ad[s] - id, opts);
    RMatrix block = RMatrix::Zero(fixed.cols(), total);
    block.middleCols(s * d, d) = fixed.transpose();
    rows += static_cast<int>(fixed.cols());
    blocks.push_back(std::move(block));
  }
  out.constraints.resize(rows, total);
  int at = 0;
  for (auto const &b : blocks)
  {
    out.constraints.middleRows(at, b.rows()) = b;
    at += static_cast<int>(b.rows());
  }

  auto &h1 = out.h1;
  h1.lie_dim = d;
  h1.slots = slots;
  h1.cocycles = null_space(out.constraints, opts, &h1.cocycle_rank);

  RMatrix cob(total, d);
  for (int s = 0; s < slots; ++s)
    cob.middleRows(s * d, d) = id - p.ad[s];
  h1.coboundaries = range_basis(cob, opts, &h1.coboundary_rank);

  if (out.constraints.rows() > 0 && h1.coboundaries.cols() > 0)
  {
    double leak = (out.constraints * h1.coboundaries).cwiseAbs().maxCoeff();
    if (leak > 1e3 * opts.relative_tolerance)
      throw InvariantViolation("coboundaries fail the cocycle constraints (residual " + std::to_string(leak) + ")");
  }

  RankInfo split;
  RMatrix coeff = null_space(h1.coboundaries.transpose() * h1.cocycles, opts, &split);
  h1.vectors = h1.cocycles * coeff;
  out.precision_warning = out.h0_rank.precision_warning || h1.cocycle_rank.precision_warning ||
                          h1.coboundary_rank.precision_warning || split.precision_warning;
  return out;
}

inline std::vector<RMatrix> adjoint_images(SuBasis const &basis, std::vector<CMatrix> const &images)
{
  std::vector<RMatrix> ad;
  ad.reserve(images.size());
  for (auto const &u : images)
    ad.push_back(basis.adjoint(u));
  return ad;
}

inline CohomologyProblem surface_problem(FlatRepresentation const &rho, SuBasis const &basis)
{
  auto gens = rho.generators();
  CohomologyProblem p;
  p.lie_dim = basis.dimension();
  p.ad = adjoint_images(basis, rho.images());
  p.relators = {gens.surface_relator()};
  for (int j = 0; j < gens.punctures(); ++j)
    p.parabolic_slots.push_back(gens.puncture_index(j));
  return p;
}

inline CohomologyProblem mapping_torus_problem(FlatRepresentation const &rho, MappingData const &mapping,
                                               SuBasis const &basis)
{
  auto gens = rho.generators();
  GeneratorSet ext(gens.genus(), gens.punctures(), true);
  auto images = rho.images();
  images.push_back(mapping.holonomy());
  CohomologyProblem p;
  p.lie_dim = basis.dimension();
  p.ad = adjoint_images(basis, images);
  p.relators.push_back(gens.surface_relator());
  int const eta = ext.eta_index();
  for (int i = 0; i < gens.surface_count(); ++i)
  {
    // eta^-1 gamma eta (f_* gamma)^-1
    Word r{{eta, true}, {i, false}, {eta, false}};
    p.relators.push_back(concat(std::move(r), inverse(mapping.image_of(i))));
  }
  for (int j = 0; j < gens.punctures(); ++j)
    p.parabolic_slots.push_back(gens.puncture_index(j));
  return p;
}

} // namespace detail

inline RVector evaluate_cocycle_word(RVector const &assignment, Word const &w, FlatRepresentation const &rho)
{
  SuBasis basis(rho.marking().rank_parameter());
  auto ad = detail::adjoint_images(basis, rho.images());
  if (assignment.size() != static_cast<Eigen::Index>(ad.size()) * basis.dimension())
    throw DimensionError("assignment has the wrong length");
  return word_cocycle_map(w, ad, basis.dimension()) * assignment;
}

struct H0Result
{
  int dim = 0;
  RMatrix basis; // lie_dim x dim, orthonormal coordinates in su(N)
  bool precision_warning = false;
};

inline H0Result h0(FlatRepresentation const &rho, RankOptions const &opts = {})
{
  SuBasis basis(rho.marking().rank_parameter());
  auto r = detail::solve(detail::surface_problem(rho, basis), opts);
  return {static_cast<int>(r.h0_basis.cols()), r.h0_basis, r.h0_rank.precision_warning};
}

struct H1Result
{
  int dim = 0;
  CocycleBasis basis;
  int h0 = 0;
  bool reducible = false; // h0 > 0: the dimension is not a smooth-point tangent dimension
  bool precision_warning = false;
};

inline H1Result h1_par(FlatRepresentation const &rho, RankOptions const &opts = {})
{
  SuBasis basis(rho.marking().rank_parameter());
  auto r = detail::solve(detail::surface_problem(rho, basis), opts);
  H1Result out;
  out.dim = r.h1.dimension();
  out.h0 = static_cast<int>(r.h0_basis.cols());
  out.reducible = out.h0 > 0;
  out.precision_warning = r.precision_warning;
  out.basis = std::move(r.h1);
  return out;
}

struct MappingTorusCohomology
{
  int h0_f = 0;
  int h1_par_f = 0;
  bool precision_warning = false;
};

inline MappingTorusCohomology mapping_torus_cohomology(FlatRepresentation const &rho, MappingData const &mapping,
                                                       RankOptions const &opts = {})
{
  check_consistency(rho, mapping);
  SuBasis basis(rho.marking().rank_parameter());
  auto r = detail::solve(detail::mapping_torus_problem(rho, mapping, basis), opts);
  return {static_cast<int>(r.h0_basis.cols()), r.h1.dimension(), r.precision_warning};
}

namespace detail
{

// Matrix of u |-> Ad(g) u(f_* .) on stacked surface-generator values.
inline RMatrix pullback_matrix(FlatRepresentation const &rho, MappingData const &mapping, SuBasis const &basis)
{
  auto gens = rho.generators();
  int const d = basis.dimension();
  auto ad = adjoint_images(basis, rho.images());
  RMatrix ad_g = basis.adjoint(mapping.holonomy());
  RMatrix f(gens.surface_count() * d, gens.surface_count() * d);
  for (int i = 0; i < gens.surface_count(); ++i)
    f.middleRows(i * d, d) = ad_g * word_cocycle_map(mapping.image_of(i), ad, d);
  return f;
}

// Induced action of Ad(g) o f^* on H^1_par in the CocycleBasis coordinates.
inline RMatrix induced_action(CohomologyResult const &surface, RMatrix const &pullback, RankOptions const &opts)
{
  RMatrix const &w = surface.h1.vectors;
  RMatrix image = pullback * w;
  if (surface.constraints.rows() > 0 && image.cols() > 0)
  {
    double leak = (surface.constraints * image).cwiseAbs().maxCoeff();
    if (leak > 1e3 * opts.relative_tolerance)
      throw InvariantViolation("Ad(g) o f^* does not preserve parabolic cocycles (residual " +
                               std::to_string(leak) + ")");
  }
  return w.transpose() * image;
}

} // namespace detail

struct EigenspaceReport
{
  int dim = 0;               // agreed value
  int direct = 0;            // dim ker(Ad(g) o f^* - 1) on H^1_par(pi)
  int via_mapping_torus = 0; // h1_par(pi_f) - h0(pi_f)
  int h1_par = 0;
  int h0_f = 0;
  int h1_par_f = 0;
  bool precision_warning = false;
};

inline EigenspaceReport eigenspace_dim(FlatRepresentation const &rho, MappingData const &mapping,
                                       RankOptions const &opts = {})
{
  check_consistency(rho, mapping);
  SuBasis basis(rho.marking().rank_parameter());
  auto surface = detail::solve(detail::surface_problem(rho, basis), opts);
  auto torus = detail::solve(detail::mapping_torus_problem(rho, mapping, basis), opts);

  RMatrix action = detail::induced_action(surface, detail::pullback_matrix(rho, mapping, basis), opts);
  int const h1 = surface.h1.dimension();
  RankInfo r = numerical_rank(action - RMatrix::Identity(h1, h1), opts);

  EigenspaceReport out;
  out.h1_par = h1;
  out.direct = h1 - r.rank;
  out.h0_f = static_cast<int>(torus.h0_basis.cols());
  out.h1_par_f = torus.h1.dimension();
  out.via_mapping_torus = out.h1_par_f - out.h0_f;
  out.precision_warning = r.precision_warning || surface.precision_warning || torus.precision_warning;
  if (out.direct != out.via_mapping_torus)
    throw InvariantViolation("1-eigenspace dimension " + std::to_string(out.direct) +
                             " differs from h1_par(pi_f) - h0(pi_f) = " + std::to_string(out.via_mapping_torus));
  out.dim = out.direct;
  return out;
}

// Ranks and exactness of
//   0 -> H0(pi_f) -phi0-> H0(pi) -mu0-> H0(pi) -delta-> H1par(pi_f) -phi1-> H1par(pi) -mu1-> H1par(pi)
struct WangSequenceReport
{
  int h0_f = 0, h0 = 0, h1_par_f = 0, h1_par = 0;
  int rank_phi0 = 0, rank_mu0 = 0, rank_delta = 0, rank_phi1 = 0, rank_mu1 = 0;
  RMatrix phi0, mu0, delta, phi1, mu1;
  bool exact_at[5] = {false, false, false, false, false};
  double composition_residual = 0;
  bool precision_warning = false;

  bool exact() const { return std::all_of(std::begin(exact_at), std::end(exact_at), [](bool b) { return b; }); }
  int delta_image_dim() const { return rank_delta; }
};

inline WangSequenceReport wang_sequence_check(FlatRepresentation const &rho, MappingData const &mapping,
                                              RankOptions const &opts = {})
{
  check_consistency(rho, mapping);
  SuBasis basis(rho.marking().rank_parameter());
  int const d = basis.dimension();
  auto gens = rho.generators();
  int const total = gens.surface_count() * d;
  int const total_f = total + d;

  auto surface = detail::solve(detail::surface_problem(rho, basis), opts);
  auto torus = detail::solve(detail::mapping_torus_problem(rho, mapping, basis), opts);

  RMatrix const &k = surface.h0_basis;
  RMatrix const &kf = torus.h0_basis;
  RMatrix const &w = surface.h1.vectors;
  RMatrix const &wf = torus.h1.vectors;
  RMatrix ad_g = basis.adjoint(mapping.holonomy());

  WangSequenceReport rep;
  rep.h0 = static_cast<int>(k.cols());
  rep.h0_f = static_cast<int>(kf.cols());
  rep.h1_par = static_cast<int>(w.cols());
  rep.h1_par_f = static_cast<int>(wf.cols());

  rep.phi0 = k.transpose() * kf;
  rep.mu0 = k.transpose() * (RMatrix::Identity(d, d) - ad_g) * k;

  // delta(v): the cochain vanishing on pi with value v on eta.
  RMatrix e = RMatrix::Zero(total_f, rep.h0);
  e.bottomRows(d) = k;
  if (torus.constraints.rows() > 0 && e.cols() > 0)
  {
    double leak = (torus.constraints * e).cwiseAbs().maxCoeff();
    if (leak > 1e3 * opts.relative_tolerance)
      throw InvariantViolation("delta(v) is not a parabolic cocycle on pi_f (residual " + std::to_string(leak) + ")");
  }
  rep.delta = wf.transpose() * e;

  // phi1: restriction to pi.
  rep.phi1 = w.transpose() * wf.topRows(total);

  RMatrix action = detail::induced_action(surface, detail::pullback_matrix(rho, mapping, basis), opts);
  rep.mu1 = RMatrix::Identity(rep.h1_par, rep.h1_par) - action;

  auto rank = [&](RMatrix const &m) {
    auto r = numerical_rank(m, opts);
    rep.precision_warning = rep.precision_warning || r.precision_warning;
    return r.rank;
  };
  rep.rank_phi0 = rank(rep.phi0);
  rep.rank_mu0 = rank(rep.mu0);
  rep.rank_delta = rank(rep.delta);
  rep.rank_phi1 = rank(rep.phi1);
  rep.rank_mu1 = rank(rep.mu1);

  auto norm = [](RMatrix const &m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; };
  rep.composition_residual = std::max({norm(rep.mu0 * rep.phi0), norm(rep.delta * rep.mu0),
                                       norm(rep.phi1 * rep.delta), norm(rep.mu1 * rep.phi1)});
  bool const composes = rep.composition_residual < 1e3 * opts.relative_tolerance;

  rep.exact_at[0] = rep.rank_phi0 == rep.h0_f;
  rep.exact_at[1] = composes && rep.rank_phi0 == rep.h0 - rep.rank_mu0;
  rep.exact_at[2] = composes && rep.rank_mu0 == rep.h0 - rep.rank_delta;
  rep.exact_at[3] = composes && rep.rank_delta == rep.h1_par_f - rep.rank_phi1;
  rep.exact_at[4] = composes && rep.rank_phi1 == rep.h1_par - rep.rank_mu1;
  rep.precision_warning = rep.precision_warning || surface.precision_warning || torus.precision_warning;

  if (!rep.exact())
  {
    std::string nodes;
    for (int i = 0; i < 5; ++i)
      if (!rep.exact_at[i])
        nodes += (nodes.empty() ? "" : ", ") + std::to_string(i + 1);
    throw InvariantViolation("Wang-type sequence is not exact at node(s) " + nodes);
  }
  return rep;
}

} // namespace wrt
