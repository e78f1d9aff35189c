#pragma once

// Marked surfaces with parabolic weights, admissibility of levels, and the
// real dimension of the moduli space of flat connections.

#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "lie_data.hpp"

namespace wrt
{

enum class FlagType
{
  full
};

struct MarkedPoint
{
  Coweight alpha; // point of the Weyl alcove, holonomy conjugate to exp(2 pi i alpha)
  FlagType flag = FlagType::full;
};

class SurfaceMarking
{
public:
  SurfaceMarking(int genus, int n, std::vector<MarkedPoint> points)
      : genus_(genus), n_(n), points_(std::move(points))
  {
    if (genus < 2)
      throw UnsupportedConfiguration("marked surfaces require genus >= 2, got " + std::to_string(genus));
    if (n < 2)
      throw DomainError("su(N) requires N >= 2");
    for (std::size_t i = 0; i < points_.size(); ++i)
    {
      auto const &a = points_[i].alpha;
      if (a.rank_parameter() != n)
        throw DimensionError("marked point " + std::to_string(i) + " carries a weight of the wrong rank");
      if (!a.is_dominant() || a.level() > Rational(1))
        throw DomainError("marked point " + std::to_string(i) + " weight " + to_string(a) +
                          " is outside the Weyl alcove");
      for (auto const &label : a.dynkin_labels())
        base_level_ = std::lcm(base_level_, static_cast<int>(label.denominator()));
    }
  }

  int genus() const noexcept { return genus_; }
  int rank_parameter() const noexcept { return n_; }
  std::size_t point_count() const noexcept { return points_.size(); }
  std::vector<MarkedPoint> const &points() const noexcept { return points_; }
  MarkedPoint const &point(std::size_t i) const { return points_.at(i); }

  // Smallest k0 >= 1 with k0 * alpha_i integral for every i.
  int base_level() const noexcept { return base_level_; }

  bool all_regular() const
  {
    for (auto const &p : points_)
      if (!p.alpha.is_regular_alcove_point())
        return false;
    return true;
  }

  // k * alpha_i as integral labels; throws when k * alpha_i is not integral.
  std::vector<Weight> labels_at(int k) const
  {
    std::vector<Weight> out;
    out.reserve(points_.size());
    for (auto const &p : points_)
    {
      auto scaled = Rational(k) * p.alpha;
      if (!is_integral(scaled))
        throw AdmissibilityError("k * alpha = " + to_string(scaled) + " is not integral at level " +
                                 std::to_string(k));
      out.push_back(to_weight(scaled));
    }
    return out;
  }

private:
  int genus_;
  int n_;
  std::vector<MarkedPoint> points_;
  int base_level_ = 1;
};

// Real dimension 2(g-1)(N^2-1) + sum_i dim SU(N)/L_i; with full flags the
// stabilizer L_i is the maximal torus and each summand is N^2 - N.
inline int moduli_dimension(SurfaceMarking const &marking)
{
  for (std::size_t i = 0; i < marking.point_count(); ++i)
    if (!marking.point(i).alpha.is_regular_alcove_point())
      throw UnsupportedConfiguration("marked point " + std::to_string(i) + " has non-regular weight " +
                                     to_string(marking.point(i).alpha));
  int const n = marking.rank_parameter();
  int const dim_k = lie_algebra_dimension(n);
  return 2 * (marking.genus() - 1) * dim_k + static_cast<int>(marking.point_count()) * (n * n - n);
}

struct AdmissibilityReport
{
  int level = 0;
  bool integral = false;     // k alpha_i integral for all i
  bool root_lattice = false; // k sum_i alpha_i in the root lattice
  bool regular = false;      // every alpha_i regular
  std::vector<std::string> reasons;

  bool admissible() const noexcept { return integral && root_lattice && regular; }
};

inline AdmissibilityReport admissibility(SurfaceMarking const &marking, int k)
{
  AdmissibilityReport r;
  r.level = k;
  int const n = marking.rank_parameter();

  r.integral = true;
  Coweight sum = Coweight::zero(n);
  for (std::size_t i = 0; i < marking.point_count(); ++i)
  {
    auto scaled = Rational(k) * marking.point(i).alpha;
    sum = sum + scaled;
    if (!is_integral(scaled))
    {
      r.integral = false;
      r.reasons.push_back("k*alpha_" + std::to_string(i) + " = " + to_string(scaled) + " is not integral");
    }
  }

  if (!is_integral(sum))
  {
    r.root_lattice = false;
    r.reasons.push_back("k*sum(alpha) = " + to_string(sum) + " is not integral");
  }
  else
  {
    r.root_lattice = in_root_lattice(to_weight(sum));
    if (!r.root_lattice)
      r.reasons.push_back("k*sum(alpha) = " + to_string(sum) + " is not in the root lattice of sl(" +
                          std::to_string(n) + ")");
  }

  r.regular = true;
  for (std::size_t i = 0; i < marking.point_count(); ++i)
    if (!marking.point(i).alpha.is_regular_alcove_point())
    {
      r.regular = false;
      r.reasons.push_back("alpha_" + std::to_string(i) + " = " + to_string(marking.point(i).alpha) +
                          " is not regular");
    }
  return r;
}

} // namespace wrt
