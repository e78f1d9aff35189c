#pragma once

// Chern-Simons values for product connections and Dehn twists around marked
// points, with the corresponding exact twist phases.

#include <complex>
#include <string>
#include <vector>

#include "errors.hpp"
#include "lie_data.hpp"
#include "mapping_class.hpp"
#include "modular.hpp"
#include "rational.hpp"
#include "surfaces.hpp"

namespace wrt
{

enum class CsProvenance
{
  product_connection,
  dehn_twist,
  external
};

inline std::string to_string(CsProvenance p)
{
  switch (p)
  {
  case CsProvenance::product_connection:
    return "product-connection";
  case CsProvenance::dehn_twist:
    return "dehn-twist";
  default:
    return "external";
  }
}

struct CsValue
{
  Rational q; // in [0, 1)
  CsProvenance provenance = CsProvenance::product_connection;
};

// e with exp(-pi i k m <alpha, alpha>) = exp(2 pi i e), reduced to [0, 1).
inline Rational dehn_twist_exponent(Coweight const &alpha, int k, int m)
{
  if (!is_integral(Rational(k) * alpha))
    throw AdmissibilityError("k * alpha = " + to_string(Rational(k) * alpha) + " is not integral at level " +
                             std::to_string(k));
  return frac(-Rational(k) * Rational(m) * inner_product(alpha, alpha) / Rational(2));
}

template<typename Real = double>
std::complex<Real> dehn_twist_phase(Coweight const &alpha, int k, int m)
{
  return root_of_unity<Real>(dehn_twist_exponent(alpha, k, m));
}

// Exponent of the combined twist phase under either convention.
inline Rational twist_exponent(PhaseConvention convention, SurfaceMarking const &marking,
                               MappingClassSpec const &mc, int k)
{
  if (mc.kind() == MappingClassSpec::Kind::identity)
    return Rational(0);
  auto m = mc.multiplicities(marking.point_count());
  Rational e(0);
  for (std::size_t i = 0; i < m.size(); ++i)
  {
    if (m[i] == 0)
      continue;
    auto const &alpha = marking.point(i).alpha;
    if (convention == PhaseConvention::cs)
      e += dehn_twist_exponent(alpha, k, m[i]);
    else
    {
      auto scaled = Rational(k) * alpha;
      if (!is_integral(scaled))
        throw AdmissibilityError("k * alpha = " + to_string(scaled) + " is not integral at level " +
                                 std::to_string(k));
      e += Rational(m[i]) * t_exponent(marking.rank_parameter(), k, to_weight(scaled));
    }
  }
  return frac(e);
}

inline CsValue cs_value(MappingClassSpec const &mc, std::vector<Coweight> const &alphas)
{
  if (mc.kind() == MappingClassSpec::Kind::identity)
    return {Rational(0), CsProvenance::product_connection};
  auto m = mc.multiplicities(alphas.size());
  Rational q(0);
  for (std::size_t i = 0; i < m.size(); ++i)
    q -= Rational(m[i]) * inner_product(alphas[i], alphas[i]) / Rational(2);
  return {frac(q), CsProvenance::dehn_twist};
}

inline CsValue cs_value(MappingClassSpec const &mc, SurfaceMarking const &marking)
{
  std::vector<Coweight> alphas;
  for (auto const &p : marking.points())
    alphas.push_back(p.alpha);
  return cs_value(mc, alphas);
}

} // namespace wrt
