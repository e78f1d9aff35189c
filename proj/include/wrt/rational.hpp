#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <complex>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

#include "errors.hpp"

namespace wrt
{

using Rational = boost::rational<std::int64_t>;

inline std::int64_t floor(Rational const &r)
{
  auto n = r.numerator();
  auto d = r.denominator(); // always positive
  auto q = n / d;
  if ((n % d != 0) && (n < 0))
    --q;
  return q;
}

// Representative of r modulo 1 in [0, 1).
inline Rational frac(Rational const &r) { return r - Rational(floor(r)); }

inline bool is_integer(Rational const &r) { return r.denominator() == 1; }

inline std::string to_string(Rational const &r)
{
  if (r.denominator() == 1)
    return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// Accepts "p", "p/q" and "-p/q".
inline Rational parse_rational(std::string_view text)
{
  auto fail = [&] {
    return ParseError("malformed rational '" + std::string(text) + "'");
  };
  if (text.empty())
    throw fail();
  auto slash = text.find('/');
  auto to_int = [&](std::string_view s) -> std::int64_t {
    if (s.empty())
      throw fail();
    std::size_t used = 0;
    std::int64_t v = 0;
    try
    {
      v = std::stoll(std::string(s), &used);
    }
    catch (std::exception const &)
    {
      throw fail();
    }
    if (used != s.size())
      throw fail();
    return v;
  };
  if (slash == std::string_view::npos)
    return Rational(to_int(text));
  auto den = to_int(text.substr(slash + 1));
  if (den == 0)
    throw fail();
  return Rational(to_int(text.substr(0, slash)), den);
}

template<typename Real = double>
Real to_real(Rational const &r)
{
  return static_cast<Real>(r.numerator()) / static_cast<Real>(r.denominator());
}

// exp(2 pi i r), with the argument reduced exactly before conversion so the
// result is accurate for large numerators.
template<typename Real = double>
std::complex<Real> root_of_unity(Rational const &r)
{
  Real const angle = 2 * std::numbers::pi_v<Real> * to_real<Real>(frac(r));
  return std::polar(Real(1), angle);
}

// Best rational approximation with denominator at most max_den, by continued
// fractions.  Used only for reporting fitted phases and degrees.
inline Rational approximate_rational(double x, std::int64_t max_den)
{
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double v = x;
  for (int iter = 0; iter < 64; ++iter)
  {
    double a = std::floor(v);
    if (std::abs(a) > 1e15)
      break;
    auto ai = static_cast<std::int64_t>(a);
    std::int64_t p2 = ai * p1 + p0;
    std::int64_t q2 = ai * q1 + q0;
    if (q2 > max_den)
      break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    double rem = v - a;
    if (rem < 1e-15)
      break;
    v = 1.0 / rem;
  }
  if (q1 == 0)
    return Rational(static_cast<std::int64_t>(std::llround(x)));
  return Rational(p1, q1);
}

} // namespace wrt
