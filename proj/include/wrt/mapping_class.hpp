#pragma once

// Supported mapping classes: the identity and words in Dehn twists around
// marked points.

#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"
#include "surfaces.hpp"

namespace wrt
{

enum class PhaseConvention
{
  cs,  // exp(-pi i k m <alpha, alpha>)
  cft, // T_{lambda lambda}^m with lambda = k alpha
};

inline std::string to_string(PhaseConvention c) { return c == PhaseConvention::cs ? "cs" : "cft"; }

inline PhaseConvention parse_convention(std::string const &s)
{
  if (s == "cs")
    return PhaseConvention::cs;
  if (s == "cft")
    return PhaseConvention::cft;
  throw ParseError("unknown phase convention '" + s + "' (expected cs or cft)");
}

struct TwistFactor
{
  std::size_t point = 0; // marked-point index
  int multiplicity = 1;
};

class MappingClassSpec
{
public:
  enum class Kind
  {
    identity,
    dehn_twist_word
  };

  static MappingClassSpec identity() { return MappingClassSpec(Kind::identity, {}); }
  static MappingClassSpec dehn_twists(std::vector<TwistFactor> twists)
  {
    return MappingClassSpec(Kind::dehn_twist_word, std::move(twists));
  }

  Kind kind() const noexcept { return kind_; }
  std::vector<TwistFactor> const &twists() const noexcept { return twists_; }

  // Per-marked-point total multiplicity.
  std::vector<int> multiplicities(std::size_t point_count) const
  {
    std::vector<int> m(point_count, 0);
    for (auto const &t : twists_)
    {
      if (t.point >= point_count)
        throw DomainError("Dehn twist refers to marked point " + std::to_string(t.point) + " but the surface has " +
                          std::to_string(point_count));
      m[t.point] += t.multiplicity;
    }
    return m;
  }

  void validate(SurfaceMarking const &marking) const { (void)multiplicities(marking.point_count()); }

  // Unit-modulus constant per level standing in for the framing factor; 1
  // unless set.
  void set_normalization(int k, std::complex<double> value)
  {
    if (std::abs(std::abs(value) - 1.0) > 1e-12)
      throw DomainError("normalization at level " + std::to_string(k) + " is not of unit modulus");
    normalization_[k] = value;
  }
  std::complex<double> normalization(int k) const
  {
    auto it = normalization_.find(k);
    return it == normalization_.end() ? std::complex<double>(1.0) : it->second;
  }
  bool unit_normalization() const noexcept { return normalization_.empty(); }
  std::map<int, std::complex<double>> const &normalization_table() const noexcept { return normalization_; }

  std::string describe() const
  {
    if (kind_ == Kind::identity)
      return "identity";
    std::string s = "dehn-twist-word[";
    for (std::size_t i = 0; i < twists_.size(); ++i)
      s += (i ? ", " : "") + std::string("T") + std::to_string(twists_[i].point + 1) + "^" +
           std::to_string(twists_[i].multiplicity);
    return s + "]";
  }

private:
  MappingClassSpec(Kind kind, std::vector<TwistFactor> twists) : kind_(kind), twists_(std::move(twists)) {}

  Kind kind_;
  std::vector<TwistFactor> twists_;
  std::map<int, std::complex<double>> normalization_;
};

} // namespace wrt
