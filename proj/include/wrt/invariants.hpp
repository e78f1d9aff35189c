#pragma once

// Quantum invariants of mapping tori of marked surfaces for the identity and
// Dehn-twist words, and level sweeps k = s k0 of them.

#include <complex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cs_values.hpp"
#include "errors.hpp"
#include "mapping_class.hpp"
#include "modular.hpp"
#include "surfaces.hpp"

namespace wrt
{

using Complex = std::complex<long double>;

struct InvariantEntry
{
  int k = 0;
  int s = 0;
  Complex value;
  long long block_dimension = 0; // identity-class value at this level
  Rational phase_exponent;       // value = normalization * block_dimension * exp(2 pi i phase_exponent)
  std::complex<double> normalization{1.0, 0.0};
};

namespace detail
{

inline void require_admissible(SurfaceMarking const &marking, int k)
{
  auto r = admissibility(marking, k);
  if (!r.admissible())
  {
    std::string why;
    for (auto const &reason : r.reasons)
      why += (why.empty() ? "" : "; ") + reason;
    throw AdmissibilityError("level " + std::to_string(k) + " is not admissible: " + why);
  }
}

} // namespace detail

template<typename Real = long double>
InvariantEntry wrt_invariant_entry(SurfaceMarking const &marking, MappingClassSpec const &mc, int k,
                                   PhaseConvention convention = PhaseConvention::cs)
{
  mc.validate(marking);
  detail::require_admissible(marking, k);
  auto labels = marking.labels_at(k);
  InvariantEntry e;
  e.k = k;
  e.block_dimension = verlinde_dimension<Real>(marking.genus(), labels, marking.rank_parameter(), k);
  e.phase_exponent = twist_exponent(convention, marking, mc, k);
  e.normalization = mc.normalization(k);
  auto phase = root_of_unity<long double>(e.phase_exponent);
  e.value = Complex(e.normalization) * phase * static_cast<long double>(e.block_dimension);
  return e;
}

template<typename Real = long double>
Complex wrt_invariant(SurfaceMarking const &marking, MappingClassSpec const &mc, int k,
                      PhaseConvention convention = PhaseConvention::cs)
{
  return wrt_invariant_entry<Real>(marking, mc, k, convention).value;
}

struct SkippedLevel
{
  int k = 0;
  AdmissibilityReport report;
};

class InvariantSequence
{
public:
  InvariantSequence(SurfaceMarking marking, MappingClassSpec mc, int k0, int s_max, PhaseConvention convention)
      : marking_(std::move(marking)), mc_(std::move(mc)), k0_(k0), s_max_(s_max), convention_(convention)
  {}

  SurfaceMarking const &marking() const noexcept { return marking_; }
  MappingClassSpec const &mapping_class() const noexcept { return mc_; }
  int k0() const noexcept { return k0_; }
  int s_max() const noexcept { return s_max_; }
  PhaseConvention convention() const noexcept { return convention_; }
  std::vector<InvariantEntry> const &entries() const noexcept { return entries_; }
  std::vector<SkippedLevel> const &skipped() const noexcept { return skipped_; }
  std::size_t size() const noexcept { return entries_.size(); }

  std::vector<int> levels() const
  {
    std::vector<int> out;
    for (auto const &e : entries_)
      out.push_back(e.k);
    return out;
  }
  std::vector<Complex> values() const
  {
    std::vector<Complex> out;
    for (auto const &e : entries_)
      out.push_back(e.value);
    return out;
  }

  void add(InvariantEntry e) { entries_.push_back(std::move(e)); }
  void skip(SkippedLevel s) { skipped_.push_back(std::move(s)); }

private:
  SurfaceMarking marking_;
  MappingClassSpec mc_;
  int k0_;
  int s_max_;
  PhaseConvention convention_;
  std::vector<InvariantEntry> entries_;
  std::vector<SkippedLevel> skipped_;
};

template<typename Real = long double>
InvariantSequence invariant_sequence(SurfaceMarking const &marking, MappingClassSpec const &mc, int k0, int s_max,
                                     PhaseConvention convention = PhaseConvention::cs)
{
  if (k0 < 1)
    throw DomainError("k0 must be positive");
  if (s_max < 1)
    throw DomainError("s_max must be positive");
  mc.validate(marking);
  InvariantSequence seq(marking, mc, k0, s_max, convention);
  for (int s = 1; s <= s_max; ++s)
  {
    int const k = s * k0;
    auto report = admissibility(marking, k);
    if (!report.admissible())
    {
      seq.skip({k, report});
      continue;
    }
    auto e = wrt_invariant_entry<Real>(marking, mc, k, convention);
    e.s = s;
    seq.add(std::move(e));
  }
  if (seq.size() == 0)
    throw EmptySweepError("no admissible level among k = " + std::to_string(k0) + ", ..., " +
                          std::to_string(s_max * k0));
  return seq;
}

// One row per level of the sweep; skipped levels have empty re/im.
inline void write_csv(std::ostream &out, InvariantSequence const &seq)
{
  out << "k,re,im,convention,integral,root_lattice,regular,admissible\n";
  out.precision(21);
  std::size_t ei = 0, si = 0;
  auto flags = [&](AdmissibilityReport const &r) {
    out << ',' << r.integral << ',' << r.root_lattice << ',' << r.regular << ',' << r.admissible() << '\n';
  };
  while (ei < seq.entries().size() || si < seq.skipped().size())
  {
    bool take_entry = si >= seq.skipped().size() ||
                      (ei < seq.entries().size() && seq.entries()[ei].k < seq.skipped()[si].k);
    if (take_entry)
    {
      auto const &e = seq.entries()[ei++];
      out << e.k << ',' << e.value.real() << ',' << e.value.imag() << ',' << to_string(seq.convention());
      flags(admissibility(seq.marking(), e.k));
    }
    else
    {
      auto const &s = seq.skipped()[si++];
      out << s.k << ",,," << to_string(seq.convention());
      flags(s.report);
    }
  }
}

} // namespace wrt
