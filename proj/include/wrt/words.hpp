#pragma once

// Words in the generators A_1..A_g, B_1..B_g, a_1..a_n (and eta for mapping
// tori) of the punctured-surface group.

#include <cctype>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace wrt
{

struct Letter
{
  int generator = 0;
  bool inverse = false;

  friend bool operator==(Letter const &, Letter const &) = default;
};

using Word = std::vector<Letter>;

inline Word inverse(Word const &w)
{
  Word out;
  out.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it)
    out.push_back({it->generator, !it->inverse});
  return out;
}

inline Word concat(Word a, Word const &b)
{
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Generator layout: A_1..A_g -> 0..g-1, B_1..B_g -> g..2g-1,
// a_1..a_n -> 2g..2g+n-1, eta -> 2g+n when present.
class GeneratorSet
{
public:
  GeneratorSet(int genus, int punctures, bool with_eta = false)
      : genus_(genus), punctures_(punctures), with_eta_(with_eta)
  {}

  int genus() const noexcept { return genus_; }
  int punctures() const noexcept { return punctures_; }
  bool has_eta() const noexcept { return with_eta_; }
  int surface_count() const noexcept { return 2 * genus_ + punctures_; }
  int size() const noexcept { return surface_count() + (with_eta_ ? 1 : 0); }

  int a_index(int i) const { return i; }                         // A_{i+1}
  int b_index(int i) const { return genus_ + i; }                // B_{i+1}
  int puncture_index(int j) const { return 2 * genus_ + j; }     // a_{j+1}
  int eta_index() const
  {
    if (!with_eta_)
      throw WordError("generator set has no eta");
    return surface_count();
  }

  std::string name(int index) const
  {
    if (index < 0 || index >= size())
      throw WordError("generator index " + std::to_string(index) + " out of range");
    if (index < genus_)
      return "A" + std::to_string(index + 1);
    if (index < 2 * genus_)
      return "B" + std::to_string(index - genus_ + 1);
    if (index < surface_count())
      return "a" + std::to_string(index - 2 * genus_ + 1);
    return "eta";
  }

  int index_of(std::string_view symbol) const
  {
    if (symbol == "eta")
      return eta_index();
    if (symbol.size() >= 2 && (symbol[0] == 'A' || symbol[0] == 'B' || symbol[0] == 'a'))
    {
      int idx = 0;
      for (char c : symbol.substr(1))
      {
        if (!std::isdigit(static_cast<unsigned char>(c)))
          throw WordError("unknown generator symbol '" + std::string(symbol) + "'");
        idx = idx * 10 + (c - '0');
      }
      if (symbol[0] == 'A' && idx >= 1 && idx <= genus_)
        return a_index(idx - 1);
      if (symbol[0] == 'B' && idx >= 1 && idx <= genus_)
        return b_index(idx - 1);
      if (symbol[0] == 'a' && idx >= 1 && idx <= punctures_)
        return puncture_index(idx - 1);
    }
    throw WordError("unknown generator symbol '" + std::string(symbol) + "'");
  }

  // Whitespace-separated tokens "X" or "X^p" with p a nonzero integer;
  // "1" or an empty string is the identity.
  Word parse(std::string_view text) const
  {
    Word out;
    std::istringstream in{std::string(text)};
    std::string token;
    while (in >> token)
    {
      if (token == "1")
        continue;
      int power = 1;
      auto caret = token.find('^');
      std::string symbol = token.substr(0, caret);
      if (caret != std::string::npos)
      {
        std::string exponent = token.substr(caret + 1);
        if (!exponent.empty() && exponent.front() == '{' && exponent.back() == '}')
          exponent = exponent.substr(1, exponent.size() - 2);
        try
        {
          std::size_t used = 0;
          power = std::stoi(exponent, &used);
          if (used != exponent.size())
            throw WordError("");
        }
        catch (std::exception const &)
        {
          throw WordError("malformed exponent in token '" + token + "'");
        }
        if (power == 0)
          throw WordError("zero exponent in token '" + token + "'");
      }
      int g = index_of(symbol);
      for (int p = 0; p < std::abs(power); ++p)
        out.push_back({g, power < 0});
    }
    return out;
  }

  std::string format(Word const &w) const
  {
    if (w.empty())
      return "1";
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i)
    {
      if (i)
        s += ' ';
      s += name(w[i].generator);
      if (w[i].inverse)
        s += "^-1";
    }
    return s;
  }

  // prod_i [A_i, B_i] prod_j a_j, with [A, B] = A B A^-1 B^-1.
  Word surface_relator() const
  {
    Word w;
    for (int i = 0; i < genus_; ++i)
    {
      w.push_back({a_index(i), false});
      w.push_back({b_index(i), false});
      w.push_back({a_index(i), true});
      w.push_back({b_index(i), true});
    }
    for (int j = 0; j < punctures_; ++j)
      w.push_back({puncture_index(j), false});
    return w;
  }

private:
  int genus_;
  int punctures_;
  bool with_eta_;
};

} // namespace wrt
