#pragma once

// Exact root-system and weight arithmetic for su(N).
//
// Weights are stored by their Dynkin labels.  The inner product is evaluated
// in traceless orthogonal coordinates, where the Weyl group acts by
// permutations and the normalized form (<theta, theta> = 2) is the Euclidean
// one.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace wrt
{

template<typename Label>
class BasicWeight
{
public:
  using label_type = Label;

  BasicWeight() = default;

  BasicWeight(int n, std::vector<Label> dynkin) : n_(n), dynkin_(std::move(dynkin))
  {
    if (n < 2)
      throw DomainError("su(N) requires N >= 2, got N = " + std::to_string(n));
    if (static_cast<int>(dynkin_.size()) != n - 1)
      throw DimensionError("su(" + std::to_string(n) + ") weight needs " +
                           std::to_string(n - 1) + " Dynkin labels, got " +
                           std::to_string(dynkin_.size()));
  }

  static BasicWeight zero(int n) { return BasicWeight(n, std::vector<Label>(n - 1, Label(0))); }

  // i-th fundamental weight, 1-based.
  static BasicWeight fundamental(int n, int i)
  {
    if (i < 1 || i > n - 1)
      throw DomainError("fundamental weight index out of range");
    auto w = zero(n);
    w.dynkin_[i - 1] = Label(1);
    return w;
  }

  // Inverse of orthogonal_coords(); the coordinates must sum to zero.
  static BasicWeight from_orthogonal(std::vector<Rational> const &coords)
  {
    int n = static_cast<int>(coords.size());
    Rational sum = std::accumulate(coords.begin(), coords.end(), Rational(0));
    if (sum != Rational(0))
      throw DomainError("orthogonal coordinates must be traceless");
    std::vector<Label> labels;
    labels.reserve(n - 1);
    for (int j = 0; j + 1 < n; ++j)
    {
      Rational a = coords[j] - coords[j + 1];
      if constexpr (std::is_same_v<Label, Rational>)
        labels.push_back(a);
      else
      {
        if (!is_integer(a))
          throw DomainError("orthogonal coordinates do not define an integral weight");
        labels.push_back(static_cast<Label>(a.numerator()));
      }
    }
    return BasicWeight(n, std::move(labels));
  }

  int rank_parameter() const noexcept { return n_; }
  std::span<Label const> dynkin_labels() const noexcept { return dynkin_; }
  Label const &operator[](std::size_t i) const { return dynkin_[i]; }

  // l_j = sum_{i >= j} a_i - (1/N) sum_i i a_i, j = 1..N.
  std::vector<Rational> orthogonal_coords() const
  {
    Rational shift(0);
    for (int i = 0; i < n_ - 1; ++i)
      shift += Rational(i + 1) * Rational(dynkin_[i]);
    shift /= Rational(n_);
    std::vector<Rational> coords(n_);
    Rational tail(0);
    for (int j = n_ - 1; j >= 0; --j)
    {
      if (j < n_ - 1)
        tail += Rational(dynkin_[j]);
      coords[j] = tail - shift;
    }
    return coords;
  }

  // <theta, lambda>; for su(N) the sum of the Dynkin labels.
  Rational level() const
  {
    Rational s(0);
    for (auto const &a : dynkin_)
      s += Rational(a);
    return s;
  }

  bool is_dominant() const
  {
    return std::all_of(dynkin_.begin(), dynkin_.end(), [](Label const &a) { return a >= Label(0); });
  }

  // Strictly inside the open alcove: every label positive and level below 1.
  bool is_regular_alcove_point() const
  {
    return std::all_of(dynkin_.begin(), dynkin_.end(), [](Label const &a) { return a > Label(0); }) &&
           level() < Rational(1);
  }

  friend BasicWeight operator+(BasicWeight a, BasicWeight const &b)
  {
    a.check_same(b);
    for (std::size_t i = 0; i < a.dynkin_.size(); ++i)
      a.dynkin_[i] += b.dynkin_[i];
    return a;
  }

  friend BasicWeight operator-(BasicWeight a, BasicWeight const &b)
  {
    a.check_same(b);
    for (std::size_t i = 0; i < a.dynkin_.size(); ++i)
      a.dynkin_[i] -= b.dynkin_[i];
    return a;
  }

  friend BasicWeight operator*(Label const &s, BasicWeight a)
  {
    for (auto &x : a.dynkin_)
      x *= s;
    return a;
  }

  friend bool operator==(BasicWeight const &, BasicWeight const &) = default;

  friend bool operator<(BasicWeight const &a, BasicWeight const &b)
  {
    if (a.n_ != b.n_)
      return a.n_ < b.n_;
    return a.dynkin_ < b.dynkin_;
  }

  void check_same(BasicWeight const &other) const
  {
    if (n_ != other.n_)
      throw DimensionError("weights of su(" + std::to_string(n_) + ") and su(" +
                           std::to_string(other.n_) + ") cannot be combined");
  }

private:
  int n_ = 2;
  std::vector<Label> dynkin_{Label(0)};
};

using Weight = BasicWeight<int>;
using Coweight = BasicWeight<Rational>;

inline Coweight to_coweight(Weight const &w)
{
  std::vector<Rational> labels;
  for (int a : w.dynkin_labels())
    labels.emplace_back(a);
  return Coweight(w.rank_parameter(), std::move(labels));
}

inline bool is_integral(Coweight const &w)
{
  auto labels = w.dynkin_labels();
  return std::all_of(labels.begin(), labels.end(), [](Rational const &a) { return is_integer(a); });
}

inline Weight to_weight(Coweight const &w)
{
  std::vector<int> labels;
  for (auto const &a : w.dynkin_labels())
  {
    if (!is_integer(a))
      throw DomainError("coweight is not integral");
    labels.push_back(static_cast<int>(a.numerator()));
  }
  return Weight(w.rank_parameter(), std::move(labels));
}

inline Rational dot(std::vector<Rational> const &a, std::vector<Rational> const &b)
{
  Rational s(0);
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

// Normalized invariant form, <theta, theta> = 2.
template<typename L1, typename L2>
Rational inner_product(BasicWeight<L1> const &a, BasicWeight<L2> const &b)
{
  if (a.rank_parameter() != b.rank_parameter())
    throw DimensionError("inner product of su(" + std::to_string(a.rank_parameter()) +
                         ") and su(" + std::to_string(b.rank_parameter()) + ") weights");
  return dot(a.orthogonal_coords(), b.orthogonal_coords());
}

inline Weight highest_root(int n)
{
  std::vector<int> labels(n - 1, 0);
  labels.front() += 1;
  labels.back() += 1;
  return Weight(n, labels);
}

inline Weight weyl_vector(int n) { return Weight(n, std::vector<int>(n - 1, 1)); }

inline int dual_coxeter_number(int n) { return n; }

inline int lie_algebra_dimension(int n) { return n * n - 1; }

// Weyl-group action: permute orthogonal coordinates.  perm[j] is the source
// index of coordinate j.
template<typename Label>
Coweight weyl_act(std::vector<int> const &perm, BasicWeight<Label> const &w)
{
  auto coords = w.orthogonal_coords();
  if (perm.size() != coords.size())
    throw DimensionError("permutation size does not match N");
  std::vector<Rational> out(coords.size());
  for (std::size_t j = 0; j < coords.size(); ++j)
    out[j] = coords[perm[j]];
  return Coweight::from_orthogonal(out);
}

// Root lattice of sl(N): sum_i i * a_i = 0 mod N.
inline bool in_root_lattice(Weight const &w)
{
  long long s = 0;
  auto labels = w.dynkin_labels();
  for (std::size_t i = 0; i < labels.size(); ++i)
    s += static_cast<long long>(i + 1) * labels[i];
  return s % w.rank_parameter() == 0;
}

// zeta = k (N^2 - 1) / (k + N).
inline Rational central_charge(int n, int k)
{
  if (n < 2 || k < 1)
    throw DomainError("central charge requires N >= 2 and k >= 1");
  return Rational(static_cast<std::int64_t>(k) * lie_algebra_dimension(n), k + dual_coxeter_number(n));
}

class LabelSet
{
public:
  LabelSet(int n, int k, std::vector<Weight> labels) : n_(n), k_(k), labels_(std::move(labels))
  {
    for (std::size_t i = 0; i < labels_.size(); ++i)
      index_.emplace(std::vector<int>(labels_[i].dynkin_labels().begin(), labels_[i].dynkin_labels().end()), i);
  }

  int rank_parameter() const noexcept { return n_; }
  int level() const noexcept { return k_; }
  std::size_t size() const noexcept { return labels_.size(); }
  Weight const &operator[](std::size_t i) const { return labels_[i]; }
  std::vector<Weight> const &labels() const noexcept { return labels_; }
  auto begin() const { return labels_.begin(); }
  auto end() const { return labels_.end(); }

  bool contains(Weight const &w) const
  {
    return w.rank_parameter() == n_ && index_.count(key(w)) != 0;
  }

  std::size_t index_of(Weight const &w) const
  {
    if (w.rank_parameter() != n_)
      throw DimensionError("label of wrong rank");
    auto it = index_.find(key(w));
    if (it == index_.end())
      throw DomainError("weight is not in the level-" + std::to_string(k_) + " alcove");
    return it->second;
  }

private:
  static std::vector<int> key(Weight const &w)
  {
    return {w.dynkin_labels().begin(), w.dynkin_labels().end()};
  }

  int n_;
  int k_;
  std::vector<Weight> labels_;
  std::map<std::vector<int>, std::size_t> index_;
};

// All dominant integral weights with <theta, lambda> <= k, lexicographic in
// the Dynkin labels.
inline LabelSet label_set(int n, int k)
{
  if (n < 2 || k < 1)
    throw DomainError("label set requires N >= 2 and k >= 1");
  std::vector<Weight> out;
  std::vector<int> current(n - 1, 0);
  auto recurse = [&](auto &&self, int pos, int budget) -> void {
    if (pos == n - 1)
    {
      out.emplace_back(n, current);
      return;
    }
    for (int a = 0; a <= budget; ++a)
    {
      current[pos] = a;
      self(self, pos + 1, budget - a);
    }
    current[pos] = 0;
  };
  recurse(recurse, 0, k);
  return LabelSet(n, k, std::move(out));
}

inline std::string to_string(Weight const &w)
{
  std::string s = "(";
  auto labels = w.dynkin_labels();
  for (std::size_t i = 0; i < labels.size(); ++i)
    s += (i ? "," : "") + std::to_string(labels[i]);
  return s + ")";
}

inline std::string to_string(Coweight const &w)
{
  std::string s = "(";
  auto labels = w.dynkin_labels();
  for (std::size_t i = 0; i < labels.size(); ++i)
    s += (i ? "," : "") + wrt::to_string(labels[i]);
  return s + ")";
}

} // namespace wrt
