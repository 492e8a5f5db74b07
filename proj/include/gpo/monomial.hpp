#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <vector>

namespace gpo {

/// Exponent vector alpha of the monomial x^alpha = prod_i x_i^alpha_i.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::vector<int> exponents);

  static Monomial constant(std::size_t nvars);
  static Monomial variable(std::size_t nvars, std::size_t index, int power = 1);

  std::size_t nvars() const noexcept { return exps_.size(); }
  int degree() const noexcept { return degree_; }
  int operator[](std::size_t i) const { return exps_[i]; }
  const std::vector<int>& exponents() const noexcept { return exps_; }

  /// Product x^alpha * x^beta.
  Monomial operator*(const Monomial& other) const;

  bool operator==(const Monomial& other) const = default;

 private:
  std::vector<int> exps_;
  int degree_ = 0;
};

/// Graded lexicographic comparison: total degree first, then the larger
/// exponent on the earliest differing variable comes first, so for n = 2 the
/// order reads 1, x1, x2, x1^2, x1*x2, x2^2.
std::strong_ordering grlex_compare(const Monomial& a, const Monomial& b);

struct GrlexLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    return grlex_compare(a, b) < 0;
  }
};

/// Lambda(d) = C(d + n, d); throws std::overflow_error if it does not fit.
std::size_t basis_size(std::size_t nvars, int degree);

/// The vector Z_d(x) of all monomials of degree <= d, in graded lex order.
class MonomialBasis {
 public:
  MonomialBasis() = default;
  MonomialBasis(std::size_t nvars, int degree);

  std::size_t nvars() const noexcept { return nvars_; }
  int degree() const noexcept { return degree_; }
  std::size_t size() const noexcept { return monomials_.size(); }
  const Monomial& operator[](std::size_t i) const { return monomials_[i]; }
  const std::vector<Monomial>& monomials() const noexcept { return monomials_; }

  auto begin() const { return monomials_.begin(); }
  auto end() const { return monomials_.end(); }

  std::optional<std::size_t> index_of(const Monomial& m) const;

 private:
  std::size_t nvars_ = 0;
  int degree_ = 0;
  std::vector<Monomial> monomials_;
  std::map<Monomial, std::size_t, GrlexLess> index_;
};

MonomialBasis monomial_basis(std::size_t nvars, int degree);

}  // namespace gpo
