#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gpo/monomial.hpp"

namespace gpo {

/// Sparse real polynomial in a fixed number of variables. Terms iterate in
/// graded lex order and zero coefficients are never stored.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, double, GrlexLess>;

  Polynomial() = default;
  explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

  static Polynomial constant(std::size_t nvars, double value);
  static Polynomial variable(std::size_t nvars, std::size_t index);
  static Polynomial term(const Monomial& m, double coefficient);

  std::size_t nvars() const noexcept { return nvars_; }
  const TermMap& terms() const noexcept { return terms_; }
  std::size_t term_count() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }
  bool is_constant() const;

  /// Maximum total degree over stored terms; 0 for the zero polynomial.
  int degree() const;
  double coefficient(const Monomial& m) const;
  double constant_term() const;
  /// Largest absolute coefficient (0 for the zero polynomial).
  double max_abs_coefficient() const;

  /// Adds c * x^m, pruning the term if it cancels to exactly zero.
  void add_term(const Monomial& m, double c);

  double evaluate(std::span<const double> x) const;

  /// Partial derivative with respect to variable `index`.
  Polynomial derivative(std::size_t index) const;

  /// p(shift + scale .* z) as a polynomial in z.
  Polynomial substitute_affine(std::span<const double> shift,
                               std::span<const double> scale) const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double c);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double c) { return a *= c; }
  friend Polynomial operator*(double c, Polynomial a) { return a *= c; }
  friend Polynomial operator-(Polynomial a) { return a *= -1.0; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  bool operator==(const Polynomial& other) const = default;

 private:
  void require_same_nvars(const Polynomial& other, const char* op) const;

  std::size_t nvars_ = 0;
  TermMap terms_;
};

Polynomial poly_add(const Polynomial& p, const Polynomial& q);
Polynomial poly_mul(const Polynomial& p, const Polynomial& q);
Polynomial poly_scale(const Polynomial& p, double c);
double poly_eval(const Polynomial& p, std::span<const double> x);

/// Integer power p^e, e >= 0.
Polynomial poly_pow(const Polynomial& p, int exponent);

/// Renders p in the problem-file expression syntax, coefficients printed with
/// 17 significant digits. Falls back to x1..xn when `names` is empty.
std::string to_string(const Polynomial& p,
                      std::span<const std::string> names = {});

}  // namespace gpo
