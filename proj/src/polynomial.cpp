#include "gpo/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gpo/errors.hpp"

namespace gpo {

Polynomial Polynomial::constant(std::size_t nvars, double value) {
  Polynomial p(nvars);
  p.add_term(Monomial::constant(nvars), value);
  return p;
}

Polynomial Polynomial::variable(std::size_t nvars, std::size_t index) {
  Polynomial p(nvars);
  p.add_term(Monomial::variable(nvars, index), 1.0);
  return p;
}

Polynomial Polynomial::term(const Monomial& m, double coefficient) {
  Polynomial p(m.nvars());
  p.add_term(m, coefficient);
  return p;
}

bool Polynomial::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.degree() == 0);
}

int Polynomial::degree() const {
  // Terms are sorted by grlex, so the last key has maximal total degree.
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

double Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::constant_term() const {
  if (terms_.empty()) return 0.0;
  const auto& [m, c] = *terms_.begin();
  return m.degree() == 0 ? c : 0.0;
}

double Polynomial::max_abs_coefficient() const {
  double best = 0.0;
  for (const auto& [m, c] : terms_) best = std::max(best, std::abs(c));
  return best;
}

void Polynomial::add_term(const Monomial& m, double c) {
  if (m.nvars() != nvars_) {
    throw InvalidInput("add_term: monomial has " + std::to_string(m.nvars()) +
                       " variables, polynomial has " + std::to_string(nvars_));
  }
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::evaluate(std::span<const double> x) const {
  if (x.size() != nvars_) {
    throw InvalidInput("poly_eval: point has length " + std::to_string(x.size()) +
                       ", polynomial has " + std::to_string(nvars_) + " variables");
  }
  if (terms_.empty()) return 0.0;
  const int deg = degree();
  // powers[i * (deg + 1) + e] = x_i^e
  std::vector<double> powers(nvars_ * static_cast<std::size_t>(deg + 1));
  for (std::size_t i = 0; i < nvars_; ++i) {
    double* row = powers.data() + i * static_cast<std::size_t>(deg + 1);
    row[0] = 1.0;
    for (int e = 1; e <= deg; ++e) row[e] = row[e - 1] * x[i];
  }
  double sum = 0.0;
  for (const auto& [m, c] : terms_) {
    double v = c;
    for (std::size_t i = 0; i < nvars_; ++i) {
      if (m[i] != 0) v *= powers[i * static_cast<std::size_t>(deg + 1) + m[i]];
    }
    sum += v;
  }
  return sum;
}

Polynomial Polynomial::derivative(std::size_t index) const {
  if (index >= nvars_) throw InvalidInput("derivative: variable index out of range");
  Polynomial out(nvars_);
  for (const auto& [m, c] : terms_) {
    if (m[index] == 0) continue;
    std::vector<int> e = m.exponents();
    const int power = e[index]--;
    out.add_term(Monomial(std::move(e)), c * power);
  }
  return out;
}

Polynomial Polynomial::substitute_affine(std::span<const double> shift,
                                         std::span<const double> scale) const {
  if (shift.size() != nvars_ || scale.size() != nvars_) {
    throw InvalidInput("substitute_affine: length mismatch");
  }
  const int deg = degree();
  // univariate[i][e] = (shift_i + scale_i z_i)^e as a polynomial in z.
  std::vector<std::vector<Polynomial>> univariate(nvars_);
  for (std::size_t i = 0; i < nvars_; ++i) {
    Polynomial lin = Polynomial::constant(nvars_, shift[i]);
    lin.add_term(Monomial::variable(nvars_, i), scale[i]);
    univariate[i].reserve(static_cast<std::size_t>(deg + 1));
    univariate[i].push_back(Polynomial::constant(nvars_, 1.0));
    for (int e = 1; e <= deg; ++e) univariate[i].push_back(univariate[i].back() * lin);
  }
  Polynomial out(nvars_);
  for (const auto& [m, c] : terms_) {
    Polynomial t = Polynomial::constant(nvars_, c);
    for (std::size_t i = 0; i < nvars_; ++i) {
      if (m[i] != 0) t = t * univariate[i][static_cast<std::size_t>(m[i])];
    }
    out += t;
  }
  return out;
}

void Polynomial::require_same_nvars(const Polynomial& other, const char* op) const {
  if (other.nvars_ != nvars_) {
    throw InvalidInput(std::string(op) + ": polynomials in " + std::to_string(nvars_) +
                       " and " + std::to_string(other.nvars_) + " variables");
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  require_same_nvars(other, "poly_add");
  for (const auto& [m, c] : other.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  require_same_nvars(other, "poly_sub");
  for (const auto& [m, c] : other.terms_) add_term(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double c) {
  if (c == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= c;
    if (it->second == 0.0) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  a.require_same_nvars(b, "poly_mul");
  Polynomial out(a.nvars_);
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) out.add_term(ma * mb, ca * cb);
  }
  return out;
}

Polynomial poly_add(const Polynomial& p, const Polynomial& q) { return p + q; }
Polynomial poly_mul(const Polynomial& p, const Polynomial& q) { return p * q; }
Polynomial poly_scale(const Polynomial& p, double c) { return p * c; }
double poly_eval(const Polynomial& p, std::span<const double> x) { return p.evaluate(x); }

Polynomial poly_pow(const Polynomial& p, int exponent) {
  if (exponent < 0) throw InvalidInput("poly_pow: negative exponent");
  Polynomial result = Polynomial::constant(p.nvars(), 1.0);
  Polynomial base = p;
  while (exponent > 0) {
    if (exponent & 1) result = result * base;
    exponent >>= 1;
    if (exponent > 0) base = base * base;
  }
  return result;
}

std::string to_string(const Polynomial& p, std::span<const std::string> names) {
  if (p.is_zero()) return "0";
  auto name_of = [&](std::size_t i) {
    return i < names.size() ? names[i] : "x" + std::to_string(i + 1);
  };
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    double mag = c;
    if (first) {
      if (c < 0) {
        os << "-";
        mag = -c;
      }
    } else {
      os << (c < 0 ? " - " : " + ");
      mag = std::abs(c);
    }
    first = false;
    bool wrote_coef = false;
    if (m.degree() == 0 || mag != 1.0) {
      os << mag;
      wrote_coef = true;
    }
    bool first_factor = true;
    for (std::size_t i = 0; i < m.nvars(); ++i) {
      if (m[i] == 0) continue;
      if (wrote_coef || !first_factor) os << "*";
      os << name_of(i);
      if (m[i] > 1) os << "^" << m[i];
      first_factor = false;
    }
  }
  return os.str();
}

}  // namespace gpo
