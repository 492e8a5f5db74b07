#include "gpo/monomial.hpp"

#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gpo/errors.hpp"

namespace gpo {

Monomial::Monomial(std::vector<int> exponents) : exps_(std::move(exponents)) {
  for (int e : exps_) {
    if (e < 0) throw InvalidInput("monomial exponent must be nonnegative");
    degree_ += e;
  }
}

Monomial Monomial::constant(std::size_t nvars) {
  return Monomial(std::vector<int>(nvars, 0));
}

Monomial Monomial::variable(std::size_t nvars, std::size_t index, int power) {
  if (index >= nvars) throw InvalidInput("variable index out of range");
  std::vector<int> e(nvars, 0);
  e[index] = power;
  return Monomial(std::move(e));
}

Monomial Monomial::operator*(const Monomial& other) const {
  if (other.nvars() != nvars()) {
    throw InvalidInput("monomial length mismatch in product");
  }
  Monomial out = *this;
  for (std::size_t i = 0; i < exps_.size(); ++i) out.exps_[i] += other.exps_[i];
  out.degree_ += other.degree_;
  return out;
}

std::strong_ordering grlex_compare(const Monomial& a, const Monomial& b) {
  if (a.nvars() != b.nvars()) {
    throw InvalidInput("grlex_compare: monomials of length " +
                       std::to_string(a.nvars()) + " and " +
                       std::to_string(b.nvars()));
  }
  if (a.degree() != b.degree()) return a.degree() <=> b.degree();
  for (std::size_t i = 0; i < a.nvars(); ++i) {
    // Larger exponent on an earlier variable sorts first.
    if (a[i] != b[i]) return b[i] <=> a[i];
  }
  return std::strong_ordering::equal;
}

std::size_t basis_size(std::size_t nvars, int degree) {
  if (nvars == 0) throw InvalidInput("basis_size: nvars must be >= 1");
  if (degree < 0) throw InvalidInput("basis_size: degree must be >= 0");
  // C(d+n, d) = prod_{i=1..d} (n+i)/i, exact at every step.
  unsigned __int128 acc = 1;
  const auto limit =
      static_cast<unsigned __int128>(std::numeric_limits<std::size_t>::max());
  for (int i = 1; i <= degree; ++i) {
    acc = acc * (nvars + static_cast<unsigned>(i));
    acc /= static_cast<unsigned>(i);
    if (acc > limit) {
      throw std::overflow_error("basis_size: C(" + std::to_string(degree) +
                                "+" + std::to_string(nvars) + ", " +
                                std::to_string(degree) +
                                ") overflows size_t");
    }
  }
  return static_cast<std::size_t>(acc);
}

namespace {

// Appends all exponent vectors of total degree `remaining` over variables
// [pos, n), first variable taking the largest exponent first.
void enumerate_degree(std::vector<int>& scratch, std::size_t pos, int remaining,
                      std::vector<Monomial>& out) {
  if (pos + 1 == scratch.size()) {
    scratch[pos] = remaining;
    out.emplace_back(scratch);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    scratch[pos] = e;
    enumerate_degree(scratch, pos + 1, remaining - e, out);
  }
  scratch[pos] = 0;
}

}  // namespace

MonomialBasis::MonomialBasis(std::size_t nvars, int degree)
    : nvars_(nvars), degree_(degree) {
  const std::size_t count = basis_size(nvars, degree);
  monomials_.reserve(count);
  std::vector<int> scratch(nvars, 0);
  for (int t = 0; t <= degree; ++t) enumerate_degree(scratch, 0, t, monomials_);
  for (std::size_t i = 0; i < monomials_.size(); ++i) index_.emplace(monomials_[i], i);
}

std::optional<std::size_t> MonomialBasis::index_of(const Monomial& m) const {
  if (m.nvars() != nvars_) return std::nullopt;
  auto it = index_.find(m);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

MonomialBasis monomial_basis(std::size_t nvars, int degree) {
  return MonomialBasis(nvars, degree);
}

}  // namespace gpo
