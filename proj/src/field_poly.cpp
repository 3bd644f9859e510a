#include "replisim/field_poly.hpp"

#include <stdexcept>
#include <string>

#include "replisim/rng.hpp"

namespace replisim {

bool is_prime(std::uint64_t q) {
  if (q < 2) return false;
  if (q % 2 == 0) return q == 2;
  for (std::uint64_t d = 3; d * d <= q; d += 2) {
    if (q % d == 0) return false;
  }
  return true;
}

FieldElement pow_mod(FieldElement base, std::uint64_t exp, std::uint64_t q) {
  FieldElement acc = 1 % q;
  base %= q;
  while (exp > 0) {
    if (exp & 1) acc = mul_mod(acc, base, q);
    base = mul_mod(base, base, q);
    exp >>= 1;
  }
  return acc;
}

FieldElement inv_mod(FieldElement a, std::uint64_t q) {
  if (a % q == 0) throw std::domain_error("inv_mod: zero has no inverse");
  return pow_mod(a, q - 2, q);  // Fermat, q prime
}

static void check_modulus(std::uint64_t q) {
  if (q < 3 || !is_prime(q))
    throw std::invalid_argument("modulus must be a prime >= 3, got " +
                                std::to_string(q));
  if (q >= kMaxModulus)
    throw std::invalid_argument("modulus must be below 2^31");
}

UnivariatePoly::UnivariatePoly(std::uint64_t modulus_q,
                               std::vector<FieldElement> coeffs)
    : q_(modulus_q), coeffs_(std::move(coeffs)) {
  check_modulus(q_);
  if (coeffs_.empty())
    throw std::invalid_argument("univariate polynomial needs >= 1 coefficient");
  for (FieldElement& c : coeffs_) c %= q_;
}

FieldElement UnivariatePoly::eval(FieldElement y) const {
  y %= q_;
  FieldElement acc = 0;
  for (std::size_t k = coeffs_.size(); k-- > 0;) {
    acc = add_mod(mul_mod(acc, y, q_), coeffs_[k], q_);
  }
  return acc;
}

SymmetricBivariatePoly::SymmetricBivariatePoly(
    std::uint64_t degree_t, std::uint64_t modulus_q,
    std::vector<FieldElement> coeffs_row_major)
    : t_(degree_t), q_(modulus_q), coeffs_(std::move(coeffs_row_major)) {
  check_modulus(q_);
  const std::size_t side = t_ + 1;
  if (coeffs_.size() != side * side)
    throw std::invalid_argument("coefficient matrix must be (t+1)x(t+1)");
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) {
      FieldElement c = coeffs_[i * side + j];
      if (c < 1 || c > q_ - 1)
        throw std::invalid_argument("coefficients must lie in [1, Q-1]");
      if (coeffs_[j * side + i] != c)
        throw std::invalid_argument("coefficient matrix must be symmetric");
    }
  }
}

SymmetricBivariatePoly SymmetricBivariatePoly::random(std::uint64_t degree_t,
                                                      std::uint64_t modulus_q,
                                                      std::uint64_t seed) {
  check_modulus(modulus_q);
  const std::size_t side = degree_t + 1;
  std::vector<FieldElement> c(side * side, 0);
  SplitMix64 rng(seed);
  // Draw the upper triangle (i <= j) row-major, mirror for symmetry.
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = i; j < side; ++j) {
      FieldElement v = rng.range(1, modulus_q - 1);
      c[i * side + j] = v;
      c[j * side + i] = v;
    }
  }
  return SymmetricBivariatePoly(degree_t, modulus_q, std::move(c));
}

FieldElement SymmetricBivariatePoly::eval(FieldElement x,
                                          FieldElement y) const {
  x %= q_;
  y %= q_;
  const std::size_t side = t_ + 1;
  FieldElement acc = 0;
  for (std::size_t i = side; i-- > 0;) {
    // Row polynomial in y, then Horner step in x.
    FieldElement row = 0;
    for (std::size_t j = side; j-- > 0;) {
      row = add_mod(mul_mod(row, y, q_), coeffs_[i * side + j], q_);
    }
    acc = add_mod(mul_mod(acc, x, q_), row, q_);
  }
  return acc;
}

UnivariatePoly SymmetricBivariatePoly::restrict_x(FieldElement x0) const {
  x0 %= q_;
  const std::size_t side = t_ + 1;
  std::vector<FieldElement> g(side, 0);
  // Coefficient k of g is sum_i a_ik x0^i.
  FieldElement xp = 1;
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t k = 0; k < side; ++k) {
      g[k] = add_mod(g[k], mul_mod(coeffs_[i * side + k], xp, q_), q_);
    }
    xp = mul_mod(xp, x0, q_);
  }
  return UnivariatePoly(q_, std::move(g));
}

UnivariatePoly interpolate(
    const std::vector<std::pair<FieldElement, FieldElement>>& points,
    std::uint64_t modulus_q) {
  check_modulus(modulus_q);
  const std::uint64_t q = modulus_q;
  const std::size_t m = points.size();
  if (m == 0) throw std::invalid_argument("interpolate: no points");
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (points[i].first % q == points[j].first % q)
        throw std::invalid_argument("interpolate: duplicate x-coordinates");
    }
  }

  std::vector<FieldElement> result(m, 0);
  std::vector<FieldElement> basis;  // coefficients of prod (X - x_j) factors
  for (std::size_t i = 0; i < m; ++i) {
    const FieldElement xi = points[i].first % q;
    // L_i(X) = prod_{j != i} (X - x_j) / (x_i - x_j)
    basis.assign(1, 1);
    FieldElement denom = 1;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const FieldElement xj = points[j].first % q;
      basis.push_back(0);
      for (std::size_t k = basis.size() - 1; k > 0; --k) {
        basis[k] = sub_mod(basis[k - 1], mul_mod(basis[k], xj, q), q);
      }
      basis[0] = sub_mod(0, mul_mod(basis[0], xj, q), q);
      denom = mul_mod(denom, sub_mod(xi, xj, q), q);
    }
    const FieldElement scale =
        mul_mod(points[i].second % q, inv_mod(denom, q), q);
    for (std::size_t k = 0; k < basis.size(); ++k) {
      result[k] = add_mod(result[k], mul_mod(basis[k], scale, q), q);
    }
  }
  return UnivariatePoly(q, std::move(result));
}

}  // namespace replisim
