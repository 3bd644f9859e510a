#pragma once
#include <cstdint>
#include <utility>
#include <vector>

namespace replisim {

// Residues mod a prime Q. Values are kept reduced; Q stays below 2^31 so
// products of two residues fit a 64-bit intermediate.
using FieldElement = std::uint64_t;

constexpr std::uint64_t kMaxModulus = 1ULL << 31;

bool is_prime(std::uint64_t q);

inline FieldElement add_mod(FieldElement a, FieldElement b, std::uint64_t q) {
  return (a + b) % q;
}
inline FieldElement sub_mod(FieldElement a, FieldElement b, std::uint64_t q) {
  return (a + q - b % q) % q;
}
inline FieldElement mul_mod(FieldElement a, FieldElement b, std::uint64_t q) {
  return (a * b) % q;
}
FieldElement pow_mod(FieldElement base, std::uint64_t exp, std::uint64_t q);
FieldElement inv_mod(FieldElement a, std::uint64_t q);

// Univariate polynomial over Z_Q, constant term first.
class UnivariatePoly {
 public:
  UnivariatePoly(std::uint64_t modulus_q, std::vector<FieldElement> coeffs);

  FieldElement eval(FieldElement y) const;  // Horner mod Q

  std::uint64_t modulus() const { return q_; }
  const std::vector<FieldElement>& coeffs() const { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }

  bool operator==(const UnivariatePoly&) const = default;

 private:
  std::uint64_t q_;
  std::vector<FieldElement> coeffs_;
};

// Symmetric bivariate polynomial P(x,y) = sum a_ij x^i y^j mod Q with
// a_ij = a_ji and every coefficient in [1, Q-1].
class SymmetricBivariatePoly {
 public:
  SymmetricBivariatePoly(std::uint64_t degree_t, std::uint64_t modulus_q,
                         std::vector<FieldElement> coeffs_row_major);

  // Fresh master polynomial: upper-triangle coefficients drawn uniformly
  // from [1, Q-1] with the seeded generator, mirrored to the lower triangle.
  // Pure function of (degree_t, modulus_q, seed).
  static SymmetricBivariatePoly random(std::uint64_t degree_t,
                                       std::uint64_t modulus_q,
                                       std::uint64_t seed);

  FieldElement eval(FieldElement x, FieldElement y) const;  // nested Horner
  UnivariatePoly restrict_x(FieldElement x0) const;

  std::uint64_t degree() const { return t_; }
  std::uint64_t modulus() const { return q_; }
  FieldElement coeff(std::size_t i, std::size_t j) const {
    return coeffs_[i * (t_ + 1) + j];
  }

  bool operator==(const SymmetricBivariatePoly&) const = default;

 private:
  std::uint64_t t_;
  std::uint64_t q_;
  std::vector<FieldElement> coeffs_;  // (t+1)x(t+1) row-major
};

// Lagrange interpolation through the given points; result has one
// coefficient per point (leading coefficients may be zero). Throws on an
// empty set or duplicate x-coordinates.
UnivariatePoly interpolate(
    const std::vector<std::pair<FieldElement, FieldElement>>& points,
    std::uint64_t modulus_q);

}  // namespace replisim
