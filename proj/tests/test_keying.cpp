#include "replisim/keying.hpp"

#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "replisim/rng.hpp"

using namespace replisim;

namespace {
SymmetricBivariatePoly worked_poly() {
  return SymmetricBivariatePoly(1, 7, {2, 3, 3, 5});
}
constexpr std::uint64_t kQ31 = 2147483647ULL;
}  // namespace

TEST_CASE("node_hash") {
  SUBCASE("identity mode reduces the id") {
    CHECK(node_hash(2, 12345, 7, HashMode::kIdentity).value == 2);
    CHECK(node_hash(9, 0, 7, HashMode::kIdentity).value == 2);
  }
  SUBCASE("mix mode is bit-exact against frozen reference values") {
    CHECK(node_hash(0, 0, kQ31).value == 260036878ULL);
    CHECK(node_hash(1, 2, kQ31).value == 129639322ULL);
    CHECK(node_hash(42, 7, 97).value == 14);
  }
  SUBCASE("mix mode matches the straight-line oracle") {
    SplitMix64 rng(77);
    for (int i = 0; i < 2000; ++i) {
      const std::uint64_t id = rng.next();
      const std::uint64_t key = rng.next();
      CHECK(node_hash(id, key, kQ31).value ==
            oracles::reference_node_hash(id, key, kQ31));
    }
  }
  SUBCASE("deterministic and always below Q") {
    SplitMix64 rng(78);
    const std::uint64_t primes[] = {3, 7, 31, 97, kQ31};
    for (int i = 0; i < 2000; ++i) {
      const std::uint64_t id = rng.next(), key = rng.next();
      const std::uint64_t q = primes[rng.below(5)];
      const auto h = node_hash(id, key, q);
      CHECK(h == node_hash(id, key, q));
      CHECK(h.value < q);
    }
  }
}

TEST_CASE("share derivation, worked examples") {
  auto p = worked_poly();
  CHECK(derive_share(p, 2, 0, HashMode::kIdentity).poly.coeffs() ==
        std::vector<FieldElement>{1, 6});
  CHECK(derive_share(p, 3, 0, HashMode::kIdentity).poly.coeffs() ==
        std::vector<FieldElement>{4, 4});
  CHECK(derive_share(p, 0, 0, HashMode::kIdentity).poly.coeffs() ==
        std::vector<FieldElement>{2, 3});
  CHECK(derive_share(p, 2, 0, HashMode::kIdentity, 4).generation_index == 4);
}

TEST_CASE("pairwise keys") {
  auto p = worked_poly();
  auto share2 = derive_share(p, 2, 0, HashMode::kIdentity);
  auto share3 = derive_share(p, 3, 0, HashMode::kIdentity);
  const auto h2 = node_hash(2, 0, 7, HashMode::kIdentity);
  const auto h3 = node_hash(3, 0, 7, HashMode::kIdentity);

  CHECK(pairwise_key(share2, h3) == 5);
  CHECK(pairwise_key(share3, h2) == 5);
  CHECK(pairwise_key(share2, IdentityHash{0}) == 1);  // constant term

  SUBCASE("verify_agreement") {
    CHECK(verify_agreement(share2, h2, share3, h3));
    CHECK(verify_agreement(share2, h2, share2, h2));  // share with itself
    // Shares from two different master polynomials disagree; fixed seeds
    // give an explicit counterexample checked by evaluation.
    auto pa = SymmetricBivariatePoly::random(2, 31, 1001);
    auto pb = SymmetricBivariatePoly::random(2, 31, 1002);
    auto sa = derive_share(pa, 4, 0, HashMode::kIdentity);
    auto sb = derive_share(pb, 9, 0, HashMode::kIdentity);
    const auto h4 = node_hash(4, 0, 31, HashMode::kIdentity);
    const auto h9 = node_hash(9, 0, 31, HashMode::kIdentity);
    CHECK(pairwise_key(sa, h9) != pairwise_key(sb, h4));
    CHECK_FALSE(verify_agreement(sa, h4, sb, h9));
  }
}

TEST_CASE("key agreement property, randomized") {
  const std::uint64_t primes[] = {7, 31, 97, 65537, kQ31};
  SplitMix64 rng(555);
  for (int iter = 0; iter < 10000; ++iter) {
    const std::uint64_t q = primes[rng.below(5)];
    const std::uint64_t t = rng.below(5);
    auto master = SymmetricBivariatePoly::random(t, q, rng.next());
    const NodeId ida = rng.next(), idb = rng.next();
    const NodeKey ka = rng.next(), kb = rng.next();
    const auto ha = node_hash(ida, ka, q);
    const auto hb = node_hash(idb, kb, q);
    auto sa = derive_share(master, ida, ka);
    auto sb = derive_share(master, idb, kb);
    const FieldElement kab = pairwise_key(sa, hb);
    CHECK(kab == pairwise_key(sb, ha));
    CHECK(kab == master.eval(ha.value, hb.value));
  }
}

TEST_CASE("t shares leave a fresh pair's key ambiguous (desk property)") {
  // For each (Q, t) with Q <= 31, t <= 2: brute-force enumeration of all
  // symmetric masters consistent with t compromised shares yields more than
  // one candidate key for a fresh pair.
  struct Case {
    std::uint64_t q, t;
    std::vector<std::uint64_t> points;
    std::uint64_t fresh_a, fresh_b;
  };
  const Case cases[] = {
      {7, 1, {2}, 3, 4},
      {31, 1, {11}, 3, 4},
      {7, 2, {2, 5}, 3, 4},
      {31, 2, {5, 9}, 3, 11},
  };
  for (const Case& c : cases) {
    CAPTURE(c.q);
    CAPTURE(c.t);
    auto master = SymmetricBivariatePoly::random(c.t, c.q, 31337 + c.q + c.t);
    std::vector<oracles::ShareSample> shares;
    for (std::uint64_t x : c.points)
      shares.push_back({x, master.restrict_x(x).coeffs()});
    const auto keys = oracles::collusion_candidate_keys(shares, c.fresh_a,
                                                        c.fresh_b, c.q);
    CHECK(keys.size() > 1);
    // The true key is always among the consistent candidates.
    CHECK(keys.count(master.eval(c.fresh_a, c.fresh_b)) == 1);
  }
}
