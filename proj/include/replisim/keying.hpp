#pragma once
#include <cstdint>

#include "replisim/field_poly.hpp"

namespace replisim {

using NodeId = std::uint64_t;   // clones deliberately reuse a victim's id
using NodeKey = std::uint64_t;  // assigned by the central station

// How a node id and its station key map to a field point.
//   kMix      — production mode, the 64-bit finalizer chain (bit-exact).
//   kIdentity — id mod Q, for hand-checkable worked examples.
enum class HashMode { kMix, kIdentity };

struct IdentityHash {
  FieldElement value = 0;
  bool operator==(const IdentityHash&) const = default;
};

IdentityHash node_hash(NodeId id, NodeKey key, std::uint64_t modulus_q,
                       HashMode mode = HashMode::kMix);

// A node's univariate slice of its generation's master polynomial.
struct KeyShare {
  NodeId owner = 0;
  UnivariatePoly poly;
  std::uint64_t generation_index = 0;
};

KeyShare derive_share(const SymmetricBivariatePoly& master, NodeId id,
                      NodeKey key, HashMode mode = HashMode::kMix,
                      std::uint64_t generation_index = 0);

FieldElement pairwise_key(const KeyShare& share, IdentityHash peer_hash);

bool verify_agreement(const KeyShare& share_a, IdentityHash hash_a,
                      const KeyShare& share_b, IdentityHash hash_b);

}  // namespace replisim
