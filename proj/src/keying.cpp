#include "replisim/keying.hpp"

#include "replisim/rng.hpp"

namespace replisim {

IdentityHash node_hash(NodeId id, NodeKey key, std::uint64_t modulus_q,
                       HashMode mode) {
  if (mode == HashMode::kIdentity) {
    return IdentityHash{id % modulus_q};
  }
  // Absorb the id, then fold in the key; wrapping 64-bit arithmetic.
  const std::uint64_t h = mix64(mix64(id + 0x9E3779B97F4A7C15ULL) ^ key);
  return IdentityHash{h % modulus_q};
}

KeyShare derive_share(const SymmetricBivariatePoly& master, NodeId id,
                      NodeKey key, HashMode mode,
                      std::uint64_t generation_index) {
  const IdentityHash h = node_hash(id, key, master.modulus(), mode);
  return KeyShare{id, master.restrict_x(h.value), generation_index};
}

FieldElement pairwise_key(const KeyShare& share, IdentityHash peer_hash) {
  return share.poly.eval(peer_hash.value);
}

bool verify_agreement(const KeyShare& share_a, IdentityHash hash_a,
                      const KeyShare& share_b, IdentityHash hash_b) {
  return pairwise_key(share_a, hash_b) == pairwise_key(share_b, hash_a);
}

}  // namespace replisim
