#include "replisim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace replisim {

bool ClaimTable::merge(NodeId id, const StoredClaim& claim,
                       const ConflictPolicy& policy) {
  if (id >= present_.size()) {
    present_.resize(id + 1, 0);
    claims_.resize(id + 1);
  }
  if (!present_[id]) {
    present_[id] = 1;
    claims_[id] = claim;
    ++count_;
    return false;
  }
  StoredClaim& held = claims_[id];
  const bool clash = policy.conflicting(held, claim);
  if (claim.tick > held.tick) held = claim;
  return clash;
}

BroadcastRoundResult broadcast_round(const Topology& topo,
                                     const std::vector<BroadcastNode>& states,
                                     Tick tick, std::vector<ClaimTable>& tables,
                                     const ConflictPolicy& policy) {
  if (states.size() != topo.adjacency.size() ||
      tables.size() != topo.adjacency.size())
    throw std::invalid_argument("broadcast_round: state/table size mismatch");

  BroadcastRoundResult result;
  // Each active node refreshes its own entry first, then gossips its table.
  for (std::size_t v = 0; v < states.size(); ++v) {
    if (!states[v].active) continue;
    tables[v].merge(states[v].id, StoredClaim{states[v].position, tick},
                    policy);
  }
  for (std::size_t v = 0; v < states.size(); ++v) {
    if (!states[v].active) continue;
    for (std::uint32_t nb : topo.adjacency[v]) {
      result.messages.push_back(Message{MessageKind::kClaim, states[v].id,
                                        states[nb].id, tick, 1});
      tables[v].for_each([&](NodeId id, const StoredClaim& claim) {
        if (tables[nb].merge(id, claim, policy)) {
          result.alerts.push_back(
              BaselineAlert{id, static_cast<std::uint32_t>(nb), tick});
        }
      });
    }
  }
  return result;
}

WitnessSet select_witnesses(NodeId subject, std::size_t n_vertices,
                            std::size_t g, SplitMix64& rng) {
  WitnessSet set;
  set.claim_subject = subject;
  const bool subject_in_range = subject < n_vertices;
  const std::size_t universe = subject_in_range ? n_vertices - 1 : n_vertices;
  set.size_g = std::min(g, universe);
  for (std::uint64_t raw : rng.sample(universe, set.size_g)) {
    // Skip over the subject's own slot.
    const std::uint64_t v = (subject_in_range && raw >= subject) ? raw + 1 : raw;
    set.witnesses.push_back(static_cast<std::uint32_t>(v));
  }
  std::sort(set.witnesses.begin(), set.witnesses.end());
  return set;
}

bool WitnessStore::deposit(NodeId id, const StoredClaim& claim,
                           const ConflictPolicy& policy) {
  auto it = held.find(id);
  if (it == held.end()) {
    held.emplace(id, claim);
    return false;
  }
  if (policy.conflicting(it->second, claim)) {
    return conflicts.insert(id).second;  // alarm once, then keep re-sending
  }
  // Same bearer seen again; keep the fresher stamp.
  if (claim.tick > it->second.tick) it->second = claim;
  return false;
}

MulticastClaimResult randomized_multicast_claim(
    const LocationClaim& claim, std::uint32_t subject_vertex,
    const Topology& topo, std::size_t g, SplitMix64& rng,
    std::vector<WitnessStore>& stores, const ConflictPolicy& policy) {
  if (subject_vertex >= topo.adjacency.size())
    throw std::invalid_argument("randomized_multicast_claim: bad vertex");
  if (g < 1)
    throw std::invalid_argument("randomized_multicast_claim: g must be >= 1");

  MulticastClaimResult result;
  result.witness_set = select_witnesses(claim.subject, topo.n, g, rng);

  const StoredClaim stored{claim.position, claim.tick};
  for (std::uint32_t nb : topo.adjacency[subject_vertex]) {
    for (std::uint32_t w : result.witness_set.witnesses) {
      result.messages.push_back(
          Message{MessageKind::kForwardClaim, claim.subject, w, claim.tick,
                  hop_count(topo, topo.positions[nb], topo.positions[w])});
      if (stores[w].deposit(claim.subject, stored, policy) && !result.alert) {
        result.alert = BaselineAlert{claim.subject, w, claim.tick};
      }
    }
  }
  return result;
}

double birthday_collision_oracle(std::size_t n, std::size_t g,
                                 std::size_t trials, std::uint64_t seed) {
  if (trials < 1)
    throw std::invalid_argument("birthday_collision_oracle: trials >= 1");
  if (g == 0) return 0.0;
  if (g >= n) return 1.0;

  SplitMix64 rng = substream(seed, 0xB17Du);
  std::vector<char> mark(n, 0);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::fill(mark.begin(), mark.end(), 0);
    for (std::uint64_t v : rng.sample(n, g)) mark[v] = 1;
    bool collide = false;
    for (std::uint64_t v : rng.sample(n, g)) {
      if (mark[v]) { collide = true; break; }
    }
    if (collide) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace replisim
