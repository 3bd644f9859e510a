#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "replisim/message.hpp"
#include "replisim/rng.hpp"
#include "replisim/topology.hpp"

namespace replisim {

// A node's assertion of where some identity currently is.
struct LocationClaim {
  NodeId subject = 0;
  double position = 0.0;
  Tick tick = 0;
  NodeId reporter = 0;
};

struct StoredClaim {
  double position = 0.0;
  Tick tick = 0;
};

// Conflict rule shared by both baselines: two claims for one id clash when
// they are close in time but far apart on the road.
struct ConflictPolicy {
  double r_conflict = 200.0;
  Tick conflict_window = 100;
  double road_length = 0.0;

  bool conflicting(const StoredClaim& a, const StoredClaim& b) const {
    const Tick dt = a.tick >= b.tick ? a.tick - b.tick : b.tick - a.tick;
    if (dt > conflict_window) return false;
    return ring_distance(a.position, b.position, road_length) > r_conflict;
  }
};

struct BaselineAlert {
  NodeId suspect = 0;
  std::uint32_t reporter_vertex = 0;
  Tick tick = 0;
};

// ---- Neighbor-broadcast ID comparison -------------------------------------

// Per-node table of the freshest claim heard for each identity. Ids index a
// dense array (node ids are small integers; clones reuse victim ids).
class ClaimTable {
 public:
  // Merge one claim; returns true when it clashes with the stored claim.
  bool merge(NodeId id, const StoredClaim& claim, const ConflictPolicy& policy);

  std::size_t size() const { return count_; }
  const StoredClaim* find(NodeId id) const {
    return (id < present_.size() && present_[id]) ? &claims_[id] : nullptr;
  }
  template <typename F>
  void for_each(F&& fn) const {  // ascending id order
    for (std::size_t id = 0; id < present_.size(); ++id) {
      if (present_[id]) fn(static_cast<NodeId>(id), claims_[id]);
    }
  }

 private:
  std::vector<StoredClaim> claims_;
  std::vector<std::uint8_t> present_;
  std::size_t count_ = 0;
};

struct BroadcastNode {
  NodeId id = 0;
  double position = 0.0;
  bool active = true;
};

struct BroadcastRoundResult {
  std::vector<Message> messages;
  std::vector<BaselineAlert> alerts;
};

// One lossless round: every active node sends its claim table plus its own
// fresh claim to each neighbor. Message count is exactly the sum of active
// vertex degrees. Tables in `tables` (one per vertex) are updated in place.
BroadcastRoundResult broadcast_round(const Topology& topo,
                                     const std::vector<BroadcastNode>& states,
                                     Tick tick, std::vector<ClaimTable>& tables,
                                     const ConflictPolicy& policy);

// ---- Randomized multicast witnesses ----------------------------------------

struct WitnessSet {
  NodeId claim_subject = 0;
  std::vector<std::uint32_t> witnesses;  // vertex indices, no duplicates
  std::size_t size_g = 0;
};

// g distinct witness vertices drawn from the original vertices other than
// the subject's home vertex.
WitnessSet select_witnesses(NodeId subject, std::size_t n_vertices,
                            std::size_t g, SplitMix64& rng);

// Epoch-scoped storage at one witness vertex. Claims, and the set of
// identities caught conflicting, both reset when the epoch turns; while an
// accusation is live the witness keeps re-sending its alarm.
struct WitnessStore {
  std::map<NodeId, StoredClaim> held;
  std::set<NodeId> conflicts;
  std::size_t size() const { return held.size(); }
  void clear_epoch() {
    held.clear();
    conflicts.clear();
  }

  // Returns true when the incoming claim newly conflicts with a held one.
  bool deposit(NodeId id, const StoredClaim& claim,
               const ConflictPolicy& policy);
};

struct MulticastClaimResult {
  std::vector<Message> messages;  // one ForwardClaim per (neighbor, witness)
  WitnessSet witness_set;
  std::optional<BaselineAlert> alert;  // first conflict found, if any
};

// Lossless multicast of one claim: each neighbor of the claiming vertex
// forwards it to the same g seeded witnesses, so the message count is
// degree(subject_vertex) * g. Forward hops are charged by road distance.
MulticastClaimResult randomized_multicast_claim(
    const LocationClaim& claim, std::uint32_t subject_vertex,
    const Topology& topo, std::size_t g, SplitMix64& rng,
    std::vector<WitnessStore>& stores, const ConflictPolicy& policy);

// Monte-Carlo probability that two independent g-subsets of [0, n)
// intersect; predicts the randomized-multicast detection rate.
double birthday_collision_oracle(std::size_t n, std::size_t g,
                                 std::size_t trials, std::uint64_t seed);

}  // namespace replisim
