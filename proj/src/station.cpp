#include "replisim/station.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace replisim {

namespace {
constexpr int kMaxKeyRetries = 64;
}

Station::Station(std::uint64_t degree_t, std::uint64_t modulus_q,
                 std::uint64_t seed, HashMode hash_mode, Tick key_ttl,
                 double retransmission_radius)
    : degree_t_(degree_t),
      modulus_q_(modulus_q),
      hash_mode_(hash_mode),
      key_ttl_(key_ttl),
      retransmission_radius_(retransmission_radius),
      keygen_(mix64(seed ^ 0x5741u)) {}

bool Station::key_active(const RegistryEntry& e, Tick now) const {
  if (e.revoked) return false;
  const Generation& gen = clock_.at(e.generation_index);
  const Tick ttl = key_ttl_ >= 0 ? key_ttl_ : gen.period();
  return now < gen.window_end() + ttl;
}

const RegistryEntry* Station::find_entry(NodeId id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

RegistryEntry* Station::find_mutable(NodeId id) {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

AdmitOutcome Station::admit_node(const AdmissionRequest& request) {
  const Tick now = clock_.current_tick();

  if (const RegistryEntry* existing = find_entry(request.node)) {
    if (key_active(*existing, now)) {
      // A lost KeyResponse makes honest nodes repeat their request; the
      // exact credential from (nearly) the same spot during a still-open
      // window is a retransmission, not a replica.
      const Generation& gen = clock_.at(existing->generation_index);
      double dist = std::fabs(request.position.x - existing->position.x);
      if (road_length_ > 0.0 && dist > road_length_ / 2.0)
        dist = road_length_ - dist;
      const bool same_credential =
          request.tick == existing->join_tick && dist <= retransmission_radius_;
      if (same_credential && gen.window_open(now)) {
        return *existing;
      }
      ReplicaAlert alert{request.node,
                         AlertReason::kDuplicateActiveId,
                         {{existing->join_tick, existing->position},
                          {request.tick, request.position}},
                         now};
      record_alert(alert);
      return alert;
    }
  }

  const auto gen_index = clock_.generation_of_tick(request.tick);
  if (!gen_index) {
    return AdmissionRejected{"no generation window covers the claimed tick"};
  }
  const Generation& gen = clock_.at(*gen_index);
  const FreshnessResult fresh =
      verify_deployment_freshness(gen, request.tick, now);
  if (!fresh.accepted) {
    if (fresh.reason == FreshnessReason::kWindowNotOpen) {
      return AdmissionRejected{"claimed generation window not yet open"};
    }
    // Expired or erased: the claimed cohort is gone, the joiner is stale.
    ReplicaAlert alert{request.node,
                       AlertReason::kExpiredGenerationJoin,
                       {{request.tick, request.position}},
                       now};
    record_alert(alert);
    return alert;
  }
  return register_node(request, gen);
}

AdmitOutcome Station::register_node(const AdmissionRequest& request,
                                    const Generation& gen) {
  // Window open implies the master material is still present.
  const SymmetricBivariatePoly& master = *gen.master_poly();

  NodeKey key = 0;
  IdentityHash hash;
  bool placed = false;
  for (int attempt = 0; attempt < kMaxKeyRetries; ++attempt) {
    key = keygen_.next();
    hash = node_hash(request.node, key, modulus_q_, hash_mode_);
    bool collision = false;
    for (const RegistryEntry& e : entries_) {
      if (!e.revoked && e.generation_index == gen.index() &&
          e.node != request.node && e.hash == hash) {
        collision = true;  // same hash point would break pairwise agreement
        break;
      }
    }
    if (!collision) {
      placed = true;
      break;
    }
  }
  if (!placed) {
    return AdmissionRejected{"identity hash collision could not be resolved"};
  }

  RegistryEntry entry;
  entry.node = request.node;
  entry.key = key;
  entry.hash = hash;
  entry.generation_index = gen.index();
  entry.position = request.position;
  entry.join_tick = request.tick;
  entry.last_claim_tick = clock_.current_tick();
  entry.share = derive_share(master, request.node, key, hash_mode_, gen.index());

  auto it = index_.find(request.node);
  if (it != index_.end()) {
    entries_[it->second] = entry;  // stale or revoked slot is replaced
  } else {
    index_.emplace(request.node, entries_.size());
    entries_.push_back(entry);
  }
  return entry;
}

GroupAdmitResult Station::admit_group(
    const std::vector<AdmissionRequest>& requests) {
  if (requests.empty())
    throw std::invalid_argument("admit_group: empty request list");

  std::optional<std::uint64_t> gen_index;
  const std::uint64_t group = requests.front().group;
  for (const AdmissionRequest& r : requests) {
    if (r.group != group)
      throw std::invalid_argument("admit_group: mixed group ids");
    const auto g = clock_.generation_of_tick(r.tick);
    if (!g) throw std::invalid_argument("admit_group: tick outside any window");
    if (gen_index && *gen_index != *g)
      throw std::invalid_argument("admit_group: requests span generations");
    gen_index = g;
  }

  GroupAdmitResult result;
  result.leader = requests.front().node;
  for (const AdmissionRequest& r : requests)
    result.leader = std::max(result.leader, r.node);

  for (const AdmissionRequest& r : requests) {
    if (r.node == result.leader) continue;
    result.announcements.push_back(Message{MessageKind::kLeaderAnnounce,
                                           result.leader, r.node,
                                           clock_.current_tick(), 1});
  }
  for (const AdmissionRequest& r : requests) {
    result.outcomes.push_back(admit_node(r));
  }
  return result;
}

KeyRequestOutcome Station::handle_key_request(NodeId requester,
                                              IdentityHash target_hash,
                                              Tick current_tick) {
  RegistryEntry* entry = find_mutable(requester);
  if (!entry)
    throw std::invalid_argument("handle_key_request: unknown requester");

  KeyRequestOutcome out;
  if (entry->revoked) {
    out.reject = KeyRequestReject::kRevokedRequester;
    return out;
  }
  const Generation& gen = clock_.at(entry->generation_index);
  const FreshnessResult fresh =
      verify_deployment_freshness(gen, entry->join_tick, current_tick);
  if (fresh.accepted) {
    out.accepted = true;
    out.key = pairwise_key(*entry->share, target_hash);
    entry->last_claim_tick = current_tick;
    return out;
  }
  switch (fresh.reason) {
    case FreshnessReason::kWindowExpired:
      out.reject = KeyRequestReject::kWindowExpired;
      break;
    case FreshnessReason::kWindowNotOpen:
      out.reject = KeyRequestReject::kWindowNotOpen;
      break;
    case FreshnessReason::kClaimOutsideWindow:
      out.reject = KeyRequestReject::kClaimOutsideWindow;
      break;
    case FreshnessReason::kGenerationErased:
      out.reject = KeyRequestReject::kGenerationErased;
      break;
    case FreshnessReason::kAccept:
      break;
  }
  if (out.reject == KeyRequestReject::kWindowExpired ||
      out.reject == KeyRequestReject::kGenerationErased) {
    ReplicaAlert alert{requester,
                       AlertReason::kExpiredGenerationJoin,
                       {{entry->join_tick, entry->position}},
                       current_tick};
    record_alert(alert);
    out.alert = alert;
  }
  return out;
}

HelloVerdict Station::handle_hello(NodeId sender,
                                   std::uint64_t claimed_generation,
                                   Tick claimed_join_tick, NodeId receiver,
                                   Tick current_tick, FieldElement challenge,
                                   FieldElement sender_response) {
  const RegistryEntry* recv = find_entry(receiver);
  if (!recv)
    throw std::invalid_argument("handle_hello: receiver not registered");

  RegistryEntry* entry = find_mutable(sender);
  if (!entry) return HelloVerdict::kUnknownSender;
  if (entry->revoked) return HelloVerdict::kRevokedSender;
  if (entry->generation_index != claimed_generation)
    return HelloVerdict::kGenerationMismatch;
  if (entry->join_tick != claimed_join_tick)
    return HelloVerdict::kJoinTickMismatch;

  // Pairwise keys exist only within one generation; across cohorts the
  // registry checks above are all the station can test.
  if (entry->generation_index == recv->generation_index) {
    const FieldElement expected = add_mod(
        pairwise_key(*entry->share, recv->hash), challenge, modulus_q_);
    if (sender_response != expected) return HelloVerdict::kKeyMismatch;
  }
  entry->last_claim_tick = current_tick;
  return HelloVerdict::kVerified;
}

void Station::revoke(NodeId node, const ReplicaAlert& alert) {
  if (alert.suspect != node)
    throw std::logic_error("revoke: alert does not reference this entry");
  if (RegistryEntry* entry = find_mutable(node)) entry->revoked = true;
}

bool Station::record_alert(const ReplicaAlert& alert) {
  for (const ReplicaAlert& a : alerts_) {
    if (a.suspect == alert.suspect) return false;  // already adjudicated
  }
  alerts_.push_back(alert);
  revoke(alert.suspect, alert);
  return true;
}

}  // namespace replisim
