#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "replisim/generations.hpp"
#include "replisim/keying.hpp"
#include "replisim/message.hpp"
#include "replisim/rng.hpp"

namespace replisim {

struct Position {
  double x = 0.0;  // meters along the road
  bool operator==(const Position&) const = default;
};

struct RegistryEntry {
  NodeId node = 0;
  NodeKey key = 0;
  IdentityHash hash;
  std::uint64_t generation_index = 0;
  Position position;
  Tick join_tick = 0;
  Tick last_claim_tick = 0;
  bool revoked = false;
  // Server-side copy of the derived share ("states for previous generated
  // keys"); survives master erasure so Hello adjudication keeps working.
  std::optional<KeyShare> share;
};

struct AdmissionRequest {
  NodeId node = 0;
  Position position;
  Tick tick = 0;  // claimed join tick; honest joiners use "now"
  std::uint64_t group = 0;
  std::uint64_t permission = 0;
};

enum class AlertReason { kDuplicateActiveId, kExpiredGenerationJoin, kKeyMismatch };

inline constexpr std::string_view alert_reason_name(AlertReason r) {
  switch (r) {
    case AlertReason::kDuplicateActiveId:     return "DuplicateActiveId";
    case AlertReason::kExpiredGenerationJoin: return "ExpiredGenerationJoin";
    case AlertReason::kKeyMismatch:           return "KeyMismatch";
  }
  return "?";
}

struct ReplicaAlert {
  NodeId suspect = 0;
  AlertReason reason = AlertReason::kDuplicateActiveId;
  std::vector<std::pair<Tick, Position>> evidence;
  Tick tick = 0;
};

// Admission that can neither register nor accuse (e.g. no generation window
// has ever covered the claimed tick).
struct AdmissionRejected {
  std::string why;
};

using AdmitOutcome = std::variant<RegistryEntry, ReplicaAlert, AdmissionRejected>;

struct GroupAdmitResult {
  NodeId leader = 0;
  std::vector<Message> announcements;  // leader id to the other members
  std::vector<AdmitOutcome> outcomes;  // one per request, same order
};

enum class KeyRequestReject {
  kNone,
  kRevokedRequester,
  kWindowExpired,
  kWindowNotOpen,
  kClaimOutsideWindow,
  kGenerationErased,
};

struct KeyRequestOutcome {
  bool accepted = false;
  FieldElement key = 0;  // valid when accepted
  KeyRequestReject reject = KeyRequestReject::kNone;
  std::optional<ReplicaAlert> alert;  // raised on window-expired requests
};

enum class HelloVerdict {
  kVerified,
  kUnknownSender,
  kRevokedSender,
  kGenerationMismatch,
  kJoinTickMismatch,
  kKeyMismatch,
};

// Central base station: admission, registry, PPP replica adjudication.
// Strictly sequential; the simulation driver is the single writer.
class Station {
 public:
  Station(std::uint64_t degree_t, std::uint64_t modulus_q, std::uint64_t seed,
          HashMode hash_mode = HashMode::kMix, Tick key_ttl = -1,
          double retransmission_radius = 200.0);

  GenerationClock& clock() { return clock_; }
  const GenerationClock& clock() const { return clock_; }

  // Admit one node at the clock's current tick. On success assigns a fresh
  // key, derives the share from the claimed generation's master, registers
  // and returns the entry. Duplicate active ids and closed-window claims
  // come back as ReplicaAlert. A repeat of a registered node's exact
  // credential (same id, join tick, nearby position) while its window is
  // still open is treated as a retransmission: the existing entry is
  // returned again, no alert.
  AdmitOutcome admit_node(const AdmissionRequest& request);

  // Group bootstrap: the member with the largest id leads and its id value
  // is sent to the other members, then everyone goes through admit_node.
  // Throws if the requests disagree on the enclosing generation.
  GroupAdmitResult admit_group(const std::vector<AdmissionRequest>& requests);

  // Key fetch per the generation-window rule: freshness of the requester's
  // generation gates the computation; expired windows raise an alert.
  KeyRequestOutcome handle_key_request(NodeId requester,
                                       IdentityHash target_hash,
                                       Tick current_tick);

  // Hello adjudication. The pair (challenge, sender_response) is the
  // transcript of the receiver's challenge: a genuine sender answers
  // pairwise_key + challenge mod Q using its own share.
  HelloVerdict handle_hello(NodeId sender, std::uint64_t claimed_generation,
                            Tick claimed_join_tick, NodeId receiver,
                            Tick current_tick, FieldElement challenge,
                            FieldElement sender_response);

  // Revoke the entry named by the alert. Idempotent.
  void revoke(NodeId node, const ReplicaAlert& alert);

  // Record an externally raised alert (e.g. forwarded by a Hello receiver).
  // Deduplicates per suspect: the first alert wins and revokes the id.
  bool record_alert(const ReplicaAlert& alert);

  const RegistryEntry* find_entry(NodeId id) const;
  const std::vector<ReplicaAlert>& alerts() const { return alerts_; }
  std::size_t registry_size() const { return entries_.size(); }
  // Registry entries + retained generation states.
  std::size_t memory_entries() const {
    return entries_.size() + clock_.generations().size();
  }
  bool key_active(const RegistryEntry& e, Tick now) const;

  HashMode hash_mode() const { return hash_mode_; }
  std::uint64_t modulus() const { return modulus_q_; }
  std::uint64_t degree_t() const { return degree_t_; }
  // Positions live on a ring road; the station needs its length to compare
  // reported positions. 0 means plain line distance.
  void set_road_length(double length) { road_length_ = length; }

 private:
  RegistryEntry* find_mutable(NodeId id);
  AdmitOutcome register_node(const AdmissionRequest& request,
                             const Generation& gen);

  std::uint64_t degree_t_;
  std::uint64_t modulus_q_;
  HashMode hash_mode_;
  Tick key_ttl_;  // validity past window end; -1 means "one period"
  double retransmission_radius_;
  double road_length_ = 0.0;
  SplitMix64 keygen_;
  GenerationClock clock_;
  std::vector<RegistryEntry> entries_;
  std::unordered_map<NodeId, std::size_t> index_;  // id -> entries_ slot
  std::vector<ReplicaAlert> alerts_;
};

}  // namespace replisim
