#pragma once
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "replisim/baselines.hpp"
#include "replisim/message.hpp"
#include "replisim/station.hpp"
#include "replisim/topology.hpp"

namespace replisim {

enum class Protocol { kPpp, kBroadcast, kRandomizedMulticast };

std::string_view protocol_name(Protocol p);                 // CSV/CLI token
std::optional<Protocol> protocol_from_name(std::string_view name);

enum class ClonePlacement { kUniform, kFar };
enum class CloneMode { kIdentityOnly, kStolenKey };

struct SimConfig {
  std::size_t n = 100;
  int target_degree_d = 8;
  Tick ticks = 300;
  double load = 0.0;  // offered background traffic relative to capacity
  std::uint64_t channel_capacity = 0;  // messages per tick; 0 = 16 * n
  std::size_t clone_count = 0;
  Tick clone_injection_tick = 150;
  Protocol protocol = Protocol::kPpp;
  std::uint64_t seed = 1;
  std::uint64_t degree_t = 3;
  std::uint64_t modulus_q = 2147483647ULL;  // 2^31 - 1
  Tick generation_period = 50;

  // Plumbing knobs, all deterministic given the seed.
  Tick join_span = 150;        // node joins spread over [0, join_span)
  Tick round_interval = 5;     // hello / gossip cadence
  Tick claim_interval = 20;    // witness epoch length
  Tick refresh_interval = 10;  // adjacency refresh cadence
  double spacing = 25.0;       // road meters per vehicle
  double velocity_min = 0.5;   // m per tick
  double velocity_max = 1.5;
  Tick conflict_window = 100;  // claims farther apart in time never conflict
  double r_conflict = 0.0;     // 0 = 2 * radio radius
  std::size_t witness_count = 0;  // g; 0 = ceil(sqrt(n))
  ClonePlacement clone_placement = ClonePlacement::kUniform;
  CloneMode clone_mode = CloneMode::kIdentityOnly;
  HashMode hash_mode = HashMode::kMix;

  std::uint64_t capacity() const { return channel_capacity ? channel_capacity
                                                           : 16 * n; }
  std::size_t witness_g() const;
};

struct NodeState {
  NodeId id = 0;
  double position = 0.0;  // GPS along the road, meters
  double velocity = 0.0;  // m per tick
  std::uint64_t group = 0;
  std::uint64_t permission = 0;
  std::optional<KeyShare> share;
  std::uint64_t generation_index = 0;
  bool is_clone = false;
  std::optional<NodeId> clone_of;

  Tick join_tick = -1;
  NodeKey key = 0;
  IdentityHash hash;
  bool registered = false;  // station accepted the admission
  bool keyed = false;       // share delivered
  bool silenced = false;    // id revoked; the bearer stops participating
};

// Advance along the ring road; wraps at the road end.
double step_position(double position, double velocity, Tick dt,
                     double road_length);
void step_mobility(NodeState& state, Tick dt, double road_length);

struct TickStats {
  Tick tick = 0;
  std::uint64_t sent = 0;       // records offered, background included
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
};

struct AlertRecord {
  Tick tick = 0;
  NodeId suspect = 0;
  AlertReason reason = AlertReason::kDuplicateActiveId;
};

struct Trace {
  std::vector<TickStats> per_tick;
  std::vector<AlertRecord> alerts;

  // Protocol traffic in transmissions: multihop forwards count once per hop.
  std::uint64_t messages_total = 0;
  std::uint64_t bytes_total = 0;
  // Record-level conservation counters (background included).
  std::uint64_t records_sent = 0;
  std::uint64_t records_delivered = 0;
  std::uint64_t records_dropped = 0;

  std::size_t station_peak_entries = 0;
  std::size_t node_peak_memory_entries = 0;
  int diameter_s = 0;
  double mean_degree = 0.0;

  std::size_t clones_injected = 0;
  std::size_t clones_detected = 0;
  std::size_t false_positives = 0;
  double mean_detection_latency = 0.0;  // ticks, 0 when nothing was detected

  std::string serialize() const;  // stable byte-for-byte dump
};

// One deterministic discrete-event trial. Identical SimConfig gives a
// byte-identical Trace. Drive tick by tick or via run().
class Simulation {
 public:
  explicit Simulation(const SimConfig& config);
  ~Simulation();
  Simulation(Simulation&&) noexcept;
  Simulation& operator=(Simulation&&) noexcept;

  void step();  // one tick
  bool done() const;
  Trace finish();  // run to completion and take the trace

  Tick now() const;
  const SimConfig& config() const;
  const Station& station() const;  // PPP runs only
  const std::vector<NodeState>& nodes() const;
  const Topology& topology() const;

  // Plant a replica of an existing node. Default placement follows the
  // config; an explicit position overrides it. Clone of a clone chains
  // clone_of to the original victim. Throws on an unknown victim.
  NodeState& inject_clone(NodeId victim, std::optional<double> position);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Trace run(const SimConfig& config);

}  // namespace replisim
