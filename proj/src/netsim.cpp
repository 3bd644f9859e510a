#include "replisim/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace replisim {

std::string_view protocol_name(Protocol p) {
  switch (p) {
    case Protocol::kPpp:                 return "ppp";
    case Protocol::kBroadcast:           return "broadcast";
    case Protocol::kRandomizedMulticast: return "rmulticast";
  }
  return "?";
}

std::optional<Protocol> protocol_from_name(std::string_view name) {
  if (name == "ppp") return Protocol::kPpp;
  if (name == "broadcast") return Protocol::kBroadcast;
  if (name == "rmulticast") return Protocol::kRandomizedMulticast;
  return std::nullopt;
}

std::size_t SimConfig::witness_g() const {
  if (witness_count > 0) return witness_count;
  return static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(n))));
}

double step_position(double position, double velocity, Tick dt,
                     double road_length) {
  if (road_length <= 0.0) return position;
  double p = std::fmod(position + velocity * static_cast<double>(dt),
                       road_length);
  if (p < 0.0) p += road_length;
  return p;
}

void step_mobility(NodeState& state, Tick dt, double road_length) {
  state.position = step_position(state.position, state.velocity, dt,
                                 road_length);
}

std::string Trace::serialize() const {
  std::string out;
  char buf[192];
  auto emit = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof(buf), fmt, args...);
    out += buf;
  };
  out += "trace v1\n";
  emit("topology degree=%.6f diameter=%d\n", mean_degree, diameter_s);
  for (const TickStats& ts : per_tick) {
    emit("t %lld s %llu d %llu x %llu\n",
         static_cast<long long>(ts.tick),
         static_cast<unsigned long long>(ts.sent),
         static_cast<unsigned long long>(ts.delivered),
         static_cast<unsigned long long>(ts.dropped));
  }
  for (const AlertRecord& a : alerts) {
    emit("alert t=%lld suspect=%llu reason=%s\n",
         static_cast<long long>(a.tick),
         static_cast<unsigned long long>(a.suspect),
         std::string(alert_reason_name(a.reason)).c_str());
  }
  emit("messages_total %llu bytes_total %llu\n",
       static_cast<unsigned long long>(messages_total),
       static_cast<unsigned long long>(bytes_total));
  emit("records sent=%llu delivered=%llu dropped=%llu\n",
       static_cast<unsigned long long>(records_sent),
       static_cast<unsigned long long>(records_delivered),
       static_cast<unsigned long long>(records_dropped));
  emit("memory station=%zu node=%zu\n", station_peak_entries,
       node_peak_memory_entries);
  emit("clones injected=%zu detected=%zu false_positives=%zu latency=%.3f\n",
       clones_injected, clones_detected, false_positives,
       mean_detection_latency);
  return out;
}

namespace {

constexpr std::uint32_t kStationVertex = 0xFFFFFFFFu;

// RNG substream tags, one per independent purpose.
enum StreamTag : std::uint64_t {
  kTagJoins = 1,
  kTagMobility = 2,
  kTagDrops = 3,
  kTagHello = 4,
  kTagChallenge = 5,
  kTagWitness = 6,
  kTagClones = 7,
  kTagGenSeed = 8,
};

struct SimMsg {
  MessageKind kind = MessageKind::kHello;
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  int hops = 1;
  NodeId subject = 0;       // hello/claim/alert identity
  std::uint64_t gen = 0;    // claimed generation
  Tick t0 = 0;              // claimed join tick / claim stamp
  double pos = 0.0;
  FieldElement f0 = 0;      // challenge
  FieldElement f1 = 0;      // response
};

struct PendingHello {
  std::uint32_t sender_vertex = 0;
  NodeId sender_id = 0;
  std::uint64_t claimed_gen = 0;
  Tick claimed_join = 0;
  FieldElement challenge = 0;
  Tick issued = 0;
};

struct CloneRecord {
  NodeId victim = 0;
  Tick injected = 0;
};

// Bounded association retries: the initial key request plus retransmissions
// at round cadence while no response has arrived.
constexpr int kJoinAttempts = 3;

}  // namespace

struct Simulation::Impl {
  SimConfig cfg;
  Topology topo;
  std::vector<NodeState> states;
  Station station;
  Trace trace;
  Tick now = 0;
  bool finished = false;

  SplitMix64 rng_mobility, rng_drops, rng_hello, rng_challenge, rng_witness,
      rng_clones;

  std::vector<SimMsg> next_tick;
  std::vector<CloneRecord> clone_records;
  bool clones_pending = false;
  std::size_t station_alerts_seen = 0;
  ConflictPolicy policy;

  // PPP per-vertex state
  std::vector<std::vector<PendingHello>> pending;
  std::vector<int> join_attempts;
  // Baseline per-vertex state
  std::vector<ClaimTable> tables;
  std::vector<WitnessStore> stores;
  std::set<std::pair<std::uint32_t, NodeId>> reported;  // reporter dedup
  std::set<NodeId> baseline_alerted;

  explicit Impl(const SimConfig& c)
      : cfg(c),
        topo(build_topology(c.n, c.target_degree_d, c.seed, c.spacing)),
        station(c.degree_t, c.modulus_q, c.seed, c.hash_mode),
        rng_mobility(substream(c.seed, kTagMobility)),
        rng_drops(substream(c.seed, kTagDrops)),
        rng_hello(substream(c.seed, kTagHello)),
        rng_challenge(substream(c.seed, kTagChallenge)),
        rng_witness(substream(c.seed, kTagWitness)),
        rng_clones(substream(c.seed, kTagClones)) {
    if (cfg.ticks < 0) throw std::invalid_argument("ticks must be >= 0");
    if (cfg.modulus_q < 3 || !is_prime(cfg.modulus_q))
      throw std::invalid_argument("modulus_q must be a prime >= 3");
    if (cfg.generation_period <= 0)
      throw std::invalid_argument("generation_period must be > 0");
    if (cfg.join_span < 1)
      throw std::invalid_argument("join_span must be >= 1");
    if (cfg.round_interval < 1 || cfg.claim_interval < 1 ||
        cfg.refresh_interval < 1)
      throw std::invalid_argument("intervals must be >= 1");

    policy.r_conflict =
        cfg.r_conflict > 0.0 ? cfg.r_conflict : 2.0 * topo.radius;
    policy.conflict_window = cfg.conflict_window;
    policy.road_length = topo.road_length;

    trace.diameter_s = topo.diameter_hops;
    trace.mean_degree = topo.mean_degree();

    SplitMix64 rng_joins = substream(cfg.seed, kTagJoins);
    states.resize(cfg.n);
    for (std::size_t v = 0; v < cfg.n; ++v) {
      NodeState& s = states[v];
      s.id = static_cast<NodeId>(v);
      s.position = topo.positions[v];
      s.velocity = cfg.velocity_min +
                   rng_mobility.unit() * (cfg.velocity_max - cfg.velocity_min);
      s.join_tick = static_cast<Tick>(rng_joins.below(
          static_cast<std::uint64_t>(cfg.join_span)));
    }
    pending.resize(cfg.n);
    join_attempts.resize(cfg.n, 0);
    tables.resize(cfg.n);
    stores.resize(cfg.n);
    station.set_road_length(topo.road_length);
  }

  // ---- helpers -------------------------------------------------------------

  bool ppp() const { return cfg.protocol == Protocol::kPpp; }

  bool baseline_active(const NodeState& s, Tick tick) const {
    return s.join_tick >= 0 && tick >= s.join_tick;
  }

  std::vector<double> positions() const {
    std::vector<double> p(states.size());
    for (std::size_t v = 0; v < states.size(); ++v) p[v] = states[v].position;
    return p;
  }

  void silence(NodeId id) {
    for (NodeState& s : states) {
      if (s.id == id) s.silenced = true;
    }
  }

  // Pull station alerts raised since the last sync into the trace.
  void sync_station_alerts(Tick tick) {
    const auto& alerts = station.alerts();
    while (station_alerts_seen < alerts.size()) {
      const ReplicaAlert& a = alerts[station_alerts_seen++];
      trace.alerts.push_back(AlertRecord{tick, a.suspect, a.reason});
      silence(a.suspect);
    }
  }

  void record_baseline_alert(Tick tick, NodeId suspect) {
    if (baseline_alerted.insert(suspect).second) {
      trace.alerts.push_back(
          AlertRecord{tick, suspect, AlertReason::kKeyMismatch});
    }
  }

  // ---- clone injection -----------------------------------------------------

  NodeState& inject_clone(NodeId victim, std::optional<double> position,
                          Tick tick) {
    const NodeState* victim_state = nullptr;
    for (const NodeState& s : states) {
      if (s.id == victim && !s.is_clone) { victim_state = &s; break; }
    }
    if (!victim_state) {
      for (const NodeState& s : states) {
        if (s.id == victim) { victim_state = &s; break; }
      }
    }
    if (!victim_state)
      throw std::invalid_argument("inject_clone: unknown victim");

    NodeState clone;
    clone.id = victim_state->id;
    clone.is_clone = true;
    clone.clone_of = victim_state->is_clone ? victim_state->clone_of
                                            : std::optional<NodeId>(victim);
    clone.group = victim_state->group;
    clone.permission = victim_state->permission;
    clone.generation_index = victim_state->generation_index;
    clone.join_tick = victim_state->join_tick;
    clone.velocity = cfg.velocity_min +
                     rng_clones.unit() * (cfg.velocity_max - cfg.velocity_min);
    if (position) {
      clone.position = *position;
    } else if (cfg.clone_placement == ClonePlacement::kFar) {
      const double arc =
          topo.road_length * (0.3 + 0.2 * rng_clones.unit());
      clone.position =
          std::fmod(victim_state->position + arc, topo.road_length);
    } else {
      clone.position = rng_clones.unit() * topo.road_length;
    }
    if (cfg.clone_mode == CloneMode::kStolenKey) {
      clone.key = victim_state->key;
      clone.hash = victim_state->hash;
      clone.share = victim_state->share;
      clone.keyed = victim_state->keyed;
      clone.registered = victim_state->registered;
    }
    states.push_back(clone);
    pending.emplace_back();
    // Manually planted replicas stay passive; the scheduler resets this for
    // clones that actively try to join.
    join_attempts.push_back(kJoinAttempts);
    tables.emplace_back();
    stores.emplace_back();
    clone_records.push_back(CloneRecord{clone.id, tick});
    rebuild_adjacency(topo, positions());
    return states.back();
  }

  void inject_scheduled_clones(Tick tick) {
    clones_pending = false;
    // Victims: registered nodes under PPP, joined nodes otherwise.
    std::vector<NodeId> pool;
    for (std::size_t v = 0; v < cfg.n; ++v) {
      const NodeState& s = states[v];
      const bool eligible = ppp() ? s.registered : baseline_active(s, tick);
      if (eligible) pool.push_back(s.id);
    }
    std::size_t count = std::min(cfg.clone_count, pool.size());
    for (std::uint64_t pick : rng_clones.sample(pool.size(), count)) {
      NodeState& clone = inject_clone(pool[pick], std::nullopt, tick);
      if (ppp()) {
        // First join attempt replaying the victim's credential; gather_ppp
        // handles the bounded retransmissions.
        SimMsg m;
        m.kind = MessageKind::kKeyRequest;
        m.src = static_cast<std::uint32_t>(states.size() - 1);
        m.dst = kStationVertex;
        m.subject = clone.id;
        m.t0 = clone.join_tick;
        m.pos = clone.position;
        next_tick.push_back(m);
        join_attempts.back() = 1;
      }
    }
    trace.clones_injected = clone_records.size();
  }

  // ---- per-protocol intent generation -------------------------------------

  void gather_ppp(Tick tick, std::vector<SimMsg>& out) {
    auto key_request = [&](std::size_t v, const NodeState& s) {
      SimMsg m;
      m.kind = MessageKind::kKeyRequest;
      m.src = static_cast<std::uint32_t>(v);
      m.dst = kStationVertex;
      m.subject = s.id;
      m.t0 = s.join_tick;
      m.pos = s.position;
      out.push_back(m);
      ++join_attempts[v];
    };
    for (std::size_t v = 0; v < states.size(); ++v) {
      NodeState& s = states[v];
      if (s.keyed || s.silenced) continue;
      if (!s.is_clone && s.join_tick == tick && join_attempts[v] == 0 &&
          station.clock().any_window_open(tick)) {
        key_request(v, s);  // initial association
        continue;
      }
      // Bounded retransmission while no key material arrived. Honest nodes
      // repeat only while their window is open; a replica has nothing but
      // its stale credential to replay.
      const bool slot =
          tick % cfg.round_interval ==
          static_cast<Tick>(v % static_cast<std::size_t>(cfg.round_interval));
      if (!slot || join_attempts[v] < 1 || join_attempts[v] >= kJoinAttempts)
        continue;
      if (!s.is_clone) {
        const auto gen = station.clock().generation_of_tick(s.join_tick);
        if (!gen || !station.clock().at(*gen).window_open(tick)) continue;
      }
      key_request(v, s);
    }
    // Hello round, staggered by vertex.
    for (std::size_t v = 0; v < states.size(); ++v) {
      NodeState& s = states[v];
      const bool can_hello = !s.silenced && (s.keyed || s.is_clone);
      if (!can_hello) continue;
      if (tick % cfg.round_interval !=
          static_cast<Tick>(v % static_cast<std::size_t>(cfg.round_interval)))
        continue;
      const auto& nbs = topo.adjacency[v];
      if (nbs.empty()) continue;
      const std::uint32_t u = nbs[rng_hello.below(nbs.size())];
      SimMsg m;
      m.kind = MessageKind::kHello;
      m.src = static_cast<std::uint32_t>(v);
      m.dst = u;
      m.subject = s.id;
      m.gen = s.generation_index;
      m.t0 = s.join_tick;
      out.push_back(m);
    }
  }

  void gather_broadcast(Tick tick, std::vector<SimMsg>& out) {
    for (std::size_t v = 0; v < states.size(); ++v) {
      NodeState& s = states[v];
      if (!baseline_active(s, tick)) continue;
      if (tick % cfg.round_interval !=
          static_cast<Tick>(s.id % static_cast<std::uint64_t>(cfg.round_interval)))
        continue;
      tables[v].merge(s.id, StoredClaim{s.position, tick}, policy);
      for (std::uint32_t nb : topo.adjacency[v]) {
        SimMsg m;
        m.kind = MessageKind::kClaim;
        m.src = static_cast<std::uint32_t>(v);
        m.dst = nb;
        m.subject = s.id;
        out.push_back(m);
      }
    }
  }

  void gather_multicast(Tick tick, std::vector<SimMsg>& out) {
    if (tick % cfg.claim_interval == 0) {
      for (WitnessStore& ws : stores) ws.clear_epoch();
    } else if (tick % cfg.round_interval == 0) {
      // Alarms are re-sent at round cadence while the epoch's evidence is
      // still held.
      for (std::size_t w = 0; w < stores.size(); ++w) {
        for (NodeId suspect : stores[w].conflicts) {
          SimMsg a;
          a.kind = MessageKind::kAlert;
          a.src = static_cast<std::uint32_t>(w);
          a.dst = kStationVertex;
          a.subject = suspect;
          out.push_back(a);
        }
      }
    }
    const std::size_t g = cfg.witness_g();
    for (std::size_t v = 0; v < states.size(); ++v) {
      NodeState& s = states[v];
      if (!baseline_active(s, tick)) continue;
      if (tick % cfg.claim_interval !=
          static_cast<Tick>(s.id % static_cast<std::uint64_t>(cfg.claim_interval)))
        continue;
      const WitnessSet set = select_witnesses(s.id, cfg.n, g, rng_witness);
      for (std::uint32_t nb : topo.adjacency[v]) {
        for (std::uint32_t w : set.witnesses) {
          SimMsg m;
          m.kind = MessageKind::kForwardClaim;
          m.src = nb;
          m.dst = w;
          m.subject = s.id;
          m.pos = s.position;
          m.t0 = tick;
          m.hops = hop_count(topo, topo.positions[nb], topo.positions[w]);
          out.push_back(m);
        }
      }
    }
  }

  // ---- delivery handlers ---------------------------------------------------

  void deliver_ppp(const SimMsg& m, Tick tick) {
    switch (m.kind) {
      case MessageKind::kKeyRequest: {
        if (m.dst == kStationVertex) {
          AdmissionRequest req;
          req.node = m.subject;
          req.position = Position{m.pos};
          req.tick = m.t0;
          req.group = states[m.src].group;
          req.permission = states[m.src].permission;
          AdmitOutcome outcome = station.admit_node(req);
          if (std::holds_alternative<RegistryEntry>(outcome)) {
            states[m.src].registered = true;
            SimMsg resp;
            resp.kind = MessageKind::kKeyResponse;
            resp.src = kStationVertex;
            resp.dst = m.src;
            resp.subject = m.subject;
            next_tick.push_back(resp);
          }
          sync_station_alerts(tick);
        } else {
          // Challenge leg of a hello exchange.
          on_challenge(m, tick);
        }
        break;
      }
      case MessageKind::kKeyResponse: {
        if (m.src == kStationVertex) {
          NodeState& s = states[m.dst];
          // The share is wrapped under the registered node key, so a replica
          // without the victim's key cannot use an intercepted response.
          if (s.is_clone && cfg.clone_mode == CloneMode::kIdentityOnly) break;
          if (const RegistryEntry* e = station.find_entry(s.id)) {
            s.keyed = true;
            s.key = e->key;
            s.hash = e->hash;
            s.share = e->share;
            s.generation_index = e->generation_index;
          }
        } else {
          on_response(m, tick);
        }
        break;
      }
      case MessageKind::kHello:
        on_hello(m, tick);
        break;
      case MessageKind::kAlert: {
        const RegistryEntry* e = station.find_entry(m.subject);
        if (e && !e->revoked) {
          ReplicaAlert alert{m.subject,
                             AlertReason::kKeyMismatch,
                             {{e->join_tick, e->position}},
                             tick};
          station.record_alert(alert);
        } else if (!e) {
          // Identity that was never admitted: report it directly.
          ReplicaAlert alert{m.subject,
                             AlertReason::kKeyMismatch,
                             {{m.t0, Position{m.pos}}},
                             tick};
          station.record_alert(alert);
        }
        sync_station_alerts(tick);
        break;
      }
      default:
        break;
    }
  }

  void on_hello(const SimMsg& m, Tick tick) {
    NodeState& recv = states[m.dst];
    if (!recv.keyed || recv.silenced) return;
    const RegistryEntry* entry = station.find_entry(m.subject);
    if (!entry || entry->revoked) {
      if (!entry) queue_alert(m.dst, m.subject, tick);
      return;
    }
    if (entry->generation_index != m.gen || entry->join_tick != m.t0) {
      queue_alert(m.dst, m.subject, tick);
      return;
    }
    if (entry->generation_index != recv.generation_index)
      return;  // no shared master polynomial, registry checks only
    PendingHello ph;
    ph.sender_vertex = m.src;
    ph.sender_id = m.subject;
    ph.claimed_gen = m.gen;
    ph.claimed_join = m.t0;
    ph.challenge = rng_challenge.below(cfg.modulus_q);
    ph.issued = tick;
    pending[m.dst].push_back(ph);

    SimMsg c;
    c.kind = MessageKind::kKeyRequest;  // challenge leg
    c.src = m.dst;
    c.dst = m.src;
    c.f0 = ph.challenge;
    next_tick.push_back(c);
  }

  void on_challenge(const SimMsg& m, Tick tick) {
    (void)tick;
    NodeState& s = states[m.dst];
    if (s.silenced) return;
    FieldElement response = 0;
    if (s.keyed && s.share) {
      if (const RegistryEntry* peer = station.find_entry(states[m.src].id)) {
        response = add_mod(pairwise_key(*s.share, peer->hash), m.f0,
                           cfg.modulus_q);
      }
    }
    // An unkeyed bearer has nothing to answer with; it bluffs a constant.
    SimMsg r;
    r.kind = MessageKind::kKeyResponse;
    r.src = m.dst;
    r.dst = m.src;
    r.f0 = m.f0;
    r.f1 = response;
    next_tick.push_back(r);
  }

  void on_response(const SimMsg& m, Tick tick) {
    auto& list = pending[m.dst];
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].sender_vertex != m.src || list[i].challenge != m.f0)
        continue;
      const PendingHello ph = list[i];
      list.erase(list.begin() + static_cast<std::ptrdiff_t>(i));
      const HelloVerdict verdict = station.handle_hello(
          ph.sender_id, ph.claimed_gen, ph.claimed_join, states[m.dst].id,
          tick, ph.challenge, m.f1);
      if (verdict == HelloVerdict::kGenerationMismatch ||
          verdict == HelloVerdict::kJoinTickMismatch ||
          verdict == HelloVerdict::kKeyMismatch) {
        queue_alert(m.dst, ph.sender_id, tick);
      }
      return;
    }
  }

  void queue_alert(std::uint32_t reporter, NodeId suspect, Tick tick) {
    if (!reported.insert({reporter, suspect}).second) return;
    const RegistryEntry* e = station.find_entry(suspect);
    if (e && e->revoked) return;
    SimMsg a;
    a.kind = MessageKind::kAlert;
    a.src = reporter;
    a.dst = kStationVertex;
    a.subject = suspect;
    a.t0 = tick;
    a.pos = states[reporter].position;
    next_tick.push_back(a);
  }

  void deliver_baseline(const SimMsg& m, Tick tick) {
    switch (m.kind) {
      case MessageKind::kClaim: {  // gossip: merge sender's table
        tables[m.src].for_each([&](NodeId id, const StoredClaim& claim) {
          if (tables[m.dst].merge(id, claim, policy)) {
            if (reported.insert({m.dst, id}).second) {
              SimMsg a;
              a.kind = MessageKind::kAlert;
              a.src = m.dst;
              a.dst = kStationVertex;
              a.subject = id;
              next_tick.push_back(a);
            }
          }
        });
        break;
      }
      case MessageKind::kForwardClaim: {
        if (stores[m.dst].deposit(m.subject, StoredClaim{m.pos, m.t0},
                                  policy)) {
          SimMsg a;
          a.kind = MessageKind::kAlert;
          a.src = m.dst;
          a.dst = kStationVertex;
          a.subject = m.subject;
          next_tick.push_back(a);
        }
        break;
      }
      case MessageKind::kAlert:
        record_baseline_alert(tick, m.subject);
        break;
      default:
        break;
    }
  }

  // ---- main loop -----------------------------------------------------------

  void step() {
    if (now >= cfg.ticks) return;
    const Tick tick = now;

    bool refresh = (tick % cfg.refresh_interval == 0);
    if (cfg.clone_count > 0 && clones_pending &&
        tick >= cfg.clone_injection_tick) {
      inject_scheduled_clones(tick);
      refresh = true;
    }
    if (refresh) rebuild_adjacency(topo, positions());

    if (ppp()) {
      station.clock().advance_to(tick);
      for (const Generation& g : station.clock().generations()) {
        if (!g.erased() && tick >= g.window_end())
          station.clock().erase_master_key(g.index());
      }
      if (tick < cfg.join_span && !station.clock().any_window_open(tick)) {
        station.clock().open_generation(
            cfg.generation_period, cfg.degree_t, cfg.modulus_q,
            mix64(substream(cfg.seed, kTagGenSeed).next() ^
                  station.clock().generations().size()));
      }
    }

    std::vector<SimMsg> msgs = std::move(next_tick);
    next_tick.clear();
    switch (cfg.protocol) {
      case Protocol::kPpp:
        gather_ppp(tick, msgs);
        break;
      case Protocol::kBroadcast:
        gather_broadcast(tick, msgs);
        break;
      case Protocol::kRandomizedMulticast:
        gather_multicast(tick, msgs);
        break;
    }

    // Channel lottery: fixed capacity per tick, background traffic competes
    // with protocol messages, the excess is dropped uniformly at random.
    const std::uint64_t capacity = cfg.capacity();
    const std::uint64_t background = static_cast<std::uint64_t>(
        std::llround(cfg.load * static_cast<double>(capacity)));
    const std::uint64_t offered =
        background + static_cast<std::uint64_t>(msgs.size());

    std::vector<char> keep(msgs.size(), 1);
    std::uint64_t delivered = 0;
    if (offered > capacity) {
      std::uint64_t slots = capacity;
      std::uint64_t items = offered;
      for (std::size_t i = 0; i < msgs.size(); ++i) {
        // Sequential sampling of a uniform capacity-subset.
        const bool take = rng_drops.below(items) < slots;
        keep[i] = take ? 1 : 0;
        if (take) { --slots; ++delivered; }
        --items;
      }
      delivered += std::min<std::uint64_t>(background, slots);
    } else {
      delivered = offered;
    }

    for (const SimMsg& m : msgs) {
      trace.messages_total += static_cast<std::uint64_t>(m.hops);
      trace.bytes_total += static_cast<std::uint64_t>(m.hops) *
                           static_cast<std::uint64_t>(message_size_bytes(m.kind));
    }
    trace.records_sent += offered;
    trace.records_delivered += delivered;
    trace.records_dropped += offered - delivered;
    trace.per_tick.push_back(
        TickStats{tick, offered, delivered, offered - delivered});

    for (std::size_t i = 0; i < msgs.size(); ++i) {
      if (!keep[i]) continue;
      if (ppp())
        deliver_ppp(msgs[i], tick);
      else
        deliver_baseline(msgs[i], tick);
    }

    // Drop stale challenge contexts.
    if (ppp()) {
      for (auto& list : pending) {
        std::erase_if(list, [&](const PendingHello& ph) {
          return tick - ph.issued > 2 * cfg.round_interval;
        });
      }
    }

    // Memory peaks.
    if (ppp()) {
      trace.station_peak_entries =
          std::max(trace.station_peak_entries, station.memory_entries());
      for (std::size_t v = 0; v < states.size(); ++v) {
        const std::size_t entries =
            (states[v].share ? 1u : 0u) + pending[v].size();
        trace.node_peak_memory_entries =
            std::max(trace.node_peak_memory_entries, entries);
      }
    } else if (cfg.protocol == Protocol::kBroadcast) {
      for (const ClaimTable& t : tables)
        trace.node_peak_memory_entries =
            std::max(trace.node_peak_memory_entries, t.size());
    } else {
      for (const WitnessStore& ws : stores)
        trace.node_peak_memory_entries =
            std::max(trace.node_peak_memory_entries, ws.size());
    }

    for (NodeState& s : states) step_mobility(s, 1, topo.road_length);
    ++now;
  }

  void finalize() {
    if (finished) return;
    finished = true;
    trace.clones_injected = clone_records.size();
    double latency_sum = 0.0;
    std::size_t detected = 0;
    std::vector<char> matched(trace.alerts.size(), 0);
    for (const CloneRecord& cr : clone_records) {
      for (std::size_t i = 0; i < trace.alerts.size(); ++i) {
        const AlertRecord& a = trace.alerts[i];
        if (a.suspect == cr.victim && a.tick >= cr.injected) {
          ++detected;
          latency_sum += static_cast<double>(a.tick - cr.injected);
          matched[i] = 1;
          break;
        }
      }
    }
    std::size_t false_pos = 0;
    for (std::size_t i = 0; i < trace.alerts.size(); ++i) {
      if (matched[i]) continue;
      bool names_clone = false;
      for (const CloneRecord& cr : clone_records) {
        if (trace.alerts[i].suspect == cr.victim &&
            trace.alerts[i].tick >= cr.injected) {
          names_clone = true;
          break;
        }
      }
      if (!names_clone) ++false_pos;
    }
    trace.clones_detected = detected;
    trace.false_positives = false_pos;
    trace.mean_detection_latency =
        detected > 0 ? latency_sum / static_cast<double>(detected) : 0.0;
  }
};

Simulation::Simulation(const SimConfig& config)
    : impl_(std::make_unique<Impl>(config)) {
  impl_->clones_pending = config.clone_count > 0;
}
Simulation::~Simulation() = default;
Simulation::Simulation(Simulation&&) noexcept = default;
Simulation& Simulation::operator=(Simulation&&) noexcept = default;

void Simulation::step() { impl_->step(); }
bool Simulation::done() const { return impl_->now >= impl_->cfg.ticks; }

Trace Simulation::finish() {
  while (!done()) step();
  impl_->finalize();
  return impl_->trace;
}

Tick Simulation::now() const { return impl_->now; }
const SimConfig& Simulation::config() const { return impl_->cfg; }
const Station& Simulation::station() const { return impl_->station; }
const std::vector<NodeState>& Simulation::nodes() const {
  return impl_->states;
}
const Topology& Simulation::topology() const { return impl_->topo; }

NodeState& Simulation::inject_clone(NodeId victim,
                                    std::optional<double> position) {
  return impl_->inject_clone(victim, position, impl_->now);
}

Trace run(const SimConfig& config) {
  Simulation sim(config);
  return sim.finish();
}

}  // namespace replisim
