#include "replisim/station.hpp"

#include "doctest.h"

using namespace replisim;

namespace {

// Station with one generation window [100, 150) and the clock at `tick`.
Station make_station(Tick tick = 110, HashMode mode = HashMode::kMix) {
  Station st(1, 7, 4242, mode);
  st.clock().advance_to(100);
  st.clock().open_generation(50, 1, 7, 77);
  st.clock().advance_to(tick);
  return st;
}

AdmissionRequest req(NodeId id, Tick tick, double x = 0.0) {
  AdmissionRequest r;
  r.node = id;
  r.position = Position{x};
  r.tick = tick;
  return r;
}

}  // namespace

TEST_CASE("admit_node") {
  SUBCASE("fresh admission registers and derives a share") {
    Station st = make_station(110);
    const auto outcome = st.admit_node(req(7, 110, 12.0));
    REQUIRE(std::holds_alternative<RegistryEntry>(outcome));
    const auto& e = std::get<RegistryEntry>(outcome);
    CHECK(e.node == 7);
    CHECK(e.join_tick == 110);
    CHECK(e.generation_index == 0);
    CHECK(e.share.has_value());
    CHECK(e.hash.value < 7);
    CHECK(st.registry_size() == 1);
  }
  SUBCASE("second admission of an active id is a replica alert") {
    Station st = make_station(110);
    st.admit_node(req(7, 110));
    st.clock().advance_to(120);
    const auto outcome = st.admit_node(req(7, 120, 400.0));
    REQUIRE(std::holds_alternative<ReplicaAlert>(outcome));
    const auto& alert = std::get<ReplicaAlert>(outcome);
    CHECK(alert.suspect == 7);
    CHECK(alert.reason == AlertReason::kDuplicateActiveId);
    CHECK(alert.evidence.size() == 2);
    // Both claimants are revoked pending re-admission.
    CHECK(st.find_entry(7)->revoked);
  }
  SUBCASE("claiming a closed window is an expired-generation alert") {
    Station st = make_station(110);
    st.clock().advance_to(160);
    const auto outcome = st.admit_node(req(9, 110));
    REQUIRE(std::holds_alternative<ReplicaAlert>(outcome));
    CHECK(std::get<ReplicaAlert>(outcome).reason ==
          AlertReason::kExpiredGenerationJoin);
  }
  SUBCASE("claim in a gap with no covering window is a structured rejection") {
    Station st = make_station(110);
    const auto outcome = st.admit_node(req(9, 75));
    CHECK(std::holds_alternative<AdmissionRejected>(outcome));
  }
  SUBCASE("identity-hash collisions cannot be retried away") {
    Station st = make_station(110, HashMode::kIdentity);
    st.admit_node(req(2, 110));
    // 9 = 2 mod 7 collides with node 2 regardless of key retries.
    const auto outcome = st.admit_node(req(9, 110));
    CHECK(std::holds_alternative<AdmissionRejected>(outcome));
  }
}

TEST_CASE("admit_group") {
  SUBCASE("largest identity leads, others get announcements") {
    Station st = make_station(110);
    const auto result = st.admit_group({req(3, 110), req(9, 110), req(5, 110)});
    CHECK(result.leader == 9);
    CHECK(result.announcements.size() == 2);
    for (const Message& m : result.announcements) {
      CHECK(m.kind == MessageKind::kLeaderAnnounce);
      CHECK(m.src == 9);
    }
    CHECK(result.outcomes.size() == 3);
    for (const auto& o : result.outcomes)
      CHECK(std::holds_alternative<RegistryEntry>(o));
  }
  SUBCASE("singleton group") {
    Station st = make_station(110);
    const auto result = st.admit_group({req(4, 110)});
    CHECK(result.leader == 4);
    CHECK(result.announcements.empty());
  }
  SUBCASE("a duplicate member alerts, the rest are admitted") {
    Station st = make_station(110);
    st.admit_node(req(5, 110));
    const auto result = st.admit_group({req(3, 112), req(5, 112)});
    CHECK(std::holds_alternative<RegistryEntry>(result.outcomes[0]));
    CHECK(std::holds_alternative<ReplicaAlert>(result.outcomes[1]));
  }
  SUBCASE("mixed generations are rejected") {
    Station st = make_station(110);
    CHECK_THROWS(st.admit_group({req(3, 110), req(4, 75)}));
  }
}

TEST_CASE("handle_key_request") {
  Station st = make_station(110);
  const auto entry = std::get<RegistryEntry>(st.admit_node(req(7, 110)));

  SUBCASE("valid requester gets the pairwise key") {
    const IdentityHash target{5};
    const auto out = st.handle_key_request(7, target, 120);
    REQUIRE(out.accepted);
    // Equals the master-polynomial oracle while the window is open.
    const auto& master = *st.clock().at(0).master_poly();
    CHECK(out.key == master.eval(entry.hash.value, target.value));
  }
  SUBCASE("diagonal self-request is allowed") {
    const auto out = st.handle_key_request(7, entry.hash, 120);
    CHECK(out.accepted);
  }
  SUBCASE("closed window rejects and raises an alert") {
    st.clock().advance_to(160);
    const auto out = st.handle_key_request(7, IdentityHash{5}, 160);
    CHECK_FALSE(out.accepted);
    CHECK(out.reject == KeyRequestReject::kWindowExpired);
    REQUIRE(out.alert.has_value());
    CHECK(out.alert->reason == AlertReason::kExpiredGenerationJoin);
    CHECK(st.find_entry(7)->revoked);
  }
  SUBCASE("unknown requester is a protocol error") {
    CHECK_THROWS(st.handle_key_request(999, IdentityHash{5}, 120));
  }
}

TEST_CASE("handle_hello") {
  Station st = make_station(110);
  const auto ea = std::get<RegistryEntry>(st.admit_node(req(7, 110)));
  const auto eb = std::get<RegistryEntry>(st.admit_node(req(8, 111)));
  const FieldElement c = 3;

  auto honest_response = [&](const RegistryEntry& sender,
                             const RegistryEntry& receiver) {
    return add_mod(pairwise_key(*sender.share, receiver.hash), c, 7);
  };

  SUBCASE("honest registered sender verifies") {
    CHECK(st.handle_hello(7, 0, 110, 8, 120, c, honest_response(ea, eb)) ==
          HelloVerdict::kVerified);
  }
  SUBCASE("clone with a different key fails the challenge") {
    // The replica holds the victim's id but not its station key, so its
    // share is derived at a different hash point; verify by evaluation.
    const auto master = *st.clock().at(0).master_poly();
    const NodeKey forged = ea.key + 1;
    const auto clone_share = derive_share(master, 7, forged, st.hash_mode(), 0);
    const auto resp = add_mod(pairwise_key(clone_share, eb.hash), c, 7);
    REQUIRE(node_hash(7, forged, 7).value != ea.hash.value);
    CHECK(st.handle_hello(7, 0, 110, 8, 120, c, resp) ==
          HelloVerdict::kKeyMismatch);
  }
  SUBCASE("claiming the wrong generation fails") {
    CHECK(st.handle_hello(7, 3, 110, 8, 120, c, honest_response(ea, eb)) ==
          HelloVerdict::kGenerationMismatch);
  }
  SUBCASE("claiming the wrong join tick fails") {
    CHECK(st.handle_hello(7, 0, 112, 8, 120, c, honest_response(ea, eb)) ==
          HelloVerdict::kJoinTickMismatch);
  }
  SUBCASE("unknown sender") {
    CHECK(st.handle_hello(99, 0, 110, 8, 120, c, 0) ==
          HelloVerdict::kUnknownSender);
  }
  SUBCASE("unregistered receiver is a precondition violation") {
    CHECK_THROWS(st.handle_hello(7, 0, 110, 99, 120, c, 0));
  }
}

TEST_CASE("revocation") {
  Station st = make_station(110);
  const auto ea = std::get<RegistryEntry>(st.admit_node(req(7, 110)));
  const auto eb = std::get<RegistryEntry>(st.admit_node(req(8, 111)));
  ReplicaAlert alert{7, AlertReason::kKeyMismatch, {{110, Position{}}}, 120};

  SUBCASE("revoke then hello fails") {
    st.revoke(7, alert);
    const auto r = add_mod(pairwise_key(*ea.share, eb.hash), 3, 7);
    CHECK(st.handle_hello(7, 0, 110, 8, 121, 3, r) ==
          HelloVerdict::kRevokedSender);
  }
  SUBCASE("revocation is idempotent") {
    st.revoke(7, alert);
    st.revoke(7, alert);
    CHECK(st.find_entry(7)->revoked);
  }
  SUBCASE("alert must reference the entry") {
    CHECK_THROWS(st.revoke(8, alert));
  }
  SUBCASE("record_alert deduplicates per suspect") {
    CHECK(st.record_alert(alert));
    CHECK_FALSE(st.record_alert(alert));
    CHECK(st.alerts().size() == 1);
  }
}
