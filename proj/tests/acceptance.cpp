// Acceptance suite: every gate below must hold for the toolkit to ship.
// Prints one PASS/FAIL line per criterion; exit code = number of failures.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "replisim/metrics.hpp"

using namespace replisim;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int k, const std::string& what, bool pass,
            const std::string& detail) {
  std::printf("[%s] criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", k,
              what.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

// ---- criterion 1: key agreement across a 200-node, 3-generation run --------

void criterion_key_agreement() {
  const auto t0 = Clock::now();
  SimConfig cfg;
  cfg.protocol = Protocol::kPpp;
  cfg.n = 200;
  cfg.ticks = 160;
  cfg.generation_period = 50;
  cfg.join_span = 150;  // three back-to-back windows
  cfg.seed = 71;

  Simulation sim(cfg);
  std::size_t pairs = 0, violations = 0, generations_checked = 0;
  for (Tick checkpoint : {50, 100, 150}) {
    while (sim.now() < checkpoint) sim.step();
    const Station& st = sim.station();
    const std::uint64_t gen_index = generations_checked;
    const auto& gen = st.clock().at(gen_index);
    if (!gen.master_poly().has_value()) {
      report(1, "key-agreement reproduction", false,
             "master polynomial unavailable before erasure");
      return;
    }
    const SymmetricBivariatePoly& master = *gen.master_poly();
    std::vector<const RegistryEntry*> cohort;
    for (NodeId id = 0; id < cfg.n; ++id) {
      const RegistryEntry* e = st.find_entry(id);
      if (e && e->generation_index == gen_index) cohort.push_back(e);
    }
    for (std::size_t i = 0; i < cohort.size(); ++i) {
      for (std::size_t j = i + 1; j < cohort.size(); ++j) {
        const auto& a = *cohort[i];
        const auto& b = *cohort[j];
        ++pairs;
        const FieldElement kab = pairwise_key(*a.share, b.hash);
        const FieldElement kba = pairwise_key(*b.share, a.hash);
        const FieldElement oracle = master.eval(a.hash.value, b.hash.value);
        if (kab != kba || kab != oracle) ++violations;
      }
    }
    ++generations_checked;
  }
  const Trace trace = sim.finish();
  const double secs = seconds_since(t0);
  const bool pass = generations_checked == 3 && pairs > 0 && violations == 0 &&
                    trace.alerts.empty() && secs < 10.0;
  report(1, "key-agreement reproduction over 3 generations", pass,
         fmt("%zu pairs, %zu violations, %.2fs", pairs, violations, secs));
}

// ---- criterion 2: hand-checkable worked fixture -----------------------------

void criterion_worked_fixture() {
  const SymmetricBivariatePoly p(1, 7, {2, 3, 3, 5});
  const auto share2 = derive_share(p, 2, 0, HashMode::kIdentity);
  const auto share3 = derive_share(p, 3, 0, HashMode::kIdentity);
  const auto h2 = node_hash(2, 0, 7, HashMode::kIdentity);
  const auto h3 = node_hash(3, 0, 7, HashMode::kIdentity);
  const FieldElement k23 = pairwise_key(share2, h3);
  const FieldElement k32 = pairwise_key(share3, h2);
  const bool pass = k23 == 5 && k32 == 5;
  report(2, "worked example derives key 5 for nodes 2 and 3", pass,
         fmt("keys %llu / %llu", static_cast<unsigned long long>(k23),
             static_cast<unsigned long long>(k32)));
}

// ---- criteria 3/4/6 share the load-0 complexity sweeps ----------------------

SweepSpec complexity_spec(std::vector<Protocol> protocols, std::size_t trials) {
  SweepSpec spec;
  spec.protocols = std::move(protocols);
  spec.n_values = {50, 100, 200, 400, 800};
  spec.load_values = {0.0};
  spec.trials = trials;
  spec.base_seed = 42;
  spec.base.ticks = 200;
  spec.base.clone_count = 0;
  return spec;
}

void criterion_complexity(const std::vector<MetricsRow>& fit_rows,
                          double sweep_seconds) {
  try {
    const FitResult ppp = fit_complexity(fit_rows, "ppp");
    const FitResult rm = fit_complexity(fit_rows, "rmulticast");
    const bool pass = ppp.exponent >= 0.7 && ppp.exponent <= 1.3 &&
                      rm.exponent >= 1.6 && sweep_seconds < 300.0;
    report(3, "communication-complexity fits (ppp ~ n, rmulticast >= n^1.6)",
           pass,
           fmt("ppp %.3f (r2 %.4f), rmulticast %.3f (r2 %.4f), %.1fs",
               ppp.exponent, ppp.r_squared, rm.exponent, rm.r_squared,
               sweep_seconds));
  } catch (const std::exception& e) {
    report(3, "communication-complexity fits", false, e.what());
  }
}

void criterion_memory(const std::vector<MetricsRow>& fit_rows,
                      const std::vector<MetricsRow>& broadcast_rows) {
  // Station growth at most linear, per-node PPP memory bounded by the
  // diameter, broadcast claim tables growing with n.
  bool station_linear = true, node_bounded = true, node_flat = true;
  std::size_t ppp_peak_min_n = 0, ppp_peak_max_n = 0;
  for (const MetricsRow& r : fit_rows) {
    if (r.protocol != "ppp") continue;
    if (r.station_peak_entries > 2 * r.n) station_linear = false;
    if (r.node_peak_memory_entries >
        2 * static_cast<std::size_t>(r.diameter_s))
      node_bounded = false;
    if (r.n == 50)
      ppp_peak_min_n = std::max(ppp_peak_min_n, r.node_peak_memory_entries);
    if (r.n == 800)
      ppp_peak_max_n = std::max(ppp_peak_max_n, r.node_peak_memory_entries);
  }
  if (ppp_peak_max_n > ppp_peak_min_n + 4) node_flat = false;

  auto mean_bc_peak = [&](std::size_t n) {
    double sum = 0;
    std::size_t k = 0;
    for (const MetricsRow& r : broadcast_rows) {
      if (r.protocol == "broadcast" && r.n == n) {
        sum += static_cast<double>(r.node_peak_memory_entries);
        ++k;
      }
    }
    return k ? sum / static_cast<double>(k) : 0.0;
  };
  bool broadcast_grows = true;
  double prev = 0.0;
  for (std::size_t n : {50, 100, 200, 400, 800}) {
    const double peak = mean_bc_peak(n);
    if (peak < prev) broadcast_grows = false;
    prev = peak;
  }
  if (mean_bc_peak(800) < 4.0 * mean_bc_peak(50)) broadcast_grows = false;

  const bool pass =
      station_linear && node_bounded && node_flat && broadcast_grows;
  report(4, "memory: station <= 2n, ppp node <= 2s and flat, broadcast grows",
         pass,
         fmt("station_linear=%d node<=2s=%d node_flat=%d bc_grows=%d "
             "(bc peak %g @50 -> %g @800)",
             station_linear, node_bounded, node_flat, broadcast_grows,
             mean_bc_peak(50), mean_bc_peak(800)));
}

// ---- criterion 5: detection-rate ordering under load ------------------------

void criterion_ordering() {
  SweepSpec spec;
  spec.protocols = {Protocol::kPpp, Protocol::kBroadcast,
                    Protocol::kRandomizedMulticast};
  spec.n_values = {400};
  spec.load_values = {0.0, 1.0, 2.0, 4.0};
  spec.trials = 30;
  spec.base_seed = 9000;
  spec.base.ticks = 300;
  spec.base.clone_count = 5;
  spec.base.clone_injection_tick = 150;  // after every generation window
  spec.base.clone_placement = ClonePlacement::kFar;
  const auto rows = run_sweep(spec);

  try {
    const auto cells = detection_report(rows);
    const OrderingVerdict v = check_detection_ordering(cells);
    report(5,
           "detection ordering at highest load: rmulticast >= ppp >= "
           "broadcast (95% level)",
           v.ok(),
           fmt("load %.1f: rm %.3f, ppp %.3f, broadcast %.3f", v.load,
               v.rate_rm, v.rate_ppp, v.rate_broadcast));
  } catch (const std::exception& e) {
    report(5, "detection ordering", false, e.what());
  }
}

// ---- criterion 6: soundness -------------------------------------------------

void criterion_soundness(const std::vector<std::vector<MetricsRow>*>& sweeps) {
  SweepSpec honest;
  honest.protocols = {Protocol::kPpp, Protocol::kBroadcast,
                      Protocol::kRandomizedMulticast};
  honest.n_values = {100};
  honest.load_values = {0.0, 1.0, 2.0, 4.0};
  honest.trials = 5;
  honest.base_seed = 500;
  honest.base.ticks = 200;
  honest.base.clone_count = 0;
  const auto honest_rows = run_sweep(honest);

  std::size_t rows_checked = 0, fp = 0;
  auto scan = [&](const std::vector<MetricsRow>& rows) {
    for (const MetricsRow& r : rows) {
      ++rows_checked;
      fp += r.false_positives;
    }
  };
  scan(honest_rows);
  for (const auto* rows : sweeps) scan(*rows);
  report(6, "soundness: zero false positives across every sweep", fp == 0,
         fmt("%zu rows, %zu false positives", rows_checked, fp));
}

// ---- criterion 7: deterministic detection at load 0 -------------------------

void criterion_deterministic_detection() {
  bool all_detected = true;
  double worst_latency = 0.0;
  SimConfig cfg;
  cfg.protocol = Protocol::kPpp;
  cfg.n = 100;
  cfg.ticks = 220;
  cfg.generation_period = 50;
  cfg.join_span = 150;
  cfg.clone_count = 5;
  cfg.clone_injection_tick = 160;  // past the last window
  cfg.load = 0.0;
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    cfg.seed = 7000 + trial;
    const Trace t = run(cfg);
    if (t.clones_injected != 5 || t.clones_detected != t.clones_injected)
      all_detected = false;
    worst_latency = std::max(worst_latency, t.mean_detection_latency);
    if (t.false_positives != 0) all_detected = false;
  }
  const bool pass = all_detected && worst_latency <= 5.0;
  report(7, "post-window clones at load 0: rate 1.0 within one round", pass,
         fmt("worst mean latency %.3f ticks", worst_latency));
}

// ---- criterion 8: randomized-multicast calibration --------------------------

void criterion_rm_calibration() {
  SimConfig cfg;
  cfg.protocol = Protocol::kRandomizedMulticast;
  cfg.n = 60;
  cfg.ticks = 45;
  cfg.join_span = 10;
  cfg.claim_interval = 20;
  cfg.clone_count = 1;
  cfg.clone_injection_tick = 20;  // one shared claim epoch: [20, 40)
  cfg.clone_placement = ClonePlacement::kFar;
  cfg.load = 0.0;

  std::size_t detected = 0;
  const std::size_t trials = 1000;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    cfg.seed = 100000 + trial;
    const Trace t = run(cfg);
    if (t.clones_detected > 0) ++detected;
  }
  const double empirical =
      static_cast<double>(detected) / static_cast<double>(trials);
  // Witnesses are drawn from the 59 vertices other than the subject's own.
  const double predicted =
      birthday_collision_oracle(59, cfg.witness_g(), 100000, 4242);
  const bool pass = std::abs(empirical - predicted) <= 0.05;
  report(8, "randomized-multicast rate matches the birthday oracle (+-0.05)",
         pass, fmt("empirical %.4f vs oracle %.4f", empirical, predicted));
}

// ---- criterion 9: collusion desk property ------------------------------------

void criterion_collusion() {
  const auto t0 = Clock::now();
  const std::uint64_t q = 31, t = 2;
  const auto master = SymmetricBivariatePoly::random(t, q, 90210);
  std::vector<oracles::ShareSample> shares = {
      {5, master.restrict_x(5).coeffs()},
      {9, master.restrict_x(9).coeffs()},
  };
  const auto keys = oracles::collusion_candidate_keys(shares, 3, 11, q);
  const double secs = seconds_since(t0);
  const bool pass = keys.size() > 1 &&
                    keys.count(master.eval(3, 11)) == 1 && secs < 60.0;
  report(9, "t=2 shares over Q=31 leave the fresh key ambiguous", pass,
         fmt("%zu candidate keys, true key included, %.2fs", keys.size(),
             secs));
}

// ---- criterion 10: byte-identical reruns -------------------------------------

void criterion_determinism() {
  const std::string spec_text =
      "protocols = ppp, broadcast, rmulticast\n"
      "n_values = 30, 40\n"
      "load_values = 0, 2\n"
      "trials = 2\n"
      "base_seed = 77\n"
      "ticks = 80\n"
      "join_span = 30\n"
      "generation_period = 30\n"
      "clones = 2\n"
      "clone_tick = 45\n"
      "clone_placement = far\n";
  std::string csv[2];
  for (int round = 0; round < 2; ++round) {
    std::istringstream in(spec_text);
    const SweepSpec spec = parse_sweep_spec(in);
    std::ostringstream out;
    emit_csv(run_sweep(spec), out);
    csv[round] = out.str();
  }
  const bool pass = !csv[0].empty() && csv[0] == csv[1];
  report(10, "identical sweep specs produce byte-identical CSV", pass,
         fmt("%zu bytes", csv[0].size()));
}

}  // namespace

int main() {
  std::printf("replisim acceptance suite\n");

  criterion_key_agreement();
  criterion_worked_fixture();

  const auto t0 = Clock::now();
  const auto fit_rows =
      run_sweep(complexity_spec({Protocol::kPpp,
                                 Protocol::kRandomizedMulticast}, 10));
  const double fit_seconds = seconds_since(t0);
  const auto broadcast_rows =
      run_sweep(complexity_spec({Protocol::kBroadcast}, 2));

  criterion_complexity(fit_rows, fit_seconds);
  criterion_memory(fit_rows, broadcast_rows);
  criterion_ordering();

  std::vector<std::vector<MetricsRow>*> sweeps = {
      const_cast<std::vector<MetricsRow>*>(&fit_rows),
      const_cast<std::vector<MetricsRow>*>(&broadcast_rows)};
  criterion_soundness(sweeps);

  criterion_deterministic_detection();
  criterion_rm_calibration();
  criterion_collusion();
  criterion_determinism();

  std::printf("%s (%d failure%s)\n", failures == 0 ? "ALL PASS" : "FAILED",
              failures, failures == 1 ? "" : "s");
  return failures;
}
