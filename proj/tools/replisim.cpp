// Command-line front end: single runs, sweeps, complexity fits and
// detection-rate reports over node-replication detection protocols.
//
// Exit codes: 0 ok, 1 invalid arguments or spec, 2 I/O failure,
// 3 detection-rate ordering violated.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "replisim/metrics.hpp"

using namespace replisim;

namespace {

int cmd_simulate(const std::string& protocol, std::size_t n, int degree,
                 double load, std::size_t clones, Tick clone_tick, Tick ticks,
                 std::uint64_t seed, const std::string& out_path,
                 SimConfig base) {
  const auto proto = protocol_from_name(protocol);
  if (!proto) {
    std::cerr << "unknown protocol: " << protocol << "\n";
    return 1;
  }
  SimConfig cfg = base;
  cfg.protocol = *proto;
  cfg.n = n;
  cfg.target_degree_d = degree;
  cfg.load = load;
  cfg.clone_count = clones;
  cfg.clone_injection_tick = clone_tick;
  cfg.ticks = ticks;
  cfg.seed = seed;

  Trace trace = run(cfg);
  MetricsRow row = row_from_trace(cfg, trace);
  if (!out_path.empty()) emit_csv({row}, out_path);

  std::printf("protocol=%s n=%zu degree=%.2f diameter_s=%d load=%.9g seed=%llu\n",
              row.protocol.c_str(), row.n, trace.mean_degree, row.diameter_s,
              row.load, static_cast<unsigned long long>(row.seed));
  std::printf("messages_total=%llu bytes_total=%llu (transmissions, hop-weighted)\n",
              static_cast<unsigned long long>(row.messages_total),
              static_cast<unsigned long long>(row.bytes_total));
  std::printf("records sent=%llu delivered=%llu dropped=%llu\n",
              static_cast<unsigned long long>(trace.records_sent),
              static_cast<unsigned long long>(trace.records_delivered),
              static_cast<unsigned long long>(trace.records_dropped));
  std::printf("memory station_peak=%zu node_peak=%zu\n",
              row.station_peak_entries, row.node_peak_memory_entries);
  std::printf("clones injected=%zu detected=%zu false_positives=%zu latency=%.3f\n",
              row.clones_injected, row.clones_detected, row.false_positives,
              row.mean_detection_latency_ticks);
  for (const AlertRecord& a : trace.alerts) {
    std::printf("  alert t=%lld suspect=%llu reason=%s\n",
                static_cast<long long>(a.tick),
                static_cast<unsigned long long>(a.suspect),
                std::string(alert_reason_name(a.reason)).c_str());
  }
  return 0;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_path) {
  SweepSpec spec = parse_sweep_spec_file(spec_path);
  {
    // Fail on an unwritable destination before hours of simulation.
    std::ofstream probe(out_path, std::ios::binary);
    if (!probe) throw std::runtime_error("cannot write CSV file: " + out_path);
  }
  std::vector<MetricsRow> rows = run_sweep(spec);
  emit_csv(rows, out_path);
  std::printf("wrote %zu rows to %s\n", rows.size(), out_path.c_str());
  return 0;
}

int cmd_fit(const std::string& in_path, const std::string& protocol) {
  const auto rows = parse_csv_file(in_path);
  FitResult fit = fit_complexity(rows, protocol);
  std::printf("protocol=%s points=%zu\n", fit.protocol.c_str(), fit.n_points);
  std::printf("fitted: messages_total ~ n^%.4f  (intercept %.4f, r^2 %.6f)\n",
              fit.exponent, fit.intercept, fit.r_squared);
  if (const ReferenceRow* ref = reference_lookup(protocol)) {
    std::printf("reference: %s  communication %s  memory %s\n",
                std::string(ref->protocol).c_str(),
                std::string(ref->communication).c_str(),
                std::string(ref->memory).c_str());
  } else {
    std::printf("reference: no published row for '%s'\n", protocol.c_str());
  }
  return 0;
}

int cmd_report(const std::string& in_path) {
  const auto rows = parse_csv_file(in_path);
  const auto cells = detection_report(rows);
  std::printf("%-12s %-8s %-8s %-12s %-12s %s\n", "protocol", "load",
              "trials", "mean_rate", "ci95_half", "false_positives");
  for (const DetectionCell& c : cells) {
    std::printf("%-12s %-8.9g %-8zu %-12.4f %-12.4f %zu\n", c.protocol.c_str(),
                c.load, c.trials, c.mean_rate, c.ci_half_width,
                c.false_positives);
  }
  const OrderingVerdict v = check_detection_ordering(cells);
  std::printf("ordering at load %.9g: rmulticast=%.4f ppp=%.4f broadcast=%.4f\n",
              v.load, v.rate_rm, v.rate_ppp, v.rate_broadcast);
  std::printf("  rmulticast >= ppp: %s\n", v.rm_ge_ppp ? "confirmed" : "VIOLATED");
  std::printf("  ppp >= broadcast:  %s\n",
              v.ppp_ge_broadcast ? "confirmed" : "VIOLATED");
  std::size_t fp_honest = 0;
  for (const MetricsRow& r : rows) {
    if (r.clones_injected == 0) fp_honest += r.false_positives;
  }
  std::printf("adversary-free false positives: %zu\n", fp_honest);
  return v.ok() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"node-replication attack detection simulator"};
  app.require_subcommand(1);

  SimConfig base;

  // simulate
  auto* sim = app.add_subcommand("simulate", "run one trial, emit CSV + summary");
  std::string protocol = "ppp";
  std::size_t n = base.n;
  int degree = base.target_degree_d;
  double load = 0.0;
  std::size_t clones = 0;
  Tick clone_tick = base.clone_injection_tick;
  Tick ticks = base.ticks;
  std::uint64_t seed = 1;
  std::string out_path;
  sim->add_option("--protocol", protocol, "ppp|broadcast|rmulticast");
  sim->add_option("--n", n, "node count");
  sim->add_option("--degree", degree, "target mean degree D");
  sim->add_option("--load", load, "background load relative to capacity");
  sim->add_option("--clones", clones, "clones to inject");
  sim->add_option("--clone-tick", clone_tick, "injection tick");
  sim->add_option("--ticks", ticks, "simulation length");
  sim->add_option("--seed", seed, "run seed");
  sim->add_option("--out", out_path, "CSV output path");
  std::string placement = "uniform", mode = "identity";
  sim->add_option("--clone-placement", placement, "uniform|far");
  sim->add_option("--clone-mode", mode, "identity|stolen");
  sim->add_option("--capacity", base.channel_capacity,
                  "channel capacity, messages per tick (0 = 16*n)");
  sim->add_option("--degree-t", base.degree_t, "polynomial degree t");
  sim->add_option("--q", base.modulus_q, "prime modulus Q");
  sim->add_option("--period", base.generation_period, "generation period");
  sim->add_option("--join-span", base.join_span, "join window span");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run a sweep spec, emit CSV");
  std::string spec_path, sweep_out;
  sweep->add_option("--spec", spec_path, "sweep spec file")->required();
  sweep->add_option("--out", sweep_out, "CSV output path")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "complexity fit from sweep CSV");
  std::string fit_in, fit_protocol;
  fit->add_option("--in", fit_in, "input CSV")->required();
  fit->add_option("--protocol", fit_protocol, "protocol token")->required();

  // report
  auto* report = app.add_subcommand("report", "detection-rate report");
  std::string report_in;
  report->add_option("--in", report_in, "input CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) {
      if (placement == "far")
        base.clone_placement = ClonePlacement::kFar;
      else if (placement != "uniform") {
        std::cerr << "unknown clone placement: " << placement << "\n";
        return 1;
      }
      if (mode == "stolen")
        base.clone_mode = CloneMode::kStolenKey;
      else if (mode != "identity") {
        std::cerr << "unknown clone mode: " << mode << "\n";
        return 1;
      }
      return cmd_simulate(protocol, n, degree, load, clones, clone_tick,
                          ticks, seed, out_path, base);
    }
    if (sweep->parsed()) return cmd_sweep(spec_path, sweep_out);
    if (fit->parsed()) return cmd_fit(fit_in, fit_protocol);
    if (report->parsed()) return cmd_report(report_in);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
