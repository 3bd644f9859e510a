#pragma once
#include <iosfwd>
#include <string>
#include <vector>

#include "replisim/netsim.hpp"

namespace replisim {

struct MetricsRow {
  std::string protocol;
  std::size_t n = 0;
  int degree_d = 0;
  int diameter_s = 0;
  double load = 0.0;
  std::uint64_t seed = 0;
  Tick ticks = 0;
  std::uint64_t messages_total = 0;
  std::uint64_t bytes_total = 0;
  std::size_t station_peak_entries = 0;
  std::size_t node_peak_memory_entries = 0;
  std::size_t clones_injected = 0;
  std::size_t clones_detected = 0;
  std::size_t false_positives = 0;
  double mean_detection_latency_ticks = 0.0;

  double detection_rate() const {
    return clones_injected == 0
               ? 0.0
               : static_cast<double>(clones_detected) /
                     static_cast<double>(clones_injected);
  }
};

MetricsRow row_from_trace(const SimConfig& config, const Trace& trace);

inline constexpr const char* kCsvHeader =
    "protocol,n,degree_D,diameter_s,load,seed,ticks,messages_total,"
    "bytes_total,station_peak_entries,node_peak_memory_entries,"
    "clones_injected,clones_detected,false_positives,"
    "mean_detection_latency_ticks";

std::string csv_line(const MetricsRow& row);
void emit_csv(const std::vector<MetricsRow>& rows, std::ostream& out);
void emit_csv(const std::vector<MetricsRow>& rows, const std::string& path);
std::vector<MetricsRow> parse_csv(std::istream& in);
std::vector<MetricsRow> parse_csv_file(const std::string& path);

// Rows sort lexicographically by (protocol, n, load, seed) regardless of the
// order trials executed in.
void sort_rows(std::vector<MetricsRow>& rows);

// ---- empirical complexity -------------------------------------------------

struct FitResult {
  std::string protocol;
  double exponent = 0.0;   // slope of log(messages_total) vs log(n)
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n_points = 0;
};

// Least squares on (log n, log mean messages_total) over load-0 rows of one
// protocol. Throws unless >= 4 distinct n values are present.
FitResult fit_complexity(const std::vector<MetricsRow>& rows,
                         const std::string& protocol);

// ---- detection-rate report --------------------------------------------------

struct DetectionCell {
  std::string protocol;
  double load = 0.0;
  std::size_t trials = 0;
  double mean_rate = 0.0;
  double ci_half_width = 0.0;  // 95%, normal approximation
  std::size_t false_positives = 0;
};

// One cell per (protocol, load) over adversarial rows, sorted by load then
// protocol. Throws when no row has clones_injected > 0.
std::vector<DetectionCell> detection_report(
    const std::vector<MetricsRow>& rows);

struct OrderingVerdict {
  double load = 0.0;  // highest load in the report
  bool rm_ge_ppp = false;
  bool ppp_ge_broadcast = false;
  double rate_rm = 0.0, rate_ppp = 0.0, rate_broadcast = 0.0;
  bool ok() const { return rm_ge_ppp && ppp_ge_broadcast; }
};

// Checks rate(rmulticast) >= rate(ppp) >= rate(broadcast) at the highest
// load, each gap confirmed at the 95% interval level.
OrderingVerdict check_detection_ordering(
    const std::vector<DetectionCell>& cells);

// ---- literature reference table ---------------------------------------------

struct ReferenceRow {
  std::string_view protocol;
  std::string_view communication;
  std::string_view memory;
};

const std::vector<ReferenceRow>& reference_table();
const ReferenceRow* reference_lookup(std::string_view protocol);

// ---- sweeps -----------------------------------------------------------------

struct SweepSpec {
  std::vector<Protocol> protocols;
  std::vector<std::size_t> n_values;
  std::vector<double> load_values;
  std::size_t trials = 1;
  std::uint64_t base_seed = 1;
  SimConfig base;  // fixed fields applied to every cell
};

// Line-oriented `key = value` format, comma-separated lists, '#' comments.
SweepSpec parse_sweep_spec(std::istream& in);
SweepSpec parse_sweep_spec_file(const std::string& path);

// One row per (protocol, n, load, trial); trial seed = base_seed + trial
// index. Output is sorted by row key. An invalid cell aborts the sweep with
// the offending cell named.
std::vector<MetricsRow> run_sweep(const SweepSpec& spec);

}  // namespace replisim
