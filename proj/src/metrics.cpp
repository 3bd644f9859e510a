#include "replisim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace replisim {

MetricsRow row_from_trace(const SimConfig& config, const Trace& trace) {
  MetricsRow row;
  row.protocol = std::string(protocol_name(config.protocol));
  row.n = config.n;
  row.degree_d = config.target_degree_d;
  row.diameter_s = trace.diameter_s;
  row.load = config.load;
  row.seed = config.seed;
  row.ticks = config.ticks;
  row.messages_total = trace.messages_total;
  row.bytes_total = trace.bytes_total;
  row.station_peak_entries = trace.station_peak_entries;
  row.node_peak_memory_entries = trace.node_peak_memory_entries;
  row.clones_injected = trace.clones_injected;
  row.clones_detected = trace.clones_detected;
  row.false_positives = trace.false_positives;
  row.mean_detection_latency_ticks = trace.mean_detection_latency;
  return row;
}

std::string csv_line(const MetricsRow& r) {
  char buf[384];
  std::snprintf(
      buf, sizeof(buf),
      "%s,%zu,%d,%d,%.9g,%llu,%lld,%llu,%llu,%zu,%zu,%zu,%zu,%zu,%.3f",
      r.protocol.c_str(), r.n, r.degree_d, r.diameter_s, r.load,
      static_cast<unsigned long long>(r.seed), static_cast<long long>(r.ticks),
      static_cast<unsigned long long>(r.messages_total),
      static_cast<unsigned long long>(r.bytes_total), r.station_peak_entries,
      r.node_peak_memory_entries, r.clones_injected, r.clones_detected,
      r.false_positives, r.mean_detection_latency_ticks);
  return std::string(buf);
}

void emit_csv(const std::vector<MetricsRow>& rows, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const MetricsRow& r : rows) out << csv_line(r) << '\n';
}

void emit_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write CSV file: " + path);
  emit_csv(rows, out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for CSV file: " + path);
}

static std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::vector<MetricsRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("CSV input is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader)
    throw std::runtime_error("unexpected CSV header: " + line);

  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 15)
      throw std::runtime_error("bad CSV row (expected 15 fields): " + line);
    MetricsRow r;
    r.protocol = f[0];
    r.n = std::stoull(f[1]);
    r.degree_d = std::stoi(f[2]);
    r.diameter_s = std::stoi(f[3]);
    r.load = std::stod(f[4]);
    r.seed = std::stoull(f[5]);
    r.ticks = std::stoll(f[6]);
    r.messages_total = std::stoull(f[7]);
    r.bytes_total = std::stoull(f[8]);
    r.station_peak_entries = std::stoull(f[9]);
    r.node_peak_memory_entries = std::stoull(f[10]);
    r.clones_injected = std::stoull(f[11]);
    r.clones_detected = std::stoull(f[12]);
    r.false_positives = std::stoull(f[13]);
    r.mean_detection_latency_ticks = std::stod(f[14]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<MetricsRow> parse_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read CSV file: " + path);
  return parse_csv(in);
}

void sort_rows(std::vector<MetricsRow>& rows) {
  std::sort(rows.begin(), rows.end(),
            [](const MetricsRow& a, const MetricsRow& b) {
              if (a.protocol != b.protocol) return a.protocol < b.protocol;
              if (a.n != b.n) return a.n < b.n;
              if (a.load != b.load) return a.load < b.load;
              return a.seed < b.seed;
            });
}

FitResult fit_complexity(const std::vector<MetricsRow>& rows,
                         const std::string& protocol) {
  std::map<std::size_t, std::pair<double, std::size_t>> by_n;  // sum, count
  for (const MetricsRow& r : rows) {
    if (r.protocol != protocol || r.load != 0.0) continue;
    auto& acc = by_n[r.n];
    acc.first += static_cast<double>(r.messages_total);
    acc.second += 1;
  }
  if (by_n.size() < 4)
    throw std::invalid_argument(
        "fit_complexity: need load-0 rows for >= 4 distinct n values, have " +
        std::to_string(by_n.size()));

  std::vector<double> xs, ys;
  for (const auto& [n, acc] : by_n) {
    const double mean = acc.first / static_cast<double>(acc.second);
    if (n == 0 || mean <= 0.0)
      throw std::invalid_argument("fit_complexity: nonpositive data point");
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(mean));
  }

  const double k = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = k * sxx - sx * sx;
  FitResult fit;
  fit.protocol = protocol;
  fit.n_points = xs.size();
  fit.exponent = (k * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.exponent * sx) / k;

  double ss_res = 0, ss_tot = 0;
  const double ymean = sy / k;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double pred = fit.intercept + fit.exponent * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

std::vector<DetectionCell> detection_report(
    const std::vector<MetricsRow>& rows) {
  std::map<std::pair<double, std::string>, std::vector<const MetricsRow*>>
      cells;
  for (const MetricsRow& r : rows) {
    if (r.clones_injected == 0) continue;
    cells[{r.load, r.protocol}].push_back(&r);
  }
  if (cells.empty())
    throw std::invalid_argument(
        "detection_report: no adversarial rows (clones_injected > 0)");

  std::vector<DetectionCell> out;
  for (const auto& [key, members] : cells) {
    DetectionCell cell;
    cell.load = key.first;
    cell.protocol = key.second;
    cell.trials = members.size();
    double sum = 0;
    for (const MetricsRow* r : members) {
      sum += r->detection_rate();
      cell.false_positives += r->false_positives;
    }
    cell.mean_rate = sum / static_cast<double>(members.size());
    if (members.size() > 1) {
      double ss = 0;
      for (const MetricsRow* r : members) {
        const double d = r->detection_rate() - cell.mean_rate;
        ss += d * d;
      }
      const double sd =
          std::sqrt(ss / static_cast<double>(members.size() - 1));
      cell.ci_half_width =
          1.96 * sd / std::sqrt(static_cast<double>(members.size()));
    }
    out.push_back(std::move(cell));
  }
  return out;  // map order: by load, then protocol
}

OrderingVerdict check_detection_ordering(
    const std::vector<DetectionCell>& cells) {
  OrderingVerdict v;
  double max_load = 0.0;
  for (const DetectionCell& c : cells) max_load = std::max(max_load, c.load);
  v.load = max_load;

  const DetectionCell* rm = nullptr;
  const DetectionCell* ppp = nullptr;
  const DetectionCell* bc = nullptr;
  for (const DetectionCell& c : cells) {
    if (c.load != max_load) continue;
    if (c.protocol == "rmulticast") rm = &c;
    if (c.protocol == "ppp") ppp = &c;
    if (c.protocol == "broadcast") bc = &c;
  }
  auto confirmed = [](const DetectionCell& a, const DetectionCell& b) {
    const double diff = a.mean_rate - b.mean_rate;
    const double se = std::sqrt(a.ci_half_width * a.ci_half_width +
                                b.ci_half_width * b.ci_half_width);
    return diff + 1e-12 >= se;  // both half-widths already carry the 1.96
  };
  if (rm) v.rate_rm = rm->mean_rate;
  if (ppp) v.rate_ppp = ppp->mean_rate;
  if (bc) v.rate_broadcast = bc->mean_rate;
  v.rm_ge_ppp = rm && ppp && confirmed(*rm, *ppp);
  v.ppp_ge_broadcast = ppp && bc && confirmed(*ppp, *bc);
  return v;
}

const std::vector<ReferenceRow>& reference_table() {
  static const std::vector<ReferenceRow> table = {
      {"EDD", "O(n)", "O(n)"},
      {"SDC", "O(n) + O(s)", "NAP"},
      {"Randomized Multicast", "O(n^2)", "O(n)"},
      {"SET", "O(n)", "O(D)"},
      {"RED", "O(sqrt(n))", "O(D)"},
      {"PPP", "O(n)", "O(s)"},
  };
  return table;
}

const ReferenceRow* reference_lookup(std::string_view protocol) {
  std::string key(protocol);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (const ReferenceRow& row : reference_table()) {
    std::string name(row.protocol);
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (name == key) return &row;
  }
  // The CSV token for randomized multicast maps onto its published row.
  if (key == "rmulticast") return reference_lookup("Randomized Multicast");
  return nullptr;
}

// ---- sweep spec parsing -----------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cur = trim(cur);
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

[[noreturn]] void bad_spec(const std::string& what) {
  throw std::invalid_argument("sweep spec: " + what);
}

}  // namespace

SweepSpec parse_sweep_spec(std::istream& in) {
  SweepSpec spec;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      bad_spec("line " + std::to_string(lineno) + " has no '='");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty())
      bad_spec("empty value for '" + key + "'");

    try {
      if (key == "protocols") {
        for (const std::string& tok : split_list(value)) {
          const auto p = protocol_from_name(tok);
          if (!p) bad_spec("unknown protocol '" + tok + "'");
          spec.protocols.push_back(*p);
        }
      } else if (key == "n_values") {
        for (const std::string& tok : split_list(value))
          spec.n_values.push_back(std::stoull(tok));
      } else if (key == "load_values") {
        for (const std::string& tok : split_list(value))
          spec.load_values.push_back(std::stod(tok));
      } else if (key == "trials") {
        spec.trials = std::stoull(value);
      } else if (key == "base_seed") {
        spec.base_seed = std::stoull(value);
      } else if (key == "ticks") {
        spec.base.ticks = std::stoll(value);
      } else if (key == "degree") {
        spec.base.target_degree_d = std::stoi(value);
      } else if (key == "clones") {
        spec.base.clone_count = std::stoull(value);
      } else if (key == "clone_tick") {
        spec.base.clone_injection_tick = std::stoll(value);
      } else if (key == "capacity") {
        spec.base.channel_capacity = std::stoull(value);
      } else if (key == "degree_t") {
        spec.base.degree_t = std::stoull(value);
      } else if (key == "modulus_q") {
        spec.base.modulus_q = std::stoull(value);
      } else if (key == "generation_period") {
        spec.base.generation_period = std::stoll(value);
      } else if (key == "join_span") {
        spec.base.join_span = std::stoll(value);
      } else if (key == "round_interval") {
        spec.base.round_interval = std::stoll(value);
      } else if (key == "claim_interval") {
        spec.base.claim_interval = std::stoll(value);
      } else if (key == "refresh_interval") {
        spec.base.refresh_interval = std::stoll(value);
      } else if (key == "conflict_window") {
        spec.base.conflict_window = std::stoll(value);
      } else if (key == "r_conflict") {
        spec.base.r_conflict = std::stod(value);
      } else if (key == "spacing") {
        spec.base.spacing = std::stod(value);
      } else if (key == "velocity_min") {
        spec.base.velocity_min = std::stod(value);
      } else if (key == "velocity_max") {
        spec.base.velocity_max = std::stod(value);
      } else if (key == "witness_g") {
        spec.base.witness_count = std::stoull(value);
      } else if (key == "clone_placement") {
        if (value == "uniform")
          spec.base.clone_placement = ClonePlacement::kUniform;
        else if (value == "far")
          spec.base.clone_placement = ClonePlacement::kFar;
        else
          bad_spec("clone_placement must be uniform or far");
      } else if (key == "clone_mode") {
        if (value == "identity")
          spec.base.clone_mode = CloneMode::kIdentityOnly;
        else if (value == "stolen")
          spec.base.clone_mode = CloneMode::kStolenKey;
        else
          bad_spec("clone_mode must be identity or stolen");
      } else if (key == "hash") {
        if (value == "mix")
          spec.base.hash_mode = HashMode::kMix;
        else if (value == "identity")
          spec.base.hash_mode = HashMode::kIdentity;
        else
          bad_spec("hash must be mix or identity");
      } else {
        bad_spec("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception& e) {
      bad_spec("cannot parse value for '" + key + "': " + e.what());
    }
  }
  if (spec.protocols.empty()) bad_spec("protocols list is required");
  if (spec.n_values.empty()) bad_spec("n_values list is required");
  if (spec.load_values.empty()) bad_spec("load_values list is required");
  if (spec.trials < 1) bad_spec("trials must be >= 1");
  return spec;
}

SweepSpec parse_sweep_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read sweep spec: " + path);
  return parse_sweep_spec(in);
}

std::vector<MetricsRow> run_sweep(const SweepSpec& spec) {
  std::vector<MetricsRow> rows;
  for (Protocol protocol : spec.protocols) {
    for (std::size_t n : spec.n_values) {
      for (double load : spec.load_values) {
        for (std::size_t trial = 0; trial < spec.trials; ++trial) {
          SimConfig cfg = spec.base;
          cfg.protocol = protocol;
          cfg.n = n;
          cfg.load = load;
          cfg.seed = spec.base_seed + trial;
          try {
            rows.push_back(row_from_trace(cfg, run(cfg)));
          } catch (const std::exception& e) {
            throw std::runtime_error(
                "sweep cell failed (protocol=" +
                std::string(protocol_name(protocol)) +
                " n=" + std::to_string(n) + " load=" + std::to_string(load) +
                " seed=" + std::to_string(cfg.seed) + "): " + e.what());
          }
        }
      }
    }
  }
  sort_rows(rows);
  return rows;
}

}  // namespace replisim
