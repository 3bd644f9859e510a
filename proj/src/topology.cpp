#include "replisim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "replisim/rng.hpp"

namespace replisim {

double ring_distance(double a, double b, double length) {
  double d = std::fabs(a - b);
  if (d > length / 2.0) d = length - d;
  return d;
}

double Topology::mean_degree() const {
  if (n == 0) return 0.0;
  std::size_t total = 0;
  for (const auto& nb : adjacency) total += nb.size();
  return static_cast<double>(total) / static_cast<double>(n);
}

void rebuild_adjacency(Topology& topo, const std::vector<double>& positions) {
  const std::size_t m = positions.size();
  topo.positions = positions;
  topo.adjacency.assign(m, {});
  if (m <= 1) return;

  // Sort vertices by road position; radius neighbors form contiguous runs.
  std::vector<std::uint32_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (positions[a] != positions[b]) return positions[a] < positions[b];
    return a < b;
  });

  auto link = [&](std::uint32_t a, std::uint32_t b) {
    if (a == b) return;
    auto& na = topo.adjacency[a];
    if (std::find(na.begin(), na.end(), b) == na.end()) {
      na.push_back(b);
      topo.adjacency[b].push_back(a);
    }
  };

  for (std::size_t i = 0; i < m; ++i) {
    const std::uint32_t u = order[i];
    // Successor chain keeps the road connected across sparse gaps.
    link(u, order[(i + 1) % m]);
    for (std::size_t step = 1; step < m; ++step) {
      const std::uint32_t v = order[(i + step) % m];
      if (ring_distance(positions[u], positions[v], topo.road_length) >
          topo.radius)
        break;
      link(u, v);
    }
  }
  for (auto& nb : topo.adjacency) std::sort(nb.begin(), nb.end());
}

Topology build_topology(std::size_t n, int target_degree, std::uint64_t seed,
                        double spacing) {
  if (n < 1) throw std::invalid_argument("build_topology: n must be >= 1");
  if (target_degree < 0 || (n > 1 && static_cast<std::size_t>(target_degree) >= n))
    throw std::invalid_argument("build_topology: need degree D < n");

  Topology topo;
  topo.n = n;
  topo.target_degree = target_degree;
  topo.road_length = static_cast<double>(n) * spacing;
  // Uniform density n/L: expected neighbors within radius r is 2r/spacing.
  topo.radius = static_cast<double>(target_degree) * spacing / 2.0;

  SplitMix64 rng = substream(seed, 0x7090u);
  std::vector<double> positions(n);
  for (std::size_t i = 0; i < n; ++i)
    positions[i] = rng.unit() * topo.road_length;

  rebuild_adjacency(topo, positions);
  topo.diameter_hops = bfs_diameter(topo.adjacency);
  return topo;
}

int hop_count(const Topology& topo, double from_pos, double to_pos) {
  if (topo.radius <= 0.0) return 1;
  const double arc = ring_distance(from_pos, to_pos, topo.road_length);
  const int hops = static_cast<int>(std::ceil(arc / topo.radius));
  return std::max(1, hops);
}

int bfs_diameter(const std::vector<std::vector<std::uint32_t>>& adjacency) {
  const std::size_t m = adjacency.size();
  if (m <= 1) return 0;
  int diameter = 0;
  std::vector<int> dist(m);
  for (std::size_t s = 0; s < m; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::queue<std::uint32_t> q;
    dist[s] = 0;
    q.push(static_cast<std::uint32_t>(s));
    while (!q.empty()) {
      const std::uint32_t u = q.front();
      q.pop();
      for (std::uint32_t v : adjacency[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          diameter = std::max(diameter, dist[v]);
          q.push(v);
        }
      }
    }
    for (int d : dist) {
      if (d < 0) throw std::logic_error("topology is not connected");
    }
  }
  return diameter;
}

}  // namespace replisim
