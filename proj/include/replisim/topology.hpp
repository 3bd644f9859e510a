#pragma once
#include <cstdint>
#include <vector>

namespace replisim {

// Radio connectivity on a ring road. Vertices are positions on [0, length);
// two vertices are neighbors when their ring-arc distance is at most the
// radio radius. Consecutive vehicles along the road are always linked, which
// keeps the graph connected without inflating the mean degree.
struct Topology {
  std::size_t n = 0;
  double road_length = 0.0;
  double radius = 0.0;
  int target_degree = 0;
  int diameter_hops = 0;  // measured by all-pairs BFS, not assumed
  std::vector<double> positions;
  std::vector<std::vector<std::uint32_t>> adjacency;

  double mean_degree() const;
};

double ring_distance(double a, double b, double length);

// Geometric graph: n uniform positions on a road of n * spacing meters,
// radius set so the expected degree matches target_degree. Throws when
// target_degree >= n.
Topology build_topology(std::size_t n, int target_degree, std::uint64_t seed,
                        double spacing = 25.0);

// Recompute neighbor lists for externally maintained positions (mobility
// refresh; clones add vertices). Keeps radius and road length.
void rebuild_adjacency(Topology& topo, const std::vector<double>& positions);

// Greedy road-routing cost estimate for a multihop forward.
int hop_count(const Topology& topo, double from_pos, double to_pos);

// Exact all-pairs BFS sweep; returns max eccentricity (0 for n == 1).
int bfs_diameter(const std::vector<std::vector<std::uint32_t>>& adjacency);

}  // namespace replisim
