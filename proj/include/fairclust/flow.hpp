#pragma once

#include <cstdint>
#include <vector>

namespace fairclust {

/// Minimum-cost flow with per-arc [lower, upper] bounds, real arc costs and
/// integral node supplies.
///
/// Solved by successive shortest augmenting paths with node potentials after
/// the usual lower-bound transformation. Augmentation amounts are integers,
/// so every arc flow stays an exact integer end to end; costs are plain
/// doubles and path comparisons use an absolute 1e-12 tolerance.
class MinCostFlow {
 public:
  explicit MinCostFlow(int node_count = 0);

  int add_node();
  int node_count() const { return static_cast<int>(excess_.size()); }

  /// Adds a directed arc with flow bounds [lower, upper], 0 <= lower <= upper.
  /// Returns an arc id usable with flow() after solve().
  int add_arc(int from, int to, std::int64_t lower, std::int64_t upper, double cost);

  /// Positive supply = source of that many units, negative = demand.
  void set_supply(int node, std::int64_t supply);

  /// Minimizes total cost over feasible flows. Returns the total cost
  /// (lower-bound contributions included). Throws InfeasibleError when the
  /// supplies cannot be routed within the bounds.
  double solve();

  /// Flow on an arc after a successful solve(), lower bound included.
  std::int64_t flow(int arc_id) const;

 private:
  struct Edge {
    int to;
    std::int64_t cap;  // residual capacity
    double cost;
  };
  struct ArcRecord {
    int edge;            // forward edge index in edges_
    std::int64_t lower;  // original lower bound
    std::int64_t span;   // upper - lower
    double cost;
  };

  void push_edge(int from, int to, std::int64_t cap, double cost);

  std::vector<Edge> edges_;                // paired: rev(e) == e ^ 1
  std::vector<std::vector<int>> adjacent_;
  std::vector<std::int64_t> excess_;
  std::vector<ArcRecord> arcs_;
  double lower_bound_cost_ = 0.0;
  bool solved_ = false;
};

}  // namespace fairclust
