#include "fairclust/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "fairclust/errors.hpp"

namespace fairclust {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCostTol = 1e-12;
}  // namespace

MinCostFlow::MinCostFlow(int node_count) {
  excess_.assign(static_cast<std::size_t>(node_count), 0);
  adjacent_.assign(static_cast<std::size_t>(node_count), {});
}

int MinCostFlow::add_node() {
  excess_.push_back(0);
  adjacent_.emplace_back();
  return node_count() - 1;
}

void MinCostFlow::push_edge(int from, int to, std::int64_t cap, double cost) {
  adjacent_[static_cast<std::size_t>(from)].push_back(static_cast<int>(edges_.size()));
  edges_.push_back(Edge{to, cap, cost});
  adjacent_[static_cast<std::size_t>(to)].push_back(static_cast<int>(edges_.size()));
  edges_.push_back(Edge{from, 0, -cost});
}

int MinCostFlow::add_arc(int from, int to, std::int64_t lower, std::int64_t upper,
                         double cost) {
  if (from < 0 || from >= node_count() || to < 0 || to >= node_count())
    throw ConfigError("flow arc references unknown node");
  if (lower < 0 || lower > upper)
    throw ConfigError("flow arc requires 0 <= lower <= upper, got [" +
                      std::to_string(lower) + ", " + std::to_string(upper) + "]");
  if (!std::isfinite(cost)) throw NumericError("flow arc cost is not finite");

  // Mandatory flow is shipped up front; only the span remains adjustable.
  excess_[static_cast<std::size_t>(from)] -= lower;
  excess_[static_cast<std::size_t>(to)] += lower;
  lower_bound_cost_ += static_cast<double>(lower) * cost;

  const int edge = static_cast<int>(edges_.size());
  push_edge(from, to, upper - lower, cost);
  arcs_.push_back(ArcRecord{edge, lower, upper - lower, cost});
  return static_cast<int>(arcs_.size()) - 1;
}

void MinCostFlow::set_supply(int node, std::int64_t supply) {
  if (node < 0 || node >= node_count()) throw ConfigError("flow supply on unknown node");
  excess_[static_cast<std::size_t>(node)] += supply;
}

double MinCostFlow::solve() {
  const int n = node_count();
  const int source = n;
  const int sink = n + 1;
  excess_.push_back(0);
  excess_.push_back(0);
  adjacent_.emplace_back();
  adjacent_.emplace_back();

  std::int64_t required = 0;
  std::int64_t demanded = 0;
  for (int v = 0; v < n; ++v) {
    if (excess_[static_cast<std::size_t>(v)] > 0) {
      push_edge(source, v, excess_[static_cast<std::size_t>(v)], 0.0);
      required += excess_[static_cast<std::size_t>(v)];
    } else if (excess_[static_cast<std::size_t>(v)] < 0) {
      push_edge(v, sink, -excess_[static_cast<std::size_t>(v)], 0.0);
      demanded -= excess_[static_cast<std::size_t>(v)];
    }
  }
  if (required != demanded)
    throw InfeasibleError("total supply " + std::to_string(required) +
                          " does not match total demand " + std::to_string(demanded));

  const int total = n + 2;
  std::vector<double> potential(static_cast<std::size_t>(total), 0.0);

  bool has_negative = false;
  for (const Edge& e : edges_)
    if (e.cap > 0 && e.cost < 0.0) has_negative = true;
  if (has_negative) {
    // Bellman-Ford from the super source seeds valid potentials.
    std::vector<double> dist(static_cast<std::size_t>(total), kInf);
    dist[static_cast<std::size_t>(source)] = 0.0;
    for (int round = 0; round < total; ++round) {
      bool changed = false;
      for (int u = 0; u < total; ++u) {
        if (dist[static_cast<std::size_t>(u)] == kInf) continue;
        for (int id : adjacent_[static_cast<std::size_t>(u)]) {
          const Edge& e = edges_[static_cast<std::size_t>(id)];
          if (e.cap <= 0) continue;
          const double cand = dist[static_cast<std::size_t>(u)] + e.cost;
          if (cand < dist[static_cast<std::size_t>(e.to)] - kCostTol) {
            dist[static_cast<std::size_t>(e.to)] = cand;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    for (int v = 0; v < total; ++v)
      if (dist[static_cast<std::size_t>(v)] < kInf)
        potential[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(v)];
  }

  std::vector<double> dist(static_cast<std::size_t>(total));
  std::vector<int> parent_edge(static_cast<std::size_t>(total));
  std::int64_t shipped = 0;

  while (shipped < required) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent_edge.begin(), parent_edge.end(), -1);
    dist[static_cast<std::size_t>(source)] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
    queue.push({0.0, source});
    while (!queue.empty()) {
      auto [d, u] = queue.top();
      queue.pop();
      if (d > dist[static_cast<std::size_t>(u)] + kCostTol) continue;
      for (int id : adjacent_[static_cast<std::size_t>(u)]) {
        const Edge& e = edges_[static_cast<std::size_t>(id)];
        if (e.cap <= 0) continue;
        double reduced = e.cost + potential[static_cast<std::size_t>(u)] -
                         potential[static_cast<std::size_t>(e.to)];
        if (reduced < 0.0) {
          if (reduced < -1e-7)
            throw NumericError("negative reduced cost " + std::to_string(reduced) +
                               " exceeds tolerance in flow solver");
          reduced = 0.0;
        }
        const double cand = dist[static_cast<std::size_t>(u)] + reduced;
        if (cand < dist[static_cast<std::size_t>(e.to)] - kCostTol) {
          dist[static_cast<std::size_t>(e.to)] = cand;
          parent_edge[static_cast<std::size_t>(e.to)] = id;
          queue.push({cand, e.to});
        }
      }
    }
    if (dist[static_cast<std::size_t>(sink)] == kInf) break;

    const double reach = dist[static_cast<std::size_t>(sink)];
    for (int v = 0; v < total; ++v)
      potential[static_cast<std::size_t>(v)] +=
          std::min(dist[static_cast<std::size_t>(v)], reach);

    std::int64_t bottleneck = required - shipped;
    for (int v = sink; v != source;) {
      const Edge& e = edges_[static_cast<std::size_t>(parent_edge[static_cast<std::size_t>(v)])];
      bottleneck = std::min(bottleneck, e.cap);
      v = edges_[static_cast<std::size_t>(parent_edge[static_cast<std::size_t>(v)] ^ 1)].to;
    }
    for (int v = sink; v != source;) {
      const int id = parent_edge[static_cast<std::size_t>(v)];
      edges_[static_cast<std::size_t>(id)].cap -= bottleneck;
      edges_[static_cast<std::size_t>(id ^ 1)].cap += bottleneck;
      v = edges_[static_cast<std::size_t>(id ^ 1)].to;
    }
    shipped += bottleneck;
  }

  if (shipped < required)
    throw InfeasibleError("flow infeasible: routed " + std::to_string(shipped) +
                          " of " + std::to_string(required) + " required units");

  solved_ = true;
  double cost = lower_bound_cost_;
  for (const ArcRecord& arc : arcs_) {
    const std::int64_t f = arc.span - edges_[static_cast<std::size_t>(arc.edge)].cap;
    cost += static_cast<double>(f) * arc.cost;
  }
  return cost;
}

std::int64_t MinCostFlow::flow(int arc_id) const {
  if (!solved_) throw ConfigError("flow() queried before solve()");
  if (arc_id < 0 || arc_id >= static_cast<int>(arcs_.size()))
    throw ConfigError("unknown arc id");
  const ArcRecord& arc = arcs_[static_cast<std::size_t>(arc_id)];
  return arc.lower + (arc.span - edges_[static_cast<std::size_t>(arc.edge)].cap);
}

}  // namespace fairclust
