#include "fairclust/fair_assign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fairclust/errors.hpp"

namespace fairclust {

namespace {

void check_soft_matrix(const Matrix& soft) {
  if (soft.rows() < 1 || soft.cols() < 1) throw DomainError("soft assignment is empty");
  for (Eigen::Index i = 0; i < soft.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < soft.cols(); ++j) {
      const double v = soft(i, j);
      if (!std::isfinite(v)) throw NumericError("soft assignment has non-finite entry at row " + std::to_string(i));
      if (v < -1e-9) throw DomainError("soft assignment has negative entry at row " + std::to_string(i));
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw DomainError("soft assignment row " + std::to_string(i) + " sums to " + std::to_string(sum));
  }
}

// floor/ceil of a real that is meant to be computed exactly; values within
// 1e-9 of an integer snap to it first.
std::int64_t snapped_floor(double value) {
  const double rounded = std::round(value);
  if (std::abs(value - rounded) < 1e-9) return static_cast<std::int64_t>(rounded);
  return static_cast<std::int64_t>(std::floor(value));
}

std::int64_t snapped_ceil(double value) {
  const double rounded = std::round(value);
  if (std::abs(value - rounded) < 1e-9) return static_cast<std::int64_t>(rounded);
  return static_cast<std::int64_t>(std::ceil(value));
}

}  // namespace

GroupMembership GroupMembership::from_ids(std::vector<int> ids) {
  int max_id = -1;
  for (int g : ids) max_id = std::max(max_id, g);
  return from_ids(std::move(ids), max_id + 1);
}

GroupMembership GroupMembership::from_ids(std::vector<int> ids, int num_groups) {
  GroupMembership m;
  m.group = std::move(ids);
  m.num_groups = num_groups;
  m.validate();
  return m;
}

void GroupMembership::validate() const {
  if (num_groups < 1) throw DomainError("membership needs at least one group");
  for (std::size_t i = 0; i < group.size(); ++i)
    if (group[i] < 0 || group[i] >= num_groups)
      throw DomainError("group id out of range at row " + std::to_string(i));
}

std::vector<std::int64_t> GroupMembership::group_sizes() const {
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(num_groups), 0);
  for (int g : group) ++sizes[static_cast<std::size_t>(g)];
  return sizes;
}

std::vector<double> GroupMembership::proportions() const {
  const auto sizes = group_sizes();
  std::vector<double> rho(sizes.size());
  const double n = static_cast<double>(group.size());
  for (std::size_t t = 0; t < sizes.size(); ++t) rho[t] = static_cast<double>(sizes[t]) / n;
  return rho;
}

Eigen::MatrixXd GroupMembership::one_hot() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size(), num_groups);
  for (int i = 0; i < size(); ++i) m(i, group[static_cast<std::size_t>(i)]) = 1.0;
  return m;
}

std::vector<std::int64_t> HardAssignment::cluster_sizes() const {
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(num_clusters), 0);
  for (int c : labels) ++sizes[static_cast<std::size_t>(c)];
  return sizes;
}

void HardAssignment::validate() const {
  if (num_clusters < 1) throw DomainError("assignment needs at least one cluster");
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0 || labels[i] >= num_clusters)
      throw DomainError("cluster id out of range at row " + std::to_string(i));
}

bool QuotaPlan::satisfied_by(const HardAssignment& assign,
                             const GroupMembership& membership) const {
  if (assign.size() != membership.size()) return false;
  const int k = clusters();
  const int t = groups();
  std::vector<std::vector<std::int64_t>> counts(
      static_cast<std::size_t>(k), std::vector<std::int64_t>(static_cast<std::size_t>(t), 0));
  for (int i = 0; i < assign.size(); ++i) {
    const int c = assign.labels[static_cast<std::size_t>(i)];
    if (c < 0 || c >= k) return false;
    ++counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(
        membership.group[static_cast<std::size_t>(i)])];
  }
  for (int j = 0; j < k; ++j) {
    std::int64_t size = 0;
    for (int g = 0; g < t; ++g) {
      const std::int64_t c = counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)];
      if (c < lower[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)] ||
          c > upper[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)])
        return false;
      size += c;
    }
    if (size != cluster_sizes[static_cast<std::size_t>(j)]) return false;
  }
  return true;
}

HardAssignment round_assignment(const Matrix& soft) {
  check_soft_matrix(soft);
  HardAssignment out;
  out.num_clusters = static_cast<int>(soft.cols());
  out.labels.resize(static_cast<std::size_t>(soft.rows()));
  for (Eigen::Index i = 0; i < soft.rows(); ++i) {
    int best = 0;
    for (Eigen::Index j = 1; j < soft.cols(); ++j)
      if (soft(i, j) > soft(i, best)) best = static_cast<int>(j);
    out.labels[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

QuotaPlan plan_quotas(const std::vector<std::int64_t>& cluster_sizes,
                      const GroupMembership& membership, std::optional<double> relax) {
  membership.validate();
  const int k = static_cast<int>(cluster_sizes.size());
  const int t = membership.num_groups;
  if (k < 1) throw DomainError("quota plan needs at least one cluster");
  std::int64_t total = 0;
  for (std::int64_t s : cluster_sizes) {
    if (s < 0) throw DomainError("negative cluster size");
    total += s;
  }
  const std::int64_t n = membership.size();
  if (total != n)
    throw DomainError("cluster sizes sum to " + std::to_string(total) +
                      " but membership has " + std::to_string(n) + " instances");

  const auto group_sizes = membership.group_sizes();
  QuotaPlan plan;
  plan.cluster_sizes = cluster_sizes;
  plan.lower.assign(static_cast<std::size_t>(k),
                    std::vector<std::int64_t>(static_cast<std::size_t>(t), 0));
  plan.upper = plan.lower;

  if (!relax.has_value()) {
    // Controlled rounding of the proportional targets |C_j| * |G_t| / N:
    // each cell is floor or ceil, rows sum to |C_j|, columns to |G_t|. The
    // up-rounding pattern is itself a tiny transportation problem.
    std::vector<std::vector<std::int64_t>> floor_q(
        static_cast<std::size_t>(k), std::vector<std::int64_t>(static_cast<std::size_t>(t), 0));
    std::vector<std::vector<std::int64_t>> rem(
        static_cast<std::size_t>(k), std::vector<std::int64_t>(static_cast<std::size_t>(t), 0));
    std::vector<std::int64_t> row_residual(static_cast<std::size_t>(k), 0);
    std::vector<std::int64_t> col_residual(static_cast<std::size_t>(t), 0);
    for (int j = 0; j < k; ++j) {
      row_residual[static_cast<std::size_t>(j)] = cluster_sizes[static_cast<std::size_t>(j)];
      for (int g = 0; g < t; ++g) {
        const std::int64_t num = cluster_sizes[static_cast<std::size_t>(j)] *
                                 group_sizes[static_cast<std::size_t>(g)];
        floor_q[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)] = num / n;
        rem[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)] = num % n;
        row_residual[static_cast<std::size_t>(j)] -= num / n;
      }
    }
    for (int g = 0; g < t; ++g) {
      col_residual[static_cast<std::size_t>(g)] = group_sizes[static_cast<std::size_t>(g)];
      for (int j = 0; j < k; ++j)
        col_residual[static_cast<std::size_t>(g)] -=
            floor_q[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)];
    }

    MinCostFlow rounding(k + t);
    std::vector<std::vector<int>> up_arc(
        static_cast<std::size_t>(k), std::vector<int>(static_cast<std::size_t>(t), -1));
    for (int j = 0; j < k; ++j)
      rounding.set_supply(j, row_residual[static_cast<std::size_t>(j)]);
    for (int g = 0; g < t; ++g)
      rounding.set_supply(k + g, -col_residual[static_cast<std::size_t>(g)]);
    for (int j = 0; j < k; ++j)
      for (int g = 0; g < t; ++g) {
        const std::int64_t r = rem[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)];
        if (r > 0) {
          // Rounding up costs (1 - 2 * frac) relative to rounding down.
          up_arc[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)] = rounding.add_arc(
              j, k + g, 0, 1, static_cast<double>(n - 2 * r));
        }
      }
    rounding.solve();  // always feasible: the fractional point lies inside

    for (int j = 0; j < k; ++j)
      for (int g = 0; g < t; ++g) {
        std::int64_t q = floor_q[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)];
        const int arc = up_arc[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)];
        if (arc >= 0) q += rounding.flow(arc);
        plan.lower[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)] = q;
        plan.upper[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)] = q;
      }
    plan.exact = true;
    return plan;
  }

  const double eps = *relax;
  if (eps < 0.0 || eps >= 1.0) throw DomainError("relaxation must satisfy 0 <= eps < 1");
  plan.exact = false;
  plan.relax_epsilon = eps;
  const auto rho = membership.proportions();
  for (int j = 0; j < k; ++j) {
    const auto size = static_cast<double>(cluster_sizes[static_cast<std::size_t>(j)]);
    for (int g = 0; g < t; ++g) {
      const double lo = (rho[static_cast<std::size_t>(g)] - eps) * size;
      const double hi = (rho[static_cast<std::size_t>(g)] + eps) * size;
      plan.lower[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)] =
          std::max<std::int64_t>(0, snapped_ceil(lo));
      plan.upper[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)] =
          std::min<std::int64_t>(cluster_sizes[static_cast<std::size_t>(j)], snapped_floor(hi));
    }
  }

  // Aggregate feasibility first, for actionable errors.
  for (int j = 0; j < k; ++j) {
    std::int64_t lo = 0, hi = 0;
    for (int g = 0; g < t; ++g) {
      lo += plan.lower[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)];
      hi += plan.upper[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)];
    }
    if (cluster_sizes[static_cast<std::size_t>(j)] < lo ||
        cluster_sizes[static_cast<std::size_t>(j)] > hi)
      throw InfeasibleError(
          "cluster " + std::to_string(j) + " size " +
          std::to_string(cluster_sizes[static_cast<std::size_t>(j)]) +
          " outside quota aggregate [" + std::to_string(lo) + ", " + std::to_string(hi) +
          "]; widen epsilon");
  }
  for (int g = 0; g < t; ++g) {
    std::int64_t lo = 0, hi = 0;
    for (int j = 0; j < k; ++j) {
      lo += plan.lower[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)];
      hi += plan.upper[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)];
    }
    if (group_sizes[static_cast<std::size_t>(g)] < lo ||
        group_sizes[static_cast<std::size_t>(g)] > hi)
      throw InfeasibleError("group " + std::to_string(g) + " size " +
                            std::to_string(group_sizes[static_cast<std::size_t>(g)]) +
                            " outside quota aggregate [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "]; widen epsilon");
  }

  // Full integral feasibility of the (group -> cluster) transportation.
  MinCostFlow feasibility(k + t);
  for (int g = 0; g < t; ++g)
    feasibility.set_supply(g, group_sizes[static_cast<std::size_t>(g)]);
  for (int j = 0; j < k; ++j)
    feasibility.set_supply(t + j, -cluster_sizes[static_cast<std::size_t>(j)]);
  for (int g = 0; g < t; ++g)
    for (int j = 0; j < k; ++j)
      feasibility.add_arc(g, t + j,
                          plan.lower[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)],
                          plan.upper[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)],
                          0.0);
  try {
    feasibility.solve();
  } catch (const InfeasibleError&) {
    throw InfeasibleError(
        "quota bounds admit no integral point matching cluster and group totals at epsilon " +
        std::to_string(eps) + "; widen epsilon");
  }
  return plan;
}

FairFlowNetwork build_network(const Matrix& soft, const GroupMembership& membership,
                              const QuotaPlan& plan) {
  check_soft_matrix(soft);
  membership.validate();
  const int n = static_cast<int>(soft.rows());
  const int k = static_cast<int>(soft.cols());
  const int t = membership.num_groups;
  if (membership.size() != n) throw DomainError("membership length does not match soft assignment rows");
  if (plan.clusters() != k || plan.groups() != t)
    throw DomainError("quota plan shape does not match instance data");
  std::int64_t total = 0;
  for (std::int64_t s : plan.cluster_sizes) total += s;
  if (total != n) throw DomainError("quota plan cluster sizes do not sum to the instance count");

  FairFlowNetwork net;
  net.n = n;
  net.k = k;
  net.t = t;
  // Node layout: [0, n) instances, then (group, cluster) pairs, then
  // clusters, then the sink.
  const int gc_base = n;
  const int cluster_base = n + t * k;
  const int sink = cluster_base + k;
  net.flow = MinCostFlow(sink + 1);

  for (int i = 0; i < n; ++i) net.flow.set_supply(i, 1);
  net.flow.set_supply(sink, -static_cast<std::int64_t>(n));

  net.instance_arcs.assign(static_cast<std::size_t>(n),
                           std::vector<int>(static_cast<std::size_t>(k), -1));
  net.instance_costs.assign(static_cast<std::size_t>(n),
                            std::vector<double>(static_cast<std::size_t>(k), 0.0));
  for (int i = 0; i < n; ++i) {
    const int g = membership.group[static_cast<std::size_t>(i)];
    for (int j = 0; j < k; ++j) {
      const double cost = 1.0 - soft(i, j);
      net.instance_arcs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          net.flow.add_arc(i, gc_base + g * k + j, 0, 1, cost);
      net.instance_costs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = cost;
    }
  }
  for (int g = 0; g < t; ++g)
    for (int j = 0; j < k; ++j)
      net.flow.add_arc(gc_base + g * k + j, cluster_base + j,
                       plan.lower[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)],
                       plan.upper[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)],
                       0.0);
  for (int j = 0; j < k; ++j)
    net.flow.add_arc(cluster_base + j, sink, plan.cluster_sizes[static_cast<std::size_t>(j)],
                     plan.cluster_sizes[static_cast<std::size_t>(j)], 0.0);
  return net;
}

double FairFlowNetwork::cost_of_labels(const std::vector<int>& labels) const {
  if (static_cast<int>(labels.size()) != n) throw DomainError("label count mismatch");
  double cost = 0.0;
  for (int i = 0; i < n; ++i)
    cost += instance_costs[static_cast<std::size_t>(i)][static_cast<std::size_t>(
        labels[static_cast<std::size_t>(i)])];
  return cost;
}

double assignment_cost(const Matrix& soft, const std::vector<int>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != soft.rows())
    throw DomainError("label count does not match soft assignment rows");
  double cost = 0.0;
  for (Eigen::Index i = 0; i < soft.rows(); ++i)
    cost += 1.0 - soft(i, labels[static_cast<std::size_t>(i)]);
  return cost;
}

FairAssignResult solve_with_plan(const Matrix& soft, const GroupMembership& membership,
                                 const QuotaPlan& plan) {
  FairFlowNetwork net = build_network(soft, membership, plan);
  net.flow.solve();

  FairAssignResult result;
  result.plan = plan;
  result.assignment.num_clusters = net.k;
  result.assignment.labels.resize(static_cast<std::size_t>(net.n), -1);
  for (int i = 0; i < net.n; ++i) {
    for (int j = 0; j < net.k; ++j) {
      if (net.flow.flow(net.instance_arcs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) == 1) {
        if (result.assignment.labels[static_cast<std::size_t>(i)] != -1)
          throw NumericError("instance " + std::to_string(i) + " assigned twice");
        result.assignment.labels[static_cast<std::size_t>(i)] = j;
      }
    }
    if (result.assignment.labels[static_cast<std::size_t>(i)] == -1)
      throw NumericError("instance " + std::to_string(i) + " left unassigned");
  }
  if (!plan.satisfied_by(result.assignment, membership))
    throw NumericError("solved assignment violates its quota plan");
  result.objective = assignment_cost(soft, result.assignment.labels);
  return result;
}

FairAssignResult solve_fair_assignment(const Matrix& soft, const GroupMembership& membership,
                                       std::optional<double> relax) {
  const HardAssignment rounded = round_assignment(soft);
  const QuotaPlan plan = plan_quotas(rounded.cluster_sizes(), membership, relax);
  return solve_with_plan(soft, membership, plan);
}

namespace {

struct BruteState {
  const Matrix& soft;
  const GroupMembership& membership;
  const QuotaPlan& plan;
  std::vector<std::int64_t> cluster_left;
  std::vector<std::vector<std::int64_t>> counts;  // clusters x groups
  std::vector<int> labels;
  std::vector<int> best_labels;
  double best_cost = std::numeric_limits<double>::infinity();
  bool found = false;

  void search(int i, double cost) {
    if (cost >= best_cost) return;
    const int n = static_cast<int>(soft.rows());
    const int k = plan.clusters();
    if (i == n) {
      for (int j = 0; j < k; ++j)
        for (int g = 0; g < plan.groups(); ++g)
          if (counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)] <
              plan.lower[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)])
            return;
      best_cost = cost;
      best_labels = labels;
      found = true;
      return;
    }
    const int g = membership.group[static_cast<std::size_t>(i)];
    for (int j = 0; j < k; ++j) {
      if (cluster_left[static_cast<std::size_t>(j)] == 0) continue;
      if (counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)] >=
          plan.upper[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)])
        continue;
      --cluster_left[static_cast<std::size_t>(j)];
      ++counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)];
      labels[static_cast<std::size_t>(i)] = j;
      search(i + 1, cost + 1.0 - soft(i, j));
      ++cluster_left[static_cast<std::size_t>(j)];
      --counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)];
    }
  }
};

}  // namespace

FairAssignResult brute_force_assign(const Matrix& soft, const GroupMembership& membership,
                                    const QuotaPlan& plan, int max_instances) {
  check_soft_matrix(soft);
  const int n = static_cast<int>(soft.rows());
  if (n > max_instances)
    throw DomainError("brute force refuses " + std::to_string(n) + " instances (cap " +
                      std::to_string(max_instances) + ")");
  if (plan.clusters() != static_cast<int>(soft.cols()))
    throw DomainError("quota plan cluster count mismatch");

  BruteState state{soft, membership, plan, plan.cluster_sizes,
                   std::vector<std::vector<std::int64_t>>(
                       static_cast<std::size_t>(plan.clusters()),
                       std::vector<std::int64_t>(static_cast<std::size_t>(plan.groups()), 0)),
                   std::vector<int>(static_cast<std::size_t>(n), -1),
                   {}};
  state.search(0, 0.0);
  if (!state.found) throw InfeasibleError("no labeling satisfies the quota plan");

  FairAssignResult result;
  result.plan = plan;
  result.assignment.num_clusters = plan.clusters();
  result.assignment.labels = state.best_labels;
  result.objective = assignment_cost(soft, state.best_labels);
  return result;
}

IntMatrix constraint_matrix(const GroupMembership& membership, int num_clusters) {
  membership.validate();
  if (num_clusters < 1) throw DomainError("need at least one cluster");
  const int n = membership.size();
  const int t = membership.num_groups;
  IntMatrix mat(static_cast<std::size_t>(t + 1),
                std::vector<int>(static_cast<std::size_t>(n + num_clusters), 0));
  for (int i = 0; i < n; ++i)
    mat[static_cast<std::size_t>(membership.group[static_cast<std::size_t>(i)])]
       [static_cast<std::size_t>(i)] = 1;
  for (int j = 0; j < num_clusters; ++j)
    mat[static_cast<std::size_t>(t)][static_cast<std::size_t>(n + j)] = 1;
  return mat;
}

namespace {

std::int64_t int_det(const std::vector<std::vector<std::int64_t>>& m, int order) {
  if (order == 1) return m[0][0];
  if (order == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  std::int64_t det = 0;
  std::vector<std::vector<std::int64_t>> minor(
      static_cast<std::size_t>(order - 1),
      std::vector<std::int64_t>(static_cast<std::size_t>(order - 1), 0));
  for (int c = 0; c < order; ++c) {
    if (m[0][static_cast<std::size_t>(c)] == 0) continue;
    for (int r = 1; r < order; ++r) {
      int mc = 0;
      for (int cc = 0; cc < order; ++cc) {
        if (cc == c) continue;
        minor[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(mc++)] =
            m[static_cast<std::size_t>(r)][static_cast<std::size_t>(cc)];
      }
    }
    const std::int64_t cofactor = int_det(minor, order - 1);
    det += ((c % 2 == 0) ? 1 : -1) * m[0][static_cast<std::size_t>(c)] * cofactor;
  }
  return det;
}

bool next_combination(std::vector<int>& idx, int limit) {
  const int m = static_cast<int>(idx.size());
  for (int i = m - 1; i >= 0; --i) {
    if (idx[static_cast<std::size_t>(i)] < limit - (m - i)) {
      ++idx[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < m; ++j)
        idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

bool verify_tu(const IntMatrix& matrix, int max_order) {
  const int rows = static_cast<int>(matrix.size());
  if (rows == 0) return true;
  const int cols = static_cast<int>(matrix[0].size());
  for (const auto& row : matrix) {
    if (static_cast<int>(row.size()) != cols) throw DomainError("ragged matrix");
    for (int v : row)
      if (v < -1 || v > 1) throw DomainError("entries must lie in {-1, 0, 1}");
  }

  std::vector<std::vector<std::int64_t>> sub;
  for (int order = 1; order <= std::min({max_order, rows, cols}); ++order) {
    sub.assign(static_cast<std::size_t>(order),
               std::vector<std::int64_t>(static_cast<std::size_t>(order), 0));
    std::vector<int> row_idx(static_cast<std::size_t>(order));
    for (int i = 0; i < order; ++i) row_idx[static_cast<std::size_t>(i)] = i;
    do {
      std::vector<int> col_idx(static_cast<std::size_t>(order));
      for (int i = 0; i < order; ++i) col_idx[static_cast<std::size_t>(i)] = i;
      do {
        for (int r = 0; r < order; ++r)
          for (int c = 0; c < order; ++c)
            sub[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
                matrix[static_cast<std::size_t>(row_idx[static_cast<std::size_t>(r)])]
                      [static_cast<std::size_t>(col_idx[static_cast<std::size_t>(c)])];
        const std::int64_t det = int_det(sub, order);
        if (det < -1 || det > 1) return false;
      } while (next_combination(col_idx, cols));
    } while (next_combination(row_idx, rows));
  }
  return true;
}

}  // namespace fairclust
