#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "fairclust/flow.hpp"

namespace fairclust {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Protected-group membership: one group id in [0, num_groups) per instance.
struct GroupMembership {
  std::vector<int> group;
  int num_groups = 0;

  static GroupMembership from_ids(std::vector<int> ids);
  static GroupMembership from_ids(std::vector<int> ids, int num_groups);

  int size() const { return static_cast<int>(group.size()); }
  std::vector<std::int64_t> group_sizes() const;
  std::vector<double> proportions() const;
  Eigen::MatrixXd one_hot() const;
  void validate() const;
};

/// One cluster id in [0, num_clusters) per instance.
struct HardAssignment {
  std::vector<int> labels;
  int num_clusters = 0;

  int size() const { return static_cast<int>(labels.size()); }
  std::vector<std::int64_t> cluster_sizes() const;
  void validate() const;
};

/// Per-(cluster, group) integral count bounds. Exact plans have lower ==
/// upper with row sums equal to cluster sizes and column sums equal to group
/// sizes; relaxed plans carry the interval bounds induced by epsilon.
struct QuotaPlan {
  std::vector<std::int64_t> cluster_sizes;
  std::vector<std::vector<std::int64_t>> lower;  // clusters x groups
  std::vector<std::vector<std::int64_t>> upper;
  bool exact = true;
  double relax_epsilon = 0.0;

  int clusters() const { return static_cast<int>(cluster_sizes.size()); }
  int groups() const { return lower.empty() ? 0 : static_cast<int>(lower[0].size()); }
  bool satisfied_by(const HardAssignment& assign, const GroupMembership& membership) const;
};

/// Per-row argmax; ties resolve to the lowest cluster index.
HardAssignment round_assignment(const Matrix& soft);

/// Exact mode (no relax): controlled rounding of the proportional targets
/// |C_j| * rho_t preserving both cluster sizes and group totals, minimizing
/// the total rounding distance. Relaxed mode: interval bounds
/// [ceil((rho_t - eps) |C_j|), floor((rho_t + eps) |C_j|)] clamped to
/// [0, |C_j|], with integral feasibility verified.
QuotaPlan plan_quotas(const std::vector<std::int64_t>& cluster_sizes,
                      const GroupMembership& membership,
                      std::optional<double> relax = std::nullopt);

/// Flow encoding of the minimum-change fair assignment:
///   instance i  --[0,1] cost 1-y_ij-->  (group(i), j)
///   (t, j)      --[L_jt, U_jt] cost 0--> cluster j
///   cluster j   --[|C_j|, |C_j|] cost 0--> sink
/// Any integral feasible flow is a feasible assignment with flow cost equal
/// to the relabeling objective sum_i (1 - y[i][label_i]).
struct FairFlowNetwork {
  MinCostFlow flow;
  int n = 0, k = 0, t = 0;
  std::vector<std::vector<int>> instance_arcs;  // n x k arc ids

  int arc_count() const { return n * k + k * t + k; }
  /// Cost of the flow a given labeling would induce (instance arcs only).
  double cost_of_labels(const std::vector<int>& labels) const;

  std::vector<std::vector<double>> instance_costs;  // mirrors arc costs
};

FairFlowNetwork build_network(const Matrix& soft, const GroupMembership& membership,
                              const QuotaPlan& plan);

struct FairAssignResult {
  HardAssignment assignment;
  double objective = 0.0;  // sum_i (1 - y[i][label_i]), summed in row order
  QuotaPlan plan;
};

/// Relabeling objective of a given hard labeling, summed in row order.
double assignment_cost(const Matrix& soft, const std::vector<int>& labels);

FairAssignResult solve_with_plan(const Matrix& soft, const GroupMembership& membership,
                                 const QuotaPlan& plan);

/// round_assignment -> plan_quotas -> build_network -> min-cost solve.
FairAssignResult solve_fair_assignment(const Matrix& soft,
                                       const GroupMembership& membership,
                                       std::optional<double> relax = std::nullopt);

/// Exhaustive optimum over all labelings satisfying `plan`; ties resolve to
/// the lexicographically smallest label vector. Refuses n > max_instances.
FairAssignResult brute_force_assign(const Matrix& soft, const GroupMembership& membership,
                                    const QuotaPlan& plan, int max_instances = 12);

using IntMatrix = std::vector<std::vector<int>>;

/// (T+1) x (N+K) coefficient matrix of the assignment constraints: row t
/// marks group-t instances, the last row marks the K cluster columns. Every
/// column carries exactly one non-zero entry.
IntMatrix constraint_matrix(const GroupMembership& membership, int num_clusters);

/// True iff every square submatrix of order <= max_order has determinant in
/// {-1, 0, 1}. Exhaustive; intended for small test matrices only.
bool verify_tu(const IntMatrix& matrix, int max_order);

}  // namespace fairclust
