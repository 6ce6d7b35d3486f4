#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fairclust/fair_assign.hpp"

namespace fairclust {

/// Per-(cluster, group) counts with derived in-cluster proportions.
struct GroupComposition {
  std::vector<std::vector<std::int64_t>> counts;  // clusters x groups
  std::vector<std::int64_t> cluster_sizes;

  static GroupComposition from(const HardAssignment& assign, const GroupMembership& membership);
};

struct BalanceReport {
  double overall = 0.0;
  std::vector<double> per_cluster;
};

/// Per cluster min/max group count ratio; 0 for empty clusters or clusters
/// missing a group entirely. Overall value is the minimum over clusters.
BalanceReport balance(const HardAssignment& assign, const GroupMembership& membership);

/// Per cluster min over groups of min(rho_t / rho_t(k), rho_t(k) / rho_t);
/// 0 when a group is absent from the cluster. Overall is the minimum.
BalanceReport fairness(const HardAssignment& assign, const GroupMembership& membership);

/// Clustering accuracy under the best cluster-to-class matching (square
/// zero-padded contingency, solved as an assignment problem).
double accuracy(const HardAssignment& assign, const std::vector<int>& truth);

enum class NmiNorm { Arithmetic, Geometric };

/// Mutual information normalized by the mean of the two partition entropies.
/// Partitions identical up to relabeling score exactly 1.
double nmi(const HardAssignment& assign, const std::vector<int>& truth,
           NmiNorm norm = NmiNorm::Arithmetic);

struct MetricsReport {
  std::optional<double> accuracy;
  std::optional<double> nmi;
  double balance = 0.0;
  double fairness = 0.0;
  std::vector<double> balance_per_cluster;
  std::vector<double> fairness_per_cluster;
  int epoch = -1;
};

MetricsReport evaluate(const HardAssignment& assign, const GroupMembership& membership,
                       const std::vector<int>* truth = nullptr, int epoch = -1);

}  // namespace fairclust
