#include "fairclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairclust/errors.hpp"
#include "fairclust/flow.hpp"

namespace fairclust {

namespace {

std::vector<std::vector<std::int64_t>> contingency(const std::vector<int>& a, int ka,
                                                   const std::vector<int>& b, int kb) {
  std::vector<std::vector<std::int64_t>> table(
      static_cast<std::size_t>(ka), std::vector<std::int64_t>(static_cast<std::size_t>(kb), 0));
  for (std::size_t i = 0; i < a.size(); ++i)
    ++table[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(b[i])];
  return table;
}

int max_label(const std::vector<int>& labels) {
  int m = -1;
  for (int v : labels) {
    if (v < 0) throw DomainError("negative class label");
    m = std::max(m, v);
  }
  return m;
}

}  // namespace

GroupComposition GroupComposition::from(const HardAssignment& assign,
                                        const GroupMembership& membership) {
  assign.validate();
  membership.validate();
  if (assign.size() != membership.size())
    throw DomainError("assignment and membership lengths differ");
  GroupComposition comp;
  comp.counts = contingency(assign.labels, assign.num_clusters, membership.group,
                            membership.num_groups);
  comp.cluster_sizes.assign(static_cast<std::size_t>(assign.num_clusters), 0);
  for (int k = 0; k < assign.num_clusters; ++k)
    for (int t = 0; t < membership.num_groups; ++t)
      comp.cluster_sizes[static_cast<std::size_t>(k)] +=
          comp.counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)];
  return comp;
}

BalanceReport balance(const HardAssignment& assign, const GroupMembership& membership) {
  const GroupComposition comp = GroupComposition::from(assign, membership);
  BalanceReport report;
  report.overall = 1.0;
  for (int k = 0; k < assign.num_clusters; ++k) {
    double value = 0.0;
    if (comp.cluster_sizes[static_cast<std::size_t>(k)] > 0) {
      std::int64_t lo = comp.counts[static_cast<std::size_t>(k)][0];
      std::int64_t hi = lo;
      for (int t = 1; t < membership.num_groups; ++t) {
        lo = std::min(lo, comp.counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)]);
        hi = std::max(hi, comp.counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)]);
      }
      value = (hi > 0 && lo > 0) ? static_cast<double>(lo) / static_cast<double>(hi) : 0.0;
    }
    report.per_cluster.push_back(value);
    report.overall = std::min(report.overall, value);
  }
  return report;
}

BalanceReport fairness(const HardAssignment& assign, const GroupMembership& membership) {
  const GroupComposition comp = GroupComposition::from(assign, membership);
  const auto rho = membership.proportions();
  BalanceReport report;
  report.overall = 1.0;
  for (int k = 0; k < assign.num_clusters; ++k) {
    double value = 0.0;
    const std::int64_t size = comp.cluster_sizes[static_cast<std::size_t>(k)];
    if (size > 0) {
      value = 1.0;
      for (int t = 0; t < membership.num_groups; ++t) {
        const double in_cluster =
            static_cast<double>(
                comp.counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)]) /
            static_cast<double>(size);
        if (in_cluster <= 0.0 || rho[static_cast<std::size_t>(t)] <= 0.0) {
          value = 0.0;
          break;
        }
        value = std::min(value, std::min(rho[static_cast<std::size_t>(t)] / in_cluster,
                                         in_cluster / rho[static_cast<std::size_t>(t)]));
      }
    }
    report.per_cluster.push_back(value);
    report.overall = std::min(report.overall, value);
  }
  return report;
}

double accuracy(const HardAssignment& assign, const std::vector<int>& truth) {
  assign.validate();
  if (assign.labels.size() != truth.size())
    throw DomainError("assignment and ground-truth lengths differ");
  if (truth.empty()) throw DomainError("empty labeling");
  const int classes = max_label(truth) + 1;
  const auto table = contingency(assign.labels, assign.num_clusters, truth, classes);

  // Square zero-padded assignment problem on negated counts, solved with the
  // same flow machinery as the fair-assignment program.
  const int side = std::max(assign.num_clusters, classes);
  MinCostFlow flow(2 * side);
  for (int i = 0; i < side; ++i) flow.set_supply(i, 1);
  for (int j = 0; j < side; ++j) flow.set_supply(side + j, -1);
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) {
      const std::int64_t count =
          (i < assign.num_clusters && j < classes)
              ? table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
              : 0;
      flow.add_arc(i, side + j, 0, 1, -static_cast<double>(count));
    }
  const double matched = -flow.solve();
  return matched / static_cast<double>(truth.size());
}

double nmi(const HardAssignment& assign, const std::vector<int>& truth, NmiNorm norm) {
  assign.validate();
  if (assign.labels.size() != truth.size())
    throw DomainError("assignment and ground-truth lengths differ");
  if (truth.empty()) throw DomainError("empty labeling");
  const int classes = max_label(truth) + 1;
  const auto table = contingency(assign.labels, assign.num_clusters, truth, classes);
  const auto n = static_cast<double>(truth.size());

  // Identical up to relabeling: every nonzero row and column is a singleton.
  bool permutation = true;
  for (int i = 0; i < assign.num_clusters && permutation; ++i) {
    int nonzero = 0;
    for (int j = 0; j < classes; ++j)
      if (table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] > 0) ++nonzero;
    if (nonzero > 1) permutation = false;
  }
  for (int j = 0; j < classes && permutation; ++j) {
    int nonzero = 0;
    for (int i = 0; i < assign.num_clusters; ++i)
      if (table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] > 0) ++nonzero;
    if (nonzero > 1) permutation = false;
  }
  if (permutation) return 1.0;

  std::vector<double> row(static_cast<std::size_t>(assign.num_clusters), 0.0);
  std::vector<double> col(static_cast<std::size_t>(classes), 0.0);
  for (int i = 0; i < assign.num_clusters; ++i)
    for (int j = 0; j < classes; ++j) {
      row[static_cast<std::size_t>(i)] +=
          static_cast<double>(table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      col[static_cast<std::size_t>(j)] +=
          static_cast<double>(table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }

  double information = 0.0;
  for (int i = 0; i < assign.num_clusters; ++i)
    for (int j = 0; j < classes; ++j) {
      const auto count = static_cast<double>(
          table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      if (count <= 0.0) continue;
      const double joint = count / n;
      information += joint * std::log(joint * n * n /
                                      (row[static_cast<std::size_t>(i)] *
                                       col[static_cast<std::size_t>(j)]));
    }
  double h_row = 0.0, h_col = 0.0;
  for (double r : row)
    if (r > 0.0) h_row -= (r / n) * std::log(r / n);
  for (double c : col)
    if (c > 0.0) h_col -= (c / n) * std::log(c / n);

  if (h_row == 0.0 && h_col == 0.0) return 1.0;  // both trivial partitions
  const double denom = (norm == NmiNorm::Arithmetic) ? 0.5 * (h_row + h_col)
                                                     : std::sqrt(h_row * h_col);
  if (denom == 0.0) return 0.0;
  return std::clamp(information / denom, 0.0, 1.0);
}

MetricsReport evaluate(const HardAssignment& assign, const GroupMembership& membership,
                       const std::vector<int>* truth, int epoch) {
  MetricsReport report;
  report.epoch = epoch;
  const BalanceReport b = balance(assign, membership);
  const BalanceReport f = fairness(assign, membership);
  report.balance = b.overall;
  report.fairness = f.overall;
  report.balance_per_cluster = b.per_cluster;
  report.fairness_per_cluster = f.per_cluster;
  if (truth != nullptr) {
    report.accuracy = accuracy(assign, *truth);
    report.nmi = nmi(assign, *truth);
  }
  return report;
}

}  // namespace fairclust
