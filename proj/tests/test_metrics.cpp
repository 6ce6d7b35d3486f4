#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fairclust/errors.hpp"
#include "fairclust/metrics.hpp"
#include "test_util.hpp"

using namespace fairclust;
using fairclust::testing::random_membership;

namespace {

HardAssignment assign_of(std::vector<int> labels, int k) { return HardAssignment{std::move(labels), k}; }

// Builds an (assignment, membership) pair realizing the given per-cluster
// group counts.
std::pair<HardAssignment, GroupMembership> from_counts(
    const std::vector<std::vector<int>>& counts) {
  std::vector<int> labels, groups;
  for (std::size_t k = 0; k < counts.size(); ++k)
    for (std::size_t t = 0; t < counts[k].size(); ++t)
      for (int c = 0; c < counts[k][t]; ++c) {
        labels.push_back(static_cast<int>(k));
        groups.push_back(static_cast<int>(t));
      }
  return {HardAssignment{labels, static_cast<int>(counts.size())},
          GroupMembership::from_ids(groups, static_cast<int>(counts[0].size()))};
}

}  // namespace

TEST_CASE("balance: single balanced cluster scores 1") {
  const auto [assign, membership] = from_counts({{3, 3}});
  CHECK(balance(assign, membership).overall == doctest::Approx(1.0));
}

TEST_CASE("balance: (2,1)/(1,2) composition scores 0.5") {
  const auto [assign, membership] = from_counts({{2, 1}, {1, 2}});
  const BalanceReport report = balance(assign, membership);
  CHECK(report.overall == doctest::Approx(0.5));
  CHECK(report.per_cluster[0] == doctest::Approx(0.5));
  CHECK(report.per_cluster[1] == doctest::Approx(0.5));
}

TEST_CASE("balance: proportional 60000/7291 split over 10 clusters") {
  // Nine clusters of (6000, 729), one of (6000, 730).
  std::vector<std::vector<int>> counts(10, {6000, 729});
  counts[9][1] = 730;
  const auto [assign, membership] = from_counts(counts);
  const BalanceReport report = balance(assign, membership);
  CHECK(report.overall == doctest::Approx(0.1215).epsilon(1e-12));
  CHECK(std::abs(report.overall - 7291.0 / 60000.0) < 5e-4);
}

TEST_CASE("balance: missing groups and empty clusters score 0") {
  const auto [assign, membership] = from_counts({{3, 0}, {1, 4}});
  CHECK(balance(assign, membership).per_cluster[0] == 0.0);
  CHECK(balance(assign, membership).overall == 0.0);

  // Cluster 2 exists but is empty.
  const HardAssignment sparse{{0, 0, 1, 1}, 3};
  const auto groups = GroupMembership::from_ids({0, 1, 0, 1}, 2);
  const BalanceReport report = balance(sparse, groups);
  CHECK(report.per_cluster[2] == 0.0);
  CHECK(report.overall == 0.0);
}

TEST_CASE("balance equals the binary formula for T=2") {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 6 + static_cast<int>(rng.below(20));
    const int k = 2 + static_cast<int>(rng.below(3));
    const auto membership = random_membership(n, 2, rng);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(k));
    const HardAssignment assign{labels, k};
    const BalanceReport report = balance(assign, membership);
    for (int c = 0; c < k; ++c) {
      std::int64_t n1 = 0, n2 = 0;
      for (int i = 0; i < n; ++i)
        if (labels[static_cast<std::size_t>(i)] == c)
          (membership.group[static_cast<std::size_t>(i)] == 0 ? n1 : n2) += 1;
      double expected = 0.0;
      if (n1 > 0 && n2 > 0)
        expected = std::min(static_cast<double>(n1) / static_cast<double>(n2),
                            static_cast<double>(n2) / static_cast<double>(n1));
      CHECK(report.per_cluster[static_cast<std::size_t>(c)] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("fairness: proportional composition scores 1") {
  const auto [assign, membership] = from_counts({{2, 4}, {3, 6}});
  CHECK(fairness(assign, membership).overall == doctest::Approx(1.0));
}

TEST_CASE("fairness: (3,1) cluster under even proportions scores 0.5") {
  const auto [assign, membership] = from_counts({{3, 1}, {1, 3}});
  const BalanceReport report = fairness(assign, membership);
  // Group ratios per cluster: group 1 gives min(0.5/0.75, 0.75/0.5) = 2/3,
  // group 2 gives min(0.5/0.25, 0.25/0.5) = 1/2.
  CHECK(report.per_cluster[0] == doctest::Approx(0.5));
  CHECK(report.overall == doctest::Approx(0.5));
}

TEST_CASE("fairness: a cluster missing a group scores 0") {
  const auto [assign, membership] = from_counts({{2, 0}, {2, 4}});
  CHECK(fairness(assign, membership).per_cluster[0] == 0.0);
}

TEST_CASE("accuracy: identity- and permutation-aligned assignments score exactly 1") {
  const std::vector<int> truth{0, 1, 2, 0, 1, 2};
  CHECK(accuracy(assign_of({0, 1, 2, 0, 1, 2}, 3), truth) == 1.0);
  CHECK(accuracy(assign_of({2, 0, 1, 2, 0, 1}, 3), truth) == 1.0);
}

TEST_CASE("accuracy: contingency [[2,1],[0,3]] scores 5/6") {
  const std::vector<int> truth{0, 0, 1, 1, 1, 1};
  const HardAssignment assign = assign_of({0, 0, 0, 1, 1, 1}, 2);
  CHECK(accuracy(assign, truth) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("accuracy: rectangular contingency pads to square") {
  const std::vector<int> truth{0, 1, 1, 0};
  const HardAssignment assign = assign_of({0, 1, 2, 2}, 3);
  // Best matching: cluster0->class0 (1) + cluster1->class1 (1), cluster2 pads.
  CHECK(accuracy(assign, truth) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("nmi: identical and permuted partitions score exactly 1") {
  const std::vector<int> truth{0, 1, 2, 0, 1, 2};
  CHECK(nmi(assign_of({0, 1, 2, 0, 1, 2}, 3), truth) == 1.0);
  CHECK(nmi(assign_of({1, 2, 0, 1, 2, 0}, 3), truth) == 1.0);
}

TEST_CASE("nmi: independent partitions score 0 within 1e-12") {
  // Product contingency: every (cluster, class) cell has count 2.
  std::vector<int> labels, truth;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int c = 0; c < 2; ++c) {
        labels.push_back(i);
        truth.push_back(j);
      }
  CHECK(nmi(assign_of(labels, 2), truth) <= 1e-12);
}

TEST_CASE("nmi: contingency [[2,0],[1,1]] evaluates to 0.34371") {
  const std::vector<int> truth{0, 0, 0, 1};
  const HardAssignment assign = assign_of({0, 0, 1, 1}, 2);
  CHECK(nmi(assign, truth) == doctest::Approx(0.3437110184854508).epsilon(1e-12));
}

TEST_CASE("nmi: degenerate single-cluster single-class convention") {
  CHECK(nmi(assign_of({0, 0, 0}, 1), {0, 0, 0}) == 1.0);
  CHECK(nmi(assign_of({0, 0, 0}, 1), {0, 1, 0}) == 0.0);
}

TEST_CASE("metrics are invariant under relabeling and stay within [0, 1]") {
  Rng rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 8 + static_cast<int>(rng.below(16));
    const int k = 2 + static_cast<int>(rng.below(3));
    const auto membership = random_membership(n, 2, rng);
    std::vector<int> labels(static_cast<std::size_t>(n)), truth(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(k));
      truth[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(k));
    }
    const HardAssignment assign{labels, k};

    // Cyclic relabeling of clusters.
    std::vector<int> relabeled(labels);
    for (int& v : relabeled) v = (v + 1) % k;
    const HardAssignment shifted{relabeled, k};

    CHECK(balance(assign, membership).overall ==
          doctest::Approx(balance(shifted, membership).overall).epsilon(1e-12));
    CHECK(fairness(assign, membership).overall ==
          doctest::Approx(fairness(shifted, membership).overall).epsilon(1e-12));
    CHECK(accuracy(assign, truth) == doctest::Approx(accuracy(shifted, truth)).epsilon(1e-12));
    CHECK(nmi(assign, truth) == doctest::Approx(nmi(shifted, truth)).epsilon(1e-12));

    // Relabeling the classes.
    std::vector<int> truth_shifted(truth);
    for (int& v : truth_shifted) v = (v + 1) % k;
    CHECK(accuracy(assign, truth) == doctest::Approx(accuracy(assign, truth_shifted)).epsilon(1e-12));
    CHECK(nmi(assign, truth) == doctest::Approx(nmi(assign, truth_shifted)).epsilon(1e-12));

    for (double v : {balance(assign, membership).overall, fairness(assign, membership).overall,
                     accuracy(assign, truth), nmi(assign, truth)}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("evaluate bundles the four metrics") {
  const auto membership = GroupMembership::from_ids({0, 1, 0, 1}, 2);
  const std::vector<int> truth{0, 0, 1, 1};
  const MetricsReport report = evaluate(assign_of({0, 0, 1, 1}, 2), membership, &truth, 3);
  CHECK(report.epoch == 3);
  CHECK(report.balance == doctest::Approx(1.0));
  CHECK(report.fairness == doctest::Approx(1.0));
  REQUIRE(report.accuracy.has_value());
  CHECK(*report.accuracy == 1.0);
  REQUIRE(report.nmi.has_value());
  CHECK(*report.nmi == 1.0);
  CHECK_THROWS_AS(accuracy(assign_of({0, 0}, 2), truth), DomainError);
}
