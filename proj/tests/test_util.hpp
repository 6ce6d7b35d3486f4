#pragma once

#include <cstdint>
#include <vector>

#include "fairclust/fair_assign.hpp"
#include "fairclust/net.hpp"

namespace fairclust::testing {

/// Random row-stochastic matrix with strictly positive entries.
inline Matrix random_soft(int n, int k, Rng& rng) {
  Matrix soft(n, k);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      soft(i, j) = 0.05 + rng.uniform();
      sum += soft(i, j);
    }
    soft.row(i) /= sum;
  }
  return soft;
}

/// Random membership over t groups, each group guaranteed non-empty when
/// n >= t (first t rows cycle through the groups).
inline GroupMembership random_membership(int n, int t, Rng& rng) {
  std::vector<int> ids(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    ids[static_cast<std::size_t>(i)] =
        (i < t) ? i : static_cast<int>(rng.below(static_cast<std::uint64_t>(t)));
  return GroupMembership::from_ids(std::move(ids), t);
}

}  // namespace fairclust::testing
