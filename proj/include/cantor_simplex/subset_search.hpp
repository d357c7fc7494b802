#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cantor_simplex/measured_algebra.hpp"

namespace cantor_simplex {

/// Counts visited search nodes so callers can bound exponential searches.
struct SearchBudget {
  std::size_t max_nodes = 200000;
  std::size_t used = 0;
  bool exhausted() const { return used >= max_nodes; }
};

/// Lowest-index subset of `items` whose exact sum is `target`, by
/// include-first depth-first search. Returns indices in increasing order,
/// or nullopt if none exists or the budget runs out (check budget.exhausted()).
inline std::optional<std::vector<std::size_t>> find_subset_sum(const std::vector<MeasureVector>& items,
                                                               const MeasureVector& target, SearchBudget& budget) {
  const std::size_t n = items.size();
  const std::size_t k = target.size();
  std::vector<MeasureVector> suffix(n + 1, MeasureVector::zeros(k));
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + items[i];
  if (!target.le(suffix[0])) return std::nullopt;

  std::vector<std::size_t> chosen;
  MeasureVector remaining = target;
  // Iterative DFS; `decision[i]` is 1 while item i is included, 0 once excluded.
  std::vector<int> decision;
  std::size_t i = 0;
  auto backtrack = [&]() -> bool {
    while (!decision.empty()) {
      std::size_t j = decision.size() - 1;
      if (decision[j] == 1) {
        decision[j] = 0;
        remaining += items[j];
        chosen.pop_back();
        i = j + 1;
        return true;
      }
      decision.pop_back();
    }
    return false;
  };
  while (true) {
    if (++budget.used > budget.max_nodes) return std::nullopt;
    if (remaining.all_zero()) return chosen;
    bool dead = i >= n || !remaining.le(suffix[i]);
    if (!dead && items[i].le(remaining)) {
      decision.push_back(1);
      chosen.push_back(i);
      remaining -= items[i];
      ++i;
      continue;
    }
    if (!dead) {
      decision.push_back(0);
      ++i;
      continue;
    }
    if (!backtrack()) return std::nullopt;
  }
}

/// Splits `items` into groups with the given exact sums (which must add up
/// to the total of `items`), one group at a time, each by find_subset_sum over
/// the items still unassigned. Greedy across groups: no backtracking between
/// groups, so a nullopt with an unexhausted budget is not a proof of absence.
inline std::optional<std::vector<std::vector<std::size_t>>> find_partition(const std::vector<MeasureVector>& items,
                                                                          const std::vector<MeasureVector>& targets,
                                                                          SearchBudget& budget) {
  std::vector<std::size_t> free_idx(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) free_idx[i] = i;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (t + 1 == targets.size()) {
      MeasureVector rest = MeasureVector::zeros(targets[t].size());
      for (auto i : free_idx) rest += items[i];
      if (!(rest == targets[t]) || free_idx.empty()) return std::nullopt;
      groups.push_back(free_idx);
      break;
    }
    std::vector<MeasureVector> pool;
    for (auto i : free_idx) pool.push_back(items[i]);
    auto hit = find_subset_sum(pool, targets[t], budget);
    if (!hit || hit->empty()) return std::nullopt;
    std::vector<std::size_t> group, keep;
    std::size_t h = 0;
    for (std::size_t p = 0; p < free_idx.size(); ++p) {
      if (h < hit->size() && (*hit)[h] == p) {
        group.push_back(free_idx[p]);
        ++h;
      } else {
        keep.push_back(free_idx[p]);
      }
    }
    groups.push_back(std::move(group));
    free_idx = std::move(keep);
  }
  return groups;
}

}  // namespace cantor_simplex
