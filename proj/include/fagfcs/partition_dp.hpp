// Copyright 2026 The fagfcs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "fagfcs/model.hpp"

namespace fagfcs {

/// Cost of giving sorted agents first..last (0-based, inclusive) facility f.
template <class F>
concept BlockCostFunction = requires(const F& f, std::size_t a, std::size_t b, FacilityIndex j) {
  { f(a, b, j) } -> std::convertible_to<double>;
};

/// A run of consecutive sorted agents sharing one facility.
struct Block {
  std::size_t first = 0;  // inclusive, sorted-agent index
  std::size_t last = 0;   // inclusive
  FacilityIndex facility = 0;

  friend bool operator==(const Block&, const Block&) = default;
};

/// Memo table for MinP(i, j, k) over sorted agents and facilities.
///
/// Indices follow the recurrence: agents and facilities are 1-based, and
/// MinP(i, j, k) is the least total block cost of agents 1..j split into
/// consecutive blocks on strictly increasing facilities from 1..k, where the
/// block holding agent j starts at or before agent i. Entries with j = 0 are
/// 0 (nothing left to place); entries with j >= 1 and i = 0 or k = 0 are
/// infeasible (+inf).
class DpTable {
 public:
  /// Back-pointer: kSkip means agent i-1 joins agent j's block; a positive
  /// value k' means block [i, j] sits on facility k' (1-based).
  static constexpr std::int32_t kSkip = -1;
  static constexpr std::int32_t kUnset = 0;

  DpTable(std::size_t n, std::size_t m)
      : n_(n), m_(m), memo_((n + 1) * (n + 1) * (m + 1)), choice_(memo_.size(), kUnset) {}

  [[nodiscard]] std::size_t agents() const noexcept { return n_; }
  [[nodiscard]] std::size_t facilities() const noexcept { return m_; }

  [[nodiscard]] const std::optional<double>& memo(std::size_t i, std::size_t j, std::size_t k) const {
    return memo_[index(i, j, k)];
  }
  [[nodiscard]] std::int32_t choice(std::size_t i, std::size_t j, std::size_t k) const {
    return choice_[index(i, j, k)];
  }

  /// MinP(i, j, k) including the base cases; i, j, k must already be evaluated.
  [[nodiscard]] double value(std::size_t i, std::size_t j, std::size_t k) const {
    if (j == 0) return 0.0;
    if (i == 0 || k == 0) return std::numeric_limits<double>::infinity();
    return *memo_[index(i, j, k)];
  }

  void set(std::size_t i, std::size_t j, std::size_t k, double v, std::int32_t c) {
    auto& slot = memo_[index(i, j, k)];
    if (slot.has_value()) return;  // entries are write-once
    slot = v;
    choice_[index(i, j, k)] = c;
  }

 private:
  [[nodiscard]] std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return (i * (n_ + 1) + j) * (m_ + 1) + k;
  }

  std::size_t n_;
  std::size_t m_;
  std::vector<std::optional<double>> memo_;
  std::vector<std::int32_t> choice_;
};

struct PartitionSolution {
  double value = 0.0;
  std::vector<Block> blocks;  // left to right
};

/// Fill every reachable MinP(i, j, k) with i <= j.
///
/// Ties keep the skip branch, then the smallest facility k'. Comparisons are
/// strict on raw values.
template <BlockCostFunction Cost>
void fill_partition_table(DpTable& table, const Cost& cost) {
  const std::size_t n = table.agents();
  const std::size_t m = table.facilities();
  for (std::size_t j = 1; j <= n; ++j) {
    for (std::size_t i = 1; i <= j; ++i) {
      for (std::size_t k = 1; k <= m; ++k) {
        double best = table.value(i - 1, j, k);
        std::int32_t choice = DpTable::kSkip;
        for (std::size_t kp = 1; kp <= k; ++kp) {
          const double head = table.value(i - 1, i - 1, kp - 1);
          if (head == std::numeric_limits<double>::infinity()) continue;
          const double candidate = head + static_cast<double>(cost(i - 1, j - 1, kp - 1));
          if (candidate < best) {
            best = candidate;
            choice = static_cast<std::int32_t>(kp);
          }
        }
        table.set(i, j, k, best, choice);
      }
    }
  }
}

/// Walk the back-pointers from MinP(n, n, m).
[[nodiscard]] inline std::vector<Block> recover_blocks(const DpTable& table) {
  std::vector<Block> reversed;
  std::size_t i = table.agents(), j = table.agents(), k = table.facilities();
  while (j > 0) {
    const std::int32_t c = table.choice(i, j, k);
    if (c == DpTable::kSkip) {
      --i;
      continue;
    }
    const auto kp = static_cast<std::size_t>(c);
    reversed.push_back(Block{i - 1, j - 1, kp - 1});
    j = i - 1;
    i = i - 1;
    k = kp - 1;
  }
  return {reversed.rbegin(), reversed.rend()};
}

/// Minimum-cost split of n sorted agents into consecutive blocks on
/// left-to-right facilities.
template <BlockCostFunction Cost>
[[nodiscard]] PartitionSolution solve_consecutive_partition(std::size_t n, std::size_t m,
                                                            const Cost& cost) {
  DpTable table(n, m);
  fill_partition_table(table, cost);
  return PartitionSolution{table.value(n, n, m), recover_blocks(table)};
}

/// Expand blocks over sorted agents into an assignment in input agent order.
[[nodiscard]] inline Assignment blocks_to_assignment(const std::vector<Block>& blocks,
                                                     const std::vector<AgentIndex>& sorted_order) {
  std::vector<FacilityIndex> choices(sorted_order.size(), 0);
  for (const Block& b : blocks) {
    for (std::size_t a = b.first; a <= b.last; ++a) choices[sorted_order[a]] = b.facility;
  }
  return Assignment(std::move(choices));
}

}  // namespace fagfcs
