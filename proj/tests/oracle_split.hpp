#pragma once

// Exhaustive root-split search written independently of the induction code:
// every attribute, every midpoint, scored by gain ratio from raw counts.

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "citygen/rng.hpp"
#include "citygen/tree.hpp"

namespace citygen::testing {

struct BruteSplit {
  int attribute;
  double threshold;
  double gainRatio;
};

inline double log2Entropy(double s, double r) {
  double h = 0.0;
  const double n = s + r;
  if (s > 0) h -= s / n * std::log2(s / n);
  if (r > 0) h -= r / n * std::log2(r / n);
  return h;
}

inline std::optional<BruteSplit> bruteForceRootSplit(const LabeledTable& t, int minLeaf) {
  const double n = static_cast<double>(t.size());
  double s = 0;
  for (const Label l : t.labels) s += l == Label::Selected ? 1 : 0;
  const double base = log2Entropy(s, n - s);

  std::vector<BruteSplit> all;
  for (int a = 0; a < static_cast<int>(t.attributes.size()); ++a) {
    // Partition rows into branches: one per value, or two around a threshold.
    std::vector<std::pair<double, std::vector<std::vector<int>>>> partitions;
    std::map<double, std::vector<int>> byValue;
    for (std::size_t r = 0; r < t.size(); ++r) byValue[t.rows[r][a]].push_back(static_cast<int>(r));
    if (t.attributes[a].categorical) {
      std::vector<std::vector<int>> branches;
      for (auto& [v, rows] : byValue) branches.push_back(rows);
      if (branches.size() >= 2) partitions.push_back({0.0, branches});
    } else {
      std::vector<double> values;
      for (auto& [v, rows] : byValue) values.push_back(v);
      for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        const double thr = values[k] + (values[k + 1] - values[k]) / 2.0;
        std::vector<std::vector<int>> branches(2);
        for (std::size_t r = 0; r < t.size(); ++r) branches[t.rows[r][a] <= thr ? 0 : 1].push_back(static_cast<int>(r));
        partitions.push_back({thr, branches});
      }
    }
    for (const auto& [thr, branches] : partitions) {
      bool admissible = true;
      double remainder = 0.0, splitInfo = 0.0;
      for (const auto& b : branches) {
        if (static_cast<int>(b.size()) < minLeaf) admissible = false;
        double bs = 0;
        for (const int r : b) bs += t.labels[r] == Label::Selected ? 1 : 0;
        const double share = b.size() / n;
        remainder += share * log2Entropy(bs, b.size() - bs);
        splitInfo -= share * std::log2(share);
      }
      const double gain = base - remainder;
      if (!admissible || gain <= 1e-12 || splitInfo <= 0.0) continue;
      all.push_back({a, thr, gain / splitInfo});
    }
  }
  if (all.empty()) return std::nullopt;
  double best = all.front().gainRatio;
  for (const BruteSplit& c : all) best = std::max(best, c.gainRatio);
  // Ties: earlier attribute, then lower threshold. `all` is already in that order.
  for (const BruteSplit& c : all) {
    if (c.gainRatio >= best - 1e-12) return c;
  }
  return std::nullopt;
}

// Random two-class table with at most `maxRows` rows and 1..3 attributes.
// Values come from a coarse grid so ties between candidate splits are common.
inline LabeledTable randomTable(Rng& rng, int maxRows = 12) {
  LabeledTable t;
  const int attrs = rng.uniformInt(1, 3);
  for (int a = 0; a < attrs; ++a) {
    t.attributes.push_back({"a" + std::to_string(a), rng.bernoulli(0.25)});
  }
  const int n = rng.uniformInt(4, maxRows);
  const bool coarse = rng.bernoulli(0.5);
  for (int r = 0; r < n; ++r) {
    std::vector<double> row;
    for (const AttributeSpec& spec : t.attributes) {
      if (spec.categorical) {
        row.push_back(rng.uniformInt(0, 2));
      } else {
        row.push_back(coarse ? rng.uniformInt(0, 5) * 0.1 : rng.uniform());
      }
    }
    t.rows.push_back(row);
    t.labels.push_back(rng.bernoulli(0.5) ? Label::Selected : Label::Rejected);
  }
  t.labels[0] = Label::Selected;
  t.labels[1] = Label::Rejected;
  return t;
}

}  // namespace citygen::testing
