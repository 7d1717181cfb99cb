#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "citygen/features.hpp"

namespace citygen {

struct AttributeSpec {
  std::string name;
  bool categorical = false;

  friend bool operator==(const AttributeSpec&, const AttributeSpec&) = default;
};

// A two-class table: each row holds one value per attribute (categorical
// values are integer codes stored as doubles) and a Selected/Rejected label.
struct LabeledTable {
  std::vector<AttributeSpec> attributes;
  std::vector<std::vector<double>> rows;
  std::vector<Label> labels;

  std::size_t size() const noexcept { return rows.size(); }
};

struct ClassCounts {
  int selected = 0;
  int rejected = 0;

  int total() const noexcept { return selected + rejected; }
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

// Base-2 entropy of a two-class distribution.
double entropy(ClassCounts counts);

struct TreeNode {
  // Internal nodes have an attribute index and >= 2 children. Numeric splits
  // route value <= threshold to children[0] and the rest to children[1];
  // categorical splits route by matching `categories`.
  int attribute = -1;
  double threshold = 0.0;
  std::vector<double> categories;
  std::vector<TreeNode> children;
  ClassCounts counts;

  bool isLeaf() const noexcept { return children.empty(); }
  // Majority class; ties go to Rejected.
  Label label() const noexcept {
    return counts.selected > counts.rejected ? Label::Selected : Label::Rejected;
  }
  // Majority-class share in (0, 1].
  double confidence() const noexcept;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::vector<AttributeSpec> attributes;
  TreeNode root;
  double trainingAccuracy = 0.0;

  int leafCount() const;
  int nodeCount() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct SplitChoice {
  int attribute = -1;
  double threshold = 0.0;  // unused for categorical splits
  double gain = 0.0;
  double gainRatio = 0.0;
};

// Gain ratios closer than this are treated as equal; ties then go to the
// earlier attribute and the lower threshold.
inline constexpr double kGainTieTolerance = 1e-12;

// Best admissible split over `rows`: every branch must hold at least minLeaf
// rows and the information gain must be positive. Numeric candidates are the
// midpoints between adjacent distinct values.
std::optional<SplitChoice> bestSplit(const LabeledTable& table, std::span<const std::size_t> rows,
                                     int minLeaf);

// Top-down gain-ratio induction without pruning. A node becomes a leaf when
// it is pure, holds fewer than 2 * minLeaf rows, or has no admissible split.
// Throws SingleClassTrainingSet unless both classes are present.
DecisionTree induceTree(const LabeledTable& table, int minLeaf);

struct Prediction {
  Label label = Label::Rejected;
  double confidence = 1.0;
};

Prediction classify(const DecisionTree& tree, std::span<const double> row);

Json toJson(const DecisionTree& tree);
DecisionTree treeFromJson(const Json& j);

// Indented text rendering, one line per branch with leaf class counts.
std::string formatTree(const DecisionTree& tree);

}  // namespace citygen
