#include "citygen/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "citygen/error.hpp"

namespace citygen {

double entropy(ClassCounts counts) {
  const double n = counts.total();
  if (n <= 0.0) return 0.0;
  double h = 0.0;
  for (const int c : {counts.selected, counts.rejected}) {
    if (c > 0) {
      const double p = c / n;
      h -= p * std::log2(p);
    }
  }
  return h;
}

double TreeNode::confidence() const noexcept {
  const int total = counts.total();
  if (total == 0) return 1.0;
  return static_cast<double>(std::max(counts.selected, counts.rejected)) / total;
}

namespace {

void add(ClassCounts& counts, Label label, int delta = 1) {
  if (label == Label::Selected) {
    counts.selected += delta;
  } else {
    counts.rejected += delta;
  }
}

ClassCounts countRows(const LabeledTable& table, std::span<const std::size_t> rows) {
  ClassCounts counts;
  for (const std::size_t r : rows) add(counts, table.labels[r]);
  return counts;
}

// Gain and split information of a partition of a node with `parent` counts.
struct Partition {
  double gain;
  double splitInfo;
};

Partition evaluate(ClassCounts parent, std::span<const ClassCounts> branches) {
  const double n = parent.total();
  double remainder = 0.0;
  double splitInfo = 0.0;
  for (const ClassCounts& b : branches) {
    const double share = b.total() / n;
    if (share <= 0.0) continue;
    remainder += share * entropy(b);
    splitInfo -= share * std::log2(share);
  }
  return {entropy(parent) - remainder, splitInfo};
}

struct Candidate {
  SplitChoice choice;
  bool valid = false;
};

// Keeps the better of the current best and a new candidate; candidates arrive
// in attribute order and ascending threshold, so only strict improvements win.
void offer(Candidate& best, const SplitChoice& next) {
  if (!best.valid || next.gainRatio > best.choice.gainRatio + kGainTieTolerance) {
    best.choice = next;
    best.valid = true;
  }
}

void numericCandidates(const LabeledTable& table, std::span<const std::size_t> rows, int attribute,
                       int minLeaf, ClassCounts parent, Candidate& best) {
  std::vector<std::size_t> order(rows.begin(), rows.end());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return table.rows[a][attribute] < table.rows[b][attribute];
  });
  ClassCounts left;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    add(left, table.labels[order[k]]);
    const double v = table.rows[order[k]][attribute];
    const double next = table.rows[order[k + 1]][attribute];
    if (!(v < next)) continue;
    const ClassCounts right{parent.selected - left.selected, parent.rejected - left.rejected};
    if (left.total() < minLeaf || right.total() < minLeaf) continue;
    const ClassCounts branches[] = {left, right};
    const Partition p = evaluate(parent, branches);
    if (p.gain <= kGainTieTolerance || p.splitInfo <= 0.0) continue;
    offer(best, {attribute, v + (next - v) / 2.0, p.gain, p.gain / p.splitInfo});
  }
}

void categoricalCandidate(const LabeledTable& table, std::span<const std::size_t> rows,
                          int attribute, int minLeaf, ClassCounts parent, Candidate& best) {
  std::map<double, ClassCounts> byValue;
  for (const std::size_t r : rows) add(byValue[table.rows[r][attribute]], table.labels[r]);
  if (byValue.size() < 2) return;
  std::vector<ClassCounts> branches;
  for (const auto& [value, counts] : byValue) {
    if (counts.total() < minLeaf) return;
    branches.push_back(counts);
  }
  const Partition p = evaluate(parent, branches);
  if (p.gain <= kGainTieTolerance || p.splitInfo <= 0.0) return;
  offer(best, {attribute, 0.0, p.gain, p.gain / p.splitInfo});
}

TreeNode grow(const LabeledTable& table, std::vector<std::size_t> rows, int minLeaf) {
  TreeNode node;
  node.counts = countRows(table, rows);
  if (node.counts.selected == 0 || node.counts.rejected == 0) return node;
  if (static_cast<int>(rows.size()) < 2 * minLeaf) return node;
  const std::optional<SplitChoice> split = bestSplit(table, rows, minLeaf);
  if (!split) return node;

  node.attribute = split->attribute;
  const int a = split->attribute;
  if (table.attributes[a].categorical) {
    std::map<double, std::vector<std::size_t>> parts;
    for (const std::size_t r : rows) parts[table.rows[r][a]].push_back(r);
    for (auto& [value, part] : parts) {
      node.categories.push_back(value);
      node.children.push_back(grow(table, std::move(part), minLeaf));
    }
  } else {
    node.threshold = split->threshold;
    std::vector<std::size_t> low, high;
    for (const std::size_t r : rows) {
      (table.rows[r][a] <= node.threshold ? low : high).push_back(r);
    }
    node.children.push_back(grow(table, std::move(low), minLeaf));
    node.children.push_back(grow(table, std::move(high), minLeaf));
  }
  return node;
}

const TreeNode& route(const TreeNode& node, std::span<const double> row,
                      const std::vector<AttributeSpec>& attributes) {
  if (node.isLeaf()) return node;
  const double v = row[node.attribute];
  if (attributes[node.attribute].categorical) {
    for (std::size_t i = 0; i < node.categories.size(); ++i) {
      if (node.categories[i] == v) return route(node.children[i], row, attributes);
    }
    return node;  // unseen category: answer with this node's class distribution
  }
  return route(node.children[v <= node.threshold ? 0 : 1], row, attributes);
}

int countNodes(const TreeNode& node, bool leavesOnly) {
  if (node.isLeaf()) return 1;
  int n = leavesOnly ? 0 : 1;
  for (const TreeNode& c : node.children) n += countNodes(c, leavesOnly);
  return n;
}

}  // namespace

int DecisionTree::leafCount() const { return countNodes(root, true); }
int DecisionTree::nodeCount() const { return countNodes(root, false); }

std::optional<SplitChoice> bestSplit(const LabeledTable& table, std::span<const std::size_t> rows,
                                     int minLeaf) {
  const ClassCounts parent = countRows(table, rows);
  Candidate best;
  for (int a = 0; a < static_cast<int>(table.attributes.size()); ++a) {
    if (table.attributes[a].categorical) {
      categoricalCandidate(table, rows, a, minLeaf, parent, best);
    } else {
      numericCandidates(table, rows, a, minLeaf, parent, best);
    }
  }
  if (!best.valid) return std::nullopt;
  return best.choice;
}

DecisionTree induceTree(const LabeledTable& table, int minLeaf) {
  if (minLeaf < 1) throw Error(ErrorCode::InvalidConfig, "minLeaf must be >= 1");
  if (table.labels.size() != table.rows.size()) {
    throw Error(ErrorCode::MisalignedInput, "labels and rows differ in length");
  }
  std::vector<std::size_t> rows(table.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const ClassCounts counts = countRows(table, rows);
  if (counts.selected == 0 || counts.rejected == 0) {
    throw Error(ErrorCode::SingleClassTrainingSet, "training data holds a single class");
  }
  DecisionTree tree;
  tree.attributes = table.attributes;
  tree.root = grow(table, std::move(rows), minLeaf);
  int correct = 0;
  for (std::size_t r = 0; r < table.size(); ++r) {
    correct += classify(tree, table.rows[r]).label == table.labels[r] ? 1 : 0;
  }
  tree.trainingAccuracy = static_cast<double>(correct) / static_cast<double>(table.size());
  return tree;
}

Prediction classify(const DecisionTree& tree, std::span<const double> row) {
  const TreeNode& leaf = route(tree.root, row, tree.attributes);
  return {leaf.label(), leaf.confidence()};
}

namespace {

Json nodeToJson(const TreeNode& node, const std::vector<AttributeSpec>& attributes) {
  Json j;
  j["selected"] = node.counts.selected;
  j["rejected"] = node.counts.rejected;
  if (node.isLeaf()) {
    j["label"] = std::string(toString(node.label()));
    return j;
  }
  j["attribute"] = attributes[node.attribute].name;
  if (attributes[node.attribute].categorical) {
    j["values"] = node.categories;
  } else {
    j["threshold"] = node.threshold;
  }
  Json children = Json::array();
  for (const TreeNode& c : node.children) children.push_back(nodeToJson(c, attributes));
  j["children"] = std::move(children);
  return j;
}

TreeNode nodeFromJson(const Json& j, const std::vector<AttributeSpec>& attributes) {
  TreeNode node;
  node.counts = {j.at("selected").get<int>(), j.at("rejected").get<int>()};
  if (!j.contains("attribute")) return node;
  const auto name = j.at("attribute").get<std::string>();
  const auto it = std::find_if(attributes.begin(), attributes.end(),
                               [&](const AttributeSpec& a) { return a.name == name; });
  if (it == attributes.end()) throw Error(ErrorCode::ParseError, "unknown attribute " + name);
  node.attribute = static_cast<int>(it - attributes.begin());
  if (it->categorical) {
    node.categories = j.at("values").get<std::vector<double>>();
  } else {
    node.threshold = j.at("threshold").get<double>();
  }
  for (const Json& c : j.at("children")) node.children.push_back(nodeFromJson(c, attributes));
  return node;
}

std::string formatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string categoryName(const AttributeSpec& spec, double code) {
  if (spec.name == toString(Attribute::StreetStyle)) {
    return std::string(toString(static_cast<StreetStyle>(static_cast<int>(code))));
  }
  return formatNumber(code);
}

std::string leafText(const TreeNode& leaf) {
  const int errors = std::min(leaf.counts.selected, leaf.counts.rejected);
  std::string s = std::string(toString(leaf.label())) + " (" + std::to_string(leaf.counts.total());
  if (errors > 0) s += "/" + std::to_string(errors);
  return s + ")";
}

void formatNode(const TreeNode& node, const std::vector<AttributeSpec>& attributes, int depth,
                std::ostringstream& out) {
  std::string indent;
  for (int d = 0; d < depth; ++d) indent += "|   ";
  const AttributeSpec& spec = attributes[node.attribute];
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    std::string test = spec.name;
    if (spec.categorical) {
      test += " = " + categoryName(spec, node.categories[i]);
    } else {
      test += (i == 0 ? " <= " : " > ") + formatNumber(node.threshold);
    }
    const TreeNode& child = node.children[i];
    if (child.isLeaf()) {
      out << indent << test << ": " << leafText(child) << '\n';
    } else {
      out << indent << test << '\n';
      formatNode(child, attributes, depth + 1, out);
    }
  }
}

}  // namespace

Json toJson(const DecisionTree& tree) {
  Json j;
  Json attributes = Json::array();
  for (const AttributeSpec& a : tree.attributes) {
    attributes.push_back({{"name", a.name}, {"categorical", a.categorical}});
  }
  j["attributes"] = std::move(attributes);
  j["trainingAccuracy"] = tree.trainingAccuracy;
  j["root"] = nodeToJson(tree.root, tree.attributes);
  return j;
}

DecisionTree treeFromJson(const Json& j) {
  try {
    DecisionTree tree;
    for (const Json& a : j.at("attributes")) {
      tree.attributes.push_back({a.at("name").get<std::string>(), a.at("categorical").get<bool>()});
    }
    tree.trainingAccuracy = j.at("trainingAccuracy").get<double>();
    tree.root = nodeFromJson(j.at("root"), tree.attributes);
    return tree;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

std::string formatTree(const DecisionTree& tree) {
  std::ostringstream out;
  if (tree.root.isLeaf()) {
    out << ": " << leafText(tree.root) << '\n';
  } else {
    formatNode(tree.root, tree.attributes, 0, out);
  }
  out << "\nNumber of leaves: " << tree.leafCount() << '\n';
  out << "Size of the tree: " << tree.nodeCount() << '\n';
  out << "Correctly classified (resubstitution): " << formatNumber(100.0 * tree.trainingAccuracy)
      << "%\n";
  return out.str();
}

}  // namespace citygen
