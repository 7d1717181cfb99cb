#include "citygen/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "citygen/error.hpp"

namespace citygen {

ClassCounts TrainingSet::counts() const {
  ClassCounts c;
  for (const TrainingInstance& inst : instances) {
    if (inst.attributes.label == Label::Selected) ++c.selected;
    if (inst.attributes.label == Label::Rejected) ++c.rejected;
  }
  return c;
}

bool TrainingSet::hasBothClasses() const {
  const ClassCounts c = counts();
  return c.selected > 0 && c.rejected > 0;
}

LabeledTable TrainingSet::toTable() const {
  LabeledTable table;
  for (const Attribute a : kAllAttributes) {
    table.attributes.push_back({std::string(toString(a)), isCategorical(a)});
  }
  table.rows.reserve(instances.size());
  for (const TrainingInstance& inst : instances) {
    std::vector<double> row;
    row.reserve(kAllAttributes.size());
    for (const Attribute a : kAllAttributes) row.push_back(attributeValue(inst.attributes, a));
    table.rows.push_back(std::move(row));
    table.labels.push_back(inst.attributes.label);
  }
  return table;
}

void recordSelection(TrainingSet& ts, const Population& pop, const ParentSelection& sel,
                     std::span<const CandidateAttributes> attrs, const std::string& runId) {
  if (attrs.size() != pop.candidates.size()) {
    throw Error(ErrorCode::MisalignedInput, "attribute rows do not match population size");
  }
  sel.validate(static_cast<int>(pop.candidates.size()));
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    TrainingInstance inst;
    inst.attributes = attrs[i];
    const bool picked = static_cast<int>(i) == sel.first || static_cast<int>(i) == sel.second;
    inst.attributes.label = picked ? Label::Selected : Label::Rejected;
    inst.provenance = {runId, pop.generationIndex, static_cast<int>(i)};
    ts.instances.push_back(std::move(inst));
  }
}

std::string toJsonl(const TrainingSet& ts) {
  std::string out;
  for (const TrainingInstance& inst : ts.instances) {
    Json j;
    j["runId"] = inst.provenance.runId;
    j["generationIndex"] = inst.provenance.generationIndex;
    j["candidateIndex"] = inst.provenance.candidateIndex;
    const Json attrs = toJson(inst.attributes);
    for (auto& [key, value] : attrs.items()) j[key] = value;
    out += j.dump();
    out += '\n';
  }
  return out;
}

TrainingSet trainingSetFromJsonl(const std::string& text) {
  TrainingSet ts;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      TrainingInstance inst;
      inst.attributes = attributesFromJson(j);
      inst.provenance = {j.at("runId").get<std::string>(), j.at("generationIndex").get<int>(),
                         j.at("candidateIndex").get<int>()};
      ts.instances.push_back(std::move(inst));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, e.what());
    }
  }
  return ts;
}

std::string_view toString(ClassifierKind kind) {
  return kind == ClassifierKind::Tree ? "tree" : "bayes";
}

ClassifierKind parseClassifierKind(std::string_view name) {
  if (name == "tree") return ClassifierKind::Tree;
  if (name == "bayes") return ClassifierKind::Bayes;
  throw Error(ErrorCode::ParseError, "unknown classifier '" + std::string(name) + "'");
}

void AgentConfig::validate() const {
  if (minLeaf < 1) throw Error(ErrorCode::InvalidConfig, "minLeaf must be >= 1");
  if (!(confidenceThreshold > 0.5 && confidenceThreshold < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "confidenceThreshold must lie in (0.5, 1)");
  }
  if (!(mutationBoost >= 1.0)) throw Error(ErrorCode::InvalidConfig, "mutationBoost must be >= 1");
  if (!(maxBoostedRate >= 0.0 && maxBoostedRate <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "maxBoostedRate must lie in [0, 1]");
  }
}

DecisionTree induceTree(const TrainingSet& ts, const AgentConfig& cfg) {
  return induceTree(ts.toTable(), cfg.minLeaf);
}

std::array<double, 2> BayesModel::posterior(const CandidateAttributes& a) const {
  std::array<double, 2> logp{};
  for (int c = 0; c < 2; ++c) {
    double lp = std::log(priors[c]);
    for (std::size_t k = 0; k < kNumeric.size(); ++k) {
      const GaussianParams& g = numeric[c][k];
      const double d = attributeValue(a, kNumeric[k]) - g.mean;
      lp += -0.5 * std::log(2.0 * std::numbers::pi * g.variance) - d * d / (2.0 * g.variance);
    }
    lp += std::log(styleProbability[c][static_cast<int>(a.streetStyle)]);
    logp[c] = lp;
  }
  const double m = std::max(logp[0], logp[1]);
  const double e0 = std::exp(logp[0] - m);
  const double e1 = std::exp(logp[1] - m);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

BayesModel fitBayes(const TrainingSet& ts, const AgentConfig& cfg) {
  cfg.validate();
  if (!ts.hasBothClasses()) {
    throw Error(ErrorCode::SingleClassTrainingSet, "training data holds a single class");
  }
  BayesModel model;
  std::array<int, 2> n{};
  std::array<std::array<double, 4>, 2> sum{};
  std::array<std::array<int, 2>, 2> styles{};
  for (const TrainingInstance& inst : ts.instances) {
    const int c = inst.attributes.label == Label::Selected ? 1 : 0;
    ++n[c];
    ++styles[c][static_cast<int>(inst.attributes.streetStyle)];
    for (std::size_t k = 0; k < BayesModel::kNumeric.size(); ++k) {
      sum[c][k] += attributeValue(inst.attributes, BayesModel::kNumeric[k]);
    }
  }
  for (int c = 0; c < 2; ++c) {
    for (std::size_t k = 0; k < BayesModel::kNumeric.size(); ++k) {
      model.numeric[c][k].mean = sum[c][k] / n[c];
    }
  }
  std::array<std::array<double, 4>, 2> squares{};
  for (const TrainingInstance& inst : ts.instances) {
    const int c = inst.attributes.label == Label::Selected ? 1 : 0;
    for (std::size_t k = 0; k < BayesModel::kNumeric.size(); ++k) {
      const double d = attributeValue(inst.attributes, BayesModel::kNumeric[k]) - model.numeric[c][k].mean;
      squares[c][k] += d * d;
    }
  }
  const int total = n[0] + n[1];
  for (int c = 0; c < 2; ++c) {
    model.priors[c] = static_cast<double>(n[c]) / total;
    for (std::size_t k = 0; k < BayesModel::kNumeric.size(); ++k) {
      model.numeric[c][k].variance = std::max(squares[c][k] / n[c], BayesModel::kVarianceFloor);
    }
    for (int s = 0; s < 2; ++s) {
      model.styleProbability[c][s] = (styles[c][s] + 1.0) / (n[c] + 2.0);
    }
  }
  return model;
}

std::optional<Classifier> fitClassifier(const TrainingSet& ts, const AgentConfig& cfg) {
  if (!ts.hasBothClasses()) return std::nullopt;
  if (cfg.classifierKind == ClassifierKind::Bayes) return Classifier{fitBayes(ts, cfg)};
  return Classifier{induceTree(ts, cfg)};
}

Prediction classify(const DecisionTree& tree, const CandidateAttributes& a) {
  std::array<double, kAllAttributes.size()> row{};
  for (std::size_t k = 0; k < kAllAttributes.size(); ++k) row[k] = attributeValue(a, kAllAttributes[k]);
  return classify(tree, std::span<const double>(row));
}

Prediction classify(const BayesModel& model, const CandidateAttributes& a) {
  const auto p = model.posterior(a);
  // Ties go to Rejected, matching the tree's leaf rule.
  if (p[1] > p[0]) return {Label::Selected, p[1]};
  return {Label::Rejected, p[0]};
}

Prediction classify(const Classifier& model, const CandidateAttributes& a) {
  return std::visit([&](const auto& m) { return classify(m, a); }, model);
}

double selectedScore(const Classifier& model, const CandidateAttributes& a) {
  if (const auto* bayes = std::get_if<BayesModel>(&model)) return bayes->posterior(a)[1];
  const Prediction p = classify(std::get<DecisionTree>(model), a);
  return p.label == Label::Selected ? p.confidence : 1.0 - p.confidence;
}

std::pair<int, int> pickTopTwo(std::span<const double> scores) {
  if (scores.size() < 2) throw Error(ErrorCode::MisalignedInput, "need at least two candidates");
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  return {order[0], order[1]};
}

AgentChoice selectAsAgent(const Classifier* model, std::span<const CandidateAttributes> attrs,
                          Rng& fallbackRng) {
  const int n = static_cast<int>(attrs.size());
  if (n < 2) throw Error(ErrorCode::MisalignedInput, "need at least two candidates");
  if (model == nullptr) {
    const int first = fallbackRng.uniformInt(0, n - 1);
    int second = fallbackRng.uniformInt(0, n - 2);
    if (second >= first) ++second;
    return {{first, second, SelectionSource::Agent}, 0.5};
  }
  std::vector<double> scores;
  scores.reserve(attrs.size());
  for (const CandidateAttributes& a : attrs) scores.push_back(selectedScore(*model, a));
  const auto [first, second] = pickTopTwo(scores);
  return {{first, second, SelectionSource::Agent}, (scores[first] + scores[second]) / 2.0};
}

double effectiveMutationRate(double base, double meanConfidence, const AgentConfig& cfg) {
  if (!(base >= 0.0 && base <= 1.0)) throw Error(ErrorCode::InvalidRate, "base rate outside [0, 1]");
  if (meanConfidence < cfg.confidenceThreshold) {
    return std::min(base * cfg.mutationBoost, cfg.maxBoostedRate);
  }
  return base;
}

Json toJson(const BayesModel& model) {
  Json j;
  j["kind"] = "bayes";
  Json classes = Json::array();
  for (int c = 0; c < 2; ++c) {
    Json cls;
    cls["label"] = std::string(toString(c == 1 ? Label::Selected : Label::Rejected));
    cls["prior"] = model.priors[c];
    for (std::size_t k = 0; k < BayesModel::kNumeric.size(); ++k) {
      cls[std::string(toString(BayesModel::kNumeric[k]))] = {
          {"mean", model.numeric[c][k].mean}, {"variance", model.numeric[c][k].variance}};
    }
    cls["streetStyle"] = {{"NewYork", model.styleProbability[c][0]},
                          {"European", model.styleProbability[c][1]}};
    classes.push_back(std::move(cls));
  }
  j["classes"] = std::move(classes);
  return j;
}

Json toJson(const Classifier& model) {
  if (const auto* tree = std::get_if<DecisionTree>(&model)) {
    Json j = toJson(*tree);
    j["kind"] = "tree";
    return j;
  }
  return toJson(std::get<BayesModel>(model));
}

}  // namespace citygen
