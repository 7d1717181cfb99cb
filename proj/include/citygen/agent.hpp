#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "citygen/evolution.hpp"
#include "citygen/features.hpp"
#include "citygen/tree.hpp"

namespace citygen {

struct Provenance {
  std::string runId;
  int generationIndex = 0;
  int candidateIndex = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct TrainingInstance {
  CandidateAttributes attributes;  // label is Selected or Rejected
  Provenance provenance;

  friend bool operator==(const TrainingInstance&, const TrainingInstance&) = default;
};

struct TrainingSet {
  std::vector<TrainingInstance> instances;

  std::size_t size() const noexcept { return instances.size(); }
  ClassCounts counts() const;
  bool hasBothClasses() const;

  // Table over the five attributes in declaration order.
  LabeledTable toTable() const;

  friend bool operator==(const TrainingSet&, const TrainingSet&) = default;
};

// Appends one instance per candidate: the two parents are labelled selected,
// every other candidate rejected.
void recordSelection(TrainingSet& ts, const Population& pop, const ParentSelection& sel,
                     std::span<const CandidateAttributes> attrs, const std::string& runId);

std::string toJsonl(const TrainingSet& ts);
TrainingSet trainingSetFromJsonl(const std::string& text);

enum class ClassifierKind { Tree, Bayes };

std::string_view toString(ClassifierKind kind);
ClassifierKind parseClassifierKind(std::string_view name);

struct AgentConfig {
  ClassifierKind classifierKind = ClassifierKind::Tree;
  int minLeaf = 2;
  // Below this mean pick confidence the mutation rate is boosted.
  double confidenceThreshold = 0.6;
  double mutationBoost = 1.5;
  double maxBoostedRate = 0.5;

  void validate() const;
};

DecisionTree induceTree(const TrainingSet& ts, const AgentConfig& cfg);

struct GaussianParams {
  double mean = 0.0;
  double variance = 0.0;
};

// Gaussian naive Bayes over the four numeric attributes plus a Laplace-smoothed
// frequency table for the street style. Index 0 is Rejected, 1 Selected.
struct BayesModel {
  static constexpr std::array<Attribute, 4> kNumeric = {
      Attribute::WaterFraction, Attribute::AvgBuildingHeight, Attribute::BuildingCount,
      Attribute::CentreHeightRatio};
  static constexpr double kVarianceFloor = 1e-6;

  std::array<double, 2> priors{};
  std::array<std::array<GaussianParams, 4>, 2> numeric{};
  std::array<std::array<double, 2>, 2> styleProbability{};

  // Normalised class posteriors for one candidate.
  std::array<double, 2> posterior(const CandidateAttributes& a) const;
};

BayesModel fitBayes(const TrainingSet& ts, const AgentConfig& cfg);

using Classifier = std::variant<DecisionTree, BayesModel>;

// Fits the configured classifier; nullopt when the history holds one class.
std::optional<Classifier> fitClassifier(const TrainingSet& ts, const AgentConfig& cfg);

Prediction classify(const DecisionTree& tree, const CandidateAttributes& a);
Prediction classify(const BayesModel& model, const CandidateAttributes& a);
Prediction classify(const Classifier& model, const CandidateAttributes& a);

// Score used for ranking: probability that the candidate would be selected.
double selectedScore(const Classifier& model, const CandidateAttributes& a);

// Indices of the two highest scores; ties go to the lower index.
std::pair<int, int> pickTopTwo(std::span<const double> scores);

struct AgentChoice {
  ParentSelection selection;
  double meanConfidence = 0.5;
};

// Picks the two candidates most likely to be selected. Without a model the
// agent falls back to a uniformly random distinct pair with confidence 0.5.
AgentChoice selectAsAgent(const Classifier* model, std::span<const CandidateAttributes> attrs,
                          Rng& fallbackRng);

double effectiveMutationRate(double base, double meanConfidence, const AgentConfig& cfg);

Json toJson(const BayesModel& model);
Json toJson(const Classifier& model);

}  // namespace citygen
