#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "citygen/evolution.hpp"
#include "citygen/features.hpp"

namespace citygen {

enum class GoalKind { Maximize, Minimize, Approximately, Equals };

struct Target {
  Attribute attribute = Attribute::WaterFraction;
  GoalKind goal = GoalKind::Minimize;
  double value = 0.0;      // Approximately
  double tolerance = 1.0;  // Approximately
  StreetStyle category = StreetStyle::NewYork;  // Equals
  double weight = 1.0;
};

// A design goal expressed as weighted targets over the candidate attributes.
struct Brief {
  std::string name;
  std::string description;
  std::vector<Target> targets;
  double acceptScore = 0.9;

  // Checks the targets and rescales the weights to sum to one.
  void normalize();
};

Brief briefFromJson(const Json& j);
Json toJson(const Brief& brief);
Brief loadBrief(const std::filesystem::path& path);

// Per-attribute normalisers for maximize/minimize goals.
struct ScoreScale {
  double maxHeight = 60.0;
  double area = 10000.0;
  double centreRatioMax = 5.0;

  static ScoreScale from(const EvolutionConfig& config) {
    return {static_cast<double>(config.maxHeight), static_cast<double>(config.dim.area()), 5.0};
  }
};

// Weighted mean of per-target satisfactions, in [0, 1].
double scoreCandidate(const Brief& brief, const CandidateAttributes& a, const ScoreScale& scale = {});

struct OracleConfig {
  // Probability that one of the two argmax picks is swapped for a random other candidate.
  double inconsistencyRate = 0.1;
  ScoreScale scale;
};

ParentSelection oracleSelect(const Brief& brief, std::span<const CandidateAttributes> attrs,
                             const OracleConfig& config, Rng& rng);

struct AcceptanceResult {
  bool accepted = false;
  double bestScore = 0.0;
  int bestIndex = 0;
};

AcceptanceResult acceptanceCheck(const Brief& brief, std::span<const CandidateAttributes> attrs,
                                 const ScoreScale& scale = {});

}  // namespace citygen
