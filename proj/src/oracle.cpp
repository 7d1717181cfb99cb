#include "citygen/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "citygen/agent.hpp"
#include "citygen/error.hpp"

namespace citygen {

namespace {

std::string_view goalName(GoalKind kind) {
  switch (kind) {
    case GoalKind::Maximize: return "maximize";
    case GoalKind::Minimize: return "minimize";
    case GoalKind::Approximately: return "approximately";
    case GoalKind::Equals: return "equals";
  }
  return "minimize";
}

GoalKind parseGoal(std::string_view name) {
  for (const GoalKind k : {GoalKind::Maximize, GoalKind::Minimize, GoalKind::Approximately,
                           GoalKind::Equals}) {
    if (goalName(k) == name) return k;
  }
  throw Error(ErrorCode::ParseError, "unknown goal '" + std::string(name) + "'");
}

double valueMax(Attribute attribute, const ScoreScale& scale) {
  switch (attribute) {
    case Attribute::WaterFraction: return 1.0;
    case Attribute::AvgBuildingHeight: return scale.maxHeight;
    case Attribute::BuildingCount: return scale.area;
    case Attribute::CentreHeightRatio: return scale.centreRatioMax;
    case Attribute::StreetStyle: return 1.0;
  }
  return 1.0;
}

double satisfaction(const Target& t, const CandidateAttributes& a, const ScoreScale& scale) {
  if (t.goal == GoalKind::Equals) return a.streetStyle == t.category ? 1.0 : 0.0;
  const double v = attributeValue(a, t.attribute);
  switch (t.goal) {
    case GoalKind::Maximize: return std::clamp(v / valueMax(t.attribute, scale), 0.0, 1.0);
    case GoalKind::Minimize: return std::clamp(1.0 - v / valueMax(t.attribute, scale), 0.0, 1.0);
    case GoalKind::Approximately: return std::max(0.0, 1.0 - std::abs(v - t.value) / t.tolerance);
    case GoalKind::Equals: break;
  }
  return 0.0;
}

}  // namespace

void Brief::normalize() {
  if (targets.empty()) throw Error(ErrorCode::InvalidConfig, "brief '" + name + "' has no targets");
  if (!(acceptScore > 0.0 && acceptScore <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "acceptScore must lie in (0, 1]");
  }
  double total = 0.0;
  for (const Target& t : targets) {
    if (!(t.weight > 0.0)) throw Error(ErrorCode::InvalidConfig, "target weights must be positive");
    if ((t.goal == GoalKind::Equals) != isCategorical(t.attribute)) {
      throw Error(ErrorCode::InvalidConfig,
                  "'equals' applies to streetStyle only, and streetStyle only to 'equals'");
    }
    if (t.goal == GoalKind::Approximately && !(t.tolerance > 0.0)) {
      throw Error(ErrorCode::InvalidConfig, "approximately-goals need a positive tolerance");
    }
    total += t.weight;
  }
  for (Target& t : targets) t.weight /= total;
}

Brief briefFromJson(const Json& j) {
  try {
    Brief brief;
    brief.name = j.at("name").get<std::string>();
    brief.description = j.value("description", "");
    brief.acceptScore = j.value("acceptScore", 0.9);
    for (const Json& t : j.at("targets")) {
      Target target;
      target.attribute = parseAttribute(t.at("attribute").get<std::string>());
      target.goal = parseGoal(t.at("goal").get<std::string>());
      target.weight = t.value("weight", 1.0);
      if (target.goal == GoalKind::Approximately) {
        target.value = t.at("value").get<double>();
        target.tolerance = t.at("tolerance").get<double>();
      }
      if (target.goal == GoalKind::Equals) {
        target.category = parseStreetStyle(t.at("value").get<std::string>());
      }
      brief.targets.push_back(target);
    }
    brief.normalize();
    return brief;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

Json toJson(const Brief& brief) {
  Json j;
  j["name"] = brief.name;
  j["description"] = brief.description;
  j["acceptScore"] = brief.acceptScore;
  Json targets = Json::array();
  for (const Target& t : brief.targets) {
    Json tj;
    tj["attribute"] = std::string(toString(t.attribute));
    tj["goal"] = std::string(goalName(t.goal));
    if (t.goal == GoalKind::Approximately) {
      tj["value"] = t.value;
      tj["tolerance"] = t.tolerance;
    }
    if (t.goal == GoalKind::Equals) tj["value"] = std::string(toString(t.category));
    tj["weight"] = t.weight;
    targets.push_back(std::move(tj));
  }
  j["targets"] = std::move(targets);
  return j;
}

Brief loadBrief(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open brief " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return briefFromJson(Json::parse(buffer.str()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

double scoreCandidate(const Brief& brief, const CandidateAttributes& a, const ScoreScale& scale) {
  double score = 0.0;
  for (const Target& t : brief.targets) score += t.weight * satisfaction(t, a, scale);
  return std::clamp(score, 0.0, 1.0);
}

ParentSelection oracleSelect(const Brief& brief, std::span<const CandidateAttributes> attrs,
                             const OracleConfig& config, Rng& rng) {
  const int n = static_cast<int>(attrs.size());
  std::vector<double> scores;
  scores.reserve(attrs.size());
  for (const CandidateAttributes& a : attrs) scores.push_back(scoreCandidate(brief, a, config.scale));
  auto [first, second] = pickTopTwo(scores);
  if (n > 2 && rng.bernoulli(config.inconsistencyRate)) {
    // Replace one pick with a uniformly random candidate outside the pair.
    int other = rng.uniformInt(0, n - 3);
    for (const int taken : {std::min(first, second), std::max(first, second)}) {
      if (other >= taken) ++other;
    }
    if (rng.bernoulli(0.5)) {
      first = other;
    } else {
      second = other;
    }
  }
  return {first, second, SelectionSource::Oracle};
}

AcceptanceResult acceptanceCheck(const Brief& brief, std::span<const CandidateAttributes> attrs,
                                 const ScoreScale& scale) {
  AcceptanceResult result;
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    const double s = scoreCandidate(brief, attrs[i], scale);
    if (i == 0 || s > result.bestScore) {
      result.bestScore = s;
      result.bestIndex = static_cast<int>(i);
    }
  }
  result.accepted = !attrs.empty() && result.bestScore >= brief.acceptScore;
  return result;
}

}  // namespace citygen
