#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "check.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "citygen/error.hpp"
#include "citygen/features.hpp"
#include "citygen/oracle.hpp"
#include "support.hpp"

using namespace citygen;
using namespace citygen::testing;

namespace {

Brief noWater() {
  return briefFromJson(Json::parse(R"({"name": "no water", "targets": [
      {"attribute": "waterFraction", "goal": "minimize"}]})"));
}

std::vector<CandidateAttributes> withWater(std::initializer_list<double> water) {
  std::vector<CandidateAttributes> out;
  for (const double w : water) {
    CandidateAttributes a;
    a.waterFraction = w;
    out.push_back(a);
  }
  return out;
}

// Attribute values that satisfy every target of `brief` completely.
CandidateAttributes ideal(const Brief& brief, const ScoreScale& scale) {
  CandidateAttributes a;
  for (const Target& t : brief.targets) {
    double v = 0.0;
    switch (t.goal) {
      case GoalKind::Minimize: v = 0.0; break;
      case GoalKind::Approximately: v = t.value; break;
      case GoalKind::Maximize:
        v = t.attribute == Attribute::WaterFraction       ? 1.0
            : t.attribute == Attribute::AvgBuildingHeight ? scale.maxHeight
            : t.attribute == Attribute::BuildingCount     ? scale.area
                                                          : scale.centreRatioMax;
        break;
      case GoalKind::Equals: a.streetStyle = t.category; continue;
    }
    switch (t.attribute) {
      case Attribute::WaterFraction: a.waterFraction = v; break;
      case Attribute::AvgBuildingHeight: a.avgBuildingHeight = v; break;
      case Attribute::BuildingCount: a.buildingCount = static_cast<int>(v); break;
      case Attribute::CentreHeightRatio: a.centreHeightRatio = v; break;
      case Attribute::StreetStyle: break;
    }
  }
  return a;
}

std::vector<std::filesystem::path> bundledBriefs() {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(CITYGEN_BRIEF_DIR)) {
    if (entry.path().extension() == ".json") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("no-water brief scores the extremes") {
  const Brief b = noWater();
  CHECK(scoreCandidate(b, withWater({0.0})[0]) == 1.0);
  CHECK(scoreCandidate(b, withWater({1.0})[0]) == 0.0);
}

TEST_CASE("two-target weighted mean") {
  const Brief b = briefFromJson(Json::parse(R"({"name": "two", "targets": [
      {"attribute": "waterFraction", "goal": "minimize", "weight": 0.5},
      {"attribute": "streetStyle", "goal": "equals", "value": "NewYork", "weight": 0.5}]})"));
  CandidateAttributes a;
  a.waterFraction = 0.2;
  a.streetStyle = StreetStyle::NewYork;
  CHECK(scoreCandidate(b, a) == doctest::Approx(0.9));
  a.streetStyle = StreetStyle::European;
  CHECK(scoreCandidate(b, a) == doctest::Approx(0.4));
}

TEST_CASE("weights are normalised at load time") {
  const Brief b = loadBrief(std::filesystem::path(CITYGEN_BRIEF_DIR) / "no-water-flat-no-centre.json");
  double sum = 0.0;
  for (const Target& t : b.targets) sum += t.weight;
  CHECK(sum == doctest::Approx(1.0));
  CHECK(b.targets[0].weight == doctest::Approx(0.5));
}

TEST_CASE("malformed briefs") {
  CHECK_THROWS_AS(briefFromJson(Json::parse(R"({"name": "x", "targets": []})")), Error);
  CHECK_THROWS_AS(briefFromJson(Json::parse(R"({"name": "x", "targets": [
      {"attribute": "waterFraction", "goal": "equals", "value": "NewYork"}]})")), Error);
  CHECK_THROWS_AS(briefFromJson(Json::parse(R"({"name": "x", "targets": [
      {"attribute": "height", "goal": "minimize"}]})")), Error);
  CHECK_THROWS_AS(loadBrief("/nonexistent/brief.json"), Error);
}

TEST_CASE("the bundled catalogue holds six loadable briefs") {
  const auto paths = bundledBriefs();
  CHECK(paths.size() == 6);
  for (const auto& p : paths) {
    const Brief b = loadBrief(p);
    CHECK(b.name == p.stem().string());
    CHECK(briefFromJson(toJson(b)).targets.size() == b.targets.size());
    CHECK(scoreCandidate(b, ideal(b, {})) == doctest::Approx(1.0));
  }
}

TEST_CASE("scores stay in [0, 1] on random attributes") {
  Rng rng(41);
  std::vector<Brief> briefs;
  for (const auto& p : bundledBriefs()) briefs.push_back(loadBrief(p));
  for (int i = 0; i < 2000; ++i) {
    CandidateAttributes a;
    a.waterFraction = rng.uniform();
    a.avgBuildingHeight = rng.uniform(0, 80);
    a.buildingCount = rng.uniformInt(0, 12000);
    a.centreHeightRatio = rng.uniform(0, 8);
    a.streetStyle = rng.bernoulli(0.5) ? StreetStyle::European : StreetStyle::NewYork;
    for (const Brief& b : briefs) {
      const double s = scoreCandidate(b, a);
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
  }
}

TEST_CASE("oracleSelect without inconsistency") {
  const Brief b = noWater();
  OracleConfig cfg;
  cfg.inconsistencyRate = 0.0;
  Rng rng(1);
  const auto falling = withWater({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
  const ParentSelection s = oracleSelect(b, falling, cfg, rng);
  CHECK(s.first == 0);
  CHECK(s.second == 1);
  CHECK(s.source == SelectionSource::Oracle);
  const auto tied = withWater({0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3});
  CHECK(oracleSelect(b, tied, cfg, rng) == ParentSelection{0, 1, SelectionSource::Oracle});
}

TEST_CASE("inconsistency 1 replaces exactly one argmax pick") {
  const Brief b = noWater();
  OracleConfig cfg;
  cfg.inconsistencyRate = 1.0;
  Rng rng(2);
  const auto attrs = withWater({0.5, 0.1, 0.6, 0.7, 0.05, 0.8, 0.9, 0.4, 0.3});
  const std::set<int> argmax = {4, 1};
  int exactlyOne = 0;
  std::set<int> replacements;
  constexpr int kTrials = 10000;
  for (int i = 0; i < kTrials; ++i) {
    const ParentSelection s = oracleSelect(b, attrs, cfg, rng);
    const int hits = (argmax.count(s.first) ? 1 : 0) + (argmax.count(s.second) ? 1 : 0);
    exactlyOne += hits == 1 && s.first != s.second ? 1 : 0;
    replacements.insert(argmax.count(s.first) ? s.second : s.first);
  }
  CHECK(exactlyOne == kTrials);
  CHECK(replacements.size() == 7);
}

TEST_CASE("inconsistency rate controls the deviation frequency") {
  const Brief b = noWater();
  OracleConfig cfg;
  cfg.inconsistencyRate = 0.1;
  Rng rng(3);
  const auto attrs = withWater({0.5, 0.1, 0.6, 0.7, 0.05, 0.8, 0.9, 0.4, 0.3});
  int deviations = 0;
  constexpr int kTrials = 10000;
  for (int i = 0; i < kTrials; ++i) {
    const ParentSelection s = oracleSelect(b, attrs, cfg, rng);
    deviations += (s.first == 4 && s.second == 1) ? 0 : 1;
  }
  const double sigma = std::sqrt(kTrials * 0.1 * 0.9);
  CHECK(std::abs(deviations - 0.1 * kTrials) <= 4 * sigma);
}

TEST_CASE("acceptanceCheck threshold is inclusive") {
  Brief b = noWater();
  b.acceptScore = 0.9;
  CHECK(acceptanceCheck(b, withWater({0.3, 0.05, 0.2})).accepted);
  CHECK(acceptanceCheck(b, withWater({0.3, 0.05, 0.2})).bestIndex == 1);
  const AcceptanceResult edge = acceptanceCheck(b, withWater({0.5, 0.1}));
  CHECK(edge.bestScore == doctest::Approx(0.9));
  CHECK(edge.accepted);
  CHECK_FALSE(acceptanceCheck(b, withWater({0.5, 0.2})).accepted);
}

TEST_CASE("a hand-built harbour city scores at least 0.9 on the water-centre-left brief") {
  const Brief b = loadBrief(std::filesystem::path(CITYGEN_BRIEF_DIR) / "water-centre-left.json");
  // Water covers the right three quarters; the centre sits on the left with
  // buildings three times taller than those further out.
  CityGenome g = CityGenome::blank({100, 100});
  for (int y = 0; y < 100; ++y) {
    for (int x = 25; x < 100; ++x) g.ground.at(x, y) = cell::kWater;
  }
  g.city.at(10, 50) = 1;
  for (int y = 46; y <= 54; y += 2) {
    for (int x = 7; x <= 13; x += 2) putBuilding(g, x, y, 15);
  }
  for (int y = 0; y < 100; y += 10) putBuilding(g, 20, y, 5);
  REQUIRE(isValid(g));
  const CandidateAttributes a = extractAttributes(g);
  CHECK(a.waterFraction == 0.75);
  CHECK(a.centreHeightRatio == doctest::Approx(3.0));
  CHECK(scoreCandidate(b, a) >= 0.9);
}
