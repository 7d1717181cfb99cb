#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "check.hpp"

#include "citygen/features.hpp"
#include "support.hpp"

using namespace citygen;
using namespace citygen::testing;

TEST_CASE("empty all-land city") {
  const CandidateAttributes a = extractAttributes(emptyCity({10, 10}));
  CHECK(a.waterFraction == 0.0);
  CHECK(a.buildingCount == 0);
  CHECK(a.avgBuildingHeight == 0.0);
  CHECK(a.centreHeightRatio == 0.0);
  CHECK(a.label == Label::Unlabeled);
}

TEST_CASE("1,400 water cells out of 10,000") {
  CityGenome g = emptyCity({100, 100});
  for (int i = 0; i < 1400; ++i) g.ground[9999 - i] = cell::kWater;
  CHECK(extractAttributes(g).waterFraction == doctest::Approx(0.14).epsilon(1e-12));
}

TEST_CASE("hand-built 4x4 genome") {
  CityGenome g = CityGenome::blank({4, 4});
  g.ground.at(3, 3) = g.ground.at(2, 3) = cell::kWater;
  putBuilding(g, 0, 0, 4);
  putBuilding(g, 1, 1, 6);
  putBuilding(g, 2, 0, 8);
  g.city.at(1, 1) = 1;
  REQUIRE(isValid(g));
  const CandidateAttributes a = extractAttributes(g);
  CHECK(a.waterFraction == 0.125);
  CHECK(a.buildingCount == 3);
  CHECK(a.avgBuildingHeight == 6.0);
  // The radius-5 disc around (1,1) covers the whole grid, so no building lies
  // outside the centre and the ratio is 0 by definition.
  CHECK(a.centreHeightRatio == 0.0);
}

TEST_CASE("centre height ratio on a 20x20 grid") {
  CityGenome g = emptyCity({20, 20});
  g.city.fill(0);
  g.city.at(2, 2) = 1;
  putBuilding(g, 2, 2, 30);
  putBuilding(g, 5, 6, 10);  // distance 5: inside
  putBuilding(g, 6, 6, 4);   // distance sqrt(32): outside
  putBuilding(g, 15, 15, 2);
  const CandidateAttributes a = extractAttributes(g);
  CHECK(a.buildingCount == 4);
  CHECK(a.avgBuildingHeight == 11.5);
  CHECK(a.centreHeightRatio == doctest::Approx(20.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("equal heights inside and outside give ratio 1") {
  CityGenome g = emptyCity({30, 30});
  for (int x = 0; x < 30; x += 3) putBuilding(g, x, 0, 7);
  const CandidateAttributes a = extractAttributes(g);
  CHECK(a.centreHeightRatio == doctest::Approx(1.0));
}

TEST_CASE("adding a water cell never lowers the water fraction") {
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const CityGenome g = validGenome(rng);
    CityGenome wetter = g;
    wetter.ground[static_cast<std::size_t>(rng.uniformInt(0, g.dim.area() - 1))] = cell::kWater;
    CHECK(extractAttributes(repair(wetter)).waterFraction >= extractAttributes(g).waterFraction);
  }
}

TEST_CASE("attributes are finite and bounded on random genomes") {
  Rng rng(22);
  for (int i = 0; i < 200; ++i) {
    const CityGenome g = validGenome(rng);
    const CandidateAttributes a = extractAttributes(g);
    CHECK(a.waterFraction >= 0.0);
    CHECK(a.waterFraction <= 1.0);
    CHECK(a.buildingCount <= g.dim.area());
    CHECK(std::isfinite(a.avgBuildingHeight));
    CHECK(std::isfinite(a.centreHeightRatio));
    CHECK(a.streetStyle == g.streetStyle);
  }
}

TEST_CASE("attribute JSON and names") {
  CandidateAttributes a;
  a.waterFraction = 0.25;
  a.streetStyle = StreetStyle::European;
  a.avgBuildingHeight = 3.5;
  a.buildingCount = 12;
  a.centreHeightRatio = 1.75;
  a.label = Label::Selected;
  CHECK(attributesFromJson(toJson(a)) == a);
  for (const Attribute attr : kAllAttributes) CHECK(parseAttribute(toString(attr)) == attr);
  CHECK(isCategorical(Attribute::StreetStyle));
  CHECK(attributeValue(a, Attribute::StreetStyle) == 1.0);
  CHECK(attributeValue(a, Attribute::BuildingCount) == 12.0);
}
