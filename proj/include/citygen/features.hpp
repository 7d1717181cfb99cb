#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "citygen/genome.hpp"

namespace citygen {

enum class Label { Rejected = 0, Selected = 1, Unlabeled = 2 };

std::string_view toString(Label label);
Label parseLabel(std::string_view name);

// The compact view of a genome the selection agent learns from.
struct CandidateAttributes {
  double waterFraction = 0.0;
  StreetStyle streetStyle = StreetStyle::NewYork;
  double avgBuildingHeight = 0.0;
  int buildingCount = 0;
  double centreHeightRatio = 0.0;
  Label label = Label::Unlabeled;

  friend bool operator==(const CandidateAttributes&, const CandidateAttributes&) = default;
};

// Attribute identifiers in declaration order; the order is also the
// tie-break order used by tree induction.
enum class Attribute { WaterFraction = 0, StreetStyle, AvgBuildingHeight, BuildingCount, CentreHeightRatio };

inline constexpr std::array<Attribute, 5> kAllAttributes = {
    Attribute::WaterFraction, Attribute::StreetStyle, Attribute::AvgBuildingHeight,
    Attribute::BuildingCount, Attribute::CentreHeightRatio};

std::string_view toString(Attribute attribute);
Attribute parseAttribute(std::string_view name);
bool isCategorical(Attribute attribute);

// Numeric value of one attribute; street style maps to its enum code.
double attributeValue(const CandidateAttributes& a, Attribute attribute);

// Radius (cells) around each centre cell that counts as the city centre.
inline constexpr double kCentreRadius = 5.0;

CandidateAttributes extractAttributes(const CityGenome& g);
std::vector<CandidateAttributes> extractAttributes(const std::vector<CityGenome>& genomes);

Json toJson(const CandidateAttributes& a);
CandidateAttributes attributesFromJson(const Json& j);

}  // namespace citygen
