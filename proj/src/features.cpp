#include "citygen/features.hpp"

#include <cmath>

#include "citygen/error.hpp"

namespace citygen {

std::string_view toString(Label label) {
  switch (label) {
    case Label::Rejected: return "rejected";
    case Label::Selected: return "selected";
    case Label::Unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

Label parseLabel(std::string_view name) {
  if (name == "rejected") return Label::Rejected;
  if (name == "selected") return Label::Selected;
  if (name == "unlabeled") return Label::Unlabeled;
  throw Error(ErrorCode::ParseError, "unknown label '" + std::string(name) + "'");
}

std::string_view toString(Attribute attribute) {
  switch (attribute) {
    case Attribute::WaterFraction: return "waterFraction";
    case Attribute::StreetStyle: return "streetStyle";
    case Attribute::AvgBuildingHeight: return "avgBuildingHeight";
    case Attribute::BuildingCount: return "buildingCount";
    case Attribute::CentreHeightRatio: return "centreHeightRatio";
  }
  return "waterFraction";
}

Attribute parseAttribute(std::string_view name) {
  for (const Attribute a : kAllAttributes) {
    if (toString(a) == name) return a;
  }
  throw Error(ErrorCode::ParseError, "unknown attribute '" + std::string(name) + "'");
}

bool isCategorical(Attribute attribute) { return attribute == Attribute::StreetStyle; }

double attributeValue(const CandidateAttributes& a, Attribute attribute) {
  switch (attribute) {
    case Attribute::WaterFraction: return a.waterFraction;
    case Attribute::StreetStyle: return static_cast<double>(a.streetStyle);
    case Attribute::AvgBuildingHeight: return a.avgBuildingHeight;
    case Attribute::BuildingCount: return a.buildingCount;
    case Attribute::CentreHeightRatio: return a.centreHeightRatio;
  }
  return 0.0;
}

CandidateAttributes extractAttributes(const CityGenome& g) {
  CandidateAttributes out;
  out.streetStyle = g.streetStyle;
  const int w = g.dim.width;
  const int h = g.dim.height;

  // Mark cells within the centre radius of any centre cell.
  std::vector<std::uint8_t> nearCentre(g.ground.size(), 0);
  const int r = static_cast<int>(kCentreRadius);
  for (int cy = 0; cy < h; ++cy) {
    for (int cx = 0; cx < w; ++cx) {
      if (g.city.at(cx, cy) == 0) continue;
      for (int y = std::max(0, cy - r); y <= std::min(h - 1, cy + r); ++y) {
        for (int x = std::max(0, cx - r); x <= std::min(w - 1, cx + r); ++x) {
          const int dx = x - cx;
          const int dy = y - cy;
          if (dx * dx + dy * dy <= r * r) nearCentre[g.ground.index(x, y)] = 1;
        }
      }
    }
  }

  std::size_t water = 0;
  double heightSum = 0.0, insideSum = 0.0, outsideSum = 0.0;
  int inside = 0, outside = 0;
  for (std::size_t i = 0; i < g.ground.size(); ++i) {
    if (g.ground[i] == cell::kWater) ++water;
    if (g.buildings[i] == cell::kNoBuilding) continue;
    ++out.buildingCount;
    heightSum += g.heightmap[i];
    if (nearCentre[i] != 0) {
      insideSum += g.heightmap[i];
      ++inside;
    } else {
      outsideSum += g.heightmap[i];
      ++outside;
    }
  }
  out.waterFraction = static_cast<double>(water) / static_cast<double>(g.ground.size());
  out.avgBuildingHeight = out.buildingCount > 0 ? heightSum / out.buildingCount : 0.0;
  if (outside > 0 && outsideSum > 0.0) {
    const double insideMean = inside > 0 ? insideSum / inside : 0.0;
    out.centreHeightRatio = insideMean / (outsideSum / outside);
  }
  return out;
}

std::vector<CandidateAttributes> extractAttributes(const std::vector<CityGenome>& genomes) {
  std::vector<CandidateAttributes> out;
  out.reserve(genomes.size());
  for (const CityGenome& g : genomes) out.push_back(extractAttributes(g));
  return out;
}

Json toJson(const CandidateAttributes& a) {
  Json j;
  j["waterFraction"] = a.waterFraction;
  j["streetStyle"] = std::string(toString(a.streetStyle));
  j["avgBuildingHeight"] = a.avgBuildingHeight;
  j["buildingCount"] = a.buildingCount;
  j["centreHeightRatio"] = a.centreHeightRatio;
  j["label"] = std::string(toString(a.label));
  return j;
}

CandidateAttributes attributesFromJson(const Json& j) {
  try {
    CandidateAttributes a;
    a.waterFraction = j.at("waterFraction").get<double>();
    a.streetStyle = parseStreetStyle(j.at("streetStyle").get<std::string>());
    a.avgBuildingHeight = j.at("avgBuildingHeight").get<double>();
    a.buildingCount = j.at("buildingCount").get<int>();
    a.centreHeightRatio = j.at("centreHeightRatio").get<double>();
    a.label = j.contains("label") ? parseLabel(j.at("label").get<std::string>()) : Label::Unlabeled;
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace citygen
