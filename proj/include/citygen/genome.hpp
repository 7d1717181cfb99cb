#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "citygen/grid.hpp"
#include "citygen/rng.hpp"

namespace citygen {

using Json = nlohmann::ordered_json;

struct GridDim {
  int width = 100;
  int height = 100;

  int area() const noexcept { return width * height; }
  void validate() const;
  friend bool operator==(const GridDim&, const GridDim&) = default;
};

enum class StreetStyle : std::int32_t { NewYork = 0, European = 1 };

std::string_view toString(StreetStyle style);
StreetStyle parseStreetStyle(std::string_view name);

// Cell codes for the five grids.
namespace cell {
inline constexpr std::int32_t kWater = 0;
inline constexpr std::int32_t kLand = 1;
inline constexpr std::int32_t kNoStreet = 0;
inline constexpr std::int32_t kStreet = 1;
inline constexpr std::int32_t kNoBuilding = 0;
inline constexpr std::int32_t kBox = 1;
inline constexpr std::int32_t kCylinder = 2;
}  // namespace cell

inline constexpr int kMaxCentres = 3;

// The city DNA: five aligned grids plus the street-style gene.
struct CityGenome {
  GridDim dim;
  IntGrid ground;     // water / land
  IntGrid heightmap;  // storeys, 0 where there is no building
  IntGrid streets;    // none / street
  IntGrid buildings;  // none / box / cylinder
  IntGrid city;       // 1 marks a city-centre cell
  StreetStyle streetStyle = StreetStyle::NewYork;

  // Blank all-land genome with no streets, buildings or centres. Callers are
  // expected to place at least one centre before handing it to the engine.
  static CityGenome blank(GridDim dim);

  friend bool operator==(const CityGenome&, const CityGenome&) = default;
};

struct EvolutionConfig {
  GridDim dim;
  int populationSize = 9;
  double mutationRate = 0.2;
  int maxHeight = 60;
  double centreVariance = 0.15;
  int crossoverBlockSize = 10;
  std::uint64_t seed = 0;
  // Expected water fraction of a random genome; 0 forces all-land masks.
  double waterFraction = 0.3;
  // Copy the two parents unmodified into slots 0 and 1 of the next generation.
  bool elitism = true;

  void validate() const;
};

// Relative per-locus mutation probabilities; a locus of the given kind
// mutates with probability rate * scale.
namespace mutation_scale {
inline constexpr double kGround = 0.05;
inline constexpr double kHeight = 0.5;
inline constexpr double kHeightSigma = 3.0;
inline constexpr double kStreet = 0.02;
inline constexpr double kBuilding = 0.1;
inline constexpr double kCentre = 0.05;
inline constexpr double kStyle = 0.1;
}  // namespace mutation_scale

// Returns the names of every violated invariant; empty for a valid genome.
std::vector<std::string> invariantViolations(const CityGenome& g, int maxHeight = 60);
inline bool isValid(const CityGenome& g, int maxHeight = 60) {
  return invariantViolations(g, maxHeight).empty();
}

// Restores the genome invariants: water clears streets/buildings/heights,
// streets clear buildings/heights, building cells carry at least one storey,
// and the centre count is brought into [1, 3].
CityGenome repair(CityGenome g);

CityGenome randomGenome(const EvolutionConfig& config, Rng& rng);

// Block-aligned splice of two parents without repair. takeB holds one coin per
// block in row-major block order (non-zero copies the block from b); the
// street style comes from b when styleFromB is set.
CityGenome spliceBlocks(const CityGenome& a, const CityGenome& b, int blockSize,
                        std::span<const std::uint8_t> takeB, bool styleFromB);

CityGenome crossover(const CityGenome& a, const CityGenome& b, const EvolutionConfig& config,
                     Rng& rng);

CityGenome mutate(const CityGenome& g, double rate, const EvolutionConfig& config, Rng& rng);

Json toJson(const CityGenome& g);
CityGenome genomeFromJson(const Json& j);

// SHA-256 over a canonical binary encoding; equal genomes hash equal.
std::string genomeHash(const CityGenome& g);

}  // namespace citygen
