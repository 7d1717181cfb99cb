#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "citygen/genome.hpp"
#include "citygen/rng.hpp"

namespace citygen::testing {

inline EvolutionConfig smallConfig(int side = 20, std::uint64_t seed = 1) {
  EvolutionConfig cfg;
  cfg.dim = {side, side};
  cfg.crossoverBlockSize = 5;
  cfg.seed = seed;
  return cfg;
}

// A valid genome on a small grid with random size, water share and style.
inline CityGenome validGenome(Rng& rng) {
  EvolutionConfig cfg = smallConfig(rng.uniformInt(8, 32));
  cfg.waterFraction = rng.uniform(0.0, 0.6);
  return randomGenome(cfg, rng);
}

// Arbitrary cell values, mostly violating the genome invariants.
inline CityGenome arbitraryGenome(Rng& rng, GridDim dim = {12, 12}) {
  CityGenome g = CityGenome::blank(dim);
  for (std::size_t i = 0; i < g.ground.size(); ++i) {
    g.ground[i] = rng.uniformInt(0, 1);
    g.heightmap[i] = rng.uniformInt(0, 60);
    g.streets[i] = rng.uniformInt(0, 1);
    g.buildings[i] = rng.uniformInt(0, 2);
    g.city[i] = rng.bernoulli(0.05) ? 1 : 0;
  }
  g.streetStyle = rng.bernoulli(0.5) ? StreetStyle::European : StreetStyle::NewYork;
  return g;
}

// All land, one centre at the origin, no streets or buildings.
inline CityGenome emptyCity(GridDim dim) {
  CityGenome g = CityGenome::blank(dim);
  g.city[0] = 1;
  return g;
}

inline void putBuilding(CityGenome& g, int x, int y, int height, int type = cell::kBox) {
  g.buildings.at(x, y) = type;
  g.heightmap.at(x, y) = height;
}

inline std::string readText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace citygen::testing
