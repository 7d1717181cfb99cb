#pragma once

// Reference renders. A change to any of these means every stored run log
// stops replaying.

#include "citygen/genome.hpp"
#include "citygen/render.hpp"
#include "support.hpp"

namespace citygen::testing {

inline constexpr const char* kDemoIsometric = "c9d7f712fd60892a5c6ce3ad0c166619e883cf7aeba4e1cb4dec44c2129e1bd3";
inline constexpr const char* kDemoTopDown = "4e7eb0efae7db375ac80a92b32e5853a9fb71eb920a7c94fcb5d760ba6c0a8a9";
inline constexpr const char* kSingle8 = "ee42897d5ed91012fc95d84ec98f430ae9195cb47041b27b7b97ac83d879ebc4";
inline constexpr const char* kSingle16 = "d760ecbade4f75403f8cfc99d818cbc0ad9731caadb995522cb923789dd8dd6a";

inline CityGenome demoGenome() {
  EvolutionConfig cfg;
  cfg.seed = 1;
  Rng rng(deriveSeed(1, {stream::kSeedPopulation, 0}));
  return randomGenome(cfg, rng);
}

inline CityGenome singleBuilding(int height) {
  CityGenome g = emptyCity({21, 21});
  putBuilding(g, 10, 10, height);
  return g;
}

}  // namespace citygen::testing
