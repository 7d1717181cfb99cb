#pragma once

#include <string_view>
#include <vector>

#include "citygen/genome.hpp"

namespace citygen {

struct Population {
  std::vector<CityGenome> candidates;
  int generationIndex = 0;

  friend bool operator==(const Population&, const Population&) = default;
};

enum class SelectionSource { Human, Agent, Oracle, Random };

std::string_view toString(SelectionSource source);
SelectionSource parseSelectionSource(std::string_view name);

struct ParentSelection {
  int first = 0;
  int second = 1;
  SelectionSource source = SelectionSource::Human;

  // Throws InvalidSelection for equal or out-of-range indices.
  void validate(int populationSize) const;
  friend bool operator==(const ParentSelection&, const ParentSelection&) = default;
};

Population seedPopulation(const EvolutionConfig& config);

// Breeds the next generation from two parents. Child i draws from a stream
// derived from (seed, next generation index, i), so the result does not depend
// on evaluation order.
Population breed(const ParentSelection& parents, const Population& pop,
                 const EvolutionConfig& config, double effectiveMutationRate);

// Mean normalised Hamming distance over all candidate pairs, averaged over the
// five grids and the street-style gene. In [0, 1].
double diversity(const Population& pop);

// Distance between two genomes on the same scale as diversity().
double genomeDistance(const CityGenome& a, const CityGenome& b);

}  // namespace citygen
