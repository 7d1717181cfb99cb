#include "citygen/evolution.hpp"

#include "citygen/error.hpp"

namespace citygen {

std::string_view toString(SelectionSource source) {
  switch (source) {
    case SelectionSource::Human: return "Human";
    case SelectionSource::Agent: return "Agent";
    case SelectionSource::Oracle: return "Oracle";
    case SelectionSource::Random: return "Random";
  }
  return "Human";
}

SelectionSource parseSelectionSource(std::string_view name) {
  if (name == "Human") return SelectionSource::Human;
  if (name == "Agent") return SelectionSource::Agent;
  if (name == "Oracle") return SelectionSource::Oracle;
  if (name == "Random") return SelectionSource::Random;
  throw Error(ErrorCode::ParseError, "unknown selection source '" + std::string(name) + "'");
}

void ParentSelection::validate(int populationSize) const {
  if (first < 0 || second < 0 || first >= populationSize || second >= populationSize) {
    throw Error(ErrorCode::InvalidSelection, "parent index out of range");
  }
  if (first == second) throw Error(ErrorCode::InvalidSelection, "parents must be distinct");
}

Population seedPopulation(const EvolutionConfig& config) {
  config.validate();
  Population pop;
  pop.generationIndex = 0;
  pop.candidates.reserve(config.populationSize);
  for (int i = 0; i < config.populationSize; ++i) {
    Rng rng(deriveSeed(config.seed, {stream::kSeedPopulation, static_cast<std::uint64_t>(i)}));
    pop.candidates.push_back(randomGenome(config, rng));
  }
  return pop;
}

Population breed(const ParentSelection& parents, const Population& pop,
                 const EvolutionConfig& config, double effectiveMutationRate) {
  const int size = static_cast<int>(pop.candidates.size());
  if (parents.first < 0 || parents.second < 0 || parents.first >= size || parents.second >= size) {
    throw Error(ErrorCode::IndexOutOfRange, "parent index outside population");
  }
  if (parents.first == parents.second) {
    throw Error(ErrorCode::EqualParents, "the two parents must be distinct candidates");
  }
  const CityGenome& a = pop.candidates[parents.first];
  const CityGenome& b = pop.candidates[parents.second];

  Population next;
  next.generationIndex = pop.generationIndex + 1;
  next.candidates.reserve(config.populationSize);
  for (int i = 0; i < config.populationSize; ++i) {
    if (config.elitism && i == 0) {
      next.candidates.push_back(a);
      continue;
    }
    if (config.elitism && i == 1) {
      next.candidates.push_back(b);
      continue;
    }
    Rng rng(deriveSeed(config.seed, {stream::kBreed, static_cast<std::uint64_t>(next.generationIndex),
                                     static_cast<std::uint64_t>(i)}));
    next.candidates.push_back(mutate(crossover(a, b, config, rng), effectiveMutationRate, config, rng));
  }
  return next;
}

double genomeDistance(const CityGenome& a, const CityGenome& b) {
  if (!(a.dim == b.dim)) throw Error(ErrorCode::DimensionMismatch, "genomes differ in grid size");
  const double area = a.dim.area();
  double total = 0.0;
  const IntGrid CityGenome::*grids[] = {&CityGenome::ground, &CityGenome::heightmap,
                                        &CityGenome::streets, &CityGenome::buildings,
                                        &CityGenome::city};
  for (const auto grid : grids) {
    const auto lhs = (a.*grid).cells();
    const auto rhs = (b.*grid).cells();
    std::size_t differing = 0;
    for (std::size_t i = 0; i < lhs.size(); ++i) differing += lhs[i] != rhs[i] ? 1 : 0;
    total += static_cast<double>(differing) / area;
  }
  total += a.streetStyle != b.streetStyle ? 1.0 : 0.0;
  return total / 6.0;
}

double diversity(const Population& pop) {
  const std::size_t n = pop.candidates.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sum += genomeDistance(pop.candidates[i], pop.candidates[j]);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

}  // namespace citygen
