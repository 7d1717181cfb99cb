#include "citygen/genome.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "citygen/error.hpp"
#include "citygen/hash.hpp"

namespace citygen {

void GridDim::validate() const {
  if (width < 4 || height < 4) {
    throw Error(ErrorCode::InvalidConfig, "grid must be at least 4x4, got " +
                                              std::to_string(width) + "x" + std::to_string(height));
  }
}

std::string_view toString(StreetStyle style) {
  return style == StreetStyle::NewYork ? "NewYork" : "European";
}

StreetStyle parseStreetStyle(std::string_view name) {
  if (name == "NewYork") return StreetStyle::NewYork;
  if (name == "European") return StreetStyle::European;
  throw Error(ErrorCode::ParseError, "unknown street style '" + std::string(name) + "'");
}

CityGenome CityGenome::blank(GridDim dim) {
  CityGenome g;
  g.dim = dim;
  g.ground = IntGrid(dim.width, dim.height, cell::kLand);
  g.heightmap = IntGrid(dim.width, dim.height, 0);
  g.streets = IntGrid(dim.width, dim.height, cell::kNoStreet);
  g.buildings = IntGrid(dim.width, dim.height, cell::kNoBuilding);
  g.city = IntGrid(dim.width, dim.height, 0);
  return g;
}

void EvolutionConfig::validate() const {
  dim.validate();
  if (populationSize < 3) throw Error(ErrorCode::InvalidConfig, "populationSize must be >= 3");
  if (!(mutationRate >= 0.0 && mutationRate <= 1.0)) {
    throw Error(ErrorCode::InvalidRate, "mutationRate must lie in [0, 1]");
  }
  if (maxHeight < 1) throw Error(ErrorCode::InvalidConfig, "maxHeight must be positive");
  if (!(centreVariance >= 0.0)) throw Error(ErrorCode::InvalidConfig, "centreVariance must be >= 0");
  if (crossoverBlockSize < 1) throw Error(ErrorCode::InvalidConfig, "crossoverBlockSize must be positive");
  if (!(waterFraction >= 0.0 && waterFraction <= 0.9)) {
    throw Error(ErrorCode::InvalidConfig, "waterFraction must lie in [0, 0.9]");
  }
}

namespace {

bool sameShape(const IntGrid& grid, GridDim dim) {
  return grid.width() == dim.width && grid.height() == dim.height;
}

template <class F>
void forEachNeighbour(const IntGrid& grid, int x, int y, F&& f) {
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if ((dx != 0 || dy != 0) && grid.inBounds(x + dx, y + dy)) f(x + dx, y + dy);
    }
  }
}

// Mean height over the 3x3 window centred on (x, y).
double windowMeanHeight(const CityGenome& g, int x, int y) {
  double sum = g.heightmap.at(x, y);
  int n = 1;
  forEachNeighbour(g.heightmap, x, y, [&](int nx, int ny) {
    sum += g.heightmap.at(nx, ny);
    ++n;
  });
  return sum / n;
}

// Smooth value noise in [-1, 1] from a coarse lattice with bilinear blending.
class LatticeNoise {
 public:
  LatticeNoise(int width, int height, int spacing, Rng& rng)
      : spacing_(spacing), cols_(width / spacing + 2), rows_(height / spacing + 2),
        values_(static_cast<std::size_t>(cols_) * rows_) {
    for (double& v : values_) v = rng.uniform(-1.0, 1.0);
  }

  double at(int x, int y) const {
    const double fx = static_cast<double>(x) / spacing_;
    const double fy = static_cast<double>(y) / spacing_;
    const int ix = static_cast<int>(fx);
    const int iy = static_cast<int>(fy);
    const double tx = fx - ix;
    const double ty = fy - iy;
    const double top = lerp(value(ix, iy), value(ix + 1, iy), tx);
    const double bottom = lerp(value(ix, iy + 1), value(ix + 1, iy + 1), tx);
    return lerp(top, bottom, ty);
  }

 private:
  static double lerp(double a, double b, double t) { return a + (b - a) * t; }
  double value(int ix, int iy) const { return values_[static_cast<std::size_t>(iy) * cols_ + ix]; }

  int spacing_;
  int cols_;
  int rows_;
  std::vector<double> values_;
};

void generateGround(CityGenome& g, const EvolutionConfig& config, Rng& rng) {
  const double target = config.waterFraction;
  if (target <= 0.0) return;
  const double lo = std::max(0.0, 2.0 * target - 0.9);
  const double hi = std::min(0.9, 2.0 * target);
  const double fraction = rng.uniform(lo, hi);

  // Half-plane through the grid, perturbed by lattice noise; the lowest
  // `fraction` of cells by projected value become water.
  const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double extent = std::max(g.dim.width, g.dim.height);
  const LatticeNoise noise(g.dim.width, g.dim.height, 16, rng);
  std::vector<double> value(g.ground.size());
  for (int y = 0; y < g.dim.height; ++y) {
    for (int x = 0; x < g.dim.width; ++x) {
      value[g.ground.index(x, y)] =
          (x * std::cos(theta) + y * std::sin(theta)) / extent + 0.15 * noise.at(x, y);
    }
  }
  std::vector<std::size_t> order(value.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto waterCells = static_cast<std::size_t>(std::lround(fraction * value.size()));
  std::nth_element(order.begin(), order.begin() + waterCells, order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return value[a] < value[b] || (value[a] == value[b] && a < b);
                   });
  for (std::size_t i = 0; i < waterCells; ++i) g.ground[order[i]] = cell::kWater;
}

std::size_t randomLandCell(const CityGenome& g, Rng& rng) {
  const int area = g.dim.area();
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const auto i = static_cast<std::size_t>(rng.uniformInt(0, area - 1));
    if (g.ground[i] == cell::kLand && g.city[i] == 0) return i;
  }
  for (std::size_t i = 0; i < g.ground.size(); ++i) {
    if (g.ground[i] == cell::kLand && g.city[i] == 0) return i;
  }
  return 0;
}

struct Point {
  double x;
  double y;
};

std::vector<Point> centrePoints(const CityGenome& g) {
  std::vector<Point> points;
  for (int y = 0; y < g.dim.height; ++y) {
    for (int x = 0; x < g.dim.width; ++x) {
      if (g.city.at(x, y) != 0) points.push_back({static_cast<double>(x), static_cast<double>(y)});
    }
  }
  return points;
}

double nearestDistance(const std::vector<Point>& points, int x, int y) {
  double best = std::numeric_limits<double>::infinity();
  for (const Point& p : points) best = std::min(best, std::hypot(x - p.x, y - p.y));
  return best;
}

void layNewYorkStreets(CityGenome& g, Rng& rng) {
  const int spacing = rng.uniformInt(5, 12);
  const int offsetX = rng.uniformInt(0, spacing - 1);
  const int offsetY = rng.uniformInt(0, spacing - 1);
  for (int y = 0; y < g.dim.height; ++y) {
    for (int x = 0; x < g.dim.width; ++x) {
      if (g.ground.at(x, y) == cell::kLand && (x % spacing == offsetX || y % spacing == offsetY)) {
        g.streets.at(x, y) = cell::kStreet;
      }
    }
  }
}

void layEuropeanStreets(CityGenome& g, Point hub, Rng& rng) {
  const int spokes = rng.uniformInt(6, 10);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double ringSpacing = rng.uniformInt(6, 12);
  const double sector = 2.0 * std::numbers::pi / spokes;
  for (int y = 0; y < g.dim.height; ++y) {
    for (int x = 0; x < g.dim.width; ++x) {
      if (g.ground.at(x, y) != cell::kLand) continue;
      const double dx = x - hub.x;
      const double dy = y - hub.y;
      const double d = std::hypot(dx, dy);
      // Angular offset to the nearest spoke, then perpendicular distance to it.
      double angle = std::atan2(dy, dx) - phase;
      angle -= sector * std::round(angle / sector);
      const bool onSpoke = d * std::abs(std::sin(angle)) < 0.5;
      const double ring = std::round(d / ringSpacing);
      const bool onRing = ring >= 1.0 && std::abs(d - ring * ringSpacing) < 0.5;
      if (onSpoke || onRing) g.streets.at(x, y) = cell::kStreet;
    }
  }
}

}  // namespace

std::vector<std::string> invariantViolations(const CityGenome& g, int maxHeight) {
  std::vector<std::string> out;
  g.dim.validate();
  for (const IntGrid* grid : {&g.ground, &g.heightmap, &g.streets, &g.buildings, &g.city}) {
    if (!sameShape(*grid, g.dim)) {
      out.emplace_back("grid shape differs from dim");
      return out;
    }
  }
  bool domain = true, waterClear = true, streetClear = true, heightZero = true, heightRange = true;
  bool centreOnLand = true;
  int centres = 0;
  for (std::size_t i = 0; i < g.ground.size(); ++i) {
    const auto ground = g.ground[i], height = g.heightmap[i], street = g.streets[i],
               building = g.buildings[i], centre = g.city[i];
    if ((ground != 0 && ground != 1) || (street != 0 && street != 1) || building < 0 ||
        building > 2 || (centre != 0 && centre != 1)) {
      domain = false;
    }
    if (height < 0 || height > maxHeight) heightRange = false;
    if (ground == cell::kWater && (street != cell::kNoStreet || building != cell::kNoBuilding)) {
      waterClear = false;
    }
    if (street == cell::kStreet && building != cell::kNoBuilding) streetClear = false;
    if (building == cell::kNoBuilding && height != 0) heightZero = false;
    if (building != cell::kNoBuilding && height < 1) heightRange = false;
    if (centre != 0) {
      ++centres;
      if (ground != cell::kLand) centreOnLand = false;
    }
  }
  if (!domain) out.emplace_back("cell value outside its grid domain");
  if (!heightRange) out.emplace_back("building height outside [1, maxHeight]");
  if (!waterClear) out.emplace_back("street or building on water");
  if (!streetClear) out.emplace_back("building on street");
  if (!heightZero) out.emplace_back("height on a cell without building");
  if (!centreOnLand) out.emplace_back("city centre on water");
  if (centres < 1 || centres > kMaxCentres) out.emplace_back("city centre count outside [1, 3]");
  return out;
}

CityGenome repair(CityGenome g) {
  const std::size_t n = g.ground.size();
  bool anyLand = false;
  for (std::size_t i = 0; i < n; ++i) anyLand = anyLand || g.ground[i] == cell::kLand;
  if (!anyLand && n > 0) g.ground[0] = cell::kLand;

  for (std::size_t i = 0; i < n; ++i) {
    if (g.city[i] != 0) g.city[i] = 1;
    if (g.ground[i] == cell::kWater) {
      g.streets[i] = cell::kNoStreet;
      g.buildings[i] = cell::kNoBuilding;
      g.city[i] = 0;
    } else if (g.streets[i] == cell::kStreet) {
      g.buildings[i] = cell::kNoBuilding;
    }
    if (g.buildings[i] == cell::kNoBuilding) {
      g.heightmap[i] = 0;
    } else if (g.heightmap[i] < 1) {
      g.heightmap[i] = 1;
    }
  }

  std::vector<std::size_t> centres;
  for (std::size_t i = 0; i < n; ++i) {
    if (g.city[i] != 0) centres.push_back(i);
  }
  if (centres.empty()) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (g.ground[i] != cell::kLand) continue;
      if (best == n || g.heightmap[i] > g.heightmap[best]) best = i;
    }
    g.city[best] = 1;
  } else if (centres.size() > static_cast<std::size_t>(kMaxCentres)) {
    std::vector<std::pair<double, std::size_t>> ranked;
    for (const std::size_t i : centres) {
      const int x = static_cast<int>(i % g.dim.width);
      const int y = static_cast<int>(i / g.dim.width);
      ranked.emplace_back(windowMeanHeight(g, x, y), i);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = kMaxCentres; k < ranked.size(); ++k) g.city[ranked[k].second] = 0;
  }
  return g;
}

CityGenome randomGenome(const EvolutionConfig& config, Rng& rng) {
  config.validate();
  CityGenome g = CityGenome::blank(config.dim);
  generateGround(g, config, rng);
  g.streetStyle = rng.bernoulli(0.5) ? StreetStyle::European : StreetStyle::NewYork;

  const int centreCount = rng.uniformInt(1, kMaxCentres);
  for (int c = 0; c < centreCount; ++c) g.city[randomLandCell(g, rng)] = 1;
  const std::vector<Point> centres = centrePoints(g);

  if (g.streetStyle == StreetStyle::NewYork) {
    layNewYorkStreets(g, rng);
  } else {
    // The primary centre is the first one in row-major order.
    layEuropeanStreets(g, centres.front(), rng);
  }

  const double extent = std::max(config.dim.width, config.dim.height);
  const double densityRadius = 0.6 * extent;
  const double peak = rng.uniform(0.25, 1.0) * config.maxHeight;
  const double base = rng.uniform(1.0, std::max(1.0, 0.1 * config.maxHeight));
  const double falloffRadius = rng.uniform(0.25, 0.6) * extent;
  const double boxShare = rng.uniform(0.5, 0.9);
  for (int y = 0; y < config.dim.height; ++y) {
    for (int x = 0; x < config.dim.width; ++x) {
      const std::size_t i = g.ground.index(x, y);
      if (g.ground[i] != cell::kLand || g.streets[i] == cell::kStreet) continue;
      const double d = nearestDistance(centres, x, y);
      const double density = 0.55 + 0.4 * std::max(0.0, 1.0 - d / densityRadius);
      if (!rng.bernoulli(density)) continue;
      g.buildings[i] = rng.bernoulli(boxShare) ? cell::kBox : cell::kCylinder;
      const double decay = std::max(0.0, 1.0 - d / falloffRadius);
      const double jitter = 1.0 + rng.uniform(-config.centreVariance, config.centreVariance);
      const double h = (base + (peak - base) * decay) * jitter;
      g.heightmap[i] = std::clamp(static_cast<int>(std::lround(h)), 1, config.maxHeight);
    }
  }
  return repair(std::move(g));
}

CityGenome spliceBlocks(const CityGenome& a, const CityGenome& b, int blockSize,
                        std::span<const std::uint8_t> takeB, bool styleFromB) {
  if (!(a.dim == b.dim)) throw Error(ErrorCode::DimensionMismatch, "parents differ in grid size");
  if (blockSize < 1) throw Error(ErrorCode::InvalidConfig, "blockSize must be positive");
  const int blocksX = (a.dim.width + blockSize - 1) / blockSize;
  const int blocksY = (a.dim.height + blockSize - 1) / blockSize;
  if (takeB.size() != static_cast<std::size_t>(blocksX) * blocksY) {
    throw Error(ErrorCode::MisalignedInput, "expected one coin per block");
  }
  CityGenome child = a;
  child.streetStyle = styleFromB ? b.streetStyle : a.streetStyle;
  for (int by = 0; by < blocksY; ++by) {
    for (int bx = 0; bx < blocksX; ++bx) {
      if (takeB[static_cast<std::size_t>(by) * blocksX + bx] == 0) continue;
      const int x1 = std::min(a.dim.width, (bx + 1) * blockSize);
      const int y1 = std::min(a.dim.height, (by + 1) * blockSize);
      for (int y = by * blockSize; y < y1; ++y) {
        for (int x = bx * blockSize; x < x1; ++x) {
          const std::size_t i = a.ground.index(x, y);
          child.ground[i] = b.ground[i];
          child.heightmap[i] = b.heightmap[i];
          child.streets[i] = b.streets[i];
          child.buildings[i] = b.buildings[i];
          child.city[i] = b.city[i];
        }
      }
    }
  }
  return child;
}

CityGenome crossover(const CityGenome& a, const CityGenome& b, const EvolutionConfig& config,
                     Rng& rng) {
  if (!(a.dim == b.dim)) throw Error(ErrorCode::DimensionMismatch, "parents differ in grid size");
  const int block = config.crossoverBlockSize;
  const int blocksX = (a.dim.width + block - 1) / block;
  const int blocksY = (a.dim.height + block - 1) / block;
  std::vector<std::uint8_t> coins(static_cast<std::size_t>(blocksX) * blocksY);
  for (auto& coin : coins) coin = rng.bernoulli(0.5) ? 1 : 0;
  const bool styleFromB = rng.bernoulli(0.5);
  return repair(spliceBlocks(a, b, block, coins, styleFromB));
}

CityGenome mutate(const CityGenome& g, double rate, const EvolutionConfig& config, Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw Error(ErrorCode::InvalidRate, "mutation rate must lie in [0, 1], got " + std::to_string(rate));
  }
  namespace ms = mutation_scale;
  CityGenome out = g;
  const std::size_t n = out.ground.size();

  const double pGround = rate * ms::kGround;
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.bernoulli(pGround)) out.ground[i] = 1 - out.ground[i];
  }

  const double pStreet = rate * ms::kStreet;
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.bernoulli(pStreet)) out.streets[i] = 1 - out.streets[i];
  }

  const double pBuilding = rate * ms::kBuilding;
  for (int y = 0; y < out.dim.height; ++y) {
    for (int x = 0; x < out.dim.width; ++x) {
      const std::size_t i = out.ground.index(x, y);
      if (!rng.bernoulli(pBuilding)) continue;
      const int previous = out.buildings[i];
      const int type = rng.uniformInt(cell::kNoBuilding, cell::kCylinder);
      out.buildings[i] = type;
      if (type == cell::kNoBuilding) {
        out.heightmap[i] = 0;
      } else if (previous == cell::kNoBuilding) {
        // New buildings take the mean height of their built neighbours.
        double sum = 0.0;
        int count = 0;
        forEachNeighbour(out.heightmap, x, y, [&](int nx, int ny) {
          if (out.buildings.at(nx, ny) != cell::kNoBuilding && out.heightmap.at(nx, ny) > 0) {
            sum += out.heightmap.at(nx, ny);
            ++count;
          }
        });
        const int h = count > 0 ? static_cast<int>(std::lround(sum / count)) : 1;
        out.heightmap[i] = std::clamp(h, 1, config.maxHeight);
      }
    }
  }

  const double pHeight = rate * ms::kHeight;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.buildings[i] == cell::kNoBuilding || !rng.bernoulli(pHeight)) continue;
    const auto delta = static_cast<int>(std::lround(rng.normal(0.0, ms::kHeightSigma)));
    out.heightmap[i] = std::clamp(out.heightmap[i] + delta, 1, config.maxHeight);
  }

  const double pCentre = rate * ms::kCentre;
  std::vector<std::size_t> centres;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.city[i] != 0) centres.push_back(i);
  }
  for (const std::size_t i : centres) {
    if (!rng.bernoulli(pCentre)) continue;
    out.city[i] = 0;
    out.city[randomLandCell(out, rng)] = 1;
  }

  if (rng.bernoulli(rate * ms::kStyle)) {
    out.streetStyle =
        out.streetStyle == StreetStyle::NewYork ? StreetStyle::European : StreetStyle::NewYork;
  }
  return repair(std::move(out));
}

namespace {

Json gridToJson(const IntGrid& grid) {
  Json arr = Json::array();
  for (const auto v : grid.cells()) arr.push_back(v);
  return arr;
}

IntGrid gridFromJson(const Json& j, GridDim dim, const char* name) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(dim.area())) {
    throw Error(ErrorCode::ParseError, std::string("grid '") + name + "' has wrong length");
  }
  IntGrid grid(dim.width, dim.height);
  for (std::size_t i = 0; i < j.size(); ++i) grid[i] = j[i].get<std::int32_t>();
  return grid;
}

}  // namespace

Json toJson(const CityGenome& g) {
  Json j;
  j["dim"] = {{"width", g.dim.width}, {"height", g.dim.height}};
  j["streetStyle"] = std::string(toString(g.streetStyle));
  j["ground"] = gridToJson(g.ground);
  j["heightmap"] = gridToJson(g.heightmap);
  j["streets"] = gridToJson(g.streets);
  j["buildings"] = gridToJson(g.buildings);
  j["city"] = gridToJson(g.city);
  return j;
}

CityGenome genomeFromJson(const Json& j) {
  try {
    CityGenome g;
    g.dim = {j.at("dim").at("width").get<int>(), j.at("dim").at("height").get<int>()};
    g.dim.validate();
    g.streetStyle = parseStreetStyle(j.at("streetStyle").get<std::string>());
    g.ground = gridFromJson(j.at("ground"), g.dim, "ground");
    g.heightmap = gridFromJson(j.at("heightmap"), g.dim, "heightmap");
    g.streets = gridFromJson(j.at("streets"), g.dim, "streets");
    g.buildings = gridFromJson(j.at("buildings"), g.dim, "buildings");
    g.city = gridFromJson(j.at("city"), g.dim, "city");
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

std::string genomeHash(const CityGenome& g) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(12 + 5 * 4 * g.ground.size());
  auto put = [&](std::int32_t v) {
    const auto u = static_cast<std::uint32_t>(v);
    for (int s = 0; s < 32; s += 8) bytes.push_back(static_cast<std::uint8_t>(u >> s));
  };
  put(g.dim.width);
  put(g.dim.height);
  put(static_cast<std::int32_t>(g.streetStyle));
  for (const IntGrid* grid : {&g.ground, &g.heightmap, &g.streets, &g.buildings, &g.city}) {
    for (const auto v : grid->cells()) put(v);
  }
  return sha256Hex(bytes);
}

}  // namespace citygen
