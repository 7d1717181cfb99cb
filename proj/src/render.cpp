#include "citygen/render.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>

#include "citygen/error.hpp"
#include "citygen/hash.hpp"

namespace citygen {

namespace {

Rgb rgbFromJson(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::ParseError, "colour must be [r, g, b]");
  return {j[0].get<std::uint8_t>(), j[1].get<std::uint8_t>(), j[2].get<std::uint8_t>()};
}

Json rgbToJson(Rgb c) { return Json::array({c.r, c.g, c.b}); }

Rgb lerp(Rgb a, Rgb b, double t) {
  auto mix = [t](std::uint8_t x, std::uint8_t y) {
    return static_cast<std::uint8_t>(std::lround(x + (y - x) * t));
  };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

Rgb shade(Rgb c, double f) {
  auto s = [f](std::uint8_t x) { return static_cast<std::uint8_t>(std::lround(x * f)); };
  return {s(c.r), s(c.g), s(c.b)};
}

struct Vec2 {
  double x;
  double y;
};

// Fills a convex polygon by testing pixel centres against every edge.
void fillConvex(Image& img, std::span<const Vec2> poly, Rgb colour) {
  double minX = poly[0].x, maxX = poly[0].x, minY = poly[0].y, maxY = poly[0].y;
  double area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[(i + 1) % poly.size()];
    minX = std::min(minX, p.x);
    maxX = std::max(maxX, p.x);
    minY = std::min(minY, p.y);
    maxY = std::max(maxY, p.y);
    area += p.x * q.y - q.x * p.y;
  }
  if (area == 0.0) return;
  const double orient = area > 0.0 ? 1.0 : -1.0;
  const int x0 = std::max(0, static_cast<int>(std::floor(minX)));
  const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(maxX)));
  const int y0 = std::max(0, static_cast<int>(std::floor(minY)));
  const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(maxY)));
  for (int py = y0; py <= y1; ++py) {
    const double cy = py + 0.5;
    for (int px = x0; px <= x1; ++px) {
      const double cx = px + 0.5;
      bool inside = true;
      for (std::size_t i = 0; i < poly.size() && inside; ++i) {
        const Vec2 p = poly[i];
        const Vec2 q = poly[(i + 1) % poly.size()];
        inside = orient * ((q.x - p.x) * (cy - p.y) - (q.y - p.y) * (cx - p.x)) >= 0.0;
      }
      if (inside) img.set(px, py, colour);
    }
  }
}

void fillEllipse(Image& img, Vec2 c, double rx, double ry, Rgb colour) {
  const int x0 = std::max(0, static_cast<int>(std::floor(c.x - rx)));
  const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(c.x + rx)));
  const int y0 = std::max(0, static_cast<int>(std::floor(c.y - ry)));
  const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(c.y + ry)));
  for (int py = y0; py <= y1; ++py) {
    for (int px = x0; px <= x1; ++px) {
      const double dx = (px + 0.5 - c.x) / rx;
      const double dy = (py + 0.5 - c.y) / ry;
      if (dx * dx + dy * dy <= 1.0) img.set(px, py, colour);
    }
  }
}

Rgb groundColour(const CityGenome& g, std::size_t i, const Palette& palette) {
  if (g.ground[i] == cell::kWater) return palette.water;
  if (g.city[i] != 0) return palette.centre;
  if (g.streets[i] == cell::kStreet) return palette.street;
  return palette.land;
}

Rgb buildingColour(const CityGenome& g, std::size_t i, const ViewConfig& view) {
  const double t = std::clamp(static_cast<double>(g.heightmap[i]) / view.maxHeight, 0.0, 1.0);
  return lerp(view.palette.buildingLow, view.palette.buildingHigh, t);
}

Image renderTopDown(const CityGenome& g, const ViewConfig& view) {
  Image img(view.imageWidth, view.imageHeight, view.palette.background);
  // Square cells, letterboxed and centred.
  const double cellPx = std::min(static_cast<double>(img.width) / g.dim.width,
                                 static_cast<double>(img.height) / g.dim.height);
  const double ox = (img.width - cellPx * g.dim.width) / 2.0;
  const double oy = (img.height - cellPx * g.dim.height) / 2.0;
  for (int py = 0; py < img.height; ++py) {
    const int y = static_cast<int>(std::floor((py + 0.5 - oy) / cellPx));
    if (y < 0 || y >= g.dim.height) continue;
    for (int px = 0; px < img.width; ++px) {
      const int x = static_cast<int>(std::floor((px + 0.5 - ox) / cellPx));
      if (x < 0 || x >= g.dim.width) continue;
      const std::size_t i = g.ground.index(x, y);
      const bool built = g.buildings[i] != cell::kNoBuilding && g.ground[i] == cell::kLand;
      img.set(px, py, built ? buildingColour(g, i, view) : groundColour(g, i, view.palette));
    }
  }
  return img;
}

// Isometric camera: cell corner (x, y) at elevation z maps to
// (ox + (x - y) * a, oy + (x + y) * a / 2 - z * storey).
struct IsoCamera {
  double a;
  double storey;
  double ox;
  double oy;

  Vec2 project(double x, double y, double z) const {
    return {ox + (x - y) * a, oy + (x + y) * a / 2.0 - z * storey};
  }
};

IsoCamera fitCamera(GridDim dim, const ViewConfig& view) {
  const double span = dim.width + dim.height;
  // A storey is 0.3 of a cell edge on screen.
  const double storeyPerA = 0.6;
  const double a = std::min(0.95 * view.imageWidth / span,
                            0.95 * view.imageHeight / (span / 2.0 + storeyPerA * view.maxHeight));
  const double storey = storeyPerA * a;
  const double total = span * a / 2.0 + view.maxHeight * storey;
  return {a, storey, view.imageWidth / 2.0 - (dim.width - dim.height) * a / 2.0,
          (view.imageHeight - total) / 2.0 + view.maxHeight * storey};
}

void drawBox(Image& img, const IsoCamera& cam, int x, int y, double h, Rgb top, double inset) {
  const double x0 = x + inset, x1 = x + 1 - inset, y0 = y + inset, y1 = y + 1 - inset;
  const Vec2 e0 = cam.project(x1, y0, 0);
  const Vec2 s0 = cam.project(x1, y1, 0), w0 = cam.project(x0, y1, 0);
  const Vec2 n1 = cam.project(x0, y0, h), e1 = cam.project(x1, y0, h);
  const Vec2 s1 = cam.project(x1, y1, h), w1 = cam.project(x0, y1, h);
  const Vec2 left[] = {w0, s0, s1, w1};
  const Vec2 right[] = {s0, e0, e1, s1};
  const Vec2 lid[] = {n1, e1, s1, w1};
  fillConvex(img, left, shade(top, 0.75));
  fillConvex(img, right, shade(top, 0.55));
  fillConvex(img, lid, top);
}

void drawCylinder(Image& img, const IsoCamera& cam, int x, int y, double h, Rgb top, double inset) {
  const Vec2 base = cam.project(x + 0.5, y + 0.5, 0);
  const Vec2 cap = cam.project(x + 0.5, y + 0.5, h);
  const double rx = (0.5 - inset) * cam.a * std::sqrt(2.0) * 0.75;
  const double ry = rx / 2.0;
  const Rgb side = shade(top, 0.65);
  fillEllipse(img, base, rx, ry, side);
  const Vec2 body[] = {{base.x - rx, base.y}, {base.x + rx, base.y}, {cap.x + rx, cap.y}, {cap.x - rx, cap.y}};
  fillConvex(img, body, side);
  fillEllipse(img, cap, rx, ry, top);
}

Image renderIsometric(const CityGenome& g, const ViewConfig& view) {
  Image img(view.imageWidth, view.imageHeight, view.palette.background);
  const IsoCamera cam = fitCamera(g.dim, view);
  const int w = g.dim.width;
  const int h = g.dim.height;
  // Painter's order: back to front along the x + y diagonal.
  for (int d = 0; d <= w + h - 2; ++d) {
    for (int x = std::max(0, d - (h - 1)); x <= std::min(w - 1, d); ++x) {
      const int y = d - x;
      const std::size_t i = g.ground.index(x, y);
      const Vec2 tile[] = {cam.project(x, y, 0), cam.project(x + 1, y, 0),
                           cam.project(x + 1, y + 1, 0), cam.project(x, y + 1, 0)};
      fillConvex(img, tile, groundColour(g, i, view.palette));
      if (g.ground[i] != cell::kLand || g.buildings[i] == cell::kNoBuilding) continue;
      const Rgb top = g.city[i] != 0 ? view.palette.centre : buildingColour(g, i, view);
      if (g.buildings[i] == cell::kCylinder) {
        drawCylinder(img, cam, x, y, g.heightmap[i], top, 0.1);
      } else {
        drawBox(img, cam, x, y, g.heightmap[i], top, 0.1);
      }
    }
  }
  return img;
}

void putBigEndian(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void putChunk(std::vector<std::uint8_t>& out, const char (&type)[5], std::span<const std::uint8_t> data) {
  putBigEndian(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t typeAt = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc = crc32(0L, out.data() + typeAt, static_cast<uInt>(4 + data.size()));
  putBigEndian(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

Palette paletteFromJson(const Json& j) {
  Palette p;
  try {
    if (j.contains("background")) p.background = rgbFromJson(j.at("background"));
    if (j.contains("water")) p.water = rgbFromJson(j.at("water"));
    if (j.contains("land")) p.land = rgbFromJson(j.at("land"));
    if (j.contains("street")) p.street = rgbFromJson(j.at("street"));
    if (j.contains("buildingLow")) p.buildingLow = rgbFromJson(j.at("buildingLow"));
    if (j.contains("buildingHigh")) p.buildingHigh = rgbFromJson(j.at("buildingHigh"));
    if (j.contains("centre")) p.centre = rgbFromJson(j.at("centre"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return p;
}

Json toJson(const Palette& p) {
  return {{"background", rgbToJson(p.background)}, {"water", rgbToJson(p.water)},
          {"land", rgbToJson(p.land)},             {"street", rgbToJson(p.street)},
          {"buildingLow", rgbToJson(p.buildingLow)}, {"buildingHigh", rgbToJson(p.buildingHigh)},
          {"centre", rgbToJson(p.centre)}};
}

std::string_view toString(Projection p) { return p == Projection::TopDown ? "topdown" : "isometric"; }

Projection parseProjection(std::string_view name) {
  if (name == "topdown") return Projection::TopDown;
  if (name == "isometric") return Projection::Isometric;
  throw Error(ErrorCode::ParseError, "unknown projection '" + std::string(name) + "'");
}

void ViewConfig::validate() const {
  if (imageWidth < 1 || imageHeight < 1) throw Error(ErrorCode::InvalidConfig, "image size must be positive");
  if (maxHeight < 1) throw Error(ErrorCode::InvalidConfig, "maxHeight must be positive");
}

Image::Image(int w, int h, Rgb fill) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3) {
  for (std::size_t i = 0; i < rgb.size(); i += 3) {
    rgb[i] = fill.r;
    rgb[i + 1] = fill.g;
    rgb[i + 2] = fill.b;
  }
}

Rgb Image::pixel(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

void Image::set(int x, int y, Rgb c) {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  rgb[i] = c.r;
  rgb[i + 1] = c.g;
  rgb[i + 2] = c.b;
}

Image renderGenome(const CityGenome& g, const ViewConfig& view) {
  view.validate();
  return view.projection == Projection::TopDown ? renderTopDown(g, view) : renderIsometric(g, view);
}

std::vector<std::uint8_t> encodePng(const Image& img) {
  if (img.width <= 0 || img.height <= 0 ||
      img.rgb.size() != static_cast<std::size_t>(img.width) * img.height * 3) {
    throw Error(ErrorCode::EncodingFailure, "cannot encode an empty or malformed image");
  }
  std::vector<std::uint8_t> out(kPngSignature.begin(), kPngSignature.end());

  std::vector<std::uint8_t> header;
  putBigEndian(header, static_cast<std::uint32_t>(img.width));
  putBigEndian(header, static_cast<std::uint32_t>(img.height));
  header.insert(header.end(), {8, 2, 0, 0, 0});  // 8-bit RGB, deflate, no filter, no interlace
  putChunk(out, "IHDR", header);

  const std::size_t stride = static_cast<std::size_t>(img.width) * 3;
  std::vector<std::uint8_t> raw;
  raw.reserve((stride + 1) * img.height);
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(0);
    raw.insert(raw.end(), img.rgb.begin() + y * stride, img.rgb.begin() + (y + 1) * stride);
  }
  uLongf packedSize = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> packed(packedSize);
  if (compress2(packed.data(), &packedSize, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw Error(ErrorCode::EncodingFailure, "zlib compression failed");
  }
  packed.resize(packedSize);
  putChunk(out, "IDAT", packed);
  putChunk(out, "IEND", {});
  return out;
}

std::string imageHash(const Image& img) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(8 + img.rgb.size());
  for (const int v : {img.width, img.height}) {
    for (int s = 0; s < 32; s += 8) bytes.push_back(static_cast<std::uint8_t>(static_cast<std::uint32_t>(v) >> s));
  }
  bytes.insert(bytes.end(), img.rgb.begin(), img.rgb.end());
  return sha256Hex(bytes);
}

}  // namespace citygen
