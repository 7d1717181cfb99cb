#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "citygen/genome.hpp"

namespace citygen {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Palette {
  Rgb background{24, 26, 32};
  Rgb water{38, 92, 168};
  Rgb land{120, 150, 96};
  Rgb street{70, 70, 74};
  Rgb buildingLow{210, 204, 190};
  Rgb buildingHigh{250, 120, 60};
  Rgb centre{236, 48, 96};

  friend bool operator==(const Palette&, const Palette&) = default;
};

Palette paletteFromJson(const Json& j);
Json toJson(const Palette& palette);

enum class Projection { TopDown, Isometric };

std::string_view toString(Projection p);
Projection parseProjection(std::string_view name);

struct ViewConfig {
  int imageWidth = 480;
  int imageHeight = 270;
  Projection projection = Projection::Isometric;
  Palette palette;
  int maxHeight = 60;  // top of the height colour ramp and the vertical fit

  void validate() const;
};

// Row-major RGB8 pixels.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h, Rgb fill);

  Rgb pixel(int x, int y) const;
  void set(int x, int y, Rgb c);

  friend bool operator==(const Image&, const Image&) = default;
};

Image renderGenome(const CityGenome& g, const ViewConfig& view);

// PNG, RGB8, non-interlaced, filter 0 on every row, zlib level 6.
// Throws EncodingFailure for an empty image.
std::vector<std::uint8_t> encodePng(const Image& img);

inline constexpr std::array<std::uint8_t, 8> kPngSignature = {137, 80, 78, 71, 13, 10, 26, 10};

// SHA-256 over width, height and pixel bytes.
std::string imageHash(const Image& img);

}  // namespace citygen
