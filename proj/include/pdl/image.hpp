#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdl/types.hpp"

namespace pdl {

// Row-major grayscale image; nominal range [0, 1].
struct ImageGrid {
  Index width = 0;
  Index height = 0;
  std::vector<double> data;

  ImageGrid() = default;
  ImageGrid(Index w, Index h, double fill = 0.0);
  static ImageGrid from_vector(Index w, Index h, ConstVecRef v);

  double& at(Index r, Index c) { return data[static_cast<std::size_t>(r * width + c)]; }
  double at(Index r, Index c) const { return data[static_cast<std::size_t>(r * width + c)]; }
  Index size() const { return width * height; }
  Eigen::Map<const Vec> vec() const { return Eigen::Map<const Vec>(data.data(), size()); }
  Eigen::Map<Vec> vec() { return Eigen::Map<Vec>(data.data(), size()); }
};

// P2 or P5, maxval <= 65535; intensities divided by maxval.
ImageGrid load_image_pgm(const std::string& path);
// P5; values clamped to [0, 1] then quantized to maxval.
void save_image_pgm(const ImageGrid& img, const std::string& path, int maxval = 65535);

ImageGrid add_gaussian_noise(const ImageGrid& img, double sigma_eps, std::uint64_t seed);

// Piecewise-constant test scene (background, rectangle, disc, stripe).
ImageGrid make_phantom(Index width, Index height);

}  // namespace pdl
