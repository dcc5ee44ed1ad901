#pragma once

#include "pnp/tensor_core.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace pnp {

/// Grayscale image, row-major, flattened to a length width*height vector.
/// Pixel values live in [0, 1] nominally; they are only clamped on export.
struct Image {
  int width = 0;
  int height = 0;
  Vec pixels;

  Image() = default;
  Image(int w, int h, double fill = 0.0);
  Image(int w, int h, Vec values);

  Index size() const { return pixels.size(); }
  Index index(int row, int col) const { return static_cast<Index>(row) * width + col; }
  double& at(int row, int col) { return pixels[index(row, col)]; }
  double at(int row, int col) const { return pixels[index(row, col)]; }
};

enum class PgmFormat { plain, raw };  // P2 / P5

/// Reads P2 or P5; values are mapped linearly to [0, 1] using the header's maxval.
Image read_pgm(const std::filesystem::path& path);

/// Writes with maxval 255 after clamping to [0, 1] and rounding.
void write_pgm(const std::filesystem::path& path, const Image& image,
               PgmFormat format = PgmFormat::raw);

/// Deterministic textured test image: a few seeded plane waves plus uniform
/// grain, clamped to [0, 1].
Image synthetic_texture(int width, int height, std::uint64_t seed, double grain = 0.1);

/// Top-left crop.
Image crop(const Image& image, int width, int height, int row0 = 0, int col0 = 0);

}  // namespace pnp
