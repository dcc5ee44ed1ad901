#include "pnp/image.hpp"

#include "pnp/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pnp {

Image::Image(int w, int h, double fill) : width(w), height(h) {
  if (w < 1 || h < 1) throw std::invalid_argument("Image: dimensions must be positive");
  pixels = Vec::Constant(static_cast<Index>(w) * h, fill);
}

Image::Image(int w, int h, Vec values) : width(w), height(h), pixels(std::move(values)) {
  if (w < 1 || h < 1) throw std::invalid_argument("Image: dimensions must be positive");
  if (pixels.size() != static_cast<Index>(w) * h) {
    throw std::invalid_argument("Image: pixel count does not match dimensions");
  }
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string header_token(std::istream& in) {
  std::string token;
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
      if (!token.empty()) break;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(c);
  }
  return token;
}

int parse_positive(const std::string& token, const char* field) {
  try {
    const int v = std::stoi(token);
    if (v > 0) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error(std::string("read_pgm: invalid ") + field);
}

}  // namespace

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pgm: cannot open " + path.string());

  const std::string magic = header_token(in);
  if (magic != "P2" && magic != "P5") {
    throw std::runtime_error("read_pgm: not a PGM file: " + path.string());
  }
  const int width = parse_positive(header_token(in), "width");
  const int height = parse_positive(header_token(in), "height");
  const int maxval = parse_positive(header_token(in), "maxval");
  if (maxval > 65535) throw std::runtime_error("read_pgm: maxval out of range");

  Image image(width, height);
  const Index n = image.size();
  if (magic == "P2") {
    for (Index i = 0; i < n; ++i) {
      long value = 0;
      if (!(in >> value)) throw std::runtime_error("read_pgm: truncated pixel data");
      image.pixels[i] = static_cast<double>(value) / maxval;
    }
  } else {
    const int bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(static_cast<std::size_t>(n) * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
      throw std::runtime_error("read_pgm: truncated pixel data");
    }
    for (Index i = 0; i < n; ++i) {
      const std::size_t k = static_cast<std::size_t>(i) * bytes;
      const unsigned value = bytes == 1 ? raw[k] : (raw[k] << 8u) | raw[k + 1];
      image.pixels[i] = static_cast<double>(value) / maxval;
    }
  }
  return image;
}

void write_pgm(const std::filesystem::path& path, const Image& image, PgmFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path.string());
  auto quantize = [](double v) {
    return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  };
  if (format == PgmFormat::plain) {
    out << "P2\n" << image.width << ' ' << image.height << "\n255\n";
    for (int r = 0; r < image.height; ++r) {
      for (int c = 0; c < image.width; ++c) {
        out << quantize(image.at(r, c)) << (c + 1 == image.width ? '\n' : ' ');
      }
    }
  } else {
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    for (Index i = 0; i < image.size(); ++i) {
      out.put(static_cast<char>(quantize(image.pixels[i])));
    }
  }
  if (!out) throw std::runtime_error("write_pgm: write failed for " + path.string());
}

Image synthetic_texture(int width, int height, std::uint64_t seed, double grain) {
  Rng rng(seed);
  Image image(width, height, 0.5);
  constexpr int kWaves = 4;
  for (int w = 0; w < kWaves; ++w) {
    const double fx = rng.uniform(-0.3, 0.3);
    const double fy = rng.uniform(-0.3, 0.3);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        image.at(r, c) += 0.1 * std::sin(2.0 * std::numbers::pi * (fx * c + fy * r) + phase);
      }
    }
  }
  for (Index i = 0; i < image.size(); ++i) {
    image.pixels[i] = std::clamp(image.pixels[i] + grain * (rng.uniform() - 0.5), 0.0, 1.0);
  }
  return image;
}

Image crop(const Image& image, int width, int height, int row0, int col0) {
  if (row0 < 0 || col0 < 0 || row0 + height > image.height || col0 + width > image.width) {
    throw std::invalid_argument("crop: window outside image");
  }
  Image out(width, height);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) out.at(r, c) = image.at(row0 + r, col0 + c);
  return out;
}

}  // namespace pnp
