#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "avfd/errors.hpp"

namespace avfd {

/// 8-bit image, row-major, interleaved channels (1 = gray, 3 = RGB).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, int c)
      : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * h * c, 0) {}

  bool empty() const { return data.empty(); }

  std::uint8_t& at(int y, int x, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int y, int x, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  bool operator==(const Image&) const = default;
};

/// Binary PGM (P5) / PPM (P6) with maxval 255.
Image load_pnm(const std::filesystem::path& path);
void save_pnm(const Image& img, const std::filesystem::path& path);

}  // namespace avfd
