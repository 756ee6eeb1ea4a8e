#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mosaic {

/// Owned 8-bit raster, row-major, interleaved channels (1 = luma, 3 = RGB).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, int c, std::uint8_t fill = 0);

  bool empty() const { return width == 0 || height == 0; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  std::uint8_t& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }

  bool operator==(const Image&) const = default;
};

/// Real-valued single-channel plane used for pyramid and gradient math.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  Plane() = default;
  Plane(int w, int h, float fill = 0.0f)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  float* row(int y) { return data.data() + static_cast<std::size_t>(y) * width; }
  const float* row(int y) const { return data.data() + static_cast<std::size_t>(y) * width; }
};

/// Rounds half away from zero and clamps into the u8 range.
std::uint8_t saturate_u8(double v);

/// 1-channel copy; RGB inputs use round(0.299R + 0.587G + 0.114B).
Image to_luma(const Image& img);

/// Replicates a gray image into 3 channels (RGB input is copied).
Image to_rgb(const Image& img);

/// Area-averaged resampling to (floor(w*f), floor(h*f)). Factor 1 returns a copy.
/// Throws OutputTooSmall if either output dimension would be below 16.
Image downscale(const Image& img, double factor);

/// Luma plane scaled to [0, 1].
Plane luma_plane(const Image& img);

}  // namespace mosaic
