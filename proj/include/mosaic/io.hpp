#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mosaic/image.hpp"

namespace mosaic {

using Bytes = std::vector<std::uint8_t>;

/// Binary P5 / P6 with maxval 255. Header comments are skipped.
Image decode_pnm(std::span<const std::uint8_t> bytes);
/// Canonical `P5|P6\n<w> <h>\n255\n` header followed by raw samples.
Bytes encode_pnm(const Image& img);

/// 8-bit gray or RGB, non-interlaced. Palette, alpha, 16-bit and interlaced
/// files raise UnsupportedPngFeature.
Image decode_png(std::span<const std::uint8_t> bytes);
Bytes encode_png(const Image& img);

Bytes read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::string& path, const std::string& text);

/// Codec chosen by extension: .pgm/.ppm/.pnm or .png.
Image read_image(const std::string& path);
void write_image(const std::string& path, const Image& img);

/// Valid-mask debug output as a 1-channel PGM (0 / 255).
Bytes encode_mask_pgm(int width, int height, std::span<const std::uint8_t> mask);

}  // namespace mosaic
