#include <zlib.h>

#include <array>
#include <cstdlib>
#include <cstring>
#include <string>

#include "mosaic/error.hpp"
#include "mosaic/io.hpp"

namespace mosaic {

namespace {

constexpr std::array<std::uint8_t, 8> kSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

void put_be32(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(Bytes& out, const char* type, const Bytes& data) {
  put_be32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t type_pos = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc = crc32(0L, out.data() + type_pos, static_cast<uInt>(4 + data.size()));
  put_be32(out, static_cast<std::uint32_t>(crc));
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

Image decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kSignature.data(), 8) != 0) {
    throw Error(ErrorKind::CorruptPng, "png: bad signature");
  }
  std::size_t pos = 8;
  int width = 0, height = 0, channels = 0;
  bool have_header = false, have_end = false;
  Bytes idat;
  while (pos + 12 <= bytes.size()) {
    const std::uint32_t len = read_be32(bytes.data() + pos);
    if (len > bytes.size() - pos - 12) throw Error(ErrorKind::TruncatedData, "png: chunk overruns file");
    const std::uint8_t* type = bytes.data() + pos + 4;
    const std::uint8_t* data = type + 4;
    const std::uint32_t crc = read_be32(data + len);
    if (crc32(0L, type, len + 4) != crc) throw Error(ErrorKind::CorruptPng, "png: chunk CRC mismatch");
    const std::string name(reinterpret_cast<const char*>(type), 4);
    if (name == "IHDR") {
      if (len != 13) throw Error(ErrorKind::CorruptPng, "png: bad IHDR length");
      width = static_cast<int>(read_be32(data));
      height = static_cast<int>(read_be32(data + 4));
      const int depth = data[8], color = data[9], interlace = data[12];
      if (depth != 8) throw Error(ErrorKind::UnsupportedPngFeature, "png: bit depth " + std::to_string(depth));
      if (color == 3) throw Error(ErrorKind::UnsupportedPngFeature, "png: palette images");
      if (color == 4 || color == 6) throw Error(ErrorKind::UnsupportedPngFeature, "png: alpha channel");
      if (color != 0 && color != 2) throw Error(ErrorKind::CorruptPng, "png: invalid color type");
      if (interlace != 0) throw Error(ErrorKind::UnsupportedPngFeature, "png: interlaced images");
      if (data[10] != 0 || data[11] != 0) throw Error(ErrorKind::CorruptPng, "png: unknown compression/filter");
      if (width < 1 || height < 1) throw Error(ErrorKind::CorruptPng, "png: zero dimension");
      channels = color == 0 ? 1 : 3;
      have_header = true;
    } else if (name == "IDAT") {
      idat.insert(idat.end(), data, data + len);
    } else if (name == "IEND") {
      have_end = true;
      break;
    } else if (!(type[0] & 0x20)) {
      throw Error(ErrorKind::UnsupportedPngFeature, "png: unknown critical chunk " + name);
    }
    pos += 12 + len;
  }
  if (!have_header) throw Error(ErrorKind::CorruptPng, "png: missing IHDR");
  if (!have_end) throw Error(ErrorKind::TruncatedData, "png: missing IEND");

  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  Bytes raw((stride + 1) * height);
  uLongf raw_len = static_cast<uLongf>(raw.size());
  if (uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
      raw_len != raw.size()) {
    throw Error(ErrorKind::CorruptPng, "png: image data does not inflate to the expected size");
  }

  Image img(width, height, channels);
  const int bpp = channels;
  for (int y = 0; y < height; ++y) {
    const std::uint8_t filter = raw[y * (stride + 1)];
    const std::uint8_t* src = raw.data() + y * (stride + 1) + 1;
    std::uint8_t* dst = img.data.data() + y * stride;
    const std::uint8_t* up = y > 0 ? dst - stride : nullptr;
    for (std::size_t i = 0; i < stride; ++i) {
      const int a = i >= static_cast<std::size_t>(bpp) ? dst[i - bpp] : 0;
      const int b = up ? up[i] : 0;
      const int c = (up && i >= static_cast<std::size_t>(bpp)) ? up[i - bpp] : 0;
      int v = src[i];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += paeth(a, b, c); break;
        default: throw Error(ErrorKind::CorruptPng, "png: bad filter type");
      }
      dst[i] = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

Bytes encode_png(const Image& img) {
  if (img.channels != 1 && img.channels != 3) {
    throw Error(ErrorKind::InvalidArgument, "png: only 1- or 3-channel images can be encoded");
  }
  const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
  Bytes raw;
  raw.reserve((stride + 1) * img.height);
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(0);
    raw.insert(raw.end(), img.data.begin() + static_cast<std::ptrdiff_t>(y * stride),
               img.data.begin() + static_cast<std::ptrdiff_t>((y + 1) * stride));
  }
  uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
  Bytes z(zlen);
  if (compress2(z.data(), &zlen, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw Error(ErrorKind::Io, "png: deflate failed");
  }
  z.resize(zlen);

  Bytes out(kSignature.begin(), kSignature.end());
  Bytes ihdr;
  put_be32(ihdr, static_cast<std::uint32_t>(img.width));
  put_be32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.push_back(8);
  ihdr.push_back(img.channels == 1 ? 0 : 2);
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", z);
  put_chunk(out, "IEND", {});
  return out;
}

}  // namespace mosaic
