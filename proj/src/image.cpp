#include "mosaic/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mosaic/error.hpp"

namespace mosaic {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateProjection: return "degenerate-projection";
    case ErrorKind::DegenerateConfiguration: return "degenerate-configuration";
    case ErrorKind::DegenerateHomography: return "degenerate-homography";
    case ErrorKind::InsufficientCorrespondences: return "insufficient-correspondences";
    case ErrorKind::NoConsensus: return "no-consensus";
    case ErrorKind::SingularMatrix: return "singular-matrix";
    case ErrorKind::DescriptorKindMismatch: return "descriptor-kind-mismatch";
    case ErrorKind::EmptyTrain: return "empty-train";
    case ErrorKind::IndexOutOfRange: return "index-out-of-range";
    case ErrorKind::OutputTooSmall: return "output-too-small";
    case ErrorKind::ImageTooSmall: return "image-too-small";
    case ErrorKind::EmptyCanvas: return "empty-canvas";
    case ErrorKind::ShapeMismatch: return "shape-mismatch";
    case ErrorKind::CanvasSizeLimit: return "canvas-size-limit";
    case ErrorKind::FrameTooSmall: return "frame-too-small";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::PoseEscapesSource: return "pose-escapes-source";
    case ErrorKind::MalformedHeader: return "malformed-header";
    case ErrorKind::TruncatedData: return "truncated-data";
    case ErrorKind::UnsupportedMaxval: return "unsupported-maxval";
    case ErrorKind::UnsupportedPngFeature: return "unsupported-png-feature";
    case ErrorKind::CorruptPng: return "corrupt-png";
    case ErrorKind::ParseError: return "parse-error";
    case ErrorKind::UnknownKey: return "unknown-key";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Image::Image(int w, int h, int c, std::uint8_t fill)
    : width(w), height(h), channels(c),
      data(static_cast<std::size_t>(w) * h * c, fill) {}

std::uint8_t saturate_u8(double v) {
  const double r = v < 0.0 ? -std::floor(-v + 0.5) : std::floor(v + 0.5);
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

Image to_luma(const Image& img) {
  if (img.channels == 1) return img;
  if (img.channels != 3) {
    throw Error(ErrorKind::InvalidArgument,
                "to_luma: unsupported channel count " + std::to_string(img.channels));
  }
  Image out(img.width, img.height, 1);
  const std::size_t n = img.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned r = img.data[3 * i], g = img.data[3 * i + 1], b = img.data[3 * i + 2];
    // Integer form of round(0.299R + 0.587G + 0.114B); max is exactly 255.
    out.data[i] = static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
  }
  return out;
}

Image to_rgb(const Image& img) {
  if (img.channels == 3) return img;
  Image out(img.width, img.height, 3);
  const std::size_t n = img.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    out.data[3 * i] = out.data[3 * i + 1] = out.data[3 * i + 2] = img.data[i];
  }
  return out;
}

namespace {

struct AreaTap {
  int src;
  double weight;
};

// For each output index, the source pixels its footprint [i/f, (i+1)/f) covers
// and their normalized overlap weights.
std::vector<std::vector<AreaTap>> area_taps(int src_len, int dst_len, double factor) {
  std::vector<std::vector<AreaTap>> taps(dst_len);
  const double inv = 1.0 / factor;
  for (int i = 0; i < dst_len; ++i) {
    const double a = i * inv;
    const double b = std::min<double>((i + 1) * inv, src_len);
    double total = 0.0;
    for (int s = static_cast<int>(std::floor(a)); s < src_len && s < b; ++s) {
      const double overlap = std::min<double>(s + 1, b) - std::max<double>(s, a);
      if (overlap <= 1e-12) continue;
      taps[i].push_back({s, overlap});
      total += overlap;
    }
    for (auto& t : taps[i]) t.weight /= total;
  }
  return taps;
}

}  // namespace

Image downscale(const Image& img, double factor) {
  if (!(factor > 0.0) || factor > 1.0) {
    throw Error(ErrorKind::InvalidArgument, "downscale: factor must lie in (0, 1]");
  }
  if (factor == 1.0) return img;
  const int ow = static_cast<int>(std::floor(img.width * factor));
  const int oh = static_cast<int>(std::floor(img.height * factor));
  if (ow < 16 || oh < 16) {
    throw Error(ErrorKind::OutputTooSmall,
                "downscale: output " + std::to_string(ow) + "x" + std::to_string(oh) +
                    " is below 16x16");
  }
  const int c = img.channels;
  const auto xt = area_taps(img.width, ow, factor);
  const auto yt = area_taps(img.height, oh, factor);

  // Horizontal pass into doubles, then vertical pass with rounding.
  std::vector<double> tmp(static_cast<std::size_t>(ow) * img.height * c, 0.0);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (const auto& t : xt[x]) acc += t.weight * img.at(t.src, y, ch);
        tmp[(static_cast<std::size_t>(y) * ow + x) * c + ch] = acc;
      }
    }
  }
  Image out(ow, oh, c);
  const std::size_t row_len = static_cast<std::size_t>(ow) * c;
  std::vector<double> acc(row_len);
  for (int y = 0; y < oh; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const auto& t : yt[y]) {
      const double* src = tmp.data() + static_cast<std::size_t>(t.src) * row_len;
      for (std::size_t i = 0; i < row_len; ++i) acc[i] += t.weight * src[i];
    }
    std::uint8_t* dst = out.data.data() + static_cast<std::size_t>(y) * row_len;
    // Area averages of u8 samples stay inside [0, 255].
    for (std::size_t i = 0; i < row_len; ++i) {
      dst[i] = static_cast<std::uint8_t>(std::min(acc[i] + 0.5, 255.0));
    }
  }
  return out;
}

Plane luma_plane(const Image& img) {
  const Image gray = img.channels == 1 ? img : to_luma(img);
  Plane p(gray.width, gray.height);
  for (std::size_t i = 0; i < gray.data.size(); ++i) p.data[i] = gray.data[i] * (1.0f / 255.0f);
  return p;
}

}  // namespace mosaic
